//! Sample-based learning of local observables across a parameterized phase.
//!
//! Training draws parameter points from a declared distribution and attaches
//! either exact thermal states (materialized lazily) or randomized-
//! measurement shadow sets. Estimation matches the query's parameters to the
//! nearest training points on the coordinates near each observable term and
//! reads the term expectation off the matched state or averaged shadows,
//! with a per-term error certificate.
//!
//! Hyperparameters come in two modes: `Paper` evaluates the conservative
//! closed-form displays verbatim (astronomical at desk scale, kept for
//! formula fidelity), `Empirical` uses decay constants fitted from
//! indistinguishability scans plus a probed restricted Lipschitz constant.

use crate::error::{Error, Result};
use crate::fit::{self, DecayFit};
use crate::lattice::{HamiltonianFamily, ParamVector};
use crate::linalg::CMat;
use crate::operators::{gibbs_state, ground_state, QuantumState};
use crate::pauli::PauliString;
use crate::rng;
use crate::shadows::{collect_snapshots, robust_average, sample_count_t, ShadowSet};
use rand::Rng;
use std::sync::OnceLock;

/// One term of a local observable, stored on its own support register.
#[derive(Debug, Clone)]
pub struct ObservableTerm {
    pub support: Vec<usize>,
    pub matrix: CMat,
    pub norm: f64,
    /// Original string form, kept for O(d) expectation evaluation.
    pub string: Option<(f64, PauliString)>,
}

/// A sum `O = sum_i O_i` of local terms with bounded support diameter.
#[derive(Debug, Clone)]
pub struct LocalObservable {
    pub terms: Vec<ObservableTerm>,
    /// Bound on the number of sites spanned by any term (diameter + 1).
    pub k0: u32,
}

impl LocalObservable {
    pub fn new(family: &HamiltonianFamily, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let lattice = &family.lattice;
        let mut built = Vec::new();
        let mut k0 = 1u32;
        for (coeff, p) in terms {
            let support = p.support();
            if support.is_empty() {
                return Err(Error::InvalidParameter("identity term has no support".into()));
            }
            for &s in &support {
                if s >= lattice.len() {
                    return Err(Error::SiteOutOfLattice { site: s, n: lattice.len() });
                }
            }
            let mut diam = 0u64;
            for &a in &support {
                for &b in &support {
                    diam = diam.max(lattice.dist(a, b)?);
                }
            }
            k0 = k0.max(diam as u32 + 1);
            let matrix = p.dense_on(&support)?.mapv(|z| z * coeff);
            built.push(ObservableTerm { support, matrix, norm: coeff.abs(), string: Some((coeff, p)) });
        }
        Ok(Self { terms: built, k0 })
    }

    pub fn total_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.norm).sum()
    }

    /// Exact expectation under a full-register state.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            match &t.string {
                Some((coeff, p)) => acc += coeff * state.expect_pauli(p),
                None => {
                    let reduced = state.reduce(&t.support)?;
                    acc += reduced.expect_dense(&t.matrix);
                }
            }
        }
        Ok(acc)
    }
}

/// Sampling distribution over the parameter box.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Distribution {
    /// Uniform over the whole box `center + [-1, 1]^m`.
    UniformBox,
    /// Independent uniform draws on `[lo_k, hi_k]` per coordinate.
    Product(Vec<(f64, f64)>),
    /// Every entry equals the given point.
    Dirac(Vec<f64>),
}

impl Distribution {
    fn draw(&self, family: &HamiltonianFamily, rng: &mut impl Rng) -> Result<ParamVector> {
        let m = family.n_params();
        let values = match self {
            Distribution::UniformBox => family
                .center
                .iter()
                .map(|c| c + rng.gen_range(-1.0..=1.0))
                .collect(),
            Distribution::Product(ranges) => {
                if ranges.len() != m {
                    return Err(Error::UnsupportedDistribution("per-coordinate ranges must match parameter count".into()));
                }
                ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()
            }
            Distribution::Dirac(point) => {
                if point.len() != m {
                    return Err(Error::UnsupportedDistribution("point length must match parameter count".into()));
                }
                point.clone()
            }
        };
        family.param(values)
    }

    /// Declared lower bound on the mass of any side-`gamma` cube that
    /// carries positive mass (the anti-concentration certificate).
    pub fn min_cube_mass(&self, gamma: f64, m: usize) -> f64 {
        match self {
            Distribution::UniformBox => (gamma / 2.0).powi(m as i32),
            Distribution::Product(ranges) => ranges
                .iter()
                .map(|&(lo, hi)| {
                    let w = (hi - lo).max(1e-300);
                    (gamma / 2.0 / w).min(1.0)
                })
                .product(),
            Distribution::Dirac(_) => 1.0,
        }
    }
}

/// Handle to the sampled state attached to a training point.
#[derive(Debug)]
pub enum Handle {
    /// Exact thermal state, materialized on first access.
    Exact(OnceLock<QuantumState>),
    /// Randomized-measurement snapshots of the state.
    Shadow(ShadowSet),
}

#[derive(Debug)]
pub struct TrainingEntry {
    pub x: ParamVector,
    pub handle: Handle,
}

impl TrainingEntry {
    /// Exact state of this entry (computed on demand).
    pub fn exact_state(&self, family: &HamiltonianFamily, beta: f64) -> Result<&QuantumState> {
        match &self.handle {
            Handle::Exact(cell) => {
                if cell.get().is_none() {
                    let h = family.assemble(&self.x)?;
                    let s = gibbs_state(&h, beta)?;
                    let _ = cell.set(s);
                }
                Ok(cell.get().unwrap())
            }
            Handle::Shadow(_) => Err(Error::InvalidParameter("entry holds shadows, not an exact state".into())),
        }
    }

    pub fn shadow_set(&self) -> Result<&ShadowSet> {
        match &self.handle {
            Handle::Shadow(s) => Ok(s),
            Handle::Exact(_) => Err(Error::InvalidParameter("entry holds an exact state, not shadows".into())),
        }
    }
}

#[derive(Debug)]
pub struct TrainingSet {
    pub entries: Vec<TrainingEntry>,
    pub distribution: Distribution,
    pub master_seed: u64,
    pub beta: f64,
}

/// What to attach to each drawn point.
#[derive(Debug, Clone, Copy)]
pub enum AttachMode {
    ExactLazy,
    Shadows { count: usize },
}

/// Draw `n_samples` i.i.d. parameter points and attach state handles.
pub fn draw_training(
    family: &HamiltonianFamily,
    distribution: Distribution,
    n_samples: usize,
    beta: f64,
    seed: u64,
    attach: AttachMode,
) -> Result<TrainingSet> {
    let mut entries = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        // Coordinates use the reserved lane u64::MAX; snapshot streams use
        // lane = entry index.
        let mut stream = rng::stream(seed, u64::MAX, i as u64);
        let x = distribution.draw(family, &mut stream)?;
        let handle = match attach {
            AttachMode::ExactLazy => Handle::Exact(OnceLock::new()),
            AttachMode::Shadows { count } => {
                let h = family.assemble(&x)?;
                let state = gibbs_state(&h, beta)?;
                let mut set = collect_snapshots(&state, count, seed, i as u64)?;
                set.tag = x.values.clone();
                Handle::Shadow(set)
            }
        };
        entries.push(TrainingEntry { x, handle });
    }
    Ok(TrainingSet { entries, distribution, master_seed: seed, beta })
}

/// Indices and restricted distances of the `want` training points closest to
/// `x` in sup-distance over the coordinates near `region` (ties broken by
/// lowest index).
pub fn nearest_sample(
    family: &HamiltonianFamily,
    x: &ParamVector,
    region: &[usize],
    r: u64,
    training: &TrainingSet,
    want: usize,
) -> Result<Vec<(usize, f64)>> {
    if training.entries.is_empty() {
        return Err(Error::EmptySelection);
    }
    let coords = family.coords_near(region, r)?;
    let mut scored: Vec<(usize, f64)> = training
        .entries
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let d = coords
                .iter()
                .map(|&c| (x.values[c] - e.x.values[c]).abs())
                .fold(0.0f64, f64::max);
            (k, d)
        })
        .collect();
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(want);
    Ok(scored)
}

/// Which closed-form constants feed the hyperparameter formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ConstantsMode {
    Paper,
    Empirical,
}

/// Exact-state or shadow-based estimator variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerVariant {
    ExactState,
    Shadow,
}

/// Model constants feeding the hyperparameter formulas. In `Paper` mode
/// `c_decay`, `c_prime` and `xi` are the assumed decay constants; in
/// `Empirical` mode `xi` and `c1` come from an indistinguishability-scan fit
/// and `c2_hat` from a restricted Lipschitz probe.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ModelConstants {
    pub beta: f64,
    pub h: f64,
    pub ell: usize,
    pub k0: u32,
    pub r0: u64,
    pub dim: u32,
    pub c_decay: f64,
    pub c_prime: f64,
    pub xi: f64,
    pub c1: f64,
    pub c2_hat: f64,
    /// GALI slack added to certificates (0 for plain indistinguishability).
    pub eta: f64,
}

/// Resolved learner configuration.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LearnerConfig {
    pub r: u64,
    pub gamma: f64,
    pub t: usize,
    /// Training-set size the accounting formula asks for. Astronomical in
    /// `Paper` mode, hence a float.
    pub n_train: f64,
    pub mode: ConstantsMode,
    pub beta: f64,
    pub constants: ModelConstants,
    /// Certificate shadow half-width added in shadow mode.
    pub shadow_eps: f64,
}

impl LearnerConfig {
    pub fn training_size(&self) -> Result<usize> {
        if !self.n_train.is_finite() || self.n_train > 1e9 {
            return Err(Error::InvalidParameter(format!(
                "training size {:.3e} is not realizable; use Empirical mode",
                self.n_train
            )));
        }
        Ok(self.n_train.ceil() as usize)
    }
}

/// Evaluate the hyperparameter formulas.
///
/// `m_terms` is the number of observable terms entering the union bound and
/// `n` the lattice size. Coverage accounting solves the coupon-collector
/// failure probability `delta = M exp(-(N/t)(gamma/2)^{m_r} + m_r ln(2/gamma)
/// + ln t)` for `N`.
pub fn hyperparams(
    eps: f64,
    delta: f64,
    delta_p: f64,
    consts: &ModelConstants,
    mode: ConstantsMode,
    variant: LearnerVariant,
    n: usize,
    m_terms: usize,
) -> Result<LearnerConfig> {
    for (name, v) in [("eps", eps), ("delta", delta), ("delta'", delta_p)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1)")));
        }
    }
    let d = consts.dim as i32;
    let two_r_k0 = |r: u64| (2.0 * (r as f64 + consts.k0 as f64)).powi(d);
    let (r, gamma, t, shadow_eps);
    match mode {
        ConstantsMode::Paper => {
            let lead = match variant {
                LearnerVariant::ExactState => 16.0,
                LearnerVariant::Shadow => 24.0,
            };
            let dfac: f64 = (1..consts.dim.max(1)).map(|k| k as f64).product();
            let num = lead
                * consts.beta
                * (consts.c_decay + consts.c_prime)
                * consts.h
                * (2.0 * consts.r0 as f64 + consts.k0 as f64).powi(d)
                * dfac
                * (2.0 * consts.xi).powi(d - 1)
                * (consts.dim as f64).powi(d - 1);
            let den = eps * ((consts.k0 as f64 + 1.0) / (2.0 * consts.xi)).exp() * (1.0 - (-1.0 / (2.0 * consts.xi)).exp());
            r = (2.0 * consts.xi * (num / den).ln()).ceil().max(0.0) as u64;
            let gden = match variant {
                LearnerVariant::ExactState => 2.0,
                LearnerVariant::Shadow => 3.0,
            };
            let vball = two_r_k0(r);
            gamma = eps * (-vball * (3.0 * (2.0f64).ln() + 5.0 * consts.beta * consts.h)).exp()
                / (gden * vball * consts.h * consts.ell as f64);
            t = match variant {
                LearnerVariant::ExactState => 1,
                LearnerVariant::Shadow => {
                    let lead_t = 24.0 * 12.0f64.powi(consts.k0 as i32) / (eps * eps);
                    let logarg = (n as f64).powi(consts.k0 as i32) * 2.0f64.powi(consts.k0 as i32 + 1) / delta_p;
                    (lead_t * logarg.ln()).ceil() as usize
                }
            };
            shadow_eps = match variant {
                LearnerVariant::ExactState => 0.0,
                LearnerVariant::Shadow => eps / 3.0,
            };
        }
        ConstantsMode::Empirical => {
            let (c1_budget, g_budget) = match variant {
                LearnerVariant::ExactState => (4.0, 2.0),
                LearnerVariant::Shadow => (6.0, 3.0),
            };
            r = if consts.c1 <= eps / (2.0 * c1_budget) {
                0
            } else {
                (2.0 * consts.xi * (c1_budget * consts.c1 / eps).ln()).ceil().max(0.0) as u64
            };
            gamma = (eps / (g_budget * consts.c2_hat.max(1e-9))).min(1.0);
            match variant {
                LearnerVariant::ExactState => {
                    t = 1;
                    shadow_eps = 0.0;
                }
                LearnerVariant::Shadow => {
                    t = sample_count_t(consts.k0, eps / 3.0, delta_p, n)? as usize;
                    shadow_eps = eps / 3.0;
                }
            }
        }
    }
    let m_r = (2.0 * (r as f64 + consts.r0 as f64 + consts.k0 as f64)).powi(d) * consts.ell as f64;
    let n_train = t as f64
        * (2.0 / gamma).powf(m_r)
        * ((m_terms as f64 / delta).ln() + m_r * (2.0 / gamma).ln() + (t as f64).ln());
    Ok(LearnerConfig {
        r,
        gamma,
        t,
        n_train: n_train.max(t as f64),
        mode,
        beta: consts.beta,
        constants: *consts,
        shadow_eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    Exact,
    Shadow,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TermEstimate {
    pub support: Vec<usize>,
    pub value: f64,
    pub certificate: f64,
    /// Restricted distances of the matches used.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EstimateReport {
    pub total: f64,
    pub per_term: Vec<TermEstimate>,
}

/// Estimate `tr[O rho(x)]` from the training set.
pub fn estimate(
    family: &HamiltonianFamily,
    x: &ParamVector,
    observable: &LocalObservable,
    training: &TrainingSet,
    config: &LearnerConfig,
    mode: EstimateMode,
) -> Result<EstimateReport> {
    estimate_impl(family, x, observable, training, config, mode, None)
}

/// Estimation against a shifted reference configuration: identical pipeline,
/// with the indistinguishability certificate taken relative to `x_star`
/// (the certificate gains the configured GALI slack).
pub fn gali_estimate(
    family: &HamiltonianFamily,
    x: &ParamVector,
    observable: &LocalObservable,
    training: &TrainingSet,
    config: &LearnerConfig,
    x_star: &[f64],
) -> Result<EstimateReport> {
    estimate_impl(family, x, observable, training, config, EstimateMode::Exact, Some(x_star))
}

fn estimate_impl(
    family: &HamiltonianFamily,
    x: &ParamVector,
    observable: &LocalObservable,
    training: &TrainingSet,
    config: &LearnerConfig,
    mode: EstimateMode,
    x_star: Option<&[f64]>,
) -> Result<EstimateReport> {
    let c = &config.constants;
    let locality = c.c1 * (-(config.r as f64) / (2.0 * c.xi)).exp();
    let mut per_term = Vec::with_capacity(observable.terms.len());
    let mut total = 0.0;
    for term in &observable.terms {
        let (value, distances) = match mode {
            EstimateMode::Exact => {
                let matches = nearest_sample(family, x, &term.support, config.r, training, 1)?;
                let (idx, dist) = matches[0];
                let state = training.entries[idx].exact_state(family, training.beta)?;
                let reduced = state.reduce(&term.support)?;
                (reduced.expect_dense(&term.matrix), vec![dist])
            }
            EstimateMode::Shadow => {
                let matches = nearest_sample(family, x, &term.support, config.r, training, training.entries.len())?;
                let close: Vec<(usize, f64)> = matches
                    .into_iter()
                    .filter(|&(_, d)| d <= config.gamma + 1e-12)
                    .collect();
                if close.len() < config.t {
                    return Err(Error::CoverageShortfall { found: close.len(), need: config.t, gamma: config.gamma });
                }
                let selected: Vec<usize> = close[..config.t].iter().map(|&(i, _)| i).collect();
                let dists: Vec<f64> = close[..config.t].iter().map(|&(_, d)| d).collect();
                let sets: Vec<ShadowSet> = selected
                    .iter()
                    .map(|&i| training.entries[i].shadow_set().cloned())
                    .collect::<Result<_>>()?;
                let indices: Vec<usize> = (0..sets.len()).collect();
                let est = robust_average(&sets, &term.support, &indices)?;
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for i in 0..est.sigma_tilde.nrows() {
                    for j in 0..est.sigma_tilde.ncols() {
                        acc += term.matrix[(i, j)] * est.sigma_tilde[(j, i)];
                    }
                }
                (acc.re, dists)
            }
        };
        let gamma_used = distances.iter().cloned().fold(0.0f64, f64::max);
        let base = match x_star {
            // Plain locality certificate vs the shifted-reference one with
            // its eta slack.
            None => 2.0 * locality,
            Some(_) => 2.0 * (locality + c.eta),
        };
        let certificate = (base + c.c2_hat * gamma_used + config.shadow_eps) * term.norm;
        total += value;
        per_term.push(TermEstimate { support: term.support.clone(), value, certificate, distances });
    }
    Ok(EstimateReport { total, per_term })
}

/// Exact expectation oracle `f_O(x)` for scoring.
pub fn exact_expectation(family: &HamiltonianFamily, x: &ParamVector, observable: &LocalObservable, beta: f64) -> Result<f64> {
    let h = family.assemble(x)?;
    let state = gibbs_state(&h, beta)?;
    observable.expectation(&state)
}

/// Which state family an indistinguishability scan probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    Gibbs { beta: f64 },
    Ground,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IndistinguishabilityScan {
    /// `(r, |f_O(x) - f_O(x restricted at radius r)|)` per probed radius.
    pub points: Vec<(f64, f64)>,
    /// Envelope fit `c1 * exp(-r / (2 xi))`: `fit.rate = -1/(2 xi)`.
    pub fit: DecayFit,
}

impl IndistinguishabilityScan {
    pub fn xi_hat(&self) -> f64 {
        if self.fit.rate < 0.0 {
            -1.0 / (2.0 * self.fit.rate)
        } else {
            f64::INFINITY
        }
    }

    pub fn c1_hat(&self) -> f64 {
        self.fit.prefactor
    }
}

/// Sweep `|f_O(x) - f_O((x|_{S(r)}, reference))|` over radii.
pub fn indistinguishability_scan(
    family: &HamiltonianFamily,
    x: &ParamVector,
    observable: &LocalObservable,
    r_values: &[u64],
    mode: ScanMode,
    reference: Option<&[f64]>,
) -> Result<IndistinguishabilityScan> {
    let mut support: Vec<usize> = observable.terms.iter().flat_map(|t| t.support.iter().cloned()).collect();
    support.sort_unstable();
    support.dedup();
    let state_of = |p: &ParamVector| -> Result<QuantumState> {
        let h = family.assemble(p)?;
        match mode {
            ScanMode::Gibbs { beta } => gibbs_state(&h, beta),
            ScanMode::Ground => ground_state(&h),
        }
    };
    let full = observable.expectation(&state_of(x)?)?;
    let reference = reference.map(|r| r.to_vec()).unwrap_or_else(|| family.center.clone());
    let mut points = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let restricted = family.restrict_params_to(x, &support, r, &reference)?;
        let value = observable.expectation(&state_of(&restricted)?)?;
        points.push((r as f64, (full - value).abs()));
    }
    let fit = fit::fit_envelope(&points, 1e-12);
    Ok(IndistinguishabilityScan { points, fit })
}

/// Probe the restricted Lipschitz constant of `x -> tr[O_i sigma(beta, x)]`
/// in sup-norm over the coordinates near the observable: the max over probe
/// points of `sum_k |d_k f|`, times a 1.5 safety factor.
pub fn fit_restricted_lipschitz(
    family: &HamiltonianFamily,
    observable: &LocalObservable,
    r: u64,
    beta: f64,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in 0..probes {
        let mut stream = rng::stream(seed, 101, p as u64);
        let x = Distribution::UniformBox.draw(family, &mut stream)?;
        for term in &observable.terms {
            let coords = family.coords_near(&term.support, r)?;
            let full = crate::linalg::embed_operator(&term.matrix, family.n_sites(), &term.support)?;
            let mut sum = 0.0;
            for &k in &coords {
                sum += crate::bp::gibbs_derivative(family, &x, k, &full, beta)?.abs();
            }
            worst = worst.max(sum);
        }
    }
    Ok(1.5 * worst)
}

/// Fit empirical constants for a family/observable pair: an
/// indistinguishability scan for `(c1, xi)` and a derivative probe for the
/// restricted Lipschitz constant.
pub fn fit_empirical_constants(
    family: &HamiltonianFamily,
    observable: &LocalObservable,
    beta: f64,
    scan_radii: &[u64],
    seed: u64,
) -> Result<ModelConstants> {
    let mut stream = rng::stream(seed, 100, 0);
    let x = Distribution::UniformBox.draw(family, &mut stream)?;
    let scan = indistinguishability_scan(family, &x, observable, scan_radii, ScanMode::Gibbs { beta }, None)?;
    let (c1, xi) = if scan.fit.rate < 0.0 {
        (scan.c1_hat(), scan.xi_hat())
    } else {
        // Values at the numerical floor: locality error is negligible.
        (scan.points.iter().map(|p| p.1).fold(1e-12, f64::max), 0.5)
    };
    let r0 = family.locality_radius;
    let c2 = fit_restricted_lipschitz(family, observable, 0, beta, 3, seed)?;
    Ok(ModelConstants {
        beta,
        h: family.coupling_bound,
        ell: family.ell,
        k0: observable.k0,
        r0,
        dim: family.lattice.dimension() as u32,
        c_decay: 1.0,
        c_prime: 1.0,
        xi,
        c1,
        c2_hat: c2.max(1e-6),
        eta: 0.0,
    })
}
