//! Max-entropy parameter recovery, strong-convexity probing, the rotated
//! recovery map, Markov/clustering scans, and the end-to-end transport-
//! scored tomography pipeline.
//!
//! Recovery minimizes `L(y) = ln Z_beta(y) + beta sum_k y_k e_k` over the
//! parameter box by projected gradient descent with Armijo backtracking; the
//! gradient is `beta (e_tilde - e(y))` since `d ln Z / d y_k = -beta e_k(y)`.

use crate::error::{Error, Result};
use crate::lattice::{HamiltonianFamily, ParamVector};
use crate::linalg::{self, CMat};
use crate::operators::{entropies, gibbs_state, log_partition, QuantumState, RegionPartition};
use crate::rng;
use crate::shadows::ShadowSet;
use crate::wasserstein::{default_witnesses, w1_bounds, W1Bounds};
use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::Rng;

/// Basis-operator expectations indexed like parameter coordinates.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExpectationTable {
    pub values: Vec<f64>,
    /// Sup-norm error bound on the table.
    pub eta: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Provenance {
    Exact,
    Shadow,
}

/// Exact expectations `e_k = tr[h_k sigma]` of every basis operator.
pub fn local_expectations(state: &QuantumState, family: &HamiltonianFamily) -> Result<ExpectationTable> {
    if state.n_qubits() != family.n_sites() {
        return Err(Error::DimensionMismatch { left: state.n_qubits(), right: family.n_sites() });
    }
    let mut values = Vec::with_capacity(family.n_params());
    for k in 0..family.n_params() {
        values.push(state.expect_pauli(family.basis_op(k)));
    }
    Ok(ExpectationTable { values, eta: 0.0, provenance: Provenance::Exact })
}

/// Shadow-estimated expectations with a Hoeffding half-width at the given
/// confidence: each basis-operator estimator is bounded by `3^w` for a
/// weight-`w` string, so the half-width is
/// `3^w sqrt(ln(2 m / (1 - confidence)) / (2 count))` (a union bound over
/// the `m` table entries).
pub fn local_expectations_from_shadows(
    sets: &[ShadowSet],
    family: &HamiltonianFamily,
    confidence: f64,
) -> Result<ExpectationTable> {
    if sets.is_empty() {
        return Err(Error::EmptySelection);
    }
    if !(0.0..1.0).contains(&confidence) {
        return Err(Error::InvalidParameter("confidence must lie in [0, 1)".into()));
    }
    let n = family.n_sites();
    for set in sets {
        if set.n != n {
            return Err(Error::SupportViolation);
        }
    }
    let total: usize = sets.iter().map(|s| s.len()).sum();
    let m = family.n_params();
    let mut values = Vec::with_capacity(m);
    let mut max_weight = 1u32;
    for k in 0..m {
        let op = family.basis_op(k);
        let support = op.support();
        max_weight = max_weight.max(op.weight() as u32);
        let local = op.dense_on(&support)?;
        let mut acc = 0.0;
        for set in sets {
            let mean = set.mean_operator(&support)?;
            let mut t = C64::new(0.0, 0.0);
            for i in 0..mean.nrows() {
                for j in 0..mean.ncols() {
                    t += local[(i, j)] * mean[(j, i)];
                }
            }
            acc += t.re * set.len() as f64;
        }
        values.push(acc / total as f64);
    }
    let bound = 3.0f64.powi(max_weight as i32);
    let eta = bound * ((2.0 * m as f64 / (1.0 - confidence)).ln() / (2.0 * total as f64)).sqrt();
    Ok(ExpectationTable { values, eta, provenance: Provenance::Shadow })
}

/// Output of the max-entropy solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MaxEntSolution {
    pub x_hat: Vec<f64>,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Set when the solve exited on a floating-point plateau rather than the
    /// gradient test; `grad_norm` still reports the exit quality.
    pub stalled: bool,
    /// Parameter-error bound `2 beta eta sqrt(m) / alpha2` when an `alpha2`
    /// certificate is supplied.
    pub l2_bound: Option<f64>,
}

/// Projected gradient descent with Armijo backtracking on the box.
///
/// Exits when the projected-gradient norm drops below `tolerance`; boundary
/// coordinates pinned by the projection count as converged there.
pub fn maxent_solve(
    table: &ExpectationTable,
    family: &HamiltonianFamily,
    beta: f64,
    tolerance: f64,
    alpha2: Option<f64>,
) -> Result<MaxEntSolution> {
    if beta <= 0.0 {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let m = family.n_params();
    if table.values.len() != m {
        return Err(Error::DimensionMismatch { left: table.values.len(), right: m });
    }
    let lo: Vec<f64> = family.center.iter().map(|c| c - 1.0).collect();
    let hi: Vec<f64> = family.center.iter().map(|c| c + 1.0).collect();
    let project = |y: &mut [f64]| {
        for k in 0..m {
            y[k] = y[k].clamp(lo[k], hi[k]);
        }
    };
    let objective_and_grad = |y: &[f64]| -> Result<(f64, Vec<f64>)> {
        let p = family.param(y.to_vec())?;
        let h = family.assemble(&p)?;
        let lz = log_partition(&h, beta)?;
        let obj = lz + beta * y.iter().zip(&table.values).map(|(a, b)| a * b).sum::<f64>();
        let sigma = gibbs_state(&h, beta)?;
        let grad: Vec<f64> = (0..m)
            .map(|k| beta * (table.values[k] - sigma.expect_pauli(family.basis_op(k))))
            .collect();
        Ok((obj, grad))
    };

    let mut y = family.center.clone();
    let (mut obj, mut grad) = objective_and_grad(&y)?;
    let mut step = 1.0f64;
    let mut flat_steps = 0usize;
    let max_iter = 20_000usize;
    for it in 0..max_iter {
        // Projected-gradient norm: the step-normalized distance moved by a
        // unit projected step.
        let mut pg = vec![0.0; m];
        for k in 0..m {
            pg[k] = (y[k] - grad[k]).clamp(lo[k], hi[k]) - y[k];
        }
        let pg_norm = pg.iter().map(|v| v * v).sum::<f64>().sqrt();
        if pg_norm <= tolerance || flat_steps >= 20 {
            let l2_bound = alpha2.map(|a| 2.0 * beta * table.eta * (m as f64).sqrt() / a);
            return Ok(MaxEntSolution {
                x_hat: y,
                objective: obj,
                grad_norm: pg_norm,
                iterations: it,
                stalled: pg_norm > tolerance,
                l2_bound,
            });
        }
        // Armijo backtracking on the projected step.
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand: Vec<f64> = (0..m).map(|k| y[k] - step * grad[k]).collect();
            project(&mut cand);
            let decrease: f64 = (0..m).map(|k| grad[k] * (y[k] - cand[k])).sum();
            let (cobj, cgrad) = objective_and_grad(&cand)?;
            if cobj <= obj - 1e-4 * decrease {
                if obj - cobj <= 1e-15 * (1.0 + obj.abs()) {
                    flat_steps += 1;
                } else {
                    flat_steps = 0;
                }
                y = cand;
                obj = cobj;
                grad = cgrad;
                step = (step * 1.6).min(1e3);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Step underflow: gradient is numerically flat.
            let l2_bound = alpha2.map(|a| 2.0 * beta * table.eta * (m as f64).sqrt() / a);
            let pg_norm = pg.iter().map(|v| v * v).sum::<f64>().sqrt();
            if pg_norm <= tolerance * 10.0 {
                return Ok(MaxEntSolution { x_hat: y, objective: obj, grad_norm: pg_norm, iterations: it, stalled: true, l2_bound });
            }
            return Err(Error::NonConvergence { iterations: it, objective: obj, grad_norm: pg_norm });
        }
    }
    let pg_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(Error::NonConvergence { iterations: max_iter, objective: obj, grad_norm: pg_norm })
}

/// Minimum Hessian eigenvalue of `y -> ln Z_beta(y)` along the segment
/// `[a, b]`, probed at `points >= 5` interior points by central finite
/// differences of the exact gradient.
pub fn strong_convexity(
    family: &HamiltonianFamily,
    beta: f64,
    a: &ParamVector,
    b: &ParamVector,
    points: usize,
) -> Result<f64> {
    let m = family.n_params();
    let points = points.max(5);
    let grad = |y: &[f64]| -> Result<Vec<f64>> {
        let p = ParamVector { values: y.to_vec(), center: a.center.clone() };
        let h = family.assemble(&p)?;
        let sigma = gibbs_state(&h, beta)?;
        Ok((0..m).map(|k| -beta * sigma.expect_pauli(family.basis_op(k))).collect())
    };
    let fd = 1e-5;
    let mut min_eig = f64::INFINITY;
    for pi in 0..points {
        let s = (pi as f64 + 1.0) / (points as f64 + 1.0);
        let y: Vec<f64> = a.values.iter().zip(&b.values).map(|(u, v)| u + s * (v - u)).collect();
        let mut hess = CMat::zeros((m, m));
        for k in 0..m {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[k] += fd;
            ym[k] -= fd;
            let gp = grad(&yp)?;
            let gm = grad(&ym)?;
            for j in 0..m {
                hess[(j, k)] = C64::new((gp[j] - gm[j]) / (2.0 * fd), 0.0);
            }
        }
        // Symmetrize and take the lowest eigenvalue.
        let herm = hess.mapv(|z| z * 0.5) + hess.t().mapv(|z| z.conj() * 0.5);
        let (e, _) = linalg::eigh(&herm)?;
        min_eig = min_eig.min(e[0]);
    }
    Ok(min_eig)
}

/// Rotated recovery channel built from a joint state on `B (x) C` and its
/// marginal on `B`, with the weight `pi dt / (2 (cosh(pi t) + 1))`.
///
/// The substitution `u = tanh(pi t / 2)` turns the weight into `du/2` on
/// `(-1, 1)`, which is integrated by adaptive Simpson; the channel is
/// certified by the exact-recovery contract rather than an a-priori bound.
pub struct RecoveryMap {
    /// Number of qubits in `B`.
    pub nb: usize,
    /// Number of qubits in `C`.
    pub nc: usize,
    ejoint: Array1<f64>,
    vjoint: CMat,
    emarg: Array1<f64>,
    vmarg: CMat,
    /// Whether the input needed mixing with the identity to reach full rank.
    pub regularized: bool,
}

pub const RECOVERY_RANK_TOL: f64 = 1e-10;

impl RecoveryMap {
    /// `omega_joint` lives on `nb + nc` qubits with `B` the leading factor.
    pub fn new(omega_joint: &QuantumState, nb: usize) -> Result<Self> {
        let n = omega_joint.n_qubits();
        if nb == 0 || nb >= n {
            return Err(Error::InvalidParameter("B must be a proper leading subsystem".into()));
        }
        let nc = n - nb;
        let mut joint = omega_joint.density().clone();
        let min_eig = omega_joint.probabilities().iter().cloned().fold(f64::INFINITY, f64::min);
        let mut regularized = false;
        if min_eig < RECOVERY_RANK_TOL {
            let d = joint.nrows() as f64;
            let eps = 1e-9;
            joint = joint.mapv(|z| z * (1.0 - eps)) + linalg::identity(joint.nrows()).mapv(|z| z * (eps / d));
            regularized = true;
        }
        let (ejoint, vjoint) = linalg::eigh(&joint)?;
        if ejoint[0] < RECOVERY_RANK_TOL * 1e-3 {
            return Err(Error::NotAState("joint state rank-deficient beyond regularization".into()));
        }
        let bsites: Vec<usize> = (0..nb).collect();
        let marg = linalg::partial_trace(&joint, n, &bsites)?;
        let (emarg, vmarg) = linalg::eigh(&marg)?;
        if emarg[0] < RECOVERY_RANK_TOL * 1e-3 {
            return Err(Error::NotAState("marginal rank-deficient".into()));
        }
        Ok(Self { nb, nc, ejoint, vjoint, emarg, vmarg, regularized })
    }

    /// Complex power `omega^z` through the cached spectrum.
    fn joint_power(&self, z: C64) -> CMat {
        let phases: Array1<C64> = self.ejoint.mapv(|lam| (z * lam.ln()).exp());
        linalg::recombine_phases(&phases, &self.vjoint)
    }

    fn marg_power(&self, z: C64) -> CMat {
        let phases: Array1<C64> = self.emarg.mapv(|lam| (z * lam.ln()).exp());
        linalg::recombine_phases(&phases, &self.vmarg)
    }

    /// The Kraus-style rotation at time `t`:
    /// `X_t = omega_BC^{(1-it)/2} (omega_B^{(it-1)/2} (x) I_C)`.
    fn x_t(&self, t: f64) -> CMat {
        let half = C64::new(0.5, -0.5 * t);
        let minus_half = C64::new(-0.5, 0.5 * t);
        let j = self.joint_power(half);
        let mfull = linalg::kron(&self.marg_power(minus_half), &linalg::identity(1 << self.nc));
        j.dot(&mfull)
    }

    /// Apply the map to a state on `B` (optionally with a bystander register
    /// `A` in front: input on `A (x) B`, output on `A (x) B (x) C`).
    pub fn apply(&self, rho: &QuantumState) -> Result<QuantumState> {
        let na = rho
            .n_qubits()
            .checked_sub(self.nb)
            .ok_or(Error::DimensionMismatch { left: rho.n_qubits(), right: self.nb })?;
        let da = 1usize << na;
        let integrand = |u: f64| -> CMat {
            let t = (2.0 / std::f64::consts::PI) * u.atanh();
            let x = self.x_t(t);
            let xfull = if na == 0 { x } else { linalg::kron(&linalg::identity(da), &x) };
            let xdag = xfull.t().mapv(|z| z.conj());
            let rho_ext = linalg::kron(rho.density(), &linalg::identity(1 << self.nc));
            xfull.dot(&rho_ext).dot(&xdag)
        };
        // Adaptive Simpson on u in (-1, 1) with the measure du/2.
        let u_max = 1.0 - 1e-12;
        let total = adaptive_simpson_matrix(&integrand, -u_max, u_max, 1e-10, 24);
        let out = total.mapv(|z| z * 0.5);
        QuantumState::from_density(out).map_err(|_| Error::NotAState("recovery output failed validation".into()))
    }

    /// Exact-recovery certificate `|| Phi(omega_B) - omega_BC ||_1`.
    pub fn recovery_defect(&self) -> Result<f64> {
        let joint = linalg::recombine(&self.ejoint, &self.vjoint);
        let bsites: Vec<usize> = (0..self.nb).collect();
        let marg = linalg::partial_trace(&joint, self.nb + self.nc, &bsites)?;
        let out = self.apply(&QuantumState::from_density(marg)?)?;
        linalg::trace_norm_hermitian(&(out.density() - &joint))
    }
}

/// Adaptive Simpson for matrix-valued integrands (entrywise tolerance on the
/// Frobenius norm of the correction).
fn adaptive_simpson_matrix(f: &impl Fn(f64) -> CMat, a: f64, b: f64, tol: f64, depth: usize) -> CMat {
    fn simpson(fa: &CMat, fm: &CMat, fb: &CMat, h: f64) -> CMat {
        (fa + &fm.mapv(|z| z * 4.0) + fb).mapv(|z| z * (h / 6.0))
    }
    fn rec(
        f: &impl Fn(f64) -> CMat,
        a: f64,
        b: f64,
        fa: CMat,
        fm: CMat,
        fb: CMat,
        whole: CMat,
        tol: f64,
        depth: usize,
    ) -> CMat {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(&fa, &flm, &fm, m - a);
        let right = simpson(&fm, &frm, &fb, b - m);
        let refined = &left + &right;
        let err = (&refined - &whole).map(|z| z.norm_sqr()).sum().sqrt();
        if depth == 0 || err < 15.0 * tol {
            refined
        } else {
            let l = rec(f, a, m, fa, flm, fm.clone(), left, tol / 2.0, depth - 1);
            let r = rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
            l + r
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(&fa, &fm, &fb, b - a);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// One point of a Markov/clustering scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MarkovScanPoint {
    /// Shield width (distance between A and C through B).
    pub ell: u64,
    /// Conditional mutual information I(A:C|B) on the sub-lattice state.
    pub cmi: f64,
    /// Covariance between probe observables on A and C.
    pub cov: f64,
}

/// Partition request on a sub-lattice `X`.
#[derive(Debug, Clone)]
pub struct MarkovPartition {
    /// Sub-lattice sites (in site order).
    pub x: Vec<usize>,
    /// Positions of A, B, C inside `x` (indices into `x`).
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub ell: u64,
}

/// Conditional-mutual-information and covariance envelopes on sub-lattice
/// Gibbs states.
pub fn markov_clustering_scan(
    family: &HamiltonianFamily,
    x: &ParamVector,
    beta: f64,
    partitions: &[MarkovPartition],
) -> Result<Vec<MarkovScanPoint>> {
    let mut out = Vec::new();
    for part in partitions {
        for idx in part.a.iter().chain(&part.b).chain(&part.c) {
            if *idx >= part.x.len() {
                return Err(Error::InvalidParameter("partition index outside sub-lattice".into()));
            }
        }
        let h = family.assemble_on_subsystem(x, &part.x)?;
        let sigma = gibbs_state(&h, beta)?;
        let rp = RegionPartition::new(part.a.clone(), part.c.clone(), Some(part.b.clone()))?;
        let rep = entropies(&sigma, &rp)?;
        // Probe covariance: Z products on A and C.
        let za: crate::pauli::PauliString = crate::pauli::PauliString::new(
            part.a.iter().map(|&i| (i, crate::pauli::Pauli::Z)).collect::<Vec<_>>(),
        )?;
        let zc: crate::pauli::PauliString = crate::pauli::PauliString::new(
            part.c.iter().map(|&i| (i, crate::pauli::Pauli::Z)).collect::<Vec<_>>(),
        )?;
        let nl = part.x.len();
        let cov = crate::operators::covariance(&sigma, &za.dense(nl), &zc.dense(nl))?;
        out.push(MarkovScanPoint { ell: part.ell, cmi: rep.cond_mutual.max(0.0), cov: cov.abs() });
    }
    Ok(out)
}

/// End-to-end tomography run scored in transport distance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TomographyReport {
    pub x_hat: Vec<f64>,
    pub eta: f64,
    pub alpha2: f64,
    pub w1_lower: f64,
    pub w1_upper: f64,
    /// Continuity route bound: fitted derivative bound times `||x - x_hat||_1`.
    pub certificate_continuity: f64,
    /// Markov route bound from the relative-entropy route.
    pub certificate_markov: f64,
    pub certificate_route: &'static str,
}

/// How the pipeline obtains its expectation table.
#[derive(Debug, Clone, Copy)]
pub enum TomographySource {
    /// Exact expectations perturbed by seeded noise of sup-norm `eta`.
    Exact { eta: f64, seed: u64 },
    /// Shadow estimation from `sets` independent snapshot batches.
    Shadow { snapshots: usize, seed: u64, confidence: f64 },
}

/// Estimate expectations of the hidden state, recover parameters by max
/// entropy, and score the result in transport distance against the truth.
pub fn w1_tomography_pipeline(
    family: &HamiltonianFamily,
    x_true: &ParamVector,
    beta: f64,
    source: TomographySource,
    tolerance: f64,
) -> Result<TomographyReport> {
    let h_true = family.assemble(x_true)?;
    let sigma_true = gibbs_state(&h_true, beta)?;
    let table = match source {
        TomographySource::Exact { eta, seed } => {
            let mut t = local_expectations(&sigma_true, family)?;
            if eta > 0.0 {
                let mut stream = rng::stream(seed, 7, 0);
                for v in t.values.iter_mut() {
                    *v += stream.gen_range(-eta..=eta);
                }
                t.eta = eta;
            }
            t
        }
        TomographySource::Shadow { snapshots, seed, confidence } => {
            let set = crate::shadows::collect_snapshots(&sigma_true, snapshots, seed, 0)?;
            local_expectations_from_shadows(&[set], family, confidence)?
        }
    };
    // Clamp the table into the attainable range to keep the solve stable.
    let solution = maxent_solve(&table, family, beta, tolerance, None)?;
    let x_hat = family.param(solution.x_hat.clone())?;
    let alpha2 = strong_convexity(family, beta, x_true, &x_hat, 5)?;
    let sigma_hat = gibbs_state(&family.assemble(&x_hat)?, beta)?;

    let witnesses = default_witnesses(family.n_sites())?;
    let blocks: Vec<Vec<usize>> = (0..family.n_sites()).map(|s| vec![s]).collect();
    let bounds: W1Bounds = w1_bounds(&sigma_true, &sigma_hat, &witnesses, Some(&blocks))?;

    // Continuity route: fitted derivative bound along the segment.
    let l1: f64 = x_true.values.iter().zip(&x_hat.values).map(|(a, b)| (a - b).abs()).sum();
    let deriv_bound = fitted_derivative_bound(family, x_true, &x_hat, beta)?;
    let certificate_continuity = deriv_bound * l1;
    // Markov route: relative-entropy route at the probed strong-convexity
    // scale: W1 <= n sqrt(2 D / alpha2-normalized) -- reported with the
    // measured relative entropy.
    let dkl = crate::operators::relative_entropy(&sigma_true, &sigma_hat).unwrap_or(f64::INFINITY);
    let n = family.n_sites() as f64;
    let certificate_markov = n * (2.0 * dkl).sqrt();
    let route = if certificate_continuity <= certificate_markov { "continuity" } else { "markov" };
    Ok(TomographyReport {
        x_hat: solution.x_hat,
        eta: table.eta,
        alpha2,
        w1_lower: bounds.lower,
        w1_upper: bounds.upper,
        certificate_continuity,
        certificate_markov,
        certificate_route: route,
    })
}

/// Max over a few segment probes, coordinates, and witnesses of
/// `|d_k tr[L sigma]| / lip_upper(L)`, used as the fitted polylog factor of
/// the continuity route.
fn fitted_derivative_bound(family: &HamiltonianFamily, a: &ParamVector, b: &ParamVector, beta: f64) -> Result<f64> {
    let n = family.n_sites();
    let witnesses = default_witnesses(n)?;
    let mut bound = 0.0f64;
    for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y: Vec<f64> = a.values.iter().zip(&b.values).map(|(u, v)| u + s * (v - u)).collect();
        let p = family.param(y)?;
        for k in 0..family.n_params() {
            for w in witnesses.iter().filter(|w| w.upper > 1e-12) {
                let d = crate::bp::gibbs_derivative(family, &p, k, &w.matrix, beta)?.abs();
                bound = bound.max(2.0 * d / w.upper);
            }
        }
    }
    Ok(bound)
}
