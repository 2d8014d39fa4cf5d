//! Thermal derivative machinery: the belief-propagation kernel and operator,
//! locality truncation scans, Heisenberg light-cone discrepancies, and the
//! gapped spectral-flow weight envelope.
//!
//! The frequency-filter (eigenbasis) form of the operator is primary: for
//! `H = sum_a E_a |a><a|` it maps matrix elements as
//! `V_ab -> V_ab * ktilde_beta(E_a - E_b)` with
//! `ktilde_beta(w) = tanh(beta w / 2) / (beta w / 2)`.
//! The time-domain quadrature of `kappa_beta(t) e^{-iHt} V e^{iHt}` is kept
//! as an independent oracle; the two agree because `kappa_beta` and
//! `ktilde_beta` form a Fourier pair, which is exactly what the dual-method
//! tests exercise.

use crate::error::{Error, Result};
use crate::lattice::{HamiltonianFamily, ParamVector};
use crate::linalg::{self, CMat};
use crate::operators::{covariance, gibbs_state};
use ndarray::Array1;
use num_complex::Complex64 as C64;

/// `kappa_beta(t) = (2 / pi beta) ln((e^{pi|t|/beta} + 1)/(e^{pi|t|/beta} - 1))`.
///
/// Returns `+inf` at the (integrable) `t = 0` pole. Stable for large `|t|`.
pub fn kernel_kappa(beta: f64, t: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    if t == 0.0 {
        return Ok(f64::INFINITY);
    }
    let u = std::f64::consts::PI * t.abs() / beta;
    let val = if u < 1e-8 {
        // ln((e^u+1)/(e^u-1)) = ln(2/u) + u^2/12 + O(u^4)
        (2.0 / (std::f64::consts::PI * beta)) * ((2.0 / u).ln() + u * u / 12.0)
    } else {
        // ln((e^u+1)/(e^u-1)) = ln1p(e^-u) - ln1p(-e^-u)
        let eu = (-u).exp();
        (2.0 / (std::f64::consts::PI * beta)) * (eu.ln_1p() - (-eu).ln_1p())
    };
    Ok(val)
}

/// Upper envelope `(4 / pi beta) / (e^{pi|t|/beta} - 1)` of the kernel.
pub fn kernel_kappa_bound(beta: f64, t: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    if t == 0.0 {
        return Ok(f64::INFINITY);
    }
    let u = std::f64::consts::PI * t.abs() / beta;
    Ok(4.0 / (std::f64::consts::PI * beta) / u.exp_m1())
}

/// Fourier transform `ktilde_beta(w) = tanh(beta w / 2) / (beta w / 2)`,
/// with `ktilde_beta(0) = 1`.
pub fn kappa_tilde(beta: f64, omega: f64) -> f64 {
    let z = 0.5 * beta * omega;
    if z.abs() < 1e-8 {
        // tanh(z)/z = 1 - z^2/3 + O(z^4)
        1.0 - z * z / 3.0
    } else {
        z.tanh() / z
    }
}

/// Time-quadrature configuration for the kernel.
///
/// The half-line `[0, T]` is split at `beta/2`: a tanh-sinh rule absorbs the
/// logarithmic singularity at the origin, and composite Simpson with step
/// `dt` covers the smooth exponentially decaying remainder. The mass left
/// outside `[-T, T]` is certified analytically from the kernel envelope.
#[derive(Debug, Clone, Copy)]
pub struct BPKernel {
    pub beta: f64,
    /// Integration cutoff `T` (default `20 beta`).
    pub t_cutoff: f64,
    /// Bulk quadrature step (default `beta / 200`).
    pub dt: f64,
    /// Nodes per side of the tanh-sinh core rule.
    pub core_nodes: usize,
}

impl BPKernel {
    pub fn new(beta: f64) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::InvalidParameter("beta must be positive".into()));
        }
        Ok(Self { beta, t_cutoff: 20.0 * beta, dt: beta / 200.0, core_nodes: 120 })
    }

    /// Analytic bound on the kernel mass outside `[-T, T]`:
    /// `2 * (4/pi^2) * ln(1/(1 - e^{-pi T / beta}))`.
    pub fn tail_bound(&self) -> f64 {
        let u = std::f64::consts::PI * self.t_cutoff / self.beta;
        2.0 * 4.0 / (std::f64::consts::PI * std::f64::consts::PI) * (-(-u).exp()).ln_1p().abs()
    }

    /// Quadrature nodes and weights on `(0, T]`, folded over `+-t`.
    fn nodes(&self) -> Vec<(f64, f64)> {
        let delta = (0.5 * self.beta).min(self.t_cutoff);
        let mut out = Vec::new();
        // tanh-sinh on (0, delta)
        let smax = 4.0;
        let n = self.core_nodes as i64;
        let hs = smax / n as f64;
        for j in -n..=n {
            let s = j as f64 * hs;
            let u = std::f64::consts::FRAC_PI_2 * s.sinh();
            // t = delta * sigmoid(2u), weight = delta * hs * (pi/2) cosh(s) sech^2(u) / 2...
            // with d/ds [sigmoid(2u)] = (pi/2) cosh(s) * sech^2(u) / 2 * 2 = see below.
            let sig = stable_sigmoid(2.0 * u);
            let t = delta * sig;
            if t <= 0.0 || t >= delta {
                continue;
            }
            // d sigma(2u)/du = 2 sigma(2u)(1 - sigma(2u))
            let dsig_du = 2.0 * sig * (1.0 - sig);
            let w = delta * dsig_du * std::f64::consts::FRAC_PI_2 * s.cosh() * hs;
            out.push((t, w));
        }
        // Simpson on [delta, T]
        if self.t_cutoff > delta {
            let span = self.t_cutoff - delta;
            let mut m = (span / self.dt).ceil() as usize;
            if m % 2 == 1 {
                m += 1;
            }
            m = m.max(2);
            let h = span / m as f64;
            for k in 0..=m {
                let t = delta + k as f64 * h;
                let c = if k == 0 || k == m {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                out.push((t, c * h / 3.0));
            }
        }
        out
    }

    /// Quadrature value of the total kernel mass on `[-T, T]`.
    pub fn mass(&self) -> Result<f64> {
        let mut acc = 0.0;
        for (t, w) in self.nodes() {
            acc += 2.0 * w * kernel_kappa(self.beta, t)?;
        }
        Ok(acc)
    }

    /// Check the certified-mass invariant `mass >= 1 - 1e-8`.
    pub fn validate(&self) -> Result<()> {
        let mass = self.mass()?;
        if mass < 1.0 - 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "kernel quadrature mass {mass:.12} below 1 - 1e-8 (tail bound {:.3e})",
                self.tail_bound()
            )));
        }
        Ok(())
    }
}

fn stable_sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Evaluation method for [`bp_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BPMethod {
    /// Frequency filter in the eigenbasis of `H` (exact up to roundoff).
    Eigenbasis,
    /// Time-domain quadrature of the kernel against Heisenberg evolution.
    Quadrature,
}

/// The belief-propagation operator `Phi_H(V)`.
pub fn bp_operator(h: &CMat, v: &CMat, kernel: &BPKernel, method: BPMethod) -> Result<CMat> {
    if h.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch { left: h.nrows(), right: v.nrows() });
    }
    linalg::check_hermitian(h, linalg::HERMITICITY_TOL)?;
    let (e, w) = linalg::eigh(h)?;
    match method {
        BPMethod::Eigenbasis => {
            let wdag = w.t().mapv(|z| z.conj());
            let mut vt = wdag.dot(v).dot(&w);
            let d = vt.nrows();
            for a in 0..d {
                for b in 0..d {
                    vt[(a, b)] *= kappa_tilde(kernel.beta, e[a] - e[b]);
                }
            }
            Ok(w.dot(&vt).dot(&wdag))
        }
        BPMethod::Quadrature => {
            let d = h.nrows();
            // Time slices evaluate independently. Fixed-size chunks keep the
            // per-task work coarse (scratch buffers amortize over a chunk);
            // chunk boundaries and the outer pairwise reduction pin the
            // summation order at any thread count.
            let wdag = w.t().mapv(|z| z.conj());
            let nodes = kernel.nodes();
            let chunks: Vec<&[(f64, f64)]> = nodes.chunks(256).collect();
            let partials = crate::parallel::par_map(&chunks, |chunk| {
                let mut scaled = CMat::zeros((d, d));
                let mut u = CMat::zeros((d, d));
                let mut udag = CMat::zeros((d, d));
                let mut t1 = CMat::zeros((d, d));
                let mut t2 = CMat::zeros((d, d));
                let mut acc = CMat::zeros((d, d));
                for &(t, wt) in chunk.iter() {
                    let k = C64::new(wt * kernel_kappa(kernel.beta, t).expect("beta validated"), 0.0);
                    // u = W diag(e^{-i E t}) W^dag, built in place.
                    for col in 0..d {
                        let phase = C64::from_polar(1.0, -e[col] * t);
                        for row in 0..d {
                            scaled[(row, col)] = w[(row, col)] * phase;
                        }
                    }
                    linalg::small_gemm_into(&scaled, &wdag, &mut u);
                    for i in 0..d {
                        for j in 0..d {
                            udag[(i, j)] = u[(j, i)].conj();
                        }
                    }
                    // e^{-iHt} V e^{iHt} at +t and -t.
                    linalg::small_gemm_into(&u, v, &mut t1);
                    linalg::small_gemm_acc(k, &t1, &udag, &mut acc);
                    linalg::small_gemm_into(&udag, v, &mut t2);
                    linalg::small_gemm_acc(k, &t2, &u, &mut acc);
                }
                acc
            });
            Ok(crate::parallel::pairwise_sum(partials, || CMat::zeros((d, d)), |a, b| a + b))
        }
    }
}

/// Derivative of `tr[L sigma(beta, x)]` along parameter coordinate `k`:
/// `-beta Cov_sigma(L, Phi_H(d_k H))`.
pub fn gibbs_derivative(
    family: &HamiltonianFamily,
    x: &ParamVector,
    k: usize,
    l_obs: &CMat,
    beta: f64,
) -> Result<f64> {
    if beta == 0.0 {
        // The state is maximally mixed for every parameter value.
        return Ok(0.0);
    }
    let h = family.assemble(x)?;
    let vk = family.basis_op(k).dense(family.n_sites());
    let kernel = BPKernel::new(beta)?;
    let filtered = bp_operator(&h, &vk, &kernel, BPMethod::Eigenbasis)?;
    let sigma = gibbs_state(&h, beta)?;
    Ok(-beta * covariance(&sigma, l_obs, &filtered)?)
}

/// `|| Phi_H(V) - Phi_{H_B}(V) ||` for an observable supported on
/// `support_a`, with `H_B` keeping only interactions inside `b`.
pub fn bp_truncation_error(
    family: &HamiltonianFamily,
    x: &ParamVector,
    v: &CMat,
    support_a: &[usize],
    b: &[usize],
    beta: f64,
) -> Result<f64> {
    if !support_a.iter().all(|s| b.contains(s)) {
        return Err(Error::SupportViolation);
    }
    let kernel = BPKernel::new(beta)?;
    let h_full = family.assemble(x)?;
    let h_b = family.assemble_in(x, b)?;
    let full = bp_operator(&h_full, v, &kernel, BPMethod::Eigenbasis)?;
    let trunc = bp_operator(&h_b, v, &kernel, BPMethod::Eigenbasis)?;
    linalg::op_norm_hermitian(&(&full - &trunc))
}

/// `|| alpha_t(O) - alpha_t^B(O) ||` between full and region-restricted
/// Heisenberg evolutions at time `t`.
pub fn lr_discrepancy(
    family: &HamiltonianFamily,
    x: &ParamVector,
    o: &CMat,
    support: &[usize],
    b: &[usize],
    t: f64,
) -> Result<f64> {
    if !support.iter().all(|s| b.contains(s)) {
        return Err(Error::SupportViolation);
    }
    let evolve = |h: &CMat| -> Result<CMat> {
        let (e, w) = linalg::eigh(h)?;
        let phases: Array1<C64> = e.mapv(|x| C64::from_polar(1.0, -x * t));
        let u = linalg::recombine_phases(&phases, &w);
        let udag = u.t().mapv(|z| z.conj());
        Ok(u.dot(o).dot(&udag))
    };
    let full = evolve(&family.assemble(x)?)?;
    let restricted = evolve(&family.assemble_in(x, b)?)?;
    linalg::op_norm_hermitian(&(&full - &restricted))
}

/// Weight envelope for quasi-adiabatic (spectral-flow) filtering at gap
/// `gamma`: `1/2` up to the crossover `theta`, then
/// `35 e^2 u^4 exp(-(2/7) u / ln^2 u)` in `u = gamma |t|`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralFlowWeight {
    pub gamma: f64,
    /// Crossover in `u = gamma |t|` units: the largest real solution of
    /// `branch(u) = 1/2`.
    pub theta: f64,
}

fn sf_branch(u: f64) -> f64 {
    // 35 e^2 u^4 e^{-(2/7) u / ln^2 u}
    35.0 * (2.0f64).exp() * u.powi(4) * (-(2.0 / 7.0) * u / (u.ln() * u.ln())).exp()
}

impl SpectralFlowWeight {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma <= 0.0 {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        let lo = std::f64::consts::E;
        let hi = 1e6;
        let mut a = lo;
        let mut b = hi;
        if !(sf_branch(a) > 0.5 && sf_branch(b) < 0.5) {
            return Err(Error::BracketingFailed { lo, hi });
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if sf_branch(mid) > 0.5 {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-12 * b.max(1.0) {
                break;
            }
        }
        Ok(Self { gamma, theta: 0.5 * (a + b) })
    }

    /// The envelope value at time `t`.
    pub fn weight(&self, t: f64) -> f64 {
        let u = self.gamma * t.abs();
        if u <= self.theta {
            0.5
        } else {
            sf_branch(u)
        }
    }
}

/// One-shot evaluation of the spectral-flow weight envelope.
pub fn spectral_flow_weight(gamma: f64, t: f64) -> Result<f64> {
    Ok(SpectralFlowWeight::new(gamma)?.weight(t))
}
