//! Certified two-sided bounds on the transport (Wasserstein-1) distance
//! between states of a qubit register, via Lipschitz witnesses.
//!
//! The Lipschitz seminorm of an observable `L` is
//! `max_i min_{L'} 2 || L - L' (x) I_i ||` over operators `L'` not acting on
//! site `i`.  The distance is its dual: `W1 = sup { tr[L (rho - sigma)] :
//! ||L||_lip <= 1 }`, and satisfies `W1 <= n ||rho - sigma||_1`.
//!
//! Exact evaluation of either quantity is a conic program we deliberately do
//! not solve; everything downstream only needs certified bounds.  The upper
//! seminorm bound plugs the normalized partial trace in for `L'`; witness
//! ratios `tr[L (rho - sigma)] / upper(L)` certify the distance from below.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::QuantumState;
use crate::pauli::{Pauli, PauliString};

/// An observable together with certified bounds on its Lipschitz seminorm.
#[derive(Debug, Clone)]
pub struct LipschitzObservable {
    pub label: String,
    pub matrix: CMat,
    pub lower: f64,
    pub upper: f64,
}

/// Certified seminorm bounds `(lower, upper)` for a Hermitian observable on
/// `n` qubits.
///
/// For `n = 1` the exact value `lambda_max - lambda_min` is returned on both
/// sides. Otherwise the upper bound evaluates the normalized-partial-trace
/// feasible point of the inner minimization, which is 2-competitive, so the
/// lower bound is half of it.
pub fn lip_seminorm(l: &CMat, n: usize) -> Result<(f64, f64)> {
    linalg::check_hermitian(l, 1e-10)?;
    if l.nrows() != (1 << n) {
        return Err(Error::DimensionMismatch { left: l.nrows(), right: 1 << n });
    }
    if n == 1 {
        let (e, _) = linalg::eigh(l)?;
        let spread = e[e.len() - 1] - e[0];
        return Ok((spread, spread));
    }
    let mut upper: f64 = 0.0;
    for site in 0..n {
        let tau = linalg::normalized_trace_out(l, n, &[site])?;
        let dev = 2.0 * linalg::op_norm_hermitian(&(l - &tau))?;
        upper = upper.max(dev);
    }
    Ok((0.5 * upper, upper))
}

/// Wrap an observable with its seminorm bounds.
pub fn lipschitz_observable(label: impl Into<String>, matrix: CMat, n: usize) -> Result<LipschitzObservable> {
    let (lower, upper) = lip_seminorm(&matrix, n)?;
    Ok(LipschitzObservable { label: label.into(), matrix, lower, upper })
}

/// Certified sandwich on the transport distance.
#[derive(Debug, Clone)]
pub struct W1Bounds {
    pub lower: f64,
    pub upper: f64,
    /// Label of the witness achieving the lower bound, if any.
    pub witness: Option<String>,
}

/// Default witness family: every single-site Pauli letter plus the three
/// uniform letter sums `sum_i P_i`.
pub fn default_witnesses(n: usize) -> Result<Vec<LipschitzObservable>> {
    let mut out = Vec::new();
    for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
        for site in 0..n {
            let p = PauliString::new([(site, letter)])?;
            out.push(lipschitz_observable(format!("{}{}", letter.to_char(), site), p.dense(n), n)?);
        }
        let mut sum = CMat::zeros((1 << n, 1 << n));
        for site in 0..n {
            sum = sum + PauliString::new([(site, letter)])?.dense(n);
        }
        out.push(lipschitz_observable(format!("sum_{}", letter.to_char()), sum, n)?);
    }
    Ok(out)
}

/// Sign-adapted letter sums `sum_i s_i P_i` with `s_i = sign tr[P_i (rho - sigma)]`.
///
/// Adapting the witness to the pair is sound: any Lipschitz observable
/// certifies a lower bound.
fn sign_adapted_witnesses(rho: &QuantumState, sigma: &QuantumState) -> Result<Vec<LipschitzObservable>> {
    let n = rho.n_qubits();
    let mut out = Vec::new();
    for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
        let mut sum = CMat::zeros((1 << n, 1 << n));
        for site in 0..n {
            let p = PauliString::new([(site, letter)])?;
            let gap = rho.expect_pauli(&p) - sigma.expect_pauli(&p);
            let s = if gap >= 0.0 { 1.0 } else { -1.0 };
            sum.scaled_add(num_complex::Complex64::new(s, 0.0), &p.dense(n));
        }
        out.push(lipschitz_observable(format!("signed_sum_{}", letter.to_char()), sum, n)?);
    }
    Ok(out)
}

/// Two-sided transport bounds.
///
/// The lower bound maximizes `|tr[L (rho - sigma)]| / upper(L)` over the
/// supplied witnesses plus the sign-adapted letter sums. The upper bound is
/// `n ||rho - sigma||_1`, improved to a sum of per-block bounds whenever both
/// states factorize over `blocks` (within trace distance 1e-10 per block
/// product).
pub fn w1_bounds(
    rho: &QuantumState,
    sigma: &QuantumState,
    witnesses: &[LipschitzObservable],
    blocks: Option<&[Vec<usize>]>,
) -> Result<W1Bounds> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let n = rho.n_qubits();
    // An empty family certifies nothing: the lower bound degrades to 0 (the
    // sign-adapted sums are an enrichment of a supplied family, not a
    // replacement for one).
    if witnesses.is_empty() {
        log::warn!("empty witness family: transport lower bound defaults to 0");
    }
    let adapted = if witnesses.is_empty() {
        Vec::new()
    } else {
        sign_adapted_witnesses(rho, sigma)?
    };
    let mut lower = 0.0f64;
    let mut witness = None;
    let diff = rho.density() - sigma.density();
    for w in witnesses.iter().chain(adapted.iter()) {
        if w.upper <= 1e-14 {
            continue;
        }
        let mut t = num_complex::Complex64::new(0.0, 0.0);
        for i in 0..diff.nrows() {
            for j in 0..diff.ncols() {
                t += w.matrix[(i, j)] * diff[(j, i)];
            }
        }
        let val = t.re.abs() / w.upper;
        if val > lower {
            lower = val;
            witness = Some(w.label.clone());
        }
    }
    let mut upper = n as f64 * linalg::trace_norm_hermitian(&diff)?;
    if let Some(blocks) = blocks {
        if let Some(prod_upper) = product_route_upper(rho, sigma, blocks)? {
            upper = upper.min(prod_upper);
        }
    }
    Ok(W1Bounds { lower, upper, witness })
}

/// Per-block upper route: valid when both states are products over `blocks`.
fn product_route_upper(rho: &QuantumState, sigma: &QuantumState, blocks: &[Vec<usize>]) -> Result<Option<f64>> {
    let n = rho.n_qubits();
    let mut all: Vec<usize> = blocks.iter().flatten().cloned().collect();
    all.sort_unstable();
    if all != (0..n).collect::<Vec<_>>() {
        return Ok(None);
    }
    let is_product = |s: &QuantumState| -> Result<bool> {
        let mut prod: Option<CMat> = None;
        for b in blocks {
            let red = linalg::partial_trace(s.density(), n, b)?;
            prod = Some(match prod {
                None => red,
                Some(acc) => linalg::kron(&acc, &red),
            });
        }
        // Valid only when blocks are listed in site order; otherwise skip.
        let prod = prod.unwrap();
        if prod.nrows() != s.dim() {
            return Ok(false);
        }
        let dev = linalg::trace_norm_hermitian(&(s.density() - &prod))?;
        Ok(dev <= 1e-10)
    };
    let mut sorted_ok = true;
    let mut last: i64 = -1;
    for b in blocks {
        for &s in b {
            if (s as i64) < last {
                sorted_ok = false;
            }
            last = s as i64;
        }
    }
    if !sorted_ok || !is_product(rho)? || !is_product(sigma)? {
        return Ok(None);
    }
    let mut total = 0.0;
    for b in blocks {
        let rb = linalg::partial_trace(rho.density(), n, b)?;
        let sb = linalg::partial_trace(sigma.density(), n, b)?;
        total += b.len() as f64 * linalg::trace_norm_hermitian(&(&rb - &sb))?;
    }
    Ok(Some(total))
}

/// Lower-bound additivity under tensor powers.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TensorAdditivityCheck {
    pub per_copy_lb: f64,
    pub k_copy_lb: f64,
}

/// Lift the best witness for `(rho, sigma)` to `k` copies as
/// `L (x) I ... + ... + I ... (x) L` and compare lower bounds.
pub fn w1_tensor_additivity_check(
    rho: &QuantumState,
    sigma: &QuantumState,
    k: usize,
    witnesses: &[LipschitzObservable],
) -> Result<TensorAdditivityCheck> {
    let n = rho.n_qubits();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if k * n > crate::lattice::DENSE_CAP {
        return Err(Error::DenseCapExceeded { requested: k * n, cap: crate::lattice::DENSE_CAP });
    }
    let single = w1_bounds(rho, sigma, witnesses, None)?;
    // Recover the best witness matrix (sign-adapted ones included).
    let adapted = sign_adapted_witnesses(rho, sigma)?;
    let best = witnesses
        .iter()
        .chain(adapted.iter())
        .filter(|w| w.upper > 1e-14)
        .max_by(|a, b| {
            let va = witness_value(a, rho, sigma);
            let vb = witness_value(b, rho, sigma);
            va.partial_cmp(&vb).unwrap()
        });
    let Some(best) = best else {
        return Ok(TensorAdditivityCheck { per_copy_lb: 0.0, k_copy_lb: 0.0 });
    };
    // rho^(x)k and the lifted witness.
    let mut rk = rho.density().clone();
    let mut sk = sigma.density().clone();
    for _ in 1..k {
        rk = linalg::kron(&rk, rho.density());
        sk = linalg::kron(&sk, sigma.density());
    }
    let nk = k * n;
    let mut lifted = CMat::zeros((1 << nk, 1 << nk));
    for copy in 0..k {
        let sites: Vec<usize> = (0..n).map(|s| copy * n + s).collect();
        lifted = lifted + linalg::embed_operator(&best.matrix, nk, &sites)?;
    }
    let (_, up) = lip_seminorm(&lifted, nk)?;
    let diff = &rk - &sk;
    let mut t = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..diff.nrows() {
        for j in 0..diff.ncols() {
            t += lifted[(i, j)] * diff[(j, i)];
        }
    }
    let k_copy_lb = if up > 1e-14 { t.re.abs() / up } else { 0.0 };
    Ok(TensorAdditivityCheck { per_copy_lb: single.lower, k_copy_lb })
}

fn witness_value(w: &LipschitzObservable, rho: &QuantumState, sigma: &QuantumState) -> f64 {
    let diff = rho.density() - sigma.density();
    let mut t = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..diff.nrows() {
        for j in 0..diff.ncols() {
            t += w.matrix[(i, j)] * diff[(j, i)];
        }
    }
    t.re.abs() / w.upper
}

/// Entropy-difference continuity data: `lhs = |S(rho) - S(sigma)|` against
/// `rhs = g(W) + W ln(4n)` with `g(t) = (t+1)ln(t+1) - t ln t` and `W` the
/// certified transport upper bound.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EntropyContinuityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub w_upper: f64,
}

pub fn entropy_continuity_check(rho: &QuantumState, sigma: &QuantumState) -> Result<EntropyContinuityCheck> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let n = rho.n_qubits();
    let diff = rho.density() - sigma.density();
    let w = n as f64 * linalg::trace_norm_hermitian(&diff)?;
    let lhs = (rho.entropy() - sigma.entropy()).abs();
    let g = if w > 0.0 { (w + 1.0) * (w + 1.0).ln() - w * w.ln() } else { 0.0 };
    let rhs = g + w * (4.0 * n as f64).ln();
    Ok(EntropyContinuityCheck { lhs, rhs, w_upper: w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_zero_seminorm() {
        let eye = linalg::identity(4);
        let (lo, up) = lip_seminorm(&eye, 2).unwrap();
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_site_z_is_two() {
        let z = PauliString::from_letters(0, "Z").unwrap().dense(1);
        let (lo, up) = lip_seminorm(&z, 1).unwrap();
        assert_abs_diff_eq!(lo, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn z_sum_has_seminorm_two() {
        let n = 3;
        let mut sum = CMat::zeros((8, 8));
        for s in 0..n {
            sum = sum + PauliString::new([(s, Pauli::Z)]).unwrap().dense(n);
        }
        let (_, up) = lip_seminorm(&sum, n).unwrap();
        assert_abs_diff_eq!(up, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn empty_witness_family_gives_zero_lower_bound() {
        let rho = QuantumState::diagonal(1, &[0.9, 0.1]).unwrap();
        let sig = QuantumState::diagonal(1, &[0.2, 0.8]).unwrap();
        let b = w1_bounds(&rho, &sig, &[], None).unwrap();
        assert_eq!(b.lower, 0.0);
        assert!(b.witness.is_none());
        assert!(b.upper > 0.0);
    }

    #[test]
    fn equal_states_have_zero_sandwich() {
        let s = QuantumState::maximally_mixed(2);
        let w = default_witnesses(2).unwrap();
        let b = w1_bounds(&s, &s, &w, None).unwrap();
        assert_abs_diff_eq!(b.lower, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.upper, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn diagonal_pair_lower_bound() {
        // diag(p, 1-p) vs diag(q, 1-q) with witness Z: lower >= |p - q|.
        let p = 0.85;
        let q = 0.3;
        let rho = QuantumState::diagonal(1, &[p, 1.0 - p]).unwrap();
        let sig = QuantumState::diagonal(1, &[q, 1.0 - q]).unwrap();
        let w = default_witnesses(1).unwrap();
        let b = w1_bounds(&rho, &sig, &w, None).unwrap();
        assert!(b.lower >= (p - q).abs() - 1e-12, "lower {} vs |p-q| {}", b.lower, (p - q).abs());
        assert!(b.lower <= b.upper + 1e-12);
    }

    #[test]
    fn tensor_lift_doubles_lower_bound() {
        let rho = QuantumState::diagonal(1, &[0.9, 0.1]).unwrap();
        let sig = QuantumState::diagonal(1, &[0.4, 0.6]).unwrap();
        let w = default_witnesses(1).unwrap();
        let chk = w1_tensor_additivity_check(&rho, &sig, 2, &w).unwrap();
        assert_abs_diff_eq!(chk.k_copy_lb, 2.0 * chk.per_copy_lb, epsilon = 1e-10);
        let k1 = w1_tensor_additivity_check(&rho, &sig, 1, &w).unwrap();
        assert_abs_diff_eq!(k1.k_copy_lb, k1.per_copy_lb, epsilon = 1e-12);
        let same = w1_tensor_additivity_check(&rho, &rho, 2, &w).unwrap();
        assert_abs_diff_eq!(same.k_copy_lb, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(same.per_copy_lb, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_continuity_closed_form_case() {
        // rho = I/2, sigma = |0><0| on one qubit.
        let rho = QuantumState::maximally_mixed(1);
        let sig = QuantumState::diagonal(1, &[1.0, 0.0]).unwrap();
        let chk = entropy_continuity_check(&rho, &sig).unwrap();
        assert_abs_diff_eq!(chk.lhs, (2.0f64).ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(chk.w_upper, 1.0, epsilon = 1e-10);
        let g1 = 2.0 * (2.0f64).ln();
        assert_abs_diff_eq!(chk.rhs, g1 + (4.0f64).ln(), epsilon = 1e-10);
        assert!(chk.lhs <= chk.rhs);
        let same = entropy_continuity_check(&rho, &rho).unwrap();
        assert_abs_diff_eq!(same.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(same.rhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_witness_matches_embedded_witness() {
        // Witnesses supported on A give the same value on reduced and full
        // states.
        let mut rng = crate::rng::stream(11, 0, 0);
        let rho = crate::shadows::random_state(3, &mut rng).unwrap();
        let sig = crate::shadows::random_state(3, &mut rng).unwrap();
        let za = PauliString::new([(0, Pauli::Z)]).unwrap();
        let full = rho.expect_pauli(&za) - sig.expect_pauli(&za);
        let ra = rho.reduce(&[0]).unwrap();
        let sa = sig.reduce(&[0]).unwrap();
        let z1 = PauliString::from_letters(0, "Z").unwrap();
        let red = ra.expect_pauli(&z1) - sa.expect_pauli(&z1);
        assert_abs_diff_eq!(full, red, epsilon = 1e-10);
    }
}
