//! Density matrices and thermal-state functionals on small qubit registers.
//!
//! States carry their spectral decomposition; `exp`, `log` and powers are
//! always evaluated through the spectrum.  Entropies and the partition
//! function use natural logarithms throughout.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::pauli::{PauliString, PauliSum};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::sync::OnceLock;

pub const TRACE_TOL: f64 = 1e-10;
pub const EIGVAL_CLIP: f64 = 1e-10;
pub const ENTROPY_FLOOR: f64 = 1e-14;
pub const GAP_TOL: f64 = 1e-8;
pub const SUPPORT_TOL: f64 = 1e-12;

/// A positive unit-trace operator with cached spectral decomposition.
#[derive(Debug, Clone)]
pub struct QuantumState {
    n: usize,
    /// Spectral weights (eigenvalues), clipped to be nonnegative.
    probs: Array1<f64>,
    /// Eigenvector columns.
    vecs: CMat,
    dense: OnceLock<CMat>,
}

impl QuantumState {
    /// Validate and decompose a dense density matrix.
    pub fn from_density(rho: CMat) -> Result<Self> {
        let d = rho.nrows();
        let n = log2_exact(d)?;
        linalg::check_hermitian(&rho, linalg::HERMITICITY_TOL)
            .map_err(|_| Error::NotAState("not Hermitian within 1e-12".into()))?;
        let tr = linalg::trace(&rho);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotAState(format!("trace {tr} not 1 within 1e-10")));
        }
        let (mut e, v) = linalg::eigh(&rho)?;
        for x in e.iter_mut() {
            if *x < -EIGVAL_CLIP {
                return Err(Error::NotAState(format!("negative eigenvalue {x:.3e}")));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let state = Self { n, probs: e, vecs: v, dense: OnceLock::new() };
        state.dense.set(rho).ok();
        Ok(state)
    }

    /// Build from spectral data (weights assumed normalized and clipped).
    pub fn from_spectrum(n: usize, probs: Array1<f64>, vecs: CMat) -> Self {
        Self { n, probs, vecs, dense: OnceLock::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn probabilities(&self) -> &Array1<f64> {
        &self.probs
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.vecs
    }

    /// The dense density matrix (materialized on first use).
    pub fn density(&self) -> &CMat {
        self.dense.get_or_init(|| linalg::recombine(&self.probs, &self.vecs))
    }

    /// Maximally mixed state on `n` qubits.
    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        Self::from_spectrum(n, Array1::from_elem(d, 1.0 / d as f64), linalg::identity(d))
    }

    /// Pure state from a normalized vector.
    pub fn pure(n: usize, psi: &Array1<C64>) -> Result<Self> {
        let d = 1usize << n;
        if psi.len() != d {
            return Err(Error::DimensionMismatch { left: psi.len(), right: d });
        }
        let mut vecs = linalg::identity(d);
        for i in 0..d {
            vecs[(i, 0)] = psi[i];
        }
        // Remaining columns are irrelevant (zero weight) but keep the matrix
        // unitary-ish for safety: only column 0 carries weight.
        let mut probs = Array1::zeros(d);
        probs[0] = 1.0;
        Ok(Self::from_spectrum(n, probs, vecs))
    }

    /// Diagonal state from a probability vector (classical embedding).
    pub fn diagonal(n: usize, p: &[f64]) -> Result<Self> {
        let d = 1usize << n;
        if p.len() != d {
            return Err(Error::DimensionMismatch { left: p.len(), right: d });
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL || p.iter().any(|&x| x < -EIGVAL_CLIP) {
            return Err(Error::NotAState("probability vector invalid".into()));
        }
        Ok(Self::from_spectrum(n, Array1::from(p.to_vec()), linalg::identity(d)))
    }

    /// `tr[P rho]` for a Pauli string, using the cheapest available path.
    pub fn expect_pauli(&self, p: &PauliString) -> f64 {
        if let Some(rho) = self.dense.get() {
            return p.expectation(rho, self.n).re;
        }
        // sum_k p_k <v_k| P |v_k> without materializing rho.
        let d = self.dim();
        let mut acc = 0.0;
        for k in 0..d {
            let pk = self.probs[k];
            if pk == 0.0 {
                continue;
            }
            let col = self.vecs.column(k);
            let mut me = C64::new(0.0, 0.0);
            for i in 0..d {
                let (j, phase) = p.apply_basis(i, self.n);
                me += col[j].conj() * phase * col[i];
            }
            acc += pk * me.re;
        }
        acc
    }

    pub fn expect_pauli_sum(&self, o: &PauliSum) -> f64 {
        o.terms.iter().map(|(c, p)| c * self.expect_pauli(p)).sum()
    }

    /// `tr[A rho]` for a dense observable.
    pub fn expect_dense(&self, a: &CMat) -> f64 {
        let rho = self.density();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..rho.nrows() {
            for j in 0..rho.ncols() {
                acc += a[(i, j)] * rho[(j, i)];
            }
        }
        acc.re
    }

    /// Reduced state on `keep` (sorted site order preserved).
    pub fn reduce(&self, keep: &[usize]) -> Result<QuantumState> {
        if keep.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let reduced = linalg::partial_trace(self.density(), self.n, keep)?;
        QuantumState::from_density(reduced)
    }

    /// Von Neumann entropy (natural log) of the whole state.
    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(self.probs.as_slice().unwrap())
    }

    /// Purity `tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }
}

fn log2_exact(d: usize) -> Result<usize> {
    if d == 0 || d & (d - 1) != 0 {
        return Err(Error::InvalidParameter(format!("dimension {d} is not a power of two")));
    }
    Ok(d.trailing_zeros() as usize)
}

fn entropy_of_spectrum(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > ENTROPY_FLOOR)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Gibbs state `exp(-beta H) / Z` computed in the eigenbasis with a
/// max-eigenvalue shift for overflow safety.  `beta = 0` gives the maximally
/// mixed state.
pub fn gibbs_state(h: &CMat, beta: f64) -> Result<QuantumState> {
    if beta < 0.0 {
        return Err(Error::InvalidParameter("beta must be nonnegative".into()));
    }
    linalg::check_hermitian(h, linalg::HERMITICITY_TOL)?;
    let n = log2_exact(h.nrows())?;
    let (e, v) = linalg::eigh(h)?;
    let emin = e.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w: Array1<f64> = e.mapv(|x| (-beta * (x - emin)).exp());
    let z: f64 = w.sum();
    w.mapv_inplace(|x| x / z);
    Ok(QuantumState::from_spectrum(n, w, v))
}

/// Projector onto the lowest eigenvector; errors out when the spectral gap
/// above the ground energy is below `GAP_TOL`.
pub fn ground_state(h: &CMat) -> Result<QuantumState> {
    linalg::check_hermitian(h, linalg::HERMITICITY_TOL)?;
    let n = log2_exact(h.nrows())?;
    let (e, v) = linalg::eigh(h)?;
    let gap = e[1] - e[0];
    if gap < GAP_TOL {
        return Err(Error::DegenerateGroundSpace { gap, tol: GAP_TOL });
    }
    let d = h.nrows();
    let mut probs = Array1::zeros(d);
    probs[0] = 1.0;
    Ok(QuantumState::from_spectrum(n, probs, v))
}

/// `log tr[exp(-beta H)]` via log-sum-exp over the spectrum.
pub fn log_partition(h: &CMat, beta: f64) -> Result<f64> {
    linalg::check_hermitian(h, linalg::HERMITICITY_TOL)?;
    let (e, _) = linalg::eigh(h)?;
    let m = e.iter().map(|x| -beta * x).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = e.iter().map(|x| (-beta * x - m).exp()).sum();
    Ok(m + s.ln())
}

/// Symmetrized covariance
/// `Cov_rho(A, B) = tr[rho {A - <A>, B - <B>}] / 2`.
pub fn covariance(rho: &QuantumState, a: &CMat, b: &CMat) -> Result<f64> {
    let d = rho.dim();
    if a.nrows() != d || b.nrows() != d {
        return Err(Error::DimensionMismatch { left: a.nrows(), right: d });
    }
    let r = rho.density();
    let ea = rho.expect_dense(a);
    let eb = rho.expect_dense(b);
    let a0 = a.mapv(|z| z) - &(linalg::identity(d).mapv(|z| z * ea));
    let b0 = b.mapv(|z| z) - &(linalg::identity(d).mapv(|z| z * eb));
    let ab = a0.dot(&b0);
    let ba = b0.dot(&a0);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += r[(i, j)] * (ab[(j, i)] + ba[(j, i)]);
        }
    }
    Ok(0.5 * acc.re)
}

/// Disjoint regions for entropy bookkeeping.
#[derive(Debug, Clone)]
pub struct RegionPartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Option<Vec<usize>>,
}

impl RegionPartition {
    pub fn new(a: Vec<usize>, b: Vec<usize>, c: Option<Vec<usize>>) -> Result<Self> {
        let mut all: Vec<usize> = a.iter().chain(b.iter()).chain(c.iter().flatten()).cloned().collect();
        let len = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != len {
            return Err(Error::OverlappingRegions);
        }
        Ok(Self { a, b, c })
    }
}

/// Entropic functionals of a state over a partition.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EntropyReport {
    /// S(A)
    pub s_a: f64,
    /// S(A|B) = S(AB) - S(B)
    pub s_a_given_b: f64,
    /// I(A:B)
    pub mutual_ab: f64,
    /// I(A:B|C); equals I(A:B) when C is absent.
    pub cond_mutual: f64,
}

pub fn entropies(rho: &QuantumState, part: &RegionPartition) -> Result<EntropyReport> {
    let n = rho.n_qubits();
    for s in part.a.iter().chain(part.b.iter()).chain(part.c.iter().flatten()) {
        if *s >= n {
            return Err(Error::RegionOutOfLattice);
        }
    }
    let ent = |sites: &[usize]| -> Result<f64> {
        if sites.is_empty() {
            return Ok(0.0);
        }
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        Ok(rho.reduce(&sorted)?.entropy())
    };
    let union = |xs: &[&[usize]]| -> Vec<usize> {
        let mut v: Vec<usize> = xs.iter().flat_map(|s| s.iter().cloned()).collect();
        v.sort_unstable();
        v
    };
    let s_a = ent(&part.a)?;
    let s_b = ent(&part.b)?;
    let s_ab = ent(&union(&[&part.a, &part.b]))?;
    let s_a_given_b = s_ab - s_b;
    let mutual_ab = s_a + s_b - s_ab;
    let cond_mutual = match &part.c {
        None => mutual_ab,
        Some(c) => {
            let s_ac = ent(&union(&[&part.a, c]))?;
            let s_bc = ent(&union(&[&part.b, c]))?;
            let s_c = ent(c)?;
            let s_abc = ent(&union(&[&part.a, &part.b, c]))?;
            s_ac + s_bc - s_c - s_abc
        }
    };
    Ok(EntropyReport { s_a, s_a_given_b, mutual_ab, cond_mutual })
}

/// Both sides of the normalized-exponential perturbation inequality
/// `|| e^{-H1}/Z1 - e^{-H2}/Z2 ||_1 <= 2 (e^{||H1 - H2||} - 1)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PerturbationCheck {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn gibbs_perturbation_check(h1: &CMat, h2: &CMat) -> Result<PerturbationCheck> {
    if h1.nrows() != h2.nrows() {
        return Err(Error::DimensionMismatch { left: h1.nrows(), right: h2.nrows() });
    }
    let s1 = gibbs_state(h1, 1.0)?;
    let s2 = gibbs_state(h2, 1.0)?;
    let diff = s1.density() - s2.density();
    let lhs = linalg::trace_norm_hermitian(&diff)?;
    let delta = linalg::op_norm_hermitian(&(h1 - h2))?;
    let rhs = 2.0 * (delta.exp() - 1.0);
    Ok(PerturbationCheck { lhs, rhs })
}

/// Relative entropy `D(rho || sigma)`, natural log. Errors out when the
/// support of `rho` leaks outside the support of `sigma`.
pub fn relative_entropy(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let d = rho.dim();
    // Check support containment: sigma-kernel vectors must carry no rho mass.
    let r = rho.density();
    for k in 0..d {
        if sigma.probabilities()[k] < SUPPORT_TOL {
            let v = sigma.eigenvectors().column(k);
            let mut mass = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    mass += v[i].conj() * r[(i, j)] * v[j];
                }
            }
            if mass.re > 1e-10 {
                return Err(Error::InfiniteRelativeEntropy);
            }
        }
    }
    // tr rho ln rho
    let t1: f64 = rho
        .probabilities()
        .iter()
        .filter(|&&p| p > ENTROPY_FLOOR)
        .map(|&p| p * p.ln())
        .sum();
    // tr rho ln sigma = sum_k ln(q_k) <w_k| rho |w_k>
    let mut t2 = 0.0;
    for k in 0..d {
        let q = sigma.probabilities()[k];
        if q < SUPPORT_TOL {
            continue;
        }
        let w = sigma.eigenvectors().column(k);
        let mut mass = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                mass += w[i].conj() * r[(i, j)] * w[j];
            }
        }
        t2 += mass.re.max(0.0) * q.ln();
    }
    Ok((t1 - t2).max(0.0))
}

/// Trace distance `|| rho - sigma ||_1`.
pub fn trace_distance(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    let diff = rho.density() - sigma.density();
    linalg::trace_norm_hermitian(&diff)
}

/// Debug dump: header `{n: u32, kind: u32}` then the density matrix as
/// row-major `(re, im)` pairs of little-endian f64.
pub fn dump_state(state: &QuantumState, kind: u32) -> Vec<u8> {
    let mut buf = Vec::with_capacity(8 + 16 * state.dim() * state.dim());
    buf.extend_from_slice(&(state.n_qubits() as u32).to_le_bytes());
    buf.extend_from_slice(&kind.to_le_bytes());
    for z in state.density().iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    buf
}

/// Read back a debug dump. Returns `(state, kind)`.
pub fn load_state(bytes: &[u8]) -> Result<(QuantumState, u32)> {
    if bytes.len() < 8 {
        return Err(Error::InvalidParameter("state dump truncated".into()));
    }
    let n = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let kind = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let d = 1usize << n;
    if bytes.len() != 8 + 16 * d * d {
        return Err(Error::InvalidParameter("state dump has wrong length".into()));
    }
    let mut rho = Array2::<C64>::zeros((d, d));
    let mut off = 8;
    for i in 0..d {
        for j in 0..d {
            let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
            rho[(i, j)] = C64::new(re, im);
            off += 16;
        }
    }
    Ok((QuantumState::from_density(rho)?, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use approx::assert_abs_diff_eq;

    fn pauli_z() -> CMat {
        PauliString::from_letters(0, "Z").unwrap().dense(1)
    }

    #[test]
    fn beta_zero_is_maximally_mixed() {
        let h = pauli_z().mapv(|z| z * 0.37);
        let s = gibbs_state(&h, 0.0).unwrap();
        for p in s.probabilities() {
            assert_abs_diff_eq!(*p, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_qubit_gibbs_matches_tanh() {
        // H = 0.5 Z at beta = 1: <Z> = -tanh(0.5).
        let h = pauli_z().mapv(|z| z * 0.5);
        let s = gibbs_state(&h, 1.0).unwrap();
        let z = PauliString::from_letters(0, "Z").unwrap();
        assert_abs_diff_eq!(s.expect_pauli(&z), -(0.5f64).tanh(), epsilon = 1e-12);
    }

    #[test]
    fn deep_beta_projects_to_ground() {
        let h = pauli_z();
        let s = gibbs_state(&h, 50.0).unwrap();
        let g = ground_state(&h).unwrap();
        let dist = trace_distance(&s, &g).unwrap();
        assert!(dist < 1e-12, "trace distance {dist}");
    }

    #[test]
    fn ground_state_of_x_is_minus() {
        let h = PauliString::from_letters(0, "X").unwrap().dense(1);
        let g = ground_state(&h).unwrap();
        // |-> = (|0> - |1>)/sqrt(2): off-diagonals are -1/2.
        let rho = g.density();
        assert_abs_diff_eq!(rho[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(0, 1)].re, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_gap_errors() {
        let h = linalg::identity(2);
        assert!(matches!(ground_state(&h), Err(Error::DegenerateGroundSpace { .. })));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut h = linalg::identity(2);
        h[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(gibbs_state(&h, 1.0), Err(Error::NonHermitian { .. })));
        let s = QuantumState::maximally_mixed(2);
        assert!(matches!(s.reduce(&[]), Err(Error::EmptyRegion)));
    }

    #[test]
    fn log_partition_closed_form() {
        // H = x Z: ln Z = ln(2 cosh(beta x)).
        let h = pauli_z().mapv(|z| z * 0.5);
        let lz = log_partition(&h, 1.0).unwrap();
        assert_abs_diff_eq!(lz, (2.0 * (0.5f64).cosh()).ln(), epsilon = 1e-12);
        // beta = 0 on n qubits: n ln 2.
        let h3 = crate::pauli::PauliString::from_letters(0, "ZZZ").unwrap().dense(3);
        assert_abs_diff_eq!(log_partition(&h3, 0.0).unwrap(), 3.0 * (2.0f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn covariance_basics() {
        // Infinite temperature, disjoint Paulis: zero.
        let s = QuantumState::maximally_mixed(2);
        let z1 = PauliString::new([(0, Pauli::Z)]).unwrap().dense(2);
        let z2 = PauliString::new([(1, Pauli::Z)]).unwrap().dense(2);
        assert_abs_diff_eq!(covariance(&s, &z1, &z2).unwrap(), 0.0, epsilon = 1e-12);
        // Variance of Z in I/2 is 1.
        let s1 = QuantumState::maximally_mixed(1);
        let z = pauli_z();
        assert_abs_diff_eq!(covariance(&s1, &z, &z).unwrap(), 1.0, epsilon = 1e-12);
        // Centering kills the identity.
        let eye = linalg::identity(2);
        assert_abs_diff_eq!(covariance(&s1, &z, &eye).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_of_bell_pair() {
        let mut psi = ndarray::Array1::<C64>::zeros(4);
        psi[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = QuantumState::pure(2, &psi).unwrap();
        let part = RegionPartition::new(vec![0], vec![1], None).unwrap();
        let rep = entropies(&bell, &part).unwrap();
        let ln2 = (2.0f64).ln();
        assert_abs_diff_eq!(rep.s_a, ln2, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.mutual_ab, 2.0 * ln2, epsilon = 1e-10);
        // Reduced state of a Bell pair is I/2.
        let red = bell.reduce(&[0]).unwrap();
        assert_abs_diff_eq!(red.density()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(red.density()[(1, 1)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn maximally_mixed_entropy() {
        let s = QuantumState::maximally_mixed(3);
        let part = RegionPartition::new(vec![0, 1, 2], vec![], None).unwrap();
        let rep = entropies(&s, &part).unwrap();
        assert_abs_diff_eq!(rep.s_a, 3.0 * (2.0f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn perturbation_check_trivial_and_small() {
        let h = pauli_z();
        let same = gibbs_perturbation_check(&h, &h).unwrap();
        assert_abs_diff_eq!(same.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(same.rhs, 0.0, epsilon = 1e-12);

        let zero = CMat::zeros((2, 2));
        let eps = pauli_z().mapv(|z| z * 0.1);
        let chk = gibbs_perturbation_check(&zero, &eps).unwrap();
        // lhs = ||I/2 - gibbs(0.1 Z)||_1 = |tanh(0.1)|; rhs = 2(e^0.1 - 1).
        assert_abs_diff_eq!(chk.lhs, (0.1f64).tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(chk.rhs, 2.0 * ((0.1f64).exp() - 1.0), epsilon = 1e-12);
        assert!(chk.lhs <= chk.rhs);
    }

    #[test]
    fn relative_entropy_basics() {
        let s = QuantumState::maximally_mixed(1);
        assert_abs_diff_eq!(relative_entropy(&s, &s).unwrap(), 0.0, epsilon = 1e-12);
        let pure0 = QuantumState::diagonal(1, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(relative_entropy(&pure0, &s).unwrap(), (2.0f64).ln(), epsilon = 1e-12);
        assert!(matches!(relative_entropy(&s, &pure0), Err(Error::InfiniteRelativeEntropy)));
    }

    #[test]
    fn state_dump_round_trip() {
        let mut rng = crate::rng::stream(55, 0, 0);
        let s = crate::shadows::random_state(2, &mut rng).unwrap();
        let bytes = dump_state(&s, 7);
        let (back, kind) = load_state(&bytes).unwrap();
        assert_eq!(kind, 7);
        assert!(trace_distance(&s, &back).unwrap() < 1e-12);
        assert!(load_state(&bytes[..10]).is_err());
    }

    #[test]
    fn gibbs_invariant_under_energy_shift() {
        let z = pauli_z();
        let h1 = z.mapv(|v| v * 0.8);
        let h2 = &h1 + &linalg::identity(2).mapv(|v| v * 3.7);
        let a = gibbs_state(&h1, 1.3).unwrap();
        let b = gibbs_state(&h2, 1.3).unwrap();
        assert!(trace_distance(&a, &b).unwrap() < 1e-12);
    }
}
