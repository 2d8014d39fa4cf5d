//! Dense Hermitian linear algebra on qubit registers.
//!
//! Matrix functions go through the spectral decomposition, never series
//! expansions. Site `s` of an `n`-site register is bit `n-1-s` of the basis
//! index (site 0 leftmost).

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

pub type CMat = Array2<C64>;

pub const HERMITICITY_TOL: f64 = 1e-12;

/// Largest deviation `|M - M^dagger|` entrywise.
pub fn hermiticity_deviation(m: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn check_hermitian(m: &CMat, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { left: m.nrows(), right: m.ncols() });
    }
    let dev = hermiticity_deviation(m);
    if dev > tol {
        return Err(Error::NonHermitian { deviation: dev });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matrix of eigenvector columns.
pub fn eigh(m: &CMat) -> Result<(Array1<f64>, CMat)> {
    // Symmetrize first so LAPACK sees an exactly Hermitian input.
    let mut s = m.clone();
    for i in 0..s.nrows() {
        for j in (i + 1)..s.ncols() {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)].conj());
            s[(i, j)] = avg;
            s[(j, i)] = avg.conj();
        }
        let di = s[(i, i)].re;
        s[(i, i)] = C64::new(di, 0.0);
    }
    let (e, v) = s
        .eigh(UPLO::Lower)
        .map_err(|e| Error::InvalidParameter(format!("eigendecomposition failed: {e}")))?;
    // LAPACK-backed eigh can hand back the eigensystem of the conjugate
    // matrix for row-major complex input (layout quirk); detect via the
    // first eigenvector's residual and conjugate if needed.
    let resid = |vec: ndarray::ArrayView1<C64>| -> f64 {
        let d = s.nrows();
        let mut r = 0.0f64;
        for i in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += s[(i, j)] * vec[j];
            }
            r += (acc - vec[i] * e[0]).norm_sqr();
        }
        r.sqrt()
    };
    let direct = resid(v.column(0));
    if direct > 1e-8 * (1.0 + e[0].abs()) {
        let vc = v.mapv(|z| z.conj());
        if resid(vc.column(0)) < direct {
            return Ok((e, vc));
        }
    }
    Ok((e, v))
}

/// Apply a real function to a Hermitian matrix through its spectrum.
pub fn func_hermitian(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (e, v) = eigh(m)?;
    Ok(recombine(&e.mapv(f), &v))
}

/// `V diag(w) V^dagger`.
pub fn recombine(w: &Array1<f64>, v: &CMat) -> CMat {
    let mut scaled = v.clone();
    for (k, col) in scaled.columns_mut().into_iter().enumerate() {
        let wk = w[k];
        let mut col = col;
        col.mapv_inplace(|z| z * wk);
    }
    scaled.dot(&v.t().mapv(|z| z.conj()))
}

/// `V diag(exp(i phase_k)) V^dagger` for unitary construction.
pub fn recombine_phases(phases: &Array1<C64>, v: &CMat) -> CMat {
    let mut scaled = v.clone();
    for (k, col) in scaled.columns_mut().into_iter().enumerate() {
        let pk = phases[k];
        let mut col = col;
        col.mapv_inplace(|z| z * pk);
    }
    scaled.dot(&v.t().mapv(|z| z.conj()))
}

/// `out = a * b` for small dense matrices, writing in place.
///
/// Plain loops beat BLAS-style packing below a few hundred rows and never
/// allocate, which keeps hot parallel loops allocator-quiet.
pub fn small_gemm_into(a: &CMat, b: &CMat, out: &mut CMat) {
    let (n, m) = (a.nrows(), b.ncols());
    let kdim = a.ncols();
    debug_assert_eq!(kdim, b.nrows());
    debug_assert_eq!((out.nrows(), out.ncols()), (n, m));
    out.fill(C64::new(0.0, 0.0));
    small_gemm_acc(C64::new(1.0, 0.0), a, b, out);
}

/// `acc += alpha * a * b` in place (standard-layout operands).
pub fn small_gemm_acc(alpha: C64, a: &CMat, b: &CMat, acc: &mut CMat) {
    let (n, m) = (a.nrows(), b.ncols());
    let kdim = a.ncols();
    let (a_s, b_s) = (a.as_slice().unwrap(), b.as_slice().unwrap());
    let acc_s = acc.as_slice_mut().unwrap();
    for i in 0..n {
        let a_row = &a_s[i * kdim..(i + 1) * kdim];
        let acc_row = &mut acc_s[i * m..(i + 1) * m];
        for (k, &aik_raw) in a_row.iter().enumerate() {
            let aik = alpha * aik_raw;
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let b_row = &b_s[k * m..(k + 1) * m];
            for (o, &bv) in acc_row.iter_mut().zip(b_row) {
                *o += aik * bv;
            }
        }
    }
}

/// Operator (sup) norm of a Hermitian matrix: max |eigenvalue|.
pub fn op_norm_hermitian(m: &CMat) -> Result<f64> {
    let (e, _) = eigh(m)?;
    Ok(e.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
}

/// Trace (Schatten-1) norm of a Hermitian matrix: sum |eigenvalue|.
pub fn trace_norm_hermitian(m: &CMat) -> Result<f64> {
    let (e, _) = eigh(m)?;
    Ok(e.iter().map(|x| x.abs()).sum())
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().sum()
}

pub fn identity(d: usize) -> CMat {
    Array2::eye(d)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::<C64>::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Index maps between a sub-register and the full register.
///
/// `sites` lists the sub-register's sites in the order its qubits are laid
/// out. Returns for every (sub-index, rest-index) pair the full index.
pub struct SubsystemIndex {
    pub n: usize,
    pub sites: Vec<usize>,
    pub rest: Vec<usize>,
}

impl SubsystemIndex {
    pub fn new(n: usize, sites: &[usize]) -> Result<Self> {
        let mut seen = vec![false; n];
        for &s in sites {
            if s >= n {
                return Err(Error::SiteOutOfLattice { site: s, n });
            }
            if seen[s] {
                return Err(Error::InvalidParameter(format!("duplicate site {s}")));
            }
            seen[s] = true;
        }
        let rest = (0..n).filter(|&s| !seen[s]).collect();
        Ok(Self { n, sites: sites.to_vec(), rest })
    }

    pub fn d_sub(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn d_rest(&self) -> usize {
        1 << self.rest.len()
    }

    /// Full basis index with sub-register bits `a` and remainder bits `e`.
    pub fn full_index(&self, a: usize, e: usize) -> usize {
        let mut idx = 0usize;
        for (pos, &site) in self.sites.iter().enumerate() {
            let bit = (a >> (self.sites.len() - 1 - pos)) & 1;
            idx |= bit << (self.n - 1 - site);
        }
        for (pos, &site) in self.rest.iter().enumerate() {
            let bit = (e >> (self.rest.len() - 1 - pos)) & 1;
            idx |= bit << (self.n - 1 - site);
        }
        idx
    }
}

/// Partial trace of a dense operator, keeping `keep` (in the given order).
pub fn partial_trace(m: &CMat, n: usize, keep: &[usize]) -> Result<CMat> {
    if m.nrows() != (1 << n) {
        return Err(Error::DimensionMismatch { left: m.nrows(), right: 1 << n });
    }
    let idx = SubsystemIndex::new(n, keep)?;
    let (ds, dr) = (idx.d_sub(), idx.d_rest());
    let mut out = Array2::<C64>::zeros((ds, ds));
    for a in 0..ds {
        for b in 0..ds {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..dr {
                acc += m[(idx.full_index(a, e), idx.full_index(b, e))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Embed an operator on `sites` into the full register (identity elsewhere).
pub fn embed_operator(m: &CMat, n: usize, sites: &[usize]) -> Result<CMat> {
    let idx = SubsystemIndex::new(n, sites)?;
    let (ds, dr) = (idx.d_sub(), idx.d_rest());
    if m.nrows() != ds {
        return Err(Error::DimensionMismatch { left: m.nrows(), right: ds });
    }
    let d = 1usize << n;
    let mut out = Array2::<C64>::zeros((d, d));
    for a in 0..ds {
        for b in 0..ds {
            let v = m[(a, b)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for e in 0..dr {
                out[(idx.full_index(a, e), idx.full_index(b, e))] = v;
            }
        }
    }
    Ok(out)
}

/// Normalized partial trace of an observable over the sites in `away`
/// (result re-embedded on the full register as `tau(L) (x) I`):
/// divide by the dimension of the traced factor.
pub fn normalized_trace_out(m: &CMat, n: usize, away: &[usize]) -> Result<CMat> {
    let keep: Vec<usize> = (0..n).filter(|s| !away.contains(s)).collect();
    let reduced = partial_trace(m, n, &keep)?;
    let scale = 1.0 / (1usize << away.len()) as f64;
    let reduced = reduced.mapv(|z| z * scale);
    if keep.is_empty() {
        // Scalar times identity.
        let d = 1usize << n;
        return Ok(identity(d).mapv(|z| z * reduced[(0, 0)]));
    }
    embed_operator(&reduced, n, &keep)
}
