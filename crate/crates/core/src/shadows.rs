//! Randomized single-qubit-basis measurement snapshots, their unbiased
//! per-region inversion, and robust averaging over non-identical source
//! states.
//!
//! Snapshots store `(basis, bit)` pairs only; operators are materialized
//! lazily per region. Snapshot `i` of set `j` draws from the stream
//! `(master_seed, j, i)`, so regeneration is independent of execution order.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::QuantumState;
use crate::parallel;
use crate::rng;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Measurement basis for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    fn code(self) -> u8 {
        match self {
            Basis::X => 0,
            Basis::Y => 1,
            Basis::Z => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(Basis::X),
            1 => Ok(Basis::Y),
            2 => Ok(Basis::Z),
            _ => Err(Error::InvalidParameter(format!("bad basis code {c}"))),
        }
    }

    /// Basis state `|b>` as a 2-vector, bit 0 / bit 1.
    fn ket(self, bit: bool) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match (self, bit) {
            (Basis::Z, false) => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            (Basis::Z, true) => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            (Basis::X, false) => [C64::new(h, 0.0), C64::new(h, 0.0)],
            (Basis::X, true) => [C64::new(h, 0.0), C64::new(-h, 0.0)],
            (Basis::Y, false) => [C64::new(h, 0.0), C64::new(0.0, h)],
            (Basis::Y, true) => [C64::new(h, 0.0), C64::new(0.0, -h)],
        }
    }
}

/// One measurement record: a basis choice and outcome bit per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub bases: Vec<Basis>,
    pub bits: Vec<bool>,
}

impl Snapshot {
    /// Per-qubit inverted-channel factor `3 |b><b| - I` on one site.
    fn site_operator(&self, site: usize) -> Array2<C64> {
        let k = self.bases[site].ket(self.bits[site]);
        let mut m = Array2::<C64>::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = k[i] * k[j].conj() * 3.0;
            }
        }
        m[(0, 0)] -= 1.0;
        m[(1, 1)] -= 1.0;
        m
    }
}

/// Snapshot inversion on a region: tensor over `region` of `3|b><b| - I`.
///
/// The mean over snapshots converges to the reduced state on the region.
/// An empty region gives the 1x1 matrix `[1]`.
pub fn snapshot_operator(s: &Snapshot, region: &[usize]) -> Result<CMat> {
    for &site in region {
        if site >= s.bases.len() {
            return Err(Error::SiteOutOfLattice { site, n: s.bases.len() });
        }
    }
    let mut m = Array2::<C64>::eye(1);
    for &site in region {
        m = linalg::kron(&m, &s.site_operator(site));
    }
    Ok(m)
}

/// A seeded batch of snapshots tagged by its source parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowSet {
    pub n: usize,
    pub master_seed: u64,
    pub set_index: u64,
    /// Source parameter vector (informational tag).
    pub tag: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl ShadowSet {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Mean inverted snapshot on `region`, with a deterministic pairwise
    /// reduction.
    pub fn mean_operator(&self, region: &[usize]) -> Result<CMat> {
        if self.snapshots.is_empty() {
            return Err(Error::EmptySelection);
        }
        let ops = parallel::par_map(&self.snapshots, |s| snapshot_operator(s, region).expect("region checked"));
        for &site in region {
            if site >= self.n {
                return Err(Error::SiteOutOfLattice { site, n: self.n });
            }
        }
        let d = 1usize << region.len();
        let sum = parallel::pairwise_sum(ops, || Array2::<C64>::zeros((d, d)), |a, b| a + b);
        Ok(sum.mapv(|z| z / self.snapshots.len() as f64))
    }
}

/// Draw `count` randomized-basis snapshots from the exact Born distribution
/// of `rho`. Deterministic in `(master_seed, set_index)`.
pub fn collect_snapshots(rho: &QuantumState, count: usize, master_seed: u64, set_index: u64) -> Result<ShadowSet> {
    if count == 0 {
        return Err(Error::InvalidParameter("snapshot count must be >= 1".into()));
    }
    let n = rho.n_qubits();
    let snapshots = parallel::par_map_indexed(count, |i| {
        let mut rng = rng::stream(master_seed, set_index, i as u64);
        draw_snapshot(rho, n, &mut rng)
    });
    Ok(ShadowSet { n, master_seed, set_index, tag: Vec::new(), snapshots })
}

fn draw_snapshot(rho: &QuantumState, n: usize, rng: &mut impl Rng) -> Snapshot {
    let bases: Vec<Basis> = (0..n)
        .map(|_| match rng.gen_range(0u8..3u8) {
            0 => Basis::X,
            1 => Basis::Y,
            _ => Basis::Z,
        })
        .collect();
    // Born probabilities of all outcomes in the product basis:
    // p(b) = <b| U^dag rho U |b> with U columns the basis kets, evaluated by
    // rotating one qubit at a time in place.
    let d = 1usize << n;
    let mut work = rho.density().clone();
    for (q, basis) in bases.iter().enumerate() {
        let k0 = basis.ket(false);
        let k1 = basis.ket(true);
        // u columns are the kets: u = [[k0[0], k1[0]], [k0[1], k1[1]]].
        let (u00, u01, u10, u11) = (k0[0], k1[0], k0[1], k1[1]);
        let stride = 1usize << (n - 1 - q);
        // work <- work * u on qubit q (mix column pairs), then
        // work <- u^dag * work (mix row pairs).
        for j0 in 0..d {
            if j0 & stride != 0 {
                continue;
            }
            let j1 = j0 | stride;
            for i in 0..d {
                let a = work[(i, j0)];
                let b = work[(i, j1)];
                work[(i, j0)] = a * u00 + b * u10;
                work[(i, j1)] = a * u01 + b * u11;
            }
        }
        for i0 in 0..d {
            if i0 & stride != 0 {
                continue;
            }
            let i1 = i0 | stride;
            for j in 0..d {
                let a = work[(i0, j)];
                let b = work[(i1, j)];
                work[(i0, j)] = a * u00.conj() + b * u10.conj();
                work[(i1, j)] = a * u01.conj() + b * u11.conj();
            }
        }
    }
    let mut total = 0.0;
    for b in 0..d {
        total += work[(b, b)].re.max(0.0);
    }
    let coin: f64 = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    let mut outcome = d - 1;
    for b in 0..d {
        cum += work[(b, b)].re.max(0.0);
        if coin < cum {
            outcome = b;
            break;
        }
    }
    let bits: Vec<bool> = (0..n).map(|s| (outcome >> (n - 1 - s)) & 1 == 1).collect();
    Snapshot { bases, bits }
}

/// Snapshot budget for reconstructing any region of at most `k0` qubits to
/// trace-norm `eps` with failure probability `delta_p`, over `n` sites:
/// `ceil( (8 * 12^k0 / (3 eps^2)) * ln(n^k0 * 2^(k0+1) / delta_p) )`.
pub fn sample_count_t(k0: u32, eps: f64, delta_p: f64, n: usize) -> Result<u64> {
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 || !(0.0..1.0).contains(&delta_p) || delta_p <= 0.0 {
        return Err(Error::InvalidParameter("eps and delta' must lie in (0, 1)".into()));
    }
    let lead = 8.0 * 12.0f64.powi(k0 as i32) / (3.0 * eps * eps);
    let logarg = (n as f64).powi(k0 as i32) * 2.0f64.powi(k0 as i32 + 1) / delta_p;
    Ok((lead * logarg.ln()).ceil() as u64)
}

/// Region-restricted average over selected shadow sets.
#[derive(Debug, Clone)]
pub struct RobustEstimate {
    pub region: Vec<usize>,
    pub sigma_tilde: CMat,
    /// Number of sets averaged.
    pub t: usize,
    /// Claimed trace-norm radius `eps + eta` (caller-provided promise).
    pub claimed_radius: Option<f64>,
}

/// Average the per-set mean snapshot operators over `selection`.
///
/// The caller promises that every selected source state matches the target
/// within `eta` on the region; the claimed radius can then be attached via
/// `claimed_radius`.
pub fn robust_average(sets: &[ShadowSet], region: &[usize], selection: &[usize]) -> Result<RobustEstimate> {
    if selection.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut means = Vec::with_capacity(selection.len());
    for &idx in selection {
        let set = sets.get(idx).ok_or(Error::InvalidParameter(format!("selection index {idx} out of range")))?;
        means.push(set.mean_operator(region)?);
    }
    let d = 1usize << region.len();
    let sum = parallel::pairwise_sum(means, || Array2::<C64>::zeros((d, d)), |a, b| a + b);
    let sigma_tilde = sum.mapv(|z| z / selection.len() as f64);
    Ok(RobustEstimate { region: region.to_vec(), sigma_tilde, t: selection.len(), claimed_radius: None })
}

/// Empirical tail of a matrix-Bernstein sum against the analytic bound
/// `(d1 + d2) exp(-s^2/2 / (nu + L s / 3))`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BernsteinTrial {
    pub empirical: f64,
    pub bound: f64,
    pub trials: usize,
}

/// Run `trials` independent experiments, each summing `t` centered bounded
/// Hermitian matrices drawn by `draw`, and compare the empirical frequency of
/// `||Z|| >= s` with the Bernstein bound. `l_bound` bounds each summand's
/// operator norm and `nu` the variance proxy `||E[Z^2]||`.
pub fn bernstein_trial(
    draw: impl Fn(&mut rand_chacha::ChaCha12Rng) -> CMat + Sync,
    dim: usize,
    t: usize,
    s: f64,
    l_bound: f64,
    nu: f64,
    trials: usize,
    seed: u64,
) -> Result<BernsteinTrial> {
    let hits = parallel::par_map_indexed(trials, |trial| {
        let mut acc = Array2::<C64>::zeros((dim, dim));
        let mut rng = rng::stream(seed, trial as u64, 0);
        for _ in 0..t {
            acc = acc + draw(&mut rng);
        }
        let norm = linalg::op_norm_hermitian(&acc).unwrap_or(f64::INFINITY);
        usize::from(norm >= s)
    });
    let empirical = hits.iter().sum::<usize>() as f64 / trials as f64;
    let bound = (2 * dim) as f64 * (-s * s / 2.0 / (nu + l_bound * s / 3.0)).exp();
    Ok(BernsteinTrial { empirical, bound, trials })
}

// ---------------------------------------------------------------------------
// Binary shadow-set files
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 4] = b"SHDW";

/// Serialize to the packed byte layout: header
/// `{magic, version, n, count, master_seed, set_index, tag}` followed per
/// snapshot by 2-bit basis codes then outcome bits, little-endian throughout.
pub fn write_shadow_set(set: &ShadowSet) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.push(1u8);
    buf.extend_from_slice(&(set.n as u16).to_le_bytes());
    buf.extend_from_slice(&(set.snapshots.len() as u64).to_le_bytes());
    buf.extend_from_slice(&set.master_seed.to_le_bytes());
    buf.extend_from_slice(&set.set_index.to_le_bytes());
    buf.extend_from_slice(&(set.tag.len() as u16).to_le_bytes());
    for v in &set.tag {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let basis_bytes = (2 * set.n + 7) / 8;
    let bit_bytes = (set.n + 7) / 8;
    for s in &set.snapshots {
        let mut bb = vec![0u8; basis_bytes];
        for (q, b) in s.bases.iter().enumerate() {
            bb[q / 4] |= b.code() << (2 * (q % 4));
        }
        buf.extend_from_slice(&bb);
        let mut ob = vec![0u8; bit_bytes];
        for (q, &bit) in s.bits.iter().enumerate() {
            if bit {
                ob[q / 8] |= 1 << (q % 8);
            }
        }
        buf.extend_from_slice(&ob);
    }
    buf
}

pub fn read_shadow_set(bytes: &[u8]) -> Result<ShadowSet> {
    let bad = |m: &str| Error::InvalidParameter(format!("shadow file: {m}"));
    if bytes.len() < 31 || &bytes[0..4] != MAGIC || bytes[4] != 1 {
        return Err(bad("bad magic or version"));
    }
    let mut off = 5usize;
    let mut take = |len: usize| -> Result<&[u8]> {
        if off + len > bytes.len() {
            return Err(bad("truncated"));
        }
        let s = &bytes[off..off + len];
        off += len;
        Ok(s)
    };
    let n = u16::from_le_bytes(take(2)?.try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let master_seed = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let set_index = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let tag_len = u16::from_le_bytes(take(2)?.try_into().unwrap()) as usize;
    let mut tag = Vec::with_capacity(tag_len);
    for _ in 0..tag_len {
        tag.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let basis_bytes = (2 * n + 7) / 8;
    let bit_bytes = (n + 7) / 8;
    let mut snapshots = Vec::with_capacity(count);
    for _ in 0..count {
        let bb = take(basis_bytes)?.to_vec();
        let ob = take(bit_bytes)?.to_vec();
        let mut bases = Vec::with_capacity(n);
        let mut bits = Vec::with_capacity(n);
        for q in 0..n {
            bases.push(Basis::from_code((bb[q / 4] >> (2 * (q % 4))) & 0b11)?);
            bits.push(ob[q / 8] >> (q % 8) & 1 == 1);
        }
        snapshots.push(Snapshot { bases, bits });
    }
    Ok(ShadowSet { n, master_seed, set_index, tag, snapshots })
}

// ---------------------------------------------------------------------------
// Random-instance helpers shared by sweeps and tests
// ---------------------------------------------------------------------------

/// Random full-rank mixed state (normalized Wishart).
pub fn random_state(n: usize, rng: &mut impl Rng) -> Result<QuantumState> {
    let d = 1usize << n;
    let mut g = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = C64::new(gauss(rng), gauss(rng));
        }
    }
    let gd = g.t().mapv(|z| z.conj());
    let w = g.dot(&gd);
    let tr = linalg::trace(&w).re;
    QuantumState::from_density(w.mapv(|z| z / tr))
}

/// Random Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian(d: usize, scale: f64, rng: &mut impl Rng) -> CMat {
    let mut h = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        h[(i, i)] = C64::new(scale * gauss(rng), 0.0);
        for j in (i + 1)..d {
            let z = C64::new(scale * gauss(rng), scale * gauss(rng));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
