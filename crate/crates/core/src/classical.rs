//! Exhaustive classical Gibbs distributions on spin configurations, their
//! marginals and conditionals, the low-temperature total-variation bound,
//! covariance decay scans, and an exact optimal-transport oracle under the
//! Hamming metric.
//!
//! Configurations are bit-strings of length `n`; bit `n-1-s` of the index is
//! site `s` (matching the qubit register convention), and spin values are
//! `s_i = +1` for bit 0, `-1` for bit 1.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cap for exhaustive enumeration.
pub const ENUM_CAP: usize = 20;
/// Cap for the transport LP (`(2^n)^2` variables).
pub const TRANSPORT_CAP: usize = 6;

/// `H(config) = sum_t J_t prod_{i in t} s_i` over spin products.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalHamiltonian {
    pub n: usize,
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl ClassicalHamiltonian {
    pub fn new(n: usize, terms: Vec<(f64, Vec<usize>)>) -> Result<Self> {
        if n > ENUM_CAP {
            return Err(Error::DenseCapExceeded { requested: n, cap: ENUM_CAP });
        }
        for (_, sites) in &terms {
            for &s in sites {
                if s >= n {
                    return Err(Error::SiteOutOfLattice { site: s, n });
                }
            }
        }
        Ok(Self { n, terms })
    }

    /// Spin value of site `s` in configuration `config`.
    #[inline]
    pub fn spin(&self, config: usize, site: usize) -> f64 {
        if config >> (self.n - 1 - site) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn energy(&self, config: usize) -> f64 {
        self.terms
            .iter()
            .map(|(j, sites)| j * sites.iter().map(|&s| self.spin(config, s)).product::<f64>())
            .sum()
    }

    /// Sites outside `region` that share a term with it.
    pub fn boundary(&self, region: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for (_, sites) in &self.terms {
            if sites.iter().any(|s| region.contains(s)) {
                for &s in sites {
                    if !region.contains(&s) && !out.contains(&s) {
                        out.push(s);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Open-boundary nearest-neighbour Ising chain with uniform coupling `j`
    /// and field `b`.
    pub fn ising_chain(n: usize, j: f64, b: f64) -> Result<Self> {
        let mut terms = Vec::new();
        for i in 0..n.saturating_sub(1) {
            terms.push((j, vec![i, i + 1]));
        }
        if b != 0.0 {
            for i in 0..n {
                terms.push((b, vec![i]));
            }
        }
        Self::new(n, terms)
    }

    /// Open-boundary Ising model on a `rows x cols` grid, row-major sites.
    pub fn ising_grid(rows: usize, cols: usize, j: f64, b: f64) -> Result<Self> {
        let n = rows * cols;
        let site = |r: usize, c: usize| r * cols + c;
        let mut terms = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    terms.push((j, vec![site(r, c), site(r, c + 1)]));
                }
                if r + 1 < rows {
                    terms.push((j, vec![site(r, c), site(r + 1, c)]));
                }
            }
        }
        if b != 0.0 {
            for s in 0..n {
                terms.push((b, vec![s]));
            }
        }
        Self::new(n, terms)
    }
}

/// Exact Gibbs distribution over all `2^n` configurations.
#[derive(Debug, Clone)]
pub struct ClassicalGibbs {
    pub n: usize,
    pub beta: f64,
    pub probs: Vec<f64>,
}

impl ClassicalGibbs {
    /// Enumerate `exp(-beta H)` with log-sum-exp normalization.
    pub fn new(h: &ClassicalHamiltonian, beta: f64) -> Result<Self> {
        let d = 1usize << h.n;
        let energies: Vec<f64> = (0..d).map(|c| h.energy(c)).collect();
        let mmax = energies.iter().map(|e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = energies.iter().map(|e| (-beta * e - mmax).exp()).collect();
        let z: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= z;
        }
        Ok(Self { n: h.n, beta, probs })
    }

    pub fn from_probs(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << n {
            return Err(Error::DimensionMismatch { left: probs.len(), right: 1 << n });
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 || probs.iter().any(|&p| p < 0.0) {
            return Err(Error::NotAState("classical distribution invalid".into()));
        }
        Ok(Self { n, beta: f64::NAN, probs })
    }

    fn sub_index(&self, config: usize, region: &[usize]) -> usize {
        let mut idx = 0usize;
        for (pos, &s) in region.iter().enumerate() {
            let bit = config >> (self.n - 1 - s) & 1;
            idx |= bit << (region.len() - 1 - pos);
        }
        idx
    }

    /// Marginal distribution on `region`.
    pub fn marginal(&self, region: &[usize]) -> Result<Vec<f64>> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mut out = vec![0.0; 1 << region.len()];
        for (c, &p) in self.probs.iter().enumerate() {
            out[self.sub_index(c, region)] += p;
        }
        Ok(out)
    }

    /// Conditional distribution on `region` given an assignment (as a
    /// sub-index over `boundary` sites).
    pub fn conditional(&self, region: &[usize], boundary: &[usize], assignment: usize) -> Result<Vec<f64>> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mut out = vec![0.0; 1 << region.len()];
        let mut mass = 0.0;
        for (c, &p) in self.probs.iter().enumerate() {
            if self.sub_index(c, boundary) == assignment {
                out[self.sub_index(c, region)] += p;
                mass += p;
            }
        }
        if mass <= 0.0 {
            return Err(Error::InvalidParameter("conditioning event has zero mass".into()));
        }
        for v in out.iter_mut() {
            *v /= mass;
        }
        Ok(out)
    }

    /// `E[prod_{i in sites} s_i]`.
    pub fn spin_expectation(&self, sites: &[usize]) -> f64 {
        let mut acc = 0.0;
        for (c, &p) in self.probs.iter().enumerate() {
            let mut v = 1.0;
            for &s in sites {
                v *= if c >> (self.n - 1 - s) & 1 == 0 { 1.0 } else { -1.0 };
            }
            acc += p * v;
        }
        acc
    }

    pub fn covariance(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut joint: Vec<usize> = a.iter().chain(b.iter()).cloned().collect();
        joint.sort_unstable();
        joint.dedup();
        // For spin products over disjoint supports the product observable is
        // the product over the union.
        self.spin_expectation(&joint) - self.spin_expectation(a) * self.spin_expectation(b)
    }

    /// Embed as a diagonal quantum state.
    pub fn to_quantum(&self) -> Result<crate::operators::QuantumState> {
        crate::operators::QuantumState::diagonal(self.n, &self.probs)
    }
}

/// Both sides of the low-temperature concentration bound on a region `A`:
/// `lhs = 2 [1 - sigma_A(a*_A)]`, `rhs = 2 [1 - min_{boundary} sigma(a*_A | boundary)]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LowTempCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// The minimizing configuration.
    pub ground: usize,
}

pub fn low_temp_tv_check(h: &ClassicalHamiltonian, beta: f64, region: &[usize]) -> Result<LowTempCheck> {
    let d = 1usize << h.n;
    let mut best = 0usize;
    let mut best_e = f64::INFINITY;
    let mut second = f64::INFINITY;
    for c in 0..d {
        let e = h.energy(c);
        if e < best_e {
            second = best_e;
            best_e = e;
            best = c;
        } else if e < second {
            second = e;
        }
    }
    if second - best_e < 1e-12 {
        return Err(Error::DegenerateMinimizer);
    }
    let gibbs = ClassicalGibbs::new(h, beta)?;
    let marg = gibbs.marginal(region)?;
    let star_a = gibbs.sub_index(best, region);
    let lhs = 2.0 * (1.0 - marg[star_a]);
    let boundary = h.boundary(region);
    let rhs = if boundary.is_empty() {
        lhs
    } else {
        let mut worst = f64::INFINITY;
        for assign in 0..(1usize << boundary.len()) {
            match gibbs.conditional(region, &boundary, assign) {
                Ok(cond) => worst = worst.min(cond[star_a]),
                // Zero-mass boundary assignments cannot occur for finite beta.
                Err(_) => continue,
            }
        }
        2.0 * (1.0 - worst)
    };
    Ok(LowTempCheck { lhs, rhs, ground: best })
}

/// Exact optimal transport between two distributions over bit-strings with
/// Hamming ground cost, solved by the transportation simplex with Bland's
/// anti-cycling rule. Returns `(cost, dual cost)`; the two agree at the
/// optimum.
pub fn hamming_w1(p: &[f64], q: &[f64]) -> Result<(f64, f64)> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
    }
    let d = p.len();
    if !d.is_power_of_two() {
        return Err(Error::InvalidParameter("need 2^n states".into()));
    }
    let n = d.trailing_zeros() as usize;
    if n > TRANSPORT_CAP {
        return Err(Error::DenseCapExceeded { requested: n, cap: TRANSPORT_CAP });
    }
    let cost = |i: usize, j: usize| (i ^ j).count_ones() as f64;
    let plan = transport_simplex(p, q, cost)?;
    let mut primal = 0.0;
    for &(i, j, f) in &plan.basis {
        primal += cost(i, j) * f;
    }
    let dual = plan
        .u
        .iter()
        .zip(p)
        .map(|(u, pi)| u * pi)
        .chain(plan.v.iter().zip(q).map(|(v, qj)| v * qj))
        .sum();
    Ok((primal, dual))
}

struct TransportSolution {
    basis: Vec<(usize, usize, f64)>,
    u: Vec<f64>,
    v: Vec<f64>,
}

/// Dense transportation simplex. Suitable for a few thousand variables.
fn transport_simplex(p: &[f64], q: &[f64], cost: impl Fn(usize, usize) -> f64) -> Result<TransportSolution> {
    let m = p.len();
    let n = q.len();
    // North-west corner initial basic feasible solution (kept at exactly
    // m + n - 1 cells, including degenerate zero-flow cells).
    let mut basis: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
    {
        let mut supply = p.to_vec();
        let mut demand = q.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        while basis.len() < m + n - 1 {
            let f = supply[i].min(demand[j]);
            basis.push((i, j, f));
            supply[i] -= f;
            demand[j] -= f;
            if i + 1 < m && (supply[i] <= demand[j] || j + 1 == n) {
                i += 1;
            } else if j + 1 < n {
                j += 1;
            } else {
                break;
            }
        }
    }

    let max_iter = 200_000;
    for _ in 0..max_iter {
        // Potentials from the basis tree.
        let (u, v) = potentials(m, n, &basis);
        // Entering cell: Bland's rule, first (row-major) negative reduced cost.
        let mut entering = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if basis.iter().any(|&(bi, bj, _)| bi == i && bj == j) {
                    continue;
                }
                if cost(i, j) - u[i] - v[j] < -1e-12 {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            return Ok(TransportSolution { basis, u, v });
        };
        // Unique cycle through the entering cell in the basis tree.
        let cycle = find_cycle(m, n, &basis, ei, ej)?;
        // Max flow shift: minimum over cells leaving (odd positions).
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &(bi, bj)) in cycle.iter().enumerate().skip(1) {
            if pos % 2 == 1 {
                let f = basis
                    .iter()
                    .find(|&&(x, y, _)| x == bi && y == bj)
                    .map(|&(_, _, f)| f)
                    .unwrap_or(0.0);
                // Bland-style tie-break: first minimal index leaves.
                if f < theta - 1e-15 {
                    theta = f;
                    leave = pos;
                }
            }
        }
        // Apply the shift.
        for (pos, &(bi, bj)) in cycle.iter().enumerate() {
            if pos == 0 {
                continue;
            }
            let delta = if pos % 2 == 1 { -theta } else { theta };
            if let Some(cell) = basis.iter_mut().find(|c| c.0 == bi && c.1 == bj) {
                cell.2 += delta;
            }
        }
        // Swap entering for leaving to keep exactly m + n - 1 basic cells.
        let (li, lj) = cycle[leave];
        basis.retain(|&(bi, bj, _)| !(bi == li && bj == lj));
        basis.push((ei, ej, theta));
    }
    Err(Error::NonConvergence { iterations: max_iter, objective: f64::NAN, grad_norm: f64::NAN })
}

/// Solve `u_i + v_j = c_ij` on the basis tree with `u_0 = 0`.
fn potentials(m: usize, n: usize, basis: &[(usize, usize, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut changed = true;
    while changed {
        changed = false;
        for &(i, j, _) in basis {
            let c = (i ^ j).count_ones() as f64;
            if u[i].is_finite() && v[j].is_nan() {
                v[j] = c - u[i];
                changed = true;
            } else if v[j].is_finite() && u[i].is_nan() {
                u[i] = c - v[j];
                changed = true;
            }
        }
    }
    // Disconnected components (possible under degeneracy): pin to zero.
    for x in u.iter_mut() {
        if x.is_nan() {
            *x = 0.0;
        }
    }
    for x in v.iter_mut() {
        if x.is_nan() {
            *x = 0.0;
        }
    }
    (u, v)
}

/// The alternating row/column cycle created by adding `(ei, ej)` to the tree.
fn find_cycle(m: usize, n: usize, basis: &[(usize, usize, f64)], ei: usize, ej: usize) -> Result<Vec<(usize, usize)>> {
    // Depth-first search alternating row moves and column moves over basic
    // cells, starting and ending at the entering cell.
    fn dfs(
        basis: &[(usize, usize, f64)],
        target_row: usize,
        cur: (usize, usize),
        row_move: bool,
        path: &mut Vec<(usize, usize)>,
    ) -> bool {
        if row_move {
            // Move along the current row to another basic cell.
            for &(i, j, _) in basis {
                if i == cur.0 && j != cur.1 && !path.contains(&(i, j)) {
                    path.push((i, j));
                    if dfs(basis, target_row, (i, j), false, path) {
                        return true;
                    }
                    path.pop();
                }
            }
            false
        } else {
            // Move along the current column; reaching the entering row
            // closes the cycle.
            for &(i, j, _) in basis {
                if j == cur.1 && i != cur.0 {
                    if i == target_row {
                        path.push((i, j));
                        return true;
                    }
                    if !path.contains(&(i, j)) {
                        path.push((i, j));
                        if dfs(basis, target_row, (i, j), true, path) {
                            return true;
                        }
                        path.pop();
                    }
                }
            }
            false
        }
    }
    let _ = (m, n);
    let mut path = vec![(ei, ej)];
    if dfs(basis, ei, (ei, ej), false, &mut path) {
        // Close the loop back to the entering cell's row: the path ends on a
        // basic cell in row ei; the cycle alternates / closes by convention.
        Ok(path)
    } else {
        Err(Error::InvalidParameter("transport basis lost tree structure".into()))
    }
}

/// Covariance decay curve `Cov(s_a, s_b)` against distance along with a
/// log-linear fit.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalDecayScan {
    pub points: Vec<(f64, f64)>,
    pub fit: crate::fit::DecayFit,
}

pub fn classical_decay_scan(h: &ClassicalHamiltonian, beta: f64, pairs: &[(usize, usize)]) -> Result<ClassicalDecayScan> {
    let gibbs = ClassicalGibbs::new(h, beta)?;
    let mut points = Vec::new();
    for &(a, b) in pairs {
        let dist = (a as f64 - b as f64).abs();
        let cov = gibbs.covariance(&[a], &[b]).abs();
        points.push((dist, cov));
    }
    let fit = crate::fit::fit_log_linear(&points, 1e-14);
    Ok(ClassicalDecayScan { points, fit })
}
