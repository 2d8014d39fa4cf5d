//! Pauli strings on an `n`-qubit register.
//!
//! A Pauli string is stored sparsely as sorted `(site, letter)` pairs.  Since
//! every Pauli string acts as a signed permutation of computational basis
//! states, dense embeddings, expectation values and products can all be
//! evaluated without materializing intermediate tensor factors.
//!
//! Site `s` of an `n`-site register corresponds to bit `n-1-s` of the basis
//! index, i.e. site 0 is the leftmost tensor factor.

use crate::error::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            _ => Err(Error::InvalidParameter(format!("unknown Pauli letter '{c}'"))),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of Pauli letters on named sites; identity elsewhere.
///
/// Operator norm is exactly 1 (unless the string is empty, in which case it
/// is the identity, also of norm 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    /// Build from `(site, letter)` pairs; identities are dropped, sites sorted.
    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut v: Vec<(usize, Pauli)> = ops.into_iter().filter(|(_, p)| *p != Pauli::I).collect();
        v.sort_by_key(|(s, _)| *s);
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate site {} in Pauli string",
                    w[0].0
                )));
            }
        }
        Ok(Self { ops: v })
    }

    /// The identity string.
    pub fn identity() -> Self {
        Self { ops: Vec::new() }
    }

    /// Parse letters applied to consecutive sites starting at `start`.
    pub fn from_letters(start: usize, letters: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for (k, c) in letters.chars().enumerate() {
            ops.push((start + k, Pauli::from_char(c)?));
        }
        Self::new(ops)
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    /// Sites the string acts on non-trivially.
    pub fn support(&self) -> Vec<usize> {
        self.ops.iter().map(|(s, _)| *s).collect()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    /// Largest site index touched, if any.
    pub fn max_site(&self) -> Option<usize> {
        self.ops.last().map(|(s, _)| *s)
    }

    /// Action on a computational basis state: `P|i> = phase * |j>`.
    ///
    /// Runs in O(weight).
    pub fn apply_basis(&self, index: usize, n: usize) -> (usize, C64) {
        let mut j = index;
        let mut phase = C64::new(1.0, 0.0);
        for &(site, p) in &self.ops {
            let bit_pos = n - 1 - site;
            let bit = (index >> bit_pos) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => j ^= 1 << bit_pos,
                Pauli::Y => {
                    j ^= 1 << bit_pos;
                    // Y|0> = i|1>, Y|1> = -i|0>
                    phase *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (j, phase)
    }

    /// Dense matrix on `n` qubits.
    pub fn dense(&self, n: usize) -> Array2<C64> {
        let d = 1usize << n;
        let mut m = Array2::<C64>::zeros((d, d));
        for col in 0..d {
            let (row, phase) = self.apply_basis(col, n);
            m[(row, col)] = phase;
        }
        m
    }

    /// Dense matrix on the register formed by `sites` (in the given order),
    /// i.e. the string re-indexed to that sub-register. All support sites
    /// must appear in `sites`.
    pub fn dense_on(&self, sites: &[usize]) -> Result<Array2<C64>> {
        let mut ops = Vec::with_capacity(self.ops.len());
        for &(s, p) in &self.ops {
            let local = sites
                .iter()
                .position(|&t| t == s)
                .ok_or(Error::SupportViolation)?;
            ops.push((local, p));
        }
        Ok(Self::new(ops)?.dense(sites.len()))
    }

    /// `tr[P * rho]` in O(d * weight) for a dense `rho`.
    pub fn expectation(&self, rho: &Array2<C64>, n: usize) -> C64 {
        let d = 1usize << n;
        debug_assert_eq!(rho.nrows(), d);
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..d {
            let (row, phase) = self.apply_basis(col, n);
            acc += phase * rho[(col, row)];
        }
        acc
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (k, (s, p)) in self.ops.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.to_char(), s)?;
        }
        Ok(())
    }
}

/// A real linear combination of Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Self {
        Self { terms }
    }

    pub fn dense(&self, n: usize) -> Array2<C64> {
        let d = 1usize << n;
        let mut m = Array2::<C64>::zeros((d, d));
        for (c, p) in &self.terms {
            for col in 0..d {
                let (row, phase) = p.apply_basis(col, n);
                m[(row, col)] += phase * *c;
            }
        }
        m
    }

    /// Keep only terms fully supported inside `region`.
    pub fn restricted_to(&self, region: &[usize]) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, p)| p.support().iter().all(|s| region.contains(s)))
            .cloned()
            .collect();
        Self { terms }
    }

    pub fn expectation(&self, rho: &Array2<C64>, n: usize) -> C64 {
        self.terms
            .iter()
            .map(|(c, p)| p.expectation(rho, n) * *c)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_qubit_matrices() {
        let z = PauliString::from_letters(0, "Z").unwrap().dense(1);
        assert_eq!(z[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], C64::new(-1.0, 0.0));
        let y = PauliString::from_letters(0, "Y").unwrap().dense(1);
        assert_eq!(y[(1, 0)], C64::new(0.0, 1.0));
        assert_eq!(y[(0, 1)], C64::new(0.0, -1.0));
    }

    #[test]
    fn two_site_zz_diagonal() {
        let zz = PauliString::from_letters(0, "ZZ").unwrap().dense(2);
        let want = [1.0, -1.0, -1.0, 1.0];
        for k in 0..4 {
            assert_abs_diff_eq!(zz[(k, k)].re, want[k], epsilon = 0.0);
        }
    }

    #[test]
    fn site_zero_is_leftmost_factor() {
        // X on site 0 of two qubits flips the high bit.
        let x0 = PauliString::from_letters(0, "X").unwrap().dense(2);
        assert_eq!(x0[(2, 0)], C64::new(1.0, 0.0));
        assert_eq!(x0[(0, 2)], C64::new(1.0, 0.0));
    }

    #[test]
    fn expectation_matches_dense_trace() {
        let n = 3;
        let p = PauliString::new([(0, Pauli::X), (2, Pauli::Z)]).unwrap();
        let d = 1 << n;
        let mut rho = Array2::<C64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                rho[(i, j)] = C64::new((i + 2 * j) as f64, (i as f64) - (j as f64));
            }
        }
        let dense = p.dense(n);
        let direct = dense.dot(&rho).diag().sum();
        assert_abs_diff_eq!(p.expectation(&rho, n).re, direct.re, epsilon = 1e-12);
        assert_abs_diff_eq!(p.expectation(&rho, n).im, direct.im, epsilon = 1e-12);
    }

    #[test]
    fn strings_square_to_identity() {
        let n = 2;
        let p = PauliString::new([(0, Pauli::Y), (1, Pauli::X)]).unwrap();
        let m = p.dense(n);
        let sq = m.dot(&m);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(sq[(i, j)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(sq[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }
}
