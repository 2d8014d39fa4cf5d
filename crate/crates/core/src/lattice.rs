//! Lattice geometry, parameterized interaction terms, and Hamiltonian
//! assembly.
//!
//! A model is a family `x -> H(x) + H0` where `H(x) = sum_j h_j(x_j)`, each
//! interaction `h_j(x_j) = sum_l x_{j,l} h_{j,l}` is a linear combination of
//! Pauli strings supported on a ball around an anchor site, and `x` lives in
//! a unit box around a configurable center.  Parameters are flattened
//! row-major as `(term, component)` pairs.

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Default cap on dense simulation size, in qubits.
pub const DENSE_CAP: usize = 12;

/// Lattice metric used for balls and distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Chebyshev / sup-norm on coordinates: balls are hypercubes.
    #[default]
    Chebyshev,
    /// Taxicab metric.
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Finite `D`-dimensional lattice.
///
/// The canonical construction is the cube `[-L, L]^D` with `(2L+1)^D` sites;
/// arbitrary per-axis extents are also supported so that even side lengths
/// can be used.  Site indices enumerate coordinates row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    dims: Vec<usize>,
    origin: Vec<i64>,
    pub metric: Metric,
    pub boundary: Boundary,
}

impl LatticeSpec {
    /// Cube `[-L, L]^D`.
    pub fn cube(dimension: usize, half_width: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let side = 2 * half_width + 1;
        Ok(Self {
            dims: vec![side; dimension],
            origin: vec![-(half_width as i64); dimension],
            metric: Metric::default(),
            boundary: Boundary::default(),
        })
    }

    /// 1D chain of `n` sites with coordinates `0..n`.
    pub fn chain(n: usize) -> Result<Self> {
        Self::grid(&[n])
    }

    /// General grid with the given per-axis extents, coordinates from 0.
    pub fn grid(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter("extents must be positive".into()));
        }
        Ok(Self {
            dims: dims.to_vec(),
            origin: vec![0; dims.len()],
            metric: Metric::default(),
            boundary: Boundary::default(),
        })
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    /// Total number of sites.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of a site index.
    pub fn coord(&self, site: usize) -> Result<Vec<i64>> {
        if site >= self.len() {
            return Err(Error::SiteOutOfLattice { site, n: self.len() });
        }
        let mut rem = site;
        let mut c = vec![0i64; self.dims.len()];
        for ax in (0..self.dims.len()).rev() {
            c[ax] = self.origin[ax] + (rem % self.dims[ax]) as i64;
            rem /= self.dims[ax];
        }
        Ok(c)
    }

    /// Site index of a coordinate.
    pub fn site(&self, coord: &[i64]) -> Result<usize> {
        if coord.len() != self.dims.len() {
            return Err(Error::InvalidParameter(format!(
                "coordinate has {} axes, lattice has {}",
                coord.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0usize;
        for ax in 0..self.dims.len() {
            let off = coord[ax] - self.origin[ax];
            if off < 0 || off >= self.dims[ax] as i64 {
                return Err(Error::RegionOutOfLattice);
            }
            idx = idx * self.dims[ax] + off as usize;
        }
        Ok(idx)
    }

    fn axis_delta(&self, ax: usize, a: i64, b: i64) -> u64 {
        let raw = (a - b).unsigned_abs();
        match self.boundary {
            Boundary::Open => raw,
            Boundary::Periodic => {
                let side = self.dims[ax] as u64;
                raw.min(side - raw % side)
            }
        }
    }

    /// Distance between two sites under the configured metric and boundary.
    pub fn dist(&self, a: usize, b: usize) -> Result<u64> {
        let ca = self.coord(a)?;
        let cb = self.coord(b)?;
        let deltas = (0..self.dims.len()).map(|ax| self.axis_delta(ax, ca[ax], cb[ax]));
        Ok(match self.metric {
            Metric::Chebyshev => deltas.max().unwrap_or(0),
            Metric::L1 => deltas.sum(),
        })
    }

    /// Distance from a site to a region (minimum over the region).
    pub fn dist_to_region(&self, site: usize, region: &[usize]) -> Result<u64> {
        region
            .iter()
            .map(|&s| self.dist(site, s))
            .try_fold(u64::MAX, |acc, d| Ok(acc.min(d?)))
    }

    /// Distance between two regions.
    pub fn dist_regions(&self, a: &[usize], b: &[usize]) -> Result<u64> {
        a.iter()
            .map(|&s| self.dist_to_region(s, b))
            .try_fold(u64::MAX, |acc, d| Ok(acc.min(d?)))
    }

    /// All sites within distance `r` of the region `S` (the enlargement
    /// `S(r)`), sorted by site index.
    pub fn enlarge_region(&self, region: &[usize], r: u64) -> Result<Vec<usize>> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        for &s in region {
            if s >= self.len() {
                return Err(Error::RegionOutOfLattice);
            }
        }
        let mut out = Vec::new();
        for site in 0..self.len() {
            if self.dist_to_region(site, region)? <= r {
                out.push(site);
            }
        }
        Ok(out)
    }

    /// Ball of radius `r` around a single site.
    pub fn ball(&self, site: usize, r: u64) -> Result<Vec<usize>> {
        self.enlarge_region(&[site], r)
    }
}

/// One parameterized interaction: `h_j(x_j) = sum_l x_{j,l} h_{j,l}`.
///
/// Every basis operator is a Pauli string (operator norm exactly 1) supported
/// inside the ball `A_j` of radius `radius` around the anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub anchor: usize,
    pub radius: u64,
    pub support: Vec<usize>,
    pub basis: Vec<PauliString>,
}

impl InteractionTerm {
    pub fn new(lattice: &LatticeSpec, anchor: usize, radius: u64, basis: Vec<PauliString>) -> Result<Self> {
        let support = lattice.ball(anchor, radius)?;
        if basis.is_empty() {
            return Err(Error::InvalidParameter("interaction needs at least one basis operator".into()));
        }
        for b in &basis {
            for s in b.support() {
                if !support.contains(&s) {
                    return Err(Error::SupportViolation);
                }
            }
        }
        Ok(Self { anchor, radius, support, basis })
    }

    /// Number of components `l` in this term.
    pub fn arity(&self) -> usize {
        self.basis.len()
    }
}

/// A point of parameter space together with the box center it belongs to.
///
/// The box is `center + [-1, 1]^m` componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub center: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        if values.len() != center.len() {
            return Err(Error::DimensionMismatch { left: values.len(), right: center.len() });
        }
        let v = Self { values, center };
        v.check_box()?;
        Ok(v)
    }

    /// Centered at zero.
    pub fn centered(values: Vec<f64>) -> Result<Self> {
        let center = vec![0.0; values.len()];
        Self::new(values, center)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_box(&self) -> Result<()> {
        for (v, c) in self.values.iter().zip(&self.center) {
            if (v - c).abs() > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {v} outside box [{:.3}, {:.3}]",
                    c - 1.0,
                    c + 1.0
                )));
            }
        }
        Ok(())
    }
}

/// The family `x -> H(x) + H0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianFamily {
    pub lattice: LatticeSpec,
    pub terms: Vec<InteractionTerm>,
    /// Components per term (uniform across terms).
    pub ell: usize,
    /// Uniform bound on basis-operator norms; Pauli strings give exactly 1.
    pub coupling_bound: f64,
    /// Box center `x0`, one entry per parameter coordinate.
    pub center: Vec<f64>,
    /// Optional fixed shift `H0`.
    pub shift: Option<PauliSum>,
    /// Maximum locality radius over terms.
    pub locality_radius: u64,
}

impl HamiltonianFamily {
    pub fn new(lattice: LatticeSpec, terms: Vec<InteractionTerm>, center: Option<Vec<f64>>, shift: Option<PauliSum>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("family needs at least one term".into()));
        }
        let ell = terms[0].arity();
        for t in &terms {
            if t.arity() != ell {
                return Err(Error::InvalidParameter("all terms must have the same number of components".into()));
            }
            if t.anchor >= lattice.len() {
                return Err(Error::SiteOutOfLattice { site: t.anchor, n: lattice.len() });
            }
        }
        let m = terms.len() * ell;
        let center = center.unwrap_or_else(|| vec![0.0; m]);
        if center.len() != m {
            return Err(Error::DimensionMismatch { left: center.len(), right: m });
        }
        if let Some(h0) = &shift {
            for (_, p) in &h0.terms {
                if let Some(s) = p.max_site() {
                    if s >= lattice.len() {
                        return Err(Error::SiteOutOfLattice { site: s, n: lattice.len() });
                    }
                }
            }
        }
        let locality_radius = terms.iter().map(|t| t.radius).max().unwrap_or(0);
        Ok(Self {
            lattice,
            terms,
            ell,
            coupling_bound: 1.0,
            center,
            shift,
            locality_radius,
        })
    }

    /// Number of qubits.
    pub fn n_sites(&self) -> usize {
        self.lattice.len()
    }

    /// Total number of parameter coordinates `m = terms * ell`.
    pub fn n_params(&self) -> usize {
        self.terms.len() * self.ell
    }

    /// Split a flat coordinate into `(term, component)`.
    pub fn coord_split(&self, k: usize) -> (usize, usize) {
        (k / self.ell, k % self.ell)
    }

    /// Basis operator `h_{j,l}` for flat coordinate `k`.
    pub fn basis_op(&self, k: usize) -> &PauliString {
        let (j, l) = self.coord_split(k);
        &self.terms[j].basis[l]
    }

    /// The zero of the box (its center) as a ParamVector.
    pub fn center_point(&self) -> ParamVector {
        ParamVector { values: self.center.clone(), center: self.center.clone() }
    }

    /// Wrap raw values into a checked ParamVector for this family.
    pub fn param(&self, values: Vec<f64>) -> Result<ParamVector> {
        if values.len() != self.n_params() {
            return Err(Error::DimensionMismatch { left: values.len(), right: self.n_params() });
        }
        ParamVector::new(values, self.center.clone())
    }

    /// Coordinate set of terms whose support intersects `S(r)`, as flat
    /// parameter indices.
    pub fn coords_near(&self, region: &[usize], r: u64) -> Result<Vec<usize>> {
        let enlarged: BTreeSet<usize> = self.lattice.enlarge_region(region, r)?.into_iter().collect();
        let mut out = Vec::new();
        for (j, t) in self.terms.iter().enumerate() {
            if t.support.iter().any(|s| enlarged.contains(s)) {
                for l in 0..self.ell {
                    out.push(j * self.ell + l);
                }
            }
        }
        Ok(out)
    }

    /// Restriction with re-embedding: keep `x` on coordinates of terms near
    /// `S(r)`, replace the rest by the box center.
    pub fn restrict_params(&self, x: &ParamVector, region: &[usize], r: u64) -> Result<ParamVector> {
        self.restrict_params_to(x, region, r, &self.center)
    }

    /// Restriction re-embedded onto an arbitrary reference configuration.
    pub fn restrict_params_to(&self, x: &ParamVector, region: &[usize], r: u64, reference: &[f64]) -> Result<ParamVector> {
        if x.len() != self.n_params() || reference.len() != self.n_params() {
            return Err(Error::DimensionMismatch { left: x.len(), right: self.n_params() });
        }
        let near = self.coords_near(region, r)?;
        let mut values = reference.to_vec();
        for k in near {
            values[k] = x.values[k];
        }
        ParamVector::new(values, x.center.clone())
    }

    fn check_cap(&self) -> Result<()> {
        let n = self.n_sites();
        if n > DENSE_CAP {
            return Err(Error::DenseCapExceeded { requested: n, cap: DENSE_CAP });
        }
        Ok(())
    }

    /// Dense `H(x) + H0` on the full register.
    pub fn assemble(&self, x: &ParamVector) -> Result<Array2<C64>> {
        self.assemble_terms(x, None)
    }

    /// Dense `H_B(x) + H0|_B` on the full register: only terms with
    /// `A_j` contained in `region` (and shift strings supported in it) enter.
    pub fn assemble_in(&self, x: &ParamVector, region: &[usize]) -> Result<Array2<C64>> {
        for &s in region {
            if s >= self.n_sites() {
                return Err(Error::RegionOutOfLattice);
            }
        }
        self.assemble_terms(x, Some(region))
    }

    fn assemble_terms(&self, x: &ParamVector, region: Option<&[usize]>) -> Result<Array2<C64>> {
        self.check_cap()?;
        if x.len() != self.n_params() {
            return Err(Error::DimensionMismatch { left: x.len(), right: self.n_params() });
        }
        let n = self.n_sites();
        let d = 1usize << n;
        let mut h = Array2::<C64>::zeros((d, d));
        for (j, t) in self.terms.iter().enumerate() {
            if let Some(reg) = region {
                if !t.support.iter().all(|s| reg.contains(s)) {
                    continue;
                }
            }
            for (l, b) in t.basis.iter().enumerate() {
                let c = x.values[j * self.ell + l];
                if c == 0.0 {
                    continue;
                }
                for col in 0..d {
                    let (row, phase) = b.apply_basis(col, n);
                    h[(row, col)] += phase * c;
                }
            }
        }
        if let Some(h0) = &self.shift {
            let restricted;
            let h0 = match region {
                Some(reg) => {
                    restricted = h0.restricted_to(reg);
                    &restricted
                }
                None => h0,
            };
            for (c, p) in &h0.terms {
                for col in 0..d {
                    let (row, phase) = p.apply_basis(col, n);
                    h[(row, col)] += phase * *c;
                }
            }
        }
        Ok(h)
    }

    /// Dense Hamiltonian of the sub-system `region` on its own register:
    /// terms with support in `region` are re-indexed to the positions of
    /// their sites inside `region`.
    pub fn assemble_on_subsystem(&self, x: &ParamVector, region: &[usize]) -> Result<Array2<C64>> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if region.len() > DENSE_CAP {
            return Err(Error::DenseCapExceeded { requested: region.len(), cap: DENSE_CAP });
        }
        if x.len() != self.n_params() {
            return Err(Error::DimensionMismatch { left: x.len(), right: self.n_params() });
        }
        let nl = region.len();
        let d = 1usize << nl;
        let mut h = Array2::<C64>::zeros((d, d));
        let mut add = |string: &PauliString, c: f64| -> Result<()> {
            if c == 0.0 {
                return Ok(());
            }
            let local = string.dense_on(region)?;
            h.scaled_add(C64::new(c, 0.0), &local);
            Ok(())
        };
        for (j, t) in self.terms.iter().enumerate() {
            if !t.support.iter().all(|s| region.contains(s)) {
                continue;
            }
            for (l, b) in t.basis.iter().enumerate() {
                add(b, x.values[j * self.ell + l])?;
            }
        }
        if let Some(h0) = &self.shift {
            for (c, p) in h0.restricted_to(region).terms {
                add(&p, c)?;
            }
        }
        let _ = nl;
        Ok(h)
    }
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

/// On-disk model description (TOML).  See `docs/model-format.md`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub dimension: usize,
    #[serde(default)]
    pub half_width: Option<usize>,
    /// Alternative to `half_width`: explicit per-axis extents.
    #[serde(default)]
    pub extent: Option<Vec<usize>>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub metric: Metric,
    pub terms: Vec<TermFile>,
    /// Box center; scalar broadcast or one entry per coordinate.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub shift_h0: Option<Vec<ShiftTermFile>>,
    /// Marks a model whose Hamiltonian is diagonal and intended for the
    /// classical spin machinery.
    #[serde(default)]
    pub classical: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermFile {
    /// Anchor coordinate (length = dimension).
    pub anchor: Vec<i64>,
    pub radius: u64,
    /// Basis operators. Each entry is either a bare letter string laid out
    /// along the last axis starting at the anchor ("ZZ" = Z at anchor, Z at
    /// anchor + e_D), or an explicit placement.
    pub paulis: Vec<PauliFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PauliFile {
    Letters(String),
    Placed {
        ops: String,
        /// Per-letter offsets from the anchor, length = dimension each.
        offsets: Vec<Vec<i64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftTermFile {
    pub coeff: f64,
    pub ops: String,
    /// Absolute coordinates, one per letter.
    pub sites: Vec<Vec<i64>>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        let spec = match (&self.extent, self.half_width) {
            (Some(ext), _) => {
                if ext.len() != self.dimension {
                    return Err(Error::ModelFile("extent length must equal dimension".into()));
                }
                LatticeSpec::grid(ext)?
            }
            (None, Some(l)) => LatticeSpec::cube(self.dimension, l)?,
            (None, None) => return Err(Error::ModelFile("one of half_width or extent is required".into())),
        };
        Ok(spec.with_metric(self.metric).with_boundary(self.boundary))
    }

    pub fn family(&self) -> Result<HamiltonianFamily> {
        let lattice = self.lattice()?;
        let mut terms = Vec::new();
        for tf in &self.terms {
            let anchor = lattice.site(&tf.anchor)?;
            let mut basis = Vec::new();
            for pf in &tf.paulis {
                basis.push(pauli_from_file(&lattice, &tf.anchor, pf)?);
            }
            terms.push(InteractionTerm::new(&lattice, anchor, tf.radius, basis)?);
        }
        let m = terms.len() * terms.first().map(|t| t.arity()).unwrap_or(0);
        let center = match &self.center {
            None => None,
            Some(c) if c.len() == 1 => Some(vec![c[0]; m]),
            Some(c) => Some(c.clone()),
        };
        let shift = match &self.shift_h0 {
            None => None,
            Some(entries) => {
                let mut sum = Vec::new();
                for e in entries {
                    if e.sites.len() != e.ops.chars().count() {
                        return Err(Error::ModelFile("shift term needs one site per letter".into()));
                    }
                    let mut ops = Vec::new();
                    for (c, coord) in e.ops.chars().zip(&e.sites) {
                        ops.push((lattice.site(coord)?, crate::pauli::Pauli::from_char(c)?));
                    }
                    sum.push((e.coeff, PauliString::new(ops)?));
                }
                Some(PauliSum::new(sum))
            }
        };
        HamiltonianFamily::new(lattice, terms, center, shift)
    }
}

fn pauli_from_file(lattice: &LatticeSpec, anchor: &[i64], pf: &PauliFile) -> Result<PauliString> {
    match pf {
        PauliFile::Letters(s) => {
            let mut ops = Vec::new();
            let axis = lattice.dimension() - 1;
            for (k, c) in s.chars().enumerate() {
                let mut coord = anchor.to_vec();
                coord[axis] += k as i64;
                ops.push((lattice.site(&coord)?, crate::pauli::Pauli::from_char(c)?));
            }
            PauliString::new(ops)
        }
        PauliFile::Placed { ops, offsets } => {
            if offsets.len() != ops.chars().count() {
                return Err(Error::ModelFile("need one offset per letter".into()));
            }
            let mut v = Vec::new();
            for (c, off) in ops.chars().zip(offsets) {
                let coord: Vec<i64> = anchor.iter().zip(off).map(|(a, o)| a + o).collect();
                v.push((lattice.site(&coord)?, crate::pauli::Pauli::from_char(c)?));
            }
            PauliString::new(v)
        }
    }
}

// ---------------------------------------------------------------------------
// Ready-made families used across experiments and tests
// ---------------------------------------------------------------------------

/// Single-site field model: `H(x) = sum_i x_i P_i` with one letter per site.
pub fn field_family(lattice: LatticeSpec, letter: crate::pauli::Pauli) -> Result<HamiltonianFamily> {
    let mut terms = Vec::new();
    for s in 0..lattice.len() {
        terms.push(InteractionTerm::new(
            &lattice,
            s,
            0,
            vec![PauliString::new([(s, letter)])?],
        )?);
    }
    HamiltonianFamily::new(lattice, terms, None, None)
}

/// Nearest-neighbour chain of two-site strings (e.g. "ZZ") anchored at each
/// bond, one parameter per bond.
pub fn bond_family(lattice: LatticeSpec, letters: &str) -> Result<HamiltonianFamily> {
    let n = lattice.len();
    if lattice.dimension() != 1 {
        return Err(Error::InvalidParameter("bond_family expects a 1D chain".into()));
    }
    let wrap = matches!(lattice.boundary, Boundary::Periodic);
    let bonds = if wrap { n } else { n - 1 };
    let mut terms = Vec::new();
    for b in 0..bonds {
        let sites = [b, (b + 1) % n];
        let mut ops = Vec::new();
        for (c, &s) in letters.chars().zip(sites.iter()) {
            ops.push((s, crate::pauli::Pauli::from_char(c)?));
        }
        terms.push(InteractionTerm::new(&lattice, b, 1, vec![PauliString::new(ops)?])?);
    }
    HamiltonianFamily::new(lattice, terms, None, None)
}

/// Ising chain with both transverse and longitudinal fields: per-bond `ZZ`
/// couplings plus per-site `X` and `Z` fields, one parameter each.  The `Z`
/// fields break the global spin-flip symmetry, so single-site `Z`
/// expectations carry signal.
pub fn mixed_field_ising_family(lattice: LatticeSpec) -> Result<HamiltonianFamily> {
    let n = lattice.len();
    if lattice.dimension() != 1 {
        return Err(Error::InvalidParameter("mixed_field_ising_family expects a 1D chain".into()));
    }
    let wrap = matches!(lattice.boundary, Boundary::Periodic);
    let bonds = if wrap { n } else { n - 1 };
    let mut terms = Vec::new();
    for b in 0..bonds {
        let pair = PauliString::new([(b, crate::pauli::Pauli::Z), ((b + 1) % n, crate::pauli::Pauli::Z)])?;
        terms.push(InteractionTerm::new(&lattice, b, 1, vec![pair])?);
    }
    for s in 0..n {
        let x = PauliString::new([(s, crate::pauli::Pauli::X)])?;
        let z = PauliString::new([(s, crate::pauli::Pauli::Z)])?;
        terms.push(InteractionTerm::new(&lattice, s, 0, vec![x])?);
        terms.push(InteractionTerm::new(&lattice, s, 0, vec![z])?);
    }
    HamiltonianFamily::new(lattice, terms, None, None)
}

/// Transverse-field Ising chain: per-bond `ZZ` couplings and per-site `X`
/// fields, each with its own parameter.
pub fn tfim_family(lattice: LatticeSpec) -> Result<HamiltonianFamily> {
    let n = lattice.len();
    if lattice.dimension() != 1 {
        return Err(Error::InvalidParameter("tfim_family expects a 1D chain".into()));
    }
    let wrap = matches!(lattice.boundary, Boundary::Periodic);
    let bonds = if wrap { n } else { n - 1 };
    let mut terms = Vec::new();
    for b in 0..bonds {
        let pair = PauliString::new([(b, crate::pauli::Pauli::Z), ((b + 1) % n, crate::pauli::Pauli::Z)])?;
        terms.push(InteractionTerm::new(&lattice, b, 1, vec![pair])?);
    }
    for s in 0..n {
        let x = PauliString::new([(s, crate::pauli::Pauli::X)])?;
        terms.push(InteractionTerm::new(&lattice, s, 0, vec![x])?);
    }
    HamiltonianFamily::new(lattice, terms, None, None)
}
