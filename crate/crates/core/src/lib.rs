//! Numerical laboratory for thermal states of parameterized spin systems at
//! desk scale: exact dense simulation of small qubit registers and exhaustive
//! classical spin models.
//!
//! The crate provides
//! - lattice models with linearly parameterized local interactions and dense
//!   Hamiltonian assembly ([`lattice`]),
//! - Gibbs/ground states, entropic functionals and perturbation inequalities
//!   ([`operators`]),
//! - the thermal-derivative kernel (belief propagation), locality and
//!   light-cone discrepancy scans ([`bp`]),
//! - certified two-sided bounds on the transport (Wasserstein-1) distance
//!   with Lipschitz witnesses ([`wasserstein`]),
//! - randomized single-qubit measurement shadows robust to non-identical
//!   copies ([`shadows`]),
//! - a sample-based learner for local observables across a parameterized
//!   phase ([`learner`]),
//! - max-entropy parameter recovery, recovery maps, and Markov/clustering
//!   scans ([`maxent`]),
//! - exhaustive classical Gibbs distributions with an exact Hamming-metric
//!   transport oracle ([`classical`]).
//!
//! All randomness is counter-seeded ([`rng`]) and all parallel loops reduce
//! deterministically ([`parallel`]), so outputs are bit-identical for a given
//! seed regardless of thread count.

pub mod bp;
pub mod classical;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod learner;
pub mod linalg;
pub mod maxent;
pub mod operators;
pub mod parallel;
pub mod pauli;
pub mod rng;
pub mod shadows;
pub mod wasserstein;

pub use error::{Error, Result};
