//! Optimal unbiased estimation of an observable's ensemble average from `N`
//! identically prepared copies.
//!
//! The toolkit builds the spectral measurement of `Θ = (1/N) Σ_k A^(k)` on
//! the joint space, checks it against repeated single-copy measurement with
//! averaging, and provides the supporting machinery: POVM validation,
//! Born-rule probabilities and moments, seeded sampling, permutation
//! twirling, reconstruction of permutation-invariant operators from product
//! states, and a generator of competing unbiased POVMs.
//!
//! All numerical types are generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the double-precision instantiation used by the
//! CLI and by the default tolerances.

pub mod adversary;
pub mod error;
pub mod estimators;
pub mod io;
pub mod lemma;
pub mod linops;
pub mod povm;
pub mod presets;
pub mod random;
pub mod report;
pub mod scalar;
pub mod symspace;

pub use error::{Error, Result};
pub use linops::{ComplexMatrix, DensityMatrix, Eigen, HermitianOperator};
pub use povm::{OutcomeDistribution, Povm};
pub use scalar::{Real, C};
pub use symspace::{CopySpace, PermutationIndex};

pub type Complex64 = C<f64>;
pub type Matrix64 = ComplexMatrix<f64>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type Hermitian64 = HermitianOperator<f64>;
pub type Hermitian32 = HermitianOperator<f32>;
pub type Density64 = DensityMatrix<f64>;
pub type Density32 = DensityMatrix<f32>;
pub type Povm64 = Povm<f64>;
pub type Distribution64 = OutcomeDistribution<f64>;
