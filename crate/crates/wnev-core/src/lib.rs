//! Value distribution of meromorphic functions under the Wilson
//! divided-difference operator: special functions, lattice shifts,
//! Nevanlinna functionals, Wilson-type counting, orthogonal polynomials,
//! series expansions, and difference-equation checks.

pub mod cli;
pub mod counting;
pub mod divisor;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod logval;
pub mod model;
pub mod nevanlinna;
pub mod poly;
pub mod series;
pub mod equations;
pub mod specfun;

pub use divisor::{Divisor, DivisorKind, DivisorStream};
pub use error::{Error, Result};
pub use lattice::{sqrt_with_cut, LatticeCoord, DEFAULT_SHIFT};
pub use logval::LogVal;
pub use model::{MeromorphicModel, model_by_label};
