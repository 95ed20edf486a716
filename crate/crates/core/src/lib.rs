pub mod classical;
pub mod decomposition;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod matrix;
pub mod projectors;
pub mod random;
pub mod tolerance;
pub mod verifier;
pub mod weighted;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, Matrix, Scalar};
pub use tolerance::ToleranceModel;
