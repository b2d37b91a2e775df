//! Gap probabilities at multicritical spectral edges of Hermitian matrix models.

pub mod diffpoly;
pub mod error;
pub mod lenard;

pub use error::{Error, Result};
pub mod airy_oracle;
pub mod linalg;
pub mod quadrature;
pub mod numeric;
pub mod taylor;
pub mod bvp;
pub mod painleve;
pub mod backlund;
pub mod finite_n;
