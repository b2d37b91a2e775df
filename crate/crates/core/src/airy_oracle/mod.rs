//! Airy function and Airy-kernel Fredholm determinant, used as an independent ground truth.

pub mod airy;
pub mod fredholm;

pub use airy::{airy_ai, AiryValue};
pub use fredholm::{fredholm_det_airy, FredholmResult};
