//! Finite-N engine: orthonormal polynomials on `(-∞, y]`, the truncated partition function,
//! the gap probability, identity checks and a Monte-Carlo sampler.

mod gap;
mod gue;
mod identities;
mod lax;
mod potential;
mod scaling;
mod stieltjes;
mod suite;

pub use gap::{
    direct_quadrature_oracle, direct_quadrature_oracle_with_tol, gap_cdf_finite_n, gap_probability_finite_n,
    gap_probability_finite_n_with, gap_ratio, GapValue,
};
pub use gue::{count_below, gue_sample_maxeig, largest_eigenvalue, EmpiricalCdf, MAX_N, MAX_SAMPLES};
pub use identities::{verify_recurrence_identities, IdentityReport, IdentityResidual};
pub use lax::{build_lax_matrices_and_check, h_matrix, jacobi_matrix, p_matrix, v_prime_of, BandedMatrix, LaxReport};
pub use potential::Potential;
pub use scaling::ScalingMap;
pub use stieltjes::{gram_tolerance, stieltjes_recurrence, stieltjes_with_derivative, OPSystem, DEFAULT_PRECISION_BITS};
pub use suite::{gaussian_suite, SuiteCheck};
