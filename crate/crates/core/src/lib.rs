//! Exact sums-of-squares counts, the singular series, the eigenform
//! decomposition of `θ^{2k}` on `Γ₀(4)`, and the explicit analytic bounds
//! certifying positivity of its newform coefficients.

pub mod certificate;
pub mod cli;
pub mod error;
pub mod hecke;
pub mod qseries;
pub mod repcount;
pub mod singular;
pub mod special;

pub use error::{Error, Result};
pub use qseries::QSeries;
pub use special::BigFloat;
