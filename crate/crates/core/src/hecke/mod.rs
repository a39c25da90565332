//! Hecke structure of `M_k(Γ₀(4))` and the eigenform decomposition of `θ^{2k}`.

mod decompose;
mod eigen;
pub mod exact;
pub mod numeric;
pub mod poly;
mod space;

pub use decompose::{
    decompose, trace_expected, trace_series_side, verify_positivity, verify_trace_identity,
    Component, DecomposeOptions, DecompositionReport, DeligneCheck, PositivityReport,
    TraceIdentityReport,
};
pub use eigen::{level_one_eigenforms, split_eigenspaces, Eigenspace};
pub use space::{
    build_space, cusp_space, default_truncation, eisenstein_fit, expected_a1, theta_power_series,
    CuspSpace, EisensteinFit, SpaceBasis,
};
