//! Linear quantum stochastic systems: the `(S, K, R)` and `(A, B, C, D)`
//! parameterizations, physical realizability, transfer functions, and the
//! pure cascade realization pipeline.

mod cascade;
mod model;
mod transfer;

pub use cascade::{
    cascade_realize, series_product, verify_cascade, verify_transfer_equivalence, CascadeOptions,
    CascadeRealization, FrequencyCheck, OneDofSystem, VerificationReport,
};
pub use model::{
    check_physical_realizability, quadrature_to_sdh, sdh_to_quadrature, transform, QuadSystem,
    RealizabilityReport, SdhSystem, UNITARY_TOL,
};
pub use transfer::{
    default_frequency_grid, relative_deviation, spectral_radius, transfer_function,
};
