//! Driven-transition analysis: Bessel evaluation, the closed-form
//! two-level response, projected few-level dynamics with its overlap
//! floor, and the end-to-end excitation experiment.

pub mod bessel;
pub mod excite;
pub mod fewlevel;
pub mod floquet;

pub use bessel::{bessel_j, bessel_j_capped, truncation_order, DEFAULT_ORDER_CAP};
pub use excite::{
    compose_total_error, excite_wavepacket, ComposedBound, ExcitationReport, ExciteOptions,
    LambdaSpec,
};
pub use fewlevel::{
    diagonal_free_normalized, driven_eigenbasis_evolution, few_level_evolve, few_level_run,
    resolve_driven_spectrum, theorem1_bound, FewLevelRun, COUPLING_THRESHOLD,
};
pub use floquet::{
    floquet_solution, floquet_state, theorem2_bound, theorem2_window_bound, TwoLevelFloquet,
};
