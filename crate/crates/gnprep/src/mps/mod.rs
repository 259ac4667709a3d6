//! Matrix-product state engine: tensor-train state container with canonical
//! forms and Schmidt data, automaton-compressed operator construction,
//! variational ground-state search, and bond-dimension scaling predictions.

pub mod dmrg;
pub mod mpo;
pub mod scaling;
pub mod state;

pub use dmrg::{dmrg_ground_state, DmrgInit, DmrgOptions, DmrgResult};
pub use mpo::{Mpo, MpoSite, MPO_DENSE_CAP};
pub use scaling::{
    chi_from_parts, cost_epsilon_exponent, dmrg_cost, entropy_scaling_check, CostModel,
    EntropyFit, ScalingModel,
};
pub use state::{
    half_chain_entropy, svd_split, truncation_weight, truncation_weight_at,
    truncation_weight_with, Canonical, Mps, SiteTensor, SplitPolicy, WeightConvention,
    MPS_DENSE_CAP,
};
