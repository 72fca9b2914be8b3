//! Practical attainable performance of a temporally blocked stencil and the
//! planner built on it.
//!
//! Three resources bound a kernel: global memory, on-chip memory and
//! arithmetic. Attainable performance `P` is the work over the slowest of the
//! three times; practical performance scales it by the fraction `V` of work
//! that is not wasted (redundant halo updates for SM tiling, barrier time for
//! device tiling). Rates are cells/s internally and GCells/s in reports.

mod decide;
mod hardware;
mod planner;
mod profile;

pub use decide::{
    littles_check, min_depth_to_shift, min_tile_width_3d, onchip_bytes_required, DepthShift, LittlesCheck,
    OnchipBudget, TileWidth,
};
pub use hardware::{HardwareSpec, PRESETS};
pub use planner::{
    choose_scheme, choose_scheme_with, device_candidate, device_profile_2d, device_profile_3d, sm_candidate,
    sm_profile, Candidate, Plan, PlannerConfig,
};
pub use profile::{
    attainable_perf, bottleneck, component_times, practical_perf, valid_proportion_device, valid_proportion_sm,
    Component, ComponentTimes, KernelProfile,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{source_name}: {message}")]
    Config { source_name: String, message: String },
    #[error("hardware field {0} must be positive and finite")]
    NonPositive(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("halo of {lost} cells leaves no valid core in a tile of {tile}")]
    EmptyCore { tile: usize, lost: usize },
    #[error("the bottleneck never leaves global memory")]
    Unattainable,
    #[error("unknown op '{op}'; known ops: {known}")]
    UnknownOp { op: String, known: String },
    #[error("no feasible configuration: {0}")]
    NoFeasible(String),
    #[error("domain {domain:?} does not match a {dims}-D stencil")]
    BadDomain { domain: Vec<usize>, dims: usize },
}
