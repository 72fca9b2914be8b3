//! Temporal blocking for iterative Jacobi stencils.
//!
//! * [`stencil`]: shapes, grids, the benchmark catalog and a naive reference.
//! * [`multiqueue`]: the circular multi-queue that streams planes through
//!   several time steps with a bounded on-chip footprint.
//! * [`engine`]: simulated SM-level and device-level tiling with access
//!   accounting.
//! * [`model`]: the cost model and the planner built on it.

pub mod engine;
pub mod model;
pub mod multiqueue;
pub mod rng;
pub mod stencil;
