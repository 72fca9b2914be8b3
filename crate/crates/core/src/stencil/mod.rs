//! Stencil shapes, grids, the benchmark catalog and the naive reference
//! executor every other engine is checked against.

mod catalog;
mod grid;
mod reference;
mod shape;

pub use catalog::{catalog, catalog_json, make_benchmark, CatalogEntry, BENCHMARK_NAMES};
pub use grid::{Boundary, Grid};
pub use reference::{reference_run, reference_step};
pub use shape::{StencilShape, Tap};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StencilError {
    #[error("stencil dimensionality must be 1, 2 or 3, got {0}")]
    BadDims(usize),
    #[error("stencil has no taps")]
    EmptyTaps,
    #[error("stencil taps must include the center offset")]
    MissingCenter,
    #[error("tap offset {offset:?} reaches outside a {dims}-D stencil")]
    OffsetOutsideDims { offset: [i32; 3], dims: usize },
    #[error("tap offset {0:?} appears twice")]
    DuplicateTap([i32; 3]),
    #[error("on-chip accesses with register streaming ({with_rst}) exceed the plain figure ({without})")]
    RstExceedsPlain { with_rst: f64, without: u32 },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("unknown benchmark '{name}'; valid names: {valid}")]
    UnknownBenchmark { name: String, valid: String },
    #[error("grid is {grid}-D but the stencil is {stencil}-D")]
    DimensionMismatch { grid: usize, stencil: usize },
    #[error("extent {extent} along axis {axis} must exceed twice the radius {radius}")]
    ExtentTooSmall { axis: usize, extent: usize, radius: usize },
    #[error("grid needs 1 to 3 non-zero extents, got {0:?}")]
    BadExtents(Vec<usize>),
    #[error("expected {expected} cells, got {got}")]
    CellCount { expected: usize, got: usize },
}
