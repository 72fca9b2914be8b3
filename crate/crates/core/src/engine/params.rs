use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiqueue::{MqError, Variant};
use crate::stencil::StencilError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    SmTiling,
    DeviceTiling,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::SmTiling => "sm-tiling",
            Scheme::DeviceTiling => "device-tiling",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tiling configuration.
///
/// `tile` and `device_tile_grid` list one entry per cross-section axis, that
/// is every grid axis except the streamed one, in increasing axis order. A 1-D
/// grid has no cross-section and takes empty lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingParams {
    pub scheme: Scheme,
    pub t: usize,
    pub tile: Vec<usize>,
    pub device_tile_grid: Vec<usize>,
    pub lazy: bool,
    pub rst: bool,
    pub prefetch: bool,
    pub transpose_halo: bool,
    pub variant: Variant,
    /// Axis walked plane by plane; defaults to the last axis.
    pub stream_axis: Option<usize>,
}

impl TilingParams {
    pub fn sm(t: usize, tile: &[usize]) -> Self {
        Self {
            scheme: Scheme::SmTiling,
            t,
            tile: tile.to_vec(),
            device_tile_grid: Vec::new(),
            lazy: false,
            rst: false,
            prefetch: false,
            transpose_halo: false,
            variant: Variant::ComputingAddress,
            stream_axis: None,
        }
    }

    pub fn device(t: usize, tile: &[usize], grid: &[usize]) -> Self {
        Self {
            scheme: Scheme::DeviceTiling,
            device_tile_grid: grid.to_vec(),
            ..Self::sm(t, tile)
        }
    }

    pub fn lazy(mut self, on: bool) -> Self {
        self.lazy = on;
        self
    }

    pub fn rst(mut self, on: bool) -> Self {
        self.rst = on;
        self
    }

    pub fn prefetch(mut self, on: bool) -> Self {
        self.prefetch = on;
        self
    }

    pub fn transpose_halo(mut self, on: bool) -> Self {
        self.transpose_halo = on;
        self
    }

    pub fn variant(mut self, v: Variant) -> Self {
        self.variant = v;
        self
    }

    pub fn stream_axis(mut self, axis: usize) -> Self {
        self.stream_axis = Some(axis);
        self
    }

    pub fn halo(&self, radius: usize) -> usize {
        radius * self.t
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Stencil(#[from] StencilError),
    #[error(transparent)]
    Queue(#[from] MqError),
    #[error("temporal depth must be at least 1")]
    ZeroDepth,
    #[error("stencil radius must be at least 1")]
    ZeroRadius,
    #[error("run_{expected} called with {got} parameters")]
    WrongScheme { expected: Scheme, got: Scheme },
    #[error("stream axis {axis} out of range for a {dims}-D grid")]
    BadStreamAxis { axis: usize, dims: usize },
    #[error("{what} needs {expected} entries (one per cross-section axis), got {got}")]
    CrossSectionArity {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} entries must be positive")]
    ZeroExtent { what: &'static str },
    #[error("tile {tile} along cross axis {axis} leaves no valid core at depth {t} (halo {halo} per side)")]
    EmptyCore {
        axis: usize,
        tile: usize,
        t: usize,
        halo: usize,
    },
    #[error("device tile grid {grid:?} of {tile:?} blocks is inconsistent with cross-section {extents:?}: block {block} along axis {axis} lies outside the domain")]
    GridInconsistent {
        grid: Vec<usize>,
        tile: Vec<usize>,
        extents: Vec<usize>,
        axis: usize,
        block: usize,
    },
    #[error("trace is empty (no cells computed)")]
    EmptyTrace,
}
