//! CPU execution of temporal blocking with both tiling schemes, metering
//! memory traffic and synchronisation as a GPU would incur them.
//!
//! Memory levels are logical: the staging buffer plays global memory, the
//! per-block tile plays shared memory and a thread's streamed window plays
//! registers. Nothing is timed; timing comes from [`crate::model`].

mod device;
mod layout;
mod params;
mod sm;
mod summary;
mod trace;

pub use device::run_device_tiling;
pub use params::{EngineError, Scheme, TilingParams};
pub use sm::run_sm_tiling;
pub use summary::{trace_summary, AccountingReport};
pub use trace::{ExecutionTrace, OnchipAccesses, Phase, SyncCounts};

use crate::stencil::{Grid, StencilShape};
use layout::{CTap, Layout};

/// Runs whichever scheme `params` selects.
pub fn run_tiling(
    grid: &Grid,
    stencil: &StencilShape,
    params: &TilingParams,
) -> Result<(Grid, ExecutionTrace), EngineError> {
    match params.scheme {
        Scheme::SmTiling => run_sm_tiling(grid, stencil, params),
        Scheme::DeviceTiling => run_device_tiling(grid, stencil, params),
    }
}

fn validate_common(grid: &Grid, stencil: &StencilShape, params: &TilingParams) -> Result<Layout, EngineError> {
    grid.check_for(stencil)?;
    if params.t == 0 {
        return Err(EngineError::ZeroDepth);
    }
    if stencil.radius() == 0 {
        return Err(EngineError::ZeroRadius);
    }
    Layout::new(grid, params)
}

/// On-chip access charges per computed cell.
///
/// Without register streaming every tap is a shared-memory read and the
/// result costs one more access. With it, a thread keeps a window along the
/// stream axis (and, in 3-D, a strip of four cells along the second
/// cross-section axis) in registers, so only taps displaced along the first
/// cross-section axis go to shared memory, plus one load and one store. Each
/// strip pays `2*rad` extra shared reads for its edges.
pub(crate) struct OnchipRule {
    taps: u64,
    register_taps: u64,
    rad: u64,
    strips: bool,
}

const ILP_STRIP: usize = 4;

impl OnchipRule {
    fn new(stencil: &StencilShape, taps: &[CTap], layout: &Layout) -> Self {
        Self {
            taps: taps.len() as u64,
            register_taps: taps.iter().filter(|t| t.d[0] == 0).count() as u64,
            rad: stencil.radius() as u64,
            strips: layout.real[1],
        }
    }

    fn charge(&self, rst: bool, wa: usize, wb: usize, planes: u64, acc: &mut OnchipAccesses) {
        let cells = (wa * wb) as u64 * planes;
        if !rst {
            acc.shared += (self.taps + 1) * cells;
            return;
        }
        acc.register += self.register_taps * cells;
        acc.shared += (2 + self.taps - self.register_taps) * cells;
        if self.strips {
            acc.shared += (wa * wb.div_ceil(ILP_STRIP)) as u64 * planes * 2 * self.rad;
        }
    }
}
