use serde::{Deserialize, Serialize};

use super::params::{EngineError, Scheme, TilingParams};
use super::trace::{ExecutionTrace, SyncCounts};
use crate::model::valid_proportion_sm;
use crate::stencil::StencilShape;

/// Per-cell figures measured from a trace, in the cost model's units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountingReport {
    pub stencil: String,
    pub scheme: Scheme,
    pub t: usize,
    /// Global-memory cell transfers (loads, stores, halo traffic) per valid
    /// update. One load and one store amortised over `t` steps gives `2/t`.
    pub a_gm_measured: f64,
    /// Shared-level accesses per computed cell.
    pub a_sm_measured: f64,
    /// Register-level accesses per computed cell.
    pub a_reg_measured: f64,
    pub valid_proportion: f64,
    /// Two-sided overlapped-tiling formula for the effective tiles (SM tiling
    /// only; axes the tile covers entirely contribute 1).
    pub model_valid_proportion: Option<f64>,
    pub syncs: SyncCounts,
    pub blocks: u64,
    pub device_tiles: u64,
    pub halo_cells: u64,
}

pub fn trace_summary(
    trace: &ExecutionTrace,
    stencil: &StencilShape,
    params: &TilingParams,
    domain: &[usize],
) -> Result<AccountingReport, EngineError> {
    if trace.cells_computed == 0 || trace.cells_valid == 0 {
        return Err(EngineError::EmptyTrace);
    }
    let computed = trace.cells_computed as f64;
    let halo = trace.halo_pushes + trace.halo_pulls;
    let gm = (trace.gm_loads + trace.gm_stores + halo) as f64;
    let model_valid_proportion = match params.scheme {
        Scheme::SmTiling => {
            let stream = params.stream_axis.unwrap_or(domain.len().saturating_sub(1));
            let cross: Vec<usize> = (0..domain.len()).filter(|&d| d != stream).map(|d| domain[d]).collect();
            let tiles: Vec<usize> = params
                .tile
                .iter()
                .zip(&cross)
                .filter(|(t, n)| t < n)
                .map(|(&t, _)| t)
                .collect();
            valid_proportion_sm(&tiles, params.t, stencil.radius(), true).ok()
        }
        Scheme::DeviceTiling => None,
    };
    Ok(AccountingReport {
        stencil: stencil.name().to_string(),
        scheme: trace.scheme,
        t: trace.t,
        a_gm_measured: gm / trace.cells_valid as f64,
        a_sm_measured: trace.onchip_accesses.shared as f64 / computed,
        a_reg_measured: trace.onchip_accesses.register as f64 / computed,
        valid_proportion: trace.valid_proportion(),
        model_valid_proportion,
        syncs: trace.syncs,
        blocks: trace.blocks,
        device_tiles: trace.device_tiles,
        halo_cells: halo,
    })
}
