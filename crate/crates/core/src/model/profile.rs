use serde::{Deserialize, Serialize};

use super::{HardwareSpec, ModelError};
use crate::stencil::StencilShape;

/// Per-cell costs and cell counts of one kernel configuration.
///
/// Global-memory traffic may grow with depth (device tiling reloads a halo
/// proportional to `t`): the effective count is `d_gm + d_gm_per_t * t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub a_gm: f64,
    pub a_sm: f64,
    pub a_cmp: f64,
    pub d_gm: f64,
    #[serde(default)]
    pub d_gm_per_t: f64,
    pub d_sm: f64,
    pub d_cmp: f64,
    pub d_all: f64,
    pub t: f64,
    pub rad: usize,
    pub tile_x: usize,
    pub tile_y: usize,
    pub n_syncs: u32,
}

impl KernelProfile {
    /// One cell per counter, register-streamed shared accesses, perfect
    /// caching for global memory.
    pub fn per_cell(stencil: &StencilShape, t: f64) -> Self {
        Self {
            a_gm: stencil.gm_accesses_per_cell(),
            a_sm: stencil.sm_accesses_with_rst(),
            a_cmp: stencil.flops_per_cell() as f64,
            d_gm: 1.0,
            d_gm_per_t: 0.0,
            d_sm: 1.0,
            d_cmp: 1.0,
            d_all: 1.0,
            t,
            rad: stencil.radius(),
            tile_x: 1,
            tile_y: 1,
            n_syncs: 1,
        }
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn d_gm_at(&self, t: f64) -> f64 {
        self.d_gm + self.d_gm_per_t * t
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.d_all > 0.0) {
            return Err(ModelError::InvalidProfile("d_all must be positive".into()));
        }
        if !(self.t >= 1.0) {
            return Err(ModelError::InvalidProfile(format!(
                "t must be at least 1, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Gm,
    Sm,
    Cmp,
}

impl Component {
    pub fn as_str(self) -> &'static str {
        match self {
            Component::Gm => "gm",
            Component::Sm => "sm",
            Component::Cmp => "cmp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentTimes {
    pub gm: f64,
    pub sm: f64,
    pub cmp: f64,
}

impl ComponentTimes {
    pub fn max(&self) -> f64 {
        self.gm.max(self.sm).max(self.cmp)
    }
}

/// Seconds spent on global memory, shared memory and arithmetic.
pub fn component_times(hw: &HardwareSpec, p: &KernelProfile) -> ComponentTimes {
    let s = hw.cell_bytes;
    ComponentTimes {
        gm: p.a_gm * p.d_gm_at(p.t) * s / hw.gm_bandwidth_bytes_per_s,
        sm: p.a_sm * p.d_sm * p.t * s / hw.sm_bandwidth_bytes_per_s,
        cmp: p.a_cmp * p.d_cmp * p.t / hw.compute_flops_per_s,
    }
}

/// Slowest component; ties resolve gm, then sm, then cmp.
pub fn bottleneck(times: &ComponentTimes) -> Component {
    if times.gm >= times.sm && times.gm >= times.cmp {
        Component::Gm
    } else if times.sm >= times.cmp {
        Component::Sm
    } else {
        Component::Cmp
    }
}

/// Attainable throughput in cells/s.
pub fn attainable_perf(hw: &HardwareSpec, p: &KernelProfile) -> f64 {
    p.d_all * p.t / component_times(hw, p).max()
}

/// Fraction of overlapped-tiling updates that survive. `tiles` lists the
/// tiled axes only; each loses `k*t*rad` cells with `k = 2` for halos on both
/// sides, 1 for the one-sided form.
pub fn valid_proportion_sm(tiles: &[usize], t: usize, rad: usize, two_sided: bool) -> Result<f64, ModelError> {
    let k = if two_sided { 2 } else { 1 };
    let mut v = 1.0;
    for &tile in tiles {
        let lost = k * t * rad;
        if lost >= tile {
            return Err(ModelError::EmptyCore { tile, lost });
        }
        v *= (tile - lost) as f64 / tile as f64;
    }
    Ok(v)
}

/// Fraction of time spent on stencil work when `n` device barriers of
/// `t_dsync` seconds accompany `t_stencil` seconds of it.
pub fn valid_proportion_device(t_stencil: f64, t_dsync: f64, n: u32) -> f64 {
    t_stencil / (t_stencil + t_dsync * n as f64)
}

pub fn practical_perf(p: f64, v: f64) -> f64 {
    p * v
}
