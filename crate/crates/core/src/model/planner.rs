use serde::{Deserialize, Serialize};

use super::{
    attainable_perf, bottleneck, component_times, min_depth_to_shift, min_tile_width_3d, onchip_bytes_required,
    valid_proportion_device, valid_proportion_sm, Component, ComponentTimes, HardwareSpec, KernelProfile, ModelError,
    OnchipBudget,
};
use crate::engine::{Scheme, TilingParams};
use crate::multiqueue::Variant;
use crate::stencil::StencilShape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Deepest temporal block considered for device tiling.
    pub depth_ceiling: usize,
    /// SM tile along the cross axis of a 2-D stencil.
    pub sm_tile_2d: usize,
    /// Loaded SM tile (halo included) per cross axis of a 3-D stencil.
    pub sm_tile_3d: usize,
    /// Cells per block along the cross axis of a 2-D device tile.
    pub device_block_2d: usize,
    pub n_syncs: u32,
    /// Both halo sides shrink an SM tile (`false` gives the one-sided form).
    pub two_sided: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            depth_ceiling: 64,
            sm_tile_2d: 256,
            sm_tile_3d: 34,
            device_block_2d: 256,
            n_syncs: 1,
            two_sided: true,
        }
    }
}

/// One evaluated scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub scheme: Scheme,
    pub t: usize,
    /// Per cross-section axis, in increasing axis order.
    pub tile: Vec<usize>,
    pub device_tile_grid: Vec<usize>,
    pub stream_axis: usize,
    pub profile: KernelProfile,
    pub times: ComponentTimes,
    pub bottleneck: Component,
    pub p_cells_per_s: f64,
    pub v: f64,
    pub pp_cells_per_s: f64,
    pub onchip: OnchipBudget,
}

impl Candidate {
    pub fn params(&self) -> TilingParams {
        let p = match self.scheme {
            Scheme::SmTiling => TilingParams::sm(self.t, &self.tile),
            Scheme::DeviceTiling => TilingParams::device(self.t, &self.tile, &self.device_tile_grid),
        };
        p.stream_axis(self.stream_axis).lazy(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub stencil: String,
    pub domain: Vec<usize>,
    pub scheme: Scheme,
    pub t: usize,
    pub tile_x: usize,
    pub tile_y: usize,
    pub device_tile_grid: Vec<usize>,
    pub stream_axis: usize,
    pub predicted_p_gcells: f64,
    pub predicted_v: f64,
    pub predicted_pp_gcells: f64,
    pub bottleneck: Component,
    pub candidates: Vec<Candidate>,
}

impl Plan {
    pub fn chosen(&self) -> &Candidate {
        self.candidates
            .iter()
            .find(|c| c.scheme == self.scheme)
            .expect("chosen candidate present")
    }

    pub fn candidate(&self, scheme: Scheme) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.scheme == scheme)
    }
}

/// Per-cell profile with register-streamed on-chip costs.
pub fn sm_profile(stencil: &StencilShape, t: usize) -> KernelProfile {
    KernelProfile::per_cell(stencil, t as f64)
}

/// A 2-D device tile of `blocks` blocks, `w` cells each along the cross axis,
/// reloading a `rad*t` halo on both sides.
pub fn device_profile_2d(stencil: &StencilShape, w: usize, blocks: usize, t: usize) -> KernelProfile {
    let cells = (blocks * w) as f64;
    KernelProfile {
        d_gm: cells,
        d_gm_per_t: (blocks * 2 * stencil.radius()) as f64,
        d_sm: cells,
        d_cmp: cells,
        d_all: cells,
        tile_x: w,
        ..KernelProfile::per_cell(stencil, t as f64)
    }
}

/// A 3-D device tile of `blocks` square `w x w` blocks; each block reloads
/// `(tile_x + tile_y) * 2 * rad` halo cells per step.
pub fn device_profile_3d(stencil: &StencilShape, w: usize, blocks: usize, t: usize) -> KernelProfile {
    let cells = (blocks * w * w) as f64;
    KernelProfile {
        d_gm: cells,
        d_gm_per_t: (blocks * 2 * w * 2 * stencil.radius()) as f64,
        d_sm: cells,
        d_cmp: cells,
        d_all: cells,
        tile_x: w,
        tile_y: w,
        ..KernelProfile::per_cell(stencil, t as f64)
    }
}

fn stream_axis_for(domain: &[usize]) -> usize {
    if domain.len() < 3 {
        return domain.len() - 1;
    }
    // Longest axis, later axes winning ties.
    (0..domain.len())
        .rev()
        .max_by_key(|&d| (domain[d], d))
        .unwrap_or(domain.len() - 1)
}

fn budget(
    hw: &HardwareSpec,
    stencil: &StencilShape,
    scheme: Scheme,
    t: usize,
    tile: &[usize],
) -> Result<OnchipBudget, ModelError> {
    let p = match scheme {
        Scheme::SmTiling => TilingParams::sm(t, tile),
        Scheme::DeviceTiling => TilingParams::device(t, tile, &vec![1; tile.len()]),
    };
    onchip_bytes_required(hw, stencil, &p.variant(Variant::ShiftingData))
}

fn finish(
    hw: &HardwareSpec,
    scheme: Scheme,
    t: usize,
    tile: Vec<usize>,
    grid: Vec<usize>,
    stream_axis: usize,
    profile: KernelProfile,
    v: f64,
    onchip: OnchipBudget,
) -> Candidate {
    let times = component_times(hw, &profile);
    let p = attainable_perf(hw, &profile);
    Candidate {
        scheme,
        t,
        tile,
        device_tile_grid: grid,
        stream_axis,
        bottleneck: bottleneck(&times),
        times,
        profile,
        p_cells_per_s: p,
        v,
        pp_cells_per_s: p * v,
        onchip,
    }
}

/// SM tiling at the shallowest depth that leaves global memory, backed off
/// until the queue fits on chip and the tile keeps a valid core.
pub fn sm_candidate(
    hw: &HardwareSpec,
    stencil: &StencilShape,
    domain: &[usize],
    cfg: &PlannerConfig,
) -> Result<Candidate, ModelError> {
    let stream = stream_axis_for(domain);
    let width = if stencil.dims() == 2 {
        cfg.sm_tile_2d
    } else {
        cfg.sm_tile_3d
    };
    let cross: Vec<usize> = (0..domain.len()).filter(|&d| d != stream).map(|d| domain[d]).collect();
    let tile = vec![width; cross.len()];
    let tiled: Vec<usize> = cross.iter().filter(|&&n| width < n).map(|_| width).collect();
    let rad = stencil.radius();
    let base = sm_profile(stencil, 1);
    let mut t = match min_depth_to_shift(hw, &base) {
        Ok(d) => d.t_int as usize,
        Err(_) => cfg.depth_ceiling,
    };
    loop {
        let core_ok = tiled.iter().all(|&w| w > 2 * rad * t);
        let onchip = budget(hw, stencil, Scheme::SmTiling, t, &tile)?;
        if core_ok && onchip.fits {
            let v = valid_proportion_sm(&tiled, t, rad, cfg.two_sided)?;
            return Ok(finish(
                hw,
                Scheme::SmTiling,
                t,
                tile,
                Vec::new(),
                stream,
                sm_profile(stencil, t),
                v,
                onchip,
            ));
        }
        if t == 1 {
            return Err(ModelError::NoFeasible(format!(
                "sm-tiling for {} at depth 1",
                stencil.name()
            )));
        }
        t -= 1;
    }
}

/// Device tiling as deep as the on-chip budget allows.
pub fn device_candidate(
    hw: &HardwareSpec,
    stencil: &StencilShape,
    domain: &[usize],
    cfg: &PlannerConfig,
) -> Result<Candidate, ModelError> {
    if stencil.dims() < 2 {
        return Err(ModelError::NoFeasible("device tiling needs a cross-section".into()));
    }
    let stream = stream_axis_for(domain);
    let cross: Vec<usize> = (0..domain.len()).filter(|&d| d != stream).map(|d| domain[d]).collect();
    let sms = hw.sm_count as usize;
    let (w, grid) = if stencil.dims() == 2 {
        let w = cfg.device_block_2d;
        (w, vec![cross[0].div_ceil(w).clamp(1, sms)])
    } else {
        let w = min_tile_width_3d(hw, &sm_profile(stencil, 1)).chosen;
        let mut g: Vec<usize> = cross.iter().map(|n| n.div_ceil(w).max(1)).collect();
        while g.iter().product::<usize>() > sms {
            let i = if g[0] >= g[1] { 0 } else { 1 };
            g[i] -= 1;
        }
        (w, g)
    };
    let tile = vec![w; cross.len()];
    let blocks: usize = grid.iter().product();
    let t = (1..=cfg.depth_ceiling)
        .rev()
        .find(|&t| {
            budget(hw, stencil, Scheme::DeviceTiling, t, &tile)
                .map(|b| b.fits)
                .unwrap_or(false)
        })
        .ok_or_else(|| ModelError::NoFeasible(format!("device tiling for {} at depth 1", stencil.name())))?;
    let profile = if stencil.dims() == 2 {
        device_profile_2d(stencil, w, blocks, t)
    } else {
        device_profile_3d(stencil, w, blocks, t)
    };
    let profile = KernelProfile {
        n_syncs: cfg.n_syncs,
        ..profile
    };
    let t_stencil = component_times(hw, &profile).max();
    let v = valid_proportion_device(t_stencil, hw.device_sync_latency_s, cfg.n_syncs);
    let onchip = budget(hw, stencil, Scheme::DeviceTiling, t, &tile)?;
    Ok(finish(
        hw,
        Scheme::DeviceTiling,
        t,
        tile,
        grid,
        stream,
        profile,
        v,
        onchip,
    ))
}

/// Evaluates both schemes and keeps the higher practical performance; a tie
/// within 1e-9 relative goes to SM tiling.
pub fn choose_scheme(hw: &HardwareSpec, stencil: &StencilShape, domain: &[usize]) -> Result<Plan, ModelError> {
    choose_scheme_with(hw, stencil, domain, &PlannerConfig::default())
}

pub fn choose_scheme_with(
    hw: &HardwareSpec,
    stencil: &StencilShape,
    domain: &[usize],
    cfg: &PlannerConfig,
) -> Result<Plan, ModelError> {
    hw.validate()?;
    if domain.len() != stencil.dims() || domain.contains(&0) {
        return Err(ModelError::BadDomain {
            domain: domain.to_vec(),
            dims: stencil.dims(),
        });
    }
    let candidates: Vec<Candidate> = [
        sm_candidate(hw, stencil, domain, cfg),
        device_candidate(hw, stencil, domain, cfg),
    ]
    .into_iter()
    .filter_map(Result::ok)
    .collect();
    let best = candidates
        .iter()
        .fold(None::<&Candidate>, |best, c| match best {
            None => Some(c),
            Some(b) => {
                let margin = 1e-9 * b.pp_cells_per_s.abs().max(c.pp_cells_per_s.abs());
                let better = c.pp_cells_per_s > b.pp_cells_per_s + margin
                    || ((c.pp_cells_per_s - b.pp_cells_per_s).abs() <= margin && c.scheme == Scheme::SmTiling);
                Some(if better { c } else { b })
            }
        })
        .ok_or_else(|| ModelError::NoFeasible(format!("no scheme fits {}", stencil.name())))?
        .clone();
    let p_g = best.p_cells_per_s * 1e-9;
    Ok(Plan {
        stencil: stencil.name().to_string(),
        domain: domain.to_vec(),
        scheme: best.scheme,
        t: best.t,
        tile_x: best.tile.first().copied().unwrap_or(1),
        tile_y: best.tile.get(1).copied().unwrap_or(1),
        device_tile_grid: best.device_tile_grid.clone(),
        stream_axis: best.stream_axis,
        predicted_p_gcells: p_g,
        predicted_v: best.v,
        predicted_pp_gcells: p_g * best.v,
        bottleneck: best.bottleneck,
        candidates,
    })
}
