use serde::{Deserialize, Serialize};

use super::{bottleneck, component_times, Component, HardwareSpec, KernelProfile, ModelError};
use crate::engine::{Scheme, TilingParams};
use crate::multiqueue::{minimum_range, Variant};
use crate::stencil::StencilShape;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthShift {
    /// Real depth at which global memory stops being the unique bottleneck.
    pub t_real: f64,
    /// Least integer depth whose bottleneck is not global memory.
    pub t_int: u32,
    /// Component that takes over.
    pub shifts_to: Component,
}

/// Least depth that moves the bottleneck off global memory.
///
/// On-chip and compute time grow linearly in `t`; global time is
/// `a_gm * (d_gm + d_gm_per_t * t) * S / B_gm`, so each crossing has a closed
/// form. The earlier of the two crossings wins.
pub fn min_depth_to_shift(hw: &HardwareSpec, p: &KernelProfile) -> Result<DepthShift, ModelError> {
    let s = hw.cell_bytes;
    let gm0 = p.a_gm * p.d_gm * s / hw.gm_bandwidth_bytes_per_s;
    let gm1 = p.a_gm * p.d_gm_per_t * s / hw.gm_bandwidth_bytes_per_s;
    let slopes = [
        (Component::Sm, p.a_sm * p.d_sm * s / hw.sm_bandwidth_bytes_per_s),
        (Component::Cmp, p.a_cmp * p.d_cmp / hw.compute_flops_per_s),
    ];
    let (shifts_to, t_real) = slopes
        .iter()
        .filter(|(_, k)| *k > gm1)
        .map(|&(c, k)| (c, gm0 / (k - gm1)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(ModelError::Unattainable)?;
    let mut t_int = t_real.ceil().max(1.0) as u32;
    while bottleneck(&component_times(hw, &p.with_t(t_int as f64))) == Component::Gm {
        t_int += 1;
    }
    Ok(DepthShift {
        t_real,
        t_int,
        shifts_to,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileWidth {
    pub bound: f64,
    pub chosen: usize,
}

/// Narrowest square 3-D device tile whose on-chip traffic can outgrow its
/// halo traffic, and the next multiple of 32 at or above it.
pub fn min_tile_width_3d(hw: &HardwareSpec, p: &KernelProfile) -> TileWidth {
    let bound = 4.0 * p.a_gm * hw.sm_bandwidth_bytes_per_s / (p.a_sm * hw.gm_bandwidth_bytes_per_s) * p.rad as f64;
    let chosen = ((bound / 32.0).ceil().max(1.0) as usize) * 32;
    TileWidth { bound, chosen }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LittlesCheck {
    pub op: String,
    /// Operations that must be in flight per SM (latency x throughput).
    pub concurrency: f64,
    /// Operations the configuration keeps in flight (threads x ILP).
    pub parallelism: f64,
    pub saturates: bool,
}

pub fn littles_check(hw: &HardwareSpec, op: &str, n_threads: u32, ilp: u32) -> Result<LittlesCheck, ModelError> {
    let unknown = || ModelError::UnknownOp {
        op: op.to_string(),
        known: hw.op_latencies.keys().cloned().collect::<Vec<_>>().join(", "),
    };
    let l = *hw.op_latencies.get(op).ok_or_else(unknown)?;
    let thr = *hw.op_throughputs.get(op).ok_or_else(unknown)?;
    let concurrency = l * thr;
    let parallelism = n_threads as f64 * ilp as f64;
    Ok(LittlesCheck {
        op: op.to_string(),
        concurrency,
        parallelism,
        saturates: parallelism > 0.0 && parallelism >= concurrency,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnchipBudget {
    /// Ring length of the multi-queue, in planes.
    pub planes: usize,
    pub plane_cells: usize,
    pub bytes: f64,
    pub capacity: f64,
    pub fits: bool,
}

/// On-chip bytes a block needs to stream `params.t` steps.
///
/// SM tiles are loaded with their halo already inside the tile, so a plane
/// is the tile itself. A device-tiling block also holds the `rad` ring it
/// pulls from its neighbours.
pub fn onchip_bytes_required(
    hw: &HardwareSpec,
    stencil: &StencilShape,
    params: &TilingParams,
) -> Result<OnchipBudget, ModelError> {
    if params.t == 0 {
        return Err(ModelError::InvalidProfile("t must be at least 1".into()));
    }
    let rad = stencil.radius();
    let mut planes = minimum_range(params.t, rad, params.lazy);
    if params.variant == Variant::ComputingAddress {
        planes = planes.next_power_of_two();
    }
    let grow = match params.scheme {
        Scheme::SmTiling => 0,
        Scheme::DeviceTiling => 2 * rad,
    };
    let plane_cells: usize = params.tile.iter().map(|t| t + grow).product();
    let bytes = (planes * plane_cells) as f64 * hw.cell_bytes;
    Ok(OnchipBudget {
        planes,
        plane_cells,
        bytes,
        capacity: hw.onchip_capacity_bytes,
        fits: bytes <= hw.onchip_capacity_bytes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::make_benchmark;

    fn a100() -> HardwareSpec {
        HardwareSpec::a100()
    }

    #[test]
    fn five_point_depth() {
        let p = KernelProfile::per_cell(&make_benchmark("j2d5pt").unwrap(), 1.0);
        let d = min_depth_to_shift(&a100(), &p).unwrap();
        // 2 * 19.49e12 / (4 * 1555e9)
        assert!((d.t_real - 6.2669).abs() < 1e-3);
        assert_eq!((d.t_int, d.shifts_to), (7, Component::Sm));
    }

    #[test]
    fn slow_global_memory_needs_depth_one() {
        let mut hw = a100();
        hw.gm_bandwidth_bytes_per_s = 1e30;
        let p = KernelProfile::per_cell(&make_benchmark("j2d5pt").unwrap(), 1.0);
        assert_eq!(min_depth_to_shift(&hw, &p).unwrap().t_int, 1);
    }

    #[test]
    fn unreachable_shift_is_reported() {
        let p = KernelProfile {
            a_sm: 0.0,
            a_cmp: 0.0,
            ..KernelProfile::per_cell(&make_benchmark("j2d5pt").unwrap(), 1.0)
        };
        assert_eq!(min_depth_to_shift(&a100(), &p), Err(ModelError::Unattainable));
    }

    #[test]
    fn tile_width_rounding() {
        let p = KernelProfile::per_cell(&make_benchmark("j3d7pt").unwrap(), 1.0);
        let w = min_tile_width_3d(&a100(), &p);
        assert!((w.bound - 22.283).abs() < 1e-3);
        assert_eq!(w.chosen, 32);
        let w2 = min_tile_width_3d(&a100(), &KernelProfile { rad: 2, ..p.clone() });
        assert!((w2.bound - 2.0 * w.bound).abs() < 1e-12);
        assert_eq!(w2.chosen, 64);
        let mut hw = a100();
        hw.sm_bandwidth_bytes_per_s = hw.gm_bandwidth_bytes_per_s;
        let eq = KernelProfile { a_sm: 2.0, rad: 3, ..p };
        assert!((min_tile_width_3d(&hw, &eq).bound - 12.0).abs() < 1e-12);
    }

    #[test]
    fn littles_law() {
        let mut hw = a100();
        hw.op_latencies.insert("toy".into(), 8.0);
        hw.op_throughputs.insert("toy".into(), 64.0);
        let c = littles_check(&hw, "toy", 256, 4).unwrap();
        assert_eq!((c.concurrency, c.parallelism, c.saturates), (512.0, 1024.0, true));
        assert!(!littles_check(&hw, "toy", 256, 1).unwrap().saturates);
        assert!(!littles_check(&hw, "toy", 256, 0).unwrap().saturates);
        assert!(matches!(
            littles_check(&hw, "nope", 1, 1),
            Err(ModelError::UnknownOp { .. })
        ));
    }

    #[test]
    fn budgets_for_small_queues() {
        let s = make_benchmark("j1d3pt").unwrap();
        let shifting = TilingParams::sm(3, &[]).variant(Variant::ShiftingData);
        assert_eq!(onchip_bytes_required(&a100(), &s, &shifting).unwrap().bytes, 56.0);
        let masked = TilingParams::sm(3, &[]).variant(Variant::ComputingAddress);
        assert_eq!(onchip_bytes_required(&a100(), &s, &masked).unwrap().bytes, 64.0);
    }

    #[test]
    fn deep_seven_point_device_tile_overflows() {
        let s = make_benchmark("j3d7pt").unwrap();
        let p = TilingParams::device(19, &[32, 32], &[9, 12]).variant(Variant::ShiftingData);
        let b = onchip_bytes_required(&a100(), &s, &p).unwrap();
        assert_eq!((b.planes, b.plane_cells), (39, 34 * 34));
        assert_eq!(b.bytes, 360_672.0);
        assert!(!b.fits);
    }
}
