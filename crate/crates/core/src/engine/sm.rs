use rayon::prelude::*;

use super::layout::{check_cross, per_axis, tile_spans, CTap, Layout, Span, TileSpan};
use super::params::{EngineError, Scheme, TilingParams};
use super::trace::{assemble_phases, ExecutionTrace, Phase};
use super::{validate_common, OnchipRule};
use crate::multiqueue::{CircularMultiQueue, MqError, StreamKernel, StreamQueue};
use crate::stencil::{Boundary, Grid, StencilShape};

/// Overlapped tiling: every block loads its tile plus a `rad*t` halo, streams
/// it through `t` time steps in a multi-queue of planes and keeps only its
/// core. Halo cells are recomputed by neighbouring blocks.
///
/// Computed and valid counts are per block lane: a tiled axis always charges
/// the full tile width and credits the core width, as a GPU block of fixed
/// size does even when it overhangs the domain edge.
pub fn run_sm_tiling(
    grid: &Grid,
    stencil: &StencilShape,
    params: &TilingParams,
) -> Result<(Grid, ExecutionTrace), EngineError> {
    if params.scheme != Scheme::SmTiling {
        return Err(EngineError::WrongScheme {
            expected: Scheme::SmTiling,
            got: params.scheme,
        });
    }
    let layout = validate_common(grid, stencil, params)?;
    check_cross("tile", &params.tile, &layout)?;
    let rad = stencil.radius();
    let halo = params.halo(rad);
    for (axis, &tile) in params.tile.iter().enumerate() {
        if tile < layout.ext[axis] && tile <= 2 * halo {
            return Err(EngineError::EmptyCore {
                axis,
                tile,
                t: params.t,
                halo,
            });
        }
    }
    let tile = per_axis(&params.tile, 1);
    let spans_a = tile_spans(layout.ext[0], tile[0], halo);
    let spans_b = tile_spans(layout.ext[1], tile[1], halo);
    let blocks: Vec<(TileSpan, TileSpan)> = spans_b
        .iter()
        .flat_map(|&b| spans_a.iter().map(move |&a| (a, b)))
        .collect();

    let taps = layout.taps(stencil);
    let rule = OnchipRule::new(stencil, &taps, &layout);
    let ns = layout.ext[2];
    let results = blocks
        .par_iter()
        .map(|&(sa, sb)| run_block(grid, &layout, &taps, rad, params, sa.load, sb.load, sa.core, sb.core))
        .collect::<Result<Vec<_>, MqError>>()?;

    let mut out = vec![0.0; grid.len()];
    let mut trace = ExecutionTrace::new(Scheme::SmTiling, params.t);
    let mut units = Vec::with_capacity(blocks.len());
    for ((sa, sb), res) in blocks.iter().zip(results) {
        let (ca, cb) = (sa.core, sb.core);
        let mut k = 0;
        for s in 0..ns {
            for b in cb.lo..cb.hi {
                for a in ca.lo..ca.hi {
                    out[layout.index(a, b, s)] = res.core[k];
                    k += 1;
                }
            }
        }
        let lanes = [lane(sa, tile[0], halo, false), lane(sb, tile[1], halo, false)];
        let core_lanes = [lane(sa, tile[0], halo, true), lane(sb, tile[1], halo, true)];
        let planes = (ns * params.t) as u64;
        let computed = (lanes[0] * lanes[1]) as u64 * planes;
        let valid = (core_lanes[0] * core_lanes[1]) as u64 * planes;
        let loads = (sa.load.len() * sb.load.len() * ns) as u64;
        let stores = (ca.len() * cb.len() * ns) as u64;
        trace.cells_computed += computed;
        trace.cells_valid += valid;
        trace.gm_loads += loads;
        trace.gm_stores += stores;
        trace.syncs.block += res.syncs;
        rule.charge(params.rst, lanes[0], lanes[1], planes, &mut trace.onchip_accesses);
        units.push(vec![
            Phase::new("load", loads),
            Phase::new("compute", computed),
            Phase::new("block_sync", res.syncs),
            Phase::new("store", stores),
        ]);
    }
    trace.blocks = blocks.len() as u64;
    trace.device_tiles = 0;
    trace.wall_phases = assemble_phases(units, params.prefetch);
    let out = Grid::from_cells(grid.extents(), out, grid.boundary())?;
    Ok((out, trace))
}

/// Lane count a block charges along one axis.
fn lane(span: &TileSpan, tile: usize, halo: usize, core: bool) -> usize {
    match (span.tiled, core) {
        (false, _) => span.load.len(),
        (true, false) => tile,
        (true, true) => tile - 2 * halo,
    }
}

struct BlockResult {
    core: Vec<f64>,
    syncs: u64,
}

#[allow(clippy::too_many_arguments)]
fn run_block(
    grid: &Grid,
    layout: &Layout,
    taps: &[CTap],
    rad: usize,
    params: &TilingParams,
    ra: Span,
    rb: Span,
    ca: Span,
    cb: Span,
) -> Result<BlockResult, MqError> {
    let mut mq = CircularMultiQueue::new(params.t, rad, params.variant, params.lazy, None, Vec::new())?;
    let mut k = PlaneKernel {
        input: grid.cells(),
        boundary: grid.boundary(),
        layout,
        taps,
        rad,
        ra,
        rb,
        ca,
        cb,
        core: Vec::with_capacity(ca.len() * cb.len() * layout.ext[2]),
    };
    let stats = mq.stream(layout.ext[2], &mut k)?;
    Ok(BlockResult {
        core: k.core,
        syncs: stats.syncs,
    })
}

struct PlaneKernel<'a> {
    input: &'a [f64],
    boundary: Boundary,
    layout: &'a Layout,
    taps: &'a [CTap],
    rad: usize,
    ra: Span,
    rb: Span,
    ca: Span,
    cb: Span,
    core: Vec<f64>,
}

impl StreamKernel<Vec<f64>> for PlaneKernel<'_> {
    fn load(&mut self, s: usize) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.ra.len() * self.rb.len());
        for b in self.rb.lo..self.rb.hi {
            for a in self.ra.lo..self.ra.hi {
                p.push(self.input[self.layout.index(a, b, s)]);
            }
        }
        p
    }

    fn pad(&mut self) -> Vec<f64> {
        Vec::new()
    }

    fn emit(&mut self, level: usize, s: usize, w: &StreamQueue<'_, Vec<f64>>) -> Result<Vec<f64>, MqError> {
        let under = || MqError::UnderFilled {
            level,
            fill: w.fill(),
            window: w.window(),
        };
        let center = w.get(self.rad).ok_or_else(under)?;
        let (wa, wb) = (self.ra.len(), self.rb.len());
        let frame_plane = s < self.rad || s + self.rad >= self.layout.ext[2];
        if frame_plane {
            return Ok(match self.boundary {
                Boundary::FixedValue => center.clone(),
                Boundary::SkipUpdate => vec![0.0; wa * wb],
            });
        }
        let planes = (0..w.window())
            .map(|i| w.get(i).ok_or_else(under))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = vec![0.0; wa * wb];
        for ib in 0..wb {
            for ia in 0..wa {
                let i = ia + wa * ib;
                let g = [self.ra.lo + ia, self.rb.lo + ib, s];
                if self.layout.in_frame(g, self.rad) {
                    out[i] = match self.boundary {
                        Boundary::FixedValue => center[i],
                        Boundary::SkipUpdate => 0.0,
                    };
                    continue;
                }
                out[i] = stencil_at(self.taps, &planes, self.rad, ia, ib, wa, wb);
            }
        }
        Ok(out)
    }

    fn store(&mut self, _s: usize, plane: Vec<f64>) {
        let wa = self.ra.len();
        for b in self.cb.lo..self.cb.hi {
            for a in self.ca.lo..self.ca.hi {
                self.core.push(plane[(a - self.ra.lo) + wa * (b - self.rb.lo)]);
            }
        }
    }
}

/// Tap-ordered sum at (ia, ib) of a region; NaN when a neighbour falls
/// outside the region, marking the cell as unresolved.
fn stencil_at(taps: &[CTap], planes: &[&Vec<f64>], rad: usize, ia: usize, ib: usize, wa: usize, wb: usize) -> f64 {
    let mut acc = 0.0;
    for t in taps {
        let na = ia as isize + t.d[0];
        let nb = ib as isize + t.d[1];
        if na < 0 || nb < 0 || na >= wa as isize || nb >= wb as isize {
            return f64::NAN;
        }
        let p = planes[(rad as isize + t.d[2]) as usize];
        acc += t.coeff * p[na as usize + wa * nb as usize];
    }
    acc
}
