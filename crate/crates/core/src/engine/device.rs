use rayon::prelude::*;

use super::layout::{check_cross, per_axis, tile_spans, CTap, Layout, Span, TileSpan};
use super::params::{EngineError, Scheme, TilingParams};
use super::trace::{assemble_phases, ExecutionTrace, Phase};
use super::{validate_common, OnchipRule};
use crate::stencil::{Boundary, Grid, StencilShape};

/// Axis-aligned cross-section rectangle; the stream axis is always whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rect {
    a: Span,
    b: Span,
}

impl Rect {
    fn cells(&self) -> usize {
        self.a.len() * self.b.len()
    }

    fn is_empty(&self) -> bool {
        self.a.hi <= self.a.lo || self.b.hi <= self.b.lo
    }

    fn contains(&self, a: usize, b: usize) -> bool {
        (self.a.lo..self.a.hi).contains(&a) && (self.b.lo..self.b.hi).contains(&b)
    }

    fn intersect(&self, o: &Rect) -> Rect {
        let s = |x: Span, y: Span| {
            let lo = x.lo.max(y.lo);
            Span {
                lo,
                hi: x.hi.min(y.hi).max(lo),
            }
        };
        Rect {
            a: s(self.a, o.a),
            b: s(self.b, o.b),
        }
    }

    /// Grown by `w` per side, clipped to `[0, n)` per axis.
    fn grow(&self, w: usize, n: [usize; 2]) -> Rect {
        Rect {
            a: Span {
                lo: self.a.lo.saturating_sub(w),
                hi: (self.a.hi + w).min(n[0]),
            },
            b: Span {
                lo: self.b.lo.saturating_sub(w),
                hi: (self.b.hi + w).min(n[1]),
            },
        }
    }

    /// Up to four disjoint rectangles covering `self` minus `inner`.
    fn minus(&self, inner: &Rect) -> Vec<Rect> {
        let inner = inner.intersect(self);
        if inner.is_empty() {
            return vec![*self];
        }
        let parts = [
            Rect {
                a: self.a,
                b: Span {
                    lo: self.b.lo,
                    hi: inner.b.lo,
                },
            },
            Rect {
                a: self.a,
                b: Span {
                    lo: inner.b.hi,
                    hi: self.b.hi,
                },
            },
            Rect {
                a: Span {
                    lo: self.a.lo,
                    hi: inner.a.lo,
                },
                b: inner.b,
            },
            Rect {
                a: Span {
                    lo: inner.a.hi,
                    hi: self.a.hi,
                },
                b: inner.b,
            },
        ];
        parts.into_iter().filter(|r| !r.is_empty()).collect()
    }
}

/// A block's resident tile: the cells it owns plus a ring received from its
/// neighbours, over the whole stream axis.
struct Block {
    own: Rect,
    ext: Rect,
    buf: Vec<f64>,
}

impl Block {
    fn at(&self, a: usize, b: usize, s: usize) -> usize {
        (a - self.ext.a.lo) + self.ext.a.len() * ((b - self.ext.b.lo) + self.ext.b.len() * s)
    }
}

/// Staging buffer standing in for global memory, covering one device tile.
struct Staging {
    region: Rect,
    data: Vec<f64>,
}

impl Staging {
    fn at(&self, a: usize, b: usize, s: usize) -> usize {
        (a - self.region.a.lo) + self.region.a.len() * ((b - self.region.b.lo) + self.region.b.len() * s)
    }
}

struct Ctx<'a> {
    layout: &'a Layout,
    taps: &'a [CTap],
    rad: usize,
    boundary: Boundary,
    ns: usize,
    transpose: bool,
}

impl Ctx<'_> {
    /// New values for every cell of `rect` (row-major a, b, s) from the
    /// block's buffer.
    fn update(&self, blk: &Block, rect: &Rect) -> Vec<f64> {
        let mut out = Vec::with_capacity(rect.cells() * self.ns);
        for s in 0..self.ns {
            for b in rect.b.lo..rect.b.hi {
                for a in rect.a.lo..rect.a.hi {
                    if self.layout.in_frame([a, b, s], self.rad) {
                        out.push(match self.boundary {
                            Boundary::FixedValue => blk.buf[blk.at(a, b, s)],
                            Boundary::SkipUpdate => 0.0,
                        });
                        continue;
                    }
                    let mut acc = 0.0;
                    for t in self.taps {
                        let na = (a as isize + t.d[0]) as usize;
                        let nb = (b as isize + t.d[1]) as usize;
                        let nsi = (s as isize + t.d[2]) as usize;
                        acc += t.coeff * blk.buf[blk.at(na, nb, nsi)];
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    fn write_back(&self, blk: &mut Block, rect: &Rect, vals: &[f64]) {
        let mut k = 0;
        for s in 0..self.ns {
            for b in rect.b.lo..rect.b.hi {
                for a in rect.a.lo..rect.a.hi {
                    let i = blk.at(a, b, s);
                    blk.buf[i] = vals[k];
                    k += 1;
                }
            }
        }
    }

    fn transactions(&self, r: &Rect) -> u64 {
        let ns = self.ns as u64;
        if self.transpose {
            (r.cells() as u64 * ns).div_ceil(32)
        } else {
            r.b.len() as u64 * ns * (r.a.len() as u64).div_ceil(32)
        }
    }
}

/// Device-level tiling: a grid of blocks keeps one device tile resident and
/// exchanges halos through a staging buffer separated by device barriers.
///
/// Without lazy streaming every time step runs update, block sync, halo push,
/// device barrier, swap, halo pull and block sync. With lazy streaming the
/// blocks exchange a `rad*t` ring once behind a single barrier and then run
/// `t` local steps, recomputing the ring redundantly.
pub fn run_device_tiling(
    grid: &Grid,
    stencil: &StencilShape,
    params: &TilingParams,
) -> Result<(Grid, ExecutionTrace), EngineError> {
    if params.scheme != Scheme::DeviceTiling {
        return Err(EngineError::WrongScheme {
            expected: Scheme::DeviceTiling,
            got: params.scheme,
        });
    }
    let layout = validate_common(grid, stencil, params)?;
    check_cross("tile", &params.tile, &layout)?;
    check_cross("device_tile_grid", &params.device_tile_grid, &layout)?;
    let rad = stencil.radius();
    let halo = params.halo(rad);
    let tile = per_axis(&params.tile, 1);
    let nblk = per_axis(&params.device_tile_grid, 1);
    let n = [layout.ext[0], layout.ext[1]];
    for axis in 0..layout.cross_dims() {
        let width = nblk[axis] * tile[axis];
        if width >= n[axis] {
            if (nblk[axis] - 1) * tile[axis] >= n[axis] {
                return Err(EngineError::GridInconsistent {
                    grid: params.device_tile_grid.clone(),
                    tile: params.tile.clone(),
                    extents: layout.cross_extents(),
                    axis,
                    block: nblk[axis] - 1,
                });
            }
        } else if width <= 2 * halo {
            return Err(EngineError::EmptyCore {
                axis,
                tile: width,
                t: params.t,
                halo,
            });
        }
    }
    let spans_a = tile_spans(n[0], nblk[0] * tile[0], halo);
    let spans_b = tile_spans(n[1], nblk[1] * tile[1], halo);
    let taps = layout.taps(stencil);
    let rule = OnchipRule::new(stencil, &taps, &layout);
    let ctx = Ctx {
        layout: &layout,
        taps: &taps,
        rad,
        boundary: grid.boundary(),
        ns: layout.ext[2],
        transpose: params.transpose_halo,
    };

    let mut out = vec![0.0; grid.len()];
    let mut trace = ExecutionTrace::new(Scheme::DeviceTiling, params.t);
    let mut units = Vec::new();
    for db in &spans_b {
        for da in &spans_a {
            let phases = device_tile(grid, &ctx, &rule, params, [da, db], tile, nblk, n, &mut out, &mut trace);
            units.push(phases);
        }
    }
    trace.wall_phases = assemble_phases(units, params.prefetch);
    let out = Grid::from_cells(grid.extents(), out, grid.boundary())?;
    Ok((out, trace))
}

#[allow(clippy::too_many_arguments)]
fn device_tile(
    grid: &Grid,
    ctx: &Ctx<'_>,
    rule: &OnchipRule,
    params: &TilingParams,
    spans: [&TileSpan; 2],
    tile: [usize; 2],
    nblk: [usize; 2],
    n: [usize; 2],
    out: &mut [f64],
    trace: &mut ExecutionTrace,
) -> Vec<Phase> {
    let ns = ctx.ns;
    let t = params.t;
    let rad = ctx.rad;
    let region = Rect {
        a: spans[0].load,
        b: spans[1].load,
    };
    let core = Rect {
        a: spans[0].core,
        b: spans[1].core,
    };
    let ring = if params.lazy { rad * t } else { rad };
    let input = grid.cells();
    let layout = ctx.layout;

    let mut blocks = Vec::new();
    for j in 0..nblk[1] {
        for i in 0..nblk[0] {
            let nominal = |axis: usize, k: usize| {
                let lo = (spans[axis].start + (k * tile[axis]) as isize).max(0) as usize;
                let hi = (spans[axis].start + ((k + 1) * tile[axis]) as isize).max(0) as usize;
                Span { lo, hi: hi.max(lo) }
            };
            let own = Rect {
                a: nominal(0, i),
                b: nominal(1, j),
            }
            .intersect(&region);
            if own.is_empty() {
                continue;
            }
            let ext = own.grow(ring, n);
            let mut buf = vec![f64::NAN; ext.cells() * ns];
            let mut blk = Block {
                own,
                ext,
                buf: Vec::new(),
            };
            for s in 0..ns {
                for b in ext.b.lo..ext.b.hi {
                    for a in ext.a.lo..ext.a.hi {
                        let from_input = own.contains(a, b) || (!params.lazy && region.contains(a, b));
                        if from_input {
                            buf[blk.at(a, b, s)] = input[layout.index(a, b, s)];
                        }
                    }
                }
            }
            blk.buf = buf;
            blocks.push(blk);
        }
    }
    let nb = blocks.len() as u64;
    trace.blocks += nb;
    trace.device_tiles += 1;

    let mut staging = Staging {
        region,
        data: vec![f64::NAN; region.cells() * ns],
    };
    let mut phases = Vec::new();
    let loads: u64 = blocks
        .iter()
        .map(|b| {
            let src = if params.lazy { b.own } else { b.ext.intersect(&region) };
            (src.cells() * ns) as u64
        })
        .sum();
    trace.gm_loads += loads;
    phases.push(Phase::new("load", loads));

    // Strips each block publishes: its own cells within `ring` of a side that
    // faces another block of this device tile.
    let push_rects = |blk: &Block| -> Vec<Rect> {
        let side = |lo: usize, hi: usize, rlo: usize, rhi: usize| Span {
            lo: if lo == rlo { lo } else { lo + ring },
            hi: if hi == rhi { hi } else { hi.saturating_sub(ring) },
        };
        let inner = Rect {
            a: side(blk.own.a.lo, blk.own.a.hi, region.a.lo, region.a.hi),
            b: side(blk.own.b.lo, blk.own.b.hi, region.b.lo, region.b.hi),
        };
        blk.own.minus(&inner)
    };
    let pull_rects = |blk: &Block| blk.ext.intersect(&region).minus(&blk.own);

    let exchange =
        |blocks: &mut Vec<Block>, staging: &mut Staging, trace: &mut ExecutionTrace, phases: &mut Vec<Phase>| {
            let mut pushed = 0u64;
            for blk in blocks.iter() {
                for r in push_rects(blk) {
                    for s in 0..ns {
                        for b in r.b.lo..r.b.hi {
                            for a in r.a.lo..r.a.hi {
                                let i = staging.at(a, b, s);
                                staging.data[i] = blk.buf[blk.at(a, b, s)];
                            }
                        }
                    }
                    pushed += (r.cells() * ns) as u64;
                    trace.halo_transactions += ctx.transactions(&r);
                }
            }
            trace.halo_pushes += pushed;
            phases.push(Phase::new("push_halo", pushed));
            trace.syncs.device += 1;
            phases.push(Phase::new("device_sync", 1));
            pushed
        };
    let pull = |blocks: &mut Vec<Block>, staging: &Staging, trace: &mut ExecutionTrace, phases: &mut Vec<Phase>| {
        let mut pulled = 0u64;
        for blk in blocks.iter_mut() {
            for r in pull_rects(blk) {
                for s in 0..ns {
                    for b in r.b.lo..r.b.hi {
                        for a in r.a.lo..r.a.hi {
                            let i = blk.at(a, b, s);
                            blk.buf[i] = staging.data[staging.at(a, b, s)];
                        }
                    }
                }
                pulled += (r.cells() * ns) as u64;
                trace.halo_transactions += ctx.transactions(&r);
            }
        }
        trace.halo_pulls += pulled;
        phases.push(Phase::new("pull_halo", pulled));
    };
    let block_sync = |trace: &mut ExecutionTrace, phases: &mut Vec<Phase>| {
        trace.syncs.block += nb;
        phases.push(Phase::new("block_sync", nb));
    };

    if params.lazy {
        exchange(&mut blocks, &mut staging, trace, &mut phases);
        pull(&mut blocks, &staging, trace, &mut phases);
        block_sync(trace, &mut phases);
        for step in 1..=t {
            let grow = rad * (t - step);
            let rects: Vec<Rect> = blocks.iter().map(|b| b.own.grow(grow, n).intersect(&b.ext)).collect();
            let news: Vec<Vec<f64>> = blocks.par_iter().zip(&rects).map(|(b, r)| ctx.update(b, r)).collect();
            let mut cells = 0u64;
            for ((blk, r), v) in blocks.iter_mut().zip(&rects).zip(news) {
                ctx.write_back(blk, r, &v);
                cells += (r.cells() * ns) as u64;
                rule.charge(params.rst, r.a.len(), r.b.len(), ns as u64, &mut trace.onchip_accesses);
            }
            trace.cells_computed += cells;
            phases.push(Phase::new("update", cells));
            block_sync(trace, &mut phases);
        }
    } else {
        for _ in 0..t {
            let news: Vec<Vec<f64>> = blocks.par_iter().map(|b| ctx.update(b, &b.own)).collect();
            let cells: u64 = blocks.iter().map(|b| (b.own.cells() * ns) as u64).sum();
            for b in &blocks {
                rule.charge(
                    params.rst,
                    b.own.a.len(),
                    b.own.b.len(),
                    ns as u64,
                    &mut trace.onchip_accesses,
                );
            }
            trace.cells_computed += cells;
            phases.push(Phase::new("update", cells));
            block_sync(trace, &mut phases);
            // Push reads the new values, so stage them in a scratch copy first.
            let mut staged: Vec<Block> = blocks
                .iter()
                .zip(&news)
                .map(|(b, v)| {
                    let mut c = Block {
                        own: b.own,
                        ext: b.ext,
                        buf: b.buf.clone(),
                    };
                    ctx.write_back(&mut c, &b.own, v);
                    c
                })
                .collect();
            exchange(&mut staged, &mut staging, trace, &mut phases);
            for (b, v) in blocks.iter_mut().zip(&news) {
                let own = b.own;
                ctx.write_back(b, &own, v);
            }
            phases.push(Phase::new("swap", cells));
            pull(&mut blocks, &staging, trace, &mut phases);
            block_sync(trace, &mut phases);
        }
    }

    let mut stores = 0u64;
    for blk in &blocks {
        let keep = blk.own.intersect(&core);
        for s in 0..ns {
            for b in keep.b.lo..keep.b.hi {
                for a in keep.a.lo..keep.a.hi {
                    out[layout.index(a, b, s)] = blk.buf[blk.at(a, b, s)];
                }
            }
        }
        stores += (keep.cells() * ns) as u64;
    }
    trace.gm_stores += stores;
    trace.cells_valid += stores * t as u64;
    phases.push(Phase::new("store", stores));
    phases
}
