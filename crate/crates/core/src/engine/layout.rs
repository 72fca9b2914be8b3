//! Canonical (a, b, s) view of a grid: `s` is the streamed axis, `a` and `b`
//! the cross-section axes in increasing order. Missing axes have extent 1 and
//! stride 0.

use super::params::{EngineError, TilingParams};
use crate::stencil::{Grid, StencilShape};

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub ext: [usize; 3],
    pub stride: [usize; 3],
    pub real: [bool; 3],
    /// Original axis behind each canonical slot.
    pub axis: [Option<usize>; 3],
}

/// A stencil tap in canonical coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CTap {
    pub d: [isize; 3],
    pub coeff: f64,
}

impl Layout {
    pub fn new(grid: &Grid, params: &TilingParams) -> Result<Self, EngineError> {
        let dims = grid.dims();
        let stream = params.stream_axis.unwrap_or(dims - 1);
        if stream >= dims {
            return Err(EngineError::BadStreamAxis { axis: stream, dims });
        }
        let e = grid.extents();
        let mut strides = [1usize; 3];
        for i in 1..dims {
            strides[i] = strides[i - 1] * e[i - 1];
        }
        let cross: Vec<usize> = (0..dims).filter(|&d| d != stream).collect();
        let mut axis = [None; 3];
        for (slot, &d) in cross.iter().enumerate() {
            axis[slot] = Some(d);
        }
        axis[2] = Some(stream);
        let mut out = Layout {
            ext: [1; 3],
            stride: [0; 3],
            real: [false; 3],
            axis,
        };
        for c in 0..3 {
            if let Some(d) = axis[c] {
                out.ext[c] = e[d];
                out.stride[c] = strides[d];
                out.real[c] = true;
            }
        }
        Ok(out)
    }

    /// Number of cross-section axes (grid dims minus the stream axis).
    pub fn cross_dims(&self) -> usize {
        self.real[..2].iter().filter(|&&r| r).count()
    }

    pub fn cross_extents(&self) -> Vec<usize> {
        (0..self.cross_dims()).map(|c| self.ext[c]).collect()
    }

    pub fn index(&self, a: usize, b: usize, s: usize) -> usize {
        a * self.stride[0] + b * self.stride[1] + s * self.stride[2]
    }

    pub fn in_frame(&self, p: [usize; 3], rad: usize) -> bool {
        (0..3).any(|c| self.real[c] && (p[c] < rad || p[c] + rad >= self.ext[c]))
    }

    pub fn taps(&self, stencil: &StencilShape) -> Vec<CTap> {
        stencil
            .taps()
            .iter()
            .map(|t| {
                let mut d = [0isize; 3];
                for c in 0..3 {
                    if let Some(ax) = self.axis[c] {
                        d[c] = t.offset[ax] as isize;
                    }
                }
                CTap { d, coeff: t.coeff }
            })
            .collect()
    }
}

/// Half-open interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }
}

/// One tile along one axis: the cells it loads (clipped to the domain), the
/// cells whose results it owns, and where its unclipped load window starts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TileSpan {
    pub load: Span,
    pub core: Span,
    pub start: isize,
    pub tiled: bool,
}

/// Overlapped decomposition of `[0, n)` into windows of `width` whose cores
/// are `width - 2*halo` wide. A window at least as wide as the axis leaves it
/// untiled.
pub(crate) fn tile_spans(n: usize, width: usize, halo: usize) -> Vec<TileSpan> {
    if width >= n {
        let all = Span { lo: 0, hi: n };
        return vec![TileSpan {
            load: all,
            core: all,
            start: 0,
            tiled: false,
        }];
    }
    let core = width - 2 * halo;
    (0..n.div_ceil(core))
        .map(|k| {
            let lo = k * core;
            let hi = (lo + core).min(n);
            TileSpan {
                load: Span {
                    lo: lo.saturating_sub(halo),
                    hi: (hi + halo).min(n),
                },
                core: Span { lo, hi },
                start: lo as isize - halo as isize,
                tiled: true,
            }
        })
        .collect()
}

/// Checks cross-section arity and positivity of `values`.
pub(crate) fn check_cross(what: &'static str, values: &[usize], layout: &Layout) -> Result<(), EngineError> {
    if values.len() != layout.cross_dims() {
        return Err(EngineError::CrossSectionArity {
            what,
            expected: layout.cross_dims(),
            got: values.len(),
        });
    }
    if values.contains(&0) {
        return Err(EngineError::ZeroExtent { what });
    }
    Ok(())
}

/// Per-canonical-axis value, padding missing cross axes with `pad`.
pub(crate) fn per_axis(values: &[usize], pad: usize) -> [usize; 2] {
    [
        values.first().copied().unwrap_or(pad),
        values.get(1).copied().unwrap_or(pad),
    ]
}
