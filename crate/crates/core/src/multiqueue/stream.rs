use serde::Serialize;

use super::{CircularMultiQueue, MqError, StreamQueue, Variant};
use crate::stencil::{Boundary, Grid, StencilShape};

/// Callbacks that give meaning to the elements flowing through a pipeline.
pub trait StreamKernel<T> {
    /// Input element `index` of the stream.
    fn load(&mut self, index: usize) -> T;
    /// Filler pushed once the input (or an upstream level) is exhausted.
    fn pad(&mut self) -> T;
    /// Produces element `center` of time step `level + 1` from the window of
    /// step `level`. Windows near the stream ends may be partial.
    fn emit(&mut self, level: usize, center: usize, window: &StreamQueue<'_, T>) -> Result<T, MqError>;
    /// Receives the final time step's element `center`.
    fn store(&mut self, center: usize, value: T);
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StreamStats {
    pub cycles: u64,
    pub shuffles: u64,
    pub syncs: u64,
    pub emitted: Vec<u64>,
}

impl<T: Clone> CircularMultiQueue<T> {
    /// Streams `len` elements through every level.
    ///
    /// Naive mode enqueues, computes and synchronises level by level, so each
    /// cycle costs `depth` barriers. Lazy mode lets every level compute from
    /// the previous cycle's windows and then enqueues all results, costing
    /// one barrier per cycle.
    pub fn stream<K: StreamKernel<T>>(&mut self, len: usize, kernel: &mut K) -> Result<StreamStats, MqError> {
        let depth = self.depth;
        let rad = self.rad;
        let lag = if self.lazy { rad + 1 } else { rad };
        let cycles = len + depth * lag;
        let mut stats = StreamStats {
            emitted: vec![0; depth],
            ..Default::default()
        };
        let center = |k: usize, s: usize| k.checked_sub((s + 1) * lag);
        for k in 0..cycles {
            if self.lazy {
                let mut out: Vec<Option<T>> = Vec::with_capacity(depth);
                for s in 0..depth {
                    out.push(match center(k, s) {
                        Some(c) if c < len => {
                            stats.emitted[s] += 1;
                            Some(kernel.emit(s, c, &self.queue(s)?)?)
                        }
                        Some(_) => Some(kernel.pad()),
                        None => None,
                    });
                }
                let input = if k < len { kernel.load(k) } else { kernel.pad() };
                self.enqueue(0, input)?;
                for (s, v) in out.into_iter().enumerate() {
                    let Some(v) = v else { continue };
                    if s + 1 < depth {
                        self.enqueue(s + 1, v)?;
                    } else if let Some(c) = center(k, s).filter(|&c| c < len) {
                        kernel.store(c, v);
                    }
                }
                stats.syncs += 1;
            } else {
                let input = if k < len { kernel.load(k) } else { kernel.pad() };
                self.enqueue(0, input)?;
                stats.syncs += 1;
                for s in 0..depth {
                    let Some(c) = center(k, s) else { break };
                    let v = if c < len {
                        stats.emitted[s] += 1;
                        kernel.emit(s, c, &self.queue(s)?)?
                    } else {
                        kernel.pad()
                    };
                    if s + 1 < depth {
                        self.enqueue(s + 1, v)?;
                        stats.syncs += 1;
                    } else if c < len {
                        kernel.store(c, v);
                    }
                }
            }
            self.shuffle();
            stats.cycles += 1;
        }
        stats.shuffles = stats.cycles;
        Ok(stats)
    }
}

struct Line<'a> {
    input: &'a [f64],
    out: Vec<f64>,
    stencil: &'a StencilShape,
    boundary: Boundary,
}

impl StreamKernel<f64> for Line<'_> {
    fn load(&mut self, index: usize) -> f64 {
        self.input[index]
    }

    fn pad(&mut self) -> f64 {
        f64::NAN
    }

    fn emit(&mut self, level: usize, center: usize, w: &StreamQueue<'_, f64>) -> Result<f64, MqError> {
        let r = self.stencil.radius();
        if center < r || center + r >= self.input.len() {
            return Ok(match self.boundary {
                Boundary::FixedValue => *w.get(r).ok_or(MqError::UnderFilled {
                    level,
                    fill: w.fill(),
                    window: w.window(),
                })?,
                Boundary::SkipUpdate => 0.0,
            });
        }
        if !w.is_full() {
            return Err(MqError::UnderFilled {
                level,
                fill: w.fill(),
                window: w.window(),
            });
        }
        let mut acc = 0.0;
        for tap in self.stencil.taps() {
            let i = (r as i32 + tap.offset[0]) as usize;
            acc += tap.coeff * w.get(i).expect("full window");
        }
        Ok(acc)
    }

    fn store(&mut self, center: usize, value: f64) {
        self.out[center] = value;
    }
}

/// Runs `depth` steps of a 1-D stencil over the whole grid in one streamed
/// pass through a multi-queue.
pub fn pipeline_1d(
    grid: &Grid,
    stencil: &StencilShape,
    depth: usize,
    variant: Variant,
    lazy: bool,
) -> Result<(Grid, StreamStats), MqError> {
    if stencil.dims() != 1 {
        return Err(MqError::NotOneDimensional(stencil.dims()));
    }
    crate::stencil::reference_step(grid, stencil)?;
    let mut mq = CircularMultiQueue::new(depth, stencil.radius(), variant, lazy, None, f64::NAN)?;
    let mut kernel = Line {
        input: grid.cells(),
        out: vec![0.0; grid.len()],
        stencil,
        boundary: grid.boundary(),
    };
    let stats = mq.stream(grid.len(), &mut kernel)?;
    let out = Grid::from_cells(grid.extents(), kernel.out, grid.boundary())?;
    Ok((out, stats))
}
