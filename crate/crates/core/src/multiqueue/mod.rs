//! Circular multi-queue: one shared ring holding the sliding windows of every
//! time step of a streamed pipeline.
//!
//! Level `s` owns a window of `2*rad + 1` consecutive slots. The slot that
//! receives level `s+1`'s newest value is level `s`'s head, so a value moves
//! to the next time step without being copied. Advancing the pipeline by one
//! cell either shifts the data (shifting-data) or moves every head by one
//! slot (shifting-address with a conditional wrap, computing-address with a
//! power-of-two mask).
//!
//! In lazy mode every level reads its window before any level writes, so one
//! barrier per streamed cell suffices. Each queue then needs one extra slot
//! and the levels sit one slot further apart.

mod dump;
mod stream;

pub use dump::{parse_dump_line, validate_dump, DumpRecord};
pub use stream::{pipeline_1d, StreamKernel, StreamStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ShiftingData,
    ShiftingAddress,
    ComputingAddress,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::ShiftingData,
        Variant::ShiftingAddress,
        Variant::ComputingAddress,
    ];
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MqError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("radius must be at least 1")]
    ZeroRadius,
    #[error("lazy capacity {capacity} is below the minimum range {minimum}")]
    LazyCapacity { capacity: usize, minimum: usize },
    #[error("level {level} out of range for depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("window at level {level} holds {fill} of {window} values")]
    UnderFilled { level: usize, fill: usize, window: usize },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("stencil error: {0}")]
    Stencil(#[from] crate::stencil::StencilError),
    #[error("pipeline needs a 1-D stencil, got {0}-D")]
    NotOneDimensional(usize),
}

/// `a mod r`, through a mask when `r` is a power of two.
pub fn masked_mod(a: usize, r: usize) -> usize {
    debug_assert!(r >= 1);
    if r.is_power_of_two() {
        a & (r - 1)
    } else {
        a % r
    }
}

/// Smallest ring that holds a pipeline of `depth` levels.
pub fn minimum_range(depth: usize, rad: usize, lazy: bool) -> usize {
    let (spacing, slots) = geometry(rad, lazy);
    spacing * (depth - 1) + slots
}

/// (level spacing, slots per queue).
fn geometry(rad: usize, lazy: bool) -> (usize, usize) {
    let w = 2 * rad + 1;
    if lazy {
        (w, w + 1)
    } else {
        (w - 1, w)
    }
}

/// Read-only view of one level's queue.
#[derive(Debug)]
pub struct StreamQueue<'a, T> {
    backing: &'a [T],
    head: usize,
    tail: usize,
    window: usize,
    fill: usize,
}

impl<'a, T> StreamQueue<'a, T> {
    pub fn head(&self) -> usize {
        self.head
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn fill(&self) -> usize {
        self.fill
    }

    pub fn is_full(&self) -> bool {
        self.fill == self.window
    }

    /// Element `i` of the window (0 = oldest), or `None` when that slot has not
    /// been written since the stream started.
    pub fn get(&self, i: usize) -> Option<&'a T> {
        if i >= self.window || i < self.window - self.fill {
            return None;
        }
        let r = self.backing.len();
        let p = self.head + i;
        Some(&self.backing[if p >= r { p - r } else { p }])
    }
}

impl StreamQueue<'_, f64> {
    /// Weighted sum over the window, oldest element first.
    pub fn compute(&self, coeffs: &[f64], level: usize) -> Result<f64, MqError> {
        if coeffs.len() != self.window {
            return Err(MqError::CoefficientCount {
                expected: self.window,
                got: coeffs.len(),
            });
        }
        if !self.is_full() {
            return Err(MqError::UnderFilled {
                level,
                fill: self.fill,
                window: self.window,
            });
        }
        let mut acc = 0.0;
        for (i, c) in coeffs.iter().enumerate() {
            acc += c * self.get(i).expect("full window");
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone)]
pub struct CircularMultiQueue<T> {
    data: Vec<T>,
    depth: usize,
    rad: usize,
    window: usize,
    slots: usize,
    spacing: usize,
    range: usize,
    variant: Variant,
    lazy: bool,
    heads: Vec<usize>,
    fill: Vec<usize>,
    written: Vec<bool>,
    shuffles: u64,
    dump: Option<Vec<String>>,
}

impl<T: Clone> CircularMultiQueue<T> {
    /// `blank` initialises every slot; it is never observable through a full
    /// window.
    pub fn new(
        depth: usize,
        rad: usize,
        variant: Variant,
        lazy: bool,
        lazy_capacity: Option<usize>,
        blank: T,
    ) -> Result<Self, MqError> {
        if depth == 0 {
            return Err(MqError::ZeroDepth);
        }
        if rad == 0 {
            return Err(MqError::ZeroRadius);
        }
        let (spacing, slots) = geometry(rad, lazy);
        let minimum = minimum_range(depth, rad, lazy);
        let wanted = match (lazy, lazy_capacity) {
            (true, Some(c)) if c < minimum => return Err(MqError::LazyCapacity { capacity: c, minimum }),
            (true, Some(c)) => c,
            _ => minimum,
        };
        let range = match variant {
            Variant::ComputingAddress => wanted.next_power_of_two(),
            _ => wanted,
        };
        let heads = (0..depth)
            .map(|s| match variant {
                Variant::ShiftingData => range - slots - spacing * s,
                // Same layout rotated one slot right, so the newest slot of
                // level 0 wraps to index 0 as in the masked formulation.
                _ => range - spacing * (s + 1),
            })
            .collect();
        Ok(Self {
            data: vec![blank; range],
            depth,
            rad,
            window: 2 * rad + 1,
            slots,
            spacing,
            range,
            variant,
            lazy,
            heads,
            fill: vec![0; depth],
            written: vec![false; depth],
            shuffles: 0,
            dump: None,
        })
    }

    /// Starts recording one debug line per shuffle.
    pub fn enable_dump(&mut self) {
        self.dump = Some(Vec::new());
    }

    pub fn dump_lines(&self) -> &[String] {
        self.dump.as_deref().unwrap_or(&[])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn radius(&self) -> usize {
        self.rad
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn queue_spacing(&self) -> usize {
        self.spacing
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn fills(&self) -> &[usize] {
        &self.fill
    }

    pub fn shuffles(&self) -> u64 {
        self.shuffles
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    fn slot(&self, level: usize, i: usize) -> usize {
        let p = self.heads[level] + i;
        match self.variant {
            Variant::ShiftingData => p,
            Variant::ShiftingAddress => {
                if p >= self.range {
                    p - self.range
                } else {
                    p
                }
            }
            Variant::ComputingAddress => p & (self.range - 1),
        }
    }

    fn check_level(&self, level: usize) -> Result<(), MqError> {
        if level >= self.depth {
            return Err(MqError::LevelOutOfRange {
                level,
                depth: self.depth,
            });
        }
        Ok(())
    }

    pub fn queue(&self, level: usize) -> Result<StreamQueue<'_, T>, MqError> {
        self.check_level(level)?;
        Ok(StreamQueue {
            backing: &self.data,
            head: self.slot(level, 0),
            tail: self.slot(level, self.slots - 1),
            window: self.window,
            fill: self.fill[level],
        })
    }

    /// Writes `value` into the tail slot of `level`.
    pub fn enqueue(&mut self, level: usize, value: T) -> Result<(), MqError> {
        self.check_level(level)?;
        let tail = self.slot(level, self.slots - 1);
        self.data[tail] = value;
        if !self.lazy {
            self.fill[level] = (self.fill[level] + 1).min(self.window);
        }
        self.written[level] = true;
        Ok(())
    }

    /// Advances every queue by one slot.
    pub fn shuffle(&mut self) {
        let r = self.range;
        match self.variant {
            Variant::ShiftingData => {
                self.data.rotate_left(1);
                if r >= 2 {
                    self.data[r - 1] = self.data[r - 2].clone();
                }
            }
            Variant::ShiftingAddress => {
                for h in &mut self.heads {
                    *h += 1;
                    if *h == r {
                        *h = 0;
                    }
                }
            }
            Variant::ComputingAddress => {
                for h in &mut self.heads {
                    *h = (*h + 1) & (r - 1);
                }
            }
        }
        for (f, w) in self.fill.iter_mut().zip(&mut self.written) {
            *f = match (self.lazy, *w) {
                (_, false) => 0,
                (false, true) => (*f).min(self.window - 1),
                (true, true) => (*f + 1).min(self.window),
            };
            *w = false;
        }
        self.shuffles += 1;
        if let Some(lines) = &mut self.dump {
            lines.push(dump::format_line(self.shuffles, r, &self.heads, &self.fill));
        }
    }
}

impl CircularMultiQueue<f64> {
    pub fn compute(&self, level: usize, coeffs: &[f64]) -> Result<f64, MqError> {
        self.queue(level)?.compute(coeffs, level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn mq(depth: usize, rad: usize, v: Variant, lazy: bool, cap: Option<usize>) -> CircularMultiQueue<f64> {
        CircularMultiQueue::new(depth, rad, v, lazy, cap, 0.0).unwrap()
    }

    #[test]
    fn ranges_for_depth_three_radius_one() {
        assert_eq!(mq(3, 1, Variant::ShiftingData, false, None).range(), 7);
        assert_eq!(mq(3, 1, Variant::ShiftingAddress, false, None).range(), 7);
        assert_eq!(mq(3, 1, Variant::ComputingAddress, false, None).range(), 8);
        let lazy = mq(3, 1, Variant::ShiftingData, true, Some(16));
        assert_eq!((lazy.range(), lazy.queue_spacing()), (16, 3));
    }

    #[test]
    fn lazy_capacity_below_minimum_is_rejected() {
        let err = CircularMultiQueue::new(3, 1, Variant::ShiftingData, true, Some(6), 0.0).unwrap_err();
        assert_eq!(
            err,
            MqError::LazyCapacity {
                capacity: 6,
                minimum: 10
            }
        );
    }

    #[test]
    fn masked_mod_small_cases() {
        assert_eq!(masked_mod(9, 8), 1);
        assert_eq!(masked_mod(7, 8), 7);
        assert_eq!(masked_mod(9, 7), 2);
    }

    #[test]
    fn masked_mod_matches_remainder() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..1000 {
            let k = rng.next_u64() as usize;
            let n = rng.below(20) as u32;
            assert_eq!(masked_mod(k, 1 << n), k % (1 << n));
        }
    }

    #[test]
    fn shifting_data_shuffle_moves_elements() {
        let mut q = mq(3, 1, Variant::ShiftingData, false, None);
        q.data = (1..=7).map(f64::from).collect();
        q.shuffle();
        assert_eq!(q.data(), &[2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 7.0]);
    }

    #[test]
    fn computing_address_heads_advance_and_cycle() {
        let mut q = mq(3, 1, Variant::ComputingAddress, false, None);
        assert_eq!(q.heads(), &[6, 4, 2]);
        q.shuffle();
        assert_eq!(q.heads(), &[7, 5, 3]);
        for _ in 0..7 {
            q.shuffle();
        }
        assert_eq!(q.heads(), &[6, 4, 2]);
    }

    #[test]
    fn compute_sums_the_window() {
        let mut q = mq(1, 1, Variant::ShiftingData, false, None);
        for v in [1.0, 2.0, 3.0] {
            q.enqueue(0, v).unwrap();
            if v < 3.0 {
                assert!(matches!(q.compute(0, &[1.0; 3]), Err(MqError::UnderFilled { .. })));
                q.shuffle();
            }
        }
        assert_eq!(q.compute(0, &[1.0, 1.0, 1.0]).unwrap(), 6.0);
    }

    #[test]
    fn enqueue_then_read_sees_the_value() {
        for v in Variant::ALL {
            let mut q = mq(2, 1, v, false, None);
            q.enqueue(1, 42.0).unwrap();
            assert_eq!(q.queue(1).unwrap().get(2), Some(&42.0));
        }
    }

    #[test]
    fn computing_address_tail_wraps_to_zero() {
        let q = mq(3, 1, Variant::ComputingAddress, false, None);
        assert_eq!(q.queue(0).unwrap().tail(), 0);
    }

    #[test]
    fn level_bounds_are_checked() {
        let mut q = mq(3, 1, Variant::ShiftingData, false, None);
        assert!(matches!(q.enqueue(3, 0.0), Err(MqError::LevelOutOfRange { .. })));
        assert!(q.queue(3).is_err());
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert_eq!(
            CircularMultiQueue::new(0, 1, Variant::ShiftingData, false, None, 0.0).unwrap_err(),
            MqError::ZeroDepth
        );
        assert_eq!(
            CircularMultiQueue::new(1, 0, Variant::ShiftingData, false, None, 0.0).unwrap_err(),
            MqError::ZeroRadius
        );
    }

    #[test]
    fn computing_address_range_is_next_power_of_two() {
        for depth in 1..=8 {
            for rad in 1..=3 {
                for lazy in [false, true] {
                    let s = mq(depth, rad, Variant::ShiftingData, lazy, None).range();
                    let c = mq(depth, rad, Variant::ComputingAddress, lazy, None).range();
                    assert_eq!(c, s.next_power_of_two());
                }
            }
        }
    }
}
