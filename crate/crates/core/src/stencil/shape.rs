use serde::{Deserialize, Serialize};

use super::StencilError;

/// One neighbour of a stencil: an offset (x, y, z; unused axes are zero) and
/// its weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub offset: [i32; 3],
    pub coeff: f64,
}

/// A Jacobi-style stencil: the tap pattern plus the per-cell cost figures the
/// cost model consumes.
///
/// Tap order is significant. Every executor in this crate accumulates
/// `acc = acc + coeff * value` in exactly this order, which is what lets the
/// tiled engines reproduce the reference executor bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilShape {
    name: String,
    dims: usize,
    radius: usize,
    taps: Vec<Tap>,
    flops_per_cell: u32,
    gm_accesses_per_cell: f64,
    sm_accesses_no_rst: u32,
    sm_accesses_with_rst: f64,
}

impl StencilShape {
    /// Builds a shape with uniform `1/|taps|` weights.
    ///
    /// `sm_accesses_with_rst` is the on-chip access figure with register
    /// streaming; without it the figure is always `|taps| + 1`.
    pub fn new(
        name: impl Into<String>,
        dims: usize,
        offsets: &[[i32; 3]],
        flops_per_cell: u32,
        sm_accesses_with_rst: f64,
    ) -> Result<Self, StencilError> {
        if !(1..=3).contains(&dims) {
            return Err(StencilError::BadDims(dims));
        }
        if offsets.is_empty() {
            return Err(StencilError::EmptyTaps);
        }
        if !offsets.contains(&[0, 0, 0]) {
            return Err(StencilError::MissingCenter);
        }
        for (i, off) in offsets.iter().enumerate() {
            if off[dims..].iter().any(|&o| o != 0) {
                return Err(StencilError::OffsetOutsideDims { offset: *off, dims });
            }
            if offsets[..i].contains(off) {
                return Err(StencilError::DuplicateTap(*off));
            }
        }
        let radius = offsets
            .iter()
            .flat_map(|o| o.iter().map(|c| c.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        let weight = 1.0 / offsets.len() as f64;
        let taps = offsets
            .iter()
            .map(|&offset| Tap { offset, coeff: weight })
            .collect::<Vec<_>>();
        let sm_accesses_no_rst = taps.len() as u32 + 1;
        if sm_accesses_with_rst > sm_accesses_no_rst as f64 {
            return Err(StencilError::RstExceedsPlain {
                with_rst: sm_accesses_with_rst,
                without: sm_accesses_no_rst,
            });
        }
        Ok(Self {
            name: name.into(),
            dims,
            radius,
            taps,
            flops_per_cell,
            gm_accesses_per_cell: 2.0,
            sm_accesses_no_rst,
            sm_accesses_with_rst,
        })
    }

    /// Replaces the weights, keeping tap order.
    pub fn with_coefficients(mut self, coeffs: &[f64]) -> Result<Self, StencilError> {
        if coeffs.len() != self.taps.len() {
            return Err(StencilError::CoefficientCount {
                expected: self.taps.len(),
                got: coeffs.len(),
            });
        }
        for (tap, &c) in self.taps.iter_mut().zip(coeffs) {
            tap.coeff = c;
        }
        Ok(self)
    }

    /// Overrides the global-memory accesses per cell (defaults to 2, one load
    /// and one store under perfect caching).
    pub fn with_gm_accesses(mut self, a_gm: f64) -> Self {
        self.gm_accesses_per_cell = a_gm;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.taps.iter().map(|t| t.coeff).collect()
    }

    pub fn flops_per_cell(&self) -> u32 {
        self.flops_per_cell
    }

    pub fn gm_accesses_per_cell(&self) -> f64 {
        self.gm_accesses_per_cell
    }

    pub fn sm_accesses_no_rst(&self) -> u32 {
        self.sm_accesses_no_rst
    }

    pub fn sm_accesses_with_rst(&self) -> f64 {
        self.sm_accesses_with_rst
    }

    /// Taps a thread can serve from its private register window: those with
    /// no displacement along x, the axis spread across the threads of a block.
    pub fn register_taps(&self) -> usize {
        if self.dims == 1 {
            return self.taps.len();
        }
        self.taps.iter().filter(|t| t.offset[0] == 0).count()
    }

    /// True when every tap lies on a coordinate axis.
    pub fn is_star(&self) -> bool {
        self.taps
            .iter()
            .all(|t| t.offset.iter().filter(|&&o| o != 0).count() <= 1)
    }
}
