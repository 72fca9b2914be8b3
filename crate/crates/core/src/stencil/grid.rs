use serde::{Deserialize, Serialize};

use super::StencilError;
use crate::rng::SplitMix64;

/// What happens to cells within `radius` of the domain edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Frame cells keep their value every step.
    #[default]
    FixedValue,
    /// Frame cells are never written; the output buffer holds zero there.
    SkipUpdate,
}

/// Dense row-major grid, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    extents: Vec<usize>,
    cells: Vec<f64>,
    boundary: Boundary,
}

impl Grid {
    pub fn from_cells(extents: &[usize], cells: Vec<f64>, boundary: Boundary) -> Result<Self, StencilError> {
        if extents.is_empty() || extents.len() > 3 || extents.contains(&0) {
            return Err(StencilError::BadExtents(extents.to_vec()));
        }
        let n: usize = extents.iter().product();
        if cells.len() != n {
            return Err(StencilError::CellCount {
                expected: n,
                got: cells.len(),
            });
        }
        Ok(Self {
            extents: extents.to_vec(),
            cells,
            boundary,
        })
    }

    pub fn filled(extents: &[usize], value: f64, boundary: Boundary) -> Result<Self, StencilError> {
        let n = extents.iter().product();
        Self::from_cells(extents, vec![value; n], boundary)
    }

    /// Uniform values in `[-1, 1)` from a seeded SplitMix64 stream.
    pub fn random(extents: &[usize], seed: u64, boundary: Boundary) -> Result<Self, StencilError> {
        let mut rng = SplitMix64::new(seed);
        let n = extents.iter().product();
        let cells = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Self::from_cells(extents, cells, boundary)
    }

    pub fn dims(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Extents padded to three axes with 1.
    pub fn extents3(&self) -> [usize; 3] {
        let mut e = [1; 3];
        e[..self.extents.len()].copy_from_slice(&self.extents);
        e
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn index(&self, coords: [usize; 3]) -> usize {
        let e = self.extents3();
        coords[0] + e[0] * (coords[1] + e[1] * coords[2])
    }

    pub fn get(&self, coords: [usize; 3]) -> f64 {
        self.cells[self.index(coords)]
    }

    /// Whether a cell lies within `radius` of any edge of a real axis.
    pub fn in_frame(&self, coords: [usize; 3], radius: usize) -> bool {
        self.extents
            .iter()
            .zip(coords)
            .any(|(&n, c)| c < radius || c + radius >= n)
    }

    /// Position and values of the first cell where the grids differ by more
    /// than `tol` (NaN never matches).
    pub fn first_difference(&self, other: &Grid, tol: f64) -> Option<(usize, f64, f64)> {
        self.cells
            .iter()
            .zip(&other.cells)
            .enumerate()
            .find(|(_, (a, b))| !((*a - *b).abs() <= tol))
            .map(|(i, (a, b))| (i, *a, *b))
    }

    pub fn max_abs_difference(&self, other: &Grid) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_for(&self, stencil: &super::StencilShape) -> Result<(), StencilError> {
        if self.dims() != stencil.dims() {
            return Err(StencilError::DimensionMismatch {
                grid: self.dims(),
                stencil: stencil.dims(),
            });
        }
        let r = stencil.radius();
        for (axis, &n) in self.extents.iter().enumerate() {
            if n <= 2 * r {
                return Err(StencilError::ExtentTooSmall {
                    axis,
                    extent: n,
                    radius: r,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_seeded() {
        let a = Grid::random(&[8, 8], 3, Boundary::FixedValue).unwrap();
        let b = Grid::random(&[8, 8], 3, Boundary::FixedValue).unwrap();
        let c = Grid::random(&[8, 8], 4, Boundary::FixedValue).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn frame_detection() {
        let g = Grid::filled(&[6, 5], 0.0, Boundary::FixedValue).unwrap();
        assert!(g.in_frame([0, 2, 0], 1));
        assert!(g.in_frame([2, 4, 0], 1));
        assert!(!g.in_frame([2, 2, 0], 1));
        assert!(g.in_frame([2, 1, 0], 2));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::filled(&[], 0.0, Boundary::FixedValue).is_err());
        assert!(Grid::filled(&[2, 0], 0.0, Boundary::FixedValue).is_err());
        assert!(Grid::from_cells(&[2, 2], vec![0.0; 3], Boundary::FixedValue).is_err());
    }
}
