use super::{Boundary, Grid, StencilError, StencilShape};

/// One sweep of the stencil over every cell, double-buffered.
pub fn reference_step(grid: &Grid, stencil: &StencilShape) -> Result<Grid, StencilError> {
    grid.check_for(stencil)?;
    let [nx, ny, nz] = grid.extents3();
    let r = stencil.radius();
    let input = grid.cells();
    let mut out = vec![0.0; input.len()];
    let taps: Vec<(isize, f64)> = stencil
        .taps()
        .iter()
        .map(|t| {
            let o = t.offset.map(|c| c as isize);
            (o[0] + nx as isize * (o[1] + ny as isize * o[2]), t.coeff)
        })
        .collect();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + nx * (y + ny * z);
                if grid.in_frame([x, y, z], r) {
                    if grid.boundary() == Boundary::FixedValue {
                        out[i] = input[i];
                    }
                    continue;
                }
                let mut acc = 0.0;
                for &(d, c) in &taps {
                    acc += c * input[(i as isize + d) as usize];
                }
                out[i] = acc;
            }
        }
    }
    Grid::from_cells(grid.extents(), out, grid.boundary())
}

pub fn reference_run(grid: &Grid, stencil: &StencilShape, steps: usize) -> Result<Grid, StencilError> {
    grid.check_for(stencil)?;
    let mut g = grid.clone();
    for _ in 0..steps {
        g = reference_step(&g, stencil)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::make_benchmark;

    #[test]
    fn constant_field_is_preserved_by_normalized_weights() {
        let s = make_benchmark("j2d9pt").unwrap();
        let g = Grid::filled(&[12, 11], 1.0, Boundary::FixedValue).unwrap();
        let out = reference_run(&g, &s, 3).unwrap();
        assert!(out.cells().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn skip_update_zeroes_the_frame() {
        let s = make_benchmark("j1d3pt").unwrap();
        let g = Grid::filled(&[6], 3.0, Boundary::SkipUpdate).unwrap();
        let out = reference_step(&g, &s).unwrap();
        assert_eq!(out.cells(), &[0.0, 3.0, 3.0, 3.0, 3.0, 0.0]);
    }

    #[test]
    fn zero_steps_is_identity() {
        let s = make_benchmark("j3d7pt").unwrap();
        let g = Grid::random(&[5, 5, 5], 1, Boundary::FixedValue).unwrap();
        assert_eq!(reference_run(&g, &s, 0).unwrap(), g);
    }

    #[test]
    fn rejects_small_extents_and_mismatched_dims() {
        let s = make_benchmark("j2d9pt").unwrap();
        let g = Grid::filled(&[4, 9], 0.0, Boundary::FixedValue).unwrap();
        assert!(matches!(
            reference_step(&g, &s),
            Err(StencilError::ExtentTooSmall { .. })
        ));
        let g = Grid::filled(&[9], 0.0, Boundary::FixedValue).unwrap();
        assert!(matches!(
            reference_step(&g, &s),
            Err(StencilError::DimensionMismatch { .. })
        ));
    }
}
