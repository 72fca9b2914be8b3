use serde::Serialize;

use super::{StencilError, StencilShape};

pub const BENCHMARK_NAMES: [&str; 10] = [
    "j1d3pt",
    "j2d5pt",
    "j2d9pt",
    "j2d9pt-gol",
    "j2d25pt",
    "j3d7pt",
    "j3d13pt",
    "j3d17pt",
    "j3d27pt",
    "poisson",
];

/// Catalog row: the shape's cost figures plus the reference problem size and
/// the temporal depth the tuned reference implementation used.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub dims: usize,
    pub radius: usize,
    pub points: usize,
    pub flops_per_cell: u32,
    pub sm_accesses_no_rst: u32,
    pub sm_accesses_with_rst: f64,
    pub domain: Vec<usize>,
    pub reference_depth: Option<u32>,
}

struct Row {
    name: &'static str,
    dims: usize,
    flops: u32,
    sm_rst: f64,
    domain: &'static [usize],
    depth: Option<u32>,
    offsets: fn() -> Vec<[i32; 3]>,
}

const DOMAIN_3D: &[usize] = &[2560, 288, 384];

const ROWS: [Row; 10] = [
    Row {
        name: "j1d3pt",
        dims: 1,
        flops: 5,
        sm_rst: 2.0,
        domain: &[1 << 20],
        depth: None,
        offsets: || star(1, 1),
    },
    Row {
        name: "j2d5pt",
        dims: 2,
        flops: 10,
        sm_rst: 4.0,
        domain: &[8352, 8352],
        depth: Some(12),
        offsets: || star(2, 1),
    },
    Row {
        name: "j2d9pt",
        dims: 2,
        flops: 18,
        sm_rst: 6.0,
        domain: &[8064, 8064],
        depth: Some(8),
        offsets: || star(2, 2),
    },
    Row {
        name: "j2d9pt-gol",
        dims: 2,
        flops: 18,
        sm_rst: 4.0,
        domain: &[8784, 8784],
        depth: Some(6),
        offsets: || boxed(2, 1),
    },
    Row {
        name: "j2d25pt",
        dims: 2,
        flops: 25,
        sm_rst: 6.0,
        domain: &[8640, 8640],
        depth: Some(4),
        offsets: || boxed(2, 2),
    },
    Row {
        name: "j3d7pt",
        dims: 3,
        flops: 14,
        sm_rst: 4.5,
        domain: DOMAIN_3D,
        depth: Some(8),
        offsets: || star(3, 1),
    },
    Row {
        name: "j3d13pt",
        dims: 3,
        flops: 26,
        sm_rst: 7.0,
        domain: DOMAIN_3D,
        depth: Some(5),
        offsets: || star(3, 2),
    },
    Row {
        name: "j3d17pt",
        dims: 3,
        flops: 34,
        sm_rst: 5.5,
        domain: DOMAIN_3D,
        depth: Some(6),
        offsets: seventeen,
    },
    Row {
        name: "j3d27pt",
        dims: 3,
        flops: 54,
        sm_rst: 5.5,
        domain: DOMAIN_3D,
        depth: Some(5),
        offsets: || boxed(3, 1),
    },
    Row {
        name: "poisson",
        dims: 3,
        flops: 38,
        sm_rst: 5.5,
        domain: DOMAIN_3D,
        depth: Some(6),
        offsets: nineteen,
    },
];

/// Star taps, ordered like a hand-written kernel: the slowest axis swept
/// through the center first, then the remaining axes' arms from slow to fast.
fn star(dims: usize, rad: i32) -> Vec<[i32; 3]> {
    let mut out = Vec::new();
    let slow = dims - 1;
    for d in -rad..=rad {
        let mut o = [0; 3];
        o[slow] = d;
        out.push(o);
    }
    for axis in (0..slow).rev() {
        for d in (-rad..=rad).filter(|&d| d != 0) {
            let mut o = [0; 3];
            o[axis] = d;
            out.push(o);
        }
    }
    out
}

/// Every offset in the cube of half-width `rad`, z-major then y then x.
fn boxed(dims: usize, rad: i32) -> Vec<[i32; 3]> {
    let span = |axis: usize| if axis < dims { -rad..=rad } else { 0..=0 };
    let mut out = Vec::new();
    for z in span(2) {
        for y in span(1) {
            for x in span(0) {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// 3x3 box in the center plane plus a 4-point cross above and below.
fn seventeen() -> Vec<[i32; 3]> {
    boxed(3, 1)
        .into_iter()
        .filter(|o| {
            let nz = o.iter().filter(|&&c| c != 0).count();
            o[2] == 0 || nz <= 2 && (o[0] == 0) != (o[1] == 0)
        })
        .collect()
}

/// Center, 6 faces and 12 edges: every offset with at most two non-zero axes.
fn nineteen() -> Vec<[i32; 3]> {
    boxed(3, 1)
        .into_iter()
        .filter(|o| o.iter().filter(|&&c| c != 0).count() <= 2)
        .collect()
}

fn row(name: &str) -> Result<&'static Row, StencilError> {
    ROWS.iter()
        .find(|r| r.name == name)
        .ok_or_else(|| StencilError::UnknownBenchmark {
            name: name.to_string(),
            valid: BENCHMARK_NAMES.join(", "),
        })
}

pub fn make_benchmark(name: &str) -> Result<StencilShape, StencilError> {
    let r = row(name)?;
    StencilShape::new(r.name, r.dims, &(r.offsets)(), r.flops, r.sm_rst)
}

pub fn catalog() -> Vec<CatalogEntry> {
    ROWS.iter()
        .map(|r| {
            let s = StencilShape::new(r.name, r.dims, &(r.offsets)(), r.flops, r.sm_rst)
                .expect("catalog rows are well formed");
            CatalogEntry {
                name: r.name,
                dims: r.dims,
                radius: s.radius(),
                points: s.taps().len(),
                flops_per_cell: r.flops,
                sm_accesses_no_rst: s.sm_accesses_no_rst(),
                sm_accesses_with_rst: r.sm_rst,
                domain: r.domain.to_vec(),
                reference_depth: r.depth,
            }
        })
        .collect()
}

pub fn catalog_json() -> String {
    serde_json::to_string_pretty(&catalog()).expect("catalog serializes")
}
