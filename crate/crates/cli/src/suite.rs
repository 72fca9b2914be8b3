use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempoblock::engine::Scheme;
use tempoblock::multiqueue::Variant;
use tempoblock::stencil::{catalog, make_benchmark, Boundary, BENCHMARK_NAMES};

use crate::{io_error, CliError};

pub const DEFAULT_MAX_CELLS: usize = 1 << 24;

/// Benchmark suite read from a TOML file.
///
/// ```toml
/// hardware = "a100"
/// seed = 7
/// output = "out"
///
/// [[stencils]]
/// name = "j2d5pt"
/// extents = [512, 512]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_hardware")]
    pub hardware: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Cap on simulated domain size; catalog domains are halved until they fit.
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
    #[serde(default)]
    pub stencils: Vec<SuiteEntry>,
}

/// One stencil of a suite. Everything but the name is optional; tiling
/// fields override what the planner picked when simulating.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub name: String,
    pub extents: Option<Vec<usize>>,
    pub boundary: Option<Boundary>,
    pub scheme: Option<Scheme>,
    pub t: Option<usize>,
    pub tile: Option<Vec<usize>>,
    pub device_tile_grid: Option<Vec<usize>>,
    pub lazy: Option<bool>,
    pub rst: Option<bool>,
    pub prefetch: Option<bool>,
    pub variant: Option<Variant>,
    pub stream_axis: Option<usize>,
}

fn default_hardware() -> String {
    "a100".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("tempoblock-out")
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            hardware: default_hardware(),
            seed: 0,
            output: default_output(),
            max_cells: DEFAULT_MAX_CELLS,
            stencils: Vec::new(),
        }
    }
}

impl SuiteConfig {
    /// Every catalog stencil at its default domain.
    pub fn full_catalog() -> Self {
        Self {
            stencils: BENCHMARK_NAMES
                .iter()
                .map(|n| SuiteEntry {
                    name: n.to_string(),
                    ..Default::default()
                })
                .collect(),
            ..Default::default()
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn from_toml(text: &str, source_name: &str) -> Result<Self, CliError> {
        let suite: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("{source_name}: {e}")))?;
        suite
            .validate()
            .map_err(|m| CliError::Config(format!("{source_name}: {m}")))?;
        Ok(suite)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_cells == 0 {
            return Err("max_cells must be positive".into());
        }
        for (i, e) in self.stencils.iter().enumerate() {
            let s = make_benchmark(&e.name).map_err(|err| format!("stencils[{i}].name: {err}"))?;
            if let Some(x) = &e.extents {
                if x.len() != s.dims() || x.contains(&0) {
                    return Err(format!(
                        "stencils[{i}].extents: {x:?} is not a {}-D extent list for {}",
                        s.dims(),
                        e.name
                    ));
                }
            }
            if e.t == Some(0) {
                return Err(format!("stencils[{i}].t: depth must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Table domain for `name`, or the override.
pub(crate) fn table_domain(entry: &SuiteEntry) -> Vec<usize> {
    if let Some(x) = &entry.extents {
        return x.clone();
    }
    catalog()
        .into_iter()
        .find(|c| c.name == entry.name)
        .map(|c| c.domain)
        .unwrap_or_default()
}

/// Halves every extent until the domain holds at most `max_cells` cells, or
/// until a further halving would leave an axis narrower than `floor`.
pub fn desk_domain(domain: &[usize], max_cells: usize, floor: usize) -> Vec<usize> {
    let mut d = domain.to_vec();
    while d.iter().product::<usize>() > max_cells && d.iter().all(|&n| n / 2 >= floor) {
        d.iter_mut().for_each(|n| *n /= 2);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_domains_keep_aspect_ratio() {
        assert_eq!(desk_domain(&[8352, 8352], DEFAULT_MAX_CELLS, 3), vec![2088, 2088]);
        assert_eq!(desk_domain(&[2560, 288, 384], DEFAULT_MAX_CELLS, 3), vec![640, 72, 96]);
        assert_eq!(desk_domain(&[1 << 20], DEFAULT_MAX_CELLS, 3), vec![1 << 20]);
        assert_eq!(desk_domain(&[16, 16], 1, 5), vec![8, 8]);
    }

    #[test]
    fn parses_suite_with_overrides() {
        let s = SuiteConfig::from_toml(
            "seed = 3\n[[stencils]]\nname = \"j3d7pt\"\nextents = [32, 32, 32]\nscheme = \"device-tiling\"\nlazy = false\n",
            "x",
        )
        .unwrap();
        assert_eq!(s.seed, 3);
        assert_eq!(s.stencils[0].scheme, Some(Scheme::DeviceTiling));
        assert_eq!(s.hardware, "a100");
    }

    #[test]
    fn reports_bad_keys_and_names() {
        let e = SuiteConfig::from_toml("[[stencils]]\nname = \"j2d5pt\"\nextent = [4, 4]\n", "suite.toml").unwrap_err();
        assert!(e.to_string().contains("extent"), "{e}");
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = SuiteConfig::from_toml("[[stencils]]\nname = \"nope\"\n", "suite.toml").unwrap_err();
        assert!(e.to_string().contains("stencils[0].name"), "{e}");
        let e = SuiteConfig::from_toml("[[stencils]]\nname = \"j2d5pt\"\nextents = [4]\n", "s").unwrap_err();
        assert!(e.to_string().contains("stencils[0].extents"), "{e}");
    }
}
