use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempoblock::engine::{AccountingReport, TilingParams};
use tempoblock::model::{KernelProfile, Plan};

use crate::{io_error, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Measured quantity against what the model or the catalog predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub measured: f64,
    pub expected: f64,
    pub delta: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Check {
    pub fn new(quantity: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let delta = measured - expected;
        Self {
            quantity: quantity.into(),
            measured,
            expected,
            delta,
            tolerance,
            verdict: Verdict::of(delta.abs() <= tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub verdict: Verdict,
    pub first_difference: Option<usize>,
    /// Values at `first_difference`; `None` where the engine produced NaN.
    pub engine_value: Option<f64>,
    pub reference_value: Option<f64>,
    pub max_abs_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub params: TilingParams,
    pub seed: u64,
    pub oracle: OracleVerdict,
    pub summary: AccountingReport,
    pub checks: Vec<Check>,
}

/// One point on a roofline chart: operational intensity against the rate
/// the model predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RooflinePoint {
    pub stencil: String,
    pub scheme: String,
    pub t: usize,
    pub intensity_flop_per_byte: f64,
    pub perf_gcells_per_s: f64,
    pub perf_gflop_per_s: f64,
    pub bottleneck: String,
}

impl RooflinePoint {
    pub fn new(
        stencil: &str,
        scheme: &str,
        profile: &KernelProfile,
        flops: f64,
        cell_bytes: f64,
        p: f64,
        bottleneck: &str,
    ) -> Self {
        let t = profile.t;
        let bytes = profile.a_gm * profile.d_gm_at(t) * cell_bytes;
        Self {
            stencil: stencil.into(),
            scheme: scheme.into(),
            t: t as usize,
            intensity_flop_per_byte: flops * t * profile.d_all / bytes,
            perf_gcells_per_s: p * 1e-9,
            perf_gflop_per_s: p * flops * 1e-9,
            bottleneck: bottleneck.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilRecord {
    pub stencil: String,
    pub domain: Vec<usize>,
    /// Depth used by the tuned reference implementation, where one exists.
    pub reference_depth: Option<u32>,
    pub plan: Plan,
    pub roofline: Vec<RooflinePoint>,
    pub simulation: Option<Simulation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub hardware: String,
    pub seed: u64,
    pub two_sided_halo: bool,
    pub records: Vec<StencilRecord>,
}

impl Report {
    /// First oracle mismatch or failed check, in suite order.
    pub fn failure(&self) -> Option<CliError> {
        for r in &self.records {
            let Some(sim) = &r.simulation else { continue };
            if let Some(index) = sim.oracle.first_difference {
                return Some(CliError::OracleMismatch {
                    stencil: r.stencil.clone(),
                    index,
                    got: sim.oracle.engine_value.unwrap_or(f64::NAN),
                    want: sim.oracle.reference_value.unwrap_or(f64::NAN),
                });
            }
            if let Some(c) = sim.checks.iter().find(|c| c.verdict == Verdict::Fail) {
                return Some(CliError::CheckFailed {
                    stencil: r.stencil.clone(),
                    quantity: c.quantity.clone(),
                    measured: c.measured,
                    expected: c.expected,
                });
            }
        }
        None
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "stencil,domain,scheme,t,reference_depth,tile,device_tile_grid,stream_axis,p_gcells,v,pp_gcells,bottleneck,onchip_bytes,onchip_fits",
        );
        let sim = self.records.iter().any(|r| r.simulation.is_some());
        if sim {
            out.push_str(",sim_scheme,sim_t,oracle,first_difference,v_measured,v_model,a_gm_measured,a_sm_measured,syncs_block,syncs_device,device_tiles,checks");
        }
        out.push('\n');
        for r in &self.records {
            let p = &r.plan;
            let c = p.chosen();
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.stencil,
                join(&r.domain),
                p.scheme,
                p.t,
                r.reference_depth.map(|d| d.to_string()).unwrap_or_default(),
                join(&c.tile),
                join(&p.device_tile_grid),
                p.stream_axis,
                p.predicted_p_gcells,
                p.predicted_v,
                p.predicted_pp_gcells,
                p.bottleneck.as_str(),
                c.onchip.bytes,
                c.onchip.fits
            );
            if sim {
                match &r.simulation {
                    Some(s) => {
                        let _ = write!(
                            out,
                            ",{},{},{},{},{},{},{},{},{},{},{},{}",
                            s.params.scheme,
                            s.params.t,
                            s.oracle.verdict.as_str(),
                            s.oracle.first_difference.map(|i| i.to_string()).unwrap_or_default(),
                            s.summary.valid_proportion,
                            s.summary
                                .model_valid_proportion
                                .map(|v| v.to_string())
                                .unwrap_or_default(),
                            s.summary.a_gm_measured,
                            s.summary.a_sm_measured,
                            s.summary.syncs.block,
                            s.summary.syncs.device,
                            s.summary.device_tiles,
                            checks_verdict(&s.checks)
                        );
                    }
                    None => out.push_str(",,,,,,,,,,,,"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn roofline_csv(&self) -> String {
        let mut out =
            String::from("stencil,scheme,t,intensity_flop_per_byte,perf_gcells_per_s,perf_gflop_per_s,bottleneck\n");
        for p in self.records.iter().flat_map(|r| &r.roofline) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.stencil,
                p.scheme,
                p.t,
                p.intensity_flop_per_byte,
                p.perf_gcells_per_s,
                p.perf_gflop_per_s,
                p.bottleneck
            );
        }
        out
    }
}

fn checks_verdict(checks: &[Check]) -> &'static str {
    if checks.iter().all(|c| c.verdict == Verdict::Pass) {
        "pass"
    } else {
        "fail"
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x")
}

/// Writes `<command>.json`, `<command>.csv` and `<command>-roofline.csv`.
pub fn write_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let files = [
        (format!("{}.json", report.command), report.to_json()),
        (format!("{}.csv", report.command), report.to_csv()),
        (format!("{}-roofline.csv", report.command), report.roofline_csv()),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_report(path: &Path) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Fixed-width table for standard output.
pub fn render_table(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} on {} (seed {}, {} halo)",
        report.command,
        report.hardware,
        report.seed,
        if report.two_sided_halo {
            "two-sided"
        } else {
            "one-sided"
        }
    );
    if report.records.is_empty() {
        out.push_str("(empty suite)\n");
        return out;
    }
    let _ = writeln!(
        out,
        "{:<11} {:<16} {:<13} {:>3} {:>5} {:>9} {:>6} {:>9} {:>9} {:>4} {:>10}",
        "stencil", "domain", "scheme", "t", "ref t", "P GC/s", "V", "PP GC/s", "tile", "bnd", "onchip KiB"
    );
    for r in &report.records {
        let p = &r.plan;
        let c = p.chosen();
        let _ = writeln!(
            out,
            "{:<11} {:<16} {:<13} {:>3} {:>5} {:>9.1} {:>6.3} {:>9.1} {:>9} {:>4} {:>10.1}{}",
            r.stencil,
            join(&r.domain),
            p.scheme.as_str(),
            p.t,
            r.reference_depth.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
            p.predicted_p_gcells,
            p.predicted_v,
            p.predicted_pp_gcells,
            if c.tile.is_empty() {
                "-".to_string()
            } else {
                join(&c.tile)
            },
            p.bottleneck.as_str(),
            c.onchip.bytes / 1024.0,
            if c.onchip.fits { "" } else { " (exceeds)" }
        );
    }
    if report.records.iter().any(|r| r.simulation.is_some()) {
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<11} {:<13} {:>3} {:>6} {:>10} {:>10} {:>9} {:>8} {:>8} {:>7}",
            "stencil", "simulated", "t", "oracle", "V meas", "V model", "|dV|", "a_sm", "dsyncs", "checks"
        );
        for r in &report.records {
            let Some(s) = &r.simulation else { continue };
            let model = s.summary.model_valid_proportion;
            let _ = writeln!(
                out,
                "{:<11} {:<13} {:>3} {:>6} {:>10.6} {:>10} {:>9} {:>8.3} {:>8} {:>7}",
                r.stencil,
                s.params.scheme.as_str(),
                s.params.t,
                s.oracle.verdict.as_str(),
                s.summary.valid_proportion,
                model.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into()),
                model
                    .map(|v| format!("{:.1e}", (v - s.summary.valid_proportion).abs()))
                    .unwrap_or_else(|| "-".into()),
                s.summary.a_sm_measured,
                s.summary.syncs.device,
                checks_verdict(&s.checks)
            );
        }
    }
    out
}
