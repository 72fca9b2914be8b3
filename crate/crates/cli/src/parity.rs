use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tempoblock::engine::{Scheme, TilingParams};
use tempoblock::model::{
    attainable_perf, choose_scheme_with, device_profile_3d, littles_check, min_depth_to_shift, min_tile_width_3d,
    onchip_bytes_required, sm_profile, valid_proportion_device, valid_proportion_sm, HardwareSpec, PlannerConfig,
};
use tempoblock::multiqueue::{minimum_range, Variant};
use tempoblock::stencil::{catalog, make_benchmark};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowVerdict {
    Pass,
    Fail,
    /// Outside tolerance on hardware other than the reference preset.
    ExpectedDivergence,
    /// Published figure this model does not reproduce; reported, not enforced.
    KnownGap,
}

impl RowVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            RowVerdict::Pass => "pass",
            RowVerdict::Fail => "FAIL",
            RowVerdict::ExpectedDivergence => "expected-divergence",
            RowVerdict::KnownGap => "known-gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityRow {
    pub quantity: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: String,
    pub verdict: RowVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub hardware: String,
    pub reference_hardware: bool,
    pub rows: Vec<ParityRow>,
}

impl ParityReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.verdict == RowVerdict::Fail).count()
    }

    pub fn result(&self) -> Result<(), CliError> {
        match self.failures() {
            0 => Ok(()),
            n => Err(CliError::Parity(n)),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "parity on {}{}",
            self.hardware,
            if self.reference_hardware {
                ""
            } else {
                " (not the reference preset)"
            }
        );
        let _ = writeln!(
            out,
            "{:<42} {:>14} {:>14} {:>14}  verdict",
            "quantity", "expected", "computed", "tolerance"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<42} {:>14} {:>14} {:>14}  {}",
                r.quantity,
                r.expected,
                r.computed,
                r.tolerance,
                r.verdict.as_str()
            );
        }
        let _ = writeln!(out, "{} row(s), {} failed", self.rows.len(), self.failures());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,expected,computed,tolerance,verdict\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.quantity,
                r.expected,
                r.computed,
                r.tolerance,
                r.verdict.as_str()
            );
        }
        out
    }
}

struct Rows {
    reference: bool,
    rows: Vec<ParityRow>,
}

impl Rows {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        quantity: &str,
        expected: String,
        computed: String,
        tolerance: String,
        ok: bool,
        hw: bool,
        gap: bool,
    ) {
        let verdict = if ok {
            RowVerdict::Pass
        } else if hw && !self.reference {
            RowVerdict::ExpectedDivergence
        } else if gap {
            RowVerdict::KnownGap
        } else {
            RowVerdict::Fail
        };
        self.rows.push(ParityRow {
            quantity: quantity.into(),
            expected,
            computed,
            tolerance,
            verdict,
        });
    }

    fn within(&mut self, quantity: &str, expected: f64, computed: f64, lo: f64, hi: f64, hw: bool) {
        let ok = (lo..=hi).contains(&computed);
        self.push(
            quantity,
            fmt(expected),
            fmt(computed),
            format!("[{}, {}]", fmt(lo), fmt(hi)),
            ok,
            hw,
            false,
        );
    }

    fn relative(&mut self, quantity: &str, expected: f64, computed: f64, rel: f64, hw: bool, gap: bool) {
        let ok = (computed / expected - 1.0).abs() <= rel;
        self.push(
            quantity,
            fmt(expected),
            fmt(computed),
            format!("±{}%", rel * 100.0),
            ok,
            hw,
            gap,
        );
    }

    fn exact<T: PartialEq + ToString>(&mut self, quantity: &str, expected: T, computed: T, hw: bool) {
        let ok = expected == computed;
        self.push(
            quantity,
            expected.to_string(),
            computed.to_string(),
            "exact".into(),
            ok,
            hw,
            false,
        );
    }
}

fn fmt(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn is_reference(hw: &HardwareSpec) -> bool {
    let mut h = hw.clone();
    h.name = "a100".into();
    h == HardwareSpec::a100()
}

/// Recomputes every published worked figure with `hw`. On hardware other
/// than the A100 preset, hardware-dependent rows that miss are reported as
/// expected divergence rather than failures.
pub fn cmd_validate(hw: &HardwareSpec, two_sided_halo: bool) -> Result<ParityReport, CliError> {
    hw.validate()?;
    let mut r = Rows {
        reference: is_reference(hw),
        rows: Vec::new(),
    };
    let bench = |n: &str| make_benchmark(n).expect("catalog stencil");
    let five = bench("j2d5pt");
    let seven = bench("j3d7pt");

    match min_depth_to_shift(hw, &sm_profile(&five, 1)) {
        Ok(d) => {
            r.within("j2d5pt depth to leave global memory", 6.3, d.t_real, 6.2, 6.35, true);
            r.exact("j2d5pt integer depth", 7, d.t_int, true);
        }
        Err(e) => r.push(
            "j2d5pt depth to leave global memory",
            "6.3".into(),
            e.to_string(),
            "-".into(),
            false,
            true,
            false,
        ),
    }
    match min_depth_to_shift(hw, &device_profile_3d(&seven, 32, 1, 1)) {
        Ok(d) => r.within(
            "j3d7pt device 32x32 depth to leave gm",
            18.34,
            d.t_real,
            18.3,
            18.4,
            true,
        ),
        Err(e) => r.push(
            "j3d7pt device 32x32 depth to leave gm",
            "18.34".into(),
            e.to_string(),
            "-".into(),
            false,
            true,
            false,
        ),
    }
    let w = min_tile_width_3d(hw, &sm_profile(&seven, 1));
    r.within("j3d7pt minimum 3-D tile width", 22.3, w.bound, 22.2, 22.4, true);
    r.exact("j3d7pt chosen 3-D tile width", 32, w.chosen, true);

    let sync = hw.device_sync_latency_s;
    r.within(
        "V device, T=2.05us, n=1",
        0.63,
        valid_proportion_device(2.05e-6, sync, 1),
        0.62,
        0.64,
        true,
    );
    r.within(
        "V device, T=2.42us, n=1",
        0.67,
        valid_proportion_device(2.42e-6, sync, 1),
        0.66,
        0.675,
        true,
    );
    let v = valid_proportion_sm(&[256], 7, 1, true).unwrap_or(f64::NAN);
    r.within("V sm, tile 256, t=7, rad 1", 0.95, v, 0.94, 0.96, false);
    let v = valid_proportion_sm(&[34, 34], 3, 1, two_sided_halo).unwrap_or(f64::NAN);
    let ok = (v - 0.77).abs() <= 0.01;
    r.push(
        "V sm, tile 34x34, t=3, rad 1",
        "0.77".into(),
        fmt(v),
        "±0.01".into(),
        ok,
        false,
        true,
    );

    let cfg = PlannerConfig {
        two_sided: two_sided_halo,
        ..PlannerConfig::default()
    };
    for e in catalog().into_iter().filter(|e| e.dims > 1) {
        let want = if e.dims == 2 {
            Scheme::SmTiling
        } else {
            Scheme::DeviceTiling
        };
        let got = choose_scheme_with(hw, &bench(e.name), &e.domain, &cfg)
            .map(|p| p.scheme.as_str().to_string())
            .unwrap_or_else(|e| e.to_string());
        r.exact(&format!("{} scheme", e.name), want.as_str().to_string(), got, true);
    }

    let seven_domain = catalog()
        .into_iter()
        .find(|e| e.name == "j3d7pt")
        .map(|e| e.domain)
        .unwrap_or_default();
    match choose_scheme_with(hw, &seven, &seven_domain, &cfg) {
        Ok(plan) => {
            let d = plan.candidate(Scheme::DeviceTiling);
            let s = plan.candidate(Scheme::SmTiling);
            if let (Some(d), Some(s)) = (d, s) {
                r.exact("j3d7pt device depth", 8, d.t, true);
                r.relative(
                    "j3d7pt device P (GCells/s)",
                    365.0,
                    d.p_cells_per_s * 1e-9,
                    0.05,
                    true,
                    true,
                );
                r.relative(
                    "j3d7pt device PP (GCells/s)",
                    244.0,
                    d.pp_cells_per_s * 1e-9,
                    0.05,
                    true,
                    false,
                );
                r.relative(
                    "j3d7pt sm PP (GCells/s)",
                    225.0,
                    s.pp_cells_per_s * 1e-9,
                    0.05,
                    true,
                    false,
                );
                r.exact(
                    "j3d7pt device PP > sm PP",
                    true,
                    d.pp_cells_per_s > s.pp_cells_per_s,
                    true,
                );
            } else {
                r.push(
                    "j3d7pt candidates",
                    "both".into(),
                    "missing".into(),
                    "-".into(),
                    false,
                    true,
                    false,
                );
            }
        }
        Err(e) => r.push(
            "j3d7pt plan",
            "feasible".into(),
            e.to_string(),
            "-".into(),
            false,
            true,
            false,
        ),
    }
    let p3 = attainable_perf(hw, &sm_profile(&seven, 3)) * 1e-9;
    r.relative("j3d7pt sm P at t=3 (GCells/s)", 292.0, p3, 0.05, true, false);

    for op in hw.op_latencies.keys() {
        if let Ok(c) = littles_check(hw, op, 256, 4) {
            r.exact(&format!("256 threads x ILP 4 saturates {op}"), true, c.saturates, true);
        }
    }
    if let Some(op) = hw.op_latencies.keys().next() {
        let c = littles_check(hw, op, 256, 4)?;
        r.exact("256 threads x ILP 4 parallelism", 1024.0, c.parallelism, false);
    }

    r.exact("range depth 3 rad 1, shifting", 7, minimum_range(3, 1, false), false);
    r.exact(
        "range depth 3 rad 1, computing-address",
        8,
        minimum_range(3, 1, false).next_power_of_two(),
        false,
    );
    let one = bench("j1d3pt");
    let budget = |v: Variant| onchip_bytes_required(hw, &one, &TilingParams::sm(3, &[]).variant(v)).map(|b| b.bytes);
    r.exact(
        "j1d3pt depth 3 bytes, shifting",
        56.0,
        budget(Variant::ShiftingData)?,
        true,
    );
    r.exact(
        "j1d3pt depth 3 bytes, computing-address",
        64.0,
        budget(Variant::ComputingAddress)?,
        true,
    );
    let b = onchip_bytes_required(
        hw,
        &seven,
        &TilingParams::device(19, &[32, 32], &[1, 1]).variant(Variant::ShiftingData),
    )?;
    r.within(
        "j3d7pt 32x32 depth 19 on-chip KiB",
        352.0,
        b.bytes / 1024.0,
        351.0,
        353.0,
        true,
    );
    r.exact("j3d7pt 32x32 depth 19 fits on chip", false, b.fits, true);

    Ok(ParityReport {
        hardware: hw.name.clone(),
        reference_hardware: r.reference,
        rows: r.rows,
    })
}
