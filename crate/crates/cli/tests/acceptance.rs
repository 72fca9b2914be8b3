//! Acceptance suite: thirteen criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the output stays one line
//! per criterion. Exits non-zero if any criterion fails.

// `ensure!(x < y)` negates the comparison so that NaN fails the criterion.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use tempoblock::engine::{run_tiling, trace_summary, Scheme, TilingParams};
use tempoblock::model::{
    attainable_perf, bottleneck, choose_scheme, component_times, device_profile_3d, littles_check, min_depth_to_shift,
    min_tile_width_3d, sm_profile, valid_proportion_device, valid_proportion_sm, Component, HardwareSpec,
    KernelProfile,
};
use tempoblock::multiqueue::{CircularMultiQueue, MqError, StreamKernel, StreamQueue, Variant};
use tempoblock::rng::SplitMix64;
use tempoblock::stencil::{catalog, make_benchmark, reference_run, Boundary, Grid, StencilShape, BENCHMARK_NAMES};
use tempoblock_cli::{cmd_simulate, write_report, Context, SuiteConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn a100() -> HardwareSpec {
    HardwareSpec::a100()
}

fn bench(name: &str) -> StencilShape {
    make_benchmark(name).expect("catalog stencil")
}

fn c1_five_point_depth() -> Outcome {
    let hw = a100();
    let p = sm_profile(&bench("j2d5pt"), 1);
    let start = Instant::now();
    let d = min_depth_to_shift(&hw, &p).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure!((6.2..=6.35).contains(&d.t_real), "t_real {}", d.t_real);
    ensure!(d.t_int == 7, "t_int {}", d.t_int);
    ensure!(took < Duration::from_millis(1), "took {took:?}");
    Ok(format!("t_real {:.4}, t_int {}, {:?}", d.t_real, d.t_int, took))
}

fn c2_seven_point_device_depth() -> Outcome {
    let p = device_profile_3d(&bench("j3d7pt"), 32, 1, 1);
    let d = min_depth_to_shift(&a100(), &p).map_err(|e| e.to_string())?;
    ensure!((18.3..=18.4).contains(&d.t_real), "t_real {}", d.t_real);
    Ok(format!("t_real {:.4}", d.t_real))
}

fn c3_tile_width() -> Outcome {
    let w = min_tile_width_3d(&a100(), &sm_profile(&bench("j3d7pt"), 1));
    ensure!((22.2..=22.4).contains(&w.bound), "bound {}", w.bound);
    ensure!(w.chosen == 32, "chosen {}", w.chosen);
    Ok(format!("bound {:.3}, chosen {}", w.bound, w.chosen))
}

fn c4_device_valid_proportion() -> Outcome {
    let a = valid_proportion_device(2.05e-6, 1.2e-6, 1);
    let b = valid_proportion_device(2.42e-6, 1.2e-6, 1);
    ensure!((0.62..=0.64).contains(&a), "V(2.05us) {a}");
    ensure!((0.66..=0.675).contains(&b), "V(2.42us) {b}");
    Ok(format!("{a:.4}, {b:.4}"))
}

fn c5_scheme_choice() -> Outcome {
    let hw = a100();
    for e in catalog().into_iter().filter(|e| e.dims > 1) {
        let plan = choose_scheme(&hw, &bench(e.name), &e.domain).map_err(|err| format!("{}: {err}", e.name))?;
        let want = if e.dims == 2 {
            Scheme::SmTiling
        } else {
            Scheme::DeviceTiling
        };
        ensure!(plan.scheme == want, "{} chose {}", e.name, plan.scheme);
    }
    let e = catalog().into_iter().find(|e| e.name == "j3d7pt").unwrap();
    let plan = choose_scheme(&hw, &bench("j3d7pt"), &e.domain).map_err(|e| e.to_string())?;
    let d = plan
        .candidate(Scheme::DeviceTiling)
        .ok_or("no device candidate")?
        .pp_cells_per_s
        * 1e-9;
    let s = plan
        .candidate(Scheme::SmTiling)
        .ok_or("no sm candidate")?
        .pp_cells_per_s
        * 1e-9;
    ensure!((d / 244.0 - 1.0).abs() <= 0.05, "PP_D {d}");
    ensure!((s / 225.0 - 1.0).abs() <= 0.05, "PP_SM {s}");
    ensure!(d > s, "PP_D {d} <= PP_SM {s}");
    Ok(format!("2-D sm, 3-D device; PP_D {d:.1}, PP_SM {s:.1} GCells/s"))
}

fn c6_littles_law() -> Outcome {
    let mut hw = a100();
    for c in [1.0, 512.0, 1024.0, 1025.0, 4096.0] {
        hw.op_latencies.insert(format!("probe{c}"), c / 2.0);
        hw.op_throughputs.insert(format!("probe{c}"), 2.0);
    }
    let mut saturated = 0;
    for op in hw.op_latencies.keys() {
        let r = littles_check(&hw, op, 256, 4).map_err(|e| e.to_string())?;
        ensure!(r.parallelism == 1024.0, "{op}: PAR {}", r.parallelism);
        ensure!(
            r.saturates == (r.concurrency <= 1024.0),
            "{op}: C {} saturates {}",
            r.concurrency,
            r.saturates
        );
        saturated += r.saturates as usize;
    }
    Ok(format!("PAR 1024; {saturated}/{} ops saturated", hw.op_latencies.len()))
}

fn c7_ranges() -> Outcome {
    let range = |v| {
        CircularMultiQueue::new(3, 1, v, false, None, 0.0)
            .map(|q| q.range())
            .map_err(|e| e.to_string())
    };
    let (d, a, c) = (
        range(Variant::ShiftingData)?,
        range(Variant::ShiftingAddress)?,
        range(Variant::ComputingAddress)?,
    );
    ensure!(d == 7 && a == 7 && c == 8, "ranges {d}/{a}/{c}");
    Ok("7 shifting, 8 computing-address".into())
}

/// Random parameters for one engine run on a small domain; the device grid is
/// fitted so no block starts outside the domain.
fn random_case(rng: &mut SplitMix64, s: &StencilShape, scheme: Scheme, lazy: bool, rst: bool) -> (Grid, TilingParams) {
    let (dims, rad) = (s.dims(), s.radius());
    let hi = match dims {
        1 => 200,
        2 => 64,
        _ => 20,
    };
    let lo = 2 * rad + 1;
    let dom: Vec<usize> = (0..dims).map(|_| lo + rng.below((hi - lo) as u64) as usize).collect();
    let t = 1 + rng.below(4) as usize;
    let halo = rad * t;
    let tile: Vec<usize> = (0..dims - 1).map(|_| 2 * halo + 1 + rng.below(24) as usize).collect();
    let params = match scheme {
        Scheme::SmTiling => TilingParams::sm(t, &tile),
        Scheme::DeviceTiling => {
            let grid: Vec<usize> = tile
                .iter()
                .zip(&dom)
                .map(|(&w, &n)| (1 + rng.below(3) as usize).min(n.div_ceil(w)).max(1))
                .collect();
            TilingParams::device(t, &tile, &grid)
        }
    };
    let variant = Variant::ALL[rng.below(3) as usize];
    let boundary = if rng.below(2) == 0 {
        Boundary::FixedValue
    } else {
        Boundary::SkipUpdate
    };
    let grid = Grid::random(&dom, rng.next_u64(), boundary).expect("valid domain");
    (grid, params.lazy(lazy).rst(rst).variant(variant))
}

fn combinations() -> Vec<(&'static str, Scheme, bool, bool)> {
    let mut v = Vec::new();
    for name in BENCHMARK_NAMES {
        for scheme in [Scheme::SmTiling, Scheme::DeviceTiling] {
            for lazy in [false, true] {
                for rst in [false, true] {
                    v.push((name, scheme, lazy, rst));
                }
            }
        }
    }
    v
}

fn c8_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = SplitMix64::new(8);
    let mut runs = 0;
    for (name, scheme, lazy, rst) in combinations() {
        let s = bench(name);
        for _ in 0..50 {
            let (g, p) = random_case(&mut rng, &s, scheme, lazy, rst);
            let (out, _) = run_tiling(&g, &s, &p).map_err(|e| format!("{name} {p:?}: {e}"))?;
            let want = reference_run(&g, &s, p.t).map_err(|e| e.to_string())?;
            if let Some((i, a, b)) = out.first_difference(&want, 0.0) {
                return Err(format!(
                    "{name} {:?} {p:?}: cell {i} engine {a} reference {b}",
                    g.extents()
                ));
            }
            runs += 1;
        }
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(300), "took {took:?}");
    Ok(format!("{runs} runs bit-identical in {:.1}s", took.as_secs_f64()))
}

/// Weighted sum of each full window, logged per level; partial windows pass
/// the centre through.
struct Recorder {
    input: Vec<f64>,
    coeffs: Vec<f64>,
    log: Vec<(usize, usize, f64)>,
    out: Vec<f64>,
}

impl StreamKernel<f64> for Recorder {
    fn load(&mut self, i: usize) -> f64 {
        self.input[i]
    }
    fn pad(&mut self) -> f64 {
        0.0
    }
    fn emit(&mut self, level: usize, c: usize, w: &StreamQueue<'_, f64>) -> Result<f64, MqError> {
        let v = if w.is_full() {
            w.compute(&self.coeffs, level)?
        } else {
            *w.get(w.window() / 2).unwrap_or(&0.0)
        };
        self.log.push((level, c, v));
        Ok(v)
    }
    fn store(&mut self, _c: usize, v: f64) {
        self.out.push(v);
    }
}

type StreamLog = (Vec<(usize, usize, f64)>, Vec<f64>);

fn stream(depth: usize, rad: usize, v: Variant, lazy: bool, input: &[f64]) -> Result<StreamLog, String> {
    let mut q = CircularMultiQueue::new(depth, rad, v, lazy, None, f64::NAN).map_err(|e| e.to_string())?;
    let mut k = Recorder {
        input: input.to_vec(),
        coeffs: (0..2 * rad + 1).map(|i| 0.5 / (i + 1) as f64).collect(),
        log: Vec::new(),
        out: Vec::new(),
    };
    q.stream(input.len(), &mut k).map_err(|e| e.to_string())?;
    k.log.sort_by_key(|&(l, c, _)| (l, c));
    Ok((k.log, k.out))
}

fn c9_variant_equivalence() -> Outcome {
    let mut rng = SplitMix64::new(9);
    let input: Vec<f64> = (0..10_000).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mut cases = 0;
    for depth in 1..=8 {
        for rad in 1..=2 {
            for lazy in [false, true] {
                let base = stream(depth, rad, Variant::ShiftingData, lazy, &input)?;
                ensure!(
                    base.1.len() == input.len(),
                    "depth {depth} rad {rad}: {} outputs",
                    base.1.len()
                );
                for v in [Variant::ShiftingAddress, Variant::ComputingAddress] {
                    ensure!(
                        stream(depth, rad, v, lazy, &input)? == base,
                        "depth {depth} rad {rad} lazy {lazy} {v:?}"
                    );
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} depth/radius/mode cases over 10^4 steps"))
}

fn c10_valid_proportion_and_syncs() -> Outcome {
    let mut rng = SplitMix64::new(10);
    let (mut sm, mut dev) = (0, 0);
    let mut worst: f64 = 0.0;
    for (name, scheme, lazy, rst) in combinations() {
        let s = bench(name);
        for _ in 0..10 {
            let (g, p) = random_case(&mut rng, &s, scheme, lazy, rst);
            let (_, trace) = run_tiling(&g, &s, &p).map_err(|e| e.to_string())?;
            let r = trace_summary(&trace, &s, &p, g.extents()).map_err(|e| e.to_string())?;
            match scheme {
                Scheme::SmTiling => {
                    let model = r.model_valid_proportion.ok_or("no model V")?;
                    let d = (r.valid_proportion - model).abs();
                    ensure!(d < 1e-12, "{name} {:?} {p:?}: |dV| {d}", g.extents());
                    worst = worst.max(d);
                    sm += 1;
                }
                Scheme::DeviceTiling => {
                    let per = if lazy { 1 } else { p.t as u64 };
                    ensure!(
                        r.syncs.device == per * r.device_tiles,
                        "{name} {p:?}: {} syncs over {} tiles",
                        r.syncs.device,
                        r.device_tiles
                    );
                    dev += 1;
                }
            }
        }
    }
    Ok(format!("{sm} sm runs (max |dV| {worst:.1e}), {dev} device runs"))
}

fn c11_accounting() -> Outcome {
    let measure = |name: &str, rst: bool, scheme: Scheme| -> Result<f64, String> {
        let s = bench(name);
        let dom: Vec<usize> = match s.dims() {
            1 => vec![64],
            2 => vec![48, 40],
            _ => vec![24, 20, 16],
        };
        let g = Grid::random(&dom, 11, Boundary::FixedValue).map_err(|e| e.to_string())?;
        let tile = vec![16; s.dims() - 1];
        let p = match scheme {
            Scheme::SmTiling => TilingParams::sm(2, &tile),
            Scheme::DeviceTiling => TilingParams::device(2, &tile, &vec![2; s.dims() - 1]),
        }
        .rst(rst);
        let (_, trace) = run_tiling(&g, &s, &p).map_err(|e| e.to_string())?;
        Ok(trace_summary(&trace, &s, &p, &dom)
            .map_err(|e| e.to_string())?
            .a_sm_measured)
    };
    for e in catalog().into_iter().filter(|e| e.dims > 1) {
        for scheme in [Scheme::SmTiling, Scheme::DeviceTiling] {
            let a = measure(e.name, false, scheme)?;
            ensure!(a == e.sm_accesses_no_rst as f64, "{} {scheme} w/o RST: {a}", e.name);
        }
    }
    for (name, want) in [("j2d5pt", 4.0), ("j2d9pt", 6.0), ("j3d7pt", 4.5), ("j3d13pt", 7.0)] {
        for scheme in [Scheme::SmTiling, Scheme::DeviceTiling] {
            let a = measure(name, true, scheme)?;
            ensure!(a == want, "{name} {scheme} w/ RST: {a}");
        }
    }
    Ok("nine stencils w/o RST, four star stencils w/ RST, both schemes".into())
}

fn random_profile(rng: &mut SplitMix64) -> KernelProfile {
    let d_all = rng.uniform(1.0, 1e6);
    KernelProfile {
        a_gm: rng.uniform(0.5, 4.0),
        a_sm: rng.uniform(0.5, 30.0),
        a_cmp: rng.uniform(1.0, 60.0),
        d_gm: rng.uniform(1.0, 1e6),
        d_gm_per_t: if rng.below(2) == 0 { 0.0 } else { rng.uniform(0.0, 1e3) },
        d_sm: rng.uniform(1.0, 1e6),
        d_cmp: d_all,
        d_all,
        t: 1.0 + rng.below(64) as f64,
        rad: 1 + rng.below(4) as usize,
        tile_x: 32,
        tile_y: 32,
        n_syncs: 1,
    }
}

fn c12_model_properties() -> Outcome {
    let hw = a100();
    let mut rng = SplitMix64::new(12);
    for case in 0..1000 {
        let p = random_profile(&mut rng);
        let k = rng.uniform(0.01, 100.0);
        let fast = hw.scaled(k);
        let (a, b) = (attainable_perf(&hw, &p), attainable_perf(&fast, &p));
        ensure!((b / (a * k) - 1.0).abs() < 1e-9, "case {case}: P {a} -> {b} at k {k}");
        let (ba, bb) = (
            bottleneck(&component_times(&hw, &p)),
            bottleneck(&component_times(&fast, &p)),
        );
        ensure!(ba == bb, "case {case}: bottleneck {ba:?} -> {bb:?}");
        let scan = (1..=256u32).find(|&t| bottleneck(&component_times(&hw, &p.with_t(t as f64))) != Component::Gm);
        match (min_depth_to_shift(&hw, &p), min_depth_to_shift(&fast, &p)) {
            (Ok(x), Ok(y)) => {
                ensure!(
                    (x.t_real / y.t_real - 1.0).abs() < 1e-9,
                    "case {case}: t {} vs {}",
                    x.t_real,
                    y.t_real
                );
                let got = Some(x.t_int).filter(|&t| t <= 256);
                ensure!(got == scan, "case {case}: depth {got:?}, scan {scan:?}");
            }
            (Err(_), Err(_)) => ensure!(scan.is_none(), "case {case}: unattainable but scan found {scan:?}"),
            _ => return Err(format!("case {case}: attainability changed with scale")),
        }
        let tile = 8 + rng.below(500) as usize;
        let rad = p.rad;
        let two = rng.below(2) == 0;
        let kk = if two { 2 } else { 1 };
        let mut prev = 1.0;
        for t in 1..=64 {
            if kk * t * rad >= tile {
                ensure!(
                    valid_proportion_sm(&[tile], t, rad, two).is_err(),
                    "case {case}: empty core accepted"
                );
                break;
            }
            let v = valid_proportion_sm(&[tile, tile], t, rad, two).map_err(|e| e.to_string())?;
            ensure!(v < prev, "case {case}: V_SM not decreasing at t {t}");
            prev = v;
        }
        let (lo, sync) = (rng.uniform(1e-9, 1e-3), rng.uniform(1e-9, 1e-3));
        let hi = lo * rng.uniform(1.0001, 10.0);
        ensure!(
            valid_proportion_device(lo, sync, 1) < valid_proportion_device(hi, sync, 1),
            "case {case}: V_D not increasing"
        );
    }
    for e in catalog() {
        let s = bench(e.name);
        let a = choose_scheme(&hw, &s, &e.domain).map_err(|e| e.to_string())?;
        for k in [0.3, 3.0] {
            let b = choose_scheme(&hw.scaled(k), &s, &e.domain).map_err(|e| e.to_string())?;
            ensure!(
                (a.scheme, a.t, a.bottleneck) == (b.scheme, b.t, b.bottleneck),
                "{} at k {k}",
                e.name
            );
        }
        ensure!(
            a.predicted_pp_gcells == a.predicted_p_gcells * a.predicted_v,
            "{}: PP != P*V",
            e.name
        );
        for c in &a.candidates {
            ensure!(
                attainable_perf(&hw, &c.profile) == c.p_cells_per_s,
                "{}: P not reproducible",
                e.name
            );
        }
    }
    Ok("1000 random profiles plus catalog plans".into())
}

const DETERMINISM_SUITE: &str = r#"
seed = 13
[[stencils]]
name = "j2d5pt"
extents = [300, 260]
[[stencils]]
name = "j2d25pt"
extents = [140, 120]
[[stencils]]
name = "j3d7pt"
extents = [48, 40, 40]
scheme = "device-tiling"
[[stencils]]
name = "poisson"
extents = [40, 36, 36]
rst = true
"#;

fn simulate_bytes(workers: usize, dir: &Path) -> Result<Vec<Vec<u8>>, String> {
    let suite = SuiteConfig::from_toml(DETERMINISM_SUITE, "determinism").map_err(|e| e.to_string())?;
    let ctx = Context::new(a100(), suite);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| e.to_string())?;
    let report = pool.install(|| cmd_simulate(&ctx)).map_err(|e| e.to_string())?;
    if let Some(e) = report.failure() {
        return Err(e.to_string());
    }
    let files = write_report(&report, dir).map_err(|e| e.to_string())?;
    files
        .iter()
        .map(|f| std::fs::read(f).map_err(|e| e.to_string()))
        .collect()
}

fn c13_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = simulate_bytes(1, &tmp.path().join("a"))?;
    for (i, w) in [1, 8, 8].into_iter().enumerate() {
        ensure!(
            simulate_bytes(w, &tmp.path().join(format!("b{i}")))? == base,
            "library run {i} with {w} workers differs"
        );
    }
    std::fs::write(tmp.path().join("suite.toml"), DETERMINISM_SUITE).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, w) in ["1", "8", "1", "8"].into_iter().enumerate() {
        let out = format!("cli{i}");
        let o = Command::new(env!("CARGO_BIN_EXE_tempoblock"))
            .args(["simulate", "--suite", "suite.toml", "--out", &out, "--workers", w])
            .current_dir(tmp.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(
            o.status.success(),
            "binary with {w} workers: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let read = |f: &str| std::fs::read(tmp.path().join(&out).join(f)).unwrap_or_default();
        let stdout = String::from_utf8_lossy(&o.stdout).replace(&out, "OUT");
        outputs.push((
            stdout,
            read("simulate.json"),
            read("simulate.csv"),
            read("simulate-roofline.csv"),
        ));
    }
    ensure!(
        outputs
            .iter()
            .all(|o| o.1 == base[0] && o.2 == base[1] && o.3 == base[2]),
        "binary report differs from library"
    );
    ensure!(
        outputs.windows(2).all(|w| w[0].0 == w[1].0),
        "stdout differs across runs"
    );
    Ok(format!(
        "{} bytes identical across 4 library and 4 binary runs (1 and 8 workers)",
        base[0].len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("depth to shift, j2d5pt", c1_five_point_depth),
        ("depth to shift, j3d7pt device 32x32", c2_seven_point_device_depth),
        ("minimum 3-D tile width", c3_tile_width),
        ("device valid proportion", c4_device_valid_proportion),
        ("scheme choice and j3d7pt PP", c5_scheme_choice),
        ("Little's law 256x4", c6_littles_law),
        ("circular ranges", c7_ranges),
        ("oracle equivalence", c8_oracle_equivalence),
        ("multi-queue variant equivalence", c9_variant_equivalence),
        ("valid proportion and sync counts", c10_valid_proportion_and_syncs),
        ("on-chip access accounting", c11_accounting),
        ("cost model properties", c12_model_properties),
        ("end-to-end determinism", c13_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
