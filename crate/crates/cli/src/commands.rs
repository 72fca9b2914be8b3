use tempoblock::engine::{run_tiling, trace_summary, Scheme, TilingParams};
use tempoblock::model::{choose_scheme_with, HardwareSpec, Plan, PlannerConfig};
use tempoblock::rng::SplitMix64;
use tempoblock::stencil::{catalog, make_benchmark, reference_run, Grid, StencilShape};

use crate::report::{Check, OracleVerdict, Report, RooflinePoint, Simulation, StencilRecord, Verdict};
use crate::suite::{desk_domain, table_domain, SuiteConfig, SuiteEntry};
use crate::CliError;

/// Everything a command needs after flags and the suite file are merged.
#[derive(Debug, Clone)]
pub struct Context {
    pub hardware: HardwareSpec,
    pub suite: SuiteConfig,
    pub seed: u64,
    pub max_cells: usize,
    pub planner: PlannerConfig,
}

impl Context {
    pub fn new(hardware: HardwareSpec, suite: SuiteConfig) -> Self {
        Self {
            hardware,
            seed: suite.seed,
            max_cells: suite.max_cells,
            suite,
            planner: PlannerConfig::default(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn two_sided_halo(mut self, on: bool) -> Self {
        self.planner.two_sided = on;
        self
    }

    pub fn max_cells(mut self, n: usize) -> Self {
        self.max_cells = n;
        self
    }

    fn report(&self, command: &str, records: Vec<StencilRecord>) -> Report {
        Report {
            command: command.into(),
            hardware: self.hardware.name.clone(),
            seed: self.seed,
            two_sided_halo: self.planner.two_sided,
            records,
        }
    }

    fn plan(&self, stencil: &StencilShape, domain: &[usize]) -> Result<Plan, CliError> {
        choose_scheme_with(&self.hardware, stencil, domain, &self.planner).map_err(|source| CliError::Plan {
            stencil: stencil.name().to_string(),
            source,
        })
    }

    fn record(&self, stencil: &StencilShape, domain: Vec<usize>, plan: Plan) -> StencilRecord {
        let flops = stencil.flops_per_cell() as f64;
        let roofline = plan
            .candidates
            .iter()
            .map(|c| {
                RooflinePoint::new(
                    stencil.name(),
                    c.scheme.as_str(),
                    &c.profile,
                    flops,
                    self.hardware.cell_bytes,
                    c.p_cells_per_s,
                    c.bottleneck.as_str(),
                )
            })
            .collect();
        StencilRecord {
            stencil: stencil.name().to_string(),
            domain,
            reference_depth: catalog()
                .into_iter()
                .find(|c| c.name == stencil.name())
                .and_then(|c| c.reference_depth),
            plan,
            roofline,
            simulation: None,
        }
    }
}

fn stencil_for(entry: &SuiteEntry) -> Result<StencilShape, CliError> {
    make_benchmark(&entry.name).map_err(|e| CliError::Config(e.to_string()))
}

/// Plans every suite stencil at its table domain (or the override).
pub fn cmd_plan(ctx: &Context) -> Result<Report, CliError> {
    let mut records = Vec::with_capacity(ctx.suite.stencils.len());
    for entry in &ctx.suite.stencils {
        let stencil = stencil_for(entry)?;
        let domain = table_domain(entry);
        let plan = ctx.plan(&stencil, &domain)?;
        records.push(ctx.record(&stencil, domain, plan));
    }
    Ok(ctx.report("plan", records))
}

/// Plans each stencil on a desk-sized domain, runs the tiling engine with the
/// planned (or overridden) parameters and checks the result against the
/// reference executor and the model.
///
/// Oracle mismatches and failed checks are recorded in the report; use
/// [`Report::failure`] to turn them into an error. Invalid parameters fail
/// before anything runs for that stencil.
pub fn cmd_simulate(ctx: &Context) -> Result<Report, CliError> {
    let mut seeds = SplitMix64::new(ctx.seed);
    let mut records = Vec::with_capacity(ctx.suite.stencils.len());
    for entry in &ctx.suite.stencils {
        let seed = seeds.next_u64();
        let stencil = stencil_for(entry)?;
        let domain = match &entry.extents {
            Some(x) => x.clone(),
            None => desk_domain(&table_domain(entry), ctx.max_cells, 2 * stencil.radius() + 1),
        };
        let plan = ctx.plan(&stencil, &domain)?;
        let params = simulation_params(entry, &plan)?;
        let grid = Grid::random(&domain, seed, entry.boundary.unwrap_or_default())
            .map_err(|e| CliError::Config(format!("{}: {e}", entry.name)))?;
        let precondition = |source| CliError::Precondition {
            stencil: entry.name.clone(),
            source,
        };
        let (out, trace) = run_tiling(&grid, &stencil, &params).map_err(precondition)?;
        let summary = trace_summary(&trace, &stencil, &params, &domain).map_err(precondition)?;
        let want = reference_run(&grid, &stencil, params.t).map_err(|e| CliError::Config(e.to_string()))?;
        let diff = out.first_difference(&want, 0.0);
        let max_diff = out.max_abs_difference(&want);
        let oracle = OracleVerdict {
            verdict: Verdict::of(diff.is_none()),
            first_difference: diff.map(|d| d.0),
            engine_value: diff.map(|d| d.1).filter(|v| v.is_finite()),
            reference_value: diff.map(|d| d.2).filter(|v| v.is_finite()),
            max_abs_difference: Some(max_diff).filter(|v| v.is_finite()),
        };
        let mut checks = Vec::new();
        match params.scheme {
            Scheme::SmTiling => {
                if let Some(v) = summary.model_valid_proportion {
                    checks.push(Check::new("valid_proportion", summary.valid_proportion, v, 1e-12));
                }
            }
            Scheme::DeviceTiling => {
                let per_tile = if params.lazy { 1 } else { params.t as u64 };
                let want = (per_tile * summary.device_tiles) as f64;
                checks.push(Check::new("device_syncs", summary.syncs.device as f64, want, 0.0));
            }
        }
        if !params.rst {
            checks.push(Check::new(
                "a_sm",
                summary.a_sm_measured,
                stencil.sm_accesses_no_rst() as f64,
                0.0,
            ));
        } else if stencil.is_star() {
            checks.push(Check::new(
                "a_sm",
                summary.a_sm_measured,
                stencil.sm_accesses_with_rst(),
                0.0,
            ));
        }
        let mut record = ctx.record(&stencil, domain, plan);
        record.simulation = Some(Simulation {
            params,
            seed,
            oracle,
            summary,
            checks,
        });
        records.push(record);
    }
    Ok(ctx.report("simulate", records))
}

fn simulation_params(entry: &SuiteEntry, plan: &Plan) -> Result<TilingParams, CliError> {
    let scheme = entry.scheme.unwrap_or(plan.scheme);
    let base = plan
        .candidate(scheme)
        .ok_or_else(|| CliError::Config(format!("{}: {scheme} is not feasible for this domain", entry.name)))?;
    let mut p = base.params();
    if let Some(t) = entry.t {
        p.t = t;
    }
    if let Some(tile) = &entry.tile {
        p.tile = tile.clone();
    }
    if let Some(g) = &entry.device_tile_grid {
        p.device_tile_grid = g.clone();
    }
    if let Some(axis) = entry.stream_axis {
        p.stream_axis = Some(axis);
    }
    if let Some(v) = entry.variant {
        p.variant = v;
    }
    p.lazy = entry.lazy.unwrap_or(p.lazy);
    p.rst = entry.rst.unwrap_or(p.rst);
    p.prefetch = entry.prefetch.unwrap_or(p.prefetch);
    Ok(p)
}
