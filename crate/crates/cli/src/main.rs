use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use tempoblock::model::HardwareSpec;
use tempoblock_cli::{
    cmd_plan, cmd_simulate, cmd_validate, read_report, render_table, write_report, CliError, Context, SuiteConfig,
};

#[derive(Parser)]
#[command(
    name = "tempoblock",
    version,
    about = "Plan, simulate and check temporally blocked stencils"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Hardware preset name or a .toml/.json spec file [default: suite's, else a100]
    #[arg(long, global = true)]
    hardware: Option<String>,
    /// Suite file; without it every catalog stencil is used
    #[arg(long, global = true)]
    suite: Option<PathBuf>,
    /// Report directory [default: suite's output]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the tiling engine [default: available cores]
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for random grids [default: suite's, else 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Count the halo on both sides of an SM tile when predicting V
    #[arg(long, global = true, action = ArgAction::Set, default_value_t = true)]
    two_sided_halo: bool,
    /// Use the one-sided SM valid-proportion form (overrides --two-sided-halo)
    #[arg(long, global = true)]
    paper_parity: bool,
    /// Simulate catalog stencils at their full table domains
    #[arg(long, global = true)]
    full_size: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Choose a tiling scheme and depth for every suite stencil
    Plan,
    /// Run the tiling engine on desk-sized domains and check it
    Simulate,
    /// Recompute the published worked figures and compare
    Validate,
    /// Re-render a saved plan or simulate report
    Report {
        /// A plan.json or simulate.json written earlier
        #[arg(long)]
        from: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let suite = match &cli.suite {
        Some(p) => SuiteConfig::from_file(p)?,
        None => SuiteConfig::full_catalog(),
    };
    let hardware = HardwareSpec::resolve(cli.hardware.as_deref().unwrap_or(&suite.hardware))?;
    let out = cli.out.clone().unwrap_or_else(|| suite.output.clone());
    let two_sided = cli.two_sided_halo && !cli.paper_parity;
    let mut ctx = Context::new(hardware, suite).two_sided_halo(two_sided);
    if let Some(seed) = cli.seed {
        ctx = ctx.seed(seed);
    }
    if cli.full_size {
        ctx = ctx.max_cells(usize::MAX);
    }
    match &cli.command {
        Command::Plan => emit(&cmd_plan(&ctx)?, &out),
        Command::Simulate => {
            let report = cmd_simulate(&ctx)?;
            emit(&report, &out)?;
            report.failure().map_or(Ok(()), Err)
        }
        Command::Validate => {
            let rep = cmd_validate(&ctx.hardware, two_sided)?;
            print!("{}", rep.render());
            if cli.out.is_some() {
                std::fs::create_dir_all(&out).map_err(|e| CliError::Io {
                    path: out.display().to_string(),
                    message: e.to_string(),
                })?;
                let path = out.join("validate.csv");
                std::fs::write(&path, rep.to_csv()).map_err(|e| CliError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            }
            rep.result()
        }
        Command::Report { from } => {
            let report = read_report(from)?;
            emit(&report, &out)?;
            report.failure().map_or(Ok(()), Err)
        }
    }
}

fn emit(report: &tempoblock_cli::Report, out: &std::path::Path) -> Result<(), CliError> {
    print!("{}", render_table(report));
    for path in write_report(report, out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
