use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isac_core::harness::{
    compare_solvers, run_experiment, validate_scenario, Assignment, ExperimentSpec, InitMode, Override, Prepared,
    RunOutput, Sweep,
};
use isac_core::{Error, SolverKind};

/// CRLB-constrained power allocation for cell-free MIMO ISAC.
#[derive(Debug, Parser)]
#[command(name = "isac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario and write its trace and summary.
    Run(RunArgs),
    /// Repeat a run over a comma list given with `--set key=v1,v2,...`.
    Sweep(RunArgs),
    /// Run several solvers on one scenario and tabulate the results.
    Compare(RunArgs),
    /// Check the model invariants on a scenario.
    Validate(ScenarioArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario file or bundled scenario name.
    #[arg(long, default_value = "cellfree-isac")]
    scenario: String,
    /// Override a scenario field, e.g. `constraints.delta_l_sq=500`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Solver name; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',')]
    solver: Vec<SolverKind>,
    /// `uniform`, `heuristic`, or an explicit vector `r1,r2,...`.
    #[arg(long, default_value = "uniform")]
    init: InitMode,
    /// Output directory for CSV/JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidInput(_) => Failure::Usage(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn split_sets(sets: &[String]) -> Result<(Vec<Override>, Option<Sweep>), Failure> {
    let mut overrides = Vec::new();
    let mut sweep = None;
    for s in sets {
        match Assignment::parse(s)? {
            Assignment::Single(o) => overrides.push(o),
            Assignment::Sweep(w) if sweep.is_none() => sweep = Some(w),
            Assignment::Sweep(_) => return Err(Failure::Usage("only one swept key is supported".into())),
        }
    }
    Ok((overrides, sweep))
}

fn specs(args: &RunArgs, default: &[SolverKind]) -> Result<Vec<ExperimentSpec>, Failure> {
    let (overrides, sweep) = split_sets(&args.scenario.set)?;
    let solvers = if args.solver.is_empty() { default } else { &args.solver };
    Ok(solvers
        .iter()
        .map(|&k| ExperimentSpec {
            scenario: args.scenario.scenario.clone(),
            solver: k,
            overrides: overrides.clone(),
            init: args.init.clone(),
            sweep: sweep.clone(),
            out_dir: args.out.clone(),
        })
        .collect())
}

fn report(outputs: &[RunOutput]) -> bool {
    let mut all = true;
    for o in outputs {
        let s = &o.summary;
        all &= s.converged;
        let point = s.overrides.last().map(|o| format!(" [{o}]")).unwrap_or_default();
        println!(
            "{}{point}: {:?} after {} iterations / {} epochs, sinr {:.6} ({:.3} dB), trace_l {:.6}, trace_v {:.6}, sum(rho) {:.6}",
            s.solver,
            s.status,
            s.inner_iterations,
            s.outer_iterations,
            s.final_sinr,
            s.final_sinr_db,
            s.final_trace_l,
            s.final_trace_v,
            s.final_total_power
        );
        if let (Some(csv), Some(json)) = (&o.csv_path, &o.json_path) {
            println!("  wrote {} and {}", csv.display(), json.display());
        }
    }
    all
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Run(args) => {
            let specs = specs(&args, &[SolverKind::PpMcgIls])?;
            if specs.iter().any(|s| s.sweep.is_some()) {
                return Err(Failure::Usage("`run` takes single values; use `sweep` for comma lists".into()));
            }
            let mut ok = true;
            for spec in &specs {
                ok &= report(&run_experiment(spec)?);
            }
            Ok(ok)
        }
        Command::Sweep(args) => {
            let specs = specs(&args, &[SolverKind::PpMcgIls])?;
            if specs.iter().any(|s| s.sweep.is_none()) {
                return Err(Failure::Usage("`sweep` needs one `--set key=v1,v2,...`".into()));
            }
            let mut ok = true;
            for spec in &specs {
                ok &= report(&run_experiment(spec)?);
            }
            Ok(ok)
        }
        Command::Compare(args) => {
            let default = [
                SolverKind::PpMcgIls,
                SolverKind::PpMsdIls,
                SolverKind::PpNcg,
                SolverKind::PpNsd,
            ];
            let specs = specs(&args, &default)?;
            let (cmp, outputs) = compare_solvers(&specs)?;
            println!("{cmp}");
            if let Some(dir) = &args.out {
                let path = dir.join(format!("{}_compare.json", cmp.scenario));
                cmp.write_json(&path)?;
                println!("wrote {}", path.display());
            }
            Ok(outputs.iter().all(|o| o.summary.converged))
        }
        Command::Validate(args) => {
            let (overrides, sweep) = split_sets(&args.set)?;
            if sweep.is_some() {
                return Err(Failure::Usage("`validate` takes single values".into()));
            }
            let prepared = Prepared::load(&args.scenario, &overrides)?;
            let report = validate_scenario(&prepared)?;
            println!("{report}");
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("isac: solver did not converge or a check failed");
            ExitCode::from(1)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("isac: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("isac: {msg}");
            ExitCode::from(2)
        }
    }
}
