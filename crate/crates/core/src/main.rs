use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use linear_ea::constants::{h, schedule_integral, solve_alpha};
use linear_ea::engine::{default_max_evals, Acceptance};
use linear_ea::fitness::FunctionSpec;
use linear_ea::harness::{
    compare_policies, run_grid_with, to_json_line, to_json_pretty, BenchReport, Execution,
    ExperimentConfig, PolicySpec, PreparedPolicy, RunSettings,
};
use linear_ea::isu::{lower_bound_diagnostic, make_rates, rate_sum};
use linear_ea::{Error, Result};

#[derive(Parser)]
#[command(name = "linear-ea", version, about = "(1+1) EA experiments on linear functions with hidden support")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the schedule constants alpha and beta.
    Constants {
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run a single seeded trial and print its result as JSON.
    Run {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_evals: Option<u64>,
        /// Accept only strict improvements.
        #[arg(long)]
        strict: bool,
        /// JSON-lines dump: adaptive round trace, or the fitness trajectory.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Trajectory sampling stride for non-adaptive policies.
        #[arg(long, default_value_t = 1)]
        trace_stride: u64,
    },
    /// Run an experiment grid described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Ratio of mean runtimes of two single-policy reports at size n.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Evaluate the lower-bound diagnostic M_n of a position-rate sequence.
    IsuDiagnostic {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Serialize)]
struct ConstantsOut {
    alpha: f64,
    beta: f64,
    h_alpha_beta: f64,
    residual: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct DiagnosticOut {
    spec: String,
    n: usize,
    rate_sum: f64,
    m_n: f64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Constants { tol } => {
            let c = solve_alpha(tol)?;
            let quad = tol / 16.0;
            let out = ConstantsOut {
                alpha: c.alpha,
                beta: c.beta,
                h_alpha_beta: h(c.alpha, c.beta, quad)?,
                residual: schedule_integral(c.alpha, quad)? - 1.0,
                tolerance: c.tolerance,
            };
            print!("{}", to_json_pretty(&out)?);
        }
        Command::Run {
            function,
            policy,
            seed,
            max_evals,
            strict,
            trace,
            trace_stride,
        } => {
            let spec: FunctionSpec = function.parse()?;
            let f = spec.build_fixed()?;
            let policy: PolicySpec = policy.parse()?;
            let algorithm = policy.prepare()?.for_size(f.n())?;
            let settings = RunSettings {
                max_evals: max_evals.unwrap_or_else(|| default_max_evals(f.n())),
                acceptance: if strict { Acceptance::Strict } else { Acceptance::Weak },
                trajectory_stride: trace.as_ref().map(|_| trace_stride.max(1)),
            };
            let (mut result, rounds) = algorithm.run(&f, &settings, seed)?;
            if let Some(path) = trace {
                let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
                match &rounds {
                    Some(t) => {
                        for r in &t.rounds {
                            writeln!(w, "{}", to_json_line(r)?)?;
                        }
                    }
                    None => {
                        for p in result.trajectory.iter().flatten() {
                            writeln!(w, "{}", to_json_line(p)?)?;
                        }
                    }
                }
                w.flush()?;
                result.trajectory = None;
            }
            print!("{}", to_json_pretty(&result)?);
        }
        Command::Bench { config, workers } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exec = if workers == 0 {
                Execution::Parallel
            } else {
                Execution::Workers(workers)
            };
            let out = run_grid_with(&cfg, exec)?;
            out.write_outputs(&cfg)?;
            if cfg.report.is_none() {
                print!("{}", out.report.to_json()?);
            }
        }
        Command::Compare { a, b, n } => {
            let r = compare_policies(&BenchReport::load(&a)?, &BenchReport::load(&b)?, n)?;
            print!("{}", to_json_pretty(&r)?);
        }
        Command::IsuDiagnostic { spec, n } => {
            let parsed: PolicySpec = spec.parse()?;
            let seq = match parsed.prepare()? {
                PreparedPolicy::Isu(seq) => seq,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "`{spec}` is not an isu:iterlog:<k> or isu:custom:<path> spec"
                    )))
                }
            };
            let rates = make_rates(&seq, n)?;
            let out = DiagnosticOut {
                spec: parsed.to_string(),
                n,
                rate_sum: rate_sum(&rates, n),
                m_n: lower_bound_diagnostic(&rates, n)?,
            };
            print!("{}", to_json_pretty(&out)?);
        }
    }
    Ok(())
}
