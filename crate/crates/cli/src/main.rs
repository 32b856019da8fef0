use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use honest_forest::diagnostics::{centered_min_split_recursion, delta_probe, summability_probe, ProbeMode};
use honest_forest::experiments::{field_line, run, write_artifacts, ExperimentConfig, RunOptions};
use honest_forest::schedule::Schedule;
use honest_forest::weights::{analytic_moments, empirical_moments, WeightScheme, WildLaw};
use honest_forest::Error;

const THREADS_VAR: &str = "HONEST_FOREST_THREADS";

#[derive(Parser)]
#[command(
    name = "honest-forest",
    version,
    about = "Honest trees, bootstrap forests and consistency experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config and write its artifacts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print analytic (and optionally Monte Carlo) moments of a weight scheme.
    Moments {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Number of trials (multinomial and subsampling schemes).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Replications for the Monte Carlo moments.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Log-scale of the log-normal wild weights.
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
    },
    /// Iterate the minimum-split recursion for centered trees.
    Recursion {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 200)]
        depth: usize,
    },
    /// Probe summability of a node-size schedule up to n_max.
    Probe {
        /// `poly:BETA`, `sqrtlog:BETA`, ...
        #[arg(long)]
        schedule: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long = "n-max", default_value_t = 1_000_000)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = ProbeArg::Weak)]
        mode: ProbeArg,
        /// Subsample exponent of the multinomial weights in bootstrap mode.
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Multinomial,
    WithoutReplacement,
    WildPoisson,
    WildLognormal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProbeArg {
    Weak,
    Strong,
    Bootstrap,
    Delta,
}

/// A failure with its exit status: 2 for usage and config, 3 for runtime.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: e.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Moments {
            scheme,
            m,
            n,
            reps,
            seed,
            sigma,
        } => moments(scheme, m, n, reps, seed, sigma),
        Command::Recursion { p, depth } => recursion(p, depth),
        Command::Probe {
            schedule,
            d,
            n_max,
            mode,
            gamma,
        } => probe(&schedule, d, n_max, mode, gamma),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Some(t)),
            _ => Err(usage(format!(
                "{THREADS_VAR} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let shown = path.display();
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{shown}: {e}")))?;
    ExperimentConfig::from_json(&text).map_err(|e| match e {
        Error::Json(err) => usage(format!("{shown}:{}:{}: {err}", err.line(), err.column())),
        Error::Config { ref field, .. } => {
            let line = field_line(&text, field).unwrap_or(1);
            usage(format!("{shown}:{line}: {e}"))
        }
        other => usage(format!("{shown}: {other}")),
    })
}

fn simulate(config: &Path, out: &Path) -> Result<(), Failure> {
    let threads = threads_from_env()?;
    let cfg = load_config(config)?;
    let report = run(&cfg, RunOptions { threads }).map_err(runtime)?;
    let manifest = write_artifacts(&cfg, &report, out, env!("CARGO_PKG_VERSION")).map_err(runtime)?;
    for t in &report.trends {
        let fraction = t.fraction.map_or("n/a".to_string(), |f| format!("{f:.2}"));
        println!(
            "trend {} {} ({:?}): {fraction} {}",
            t.query_id,
            t.metric,
            t.direction,
            if t.passes { "ok" } else { "weak" }
        );
    }
    for p in &manifest.output_paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn moments(
    scheme: SchemeArg,
    m: Option<usize>,
    n: usize,
    reps: Option<usize>,
    seed: u64,
    sigma: f64,
) -> Result<(), Failure> {
    let trials = || m.ok_or_else(|| usage("--m is required for this scheme"));
    let scheme = match scheme {
        SchemeArg::Multinomial => WeightScheme::multinomial(trials()?),
        SchemeArg::WithoutReplacement => WeightScheme::without_replacement(trials()?),
        SchemeArg::WildPoisson => WeightScheme::wild_poisson(),
        SchemeArg::WildLognormal => WeightScheme::Wild {
            law: WildLaw::LogNormalUnitMean { sigma },
        },
    };
    let analytic = analytic_moments(&scheme, n).map_err(|e| usage(e.to_string()))?;
    let mut doc = json!({ "scheme": scheme, "n": n, "analytic": analytic });
    if let Some(reps) = reps {
        let e = empirical_moments(&scheme, n, reps, seed).map_err(|e| usage(e.to_string()))?;
        doc["empirical"] = json!(e.report);
        doc["empirical_std_err"] = json!(e.std_err);
        doc["reps"] = json!(reps);
    }
    println!("{}", serde_json::to_string_pretty(&doc).map_err(runtime)?);
    Ok(())
}

fn recursion(p: f64, depth: usize) -> Result<(), Failure> {
    let r = centered_min_split_recursion(p, depth).map_err(|e| usage(e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&r).map_err(runtime)?);
    Ok(())
}

fn probe(schedule: &str, d: usize, n_max: usize, mode: ProbeArg, gamma: f64) -> Result<(), Failure> {
    let schedule: Schedule = schedule.parse().map_err(|e: Error| usage(e.to_string()))?;
    if mode == ProbeArg::Delta {
        let rows = delta_probe(&schedule, n_max).map_err(|e| usage(e.to_string()))?;
        println!("delta,final_log_term,log_partial_sum,tail_growth,verdict");
        for r in rows {
            println!(
                "{},{},{},{},{}",
                r.delta, r.final_log_term, r.log_partial_sum, r.tail_growth, r.verdict
            );
        }
        println!("# only these delta values are probed; numerical evidence, not proof");
        return Ok(());
    }
    let mode = match mode {
        ProbeArg::Weak => ProbeMode::Weak,
        ProbeArg::Strong => ProbeMode::StrongPartialSum,
        ProbeArg::Bootstrap => ProbeMode::BootstrapPartialSum {
            scheme: WeightScheme::Multinomial {
                m_schedule: Schedule::PolySubsample { gamma },
            },
        },
        ProbeArg::Delta => unreachable!("handled above"),
    };
    let report = summability_probe(&schedule, d, n_max, &mode).map_err(|e| usage(e.to_string()))?;
    println!("n,log_term,log_partial_sum");
    for p in &report.points {
        println!("{},{},{}", p.n, p.log_term, p.log_partial_sum);
    }
    println!(
        "verdict: {} (numerical evidence up to n_max = {n_max}, not proof)",
        report.verdict
    );
    Ok(())
}
