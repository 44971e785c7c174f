use clap::Parser;
use star_gns::error::Error;
use star_gns::experiment::{run, ExperimentConfig, ExperimentKind};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

/// Batch experiments over star products, mode-field Gram matrices, and their
/// quotient/Krein analysis. One experiment per invocation; deterministic
/// reports for equal seeds.
#[derive(Parser, Debug)]
#[command(name = "star-gns", version)]
struct Cli {
    /// Experiment kind: star_eval | gram | quotient_krein | limit_sweep |
    /// hermiticity | cyclicity. Must match the config's `experiment` field.
    experiment: String,

    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,

    /// Output directory for report.json (and sweep.csv for sweeps).
    /// Falls back to $STAR_GNS_OUT, then the config's `output.dir`, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Cap the worker thread count. Results do not depend on this value.
    #[arg(long)]
    threads: Option<usize>,

    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("star-gns: error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let Some(kind) = ExperimentKind::from_name(&cli.experiment) else {
        return fail(
            EXIT_CONFIG,
            format!(
                "unknown experiment `{}` (expected star_eval, gram, quotient_krein, \
                 limit_sweep, hermiticity, or cyclicity)",
                cli.experiment
            ),
        );
    };

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, format!("cannot read {}: {e}", cli.config.display())),
    };
    let mut cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if cfg.experiment != kind {
        return fail(
            EXIT_CONFIG,
            format!(
                "config declares experiment `{}` but `{}` was requested",
                cfg.experiment.name(),
                kind.name()
            ),
        );
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return fail(EXIT_CONFIG, "--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            return fail(EXIT_CONFIG, format!("thread pool: {e}"));
        }
    }

    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e @ Error::BudgetExceeded { .. }) => return fail(EXIT_BUDGET, e),
        Err(e) => return fail(EXIT_CONFIG, e),
    };

    let out_dir = cli
        .out
        .or_else(|| std::env::var_os("STAR_GNS_OUT").map(PathBuf::from))
        .or_else(|| {
            cfg.output
                .as_ref()
                .and_then(|o| o.dir.as_ref())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(EXIT_CONFIG, format!("cannot create {}: {e}", out_dir.display()));
    }

    let report_path = out_dir.join("report.json");
    let mut body = match serde_json::to_string_pretty(&outcome.report) {
        Ok(b) => b,
        Err(e) => return fail(EXIT_CONFIG, format!("serialize report: {e}")),
    };
    body.push('\n');
    if let Err(e) = std::fs::write(&report_path, body) {
        return fail(EXIT_CONFIG, format!("cannot write {}: {e}", report_path.display()));
    }
    if let Some(csv) = &outcome.sweep_csv {
        let csv_path = out_dir.join("sweep.csv");
        if let Err(e) = std::fs::write(&csv_path, csv) {
            return fail(EXIT_CONFIG, format!("cannot write {}: {e}", csv_path.display()));
        }
    }

    for check in outcome.report["verdicts"]["checks"]
        .as_array()
        .into_iter()
        .flatten()
    {
        let name = check["name"].as_str().unwrap_or("?");
        let pass = check["pass"].as_bool().unwrap_or(false);
        match (check["value"].as_f64(), check["threshold"].as_f64()) {
            (Some(v), Some(t)) => println!(
                "{}  {name}: {v:.6e} (threshold {t:.6e})",
                if pass { "PASS" } else { "FAIL" }
            ),
            _ => println!("{}  {name}", if pass { "PASS" } else { "FAIL" }),
        }
    }
    println!(
        "{}  report: {}",
        if outcome.all_pass { "OK" } else { "CHECKS FAILED" },
        report_path.display()
    );

    if outcome.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
