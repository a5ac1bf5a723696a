mod analyze;
mod checks;
mod config;
mod error;
mod manifest;
mod store;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use salem_core::build_construction;
use salem_core::norms::QuadraturePlan;

use crate::analyze::AnalyzeOptions;
use crate::checks::{run_suite, SuiteOptions};
use crate::config::Config;
use crate::error::{CliError, EXIT_FAILED, EXIT_OK};
use crate::manifest::{CheckRecord, RunManifest, MANIFEST_FILE};

pub const VERIFY_FILE: &str = "verify.json";

#[derive(Debug, Parser)]
#[command(name = "salem", version, about = "Build and check randomized Cantor measures with structured subsets")]
struct Cli {
    /// Worker threads for the analysis kernels.
    #[arg(long, env = "SALEM_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the level sets described by a config file.
    Construct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override a config entry, e.g. `--set seed=11`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Write CSV/JSON reports for a stored construction.
    Analyze(AnalyzeArgs),
    /// Run the full invariant suite; exit 0 iff everything holds.
    Verify {
        dir: PathBuf,
        /// Frequencies below this are checked exhaustively.
        #[arg(long, default_value_t = 1 << 16)]
        dense: i64,
    },
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    dir: PathBuf,
    /// Output directory, `DIR/analysis` by default.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    spectrum: bool,
    #[arg(long)]
    decay: bool,
    #[arg(long)]
    energy: bool,
    #[arg(long)]
    norms: bool,
    #[arg(long)]
    ratio: bool,
    #[arg(long, default_value_t = 0)]
    j_min: usize,
    #[arg(long)]
    j_max: Option<usize>,
    #[arg(long, default_value_t = 2)]
    ell_max: usize,
    /// Spectrum rows are `0 <= k < k_max`.
    #[arg(long, default_value_t = 4096)]
    k_max: i64,
    #[arg(long, default_value_t = 1 << 20)]
    decay_k_max: i64,
    #[arg(long, default_value_t = 0.4)]
    beta: f64,
    /// Energy orders `r`.
    #[arg(long = "r", value_delimiter = ',', default_values_t = [2u32, 3])]
    orders: Vec<u32>,
    #[arg(long = "p", value_delimiter = ',', default_values_t = [2.0, 3.0, 4.0])]
    ps: Vec<f64>,
    #[arg(long = "q", value_delimiter = ',', default_values_t = [2.0])]
    qs: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    cutoff_periods: u64,
    #[arg(long, default_value_t = 4)]
    subdivisions: u64,
}

fn command_line() -> Vec<String> {
    std::env::args().collect()
}

fn construct(config: PathBuf, out: PathBuf, set: Vec<String>) -> Result<u8, CliError> {
    let mut cfg = Config::load(&config)?;
    for (i, pair) in set.iter().enumerate() {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        cfg.set(k.trim(), v.trim(), i + 1)
            .map_err(|e| e.context("--set"))?;
    }
    let params = cfg.params()?;
    let mut manifest = RunManifest::new(command_line(), params.clone());
    let construction = build_construction(&params).map_err(|e| CliError::from(e).context("construction failed"))?;
    manifest.outputs = store::save_levels(&out, &construction)?;

    for a in &construction.audit {
        let level = a.level;
        let mut block = CheckRecord::new(
            "base-block-discrepancy",
            "construction",
            "|S_{B_x}(k)/t - S_[N](k)/N| <= eta for every rotation x and frequency k",
        );
        if let Some(r) = a.block_worst_ratio {
            block.record(r <= 1.0, 1.0 - r, || format!("level {level}"));
            manifest.checks.push(block);
        }
        let mut rot = CheckRecord::new("rotation-threshold", "construction", "rotation sums below lambda_j and lambda_{j,ell}");
        if let Some(r) = a.lambda_worst_ratio {
            rot.record(r <= 1.0, 1.0 - r, || format!("level {level}"));
            for (ell, &r) in a.lambda_ell_worst_ratio.iter().enumerate() {
                rot.record(r <= 1.0, 1.0 - r, || format!("level {level} ell={}", ell + 1));
            }
            manifest.checks.push(rot);
        }
    }
    manifest.audit = Some(serde_json::to_value(&construction.audit)?);
    manifest.finish();
    store::write_json(&out.join(MANIFEST_FILE), &manifest)?;
    eprintln!(
        "wrote {} level files and {MANIFEST_FILE} to {}",
        construction.levels.len(),
        out.display()
    );
    Ok(EXIT_OK)
}

fn analyze(args: AnalyzeArgs) -> Result<u8, CliError> {
    let run = store::load(&args.dir)?;
    let construction = run.construction()?;
    let any = args.spectrum || args.decay || args.energy || args.norms || args.ratio;
    let opts = AnalyzeOptions {
        spectrum: args.spectrum || !any,
        decay: args.decay || !any,
        energy: args.energy || !any,
        norms: args.norms || !any,
        ratio: args.ratio || !any,
        j_min: args.j_min,
        j_max: args.j_max,
        ell_max: args.ell_max,
        k_max: args.k_max,
        decay_k_max: args.decay_k_max,
        beta: args.beta,
        orders: args.orders,
        ps: args.ps,
        qs: args.qs,
        quadrature: QuadraturePlan {
            cutoff_periods: args.cutoff_periods,
            subdivisions: args.subdivisions,
            self_check: true,
        },
    };
    let out_dir = args.out.unwrap_or_else(|| analyze::default_out(&args.dir));
    let mut manifest = RunManifest::new(command_line(), construction.params.clone());
    analyze::run(&construction, &opts, &out_dir, &mut manifest)?;
    manifest.finish();
    store::write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    for c in &manifest.checks {
        report_line(c);
    }
    Ok(if manifest.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn report_line(c: &CheckRecord) {
    let status = if c.passed { "PASS" } else { "FAIL" };
    let slack = c.worst_slack.map(|s| format!(" slack={s:.6}")).unwrap_or_default();
    let witness = c.witness.as_deref().map(|w| format!(" at {w}")).unwrap_or_default();
    let detail = c.detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{status} {} [{}]{slack}{witness}{detail}", c.name, c.module);
}

fn verify(dir: PathBuf, dense: i64) -> Result<u8, CliError> {
    let run = store::load(&dir)?;
    let construction = run.unchecked();
    let mut manifest = RunManifest::new(command_line(), construction.params.clone());
    let opts = SuiteOptions {
        dense,
        ..SuiteOptions::default()
    };
    manifest.checks = run_suite(&construction, &opts);
    manifest.finish();
    manifest.outputs = vec![VERIFY_FILE.into()];
    store::write_json(&dir.join(VERIFY_FILE), &manifest)?;
    for c in &manifest.checks {
        report_line(c);
    }
    Ok(if manifest.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(error::EXIT_RESOURCE);
        }
    }
    let result = match cli.command {
        Command::Construct { config, out, set } => construct(config, out, set),
        Command::Analyze(args) => analyze(args),
        Command::Verify { dir, dense } => verify(dir, dense),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
