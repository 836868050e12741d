//! Command-line front end: `default-config`, `simulate`, `sweep`, `ingest`,
//! `report`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{Condition, ExperimentConfig, Modality, Style};
use crate::error::{Error, Result};
use crate::experiment::{self, Metric, PhiMatrix, ResultSet, Trial};
use crate::generator;
use crate::report::{self, FigureKind, FigureSpec, HeatmapGrid};
use crate::stream::{Purpose, StreamKey};

/// Lowest-precedence seed source, consulted only without `--config`.
pub const SEED_ENV: &str = "XMODAL_SEED";

const KDE_GRID_POINTS: usize = 256;

#[derive(Debug, Parser)]
#[command(name = "xmodal", version, about = "Explanation delivery as a noisy channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the built-in configuration as JSON.
    DefaultConfig {
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the protocol and write samples, summaries, Φ and figures.
    Simulate(RunArgs),
    /// Recompute Φ over a λ₂ grid.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Override the λ₂ grid as LO:HI:STEP.
        #[arg(long, value_name = "LO:HI:STEP")]
        lambda2: Option<String>,
    },
    /// Score attribution vectors read from a CSV or JSON file.
    Ingest {
        /// Attribution file.
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        modality: Modality,
        #[arg(long)]
        style: Style,
        /// Rescale each vector to unit L1 norm before scoring.
        #[arg(long)]
        normalize: bool,
    },
    /// Everything `simulate` and `sweep` write, plus density plots.
    Report {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "LO:HI:STEP")]
        lambda2: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replaces the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Resolves the configuration with seed precedence flag > config > env.
pub fn resolve_config(args: &RunArgs, env_seed: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let mut cfg = ExperimentConfig::default();
            if let Some(raw) = env_seed {
                cfg.master_seed = raw.trim().parse().map_err(|_| {
                    Error::Usage(format!("{SEED_ENV} must be an unsigned integer, got {raw:?}"))
                })?;
            }
            cfg
        }
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate().into_result()?;
    Ok(cfg)
}

/// Parses `LO:HI:STEP` into an inclusive grid.
pub fn parse_lambda_range(range: &str) -> Result<Vec<f64>> {
    let usage = || Error::Usage(format!("--lambda2 expects LO:HI:STEP, got {range:?}"));
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage())?;
    let [lo, hi, step] = parts[..] else {
        return Err(usage());
    };
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(usage());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(Error::Usage("--lambda2 grid has too many points".into()));
    }
    // Round away accumulated float error so 0.1:1.0:0.1 gives 0.3, not 0.30000000000000004.
    Ok((0..=n)
        .map(|i| ((lo + step * i as f64) * 1e12).round() / 1e12)
        .collect())
}

fn with_sweep(mut cfg: ExperimentConfig, lambda2: Option<&str>) -> Result<ExperimentConfig> {
    if let Some(range) = lambda2 {
        cfg.lambda2_sweep = parse_lambda_range(range)?;
        cfg.validate().into_result()?;
    }
    Ok(cfg)
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

/// Runs a parsed invocation, printing progress to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DefaultConfig { out } => cmd_default_config(out.as_deref()),
        Command::Simulate(args) => {
            let cfg = resolve_config(&args, env_seed().as_deref())?;
            let (rs, elapsed) = cmd_simulate(&cfg, &args.out)?;
            print_simulation(&rs, elapsed);
            Ok(())
        }
        Command::Sweep { run, lambda2 } => {
            let cfg = with_sweep(resolve_config(&run, env_seed().as_deref())?, lambda2.as_deref())?;
            let rs = experiment::run_protocol(&cfg)?;
            print_sweep(&cmd_sweep(&cfg, &rs, &run.out)?);
            Ok(())
        }
        Command::Ingest { input, run, modality, style, normalize } => {
            let cfg = resolve_config(&run, env_seed().as_deref())?;
            cmd_ingest(&input, Condition { modality, style }, normalize, &cfg, &run.out)
        }
        Command::Report { run, lambda2 } => {
            let cfg = with_sweep(resolve_config(&run, env_seed().as_deref())?, lambda2.as_deref())?;
            let (rs, m, elapsed) = cmd_report(&cfg, &run.out)?;
            print_simulation(&rs, elapsed);
            print_sweep(&m);
            Ok(())
        }
    }
}

pub fn cmd_default_config(out: Option<&Path>) -> Result<()> {
    let text = ExperimentConfig::default().to_json() + "\n";
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            std::fs::write(path, text).map_err(|e| Error::io(path, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs the protocol and writes its CSVs and figures into `out`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<(ResultSet, Duration)> {
    ensure_dir(out)?;
    let start = Instant::now();
    let rs = experiment::run_protocol(cfg)?;
    let elapsed = start.elapsed();
    write_protocol_outputs(&rs, out)?;
    Ok((rs, elapsed))
}

fn print_simulation(rs: &ResultSet, elapsed: Duration) {
    println!(
        "{} records ({} degenerate excluded) across {} conditions in {:.3} s",
        rs.records.len(),
        rs.excluded_count(),
        rs.summaries.len(),
        elapsed.as_secs_f64()
    );
    for s in &rs.summaries {
        println!(
            "  {:<16} CE {:.4}  TCE {:.4}  Φ {:.4}",
            s.condition().label(),
            s.mean_ce,
            s.mean_tce,
            s.phi_default
        );
    }
}

fn write_protocol_outputs(rs: &ResultSet, out: &Path) -> Result<()> {
    report::write_samples_csv(rs, &out.join("samples.csv"))?;
    report::write_summary_csv(&rs.summaries, &out.join("summary.csv"))?;
    report::write_phi_csv(&rs.summaries, &out.join("phi.csv"))?;
    report::render_mean_tradeoff(
        rs,
        &FigureSpec::new(FigureKind::MeanTradeoff, "Mean CE vs mean TCE by condition"),
        &out.join("mean_tradeoff.svg"),
    )?;
    report::render_scatter(
        rs,
        &FigureSpec::new(FigureKind::SampleScatter, "Per-sample CE vs TCE"),
        &out.join("sample_scatter.svg"),
    )?;
    report::render_heatmap(
        &HeatmapGrid::from_summaries(&rs.summaries),
        &FigureSpec::new(FigureKind::PhiHeatmap, "Composite score Φ by modality and style"),
        &out.join("phi_heatmap.svg"),
    )
}

pub fn cmd_sweep(cfg: &ExperimentConfig, rs: &ResultSet, out: &Path) -> Result<PhiMatrix> {
    ensure_dir(out)?;
    let m = experiment::lambda_sweep(rs, cfg)?;
    report::write_sweep_csv(&m, &out.join("phi_sweep.csv"))?;
    report::render_sweep_heatmap(
        &m,
        &FigureSpec::new(FigureKind::SweepHeatmap, "Φ across trust weight λ₂"),
        &out.join("sweep_heatmap.svg"),
    )?;
    Ok(m)
}

fn print_sweep(m: &PhiMatrix) {
    for (row, l2) in m.lambda2_values.iter().enumerate() {
        println!("λ₂ = {}  argmax {}", report::fmt_sig9(*l2), m.winner(row).label());
    }
}

/// Simulation, sweep, and both density plots in one directory.
pub fn cmd_report(cfg: &ExperimentConfig, out: &Path) -> Result<(ResultSet, PhiMatrix, Duration)> {
    let (rs, elapsed) = cmd_simulate(cfg, out)?;
    let m = cmd_sweep(cfg, &rs, out)?;
    for (metric, file, axis, title) in [
        (Metric::Ce, "kde_ce.svg", "CE", "Density of comprehension efficiency"),
        (Metric::Tce, "kde_tce.svg", "TCE", "Density of trust calibration error"),
    ] {
        let curves = experiment::summarize_kde(&rs, metric, KDE_GRID_POINTS)?;
        report::render_kde(
            &curves,
            axis,
            &FigureSpec::new(FigureKind::Kde, title),
            &out.join(file),
        )?;
    }
    Ok((rs, m, elapsed))
}

#[derive(Debug, Serialize)]
struct IngestReport<'a> {
    source: String,
    modality: Modality,
    style: Style,
    records: usize,
    skipped_degenerate: Vec<u64>,
    normalized: bool,
    trust_simulated: bool,
    config_fingerprint: &'a str,
}

/// Scores every ingested vector under one condition. All-zero rows are
/// reported and skipped rather than failing the run.
pub fn cmd_ingest(
    input: &Path,
    condition: Condition,
    normalize: bool,
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<()> {
    let mut batch = generator::read_attributions(input)?;
    let skipped = batch.take_all_zero();
    if normalize {
        batch = batch.normalize()?;
    }
    let mp = cfg.modality_params.get(condition.modality);
    let sp = cfg.style_params.get(condition.style);
    let trials: Vec<Trial> = batch
        .vectors
        .iter()
        .map(|a| {
            let key = StreamKey::new(
                cfg.master_seed,
                &a.domain,
                condition.modality,
                condition.style,
                a.sample_id,
                Purpose::Trust,
            );
            experiment::evaluate_vector(a, condition, mp, sp, &cfg.trust, &key)
        })
        .collect::<Result<_>>()?;
    let fingerprint = cfg.fingerprint();
    let rs = experiment::assemble(trials, &cfg.weights, fingerprint.clone())?;

    ensure_dir(out)?;
    report::write_samples_csv(&rs, &out.join("samples.csv"))?;
    report::write_summary_csv(&rs.summaries, &out.join("summary.csv"))?;
    let summary = IngestReport {
        source: input.display().to_string(),
        modality: condition.modality,
        style: condition.style,
        records: rs.records.len(),
        skipped_degenerate: skipped.clone(),
        normalized: batch.normalized,
        trust_simulated: true,
        config_fingerprint: &fingerprint,
    };
    let json = serde_json::to_string_pretty(&summary).expect("report serializes") + "\n";
    let path = out.join("ingest_report.json");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;

    println!(
        "{} records scored as {} from {}; trust is simulated",
        rs.records.len(),
        condition.label(),
        input.display()
    );
    if !skipped.is_empty() {
        let ids: Vec<String> = skipped.iter().map(u64::to_string).collect();
        println!("skipped all-zero sample ids: {}", ids.join(", "));
    }
    Ok(())
}
