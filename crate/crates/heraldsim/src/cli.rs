//! Command-line definitions and dispatch.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use heraldsim_core::{CampaignConfig, SqueezeParam};
use serde::Serialize;

use crate::cache::WeightCache;
use crate::commands::{self, PointConfig};
use crate::config::{
    load_config, parse_list, DetectorKind, Profile, SweepConfig, SweepOverrides, DEFAULT_SAMPLE_CUTOFF, DEFAULT_SEED,
};
use crate::error::{AppError, Result};
use crate::manifest::{RunManifest, RunStatus};
use crate::thresholds::load_curve_for;

#[derive(Debug, Parser)]
#[command(
    name = "heraldsim",
    version,
    about = "Heralded Fock-state preparation under loss: states, Monte Carlo certification and loss sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Success probability and diagonals of the heralded state.
    Herald(HeraldArgs),
    /// Compare the closed form against the brute-force oracle.
    OracleCheck(OracleArgs),
    /// Simulate a measurement campaign and certify the result.
    Mc(McArgs),
    /// Sweep the loss plane and write tiles, contour, figures and a manifest.
    Sweep(SweepArgs),
    /// Check the threshold-curve files in a directory.
    ThresholdsValidate(ThresholdsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Heralded photon number (click count for CAP).
    #[arg(long)]
    pub m: u32,
    /// Squeezing in dB.
    #[arg(long, conflicts_with = "lambda2", required_unless_present = "lambda2")]
    pub db: Option<f64>,
    /// Squeezing as λ² = tanh²(r).
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Heralding-mode loss, 1 − ζ₁.
    #[arg(long, default_value_t = 0.0)]
    pub loss1: f64,
    /// Characterization-mode loss, 1 − ζ₂.
    #[arg(long, default_value_t = 0.0)]
    pub loss2: f64,
    /// Detector model.
    #[arg(long, value_enum, default_value_t = DetectorKind::Pnr)]
    pub detector: DetectorKind,
    /// Number of diodes for `--detector cap`.
    #[arg(long)]
    pub n: Option<u32>,
    /// Number of Fock diagonals kept.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CUTOFF)]
    pub cutoff: usize,
}

impl PointArgs {
    fn resolve(&self) -> Result<PointConfig> {
        let squeeze = squeeze_from(self.db, self.lambda2)?;
        PointConfig::new(
            self.m,
            squeeze,
            self.loss1,
            self.loss2,
            self.detector,
            self.n,
            self.cutoff,
        )
    }
}

fn squeeze_from(db: Option<f64>, lambda2: Option<f64>) -> Result<SqueezeParam> {
    match (db, lambda2) {
        (Some(db), None) => Ok(SqueezeParam::from_db(db)?),
        (None, Some(l2)) => Ok(SqueezeParam::from_lambda_squared(l2)?),
        _ => Err(AppError::InvalidParams("give exactly one of --db and --lambda2".into())),
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Print a single JSON document.
    #[arg(long)]
    pub json: bool,
    /// Also write the report and a manifest into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeraldArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Check one point; without it the built-in grid is checked.
    #[arg(long)]
    pub m: Option<u32>,
    /// Squeezing in dB for the single point.
    #[arg(long, conflicts_with = "lambda2", requires = "m")]
    pub db: Option<f64>,
    /// Squeezing as λ² for the single point.
    #[arg(long, requires = "m")]
    pub lambda2: Option<f64>,
    /// Heralding-mode loss for the single point.
    #[arg(long, default_value_t = 0.0, requires = "m")]
    pub loss1: f64,
    /// Characterization-mode loss for the single point.
    #[arg(long, default_value_t = 0.0, requires = "m")]
    pub loss2: f64,
    /// Detector model for the single point.
    #[arg(long, value_enum, default_value_t = DetectorKind::Pnr, requires = "m")]
    pub detector: DetectorKind,
    /// Number of diodes for `--detector cap`.
    #[arg(long, requires = "m")]
    pub n: Option<u32>,
    /// Number of Fock diagonals compared.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CUTOFF)]
    pub cutoff: usize,
    /// Photon-number truncation of the oracle.
    #[arg(long, default_value_t = heraldsim_core::oracle::DEFAULT_TRUNCATION)]
    pub oracle_cutoff: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CampaignArgs {
    /// Campaign preset; explicit flags override it.
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Shorthand for `--profile fast`.
    #[arg(long, conflicts_with = "profile")]
    pub fast: bool,
    /// Repetitions per run.
    #[arg(long)]
    pub repetitions: Option<u64>,
    /// Number of independent runs.
    #[arg(long)]
    pub runs: Option<u32>,
    /// Master seed; results are a function of it alone.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CampaignArgs {
    fn profile(&self) -> Option<Profile> {
        if self.fast {
            Some(Profile::Fast)
        } else {
            self.profile
        }
    }
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub campaign: CampaignArgs,
    /// Directory holding `f<m>.csv` threshold curves.
    #[arg(long)]
    pub thresholds: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep configuration file.
    #[arg(long, conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    /// Rerun from a manifest written by an earlier sweep.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory holding `f<m>.csv` threshold curves.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Heralded photon number (click count for CAP).
    #[arg(long)]
    pub m: Option<u32>,
    /// Detector model.
    #[arg(long, value_enum)]
    pub detector: Option<DetectorKind>,
    /// Number of diodes for `--detector cap`.
    #[arg(long)]
    pub n: Option<u32>,
    /// Heralding losses: `a,b,c` or `linspace(a,b,count)`.
    #[arg(long, value_parser = list_arg)]
    pub loss1: Option<NumberList>,
    /// Characterization losses, same syntax as `--loss1`.
    #[arg(long, value_parser = list_arg)]
    pub loss2: Option<NumberList>,
    /// Squeezing grid spacing in dB.
    #[arg(long)]
    pub db_step: Option<f64>,
    /// Largest squeezing on the grid in dB.
    #[arg(long)]
    pub db_max: Option<f64>,
    /// Largest photon number recorded per sample.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[command(flatten)]
    pub campaign: CampaignArgs,
    /// Print a single JSON summary.
    #[arg(long)]
    pub json: bool,
}

/// A number list given as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberList(pub Vec<f64>);

fn list_arg(s: &str) -> std::result::Result<NumberList, String> {
    parse_list(s)
        .map(NumberList)
        .ok_or_else(|| format!("`{s}` is not a number list or linspace(start, stop, count)"))
}

impl SweepArgs {
    fn overrides(&self) -> SweepOverrides {
        SweepOverrides {
            m: self.m,
            detector: self.detector,
            n: self.n,
            loss1: self.loss1.clone().map(|l| l.0),
            loss2: self.loss2.clone().map(|l| l.0),
            db_step: self.db_step,
            db_max: self.db_max,
            repetitions: self.campaign.repetitions,
            runs: self.campaign.runs,
            seed: self.campaign.seed,
            cutoff: self.cutoff,
            profile: self.campaign.profile(),
            thresholds: self.thresholds.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    /// Directory holding `f<m>.csv` threshold curves.
    #[arg(long)]
    pub thresholds: PathBuf,
    /// Check only this order.
    #[arg(long)]
    pub m: Option<u32>,
    /// Print a single JSON document.
    #[arg(long)]
    pub json: bool,
}

/// What to print and the exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
    /// Message for stderr when the command failed after producing a report.
    pub stderr: Option<String>,
}

fn render<T: Serialize>(report: &T, json: bool, text: impl FnOnce() -> String) -> Result<String> {
    if json {
        Ok(serde_json::to_string_pretty(report)? + "\n")
    } else {
        Ok(text())
    }
}

fn finish(stdout: String, failure: Option<AppError>) -> Output {
    match failure {
        Some(e) => Output {
            stdout,
            code: e.exit_code(),
            stderr: Some(e.to_string()),
        },
        None => Output {
            stdout,
            code: 0,
            stderr: None,
        },
    }
}

/// Write `<command>.json` and a manifest for a single-point command.
fn write_point_outputs<T: Serialize>(
    out: &Path,
    command: &str,
    argv: &[String],
    config: serde_json::Value,
    seed: Option<u64>,
    report: &T,
    start: Instant,
) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| AppError::io(out, e))?;
    let mut manifest = RunManifest::new(command, argv, config, seed);
    manifest.write(out)?;
    let name = format!("{command}.json");
    let path = out.join(&name);
    std::fs::write(&path, serde_json::to_string_pretty(report)? + "\n").map_err(|e| AppError::io(path, e))?;
    manifest.outputs.push(name);
    manifest.status = RunStatus::Complete;
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.write(out)
}

/// Execute a parsed command line. `argv` is recorded in manifests.
pub fn run(cli: Cli, argv: &[String]) -> Result<Output> {
    let start = Instant::now();
    let tables = WeightCache::new();
    match cli.command {
        Command::Herald(args) => {
            let cfg = args.point.resolve()?;
            let report = commands::herald(&cfg, &tables)?;
            if let Some(out) = &args.output.out {
                write_point_outputs(out, "herald", argv, serde_json::to_value(&cfg)?, None, &report, start)?;
            }
            Ok(finish(render(&report, args.output.json, || report.to_text())?, None))
        }
        Command::OracleCheck(args) => {
            let points = match args.m {
                Some(m) => {
                    let squeeze = squeeze_from(args.db, args.lambda2)?;
                    vec![PointConfig::new(
                        m,
                        squeeze,
                        args.loss1,
                        args.loss2,
                        args.detector,
                        args.n,
                        args.cutoff,
                    )?]
                }
                None => commands::default_oracle_grid(args.cutoff)?,
            };
            let report = commands::oracle_check(&points, args.oracle_cutoff, &tables)?;
            if let Some(out) = &args.output.out {
                let config = serde_json::json!({ "points": points, "oracle_cutoff": args.oracle_cutoff });
                write_point_outputs(out, "oracle-check", argv, config, None, &report, start)?;
            }
            Ok(finish(
                render(&report, args.output.json, || report.to_text())?,
                report.breach(),
            ))
        }
        Command::Mc(args) => {
            let cfg = args.point.resolve()?;
            let c = &args.campaign;
            let base = c
                .profile()
                .unwrap_or(Profile::Paper)
                .campaign(c.seed.unwrap_or(DEFAULT_SEED));
            let campaign = CampaignConfig {
                repetitions: c.repetitions.unwrap_or(base.repetitions),
                runs: c.runs.unwrap_or(base.runs),
                sample_cutoff: cfg.cutoff,
                seed: base.seed,
            };
            let curve = load_curve_for(&args.thresholds, cfg.m)?;
            let report = commands::monte_carlo(&cfg, &campaign, &curve, &tables)?;
            if let Some(out) = &args.output.out {
                let config = serde_json::json!({
                    "point": cfg,
                    "campaign": report.campaign,
                    "thresholds": args.thresholds,
                    "threshold_curve": crate::manifest::CurveRecord::from(&curve),
                });
                write_point_outputs(out, "mc", argv, config, Some(campaign.seed), &report, start)?;
            }
            Ok(finish(render(&report, args.output.json, || report.to_text())?, None))
        }
        Command::Sweep(args) => {
            let (file, embedded) = match (&args.manifest, &args.config) {
                (Some(path), _) => {
                    let manifest = RunManifest::load(path)?;
                    if manifest.command != "sweep" {
                        return Err(AppError::Manifest {
                            path: path.clone(),
                            reason: format!("recorded command is `{}`", manifest.command),
                        });
                    }
                    let config: SweepConfig =
                        serde_json::from_value(manifest.config).map_err(|e| AppError::Manifest {
                            path: path.clone(),
                            reason: e.to_string(),
                        })?;
                    // an explicit --thresholds replaces the recorded curve
                    let embedded = manifest.threshold_curve.filter(|_| args.thresholds.is_none());
                    (SweepOverrides::from(&config), embedded)
                }
                (None, Some(path)) => (load_config(path)?, None),
                (None, None) => (SweepOverrides::default(), None),
            };
            let config = SweepConfig::resolve(&file, &args.overrides())?;
            let report = commands::sweep(&config, embedded.as_ref(), &args.out, argv)?;
            Ok(finish(render(&report, args.json, || report.to_text())?, None))
        }
        Command::ThresholdsValidate(args) => {
            let report = commands::validate_thresholds(&args.thresholds, args.m);
            Ok(finish(
                render(&report, args.json, || report.to_text())?,
                report.failure(),
            ))
        }
    }
}

impl From<&SweepConfig> for SweepOverrides {
    fn from(c: &SweepConfig) -> Self {
        Self {
            m: Some(c.m),
            detector: Some(c.detector),
            n: c.n,
            loss1: Some(c.loss1.clone()),
            loss2: Some(c.loss2.clone()),
            db_step: Some(c.db_step),
            db_max: Some(c.db_max),
            repetitions: Some(c.repetitions),
            runs: Some(c.runs),
            seed: Some(c.seed),
            cutoff: Some(c.cutoff),
            profile: None,
            thresholds: Some(c.thresholds.clone()),
        }
    }
}
