//! Sweep configuration: a flat `key = value` file plus command-line
//! overrides.
//!
//! ```text
//! # m = 4 with a 20-diode cascade
//! m = 4
//! detector = "cap"
//! n = 20
//! loss1 = linspace(0, 0.4, 9)
//! loss2 = 0, 0.01, 0.02, 0.05
//! db_step = 0.25
//! profile = fast
//! seed = 7
//! ```
//!
//! Keys: `m`, `detector` (`pnr` or `cap`), `n`, `loss1`, `loss2`,
//! `db_step`, `db_max`, `repetitions`, `runs`, `seed`, `cutoff`, `profile`
//! (`paper` or `fast`), `thresholds`. Lists are comma separated or
//! `linspace(start, stop, count)`. Strings may be quoted. `#` starts a
//! comment. Each key may appear once.
//!
//! Precedence, lowest first: built-in defaults, the file's `profile`, the
//! file's explicit keys, the command-line `--profile`, explicit flags.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use heraldsim_core::sweep::{db_grid, DEFAULT_DB_STEP, MAX_SQUEEZING_DB};
use heraldsim_core::{CampaignConfig, DetectorModel, SweepGrid};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const DEFAULT_SAMPLE_CUTOFF: usize = 20;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 10^8 repetitions over 1000 runs.
    Paper,
    /// 10^6 repetitions over 100 runs.
    Fast,
}

impl Profile {
    pub fn campaign(self, seed: u64) -> CampaignConfig {
        match self {
            Profile::Paper => CampaignConfig::paper(seed),
            Profile::Fast => CampaignConfig::fast(seed),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, true).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// Ideal photon-number-resolving detector.
    Pnr,
    /// Cascade of `n` click detectors.
    Cap,
}

impl DetectorKind {
    pub fn model(self, n: Option<u32>) -> Result<DetectorModel> {
        match (self, n) {
            (DetectorKind::Pnr, _) => Ok(DetectorModel::Pnr),
            (DetectorKind::Cap, Some(n)) => Ok(DetectorModel::cap(n)?),
            (DetectorKind::Cap, None) => Err(AppError::InvalidParams("detector `cap` needs `n`".into())),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, true).ok()
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Pnr => "pnr",
            DetectorKind::Cap => "cap",
        })
    }
}

/// Partially specified sweep settings from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOverrides {
    pub m: Option<u32>,
    pub detector: Option<DetectorKind>,
    pub n: Option<u32>,
    pub loss1: Option<Vec<f64>>,
    pub loss2: Option<Vec<f64>>,
    pub db_step: Option<f64>,
    pub db_max: Option<f64>,
    pub repetitions: Option<u64>,
    pub runs: Option<u32>,
    pub seed: Option<u64>,
    pub cutoff: Option<usize>,
    pub profile: Option<Profile>,
    pub thresholds: Option<PathBuf>,
}

impl SweepOverrides {
    fn repetitions(&self) -> Option<u64> {
        self.repetitions.or(self.profile.map(|p| p.campaign(0).repetitions))
    }

    fn runs(&self) -> Option<u32> {
        self.runs.or(self.profile.map(|p| p.campaign(0).runs))
    }
}

/// Fully resolved sweep settings, as recorded in run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m: u32,
    pub detector: DetectorKind,
    pub n: Option<u32>,
    pub loss1: Vec<f64>,
    pub loss2: Vec<f64>,
    pub db_step: f64,
    pub db_max: f64,
    pub repetitions: u64,
    pub runs: u32,
    pub seed: u64,
    pub cutoff: usize,
    pub thresholds: PathBuf,
}

impl SweepConfig {
    /// Merge `cli` over `file` over the defaults.
    pub fn resolve(file: &SweepOverrides, cli: &SweepOverrides) -> Result<Self> {
        let missing = |key: &str| AppError::InvalidParams(format!("`{key}` is not set"));
        let paper = CampaignConfig::paper(DEFAULT_SEED);
        let config = Self {
            m: cli.m.or(file.m).ok_or_else(|| missing("m"))?,
            detector: cli.detector.or(file.detector).unwrap_or(DetectorKind::Pnr),
            n: cli.n.or(file.n),
            loss1: cli
                .loss1
                .clone()
                .or_else(|| file.loss1.clone())
                .ok_or_else(|| missing("loss1"))?,
            loss2: cli
                .loss2
                .clone()
                .or_else(|| file.loss2.clone())
                .ok_or_else(|| missing("loss2"))?,
            db_step: cli.db_step.or(file.db_step).unwrap_or(DEFAULT_DB_STEP),
            db_max: cli.db_max.or(file.db_max).unwrap_or(MAX_SQUEEZING_DB),
            repetitions: cli.repetitions().or(file.repetitions()).unwrap_or(paper.repetitions),
            runs: cli.runs().or(file.runs()).unwrap_or(paper.runs),
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            cutoff: cli.cutoff.or(file.cutoff).unwrap_or(DEFAULT_SAMPLE_CUTOFF),
            thresholds: cli
                .thresholds
                .clone()
                .or_else(|| file.thresholds.clone())
                .ok_or_else(|| missing("thresholds"))?,
        };
        config.grid()?;
        Ok(config)
    }

    pub fn detector_model(&self) -> Result<DetectorModel> {
        self.detector.model(self.n)
    }

    pub fn campaign(&self) -> CampaignConfig {
        CampaignConfig {
            repetitions: self.repetitions,
            runs: self.runs,
            sample_cutoff: self.cutoff,
            seed: self.seed,
        }
    }

    /// The validated sweep grid these settings describe.
    pub fn grid(&self) -> Result<SweepGrid> {
        let grid = SweepGrid {
            loss1_values: self.loss1.clone(),
            loss2_values: self.loss2.clone(),
            squeezing: db_grid(self.db_step, self.db_max)?,
            m: self.m,
            detector: self.detector_model()?,
            campaign: self.campaign(),
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Parse a configuration file's text; `path` is used in messages.
pub fn parse_config(text: &str, path: &Path) -> Result<SweepOverrides> {
    let mut out = SweepOverrides::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |reason: String| AppError::Config {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        };
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
        let (key, value) = (key.trim(), unquote(value.trim()));
        if seen.iter().any(|k| k == key) {
            return Err(err(format!("`{key}` is set more than once")));
        }
        seen.push(key.to_string());
        let bad = |what: &str| err(format!("`{key}`: expected {what}, found `{value}`"));
        match key {
            "m" => out.m = Some(value.parse().map_err(|_| bad("an integer"))?),
            "n" => out.n = Some(value.parse().map_err(|_| bad("an integer"))?),
            "detector" => out.detector = Some(DetectorKind::parse(value).ok_or_else(|| bad("`pnr` or `cap`"))?),
            "loss1" => out.loss1 = Some(parse_list(value).ok_or_else(|| bad("a list of numbers"))?),
            "loss2" => out.loss2 = Some(parse_list(value).ok_or_else(|| bad("a list of numbers"))?),
            "db_step" => out.db_step = Some(parse_number(value).ok_or_else(|| bad("a number"))?),
            "db_max" => out.db_max = Some(parse_number(value).ok_or_else(|| bad("a number"))?),
            "repetitions" => out.repetitions = Some(parse_count(value).ok_or_else(|| bad("a positive count"))?),
            "runs" => out.runs = Some(value.parse().map_err(|_| bad("an integer"))?),
            "seed" => out.seed = Some(value.parse().map_err(|_| bad("an unsigned integer"))?),
            "cutoff" => out.cutoff = Some(value.parse().map_err(|_| bad("an integer"))?),
            "profile" => out.profile = Some(Profile::parse(value).ok_or_else(|| bad("`paper` or `fast`"))?),
            "thresholds" => out.thresholds = Some(PathBuf::from(value)),
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<SweepOverrides> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_config(&text, path)
}

fn strip_comment(line: &str) -> &str {
    // a `#` inside quotes is part of the value
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(value: &str) -> &str {
    value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value)
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Integer count, also accepting exact scientific notation such as `1e8`.
fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim();
    s.parse::<u64>().ok().or_else(|| {
        let v = parse_number(s)?;
        (v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64).then_some(v as u64)
    })
}

/// Comma-separated numbers or `linspace(start, stop, count)`.
pub fn parse_list(s: &str) -> Option<Vec<f64>> {
    let s = s.trim();
    if let Some(args) = s.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').collect();
        let [a, b, count] = parts[..] else { return None };
        return Some(linspace(parse_number(a)?, parse_number(b)?, count.trim().parse().ok()?))
            .filter(|v| !v.is_empty());
    }
    let values: Option<Vec<f64>> = s.split(',').map(parse_number).collect();
    values.filter(|v| !v.is_empty())
}

/// `count` evenly spaced values from `start` to `stop`, rounded to twelve
/// decimals so grid points print as short decimals.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                let v = start + (stop - start) * i as f64 / (count - 1) as f64;
                (v * 1e12).round() / 1e12
            })
            .collect(),
    }
}
