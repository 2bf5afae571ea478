//! Command implementations. Each returns a serializable report; the CLI
//! only parses flags and prints.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use heraldsim_core::detector::WeightSource;
use heraldsim_core::montecarlo::simulate_ensemble_with;
use heraldsim_core::oracle::{oracle_cap_heralded, oracle_heralded};
use heraldsim_core::sweep::extract_thresholds;
use heraldsim_core::{
    certify, CampaignConfig, DetectorModel, DiagonalState, ExperimentParams, SqueezeParam, ThresholdCurve, TileStatus,
};
use serde::{Deserialize, Serialize};

use crate::cache::WeightCache;
use crate::config::{DetectorKind, SweepConfig};
use crate::error::{AppError, Result};
use crate::manifest::{CurveRecord, RunManifest, RunStatus};
use crate::parallel::par_run_sweep;
use crate::svg::{contour_svg, heatmap_svg, Metric};
use crate::tables::{contour_csv, tiles_csv, TileRow};
use crate::thresholds::{available_orders, curve_path, load_curve_for, load_threshold_curve};

/// Largest allowed closed-form versus oracle deviation.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

pub const TILES_FILE: &str = "tiles.csv";
pub const CONTOUR_FILE: &str = "contour.csv";
pub const PROBABILITY_SVG: &str = "probability.svg";
pub const FIDELITY_SVG: &str = "fidelity.svg";
pub const CONTOUR_SVG: &str = "contour.svg";

/// One parameter point as given on the command line, losses included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub m: u32,
    pub db: f64,
    pub r: f64,
    pub lambda_squared: f64,
    pub loss1: f64,
    pub loss2: f64,
    pub detector: DetectorKind,
    pub n: Option<u32>,
    pub cutoff: usize,
}

impl PointConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: u32,
        squeeze: SqueezeParam,
        loss1: f64,
        loss2: f64,
        detector: DetectorKind,
        n: Option<u32>,
        cutoff: usize,
    ) -> Result<Self> {
        for (name, loss) in [("loss1", loss1), ("loss2", loss2)] {
            if !(0.0..=1.0).contains(&loss) {
                return Err(AppError::InvalidParams(format!("{name} = {loss} is outside [0, 1]")));
            }
        }
        let cfg = Self {
            m,
            db: squeeze.db(),
            r: squeeze.rate(),
            lambda_squared: squeeze.lambda_squared(),
            loss1,
            loss2,
            detector,
            n,
            cutoff,
        };
        cfg.detector_model()?.validate_outcome(m)?;
        cfg.params()?;
        Ok(cfg)
    }

    pub fn squeeze(&self) -> Result<SqueezeParam> {
        Ok(SqueezeParam::from_rate(self.r)?)
    }

    pub fn params(&self) -> Result<ExperimentParams> {
        Ok(ExperimentParams::new(
            self.squeeze()?,
            1.0 - self.loss1,
            1.0 - self.loss2,
            self.m,
        )?)
    }

    pub fn detector_model(&self) -> Result<DetectorModel> {
        self.detector.model(self.n)
    }

    fn describe(&self) -> String {
        let det = match self.n {
            Some(n) if self.detector == DetectorKind::Cap => format!("cap n={n}"),
            _ => self.detector.to_string(),
        };
        format!(
            "m={} detector={} db={} lambda2={} loss1={} loss2={}",
            self.m, det, self.db, self.lambda_squared, self.loss1, self.loss2
        )
    }
}

fn degenerate(p: &ExperimentParams, probability: f64) -> Result<()> {
    if probability > 0.0 {
        Ok(())
    } else {
        Err(heraldsim_core::Error::DegenerateHerald { m: p.m }.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeraldReport {
    pub config: PointConfig,
    pub success_probability: f64,
    pub fidelity: f64,
    pub tail_mass: f64,
    pub diagonals: Vec<f64>,
}

pub fn herald(cfg: &PointConfig, tables: &dyn WeightSource) -> Result<HeraldReport> {
    let p = cfg.params()?;
    let det = cfg.detector_model()?;
    let probability = det.success_probability_with(&p, tables)?;
    degenerate(&p, probability)?;
    let state = det.heralded_diagonals_with(&p, cfg.cutoff, tables)?;
    Ok(HeraldReport {
        config: cfg.clone(),
        success_probability: probability,
        fidelity: state.get(cfg.m as usize),
        tail_mass: state.tail_mass(),
        diagonals: state.probs().to_vec(),
    })
}

impl HeraldReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "herald {}", self.config.describe());
        let _ = writeln!(s, "success_probability {}", self.success_probability);
        let _ = writeln!(s, "fidelity {}", self.fidelity);
        let _ = writeln!(s, "tail_mass {}", self.tail_mass);
        for (k, v) in self.diagonals.iter().enumerate() {
            let _ = writeln!(s, "rho[{k}] {v}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub config: PointConfig,
    pub probability_deviation: f64,
    pub diagonal_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub truncation: usize,
    pub tolerance: f64,
    pub max_probability_deviation: f64,
    pub max_diagonal_deviation: f64,
    pub pass: bool,
    pub cases: Vec<OracleCase>,
}

/// The parameter grid checked when no point is given: λ² ∈ {0.1, 0.3, 0.5},
/// both transmittances in {0.6, 0.8, 1.0} and m = 0..5.
pub fn default_oracle_grid(cutoff: usize) -> Result<Vec<PointConfig>> {
    let mut out = Vec::new();
    for &lambda2 in &[0.1, 0.3, 0.5] {
        for &loss1 in &[0.4, 0.2, 0.0] {
            for &loss2 in &[0.4, 0.2, 0.0] {
                for m in 0..=5 {
                    let sq = SqueezeParam::from_lambda_squared(lambda2)?;
                    out.push(PointConfig::new(m, sq, loss1, loss2, DetectorKind::Pnr, None, cutoff)?);
                }
            }
        }
    }
    Ok(out)
}

fn max_diagonal_gap(a: &DiagonalState, b: &DiagonalState) -> f64 {
    (0..a.cutoff().min(b.cutoff()))
        .map(|k| (a.get(k) - b.get(k)).abs())
        .fold(0.0, f64::max)
}

/// Compare closed form and brute-force oracle at each point.
pub fn oracle_check(points: &[PointConfig], truncation: usize, tables: &dyn WeightSource) -> Result<OracleReport> {
    let mut cases = Vec::with_capacity(points.len());
    for cfg in points {
        let p = cfg.params()?;
        let det = cfg.detector_model()?;
        let (oracle_p, oracle_state) = match det {
            DetectorModel::Pnr => oracle_heralded(&p, truncation)?,
            DetectorModel::Cap { n } => oracle_cap_heralded(&p, n, truncation)?,
        };
        let probability = det.success_probability_with(&p, tables)?;
        degenerate(&p, probability)?;
        let state = det.heralded_diagonals_with(&p, cfg.cutoff, tables)?;
        cases.push(OracleCase {
            config: cfg.clone(),
            probability_deviation: (probability - oracle_p).abs(),
            diagonal_deviation: max_diagonal_gap(&state, &oracle_state),
        });
    }
    let max_p = cases.iter().map(|c| c.probability_deviation).fold(0.0, f64::max);
    let max_d = cases.iter().map(|c| c.diagonal_deviation).fold(0.0, f64::max);
    Ok(OracleReport {
        truncation,
        tolerance: ORACLE_TOLERANCE,
        max_probability_deviation: max_p,
        max_diagonal_deviation: max_d,
        pass: max_p <= ORACLE_TOLERANCE && max_d <= ORACLE_TOLERANCE,
        cases,
    })
}

impl OracleReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "oracle-check points={} truncation={}",
            self.cases.len(),
            self.truncation
        );
        let _ = writeln!(s, "max_probability_deviation {:e}", self.max_probability_deviation);
        let _ = writeln!(s, "max_diagonal_deviation {:e}", self.max_diagonal_deviation);
        let _ = writeln!(s, "tolerance {:e}", self.tolerance);
        let _ = writeln!(s, "{}", if self.pass { "PASS" } else { "FAIL" });
        s
    }

    pub fn breach(&self) -> Option<AppError> {
        (!self.pass).then(|| AppError::OracleBreach {
            deviation: self.max_probability_deviation.max(self.max_diagonal_deviation),
            tolerance: self.tolerance,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub repetitions: u64,
    pub runs: u32,
    pub sample_cutoff: usize,
    pub seed: u64,
}

impl From<&CampaignConfig> for CampaignRecord {
    fn from(c: &CampaignConfig) -> Self {
        Self {
            repetitions: c.repetitions,
            runs: c.runs,
            sample_cutoff: c.sample_cutoff,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessStats {
    pub mean_x: f64,
    pub sd_x: f64,
    pub mean_y: f64,
    pub sd_y: f64,
    pub samples_per_run: u64,
    pub runs: u32,
    pub mean_frequencies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub pass: bool,
    pub margin_y: f64,
    pub box_left: f64,
    pub box_right: f64,
    pub box_bottom: f64,
    pub curve_max: f64,
    pub curve: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: PointConfig,
    pub campaign: CampaignRecord,
    pub success_probability: f64,
    /// Exact witness pair `(P(n > m), P(n = m))` of the heralded state.
    pub analytic_x: f64,
    pub analytic_y: f64,
    pub stats: WitnessStats,
    pub verdict: VerdictRecord,
}

/// Simulate a campaign at one point and certify it against `curve`.
pub fn monte_carlo(
    cfg: &PointConfig,
    campaign: &CampaignConfig,
    curve: &ThresholdCurve,
    tables: &dyn WeightSource,
) -> Result<McReport> {
    let p = cfg.params()?;
    let det = cfg.detector_model()?;
    if curve.m() != cfg.m {
        return Err(heraldsim_core::Error::OrderMismatch {
            curve: curve.m(),
            stats: cfg.m,
        }
        .into());
    }
    let probability = det.success_probability_with(&p, tables)?;
    degenerate(&p, probability)?;
    let stats = simulate_ensemble_with(&p, &det, campaign, tables)?;
    let verdict = certify(&stats, curve)?;
    let state = det.heralded_diagonals_with(&p, campaign.sample_cutoff, tables)?;
    let m = cfg.m as usize;
    let at_most_m: f64 = (0..=m).map(|k| state.get(k)).sum();
    Ok(McReport {
        config: cfg.clone(),
        campaign: campaign.into(),
        success_probability: probability,
        analytic_x: 1.0 - at_most_m,
        analytic_y: state.get(m),
        stats: WitnessStats {
            mean_x: stats.mean_x,
            sd_x: stats.sd_x,
            mean_y: stats.mean_y,
            sd_y: stats.sd_y,
            samples_per_run: stats.n_samples,
            runs: stats.runs,
            mean_frequencies: stats.mean_frequencies.clone(),
        },
        verdict: VerdictRecord {
            pass: verdict.pass,
            margin_y: verdict.margin_y,
            box_left: verdict.box_left,
            box_right: verdict.box_right,
            box_bottom: verdict.box_bottom,
            curve_max: verdict.curve_max,
            curve: verdict.curve_provenance,
        },
    })
}

impl McReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.campaign;
        let _ = writeln!(s, "mc {}", self.config.describe());
        let _ = writeln!(
            s,
            "campaign repetitions={} runs={} seed={} cutoff={}",
            c.repetitions, c.runs, c.seed, c.sample_cutoff
        );
        let _ = writeln!(s, "success_probability {}", self.success_probability);
        let _ = writeln!(s, "samples_per_run {}", self.stats.samples_per_run);
        let _ = writeln!(
            s,
            "x mean={} sd={} exact={}",
            self.stats.mean_x, self.stats.sd_x, self.analytic_x
        );
        let _ = writeln!(
            s,
            "y mean={} sd={} exact={}",
            self.stats.mean_y, self.stats.sd_y, self.analytic_y
        );
        let v = &self.verdict;
        let _ = writeln!(s, "box x=[{}, {}] bottom={}", v.box_left, v.box_right, v.box_bottom);
        let _ = writeln!(s, "curve {} max_over_box={}", v.curve, v.curve_max);
        let _ = writeln!(s, "margin {}", v.margin_y);
        let _ = writeln!(s, "verdict {}", if v.pass { "PASS" } else { "FAIL" });
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveCheck {
    pub m: u32,
    pub file: String,
    pub samples: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsReport {
    pub dir: String,
    pub pass: bool,
    pub curves: Vec<CurveCheck>,
}

/// Orders 3, 4 and 5 are always expected; any other `f<m>.csv` present is
/// checked too. With `only`, just that order is checked.
pub fn validate_thresholds(dir: &Path, only: Option<u32>) -> ThresholdsReport {
    let orders = match only {
        Some(m) => vec![m],
        None => {
            let mut o = vec![3, 4, 5];
            o.extend(available_orders(dir).unwrap_or_default());
            o.sort_unstable();
            o.dedup();
            o
        }
    };
    let curves: Vec<CurveCheck> = orders
        .into_iter()
        .map(|m| {
            let path = curve_path(dir, m);
            let loaded = load_threshold_curve(&path).and_then(|c| {
                if c.m() == m {
                    Ok(c)
                } else {
                    Err(AppError::Threshold {
                        path: path.clone(),
                        reason: format!("header declares m={}", c.m()),
                    })
                }
            });
            CurveCheck {
                m,
                file: path.display().to_string(),
                samples: loaded.as_ref().ok().map(|c| c.points().len()),
                error: loaded.err().map(|e| e.to_string()),
            }
        })
        .collect();
    ThresholdsReport {
        dir: dir.display().to_string(),
        pass: curves.iter().all(|c| c.error.is_none()),
        curves,
    }
}

impl ThresholdsReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.curves {
            match (&c.samples, &c.error) {
                (Some(n), _) => {
                    let _ = writeln!(s, "ok   m={} {} ({n} samples)", c.m, c.file);
                }
                (_, Some(e)) => {
                    let _ = writeln!(s, "FAIL m={} {e}", c.m);
                }
                _ => {}
            }
        }
        s
    }

    pub fn failure(&self) -> Option<AppError> {
        self.curves.iter().find_map(|c| {
            c.error.as_ref().map(|e| AppError::Threshold {
                path: c.file.clone().into(),
                reason: e.clone(),
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub out_dir: String,
    pub tiles: usize,
    pub certified: usize,
    pub uncertifiable: usize,
    pub insignificant: usize,
    /// `(loss1, loss2)` of non-certified tiles dominated by a certified one.
    pub monotonicity_exceptions: Vec<(f64, f64)>,
    /// Heralding losses where the contour rises.
    pub contour_rises: Vec<f64>,
    pub outputs: Vec<String>,
}

impl SweepReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "sweep tiles={} certified={} uncertifiable={} insignificant={}",
            self.tiles, self.certified, self.uncertifiable, self.insignificant
        );
        for (l1, l2) in &self.monotonicity_exceptions {
            let _ = writeln!(
                s,
                "flag: non-certified tile at loss1={l1} loss2={l2} below a certified one"
            );
        }
        for l1 in &self.contour_rises {
            let _ = writeln!(s, "flag: contour rises at loss1={l1}");
        }
        let _ = writeln!(s, "wrote {} to {}", self.outputs.join(", "), self.out_dir);
        s
    }
}

/// Run a sweep and write tiles, contour, figures and the manifest to
/// `out`. The manifest is written first and updated when the run ends, so
/// the directory never holds outputs without one.
pub fn sweep(config: &SweepConfig, embedded: Option<&CurveRecord>, out: &Path, argv: &[String]) -> Result<SweepReport> {
    let start = Instant::now();
    fs::create_dir_all(out).map_err(|e| AppError::io(out, e))?;
    let mut manifest = RunManifest::new("sweep", argv, serde_json::to_value(config)?, Some(config.seed));
    manifest.write(out)?;
    let result = sweep_outputs(config, embedded, out, &mut manifest);
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    match &result {
        Ok(_) => manifest.status = RunStatus::Complete,
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
        }
    }
    let written = manifest.write(out);
    let report = result?;
    written?;
    Ok(report)
}

fn sweep_outputs(
    config: &SweepConfig,
    embedded: Option<&CurveRecord>,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<SweepReport> {
    let curve = match embedded {
        Some(record) => {
            let curve = record.to_curve().map_err(|e| AppError::Threshold {
                path: record.source.clone().into(),
                reason: e.to_string(),
            })?;
            if curve.m() != config.m {
                return Err(AppError::Threshold {
                    path: record.source.clone().into(),
                    reason: format!("recorded curve has m={} but the sweep has m={}", curve.m(), config.m),
                });
            }
            curve
        }
        None => load_curve_for(&config.thresholds, config.m)?,
    };
    manifest.threshold_curve = Some(CurveRecord::from(&curve));
    manifest.write(out)?;

    let grid = config.grid()?;
    let map = par_run_sweep(&grid, &curve, &WeightCache::new())?;
    let contour = extract_thresholds(&map);

    let rows: Vec<TileRow> = map.tiles.iter().map(TileRow::from).collect();
    let label = match grid.detector {
        DetectorModel::Pnr => format!("m = {}, PNR", config.m),
        DetectorModel::Cap { n } => format!("m = {}, CAP n = {n}", config.m),
    };
    let files = [
        (TILES_FILE, tiles_csv(&map)),
        (CONTOUR_FILE, contour_csv(&contour)),
        (
            PROBABILITY_SVG,
            heatmap_svg(
                &rows,
                Metric::Probability,
                &format!("{label}: best certified success probability"),
            ),
        ),
        (
            FIDELITY_SVG,
            heatmap_svg(&rows, Metric::Fidelity, &format!("{label}: fidelity at best squeezing")),
        ),
        (
            CONTOUR_SVG,
            contour_svg(&contour.boundary, &format!("{label}: tolerable characterization loss")),
        ),
    ];
    for (name, text) in files {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| AppError::io(path, e))?;
        manifest.outputs.push(name.to_string());
    }

    let count = |s: TileStatus| map.tiles.iter().filter(|t| t.status == s).count();
    Ok(SweepReport {
        out_dir: out.display().to_string(),
        tiles: map.tiles.len(),
        certified: count(TileStatus::Certified),
        uncertifiable: count(TileStatus::Uncertifiable),
        insignificant: count(TileStatus::Insignificant),
        monotonicity_exceptions: map
            .monotonicity_exceptions()
            .into_iter()
            .map(|(i1, i2)| (map.loss1_values[i1], map.loss2_values[i2]))
            .collect(),
        contour_rises: contour
            .non_monotone_points()
            .into_iter()
            .map(|i| contour.boundary[i].0)
            .collect(),
        outputs: manifest.outputs.clone(),
    })
}
