//! Run manifests: everything needed to reproduce a command's outputs.

use std::fs;
use std::path::Path;

use heraldsim_core::ThresholdCurve;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

/// Threshold curve embedded in a manifest so a rerun does not depend on
/// the original file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub m: u32,
    pub source: String,
    pub points: Vec<(f64, f64)>,
}

impl From<&ThresholdCurve> for CurveRecord {
    fn from(c: &ThresholdCurve) -> Self {
        Self {
            m: c.m(),
            source: c.provenance().to_string(),
            points: c.points().to_vec(),
        }
    }
}

impl CurveRecord {
    pub fn to_curve(&self) -> Result<ThresholdCurve> {
        Ok(ThresholdCurve::new(self.m, self.points.clone(), self.source.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    /// All parameters after defaulting.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threshold_curve: Option<CurveRecord>,
    pub status: RunStatus,
    pub error: Option<String>,
    pub wall_time_seconds: f64,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String], config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            config,
            seed,
            threshold_curve: None,
            status: RunStatus::Running,
            error: None,
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Write `manifest.json` into `dir`, replacing any earlier one
    /// atomically.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&tmp, text).map_err(|e| AppError::io(&tmp, e))?;
        let dest = dir.join(MANIFEST_FILE);
        fs::rename(&tmp, &dest).map_err(|e| AppError::io(dest, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| AppError::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}
