//! Tile-map and contour CSV files.
//!
//! ```text
//! loss1,loss2,status,best_r_db,best_probability,fidelity
//! 0,0,certified,10,0.0148,1
//! 0.05,0.4,uncertifiable,,,
//! ```
//!
//! Floats use the shortest representation that reads back to the same
//! value; missing values are empty fields.

use std::fmt::Write as _;
use std::path::Path;

use heraldsim_core::sweep::TileMap;
use heraldsim_core::{FeasibilityContour, Tile, TileStatus};

use crate::error::{AppError, Result};

pub const TILES_HEADER: &str = "loss1,loss2,status,best_r_db,best_probability,fidelity";
pub const CONTOUR_HEADER: &str = "loss1,max_loss2";

/// One line of the tiles file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileRow {
    pub loss1: f64,
    pub loss2: f64,
    pub status: TileStatus,
    pub best_r_db: Option<f64>,
    pub best_probability: Option<f64>,
    pub fidelity: Option<f64>,
}

impl From<&Tile> for TileRow {
    fn from(t: &Tile) -> Self {
        Self {
            loss1: t.loss1,
            loss2: t.loss2,
            status: t.status,
            best_r_db: t.best_squeezing.map(|s| s.db()),
            best_probability: t.best_probability,
            fidelity: t.fidelity,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn tiles_csv(map: &TileMap) -> String {
    let mut out = String::from(TILES_HEADER);
    out.push('\n');
    for tile in &map.tiles {
        let r = TileRow::from(tile);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.loss1,
            r.loss2,
            r.status.as_str(),
            opt(r.best_r_db),
            opt(r.best_probability),
            opt(r.fidelity)
        );
    }
    out
}

pub fn contour_csv(contour: &FeasibilityContour) -> String {
    let mut out = String::from(CONTOUR_HEADER);
    out.push('\n');
    for &(loss1, max_loss2) in &contour.boundary {
        let _ = writeln!(out, "{},{}", loss1, opt(max_loss2));
    }
    out
}

fn parse_status(s: &str) -> Option<TileStatus> {
    [
        TileStatus::Certified,
        TileStatus::Uncertifiable,
        TileStatus::Insignificant,
    ]
    .into_iter()
    .find(|t| t.as_str() == s)
}

struct Lines<'a> {
    path: &'a Path,
    header: &'a str,
}

impl Lines<'_> {
    fn err(&self, line: usize, reason: impl Into<String>) -> AppError {
        AppError::Csv {
            path: self.path.to_path_buf(),
            line,
            reason: reason.into(),
        }
    }

    /// Data lines as `(line number, fields)`, after checking the header.
    fn records<'t>(&self, text: &'t str, width: usize) -> Result<Vec<(usize, Vec<&'t str>)>> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        match lines.next() {
            Some((_, h)) if h == self.header => {}
            _ => return Err(self.err(1, format!("expected header `{}`", self.header))),
        }
        let mut out = Vec::new();
        for (n, line) in lines.filter(|(_, l)| !l.is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width {
                return Err(self.err(n, format!("expected {width} fields, found {}", fields.len())));
            }
            out.push((n, fields));
        }
        Ok(out)
    }

    fn number(&self, line: usize, s: &str) -> Result<f64> {
        s.parse().map_err(|_| self.err(line, format!("`{s}` is not a number")))
    }

    fn optional(&self, line: usize, s: &str) -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            self.number(line, s).map(Some)
        }
    }
}

pub fn parse_tiles_csv(text: &str, path: &Path) -> Result<Vec<TileRow>> {
    let lines = Lines {
        path,
        header: TILES_HEADER,
    };
    lines
        .records(text, 6)?
        .into_iter()
        .map(|(n, f)| {
            Ok(TileRow {
                loss1: lines.number(n, f[0])?,
                loss2: lines.number(n, f[1])?,
                status: parse_status(f[2]).ok_or_else(|| lines.err(n, format!("unknown status `{}`", f[2])))?,
                best_r_db: lines.optional(n, f[3])?,
                best_probability: lines.optional(n, f[4])?,
                fidelity: lines.optional(n, f[5])?,
            })
        })
        .collect()
}

pub fn parse_contour_csv(text: &str, path: &Path) -> Result<Vec<(f64, Option<f64>)>> {
    let lines = Lines {
        path,
        header: CONTOUR_HEADER,
    };
    lines
        .records(text, 2)?
        .into_iter()
        .map(|(n, f)| Ok((lines.number(n, f[0])?, lines.optional(n, f[1])?)))
        .collect()
}
