//! Threshold-curve files.
//!
//! ```text
//! m=4
//! 0.00,0.48
//! 0.05,0.47
//! ```
//!
//! The header names the photon number, then one `x,F` pair per line. Blank
//! lines and lines starting with `#` are ignored.

use std::fs;
use std::path::{Path, PathBuf};

use heraldsim_core::ThresholdCurve;

use crate::error::{AppError, Result};

/// Conventional file name for the curve of order `m`.
pub fn curve_path(dir: &Path, m: u32) -> PathBuf {
    dir.join(format!("f{m}.csv"))
}

fn invalid(path: &Path, reason: impl Into<String>) -> AppError {
    AppError::Threshold {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Parse curve text; `path` is used for messages and as the provenance tag.
pub fn parse_threshold_curve(text: &str, path: &Path) -> Result<ThresholdCurve> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines.next().ok_or_else(|| invalid(path, "file is empty"))?;
    let m = header
        .split_once('=')
        .filter(|(key, _)| key.trim() == "m")
        .and_then(|(_, v)| v.trim().parse::<u32>().ok())
        .ok_or_else(|| {
            invalid(
                path,
                format!("line {line_no}: expected header `m=<int>`, found `{header}`"),
            )
        })?;

    let mut points = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [x, f] = fields[..] else {
            return Err(invalid(path, format!("line {line_no}: expected `x,F`, found `{line}`")));
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| invalid(path, format!("line {line_no}: `{s}` is not a decimal number")))
        };
        points.push((parse(x)?, parse(f)?));
    }
    if points.is_empty() {
        return Err(invalid(path, "no curve samples after the header"));
    }
    ThresholdCurve::new(m, points, path.display().to_string()).map_err(|e| invalid(path, e.to_string()))
}

pub fn load_threshold_curve(path: &Path) -> Result<ThresholdCurve> {
    let text = fs::read_to_string(path).map_err(|e| invalid(path, e.to_string()))?;
    parse_threshold_curve(&text, path)
}

/// Load `f<m>.csv` from `dir` and check its header agrees with `m`.
pub fn load_curve_for(dir: &Path, m: u32) -> Result<ThresholdCurve> {
    let path = curve_path(dir, m);
    let curve = load_threshold_curve(&path)?;
    if curve.m() != m {
        return Err(invalid(
            &path,
            format!("header declares m={} but m={m} was requested", curve.m()),
        ));
    }
    Ok(curve)
}

/// Orders with a curve file present in `dir`, ascending.
pub fn available_orders(dir: &Path) -> Result<Vec<u32>> {
    let entries = fs::read_dir(dir).map_err(|e| invalid(dir, e.to_string()))?;
    let mut orders: Vec<u32> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix('f')?.strip_suffix(".csv")?.parse().ok()
        })
        .collect();
    orders.sort_unstable();
    Ok(orders)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ThresholdCurve> {
        parse_threshold_curve(text, Path::new("f3.csv"))
    }

    #[test]
    fn parses_header_and_samples() {
        let c = parse("m=3\n0,0.5\n0.5,0.4\n1,0.2\n").unwrap();
        assert_eq!(c.m(), 3);
        assert_eq!(c.points(), &[(0.0, 0.5), (0.5, 0.4), (1.0, 0.2)]);
        assert_eq!(c.provenance(), "f3.csv");
    }

    #[test]
    fn tolerates_whitespace_comments_and_crlf() {
        let c = parse("# synthetic\r\n m = 4 \r\n\r\n0.0 , 0.5\r\n0.2,0.45\r\n").unwrap();
        assert_eq!(c.m(), 4);
        assert_eq!(c.points().len(), 2);
    }

    #[test]
    fn rejects_malformed_files() {
        for text in [
            "",
            "# only a comment\n",
            "m=3\n",
            "3\n0,0.5\n",
            "n=3\n0,0.5\n",
            "m=three\n0,0.5\n",
            "m=3\n0;0.5\n",
            "m=3\n0,0.5,1\n",
            "m=3\n0,abc\n",
            "m=3\n0,NaN\n",
            "m=3\n0,0.5\n0,0.4\n",
            "m=3\n0,0.5\n0.5,0.6\n",
            "m=3\n0,1.0\n",
            "m=3\n0,0.5\n1.5,0.4\n",
        ] {
            let err = parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 6, "{text:?}");
        }
    }
}
