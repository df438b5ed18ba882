//! Run results and the plain-text geometry files exported from them.

use ferroconnect::connection::Connection;
use ferroconnect::error::Error;
use ferroconnect::ferrosim::LedgerRow;
use ferroconnect::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub center: Vec2,
    pub winding: i64,
    pub orientable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub sigma: f64,
    pub bracket: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub level: usize,
    pub eps: f64,
    pub energy: f64,
    /// `energy - 2 pi |d| |log eps|`.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormRow {
    pub points: Vec<Vec2>,
    pub w: f64,
    pub spread: f64,
    pub connection_length: f64,
    pub w_beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub item: String,
    /// Absent for rows that only carry a distance, or when undefined.
    pub simulated: Option<f64>,
    pub predicted: Option<f64>,
    pub mismatch: Option<f64>,
}

/// Everything a run produced, stored as `results.json` in the run directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub mode: String,
    /// Ordered `key: value` lines of the summary table.
    pub summary: Vec<(String, String)>,
    pub points: Vec<Vec2>,
    pub connection: Option<Connection>,
    pub defects: Vec<DefectRow>,
    pub walls: Vec<Vec<Vec2>>,
    /// Midpoints of jump or wall edges.
    pub edges: Vec<Vec2>,
    pub ledger: Vec<LedgerRow>,
    pub sigma: Vec<SigmaRow>,
    pub trend: Vec<TrendRow>,
    pub renorm: Vec<RenormRow>,
    pub comparison: Vec<ComparisonRow>,
}

impl RunRecord {
    pub fn new(mode: &str) -> Self {
        Self {
            mode: mode.into(),
            ..Default::default()
        }
    }

    pub fn put(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn summary_text(&self) -> String {
        let width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k:width$}  {v}");
        }
        if !self.comparison.is_empty() {
            let _ = writeln!(s, "\n{:<24} {:>14} {:>14} {:>12}", "item", "simulated", "predicted", "mismatch");
            let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
            for r in &self.comparison {
                let (a, b) = (cell(r.simulated), cell(r.predicted));
                let m = r.mismatch.map_or("-".to_string(), |x| format!("{x:.3e}"));
                let _ = writeln!(s, "{:<24} {a:>14} {b:>14} {m:>12}", r.item);
            }
        }
        s
    }
}

fn parse_row(line: &str, n: usize) -> Result<Vec<f64>, Error> {
    let v: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("`{line}`: {e}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(Error::Parse(format!("`{line}`: expected {n} numbers")));
    }
    Ok(v)
}

/// One `x y` row per point.
pub fn points_to_text(pts: &[Vec2]) -> String {
    pts.iter().map(|p| format!("{:?} {:?}\n", p.x, p.y)).collect()
}

pub fn points_from_text(text: &str) -> Result<Vec<Vec2>, Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_row(l, 2).map(|v| Vec2::new(v[0], v[1])))
        .collect()
}

/// One `x1 y1 x2 y2` row per segment.
pub fn segments_to_text(c: &Connection) -> String {
    c.segments
        .iter()
        .map(|s| format!("{:?} {:?} {:?} {:?}\n", s.segment.p.x, s.segment.p.y, s.segment.q.x, s.segment.q.y))
        .collect()
}

pub fn segments_from_text(text: &str) -> Result<Vec<(Vec2, Vec2)>, Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_row(l, 4).map(|v| (Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]))))
        .collect()
}

/// Polylines as blocks of `x y` rows separated by blank lines.
pub fn polylines_to_text(lines: &[Vec<Vec2>]) -> String {
    lines.iter().map(|l| points_to_text(l)).collect::<Vec<_>>().join("\n")
}

pub fn polylines_from_text(text: &str) -> Result<Vec<Vec<Vec2>>, Error> {
    text.split("\n\n").filter(|b| !b.trim().is_empty()).map(points_from_text).collect()
}
