//! Plot-ready exports of a finished run directory.

use crate::record::{points_to_text, polylines_to_text, segments_to_text, RunRecord};
use ferroconnect::error::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn csv<T>(header: &str, rows: &[T], row: impl Fn(&T) -> String) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        let _ = writeln!(s, "{}", row(r));
    }
    s
}

/// Reads `results.json` from `dir` and writes CSV series and geometry files
/// into `dir/report`. Returns the written paths in a fixed order.
pub fn export_report(dir: &Path) -> Result<Vec<PathBuf>> {
    for f in ["manifest.toml", "results.json"] {
        if !dir.join(f).is_file() {
            return Err(Error::Input(format!("incomplete run: {} has no {f}", dir.display())));
        }
    }
    let text = std::fs::read_to_string(dir.join("results.json"))?;
    let rec: RunRecord = serde_json::from_str(&text)?;
    let out = dir.join("report");
    std::fs::create_dir_all(&out)?;
    let files = [
        (
            "ledger.csv",
            csv("level,sweep,eps,f,elastic_q,elastic_m,potential,residual,step", &rec.ledger, |r| {
                format!(
                    "{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                    r.level, r.sweep, r.eps, r.f, r.elastic_q, r.elastic_m, r.potential, r.residual, r.step
                )
            }),
        ),
        ("sigma.csv", csv("sigma,bracket", &rec.sigma, |r| format!("{:?},{:?}", r.sigma, r.bracket))),
        (
            "trend.csv",
            csv("level,eps,energy,excess", &rec.trend, |r| {
                format!("{},{:?},{:?},{:?}", r.level, r.eps, r.energy, r.excess)
            }),
        ),
        (
            "renorm.csv",
            csv("config,w,spread,connection_length,w_beta", &rec.renorm, |r| {
                let cfg: Vec<String> = r.points.iter().map(|p| format!("{:?} {:?}", p.x, p.y)).collect();
                format!("{},{:?},{:?},{:?},{:?}", cfg.join(";"), r.w, r.spread, r.connection_length, r.w_beta)
            }),
        ),
        (
            "comparison.csv",
            csv("item,simulated,predicted,mismatch", &rec.comparison, |r| {
                let cell = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
                format!("{},{},{},{}", r.item, cell(r.simulated), cell(r.predicted), cell(r.mismatch))
            }),
        ),
        ("points.txt", points_to_text(&rec.points)),
        (
            "defects.txt",
            points_to_text(&rec.defects.iter().filter(|d| !d.orientable).map(|d| d.center).collect::<Vec<_>>()),
        ),
        ("segments.txt", rec.connection.as_ref().map(segments_to_text).unwrap_or_default()),
        ("walls.txt", polylines_to_text(&rec.walls)),
        ("edges.txt", points_to_text(&rec.edges)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let p = out.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
    }
    Ok(written)
}
