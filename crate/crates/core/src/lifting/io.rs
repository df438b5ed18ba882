//! Field and edge-set files.
//!
//! Text fields: `origin x y`, `h h`, `dims nx ny`, then one `mask x y` row per
//! node in row-major order (`i` fastest). Binary fields: magic `FCGF`, `nx` and
//! `ny` as little-endian `u64`, `origin.x`, `origin.y`, `h` and the node values
//! as little-endian `f64`, then one mask byte per node. Floats are written in
//! shortest round-trip form, so both formats reload exactly.

use super::grid::{EdgeSet, Grid, GridField};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use std::fmt::Write as _;

const MAGIC: &[u8; 4] = b"FCGF";

pub fn field_to_text(f: &GridField) -> String {
    let g = &f.grid;
    let mut s = String::with_capacity(32 * g.len());
    let _ = writeln!(s, "origin {:?} {:?}", g.origin.x, g.origin.y);
    let _ = writeln!(s, "h {:?}", g.h);
    let _ = writeln!(s, "dims {} {}", g.nx, g.ny);
    for (k, v) in f.values.iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?}", u8::from(g.mask[k]), v.x, v.y);
    }
    s
}

fn parse_f64(tok: Option<&str>, what: &str) -> Result<f64> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn header<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<Vec<&'a str>> {
    let line = lines.next().ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
    let mut toks = line.split_whitespace();
    if toks.next() != Some(key) {
        return Err(Error::Parse(format!("expected `{key}`, got `{line}`")));
    }
    Ok(toks.collect())
}

pub fn field_from_text(text: &str) -> Result<GridField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let o = header(&mut lines, "origin")?;
    let origin = Vec2::new(parse_f64(o.first().copied(), "origin.x")?, parse_f64(o.get(1).copied(), "origin.y")?);
    let h = parse_f64(header(&mut lines, "h")?.first().copied(), "h")?;
    let d = header(&mut lines, "dims")?;
    let dim = |i: usize| -> Result<usize> {
        d.get(i)
            .ok_or_else(|| Error::Parse("missing dims".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("dims: {e}")))
    };
    let (nx, ny) = (dim(0)?, dim(1)?);
    let mut mask = Vec::with_capacity(nx * ny);
    let mut values = Vec::with_capacity(nx * ny);
    for line in lines {
        let mut t = line.split_whitespace();
        mask.push(match t.next() {
            Some("0") => false,
            Some("1") => true,
            other => return Err(Error::Parse(format!("bad mask flag {other:?}"))),
        });
        values.push(Vec2::new(parse_f64(t.next(), "x")?, parse_f64(t.next(), "y")?));
    }
    GridField::new(Grid::new(origin, h, nx, ny, mask)?, values)
}

pub fn field_to_bytes(f: &GridField) -> Vec<u8> {
    let g = &f.grid;
    let mut b = Vec::with_capacity(44 + 17 * g.len());
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&(g.nx as u64).to_le_bytes());
    b.extend_from_slice(&(g.ny as u64).to_le_bytes());
    for x in [g.origin.x, g.origin.y, g.h] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    for v in &f.values {
        b.extend_from_slice(&v.x.to_le_bytes());
        b.extend_from_slice(&v.y.to_le_bytes());
    }
    b.extend(g.mask.iter().map(|&m| u8::from(m)));
    b
}

pub fn field_from_bytes(b: &[u8]) -> Result<GridField> {
    let short = || Error::Parse("truncated binary field".into());
    if b.get(..4) != Some(MAGIC.as_slice()) {
        return Err(Error::Parse("not a binary field file".into()));
    }
    let word = |at: usize| -> Result<[u8; 8]> { b.get(at..at + 8).ok_or_else(short)?.try_into().map_err(|_| short()) };
    let nx = u64::from_le_bytes(word(4)?) as usize;
    let ny = u64::from_le_bytes(word(12)?) as usize;
    let f = |at: usize| word(at).map(f64::from_le_bytes);
    let (ox, oy, h) = (f(20)?, f(28)?, f(36)?);
    let n = nx.checked_mul(ny).ok_or_else(short)?;
    if b.len() != 44 + 17 * n {
        return Err(short());
    }
    let values = (0..n)
        .map(|k| Ok(Vec2::new(f(44 + 16 * k)?, f(52 + 16 * k)?)))
        .collect::<Result<Vec<_>>>()?;
    let mask = b[44 + 16 * n..].iter().map(|&m| m != 0).collect();
    GridField::new(Grid::new(Vec2::new(ox, oy), h, nx, ny, mask)?, values)
}

/// Edge midpoints as `x y` rows, preceded by the edge count and total length.
pub fn edges_to_text(e: &EdgeSet, g: &Grid) -> String {
    let mut s = format!("edges {}\nlength {:?}\n", e.count(), e.length(g.h));
    for m in e.midpoints(g) {
        let _ = writeln!(s, "{:?} {:?}", m.x, m.y);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::unit_disk;

    fn sample() -> GridField {
        let g = Grid::for_domain(&unit_disk(), 16).unwrap();
        GridField::from_fn(&g, |x| Vec2::new(x.x.sin() / 3.0, x.y * 0.1 + 1e-17))
    }

    #[test]
    fn text_round_trip_is_exact() {
        let f = sample();
        let t = field_to_text(&f);
        let back = field_from_text(&t).unwrap();
        assert_eq!(back, f);
        assert_eq!(field_to_text(&back), t);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let f = sample();
        let b = field_to_bytes(&f);
        assert_eq!(field_from_bytes(&b).unwrap(), f);
        assert!(field_from_bytes(&b[..b.len() - 1]).is_err());
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(field_from_text("origin 0 0\nh 1\n").is_err());
        assert!(field_from_text("h 1\norigin 0 0\ndims 3 3\n").is_err());
    }

    #[test]
    fn edge_listing_has_one_row_per_edge() {
        let g = Grid::for_domain(&unit_disk(), 8).unwrap();
        let mut e = EdgeSet::empty(&g);
        for edge in g.mask_edges().take(5) {
            e.insert(&g, edge);
        }
        let t = edges_to_text(&e, &g);
        assert_eq!(t.lines().count(), 7);
    }
}
