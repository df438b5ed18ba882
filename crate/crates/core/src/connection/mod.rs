//! Minimal connections of singular points relative to a domain.
//!
//! A connection is a system of straight segments in the closed domain, each
//! joining two points or a point to the boundary, such that every point has an
//! odd number of incident segments. Its minimal total length is computed by a
//! subset dynamic program over perfect "pair-or-boundary" assignments; an
//! independent exhaustive search over edge subsets with degrees 1 or 3 certifies it.

mod audit;
mod oracle;

pub use audit::{minimality_diagnostics, validate_connection, Diagnostics, Validation};
pub use oracle::{oracle_min_connection, ORACLE_MAX_POINTS};

use crate::error::{Error, Result};
use crate::geom::{Containment, Domain, Segment, Vec2};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Largest point count accepted by the dynamic program.
pub const MAX_POINTS: usize = 16;

/// Cap on the number of equal-length optima examined for tie-breaking.
const MAX_TIED: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndTag {
    Point(usize),
    Boundary(Vec2),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnSegment {
    pub segment: Segment,
    pub ends: (EndTag, EndTag),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub segments: Vec<ConnSegment>,
    pub total_length: f64,
}

impl Connection {
    pub fn empty() -> Self {
        Self {
            segments: Vec::new(),
            total_length: 0.0,
        }
    }

    /// Builds a connection in canonical order with its canonical total.
    pub fn from_segments(mut segments: Vec<ConnSegment>) -> Self {
        segments.sort_by(|a, b| seg_key_cmp(&a.segment, &b.segment));
        let total_length = segments.iter().map(|s| s.segment.length()).sum();
        Self {
            segments,
            total_length,
        }
    }

    pub fn raw_segments(&self) -> Vec<Segment> {
        self.segments.iter().map(|s| s.segment).collect()
    }

    /// Number of segments incident to each point index.
    pub fn incidence(&self, p: usize) -> Vec<usize> {
        let mut deg = vec![0; p];
        for s in &self.segments {
            for t in [s.ends.0, s.ends.1] {
                if let EndTag::Point(i) = t {
                    if i < p {
                        deg[i] += 1;
                    }
                }
            }
        }
        deg
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("connection serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Row-major point order: by `y`, then `x`.
fn point_cmp(a: &Vec2, b: &Vec2) -> Ordering {
    a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x))
}

fn seg_key(s: &Segment) -> (Vec2, Vec2) {
    if point_cmp(&s.p, &s.q).is_le() {
        (s.p, s.q)
    } else {
        (s.q, s.p)
    }
}

fn seg_key_cmp(a: &Segment, b: &Segment) -> Ordering {
    let (a0, a1) = seg_key(a);
    let (b0, b1) = seg_key(b);
    point_cmp(&a0, &b0).then(point_cmp(&a1, &b1))
}

/// Lexicographic comparison of two connections by their sorted segment endpoints.
pub(crate) fn config_cmp(a: &Connection, b: &Connection) -> Ordering {
    for (x, y) in a.segments.iter().zip(&b.segments) {
        let c = seg_key_cmp(&x.segment, &y.segment);
        if c.is_ne() {
            return c;
        }
    }
    a.segments.len().cmp(&b.segments.len())
}

/// How a pair of points may be joined.
#[derive(Clone, Copy, Debug)]
pub(crate) enum PairJoin {
    Straight,
    /// The straight segment leaves the domain; its two end components both reach the boundary.
    Clipped(Segment, Segment),
}

/// Candidate edge costs, computed once per instance.
#[derive(Clone, Debug)]
pub(crate) struct Costs {
    pub points: Vec<Vec2>,
    pub boundary: Vec<(f64, Vec2)>,
    pair: Vec<Option<(f64, PairJoin)>>,
    pub tol: f64,
}

impl Costs {
    pub fn new(domain: &Domain, points: &[Vec2]) -> Result<Self> {
        check_points(domain, points)?;
        let n = points.len();
        let boundary = points
            .iter()
            .map(|&a| {
                let pr = domain.boundary_projection(a);
                (a.dist(pr.foot), pr.foot)
            })
            .collect();
        let mut pair = vec![None; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let s = Segment::new(points[i], points[j]);
                let opt = if domain.segment_admissible(&s) {
                    Some((s.length(), PairJoin::Straight))
                } else {
                    let parts = domain.clip_to_domain(&s);
                    match (parts.first(), parts.last()) {
                        (Some(a), Some(b))
                            if parts.len() >= 2 && a.p == points[i] && b.q == points[j] =>
                        {
                            Some((a.length() + b.length(), PairJoin::Clipped(*a, *b)))
                        }
                        _ => None,
                    }
                };
                pair[i * n + j] = opt;
                pair[j * n + i] = opt;
            }
        }
        let tol = 1e-12 * domain.diameter() * (n.max(1) as f64);
        Ok(Self {
            points: points.to_vec(),
            boundary,
            pair,
            tol,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<(f64, PairJoin)> {
        self.pair[i * self.n() + j]
    }

    #[cfg(test)]
    pub fn forbid(&mut self, i: usize, j: usize) {
        let n = self.n();
        self.pair[i * n + j] = None;
        self.pair[j * n + i] = None;
    }

    pub fn boundary_segment(&self, i: usize) -> ConnSegment {
        ConnSegment {
            segment: Segment::new(self.points[i], self.boundary[i].1),
            ends: (EndTag::Point(i), EndTag::Boundary(self.boundary[i].1)),
        }
    }

    pub fn pair_segments(&self, i: usize, j: usize, join: PairJoin) -> Vec<ConnSegment> {
        let (i, j) = (i.min(j), i.max(j));
        match join {
            PairJoin::Straight => vec![ConnSegment {
                segment: Segment::new(self.points[i], self.points[j]),
                ends: (EndTag::Point(i), EndTag::Point(j)),
            }],
            PairJoin::Clipped(a, b) => vec![
                ConnSegment {
                    segment: a,
                    ends: (EndTag::Point(i), EndTag::Boundary(a.q)),
                },
                ConnSegment {
                    segment: b,
                    ends: (EndTag::Boundary(b.p), EndTag::Point(j)),
                },
            ],
        }
    }
}

fn check_points(domain: &Domain, points: &[Vec2]) -> Result<()> {
    for (i, &a) in points.iter().enumerate() {
        match domain.contains(a) {
            Containment::Inside => {}
            c => {
                return Err(Error::Domain(format!(
                    "point {i} ({}, {}) is not strictly inside ({c:?})",
                    a.x, a.y
                )))
            }
        }
        if points[..i].contains(&a) {
            return Err(Error::Input(format!("point {i} ({}, {}) is repeated", a.x, a.y)));
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Choice {
    Boundary(usize),
    Pair(usize, usize, PairJoin),
}

/// Minimal connection by subset dynamic programming; ties broken by sorted segment endpoints.
pub fn solve_min_connection(domain: &Domain, points: &[Vec2]) -> Result<Connection> {
    if points.len() > MAX_POINTS {
        return Err(Error::Capacity {
            what: "points",
            got: points.len(),
            limit: MAX_POINTS,
        });
    }
    Ok(solve_with_costs(&Costs::new(domain, points)?))
}

pub(crate) fn solve_with_costs(costs: &Costs) -> Connection {
    let n = costs.n();
    let full = (1usize << n) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut v = costs.boundary[i].0 + best[rest];
        let mut m = rest;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            if let Some((c, _)) = costs.pair(i, j) {
                v = v.min(c + best[rest & !(1 << j)]);
            }
        }
        best[mask] = v;
    }
    let target = best[full] + costs.tol;
    let mut tied = Vec::new();
    enumerate_tight(costs, &best, full, 0.0, target, &mut Vec::new(), &mut tied);
    tied.into_iter()
        .map(|choices| build(costs, &choices))
        .min_by(config_cmp)
        .expect("the all-boundary connection is always feasible")
}

fn enumerate_tight(
    costs: &Costs,
    best: &[f64],
    mask: usize,
    acc: f64,
    target: f64,
    stack: &mut Vec<Choice>,
    out: &mut Vec<Vec<Choice>>,
) {
    if out.len() >= MAX_TIED {
        return;
    }
    if mask == 0 {
        out.push(stack.clone());
        return;
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << i);
    let c = costs.boundary[i].0;
    if acc + c + best[rest] <= target {
        stack.push(Choice::Boundary(i));
        enumerate_tight(costs, best, rest, acc + c, target, stack, out);
        stack.pop();
    }
    let mut m = rest;
    while m != 0 {
        let j = m.trailing_zeros() as usize;
        m &= m - 1;
        if let Some((c, join)) = costs.pair(i, j) {
            let r = rest & !(1 << j);
            if acc + c + best[r] <= target {
                stack.push(Choice::Pair(i, j, join));
                enumerate_tight(costs, best, r, acc + c, target, stack, out);
                stack.pop();
            }
        }
    }
}

fn build(costs: &Costs, choices: &[Choice]) -> Connection {
    let mut segs = Vec::new();
    for ch in choices {
        match *ch {
            Choice::Boundary(i) => segs.push(costs.boundary_segment(i)),
            Choice::Pair(i, j, join) => segs.extend(costs.pair_segments(i, j, join)),
        }
    }
    Connection::from_segments(segs)
}

/// `p` points drawn uniformly in the domain, at least `margin` from the boundary
/// and `margin` from each other.
pub fn random_points<R: Rng>(domain: &Domain, p: usize, margin: f64, rng: &mut R) -> Vec<Vec2> {
    let (lo, hi) = domain.bbox();
    let mut pts: Vec<Vec2> = Vec::with_capacity(p);
    while pts.len() < p {
        let x = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if domain.contains(x) == Containment::Inside
            && domain.boundary_distance(x) > margin
            && pts.iter().all(|q| q.dist(x) > margin)
        {
            pts.push(x);
        }
    }
    pts
}
