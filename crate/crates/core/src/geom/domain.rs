use super::point::{segment_hits, Segment, Vec2};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative geometric tolerance: `tol = TAU_GEOM * diameter`.
pub const TAU_GEOM: f64 = 1e-9;

/// Default cap on the turning angle between consecutive boundary edges.
pub const DEFAULT_TURNING_CAP: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Nearest boundary point of a query.
#[derive(Clone, Copy, Debug)]
pub struct Projection {
    pub distance: f64,
    pub foot: Vec2,
    /// Inward unit normal at the foot; the bisector of the adjacent edge normals at a vertex.
    pub normal: Vec2,
    /// Inward normals of the edges meeting at the foot (equal unless the foot is a vertex).
    pub cone: (Vec2, Vec2),
    /// Arc-length parameter of the foot in `[0, perimeter)`.
    pub arc: f64,
    /// Another foot at the same distance exists; `foot` is the one with the lowest arc length.
    pub multi_foot: bool,
}

/// Simply connected planar domain bounded by a counterclockwise simple polyline.
#[derive(Clone, Debug)]
pub struct Domain {
    name: String,
    vertices: Vec<Vec2>,
    cum: Vec<f64>,
    perimeter: f64,
    diameter: f64,
    lo: Vec2,
    hi: Vec2,
    tol: f64,
    /// Target lattice spacing for grid-based computations, if the domain file provides one.
    pub h_hint: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct DomainFile {
    name: String,
    vertices: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
}

impl Domain {
    pub fn new(name: impl Into<String>, vertices: Vec<Vec2>) -> Result<Self> {
        Self::with_turning_cap(name, vertices, DEFAULT_TURNING_CAP)
    }

    pub fn with_turning_cap(name: impl Into<String>, mut vertices: Vec<Vec2>, cap: f64) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Domain(format!("{n} vertices, need at least 3")));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::Domain("non-finite vertex".into()));
        }
        let area2: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum();
        if area2 <= 0.0 {
            return Err(Error::Domain("boundary is not counterclockwise".into()));
        }
        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for v in &vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max(vertices[i].dist(vertices[j]));
            }
        }
        let tol = TAU_GEOM * diameter;
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 0..n {
            let l = vertices[i].dist(vertices[(i + 1) % n]);
            if l <= tol {
                return Err(Error::Domain(format!("degenerate edge at vertex {i}")));
            }
            acc += l;
            cum.push(acc);
        }
        for i in 0..n {
            let a = vertices[(i + n - 1) % n];
            let b = vertices[i];
            let c = vertices[(i + 1) % n];
            let turn = (b - a).cross(c - b).atan2((b - a).dot(c - b)).abs();
            if turn > cap {
                return Err(Error::Domain(format!(
                    "turning angle {turn:.3} at vertex {i} exceeds cap {cap:.3}"
                )));
            }
        }
        let d = Self {
            name: name.into(),
            vertices,
            cum,
            perimeter: acc,
            diameter,
            lo,
            hi,
            tol,
            h_hint: None,
        };
        d.check_simple()?;
        Ok(d)
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.vertices.len();
        let edges: Vec<Segment> = (0..n).map(|i| self.edge(i)).collect();
        let boxes: Vec<(Vec2, Vec2)> = edges
            .iter()
            .map(|e| {
                (
                    Vec2::new(e.p.x.min(e.q.x), e.p.y.min(e.q.y)),
                    Vec2::new(e.p.x.max(e.q.x), e.p.y.max(e.q.y)),
                )
            })
            .collect();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (boxes[i], boxes[j]);
                if a.1.x < b.0.x || b.1.x < a.0.x || a.1.y < b.0.y || b.1.y < a.0.y {
                    continue;
                }
                if super::point::segments_intersect(&edges[i], &edges[j]) {
                    return Err(Error::Domain(format!("edges {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Absolute tolerance used by boundary classification.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bbox(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn edge(&self, i: usize) -> Segment {
        let n = self.vertices.len();
        Segment::new(self.vertices[i], self.vertices[(i + 1) % n])
    }

    fn edge_normal(&self, i: usize) -> Vec2 {
        let e = self.edge(i);
        (e.q - e.p).perp().normalized()
    }

    /// Uniformly scaled and translated copy: `x -> center + s * (x - center)`.
    pub fn scaled(&self, s: f64, center: Vec2) -> Result<Self> {
        let v = self.vertices.iter().map(|&x| center + (x - center) * s).collect();
        let mut d = Self::with_turning_cap(self.name.clone(), v, std::f64::consts::PI)?;
        d.h_hint = self.h_hint.map(|h| h * s);
        Ok(d)
    }

    /// Point at arc length `s` (taken modulo the perimeter).
    pub fn point_at(&self, s: f64) -> Vec2 {
        let s = s.rem_euclid(self.perimeter);
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i.min(self.vertices.len() - 1),
            Err(i) => i - 1,
        };
        let e = self.edge(i);
        let t = (s - self.cum[i]) / (self.cum[i + 1] - self.cum[i]);
        e.at(t)
    }

    /// Euclidean distance from `x` to the boundary polyline.
    pub fn boundary_distance(&self, x: Vec2) -> f64 {
        (0..self.vertices.len())
            .map(|i| self.edge(i).distance_to(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: Vec2) -> Containment {
        if self.boundary_distance(x) <= self.tol {
            return Containment::Boundary;
        }
        if self.winding_inside(x) {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Crossing-number test; only meaningful off the boundary.
    fn winding_inside(&self, x: Vec2) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > x.y) != (b.y > x.y) {
                let xc = a.x + (x.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x.x < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Nearest point on the boundary. Defined for any query point.
    pub fn boundary_projection(&self, x: Vec2) -> Projection {
        let n = self.vertices.len();
        let mut cands: Vec<(f64, f64, Vec2, usize, f64)> = Vec::with_capacity(4);
        let mut best = f64::INFINITY;
        for i in 0..n {
            let e = self.edge(i);
            let t = e.project_param(x);
            let f = e.at(t);
            let d = f.dist(x);
            if d <= best + self.tol {
                if d < best {
                    best = d;
                }
                let mut arc = self.cum[i] + t * (self.cum[i + 1] - self.cum[i]);
                if arc >= self.perimeter - self.tol {
                    arc = 0.0;
                }
                cands.push((d, arc, f, i, t));
            }
        }
        cands.retain(|c| c.0 <= best + self.tol);
        cands.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (distance, arc, foot, i, t) = cands[0];
        let multi_foot = cands.iter().any(|c| c.2.dist(foot) > self.tol);
        let len_i = self.cum[i + 1] - self.cum[i];
        let cone = if t * len_i <= self.tol {
            (self.edge_normal((i + n - 1) % n), self.edge_normal(i))
        } else if (1.0 - t) * len_i <= self.tol {
            (self.edge_normal(i), self.edge_normal((i + 1) % n))
        } else {
            let a = self.edge_normal(i);
            (a, a)
        };
        let normal = (cone.0 + cone.1).normalized();
        Projection {
            distance,
            foot,
            normal,
            cone,
            arc,
            multi_foot,
        }
    }

    /// Whether every point of `s` lies in the closed domain.
    pub fn segment_admissible(&self, s: &Segment) -> bool {
        if self.contains(s.p) == Containment::Outside || self.contains(s.q) == Containment::Outside {
            return false;
        }
        let ts = self.split_params(s);
        ts.windows(2)
            .all(|w| w[1] - w[0] <= 1e-15 || self.contains(s.at(0.5 * (w[0] + w[1]))) != Containment::Outside)
    }

    /// Sorted parameters along `s` where it meets the boundary polyline.
    pub fn boundary_hits(&self, s: &Segment) -> Vec<f64> {
        let mut ts = Vec::new();
        for i in 0..self.vertices.len() {
            ts.extend(segment_hits(s, &self.edge(i), self.tol));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        ts
    }

    fn split_params(&self, s: &Segment) -> Vec<f64> {
        let mut ts = vec![0.0, 1.0];
        for i in 0..self.vertices.len() {
            ts.extend(segment_hits(s, &self.edge(i), self.tol));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        ts
    }

    /// Maximal closed sub-segments of `s` inside the closed domain, ordered along `s`.
    pub fn clip_to_domain(&self, s: &Segment) -> Vec<Segment> {
        let ts = self.split_params(s);
        let mut out = Vec::new();
        let mut start: Option<f64> = None;
        let mut end = 0.0;
        for w in ts.windows(2) {
            let inside = self.contains(s.at(0.5 * (w[0] + w[1]))) != Containment::Outside;
            if inside {
                if start.is_none() {
                    start = Some(w[0]);
                }
                end = w[1];
            } else if let Some(a) = start.take() {
                out.push((a, end));
            }
        }
        if let Some(a) = start {
            out.push((a, end));
        }
        let len = s.length();
        out.into_iter()
            .filter(|(a, b)| (b - a) * len > self.tol)
            .map(|(a, b)| Segment::new(s.at(a), s.at(b)))
            .collect()
    }

    /// Arc-length parameter of a boundary point.
    pub fn arc_of(&self, x: Vec2) -> Result<f64> {
        let p = self.boundary_projection(x);
        if p.distance > self.tol {
            return Err(Error::Input(format!(
                "point ({}, {}) is {:.3e} off the boundary",
                x.x, x.y, p.distance
            )));
        }
        Ok(p.arc)
    }

    /// Shorter arc length along the boundary between two boundary points.
    pub fn boundary_geodesic(&self, x: Vec2, y: Vec2) -> Result<f64> {
        let d = (self.arc_of(x)? - self.arc_of(y)?).abs();
        Ok(d.min(self.perimeter - d))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DomainFile {
            name: self.name.clone(),
            vertices: self.vertices.clone(),
            h: self.h_hint,
        })
        .expect("domain serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: DomainFile = serde_json::from_str(text)?;
        let mut d = Self::new(f.name, f.vertices)?;
        d.h_hint = f.h;
        Ok(d)
    }
}
