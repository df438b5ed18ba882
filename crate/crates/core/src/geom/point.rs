use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A point or vector in the plane. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Counterclockwise rotation by a right angle.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    pub fn lerp(self, o: Self, t: f64) -> Self {
        self + (o - self) * t
    }

    /// Lexicographic order on (x, y) with a total order on floats.
    pub fn lex_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.x.total_cmp(&o.x).then(self.y.total_cmp(&o.y))
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Closed, non-degenerate straight segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub p: Vec2,
    pub q: Vec2,
}

impl Segment {
    pub fn new(p: Vec2, q: Vec2) -> Self {
        Self { p, q }
    }

    pub fn length(&self) -> f64 {
        self.p.dist(self.q)
    }

    pub fn at(&self, t: f64) -> Vec2 {
        if t == 0.0 {
            return self.p;
        }
        if t == 1.0 {
            return self.q;
        }
        self.p.lerp(self.q, t)
    }

    /// Closest point parameter in [0, 1].
    pub fn project_param(&self, x: Vec2) -> f64 {
        let d = self.q - self.p;
        let l2 = d.norm2();
        if l2 == 0.0 {
            return 0.0;
        }
        ((x - self.p).dot(d) / l2).clamp(0.0, 1.0)
    }

    pub fn distance_to(&self, x: Vec2) -> f64 {
        self.at(self.project_param(x)).dist(x)
    }

    /// Endpoints ordered lexicographically; used for deterministic tie-breaking.
    pub fn sorted_endpoints(&self) -> (Vec2, Vec2) {
        if self.p.lex_cmp(&self.q).is_le() {
            (self.p, self.q)
        } else {
            (self.q, self.p)
        }
    }
}

/// Orientation of `c` relative to the directed line `a -> b` (twice the signed area).
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Parameters along `s` at which it meets the closed segment `e`.
///
/// Proper crossings give one parameter; collinear overlaps give the overlap ends.
pub fn segment_hits(s: &Segment, e: &Segment, tol: f64) -> Vec<f64> {
    let d = s.q - s.p;
    let f = e.q - e.p;
    let denom = d.cross(f);
    let w = e.p - s.p;
    let dl = d.norm();
    let fl = f.norm();
    if dl == 0.0 {
        return Vec::new();
    }
    if denom.abs() <= 1e-14 * dl * fl {
        // Parallel: check collinearity via distance of e's endpoints to the line of s.
        if (d.cross(w)).abs() / dl > tol {
            return Vec::new();
        }
        let t0 = w.dot(d) / (dl * dl);
        let t1 = (e.q - s.p).dot(d) / (dl * dl);
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        if lo > hi + tol / dl {
            return Vec::new();
        }
        return vec![lo, hi.max(lo)];
    }
    let t = w.cross(f) / denom;
    let u = w.cross(d) / denom;
    let ts = tol / dl;
    let us = tol / fl.max(1e-300);
    if t >= -ts && t <= 1.0 + ts && u >= -us && u <= 1.0 + us {
        vec![t.clamp(0.0, 1.0)]
    } else {
        Vec::new()
    }
}

/// Exact-predicate test whether two closed segments share a point.
pub fn segments_intersect(a: &Segment, b: &Segment) -> bool {
    let o1 = orient(a.p, a.q, b.p);
    let o2 = orient(a.p, a.q, b.q);
    let o3 = orient(b.p, b.q, a.p);
    let o4 = orient(b.p, b.q, a.q);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (o1 == 0.0 && on(a.p, a.q, b.p))
        || (o2 == 0.0 && on(a.p, a.q, b.q))
        || (o3 == 0.0 && on(b.p, b.q, a.p))
        || (o4 == 0.0 && on(b.p, b.q, a.q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_segments_intersect() {
        let a = Segment::new(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0));
        let b = Segment::new(Vec2::new(0.0, -1.0), Vec2::new(0.0, 1.0));
        assert!(segments_intersect(&a, &b));
        assert_eq!(segment_hits(&a, &b, 1e-12), vec![0.5]);
    }

    #[test]
    fn touching_and_disjoint() {
        let a = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0));
        let b = Segment::new(Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0));
        let c = Segment::new(Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0));
        assert!(segments_intersect(&a, &b));
        assert!(!segments_intersect(&a, &c));
    }

    #[test]
    fn collinear_overlap_reports_both_ends() {
        let a = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0));
        let b = Segment::new(Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0));
        let t = segment_hits(&a, &b, 1e-12);
        assert_eq!(t.len(), 2);
        assert!((t[0] - 0.25).abs() < 1e-15 && (t[1] - 0.5).abs() < 1e-15);
    }
}
