use super::{Connection, EndTag};
use crate::geom::{segments_intersect, Domain, Vec2};
use serde::Serialize;

/// Default tolerance on the angle between a boundary segment and the inward normal cone.
pub const TAU_ANGLE: f64 = 1e-3;

/// Pass/fail per defining clause of a connection.
#[derive(Clone, Debug, Serialize)]
pub struct Validation {
    pub admissible: bool,
    pub tagged: bool,
    pub odd_parity: bool,
    pub length_consistent: bool,
    pub messages: Vec<String>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.admissible && self.tagged && self.odd_parity && self.length_consistent
    }
}

/// Necessary conditions satisfied by minimal connections.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub disjoint: bool,
    pub unique_incidence: bool,
    /// Largest angle (rad) between a boundary segment and the inward normal cone at its foot.
    pub max_normal_angle: f64,
    pub orthogonal: bool,
    pub boundary_contact_at_endpoints: bool,
    pub messages: Vec<String>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.disjoint && self.unique_incidence && self.orthogonal && self.boundary_contact_at_endpoints
    }
}

fn end_point(seg: &super::ConnSegment, first: bool) -> Vec2 {
    if first {
        seg.segment.p
    } else {
        seg.segment.q
    }
}

pub fn validate_connection(domain: &Domain, points: &[Vec2], c: &Connection) -> Validation {
    let tol = domain.tol();
    let mut v = Validation {
        admissible: true,
        tagged: true,
        odd_parity: true,
        length_consistent: true,
        messages: Vec::new(),
    };
    for (k, s) in c.segments.iter().enumerate() {
        if !domain.segment_admissible(&s.segment) {
            v.admissible = false;
            v.messages.push(format!("segment {k} leaves the domain"));
        }
        if s.segment.length() <= tol {
            v.tagged = false;
            v.messages.push(format!("segment {k} is degenerate"));
        }
        if matches!(s.ends, (EndTag::Boundary(_), EndTag::Boundary(_))) {
            v.tagged = false;
            v.messages.push(format!("segment {k} joins two boundary points"));
        }
        for (first, tag) in [(true, s.ends.0), (false, s.ends.1)] {
            let x = end_point(s, first);
            let ok = match tag {
                EndTag::Point(i) => i < points.len() && points[i].dist(x) <= tol,
                EndTag::Boundary(b) => b.dist(x) <= tol && domain.boundary_distance(x) <= tol,
            };
            if !ok {
                v.tagged = false;
                v.messages.push(format!("segment {k} endpoint ({}, {}) does not match its tag", x.x, x.y));
            }
        }
    }
    for (i, d) in c.incidence(points.len()).into_iter().enumerate() {
        if d % 2 == 0 {
            v.odd_parity = false;
            v.messages.push(format!("point {i} has even incidence {d}"));
        }
    }
    let sum: f64 = c.segments.iter().map(|s| s.segment.length()).sum();
    if (sum - c.total_length).abs() > 1e-12 * sum.max(1.0) {
        v.length_consistent = false;
        v.messages.push(format!("total {} differs from segment sum {sum}", c.total_length));
    }
    v
}

fn angle(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).abs().atan2(a.dot(b))
}

/// Angle from `d` to the cone spanned by two unit normals; zero inside the cone.
fn cone_angle(d: Vec2, cone: (Vec2, Vec2)) -> f64 {
    let (a0, a1) = (angle(d, cone.0), angle(d, cone.1));
    if a0 + a1 <= angle(cone.0, cone.1) + 1e-12 {
        0.0
    } else {
        a0.min(a1)
    }
}

pub fn minimality_diagnostics(domain: &Domain, c: &Connection, n_points: usize) -> Diagnostics {
    let tol = domain.tol();
    let mut d = Diagnostics {
        disjoint: true,
        unique_incidence: true,
        max_normal_angle: 0.0,
        orthogonal: true,
        boundary_contact_at_endpoints: true,
        messages: Vec::new(),
    };
    let segs = c.raw_segments();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if segments_intersect(&segs[i], &segs[j]) {
                d.disjoint = false;
                d.messages.push(format!("segments {i} and {j} intersect"));
            }
        }
    }
    for (i, k) in c.incidence(n_points).into_iter().enumerate() {
        if k != 1 {
            d.unique_incidence = false;
            d.messages.push(format!("point {i} has {k} incident segments"));
        }
    }
    for (k, s) in c.segments.iter().enumerate() {
        for (first, tag) in [(true, s.ends.0), (false, s.ends.1)] {
            if let EndTag::Boundary(_) = tag {
                let foot = end_point(s, first);
                let other = end_point(s, !first);
                let cone = domain.boundary_projection(foot).cone;
                let a = cone_angle((other - foot).normalized(), cone);
                d.max_normal_angle = d.max_normal_angle.max(a);
                if a > TAU_ANGLE {
                    d.orthogonal = false;
                    d.messages.push(format!("segment {k} meets the boundary at {a:.3e} rad off normal"));
                }
            }
        }
        let len = s.segment.length();
        let interior_hit = domain
            .boundary_hits(&s.segment)
            .into_iter()
            .any(|t| t * len > tol && (1.0 - t) * len > tol);
        if interior_hit {
            d.boundary_contact_at_endpoints = false;
            d.messages.push(format!("segment {k} touches the boundary away from its endpoints"));
        }
    }
    d
}
