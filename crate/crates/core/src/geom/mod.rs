//! Planar domains bounded by closed polylines and the geometric predicates built on them.

mod domain;
mod point;
mod shapes;

pub use domain::{Containment, Domain, Projection, DEFAULT_TURNING_CAP, TAU_GEOM};
pub use point::{orient, segment_hits, segments_intersect, Segment, Vec2};
pub use shapes::{
    disk, domain_from_spec, ellipse, kidney, rounded_square, unit_disk, DEFAULT_VERTICES,
};
