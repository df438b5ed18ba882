//! Built-in domain generators.

use super::domain::Domain;
use super::point::Vec2;
use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Default vertex count for generated smooth shapes.
pub const DEFAULT_VERTICES: usize = 512;

fn polar(name: &str, n: usize, r: impl Fn(f64) -> f64) -> Result<Domain> {
    let v = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            Vec2::from_angle(t) * r(t)
        })
        .collect();
    Domain::new(name, v)
}

/// Disk of the given radius centered at the origin; vertex 0 sits at `(radius, 0)`.
pub fn disk(radius: f64, n: usize) -> Result<Domain> {
    polar("disk", n, |_| radius)
}

pub fn unit_disk() -> Domain {
    disk(1.0, DEFAULT_VERTICES).expect("unit disk is valid")
}

pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Domain> {
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!("ellipse semi-axes must be positive, got {a}, {b}")));
    }
    let v = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            Vec2::new(a * t.cos(), b * t.sin())
        })
        .collect();
    Domain::new("ellipse", v)
}

/// Unit disk with a smooth dent centered at the top; non-convex near `(0, 0.6)`.
pub fn kidney(n: usize) -> Result<Domain> {
    polar("kidney", n, |t| {
        let d = (t - FRAC_PI_2).sin().atan2((t - FRAC_PI_2).cos());
        1.0 - 0.4 * (-d * d / (2.0 * 0.35 * 0.35)).exp()
    })
}

/// Superellipse `|x|^6 + |y|^6 = 1`.
pub fn rounded_square(n: usize) -> Result<Domain> {
    let p = 6.0;
    let v = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64 + PI / n as f64;
            let (c, s) = (t.cos(), t.sin());
            Vec2::new(c.signum() * c.abs().powf(2.0 / p), s.signum() * s.abs().powf(2.0 / p))
        })
        .collect();
    Domain::new("rounded-square", v)
}

/// Parses `disk`, `kidney`, `rounded-square`, `ellipse:a,b`, `disk:r`, or a path to a domain file.
pub fn domain_from_spec(spec: &str) -> Result<Domain> {
    let (head, args) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let nums = |a: &str| -> Result<Vec<f64>> {
        a.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{spec}: {e}"))))
            .collect()
    };
    match (head, args) {
        ("disk", None) => Ok(unit_disk()),
        ("disk", Some(a)) => {
            let r = nums(a)?;
            disk(r[0], DEFAULT_VERTICES)
        }
        ("kidney", None) => kidney(DEFAULT_VERTICES),
        ("rounded-square", None) => rounded_square(DEFAULT_VERTICES),
        ("ellipse", Some(a)) => {
            let r = nums(a)?;
            if r.len() != 2 {
                return Err(Error::Parse(format!("{spec}: expected ellipse:a,b")));
            }
            ellipse(r[0], r[1], DEFAULT_VERTICES)
        }
        _ => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| Error::Io(format!("{spec}: {e}")))?;
            Domain::from_json(&text)
        }
    }
}
