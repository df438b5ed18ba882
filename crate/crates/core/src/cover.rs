//! The double cover `z -> z^2` of the circle, seen as director -> Q-tensor.
//!
//! Q-tensors are stored in q-coordinates `q = sqrt(2) (Q11, Q12)`, so a unit
//! director `v` maps to `q = (v1^2 - v2^2, 2 v1 v2)`, the complex square of `v`.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use std::f64::consts::FRAC_PI_2;

/// Tolerance on unit norms.
pub const TAU_UNIT: f64 = 1e-12;

/// Support radius of the pairing function in the covered circle.
pub const XI_DELTA0: f64 = FRAC_PI_2;

fn check_unit(v: Vec2, what: &str) -> Result<()> {
    if (v.norm() - 1.0).abs() > TAU_UNIT || !v.x.is_finite() || !v.y.is_finite() {
        return Err(Error::Input(format!("{what} ({}, {}) is not unit", v.x, v.y)));
    }
    Ok(())
}

/// Unit director; a point of the covering circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Director(Vec2);

impl Director {
    pub fn new(v: Vec2) -> Result<Self> {
        check_unit(v, "director")?;
        Ok(Self(v))
    }

    pub fn from_angle(theta: f64) -> Self {
        Self(Vec2::from_angle(theta))
    }

    pub fn vec(self) -> Vec2 {
        self.0
    }
}

/// Q-tensor in q-coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QTensor(pub Vec2);

impl QTensor {
    pub fn vec(self) -> Vec2 {
        self.0
    }

    pub fn is_unit(self) -> bool {
        (self.0.norm() - 1.0).abs() <= TAU_UNIT
    }
}

/// Complex square of a 2-vector. No norm check.
#[inline]
pub fn square(v: Vec2) -> Vec2 {
    Vec2::new(v.x * v.x - v.y * v.y, 2.0 * v.x * v.y)
}

/// The covering map `v -> q`.
pub fn apply_cover(v: Director) -> QTensor {
    QTensor(square(v.0))
}

/// The deck involution `v -> -v`.
pub fn deck_transform(v: Director) -> Director {
    Director(-v.0)
}

/// Geodesic distance between two directions on the circle, in `[0, pi]`.
#[inline]
fn circle_dist(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).abs().atan2(a.dot(b))
}

/// Pairing on the covering circle: `1` iff equal, `-1` iff antipodal,
/// `0` once the covered points are at least `XI_DELTA0` apart.
#[inline]
pub fn xi(v1: Vec2, v2: Vec2) -> f64 {
    let bump = (1.0 - circle_dist(square(v1), square(v2)) / XI_DELTA0).max(0.0);
    // dist(v1, v2) <= dist(v1, -v2) iff v1 . v2 >= 0.
    if v1.dot(v2) >= 0.0 {
        bump
    } else {
        -bump
    }
}

pub fn pairing_xi(v1: Director, v2: Director) -> f64 {
    xi(v1.0, v2.0)
}

/// Half-angle root of a unit q with `v1 > 0`, or `v1 = 0` and `v2 > 0`. No norm check.
#[inline]
pub fn principal_root(q: Vec2) -> Vec2 {
    if q.x >= 0.0 {
        let a = (0.5 * (1.0 + q.x)).sqrt();
        Vec2::new(a, q.y / (2.0 * a))
    } else {
        let b = (0.5 * (1.0 - q.x)).sqrt();
        let b = if q.y < 0.0 { -b } else { b };
        Vec2::new(q.y / (2.0 * b) + 0.0, b)
    }
}

/// The two preimages of a unit q, principal root first.
pub fn directors_of_tensor(q: QTensor) -> Result<(Director, Director)> {
    check_unit(q.0, "q-tensor")?;
    let v = principal_root(q.0);
    Ok((Director(v), Director(-v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn d(x: f64, y: f64) -> Director {
        Director::new(Vec2::new(x, y)).unwrap()
    }

    #[test]
    fn cover_examples() {
        assert_eq!(apply_cover(d(1.0, 0.0)).vec(), Vec2::new(1.0, 0.0));
        assert_eq!(apply_cover(d(0.0, 1.0)).vec(), Vec2::new(-1.0, 0.0));
        let q = apply_cover(d(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).vec();
        assert!(q.x.abs() < 1e-15 && (q.y - 1.0).abs() < 1e-15);
        assert!(Director::new(Vec2::new(1.0, 0.1)).is_err());
    }

    #[test]
    fn deck_examples() {
        assert_eq!(deck_transform(d(1.0, 0.0)).vec(), Vec2::new(-1.0, 0.0));
    }

    #[test]
    fn xi_examples() {
        let v = Director::from_angle(0.7);
        assert_eq!(pairing_xi(v, v), 1.0);
        assert_eq!(pairing_xi(v, deck_transform(v)), -1.0);
        assert_eq!(pairing_xi(d(1.0, 0.0), d(0.0, 1.0)), 0.0);
    }

    #[test]
    fn roots_examples() {
        let (a, b) = directors_of_tensor(QTensor(Vec2::new(1.0, 0.0))).unwrap();
        assert_eq!((a.vec(), b.vec()), (Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)));
        let (a, b) = directors_of_tensor(QTensor(Vec2::new(-1.0, 0.0))).unwrap();
        assert_eq!((a.vec(), b.vec()), (Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0)));
        assert!(directors_of_tensor(QTensor(Vec2::new(0.5, 0.0))).is_err());
    }

    #[test]
    fn angle_doubling_along_a_path() {
        let step = 1e-4;
        for k in 0..1000 {
            let t = k as f64 * 2.0 * PI / 1000.0;
            let a = apply_cover(Director::from_angle(t)).vec();
            let b = apply_cover(Director::from_angle(t + step)).vec();
            assert!((circle_dist(a, b) - 2.0 * step).abs() < 10.0 * step * step);
        }
    }

    proptest! {
        #[test]
        fn deck_is_an_involution_over_the_cover(t in -10.0..10.0f64) {
            let v = Director::from_angle(t);
            prop_assert_eq!(deck_transform(deck_transform(v)), v);
            prop_assert_eq!(apply_cover(deck_transform(v)), apply_cover(v));
        }

        #[test]
        fn xi_symmetry_and_deck_invariance(s in -10.0..10.0f64, t in -10.0..10.0f64) {
            let (a, b) = (Director::from_angle(s), Director::from_angle(t));
            let x = pairing_xi(a, b);
            prop_assert!((-1.0..=1.0).contains(&x));
            prop_assert_eq!(x, pairing_xi(b, a));
            prop_assert_eq!(x, pairing_xi(deck_transform(a), deck_transform(b)));
            if a.vec().dot(b.vec()) != 0.0 {
                prop_assert_eq!(-x, pairing_xi(a, deck_transform(b)));
            }
        }

        #[test]
        fn two_preimages(t in -10.0..10.0f64) {
            let q = QTensor(Vec2::from_angle(t));
            let (a, b) = directors_of_tensor(q).unwrap();
            prop_assert_eq!(b.vec(), -a.vec());
            prop_assert!(a.vec().x > 0.0 || (a.vec().x == 0.0 && a.vec().y > 0.0));
            prop_assert!(apply_cover(a).vec().dist(q.vec()) < 1e-14);
            prop_assert!(apply_cover(b).vec().dist(q.vec()) < 1e-14);
        }
    }
}
