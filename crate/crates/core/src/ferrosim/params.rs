use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Model constants for one `(eps, beta)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub eps: f64,
    pub beta: f64,
    /// Additive constant making the minimum of the potential zero.
    pub kappa: f64,
    /// Norm of `M` at the potential minimum.
    pub lambda: f64,
    /// Norm of `q` at the potential minimum.
    pub s: f64,
}

impl Params {
    pub fn new(eps: f64, beta: f64) -> Result<Self> {
        kappa_eps(eps, beta)
    }
}

/// Un-shifted potential restricted to aligned pairs `|q| = s`, `|M| = lambda`.
fn aligned_potential(eps: f64, beta: f64, s: f64, lambda2: f64) -> f64 {
    0.25 * (1.0 - s * s).powi(2) + 0.25 * eps * (1.0 - lambda2).powi(2) - eps * beta * s * lambda2 / SQRT_2
}

/// Normalization constant and minimizing norms of the potential.
///
/// For fixed norms `QM . M` is largest when `q` is aligned with the square of
/// `M`, giving `s lambda^2 / sqrt 2`. Stationarity in `lambda^2` gives
/// `lambda^2 = 1 + sqrt2 beta s`, and `s` solves
/// `s^3 - (1 + eps beta^2) s - eps beta / sqrt2 = 0`, taken as the largest root (the branch through `s = 1` as `eps -> 0`).
pub fn kappa_eps(eps: f64, beta: f64) -> Result<Params> {
    if !(eps > 0.0) || !(beta >= 0.0) || !eps.is_finite() || !beta.is_finite() {
        return Err(Error::Input(format!("need eps > 0 and beta >= 0, got eps={eps}, beta={beta}")));
    }
    let c1 = 1.0 + eps * beta * beta;
    let c0 = eps * beta / SQRT_2;
    // f(s0) > 0 and f is convex for s > 0, so Newton descends monotonically to the largest root.
    let mut s: f64 = 1.0 + c1.sqrt() + c0;
    for _ in 0..200 {
        let f = s * s * s - c1 * s - c0;
        let df = 3.0 * s * s - c1;
        let step = f / df;
        s -= step;
        if step.abs() <= 1e-16 * s.abs() {
            break;
        }
    }
    // The largest root is the minimizer; it exceeds the local-max critical point sqrt(c1 / 3).
    if !s.is_finite() || s <= (c1 / 3.0).sqrt() {
        return Err(Error::Numeric(format!(
            "no interior minimum of the potential for eps={eps}, beta={beta}"
        )));
    }
    let lambda2 = 1.0 + SQRT_2 * beta * s;
    let kappa = -aligned_potential(eps, beta, s, lambda2);
    Ok(Params {
        eps,
        beta,
        kappa,
        lambda: lambda2.sqrt(),
        s,
    })
}

/// `QM . M` for the q-vector of `Q`.
#[inline]
pub fn qmm(q: Vec2, m: Vec2) -> f64 {
    (q.x * (m.x * m.x - m.y * m.y) + 2.0 * q.y * m.x * m.y) / SQRT_2
}

/// Potential density `f_eps(q, M)`.
#[inline]
pub fn potential_f_eps(q: Vec2, m: Vec2, p: &Params) -> f64 {
    0.25 * (1.0 - q.norm2()).powi(2) + 0.25 * p.eps * (1.0 - m.norm2()).powi(2) - p.eps * p.beta * qmm(q, m) + p.kappa
}

/// Partial gradients `(df/dq, df/dM)`.
#[inline]
pub fn potential_grad(q: Vec2, m: Vec2, p: &Params) -> (Vec2, Vec2) {
    let eb = p.eps * p.beta / SQRT_2;
    let gq = q * (q.norm2() - 1.0) - Vec2::new(m.x * m.x - m.y * m.y, 2.0 * m.x * m.y) * eb;
    let qm = Vec2::new(q.x * m.x + q.y * m.y, q.y * m.x - q.x * m.y);
    let gm = m * (p.eps * (m.norm2() - 1.0)) - qm * (2.0 * eb);
    (gq, gm)
}

/// Minimizing pair with `M` along `dir`: `M = lambda dir`, `q = s dir^2`.
pub fn potential_minimizer(p: &Params, dir: Vec2) -> (Vec2, Vec2) {
    let d = dir.normalized();
    (crate::cover::square(d) * p.s, d * p.lambda)
}

/// Leading coefficient `kappa_*` of `s_eps - 1 ~ kappa_* eps`, fitted from
/// three values of `eps` by Richardson extrapolation of `(s - 1) / eps`.
pub fn kappa_star(beta: f64) -> Result<f64> {
    let e = [4e-3, 2e-3, 1e-3];
    let r: Vec<f64> = e
        .iter()
        .map(|&x| kappa_eps(x, beta).map(|p| (p.s - 1.0) / x))
        .collect::<Result<_>>()?;
    // Quadratic extrapolation to eps = 0 on the halving sequence.
    let r1 = 2.0 * r[1] - r[0];
    let r2 = 2.0 * r[2] - r[1];
    Ok((4.0 * r2 - r1) / 3.0)
}
