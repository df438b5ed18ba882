use super::harmonic::{HarmonicMap, VortexConfig};
use crate::error::{Error, Result};
use crate::ferrosim::Problem;
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Renormalized energy and the bracket values it was extrapolated from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WReport {
    pub w: f64,
    /// Max minus min of the brackets over the window.
    pub spread: f64,
    pub sigmas: Vec<f64>,
    /// `1/2 int_{Omega minus balls} |grad q*|^2 - pi n |log sigma|` at each
    /// radius, plus the leading ball term `pi sigma^2 / 2 sum_j |v_j|^2`.
    pub brackets: Vec<f64>,
    /// Discrete Dirichlet energy of the harmonic correction `H`.
    pub h_energy: f64,
}

const CIRCLE_NODES: usize = 256;
const BOUNDARY_TOL: f64 = 1e-11;

/// Radii `{1/4, 1/2, 1} sigma_max` with `sigma_max = min(32h, d_pair / 4, 0.8 d_boundary)`,
/// feasible when `sigma_max >= 2h`.
pub fn sigma_window(problem: &Problem, config: &VortexConfig, h: f64) -> Result<[f64; 3]> {
    let top = (32.0 * h)
        .min(0.25 * config.min_pair_distance())
        .min(0.8 * config.min_boundary_distance(&problem.domain));
    if top < 2.0 * h {
        return Err(Error::Input(format!(
            "sigma window infeasible: largest radius {top:.4} below 2h = {:.4}",
            2.0 * h
        )));
    }
    Ok([0.25 * top, 0.5 * top, top])
}

/// Evaluates `1/2 int_{Omega_sigma} |grad q*|^2 - pi n |log sigma|` on a window
/// of radii and extrapolates to `sigma = 0`.
///
/// Near `a_j` the phase gradient is the vortex part plus a smooth field with
/// value `v_j` at `a_j`, so the bracket equals `W - pi sigma^2 / 2 sum_j |v_j|^2`
/// up to `O(sigma^4)`. That term is added back and the remainder is fitted
/// linearly in `sigma^4`.
///
/// With `q* = e^{i(theta + H)}`, `grad theta` is the rotated gradient of
/// `psi = sign sum log|x - a_j|`. The singular part `|grad psi|^2` and the
/// cross term `grad theta . grad H` are reduced by Green's identities to
/// integrals over the boundary polygon and the circles `|x - a_j| = sigma`;
/// the smooth part `|grad H|^2` is the discrete Dirichlet energy of `H` minus
/// its share inside the balls.
pub fn renormalized_energy(problem: &Problem, map: &HarmonicMap) -> Result<WReport> {
    let g = &map.q.grid;
    let cfg = &map.config;
    let sigmas = sigma_window(problem, cfg, g.h)?;
    let dom = &problem.domain;
    let mut bd_psi = 0.0;
    let mut bd_cross = 0.0;
    let mut arc0 = 0.0;
    for i in 0..dom.len() {
        let e = dom.edge(i);
        let len = e.length();
        let t = (e.q - e.p) / len;
        let nu = Vec2::new(t.y, -t.x);
        let at = |u: f64| e.p + t * u;
        bd_psi += quadrature::integrate(
            |u| {
                let x = at(u);
                0.5 * cfg.psi(x) * cfg.grad_psi(x).dot(nu)
            },
            0.0,
            len,
            BOUNDARY_TOL,
        )
        .integral;
        bd_cross += quadrature::integrate(
            |u| {
                let x = at(u);
                map.phase.value(problem, cfg, arc0 + u, x) * cfg.grad_psi(x).perp().dot(nu)
            },
            0.0,
            len,
            BOUNDARY_TOL,
        )
        .integral;
        arc0 += len;
    }
    let mut h_energy = 0.0;
    for e in g.mask_edges() {
        let (a, b) = g.edge_nodes(e);
        h_energy += 0.5 * (map.h[b] - map.h[a]).powi(2);
    }
    let n = cfg.points.len() as f64;
    let grad_h: Vec<Vec2> = cfg.points.iter().map(|&a| map.grad_h(a)).collect();
    let smooth: f64 = cfg
        .points
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let mut gp = Vec2::new(0.0, 0.0);
            for (i, &b) in cfg.points.iter().enumerate() {
                if i != j {
                    gp = gp + (a - b) / (a - b).norm2();
                }
            }
            (gp.perp() * cfg.sign as f64 + grad_h[j]).norm2()
        })
        .sum();
    let brackets: Vec<f64> = sigmas
        .iter()
        .map(|&sigma| {
            let mut circ = 0.0;
            for (j, &a) in cfg.points.iter().enumerate() {
                let mut acc = 0.0;
                for k in 0..CIRCLE_NODES {
                    let e = Vec2::from_angle(TAU * k as f64 / CIRCLE_NODES as f64);
                    let x = a + e * sigma;
                    let gp = cfg.grad_psi(x);
                    acc += 0.5 * cfg.psi(x) * gp.dot(e) + map.h_at(x) * gp.perp().dot(e);
                }
                circ -= acc * sigma * TAU / CIRCLE_NODES as f64;
                circ -= 0.5 * PI * sigma * sigma * grad_h[j].norm2();
            }
            bd_psi + bd_cross + h_energy + circ - n * PI * sigma.ln().abs() + 0.5 * PI * sigma * sigma * smooth
        })
        .collect();
    let sq: Vec<f64> = sigmas.iter().map(|s| s.powi(4)).collect();
    let w = linear_intercept(&sq, &brackets);
    let (lo, hi) = brackets
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &b| (l.min(b), h.max(b)));
    Ok(WReport {
        w,
        spread: hi - lo,
        sigmas: sigmas.to_vec(),
        brackets,
        h_energy,
    })
}

/// Least-squares line through `(x, y)` evaluated at `x = 0`.
fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    my - sxy / sxx * mx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::unit_disk;
    use crate::renorm::canonical_harmonic_map;

    /// Closed form for degree-one vortices in the unit disk with datum `e^{2 i theta}`.
    fn disk_pair_oracle(r: f64) -> f64 {
        -TAU * (2.0 * r).ln() - TAU * (1.0 - r.powi(4)).ln()
    }

    fn pair(r: f64, angle: f64) -> VortexConfig {
        let e = Vec2::from_angle(angle);
        VortexConfig::new(vec![e * r, e * (-r)], 1).unwrap()
    }

    #[test]
    fn intercept_of_a_line() {
        assert!((linear_intercept(&[1.0, 2.0, 4.0], &[3.0, 5.0, 9.0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_centered_vortex_has_zero_energy() {
        let pb = Problem::with_q_winding(unit_disk(), 1, 0.0);
        let cfg = VortexConfig::new(vec![Vec2::new(0.0, 0.0)], 1).unwrap();
        let m = canonical_harmonic_map(&pb, 64, &cfg).unwrap();
        let w = renormalized_energy(&pb, &m).unwrap();
        assert!(w.w.abs() < 1e-3, "{w:?}");
    }

    #[test]
    fn disk_pair_matches_the_closed_form() {
        let pb = Problem::new(unit_disk(), 1, 0.0);
        for r in [0.2, 0.3, 0.5, 0.7] {
            let m = canonical_harmonic_map(&pb, 128, &pair(r, 0.0)).unwrap();
            let w = renormalized_energy(&pb, &m).unwrap();
            let exact = disk_pair_oracle(r);
            assert!((w.w - exact).abs() < 0.02 * exact.abs().max(1.0), "r={r}: {} vs {exact}", w.w);
        }
        let m = canonical_harmonic_map(&pb, 128, &pair(0.3, 0.0)).unwrap();
        let w = renormalized_energy(&pb, &m).unwrap();
        assert!(w.spread < 0.02 * w.w.abs(), "{w:?}");
    }

    #[test]
    fn infeasible_window_is_an_error() {
        let pb = Problem::new(unit_disk(), 1, 0.0);
        let cfg = pair(0.3, 0.0);
        assert!(sigma_window(&pb, &cfg, 0.1).is_err());
        assert!(sigma_window(&pb, &cfg, 1.0 / 64.0).is_ok());
    }
}
