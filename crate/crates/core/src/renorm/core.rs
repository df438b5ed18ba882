use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2, TAU};

/// Radial cells on `[0, 1]`.
pub const RADIAL_CELLS: usize = 8000;

/// Minimizing radial profile of the degree-one vortex in the unit disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreProfile {
    pub eps: f64,
    /// `int_{B_1} 1/2 |grad u|^2 + (1 - |u|^2)^2 / (4 eps^2)` at `u = f(r) e^{i theta}`.
    pub gamma: f64,
    /// `f` at `r_i = i / RADIAL_CELLS`, with `f(0) = 0` and `f(1) = 1`.
    pub profile: Vec<f64>,
    pub newton_steps: usize,
}

fn energy(f: &[f64], eps: f64) -> f64 {
    let n = f.len() - 1;
    let dr = 1.0 / n as f64;
    let mut e = 0.0;
    for i in 0..n {
        let rm = (i as f64 + 0.5) * dr;
        e += 0.5 * ((f[i + 1] - f[i]) / dr).powi(2) * rm * dr;
    }
    for (i, &fi) in f.iter().enumerate().take(n).skip(1) {
        let r = i as f64 * dr;
        e += (0.5 * fi * fi / r + 0.25 * (fi * fi - 1.0).powi(2) / (eps * eps) * r) * dr;
    }
    // Trapezoid end weight at r = 1, where f = 1.
    e += 0.25 * dr;
    TAU * e
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = off[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let den = diag[i] - off[i - 1] * c[i - 1];
        c[i] = if i < m - 1 { off[i] / den } else { 0.0 };
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// `gamma(eps)` by modified Newton (Hessian with `max(3 f^2 - 1, 0)`) and backtracking.
pub fn core_energy(eps: f64) -> Result<CoreProfile> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Input(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let n = RADIAL_CELLS;
    let dr = 1.0 / n as f64;
    let w = 1.0 / (SQRT_2 * eps);
    let mut f: Vec<f64> = (0..=n).map(|i| (i as f64 * dr * w).tanh() / w.tanh()).collect();
    let mut e = energy(&f, eps);
    let inv_e2 = 1.0 / (eps * eps);
    for step in 0..200 {
        let m = n - 1;
        let mut grad = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m];
        for i in 1..n {
            let r = i as f64 * dr;
            let (rm, rp) = (r - 0.5 * dr, r + 0.5 * dr);
            let fi = f[i];
            grad[i - 1] = (rm * (fi - f[i - 1]) - rp * (f[i + 1] - fi)) / dr + (fi / r + inv_e2 * (fi * fi - 1.0) * fi * r) * dr;
            diag[i - 1] = (rm + rp) / dr + (1.0 / r + inv_e2 * (3.0 * fi * fi - 1.0).max(0.0) * r) * dr;
            off[i - 1] = -rp / dr;
        }
        let dx = solve_tridiagonal(&diag, &off, &grad);
        let size = dx.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if size < 1e-13 {
            return Ok(CoreProfile {
                eps,
                gamma: e,
                profile: f,
                newton_steps: step,
            });
        }
        let mut t = 1.0;
        loop {
            let mut trial = f.clone();
            for i in 1..n {
                trial[i] -= t * dx[i - 1];
            }
            let et = energy(&trial, eps);
            if et <= e {
                let stalled = e - et <= 4.0 * f64::EPSILON * e;
                f = trial;
                e = et;
                if stalled {
                    // No decrease above rounding: stationary.
                    return Ok(CoreProfile {
                        eps,
                        gamma: e,
                        profile: f,
                        newton_steps: step + 1,
                    });
                }
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                // Energy flat to rounding: the profile is converged.
                return Ok(CoreProfile {
                    eps,
                    gamma: e,
                    profile: f,
                    newton_steps: step,
                });
            }
        }
    }
    Err(Error::Numeric(format!("radial core solve did not converge for eps={eps}")))
}

/// `gamma(eps) - pi |log eps|` on a halving sequence and its extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreLimit {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    /// `|v1 - v0| / |v2 - v1|`.
    pub ratio: f64,
    /// Aitken extrapolation of the three values.
    pub gamma_star: f64,
}

pub const CORE_EPS: [f64; 3] = [0.1, 0.05, 0.025];

pub fn core_energy_limit() -> Result<CoreLimit> {
    let values: Vec<f64> = CORE_EPS
        .iter()
        .map(|&e| core_energy(e).map(|c| c.gamma - PI * e.ln().abs()))
        .collect::<Result<_>>()?;
    let (d1, d2) = (values[1] - values[0], values[2] - values[1]);
    let den = d2 - d1;
    let gamma_star = if den.abs() > 1e-15 { values[2] - d2 * d2 / den } else { values[2] };
    Ok(CoreLimit {
        eps: CORE_EPS.to_vec(),
        ratio: d1.abs() / d2.abs(),
        values,
        gamma_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_matches_a_dense_product() {
        let diag = [4.0, 5.0, 6.0, 3.0];
        let off = [1.0, -2.0, 0.5, 0.0];
        let x = [1.0, -1.0, 2.0, 0.5];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i] + if i > 0 { off[i - 1] * x[i - 1] } else { 0.0 } + if i < 3 { off[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let y = solve_tridiagonal(&diag, &off, &rhs);
        for i in 0..4 {
            assert!((y[i] - x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn profile_is_monotone_and_bounded() {
        let c = core_energy(0.05).unwrap();
        assert_eq!(c.profile[0], 0.0);
        assert_eq!(*c.profile.last().unwrap(), 1.0);
        for w in c.profile.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(c.profile.iter().all(|&f| (0.0..=1.0).contains(&f)));
    }

    /// `gamma(eps)` from an independent collocation BVP solve with
    /// `u'(r0) r0 = u(r0)` at `r0 = 1e-4` and tolerance `1e-7`.
    const COLLOCATION: [(f64, f64); 3] = [
        (0.1, 8.439589405495601),
        (0.05, 10.61006254760751),
        (0.025, 12.786041396556747),
    ];

    #[test]
    fn matches_the_collocation_values() {
        for (eps, gamma) in COLLOCATION {
            let c = core_energy(eps).unwrap();
            assert!((c.gamma - gamma).abs() < 1e-5, "eps={eps}: {} vs {gamma}", c.gamma);
        }
    }

    #[test]
    fn limit_sequence_is_cauchy_and_positive() {
        let l = core_energy_limit().unwrap();
        assert!(l.ratio >= 2.0, "{l:?}");
        assert!(l.gamma_star > 0.0);
        assert!((l.gamma_star - 1.1966).abs() < 1e-3, "{l:?}");
    }

    #[test]
    fn rejects_eps_outside_the_range() {
        assert!(core_energy(0.0).is_err());
        assert!(core_energy(0.5).is_err());
    }
}
