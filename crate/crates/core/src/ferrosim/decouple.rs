use super::params::{kappa_star, potential_f_eps, Params};
use super::state::State;
use crate::cover::{directors_of_tensor, QTensor};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::lifting::{is_jump, EdgeSet, GridField};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::SQRT_2;

/// Ginzburg-Landau part of the decoupled density, with the `kappa_*` shift.
#[inline]
pub fn g_eps(qnorm: f64, eps: f64, kstar: f64) -> f64 {
    0.25 * (qnorm * qnorm - 1.0).powi(2) / (eps * eps) - 2.0 * kstar / eps * (qnorm - 1.0) + kstar * kstar
}

/// Allen-Cahn well for the frame coordinates `u` of `M`.
#[inline]
pub fn h_u(u: Vec2, beta: f64) -> f64 {
    0.25 * (u.norm2() - 1.0).powi(2) - beta / SQRT_2 * (u.x * u.x - u.y * u.y) + 0.5 * (beta * beta + SQRT_2 * beta)
}

/// The two wells `(+-sqrt(sqrt2 beta + 1), 0)` of `h_u`.
pub fn wells(beta: f64) -> (Vec2, Vec2) {
    let a = (SQRT_2 * beta + 1.0).sqrt();
    (Vec2::new(-a, 0.0), Vec2::new(a, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallCost {
    pub closed_form: f64,
    pub quadrature: f64,
    pub error_estimate: f64,
}

/// `c_beta = (2 sqrt2 / 3)(sqrt2 beta + 1)^(3/2)` and the double-exponential
/// quadrature of `int sqrt(2 h(t, 0)) dt` between the wells.
pub fn wall_transition_cost(beta: f64) -> Result<WallCost> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Input(format!("beta must be >= 0, got {beta}")));
    }
    let a = (SQRT_2 * beta + 1.0).sqrt();
    let closed_form = 2.0 * SQRT_2 / 3.0 * a.powi(3);
    let out = quadrature::integrate(|t| (2.0 * h_u(Vec2::new(t, 0.0), beta)).max(0.0).sqrt(), -a, a, 1e-13);
    Ok(WallCost {
        closed_form,
        quadrature: out.integral,
        error_estimate: out.error_estimate,
    })
}

/// Frame coordinates of `M` and both sides of the energy decoupling.
#[derive(Clone, Debug)]
pub struct Decoupled {
    /// `(M . n, M . m)` with the frame continued along a spanning tree; zero off the region.
    pub u: GridField,
    pub region: Vec<bool>,
    /// Region edges across which the tree frame flips.
    pub frame_cuts: EdgeSet,
    pub kappa_star: f64,
    /// `F` restricted to the region.
    pub energy: f64,
    /// `int |grad Q|^2 / 2 + g_eps(Q)`.
    pub q_term: f64,
    /// `int eps |grad u|^2 / 2 + h(u) / eps`.
    pub u_term: f64,
    pub remainder: f64,
}

/// Evaluates both sides of the decoupling on `region` (default: nodes with `|q| >= 1/2`).
pub fn decoupled_energy(state: &State, p: &Params, region: Option<&[bool]>) -> Result<Decoupled> {
    let g = state.grid();
    let q = &state.q.values;
    let m = &state.m.values;
    let region: Vec<bool> = match region {
        Some(r) => {
            if let Some(k) = (0..g.len()).find(|&k| r[k] && g.mask[k] && q[k].norm() < 0.5) {
                return Err(Error::Input(format!("|q| = {:.3} < 1/2 at node {k} of the region", q[k].norm())));
            }
            (0..g.len()).map(|k| r[k] && g.mask[k]).collect()
        }
        None => (0..g.len()).map(|k| g.mask[k] && q[k].norm() >= 0.5).collect(),
    };
    let root = |k: usize| directors_of_tensor(QTensor(q[k].normalized())).map(|(n, _)| n.vec());
    // Spanning-forest continuation of the eigenframe.
    let mut n = vec![Vec2::new(0.0, 0.0); g.len()];
    let mut seen = vec![false; g.len()];
    for r0 in 0..g.len() {
        if !region[r0] || seen[r0] {
            continue;
        }
        seen[r0] = true;
        n[r0] = root(r0)?;
        let mut queue = VecDeque::from([r0]);
        while let Some(a) = queue.pop_front() {
            for b in g.neighbours(a) {
                if region[b] && !seen[b] {
                    seen[b] = true;
                    let v = root(b)?;
                    n[b] = if is_jump(n[a], v) { -v } else { v };
                    queue.push_back(b);
                }
            }
        }
    }
    let u: Vec<Vec2> = (0..g.len())
        .map(|k| {
            if region[k] {
                Vec2::new(m[k].dot(n[k]), m[k].dot(n[k].perp()))
            } else {
                Vec2::new(0.0, 0.0)
            }
        })
        .collect();
    let kstar = kappa_star(p.beta)?;
    let h2 = g.h * g.h;
    let mut frame_cuts = EdgeSet::empty(g);
    let (mut energy, mut q_term, mut u_term) = (0.0, 0.0, 0.0);
    for e in g.mask_edges() {
        let (a, b) = g.edge_nodes(e);
        if !(region[a] && region[b]) {
            continue;
        }
        let flip = is_jump(n[a], n[b]);
        if flip {
            frame_cuts.insert(g, e);
        }
        let ub = if flip { -u[b] } else { u[b] };
        let dq = (q[b] - q[a]).norm2();
        energy += 0.5 * dq + 0.5 * p.eps * (m[b] - m[a]).norm2();
        q_term += 0.5 * dq;
        u_term += 0.5 * p.eps * (ub - u[a]).norm2();
    }
    for k in 0..g.len() {
        if region[k] {
            energy += h2 * potential_f_eps(q[k], m[k], p) / (p.eps * p.eps);
            q_term += h2 * g_eps(q[k].norm(), p.eps, kstar);
            u_term += h2 * h_u(u[k], p.beta) / p.eps;
        }
    }
    Ok(Decoupled {
        u: GridField {
            grid: g.clone(),
            values: u,
        },
        region,
        frame_cuts,
        kappa_star: kstar,
        energy,
        q_term,
        u_term,
        remainder: energy - q_term - u_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wells_are_zeros_of_h() {
        for beta in [0.0, 0.5, 1.0, 3.0] {
            let (a, b) = wells(beta);
            assert!(h_u(a, beta).abs() < 1e-14 && h_u(b, beta).abs() < 1e-14);
        }
    }

    #[test]
    fn g_at_unit_norm_is_kappa_star_squared() {
        assert_eq!(g_eps(1.0, 0.05, 0.8), 0.8 * 0.8);
    }

    #[test]
    fn wall_cost_examples() {
        let c = wall_transition_cost(0.0).unwrap();
        assert!((c.closed_form - 0.9428090).abs() < 1e-7);
        assert!((c.quadrature - c.closed_form).abs() < 1e-8);
        let c = wall_transition_cost(1.0).unwrap();
        assert!((c.closed_form - 2.0 * SQRT_2 / 3.0 * (SQRT_2 + 1.0).powf(1.5)).abs() < 1e-14);
        assert!(wall_transition_cost(-1.0).is_err());
    }

    #[test]
    fn h_is_nonnegative_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let beta = rng.gen_range(0.0..5.0);
            let u = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            assert!(h_u(u, beta) >= -1e-12);
        }
    }
}
