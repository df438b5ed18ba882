use super::params::{potential_f_eps, potential_grad, Params};
use super::state::State;
use crate::geom::Vec2;
use crate::lifting::GridField;
use serde::{Deserialize, Serialize};

/// Discrete free energy and its parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub total: f64,
    pub elastic_q: f64,
    pub elastic_m: f64,
    pub potential: f64,
}

/// Forward differences on mask edges and midpoint rule on mask nodes:
/// `sum_edges (|dq|^2 / 2 + eps |dM|^2 / 2) + h^2 / eps^2 sum_nodes f_eps`.
pub fn total_energy(state: &State, p: &Params) -> EnergyParts {
    let g = state.grid();
    let (q, m) = (&state.q.values, &state.m.values);
    let mut eq = 0.0;
    let mut em = 0.0;
    let mut pot = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            if !g.mask[k] {
                continue;
            }
            pot += potential_f_eps(q[k], m[k], p);
            for n in [k + 1, k + g.nx] {
                if n < g.len() && g.mask[n] {
                    eq += 0.5 * (q[n] - q[k]).norm2();
                    em += 0.5 * (m[n] - m[k]).norm2();
                }
            }
        }
    }
    let elastic_m = p.eps * em;
    let potential = pot * g.h * g.h / (p.eps * p.eps);
    EnergyParts {
        total: eq + elastic_m + potential,
        elastic_q: eq,
        elastic_m,
        potential,
    }
}

/// Euler-Lagrange residuals and their max norms over the mask.
#[derive(Clone, Debug)]
pub struct Residual {
    /// `-Lap q + eps^-2 df/dq`, zero on Dirichlet nodes.
    pub res_q: GridField,
    /// `-Lap M + eps^-3 df/dM` with natural (Neumann) boundary rows.
    pub res_m: GridField,
    pub max_q: f64,
    pub max_m: f64,
}

impl Residual {
    pub fn max(&self) -> f64 {
        self.max_q.max(self.max_m)
    }
}

/// Residuals of the discrete energy: `res_q = grad_q E / h^2` and
/// `res_m = grad_M E / (eps h^2)`.
pub fn el_residual(state: &State, p: &Params) -> Residual {
    let g = state.grid();
    let (q, m) = (&state.q.values, &state.m.values);
    let zero = Vec2::new(0.0, 0.0);
    let mut rq = vec![zero; g.len()];
    let mut rm = vec![zero; g.len()];
    let inv_h2 = 1.0 / (g.h * g.h);
    let inv_e2 = 1.0 / (p.eps * p.eps);
    let (mut max_q, mut max_m) = (0.0f64, 0.0f64);
    for k in 0..g.len() {
        if !g.mask[k] {
            continue;
        }
        let mut lq = zero;
        let mut lm = zero;
        for n in g.neighbours(k) {
            lq = lq + (q[k] - q[n]);
            lm = lm + (m[k] - m[n]);
        }
        let (gq, gm) = potential_grad(q[k], m[k], p);
        if !state.fixed[k] {
            rq[k] = lq * inv_h2 + gq * inv_e2;
            max_q = max_q.max(rq[k].norm());
        }
        rm[k] = lm * inv_h2 + gm * (inv_e2 / p.eps);
        max_m = max_m.max(rm[k].norm());
    }
    Residual {
        res_q: GridField {
            grid: g.clone(),
            values: rq,
        },
        res_m: GridField {
            grid: g.clone(),
            values: rm,
        },
        max_q,
        max_m,
    }
}
