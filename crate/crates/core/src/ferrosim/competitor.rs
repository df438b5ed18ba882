use super::energy::{total_energy, EnergyParts};
use super::params::Params;
use super::state::{Problem, State};
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::lifting::{construct_lifting, GridField};
use crate::renorm::{core_energy, HarmonicSolver, VortexConfig, RADIAL_CELLS};
use serde::Serialize;
use std::f64::consts::SQRT_2;

/// Recovery-sequence state and its energy.
#[derive(Clone, Debug, Serialize)]
pub struct Competitor {
    #[serde(skip)]
    pub state: State,
    pub energy: EnergyParts,
    /// `energy.total - 2 pi |d| |log eps|`.
    pub excess: f64,
}

/// Builds `(q, M)` from the canonical harmonic map of `points` and a wall along `connection`.
///
/// `|q| = (s + (1 - s) e^{-dist_bd / eps}) prod_j f(|x - a_j|)` with `f` the
/// radial core profile, and `M = lambda tanh(lambda dist_L / (sqrt2 eps)) v`,
/// where `v` is the director lifted with jumps on the connection and `dist_L`
/// the distance to it. The tanh is the optimal one-dimensional wall profile.
pub fn recovery_competitor(
    problem: &Problem,
    n: usize,
    points: &[Vec2],
    connection: &Connection,
    p: &Params,
) -> Result<Competitor> {
    let d = problem
        .degree()
        .ok_or_else(|| Error::Input("the competitor needs an even q-winding".into()))?;
    if points.len() != 2 * d.unsigned_abs() as usize {
        return Err(Error::Input(format!(
            "degree {d} needs {} points, got {}",
            2 * d.unsigned_abs(),
            points.len()
        )));
    }
    if p.eps >= 0.5 {
        return Err(Error::Input(format!("eps must be below 1/2, got {}", p.eps)));
    }
    let solver = HarmonicSolver::new(problem, n)?;
    let config = VortexConfig::new(points.to_vec(), if d < 0 { -1 } else { 1 })?;
    let map = solver.solve(&config)?;
    let g = &solver.grid;
    // A vortex on a lattice node leaves q* = 0 there, which hides its winding
    // from the plaquettes. Borrowing a neighbour's value moves it into a cell.
    let mut lift_src = map.q.clone();
    for k in 0..g.len() {
        if g.mask[k] && lift_src.values[k].norm2() == 0.0 {
            if let Some(nb) = g.neighbours(k).find(|&nb| map.q.values[nb].norm2() > 0.0) {
                lift_src.values[k] = map.q.values[nb];
            }
        }
    }
    let lifting = construct_lifting(&lift_src, connection)?;
    let profile = if points.is_empty() { Vec::new() } else { core_energy(p.eps)?.profile };
    let radial = |r: f64| {
        let t = (r * RADIAL_CELLS as f64).min(RADIAL_CELLS as f64);
        let i = (t.floor() as usize).min(RADIAL_CELLS - 1);
        let w = t - i as f64;
        profile[i] * (1.0 - w) + profile[i + 1] * w
    };
    let wall_dist = |x: Vec2| {
        connection
            .segments
            .iter()
            .map(|s| s.segment.distance_to(x))
            .fold(f64::INFINITY, f64::min)
    };
    let mut q = map.q.clone();
    let mut m = GridField::constant(g, Vec2::new(0.0, 0.0));
    for k in 0..g.len() {
        if !g.mask[k] {
            continue;
        }
        let x = g.node_pos(k);
        let bd = problem.domain.boundary_distance(x);
        let core: f64 = points.iter().map(|&a| radial(x.dist(a))).product();
        let modulus = (p.s + (1.0 - p.s) * (-bd / p.eps).exp()) * core;
        q.values[k] = map.q.values[k] * modulus;
        let amp = p.lambda * (p.lambda * wall_dist(x) / (SQRT_2 * p.eps)).tanh();
        m.values[k] = lifting.directors.values[k] * amp;
    }
    let state = State::new(q, m, &problem.datum(g))?;
    let energy = total_energy(&state, p);
    let excess = energy.total - std::f64::consts::TAU * d.abs() as f64 * p.eps.ln().abs();
    Ok(Competitor { state, energy, excess })
}
