use crate::error::{Error, Result};
use crate::ferrosim::Problem;
use crate::geom::{Containment, Domain, Vec2};
use crate::lifting::{Grid, GridField};
use crate::linalg::Stencil;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Vortex points, all of q-degree `sign`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexConfig {
    pub points: Vec<Vec2>,
    pub sign: i32,
}

impl VortexConfig {
    pub fn new(points: Vec<Vec2>, sign: i32) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Input(format!("degree sign must be +-1, got {sign}")));
        }
        Ok(Self { points, sign })
    }

    pub fn min_pair_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                m = m.min(self.points[i].dist(self.points[j]));
            }
        }
        m
    }

    pub fn min_boundary_distance(&self, domain: &Domain) -> f64 {
        self.points
            .iter()
            .map(|&a| domain.boundary_distance(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Interior, pairwise farther than `4h`, and farther than `4h` from the boundary.
    pub fn check(&self, domain: &Domain, h: f64) -> Result<()> {
        for (i, &a) in self.points.iter().enumerate() {
            if domain.contains(a) != Containment::Inside {
                return Err(Error::Input(format!("point {i} at ({}, {}) is not interior", a.x, a.y)));
            }
        }
        let dp = self.min_pair_distance();
        if dp <= 4.0 * h {
            return Err(Error::Input(format!("points {dp:.4} apart, need more than 4h = {:.4}", 4.0 * h)));
        }
        let db = self.min_boundary_distance(domain);
        if db <= 4.0 * h {
            return Err(Error::Input(format!(
                "a point is {db:.4} from the boundary, need more than 4h = {:.4}",
                4.0 * h
            )));
        }
        Ok(())
    }

    /// `sign * sum_j arg(x - a_j)`, principal branches.
    pub fn theta(&self, x: Vec2) -> f64 {
        self.sign as f64 * self.points.iter().map(|&a| (x - a).angle()).sum::<f64>()
    }

    /// `prod_j ((x - a_j) / |x - a_j|)^sign`; zero on a point.
    pub fn factor(&self, x: Vec2) -> Vec2 {
        if self.points.iter().any(|&a| a == x) {
            return Vec2::new(0.0, 0.0);
        }
        Vec2::from_angle(self.theta(x))
    }

    /// `psi = sign * sum_j log |x - a_j|`; its rotated gradient is `grad theta`.
    pub fn psi(&self, x: Vec2) -> f64 {
        self.sign as f64 * self.points.iter().map(|&a| (x - a).norm().ln()).sum::<f64>()
    }

    pub fn grad_psi(&self, x: Vec2) -> Vec2 {
        let mut g = Vec2::new(0.0, 0.0);
        for &a in &self.points {
            let d = x - a;
            g = g + d / d.norm2();
        }
        g * self.sign as f64
    }
}

/// Continuous branch of `arg(q_bd) - theta` along the boundary polygon.
#[derive(Clone, Debug)]
pub struct BoundaryPhase {
    values: Vec<f64>,
    perimeter: f64,
}

const PHASE_SAMPLES: usize = 8192;

impl BoundaryPhase {
    pub fn new(problem: &Problem, config: &VortexConfig) -> Result<Self> {
        let d = &problem.domain;
        let per = d.perimeter();
        let raw = |s: f64| problem.q_angle(s) - config.theta(d.point_at(s));
        let mut values = Vec::with_capacity(PHASE_SAMPLES + 1);
        let mut prev = raw(0.0);
        for i in 0..=PHASE_SAMPLES {
            let s = per * i as f64 / PHASE_SAMPLES as f64;
            let v = raw(s);
            let v = v + TAU * ((prev - v) / TAU).round();
            values.push(v);
            prev = v;
        }
        let turn = values[PHASE_SAMPLES] - values[0];
        if turn.abs() > PI {
            let k = (turn / TAU).round() as i64;
            return Err(Error::Input(format!(
                "winding mismatch: boundary datum has q-winding {}, the configuration {}",
                problem.q_winding as i64,
                problem.q_winding as i64 - k
            )));
        }
        Ok(Self {
            values,
            perimeter: per,
        })
    }

    /// Interpolated reference phase at arc `s`.
    fn reference(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.perimeter);
        let t = s / self.perimeter * PHASE_SAMPLES as f64;
        let i = (t.floor() as usize).min(PHASE_SAMPLES - 1);
        let w = t - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// `arg(q_bd(s)) - theta(x)` on the branch of the reference, for `x` near the foot at `s`.
    pub fn value(&self, problem: &Problem, config: &VortexConfig, s: f64, x: Vec2) -> f64 {
        let raw = problem.q_angle(s) - config.theta(x);
        raw + TAU * ((self.reference(s) - raw) / TAU).round()
    }
}

/// Factored solver for the discrete harmonic phase on one grid.
#[derive(Clone, Debug)]
pub struct HarmonicSolver {
    pub problem: Problem,
    pub grid: Grid,
    /// Dirichlet nodes: masked nodes with an unmasked neighbour.
    pub fixed: Vec<bool>,
    arcs: Vec<f64>,
    datum: Vec<Vec2>,
    stencil: Stencil,
}

impl HarmonicSolver {
    pub fn new(problem: &Problem, n: usize) -> Result<Self> {
        let grid = problem.grid(n)?;
        let datum = problem.datum(&grid);
        let fixed = datum.fixed_mask(&grid);
        let mut arcs = vec![f64::NAN; grid.len()];
        let mut values = vec![Vec2::new(0.0, 0.0); grid.len()];
        for ((&k, &s), &v) in datum.nodes.iter().zip(&datum.arcs).zip(&datum.values) {
            arcs[k] = s;
            values[k] = v;
        }
        let unknown: Vec<bool> = (0..grid.len()).map(|k| grid.mask[k] && !fixed[k]).collect();
        let stencil = Stencil::new(&grid, &unknown, &fixed);
        Ok(Self {
            problem: problem.clone(),
            grid,
            fixed,
            arcs,
            datum: values,
            stencil,
        })
    }

    /// `q* = factor * e^{iH}` with `H` discrete harmonic. `H` on a Dirichlet
    /// node takes its value at the boundary foot, which keeps the phase error
    /// at `O(h |grad H|)`; `q*` itself equals the datum there.
    pub fn solve(&self, config: &VortexConfig) -> Result<HarmonicMap> {
        let g = &self.grid;
        config.check(&self.problem.domain, g.h)?;
        let q_winding = self.problem.q_winding as i64;
        let c_winding = config.sign as i64 * config.points.len() as i64;
        if q_winding != c_winding {
            return Err(Error::Input(format!(
                "winding mismatch: boundary datum has q-winding {q_winding}, the configuration {c_winding}"
            )));
        }
        let phase = BoundaryPhase::new(&self.problem, config)?;
        let mut h = vec![0.0; g.len()];
        for k in 0..g.len() {
            if self.fixed[k] {
                let s = self.arcs[k];
                h[k] = phase.value(&self.problem, config, s, self.problem.domain.point_at(s));
            }
        }
        let b = self.stencil.fixed_sum(&h);
        let mut x = vec![0.0; self.stencil.len()];
        let (iters, rel) = self.stencil.solve_shifted(0.0, &b, &mut x, 1e-12, 20 * g.nx.max(g.ny) + 200);
        if rel > 1e-9 {
            return Err(Error::Numeric(format!(
                "harmonic solve stalled at relative residual {rel:.3e} after {iters} iterations"
            )));
        }
        for (s, &k) in self.stencil.nodes.iter().enumerate() {
            h[k] = x[s];
        }
        let q = GridField::from_fn(g, |p| config.factor(p));
        let values = (0..g.len())
            .map(|k| match (g.mask[k], self.fixed[k]) {
                (true, true) => self.datum[k],
                (true, false) => rotate(q.values[k], h[k]),
                _ => q.values[k],
            })
            .collect();
        Ok(HarmonicMap {
            q: GridField {
                grid: g.clone(),
                values,
            },
            h,
            fixed: self.fixed.clone(),
            config: config.clone(),
            phase,
        })
    }
}

fn rotate(z: Vec2, a: f64) -> Vec2 {
    let (s, c) = a.sin_cos();
    Vec2::new(z.x * c - z.y * s, z.x * s + z.y * c)
}

/// Canonical harmonic map on one grid.
#[derive(Clone, Debug)]
pub struct HarmonicMap {
    pub q: GridField,
    /// Harmonic phase correction `H` at every node (zero off the mask).
    pub h: Vec<f64>,
    /// Dirichlet nodes, where `q*` equals the datum.
    pub fixed: Vec<bool>,
    pub config: VortexConfig,
    pub phase: BoundaryPhase,
}

impl HarmonicMap {
    /// Max over interior nodes at distance `> exclusion` from every point of
    /// `|sum_n q_k x q_n| / h^2`, the discrete divergence of `q1 grad q2 - q2 grad q1`.
    /// Stencils touching a Dirichlet node are skipped: the datum there is
    /// sampled at the boundary foot rather than at the node.
    pub fn divergence_residual(&self, exclusion: f64) -> f64 {
        let g = &self.q.grid;
        let q = &self.q.values;
        let mut worst = 0.0f64;
        for k in 0..g.len() {
            if !g.mask[k] || self.fixed[k] || g.neighbours(k).count() < 4 || g.neighbours(k).any(|n| self.fixed[n]) {
                continue;
            }
            let x = g.node_pos(k);
            if self.config.points.iter().any(|&a| a.dist(x) <= exclusion) {
                continue;
            }
            let mut acc = 0.0;
            for n in g.neighbours(k) {
                acc += q[k].cross(q[n]);
            }
            worst = worst.max(acc.abs() / (g.h * g.h));
        }
        worst
    }

    /// Bilinear interpolation of `H` over masked corners.
    pub fn h_at(&self, x: Vec2) -> f64 {
        bilinear(&self.q.grid, &self.h, x)
    }

    /// Gradient of `H` at `x` by central differences of the interpolant.
    pub fn grad_h(&self, x: Vec2) -> Vec2 {
        let d = 0.5 * self.q.grid.h;
        let ex = Vec2::new(d, 0.0);
        let ey = Vec2::new(0.0, d);
        Vec2::new(
            (self.h_at(x + ex) - self.h_at(x - ex)) / (2.0 * d),
            (self.h_at(x + ey) - self.h_at(x - ey)) / (2.0 * d),
        )
    }
}

/// Canonical harmonic map of `config` for the datum of `problem` on an `n`-cell grid.
pub fn canonical_harmonic_map(problem: &Problem, n: usize, config: &VortexConfig) -> Result<HarmonicMap> {
    HarmonicSolver::new(problem, n)?.solve(config)
}

pub(crate) fn bilinear(g: &Grid, f: &[f64], x: Vec2) -> f64 {
    let u = ((x.x - g.origin.x) / g.h).clamp(0.0, (g.nx - 1) as f64 - 1e-9);
    let v = ((x.y - g.origin.y) / g.h).clamp(0.0, (g.ny - 1) as f64 - 1e-9);
    let (i, j) = (u.floor() as usize, v.floor() as usize);
    let (a, b) = (u - i as f64, v - j as f64);
    let corners = [
        (g.idx(i, j), (1.0 - a) * (1.0 - b)),
        (g.idx(i + 1, j), a * (1.0 - b)),
        (g.idx(i, j + 1), (1.0 - a) * b),
        (g.idx(i + 1, j + 1), a * b),
    ];
    let (mut acc, mut w) = (0.0, 0.0);
    for (k, c) in corners {
        if g.mask[k] {
            acc += f[k] * c;
            w += c;
        }
    }
    if w > 1e-12 {
        acc / w
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::unit_disk;
    use crate::lifting::loop_parity;

    fn pair(r: f64) -> VortexConfig {
        VortexConfig::new(vec![Vec2::new(-r, 0.0), Vec2::new(r, 0.0)], 1).unwrap()
    }

    #[test]
    fn single_centered_vortex_has_no_correction() {
        let pb = Problem::with_q_winding(unit_disk(), 1, 0.0);
        let cfg = VortexConfig::new(vec![Vec2::new(0.0, 0.0)], 1).unwrap();
        let solver = HarmonicSolver::new(&pb, 64).unwrap();
        let m = solver.solve(&cfg).unwrap();
        let g = &m.q.grid;
        let max_h = (0..g.len()).filter(|&k| g.mask[k]).map(|k| m.h[k].abs()).fold(0.0, f64::max);
        assert!(max_h < 1e-5, "{max_h}");
        // Dirichlet nodes carry the datum of their foot, which is off the ray through the node.
        for k in 0..g.len() {
            let x = g.node_pos(k);
            if g.mask[k] && !solver.fixed[k] && x.norm() > 0.0 {
                assert!(m.q.values[k].dist(x.normalized()) < 1e-5);
            }
        }
    }

    #[test]
    fn boundary_trace_matches_the_datum() {
        let pb = Problem::new(unit_disk(), 1, 0.2);
        let solver = HarmonicSolver::new(&pb, 64).unwrap();
        let m = solver.solve(&pair(0.3)).unwrap();
        let datum = pb.datum(&solver.grid);
        for (&k, &v) in datum.nodes.iter().zip(&datum.values) {
            assert!(m.q.values[k].dist(v) < 1e-12);
        }
        let (w, _) = loop_parity(&m.q, &datum.nodes).unwrap();
        assert_eq!(w, 2);
        let g = &m.q.grid;
        for k in 0..g.len() {
            if g.mask[k] {
                assert!((m.q.values[k].norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergence_residual_decays_under_refinement() {
        let pb = Problem::new(unit_disk(), 1, 0.0);
        let cfg = VortexConfig::new(vec![Vec2::new(-0.3, 0.1), Vec2::new(0.35, -0.05)], 1).unwrap();
        let r1 = canonical_harmonic_map(&pb, 64, &cfg).unwrap().divergence_residual(0.1);
        let r2 = canonical_harmonic_map(&pb, 128, &cfg).unwrap().divergence_residual(0.1);
        assert!(r2 <= 0.5 * r1, "{r1} -> {r2}");
    }

    #[test]
    fn winding_mismatch_is_rejected() {
        let pb = Problem::new(unit_disk(), 1, 0.0);
        let cfg = VortexConfig::new(vec![Vec2::new(0.2, 0.0)], 1).unwrap();
        assert!(matches!(canonical_harmonic_map(&pb, 32, &cfg), Err(Error::Input(_))));
        let cfg = VortexConfig::new(vec![Vec2::new(0.2, 0.0), Vec2::new(-0.2, 0.0)], -1).unwrap();
        assert!(canonical_harmonic_map(&pb, 32, &cfg).is_err());
    }

    #[test]
    fn infeasible_configurations_are_rejected() {
        let pb = Problem::new(unit_disk(), 1, 0.0);
        let close = VortexConfig::new(vec![Vec2::new(0.0, 0.0), Vec2::new(0.05, 0.0)], 1).unwrap();
        assert!(canonical_harmonic_map(&pb, 64, &close).is_err());
        let edge = VortexConfig::new(vec![Vec2::new(0.97, 0.0), Vec2::new(-0.5, 0.0)], 1).unwrap();
        assert!(canonical_harmonic_map(&pb, 64, &edge).is_err());
    }
}
