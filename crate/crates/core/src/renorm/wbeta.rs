use super::energy::{renormalized_energy, sigma_window, WReport};
use super::harmonic::{HarmonicSolver, VortexConfig};
use crate::connection::{random_points, solve_min_connection, Connection};
use crate::error::{Error, Result};
use crate::ferrosim::{wall_transition_cost, Problem};
use crate::geom::Vec2;
use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `W + c_beta L` for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WBeta {
    pub config: VortexConfig,
    pub w: WReport,
    pub connection: Connection,
    pub c_beta: f64,
    pub value: f64,
}

impl WBeta {
    pub fn connection_length(&self) -> f64 {
        self.connection.total_length
    }
}

/// Modified renormalized energy `W + c_beta * L(points)` with the closed-form `c_beta`.
pub fn w_beta(solver: &HarmonicSolver, config: &VortexConfig, beta: f64) -> Result<WBeta> {
    let map = solver.solve(config)?;
    let w = renormalized_energy(&solver.problem, &map)?;
    let connection = solve_min_connection(&solver.problem.domain, &config.points)?;
    let c_beta = wall_transition_cost(beta)?.closed_form;
    let value = w.w + c_beta * connection.total_length;
    Ok(WBeta {
        config: config.clone(),
        w,
        connection,
        c_beta,
        value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Cells across the domain for every evaluation.
    pub grid: usize,
    pub starts: usize,
    pub seed: u64,
    pub max_iters: u64,
    /// Nelder-Mead stops when the standard deviation of the simplex values drops below this.
    pub sd_tolerance: f64,
    /// Edge of the initial simplex.
    pub initial_step: f64,
    /// Minimal boundary and pairwise distance of random starts.
    pub margin: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            grid: 128,
            starts: 8,
            seed: 0,
            max_iters: 400,
            sd_tolerance: 1e-7,
            initial_step: 0.1,
            margin: 0.15,
        }
    }
}

/// One Nelder-Mead run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub initial: Vec<Vec2>,
    pub points: Vec<Vec2>,
    pub value: f64,
    pub iterations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WBetaMin {
    pub best: WBeta,
    /// Runs ordered by value, ties by configuration.
    pub starts: Vec<StartRecord>,
    /// Distinct run results within `1e-3` of the best value.
    pub near_optima: Vec<VortexConfig>,
}

/// Penalty floor for configurations outside the admissible set.
const INFEASIBLE: f64 = 1e6;

struct Objective<'a> {
    solver: &'a HarmonicSolver,
    sign: i32,
    beta: f64,
}

impl Objective<'_> {
    fn config(&self, p: &[f64]) -> VortexConfig {
        VortexConfig {
            points: p.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect(),
            sign: self.sign,
        }
    }

    fn value(&self, p: &[f64]) -> f64 {
        let cfg = self.config(p);
        let h = self.solver.grid.h;
        let dom = &self.solver.problem.domain;
        if cfg.check(dom, h).is_err() || sigma_window(&self.solver.problem, &cfg, h).is_err() {
            let spread = p.iter().map(|v| v.abs()).sum::<f64>();
            return INFEASIBLE * (1.0 + spread);
        }
        match w_beta(self.solver, &cfg, self.beta) {
            Ok(v) if v.value.is_finite() => v.value,
            _ => INFEASIBLE,
        }
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.value(p))
    }
}

fn sorted_points(mut pts: Vec<Vec2>) -> Vec<Vec2> {
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts
}

fn lex_cmp_points(a: &[Vec2], b: &[Vec2]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.lex_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Multi-start Nelder-Mead over the `2|d|` points. Start `k` draws its
/// initial configuration from ChaCha8 stream `k` of `opts.seed`.
pub fn minimize_w_beta(problem: &Problem, beta: f64, opts: &MinimizeOptions) -> Result<WBetaMin> {
    let d = problem
        .degree()
        .filter(|&d| d != 0)
        .ok_or_else(|| Error::Input("minimization needs a nonzero director degree".into()))?;
    let solver = HarmonicSolver::new(problem, opts.grid)?;
    let obj = Objective {
        solver: &solver,
        sign: d.signum(),
        beta,
    };
    let n_pts = 2 * d.unsigned_abs() as usize;
    let runs: Vec<Option<StartRecord>> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let mut initial = None;
            for _ in 0..100 {
                let pts = random_points(&problem.domain, n_pts, opts.margin, &mut rng);
                let flat: Vec<f64> = pts.iter().flat_map(|p| [p.x, p.y]).collect();
                if obj.value(&flat) < INFEASIBLE {
                    initial = Some((pts, flat));
                    break;
                }
            }
            let (pts, x0) = initial?;
            let mut simplex = vec![x0.clone()];
            for i in 0..x0.len() {
                let mut v = x0.clone();
                v[i] += opts.initial_step;
                simplex.push(v);
            }
            let local = Objective {
                solver: &solver,
                sign: obj.sign,
                beta,
            };
            let nm = NelderMead::new(simplex).with_sd_tolerance(opts.sd_tolerance).ok()?;
            let res = Executor::new(local, nm)
                .configure(|s| s.max_iters(opts.max_iters))
                .run()
                .ok()?;
            let st = res.state();
            let best = st.get_best_param()?.clone();
            Some(StartRecord {
                start: k,
                initial: pts,
                points: sorted_points(best.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect()),
                value: st.get_best_cost(),
                iterations: st.get_iter(),
            })
        })
        .collect();
    let mut starts: Vec<StartRecord> = runs.into_iter().flatten().filter(|r| r.value < INFEASIBLE).collect();
    if starts.is_empty() {
        return Err(Error::Numeric("every start of the W_beta minimization was infeasible".into()));
    }
    starts.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| lex_cmp_points(&a.points, &b.points))
    });
    let best_cfg = VortexConfig::new(starts[0].points.clone(), obj.sign)?;
    let best = w_beta(&solver, &best_cfg, beta)?;
    let mut near_optima: Vec<VortexConfig> = Vec::new();
    for r in starts.iter().filter(|r| r.value <= starts[0].value + 1e-3) {
        let distinct = near_optima.iter().all(|c| {
            c.points.iter().zip(&r.points).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max) > 1e-2
        });
        if distinct {
            near_optima.push(VortexConfig::new(r.points.clone(), obj.sign)?);
        }
    }
    Ok(WBetaMin {
        best,
        starts,
        near_optima,
    })
}
