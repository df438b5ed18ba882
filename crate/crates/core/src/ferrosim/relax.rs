use super::energy::{el_residual, total_energy, EnergyParts, Residual};
use super::params::{kappa_eps, Params};
use super::state::{Problem, State};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::linalg::Stencil;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Descent scheme of one run at fixed `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Semi-implicit gradient flow with step halving and growth.
    Flow,
    /// L-BFGS preconditioned by the implicit flow operator at infinite step,
    /// with Armijo backtracking.
    Lbfgs,
}

/// Knobs of one minimization run at fixed `eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub method: Method,
    /// L-BFGS history length.
    pub memory: usize,
    pub max_sweeps: usize,
    /// Stop when one accepted sweep lowers `F` by less than this fraction of `F`.
    pub tol_flow: f64,
    /// Stop only once the max residual is below this, in units of `1/eps`.
    pub tol_stationary: f64,
    /// Linear stabilization `S / eps^2` added to the implicit operator.
    pub stabilization: f64,
    /// Initial step in units of `eps^2`.
    pub dt0: f64,
    pub cg_iters: usize,
    pub cg_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            method: Method::Lbfgs,
            memory: 8,
            max_sweeps: 3000,
            tol_flow: 1e-8,
            tol_stationary: 1e-5,
            stabilization: 2.0,
            dt0: 0.2,
            cg_iters: 60,
            cg_tol: 1e-6,
        }
    }
}

/// One accepted sweep of the energy ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub level: usize,
    pub sweep: usize,
    pub eps: f64,
    pub f: f64,
    pub elastic_q: f64,
    pub elastic_m: f64,
    pub potential: f64,
    pub residual: f64,
    /// Time step (flow) or line-search step (L-BFGS) of the accepted sweep.
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub state: State,
    pub energy: EnergyParts,
    pub residual: f64,
    pub ledger: Vec<LedgerRow>,
    pub converged: bool,
    pub sweeps: usize,
}

struct Operators {
    q: Stencil,
    m: Stencil,
}

impl Operators {
    fn new(s: &State) -> Self {
        let g = s.grid();
        let free: Vec<bool> = (0..g.len()).map(|k| g.mask[k] && !s.fixed[k]).collect();
        let none = vec![false; g.len()];
        Self {
            q: Stencil::new(g, &free, &s.fixed),
            m: Stencil::new(g, &g.mask, &none),
        }
    }
}

/// Solves `(c - Lap) d = rhs` componentwise on the stencil's unknowns.
fn implicit_step(st: &Stencil, c: f64, rhs: &[Vec2], opts: &FlowOptions) -> Vec<Vec2> {
    let mut out = vec![Vec2::new(0.0, 0.0); st.len()];
    for comp in 0..2 {
        let b: Vec<f64> = st.nodes.iter().map(|&k| if comp == 0 { rhs[k].x } else { rhs[k].y }).collect();
        let mut x = vec![0.0; st.len()];
        st.solve_shifted(c, &b, &mut x, opts.cg_tol, opts.cg_iters);
        for (o, v) in out.iter_mut().zip(x) {
            if comp == 0 {
                o.x = v;
            } else {
                o.y = v;
            }
        }
    }
    out
}

/// Descent at fixed parameters by `opts.method`. Every accepted sweep
/// strictly lowers the energy and is recorded in the ledger.
pub fn relax(state: State, p: &Params, opts: &FlowOptions, level: usize) -> Result<FlowResult> {
    match opts.method {
        Method::Flow => relax_flow(state, p, opts, level),
        Method::Lbfgs => relax_lbfgs(state, p, opts, level),
    }
}

/// Semi-implicit gradient flow.
///
/// Each sweep solves `(1/dt + S/eps^2 - Lap) delta = -res` for both fields,
/// the Laplacian implicit and the nonlinearity explicit. A sweep that does not
/// lower the energy is retried with half the step; accepted sweeps grow it.
fn relax_flow(mut state: State, p: &Params, opts: &FlowOptions, level: usize) -> Result<FlowResult> {
    let g = state.grid().clone();
    let ops = Operators::new(&state);
    let h2 = g.h * g.h;
    let e2 = p.eps * p.eps;
    let mut dt = opts.dt0 * e2;
    let dt_min = 1e-8 * e2;
    let mut energy = total_energy(&state, p);
    let mut ledger = Vec::new();
    let mut sweeps = 0;
    let tol_res = opts.tol_stationary / p.eps;
    let mut res = el_residual(&state, p);
    let mut converged = false;
    while sweeps < opts.max_sweeps {
        let c = h2 * (1.0 / dt + opts.stabilization / e2);
        let rq: Vec<Vec2> = res.res_q.values.iter().map(|&v| v * (-h2)).collect();
        let rm: Vec<Vec2> = res.res_m.values.iter().map(|&v| v * (-h2)).collect();
        let dq = implicit_step(&ops.q, c, &rq, opts);
        let dm = implicit_step(&ops.m, c, &rm, opts);
        let mut trial = state.clone();
        for (s, &k) in ops.q.nodes.iter().enumerate() {
            trial.q.values[k] = trial.q.values[k] + dq[s];
        }
        for (s, &k) in ops.m.nodes.iter().enumerate() {
            trial.m.values[k] = trial.m.values[k] + dm[s];
        }
        let e_new = total_energy(&trial, p);
        if !e_new.total.is_finite() {
            return Err(Error::Numeric(format!("energy became non-finite at sweep {sweeps}")));
        }
        if e_new.total >= energy.total {
            dt *= 0.5;
            if dt < dt_min {
                if res.max() < tol_res {
                    converged = true;
                    break;
                }
                return Err(Error::Numeric(format!(
                    "step-size failure at sweep {sweeps}: no decrease down to dt={dt:.3e}, residual {:.3e}",
                    res.max()
                )));
            }
            continue;
        }
        let decrease = energy.total - e_new.total;
        state = trial;
        energy = e_new;
        res = el_residual(&state, p);
        sweeps += 1;
        ledger.push(LedgerRow {
            level,
            sweep: sweeps,
            eps: p.eps,
            f: energy.total,
            elastic_q: energy.elastic_q,
            elastic_m: energy.elastic_m,
            potential: energy.potential,
            residual: res.max(),
            step: dt,
        });
        if decrease < opts.tol_flow * energy.total.abs() && res.max() < tol_res {
            converged = true;
            break;
        }
        dt = (dt * 1.5).min(1e3 * e2);
    }
    Ok(FlowResult {
        residual: res.max(),
        state,
        energy,
        ledger,
        converged,
        sweeps,
    })
}

impl Operators {
    fn unknowns(&self) -> usize {
        2 * (self.q.len() + self.m.len())
    }

    /// Unknowns as `[q.x, q.y, M.x, M.y]` blocks in stencil order.
    fn pack(&self, q: &[Vec2], m: &[Vec2]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.unknowns());
        x.extend(self.q.nodes.iter().map(|&k| q[k].x));
        x.extend(self.q.nodes.iter().map(|&k| q[k].y));
        x.extend(self.m.nodes.iter().map(|&k| m[k].x));
        x.extend(self.m.nodes.iter().map(|&k| m[k].y));
        x
    }

    fn unpack(&self, x: &[f64], s: &mut State) {
        let (nq, nm) = (self.q.len(), self.m.len());
        for (i, &k) in self.q.nodes.iter().enumerate() {
            s.q.values[k] = Vec2::new(x[i], x[nq + i]);
        }
        for (i, &k) in self.m.nodes.iter().enumerate() {
            s.m.values[k] = Vec2::new(x[2 * nq + i], x[2 * nq + nm + i]);
        }
    }

    /// Applies `P^-1` with `P = diag(c - Lap, eps (c - Lap))` blockwise.
    fn precondition(&self, c: f64, eps: f64, r: &[f64], opts: &FlowOptions) -> Vec<f64> {
        let (nq, nm) = (self.q.len(), self.m.len());
        let mut out = vec![0.0; r.len()];
        let blocks = [(&self.q, 0, nq, 1.0), (&self.q, nq, nq, 1.0), (&self.m, 2 * nq, nm, eps), (&self.m, 2 * nq + nm, nm, eps)];
        for (st, off, n, scale) in blocks {
            let b: Vec<f64> = r[off..off + n].iter().map(|v| v / scale).collect();
            st.solve_shifted(c, &b, &mut out[off..off + n], opts.cg_tol, opts.cg_iters);
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `grad E` in packed order from the scaled residuals.
fn packed_gradient(ops: &Operators, res: &Residual, h2: f64, eps: f64) -> Vec<f64> {
    let z = Vec2::new(0.0, 0.0);
    let mut q = vec![z; res.res_q.values.len()];
    let mut m = q.clone();
    for k in 0..q.len() {
        q[k] = res.res_q.values[k] * h2;
        m[k] = res.res_m.values[k] * (eps * h2);
    }
    ops.pack(&q, &m)
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
    gamma: f64,
}

fn relax_lbfgs(mut state: State, p: &Params, opts: &FlowOptions, level: usize) -> Result<FlowResult> {
    let g = state.grid().clone();
    let ops = Operators::new(&state);
    let h2 = g.h * g.h;
    let c = h2 * opts.stabilization / (p.eps * p.eps);
    let tol_res = opts.tol_stationary / p.eps;
    let mut x = ops.pack(&state.q.values, &state.m.values);
    let mut energy = total_energy(&state, p);
    let mut res = el_residual(&state, p);
    let mut grad = packed_gradient(&ops, &res, h2, p.eps);
    let mut hist: VecDeque<Pair> = VecDeque::new();
    let mut ledger = Vec::new();
    let mut sweeps = 0;
    let mut converged = false;
    let mut trial = state.clone();
    while sweeps < opts.max_sweeps {
        // Two-loop recursion with H0 = gamma P^-1.
        let mut r = grad.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for pr in hist.iter().rev() {
            let a = pr.rho * dot(&pr.s, &r);
            r.iter_mut().zip(&pr.y).for_each(|(v, y)| *v -= a * y);
            alphas.push(a);
        }
        let gamma = hist.back().map_or(1.0, |pr| pr.gamma);
        let mut d = ops.precondition(c, p.eps, &r, opts);
        d.iter_mut().for_each(|v| *v *= gamma);
        for (pr, a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = pr.rho * dot(&pr.y, &d);
            d.iter_mut().zip(&pr.s).for_each(|(v, s)| *v += (a - b) * s);
        }
        d.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&grad, &d);
        if !(slope < 0.0) {
            hist.clear();
            d = ops.precondition(c, p.eps, &grad, opts);
            d.iter_mut().for_each(|v| *v = -*v);
            slope = dot(&grad, &d);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            ops.unpack(&xt, &mut trial);
            let e = total_energy(&trial, p);
            if !e.total.is_finite() {
                alpha *= 0.5;
                continue;
            }
            if e.total < energy.total && e.total <= energy.total + 1e-4 * alpha * slope {
                accepted = Some((xt, e));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xt, e_new)) = accepted else {
            if !hist.is_empty() {
                hist.clear();
                continue;
            }
            if res.max() < tol_res {
                converged = true;
                break;
            }
            return Err(Error::Numeric(format!(
                "step-size failure at sweep {sweeps}: no decrease along the preconditioned gradient, residual {:.3e}",
                res.max()
            )));
        };
        let decrease = energy.total - e_new.total;
        std::mem::swap(&mut state, &mut trial);
        energy = e_new;
        res = el_residual(&state, p);
        let g_new = packed_gradient(&ops, &res, h2, p.eps);
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            let py = ops.precondition(c, p.eps, &y, opts);
            let gamma = sy / dot(&y, &py);
            if hist.len() == opts.memory.max(1) {
                hist.pop_front();
            }
            hist.push_back(Pair { s, y, rho: 1.0 / sy, gamma });
        }
        x = xt;
        grad = g_new;
        sweeps += 1;
        ledger.push(LedgerRow {
            level,
            sweep: sweeps,
            eps: p.eps,
            f: energy.total,
            elastic_q: energy.elastic_q,
            elastic_m: energy.elastic_m,
            potential: energy.potential,
            residual: res.max(),
            step: alpha,
        });
        if decrease < opts.tol_flow * energy.total.abs() && res.max() < tol_res {
            converged = true;
            break;
        }
    }
    Ok(FlowResult {
        residual: res.max(),
        state,
        energy,
        ledger,
        converged,
        sweeps,
    })
}

/// Continuation level: target `eps` on a grid with `grid` cells across the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub eps: f64,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub beta: f64,
    /// Levels in order; the last one is the target.
    pub levels: Vec<Level>,
    /// Perturbed restarts on the first level, in addition to the unperturbed run.
    pub restarts: usize,
    pub noise: f64,
    pub seed: u64,
    pub flow: FlowOptions,
}

impl Schedule {
    pub fn single(eps: f64, beta: f64, grid: usize) -> Self {
        Self {
            beta,
            levels: vec![Level { eps, grid }],
            restarts: 0,
            noise: 0.1,
            seed: 0,
            flow: FlowOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxOutcome {
    pub state: State,
    pub params: Params,
    pub energy: EnergyParts,
    pub residual: f64,
    pub ledger: Vec<LedgerRow>,
    /// The final level converged.
    pub converged: bool,
    /// Final energy of every first-level run; index 0 is the unperturbed start.
    pub restart_energies: Vec<f64>,
    pub chosen_restart: usize,
}

/// Adds uniform noise of amplitude `a` to free `q` nodes and all `M` nodes.
pub fn perturb(s: &State, a: f64, rng: &mut ChaCha8Rng) -> State {
    let mut t = s.clone();
    let g = s.grid();
    for k in 0..g.len() {
        if !g.mask[k] {
            continue;
        }
        if !s.fixed[k] {
            t.q.values[k] = t.q.values[k] + Vec2::new(rng.gen_range(-a..=a), rng.gen_range(-a..=a));
        }
        t.m.values[k] = t.m.values[k] + Vec2::new(rng.gen_range(-a..=a), rng.gen_range(-a..=a));
    }
    t
}

/// Minimization by the semi-implicit flow with restarts on the first level
/// and warm-started continuation through the remaining levels.
pub fn relax_minimize(problem: &Problem, initial: &State, schedule: &Schedule) -> Result<RelaxOutcome> {
    let first = *schedule
        .levels
        .first()
        .ok_or_else(|| Error::Input("empty continuation schedule".into()))?;
    let g0 = problem.grid(first.grid)?;
    let start = if *initial.grid() == g0 {
        initial.clone()
    } else {
        initial.resample(&g0, &problem.datum(&g0))?
    };
    let p0 = kappa_eps(first.eps, schedule.beta)?;
    let runs: Vec<Result<FlowResult>> = (0..=schedule.restarts)
        .into_par_iter()
        .map(|r| {
            let s = if r == 0 {
                start.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
                rng.set_stream(r as u64);
                perturb(&start, schedule.noise, &mut rng)
            };
            relax(s, &p0, &schedule.flow, 0)
        })
        .collect();
    let runs: Vec<FlowResult> = runs.into_iter().collect::<Result<_>>()?;
    let restart_energies: Vec<f64> = runs.iter().map(|r| r.energy.total).collect();
    let chosen = (0..runs.len())
        .min_by(|&a, &b| restart_energies[a].total_cmp(&restart_energies[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    let mut best = runs.into_iter().nth(chosen).expect("at least one run");
    let mut ledger = std::mem::take(&mut best.ledger);
    let mut params = p0;
    for (li, lv) in schedule.levels.iter().enumerate().skip(1) {
        params = kappa_eps(lv.eps, schedule.beta)?;
        let s = if best.state.grid().h == problem.grid(lv.grid)?.h {
            best.state
        } else {
            let g = problem.grid(lv.grid)?;
            best.state.resample(&g, &problem.datum(&g))?
        };
        best = relax(s, &params, &schedule.flow, li)?;
        ledger.append(&mut best.ledger);
    }
    Ok(RelaxOutcome {
        state: best.state,
        params,
        energy: best.energy,
        residual: best.residual,
        ledger,
        converged: best.converged,
        restart_energies,
        chosen_restart: chosen,
    })
}

/// Post-run bounds: `max|M|^2 <= 1 + sqrt2 beta max|q| + 5e-3` and `max|q| <= 1 + 5 beta eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPrinciple {
    pub max_m2: f64,
    pub max_q: f64,
    pub m_bound: f64,
    pub q_bound: f64,
    pub m_ok: bool,
    pub q_ok: bool,
}

pub fn max_principle_audit(s: &State, p: &Params) -> MaxPrinciple {
    let g = s.grid();
    let mut max_m2 = 0.0f64;
    let mut max_q = 0.0f64;
    for k in 0..g.len() {
        if g.mask[k] {
            max_m2 = max_m2.max(s.m.values[k].norm2());
            max_q = max_q.max(s.q.values[k].norm());
        }
    }
    let m_bound = 1.0 + std::f64::consts::SQRT_2 * p.beta * max_q + 5e-3;
    let q_bound = 1.0 + 5.0 * p.beta * p.eps;
    MaxPrinciple {
        max_m2,
        max_q,
        m_bound,
        q_bound,
        m_ok: max_m2 <= m_bound,
        q_ok: max_q <= q_bound,
    }
}
