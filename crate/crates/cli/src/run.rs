//! One function per mode. Each fills a [`RunRecord`] and writes mode-specific files.

use crate::record::{ComparisonRow, DefectRow, RenormRow, RunRecord, SigmaRow, TrendRow};
use crate::spec::{ExperimentSpec, Mode};
use ferroconnect::connection::{
    minimality_diagnostics, random_points, solve_min_connection, validate_connection, Connection,
};
use ferroconnect::error::{Error, Result};
use ferroconnect::ferrosim::{
    detect_wall, max_principle_audit, recovery_competitor, relax_minimize, FlowOptions, Level, Params, Problem,
    RelaxOutcome, Schedule,
};
use ferroconnect::geom::{domain_from_spec, Domain, Vec2};
use ferroconnect::lifting::{
    construct_lifting, detect_singularities, field_from_bytes, field_from_text, field_to_text, vortex_field, Grid,
    GridField, LowerBoundAudit, DEFAULT_KAPPA,
};
use ferroconnect::renorm::{
    canonical_harmonic_map, core_energy_limit, minimize_w_beta, w_beta, HarmonicSolver, MinimizeOptions, VortexConfig,
    WBeta,
};
use serde::Serialize;
use std::f64::consts::TAU;
use std::path::Path;

/// Module prefix for errors, so failures name their origin.
fn ctx<T>(module: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{module}: {m}")),
        Error::Numeric(m) => Error::Numeric(format!("{module}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{module}: {m}")),
        Error::Parse(m) => Error::Parse(format!("{module}: {m}")),
        Error::Io(m) => Error::Io(format!("{module}: {m}")),
        other => other,
    })
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(dir.join(name), contents).map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))
}

/// Every knob consumed by some module, echoed into the manifest.
#[derive(Serialize)]
struct Manifest<'a> {
    ferroconnect_version: &'static str,
    cli_version: &'static str,
    seed: u64,
    spec: &'a ExperimentSpec,
    flow: FlowOptions,
    minimize: MinimizeOptions,
    module_seeds: ModuleSeeds,
    lower_bound_kappa: f64,
    competitor_phase: f64,
}

#[derive(Serialize)]
struct ModuleSeeds {
    points: u64,
    relax: u64,
    renorm: u64,
    audit: u64,
}

fn minimize_options(spec: &ExperimentSpec) -> MinimizeOptions {
    MinimizeOptions {
        grid: spec.grid,
        starts: spec.starts,
        seed: spec.module_seed("renorm"),
        margin: spec.margin,
        ..Default::default()
    }
}

pub fn manifest(spec: &ExperimentSpec) -> String {
    let m = Manifest {
        ferroconnect_version: ferroconnect::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        seed: spec.seed,
        spec,
        flow: FlowOptions::default(),
        minimize: minimize_options(spec),
        module_seeds: ModuleSeeds {
            points: spec.module_seed("points"),
            relax: spec.module_seed("relax"),
            renorm: spec.module_seed("renorm"),
            audit: spec.module_seed("audit"),
        },
        lower_bound_kappa: DEFAULT_KAPPA,
        competitor_phase: 0.0,
    };
    toml::to_string(&m).expect("manifest serializes")
}

/// Runs `spec`, writing the manifest, `results.json`, `summary.txt` and mode files into `out`.
pub fn run(spec: &ExperimentSpec, out: &Path) -> Result<RunRecord> {
    spec.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    write(out, "manifest.toml", manifest(spec))?;
    let domain = ctx("geom", domain_from_spec(&spec.domain))?;
    let rec = match spec.mode {
        Mode::Connect => connect(spec, &domain, out)?,
        Mode::Lift => lift(spec, &domain, out)?,
        Mode::AuditLowerBound => audit(spec, &domain)?,
        Mode::Simulate => simulate(spec, &domain, out, None)?.0,
        Mode::Renorm => renorm(spec, &domain)?,
        Mode::Pipeline => pipeline(spec, &domain, out)?,
    };
    write(out, "summary.txt", rec.summary_text())?;
    write(out, "results.json", serde_json::to_string_pretty(&rec).expect("record serializes"))?;
    Ok(rec)
}

/// Drawn points keep at least `spec.margin`, widened to `5h` of the spec grid
/// so that coarse grids still admit the harmonic solve.
fn points_or_draw(spec: &ExperimentSpec, domain: &Domain, count: usize) -> Result<Vec<Vec2>> {
    if spec.points.is_empty() {
        let h = Grid::for_domain(domain, spec.grid)?.h;
        let margin = spec.margin.max(5.0 * h);
        let (lo, hi) = domain.bbox();
        if margin > 0.2 * (hi.x - lo.x).min(hi.y - lo.y) {
            return Err(Error::Input(format!(
                "spec field `grid`: {} cells are too coarse to draw points (margin {margin:.3})",
                spec.grid
            )));
        }
        Ok(random_points(domain, count, margin, &mut spec.rng("points")))
    } else {
        Ok(spec.point_list())
    }
}

fn required_points(spec: &ExperimentSpec) -> Result<Vec<Vec2>> {
    if spec.points.is_empty() {
        return Err(Error::Input("spec field `points`: required for this mode".into()));
    }
    Ok(spec.point_list())
}

fn connect(spec: &ExperimentSpec, domain: &Domain, out: &Path) -> Result<RunRecord> {
    let pts = required_points(spec)?;
    let c = ctx("connection", solve_min_connection(domain, &pts))?;
    let v = validate_connection(domain, &pts, &c);
    let d = minimality_diagnostics(domain, &c, pts.len());
    let mut rec = RunRecord::new("connect");
    rec.put("points", pts.len());
    rec.put("segments", c.segments.len());
    rec.put("L", format!("{:.12}", c.total_length));
    rec.put("valid", v.passed());
    rec.put("disjoint", d.disjoint);
    rec.put("unique incidence", d.unique_incidence);
    rec.put("max normal angle", format!("{:.3e}", d.max_normal_angle));
    write(out, "connection.json", c.to_json())?;
    rec.points = pts;
    rec.connection = Some(c);
    Ok(rec)
}

fn load_field(path: &str) -> Result<GridField> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    if bytes.starts_with(b"FCGF") {
        field_from_bytes(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
        field_from_text(&text)
    }
}

fn defect_rows(q: &GridField) -> Vec<DefectRow> {
    detect_singularities(q)
        .defects
        .iter()
        .map(|d| DefectRow {
            center: d.center,
            winding: d.winding,
            orientable: d.orientable,
        })
        .collect()
}

fn non_orientable(rows: &[DefectRow]) -> Vec<Vec2> {
    rows.iter().filter(|d| !d.orientable).map(|d| d.center).collect()
}

fn lift(spec: &ExperimentSpec, domain: &Domain, out: &Path) -> Result<RunRecord> {
    let mut rec = RunRecord::new("lift");
    let q = match &spec.field {
        Some(path) => ctx("lifting", load_field(path))?,
        None => {
            let g = ctx("lifting", Grid::for_domain(domain, spec.grid))?;
            let pts = points_or_draw(spec, domain, 2 * spec.degree.unsigned_abs() as usize)?;
            rec.points = pts.clone();
            vortex_field(&g, &pts, if spec.degree < 0 { -1 } else { 1 })
        }
    };
    rec.defects = defect_rows(&q);
    let defects = non_orientable(&rec.defects);
    let c = ctx("connection", solve_min_connection(domain, &defects))?;
    let l = ctx("lifting", construct_lifting(&q, &c))?;
    let h = q.grid.h;
    rec.put("grid", format!("{}x{} (h = {h})", q.grid.nx, q.grid.ny));
    rec.put("defects", rec.defects.len());
    rec.put("non-orientable", defects.len());
    rec.put("L(defects)", format!("{:.12}", c.total_length));
    rec.put("jump edges", l.jumps.count());
    rec.put("jump length", format!("{:.12}", l.jumps.length(h)));
    write(out, "directors.txt", field_to_text(&l.directors))?;
    rec.edges = l.jumps.midpoints(&q.grid);
    rec.connection = Some(c);
    Ok(rec)
}

fn audit(spec: &ExperimentSpec, domain: &Domain) -> Result<RunRecord> {
    let pts = if spec.points.is_empty() {
        vec![Vec2::new(-0.3, 0.0), Vec2::new(0.3, 0.0)]
    } else {
        spec.point_list()
    };
    let a = ctx("lifting", LowerBoundAudit::new(domain, &pts, spec.grid))?;
    let s = a.run(spec.samples, spec.module_seed("audit"));
    let w = ctx("lifting", a.check(&a.band_shift_witness()))?;
    let mut rec = RunRecord::new("audit-lower-bound");
    rec.put("passed", format!("{}/{} pass", s.passed, s.samples));
    rec.put("bound", format!("L = {:.12}, allowance {}h, h = {}", s.min_connection, a.kappa, s.h));
    rec.put("min margin", format!("{:.6}", s.min_margin));
    rec.put("witness traced length", format!("{:.6}", w.corrected_length));
    rec.put("witness edge length", format!("{:.6}", w.lattice_length));
    rec.edges = a.la(&a.band_shift_witness()).midpoints(&a.grid);
    rec.points = pts;
    rec.connection = Some(a.cuts.clone());
    Ok(rec)
}

fn schedule(spec: &ExperimentSpec) -> Schedule {
    let mut s = Schedule::single(spec.eps[0], spec.beta, spec.grid);
    s.levels = spec.eps.iter().map(|&eps| Level { eps, grid: spec.grid }).collect();
    s.restarts = spec.restarts;
    s.noise = spec.noise;
    s.seed = spec.module_seed("relax");
    s
}

fn excess(energy: f64, degree: i32, eps: f64) -> f64 {
    energy - TAU * degree.abs() as f64 * eps.ln().abs()
}

/// Relaxes from the recovery competitor at `start` (default: the spec points, or drawn ones).
fn simulate(
    spec: &ExperimentSpec,
    domain: &Domain,
    out: &Path,
    start: Option<&[Vec2]>,
) -> Result<(RunRecord, RelaxOutcome)> {
    let problem = Problem::new(domain.clone(), spec.degree, 0.0);
    let pts = match start {
        Some(p) => p.to_vec(),
        None => points_or_draw(spec, domain, 2 * spec.degree.unsigned_abs() as usize)?,
    };
    let conn = if pts.is_empty() {
        Connection::empty()
    } else {
        ctx("connection", solve_min_connection(domain, &pts))?
    };
    let p0 = ctx("ferrosim", Params::new(spec.eps[0], spec.beta))?;
    let start = ctx("ferrosim", recovery_competitor(&problem, spec.grid, &pts, &conn, &p0))?;
    let o = ctx("ferrosim", relax_minimize(&problem, &start.state, &schedule(spec)))?;
    let mut rec = RunRecord::new("simulate");
    rec.points = pts;
    rec.defects = defect_rows(&o.state.q);
    let defects = non_orientable(&rec.defects);
    let wall = ctx("ferrosim", detect_wall(&o.state, &o.params))?;
    let l = ctx("connection", solve_min_connection(domain, &defects))?;
    let mp = max_principle_audit(&o.state, &o.params);
    let eps = spec.target_eps();
    rec.put("start F", format!("{:.9}", start.energy.total));
    rec.put("final F", format!("{:.9}", o.energy.total));
    rec.put("F - 2pi|d||log eps|", format!("{:.9}", excess(o.energy.total, spec.degree, eps)));
    rec.put("residual", format!("{:.3e}", o.residual));
    rec.put("converged", o.converged);
    rec.put("chosen restart", o.chosen_restart);
    rec.put("non-orientable defects", defects.len());
    rec.put("wall length", format!("{:.9}", wall.length));
    rec.put("L(defects)", format!("{:.9}", l.total_length));
    rec.put("max principle", format!("max|M|^2 = {:.6} <= {:.6}: {}", mp.max_m2, mp.m_bound, mp.m_ok));
    for (i, lv) in spec.eps.iter().enumerate() {
        if let Some(last) = o.ledger.iter().rev().find(|r| r.level == i) {
            rec.trend.push(TrendRow {
                level: i,
                eps: *lv,
                energy: last.f,
                excess: excess(last.f, spec.degree, *lv),
            });
        }
    }
    write(out, "q.txt", field_to_text(&o.state.q))?;
    write(out, "m.txt", field_to_text(&o.state.m))?;
    rec.ledger = o.ledger.clone();
    rec.walls = wall.polylines.clone();
    rec.edges = wall.edges.midpoints(o.state.grid());
    rec.connection = Some(l);
    Ok((rec, o))
}

fn renorm_row(v: &WBeta) -> RenormRow {
    RenormRow {
        points: v.config.points.clone(),
        w: v.w.w,
        spread: v.w.spread,
        connection_length: v.connection_length(),
        w_beta: v.value,
    }
}

fn sigma_rows(v: &WBeta) -> Vec<SigmaRow> {
    v.w.sigmas
        .iter()
        .zip(&v.w.brackets)
        .map(|(&sigma, &bracket)| SigmaRow { sigma, bracket })
        .collect()
}

fn nonzero_problem(spec: &ExperimentSpec, domain: &Domain) -> Result<Problem> {
    if spec.degree == 0 {
        return Err(Error::Input("spec field `degree`: renormalized energy needs d != 0".into()));
    }
    Ok(Problem::new(domain.clone(), spec.degree, 0.0))
}

fn renorm(spec: &ExperimentSpec, domain: &Domain) -> Result<RunRecord> {
    let problem = nonzero_problem(spec, domain)?;
    let solver = ctx("renorm", HarmonicSolver::new(&problem, spec.grid))?;
    let sign = spec.degree.signum();
    let mut rec = RunRecord::new("renorm");
    let best = if spec.minimize || spec.points.is_empty() {
        let m = ctx("renorm", minimize_w_beta(&problem, spec.beta, &minimize_options(spec)))?;
        for s in &m.starts {
            let cfg = ctx("renorm", VortexConfig::new(s.points.clone(), sign))?;
            rec.renorm.push(renorm_row(&ctx("renorm", w_beta(&solver, &cfg, spec.beta))?));
        }
        rec.put("starts", m.starts.len());
        rec.put("near optima", m.near_optima.len());
        m.best
    } else {
        let cfg = ctx("renorm", VortexConfig::new(spec.point_list(), sign))?;
        let v = ctx("renorm", w_beta(&solver, &cfg, spec.beta))?;
        rec.renorm.push(renorm_row(&v));
        v
    };
    rec.put("W", format!("{:.9}", best.w.w));
    rec.put("window spread", format!("{:.3e}", best.w.spread));
    rec.put("c_beta", format!("{:.12}", best.c_beta));
    rec.put("L", format!("{:.9}", best.connection_length()));
    rec.put("W_beta", format!("{:.9}", best.value));
    rec.sigma = sigma_rows(&best);
    rec.points = best.config.points.clone();
    rec.connection = Some(best.connection.clone());
    Ok(rec)
}

/// Largest distance after the best pairing, optionally also minimized over rotations about `center`.
fn mismatch(a: &[Vec2], b: &[Vec2], center: Option<Vec2>) -> f64 {
    if a.len() != b.len() || a.is_empty() {
        return if a.len() == b.len() { 0.0 } else { f64::INFINITY };
    }
    let angles: Vec<f64> = match center {
        Some(_) => (0..3600).map(|k| TAU * k as f64 / 3600.0).collect(),
        None => vec![0.0],
    };
    let c = center.unwrap_or_default();
    let mut perm: Vec<usize> = (0..b.len()).collect();
    let mut best = f64::INFINITY;
    loop {
        for &t in &angles {
            let r = Vec2::from_angle(t);
            let worst = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    let d = b[j] - c;
                    let rot = Vec2::new(r.x * d.x - r.y * d.y, r.y * d.x + r.x * d.y) + c;
                    a[i].dist(rot)
                })
                .fold(0.0, f64::max);
            best = best.min(worst);
        }
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn centroid(d: &Domain) -> Vec2 {
    let v = d.vertices();
    v.iter().fold(Vec2::default(), |s, &x| s + x) * (1.0 / v.len() as f64)
}

/// Without explicit points the simulation starts from the `W_beta` argmin, so
/// the comparison probes whether relaxation stays there rather than which
/// local minimum a random start falls into.
fn pipeline(spec: &ExperimentSpec, domain: &Domain, out: &Path) -> Result<RunRecord> {
    let problem = nonzero_problem(spec, domain)?;
    let m = ctx("renorm", minimize_w_beta(&problem, spec.beta, &minimize_options(spec)))?;
    let argmin = m.best.config.points.clone();
    let start = spec.points.is_empty().then_some(argmin.as_slice());
    let (mut rec, o) = simulate(spec, domain, out, start)?;
    rec.mode = "pipeline".into();
    let defects = non_orientable(&rec.defects);
    let l = rec.connection.as_ref().map_or(f64::NAN, |c| c.total_length);
    let wall_length = ctx("ferrosim", detect_wall(&o.state, &o.params))?.length;
    let n = 2.0 * spec.degree.unsigned_abs() as f64;
    let eps = spec.target_eps();
    let gamma = ctx("renorm", core_energy_limit())?.gamma_star;
    let star = ctx("renorm", canonical_harmonic_map(&problem, spec.grid, &m.best.config))?;
    let c = centroid(domain);
    let spread = |p: &[Vec2]| p.iter().map(|x| x.dist(c)).sum::<f64>() / p.len().max(1) as f64;
    let row = |item: &str, simulated: f64, predicted: f64, mismatch: f64| ComparisonRow {
        item: item.into(),
        simulated: simulated.is_finite().then_some(simulated),
        predicted: predicted.is_finite().then_some(predicted),
        mismatch: mismatch.is_finite().then_some(mismatch),
    };
    let distance = |item: &str, mismatch: f64| row(item, f64::NAN, f64::NAN, mismatch);
    let f_excess = excess(o.energy.total, spec.degree, eps);
    let predicted_excess = m.best.value + n * gamma;
    rec.comparison = vec![
        row("non-orientable defects", defects.len() as f64, n, defects.len() as f64 - n),
        row("mean defect radius", spread(&defects), spread(&argmin), spread(&defects) - spread(&argmin)),
        distance("defect position", mismatch(&defects, &argmin, None)),
        distance("defect position rotated", mismatch(&defects, &argmin, Some(c))),
        row("wall length vs L", wall_length, l, wall_length - l),
        row("F - 2pi|d||log eps|", f_excess, predicted_excess, f_excess - predicted_excess),
        row("canonical map residual", star.divergence_residual(0.1), 0.0, star.divergence_residual(0.1)),
    ];
    rec.put("argmin", format!("{argmin:?}"));
    rec.put("W_beta(argmin)", format!("{:.9}", m.best.value));
    rec.put("gamma*", format!("{gamma:.9}"));
    rec.put("3h", format!("{:.6}", 3.0 * o.state.grid().h));
    rec.sigma = sigma_rows(&m.best);
    rec.renorm = vec![renorm_row(&m.best)];
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_exhaustive() {
        let mut p = vec![0, 1, 2, 3];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 24);
        assert_eq!(p, vec![3, 2, 1, 0]);
    }

    #[test]
    fn mismatch_ignores_order_and_rotation() {
        let a = [Vec2::new(0.5, 0.0), Vec2::new(-0.5, 0.0)];
        let b = [Vec2::new(0.0, -0.5), Vec2::new(0.0, 0.5)];
        assert!((mismatch(&a, &b, None) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(mismatch(&a, &b, Some(Vec2::default())) < 1e-12);
        assert!(mismatch(&a, &b[..1], None).is_infinite());
    }
}
