//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any fails.

use ferroconnect::connection::{minimality_diagnostics, oracle_min_connection, random_points, solve_min_connection};
use ferroconnect::ferrosim::{
    detect_wall, el_residual, kappa_eps, max_principle_audit, potential_f_eps, recovery_competitor, relax_minimize,
    total_energy, wall_transition_cost, Params, Problem, RelaxOutcome, Schedule, State,
};
use ferroconnect::geom::{kidney, unit_disk, Vec2, DEFAULT_VERTICES};
use ferroconnect::lifting::{
    detect_singularities, jordan_decompose, random_pixel_set, symdiff_boundary_check, ContactTag, Grid, GridField,
    LowerBoundAudit,
};
use ferroconnect::renorm::{canonical_harmonic_map, core_energy_limit, minimize_w_beta, MinimizeOptions, WBetaMin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<f64>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let mut o = f();
    let dt = t.elapsed();
    if let Some(l) = limit {
        if dt.as_secs_f64() >= l {
            o.pass = false;
            o.detail.push_str(&format!("; runtime limit {l} s exceeded"));
        }
    }
    (o, dt)
}

fn connection_instances() -> Vec<(usize, Vec<Vec2>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..200)
        .map(|k| {
            let d = k % 2;
            let dom = if d == 0 { unit_disk() } else { kidney(DEFAULT_VERTICES).unwrap() };
            let p = 1 + (k / 2) % 6;
            (d, random_points(&dom, p, 0.01, &mut rng))
        })
        .collect()
}

fn c1_oracle() -> Outcome {
    let doms = [unit_disk(), kidney(DEFAULT_VERTICES).unwrap()];
    let mut mismatches = 0;
    for (d, pts) in connection_instances() {
        let s = solve_min_connection(&doms[d], &pts);
        let o = oracle_min_connection(&doms[d], &pts);
        match (s, o) {
            (Ok(s), Ok(o)) if s.total_length == o.total_length => {}
            _ => mismatches += 1,
        }
    }
    outcome(mismatches == 0, format!("{mismatches}/200 instances differ from the oracle"))
}

fn c2_diagnostics() -> Outcome {
    let doms = [unit_disk(), kidney(DEFAULT_VERTICES).unwrap()];
    let mut bad = 0;
    let mut worst = 0.0f64;
    for (d, pts) in connection_instances() {
        let c = solve_min_connection(&doms[d], &pts).unwrap();
        let diag = minimality_diagnostics(&doms[d], &c, pts.len());
        worst = worst.max(diag.max_normal_angle);
        if !(diag.disjoint && diag.unique_incidence && diag.max_normal_angle <= 1e-3) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad}/200 fail; max normal angle {worst:.2e} rad (tol 1e-3)"))
}

fn c3_lower_bound() -> Outcome {
    let audit = LowerBoundAudit::new(&unit_disk(), &[Vec2::new(-0.3, 0.0), Vec2::new(0.3, 0.0)], 128).unwrap();
    let h = audit.grid.h;
    let s = audit.run(1000, 7);
    let all = s.passed == 1000;
    let w = audit.band_shift_witness();
    let chk = audit.check(&w).unwrap();
    let equal = (chk.corrected_length - chk.min_connection).abs() <= 2.0 * h;
    let dec = jordan_decompose(&audit.grid, &audit.la(&w), &audit.contacts()).unwrap();
    let traces = dec.loops.is_empty()
        && dec.arcs.len() == 1
        && dec.arcs[0].start.1 == ContactTag::DefectCell
        && dec.arcs[0].end.1 == ContactTag::DefectCell
        && dec.arcs[0].start.0 != dec.arcs[0].end.0;
    outcome(
        all && equal && traces,
        format!(
            "{}/1000 >= 0.6 - 2h (min margin {:.4}); witness traced length {:.4} (edge count {:.4}) vs 0.6 (2h = {:.4}); witness traces a connection: {traces}",
            s.passed,
            s.min_margin,
            chk.corrected_length,
            chk.lattice_length,
            2.0 * h
        ),
    )
}

fn c4_symdiff() -> Outcome {
    let g = Grid::for_domain(&unit_disk(), 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ok = (0..500)
        .filter(|_| {
            let a = random_pixel_set(&g, &mut rng);
            let b = random_pixel_set(&g, &mut rng);
            symdiff_boundary_check(&g, &a, &b)
        })
        .count();
    outcome(ok == 500, format!("{ok}/500 pairs give identical edge sets"))
}

fn c5_wall_cost() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let beta = rng.gen_range(0.0..5.0);
        let c = wall_transition_cost(beta).unwrap();
        worst = worst.max((c.closed_form - c.quadrature).abs());
    }
    outcome(worst < 1e-8, format!("max |closed form - quadrature| = {worst:.2e} over 20 beta (tol 1e-8)"))
}

fn random_pair<R: Rng>(rng: &mut R) -> (Vec2, Vec2) {
    (
        Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
    )
}

fn c6_potential() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_f = f64::INFINITY;
    let mut comparison_bad = 0;
    for eps in [0.1, 0.05] {
        let p = kappa_eps(eps, 1.0).unwrap();
        for _ in 0..1_000_000 {
            let (q, m) = random_pair(&mut rng);
            min_f = min_f.min(potential_f_eps(q, m, &p));
        }
        for _ in 0..100_000 {
            let (q, m) = random_pair(&mut rng);
            let lhs = potential_f_eps(q, m, &p) / (eps * eps);
            let rhs = (q.norm2() - 1.0).powi(2) / (8.0 * eps * eps) - p.beta * p.beta * m.norm2() * m.norm2();
            if lhs < rhs - 1e-9 * rhs.abs().max(1.0) {
                comparison_bad += 1;
            }
        }
    }
    outcome(
        min_f >= -1e-9 && comparison_bad == 0,
        format!("min f_eps = {min_f:.3e} over 2x10^6 samples; comparison bound violated in {comparison_bad}/2x10^5"),
    )
}

fn c7_gradient() -> Outcome {
    let pb = Problem::new(unit_disk(), 1, 0.0);
    let g = pb.grid(64).unwrap();
    let p = Params::new(0.1, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rnd = |r: &mut ChaCha8Rng| Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    let mut q = GridField::constant(&g, Vec2::new(0.0, 0.0));
    let mut m = q.clone();
    for k in 0..g.len() {
        q.values[k] = rnd(&mut rng);
        m.values[k] = rnd(&mut rng);
    }
    let s = State::new(q, m, &pb.datum(&g)).unwrap();
    let r = el_residual(&s, &p);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let dq: Vec<Vec2> = (0..g.len())
            .map(|k| if s.fixed[k] { Vec2::new(0.0, 0.0) } else { rnd(&mut rng) })
            .collect();
        let dm: Vec<Vec2> = (0..g.len()).map(|_| rnd(&mut rng)).collect();
        let f = |t: f64| {
            let mut x = s.clone();
            for k in 0..g.len() {
                x.q.values[k] = x.q.values[k] + dq[k] * t;
                x.m.values[k] = x.m.values[k] + dm[k] * t;
            }
            total_energy(&x, &p).total
        };
        let t = 1e-5;
        let fd = (f(t) - f(-t)) / (2.0 * t);
        let an: f64 = (0..g.len())
            .filter(|&k| g.mask[k])
            .map(|k| g.h * g.h * (r.res_q.values[k].dot(dq[k]) + p.eps * r.res_m.values[k].dot(dm[k])))
            .sum();
        worst = worst.max((fd - an).abs() / an.abs());
    }
    outcome(worst < 1e-5, format!("max relative error {worst:.2e} over 20 directions (tol 1e-5)"))
}

/// Runs shared by criteria 8, 9 and 10.
struct Runs {
    argmin: Result<WBetaMin, String>,
    structure: Result<RelaxOutcome, String>,
    refined: Result<RelaxOutcome, String>,
    /// `(eps, competitor energy, competitor excess, relaxed outcome)`.
    ladder: Vec<(f64, f64, f64, Result<RelaxOutcome, String>)>,
    times: [Duration; 2],
}

const BETA: f64 = 1.0;

fn disk_problem() -> Problem {
    Problem::new(unit_disk(), 1, 0.0)
}

fn competitor_start(points: &[Vec2], eps: f64, grid: usize) -> Result<(State, f64, f64), String> {
    let pb = disk_problem();
    let conn = solve_min_connection(&pb.domain, points).map_err(|e| e.to_string())?;
    let p = Params::new(eps, BETA).map_err(|e| e.to_string())?;
    let c = recovery_competitor(&pb, grid, points, &conn, &p).map_err(|e| e.to_string())?;
    Ok((c.state, c.energy.total, c.excess))
}

fn shared_runs() -> Runs {
    let pb = disk_problem();
    let t9 = Instant::now();
    let argmin = minimize_w_beta(
        &pb,
        BETA,
        &MinimizeOptions {
            grid: 128,
            starts: 4,
            seed: 9,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string());
    let points = argmin
        .as_ref()
        .map(|m| m.best.config.points.clone())
        .unwrap_or_else(|_| vec![Vec2::new(-0.75, 0.0), Vec2::new(0.75, 0.0)]);
    let structure = competitor_start(&points, 0.04, 128).and_then(|(s, _, _)| {
        let mut sched = Schedule::single(0.04, BETA, 128);
        sched.restarts = 4;
        sched.noise = 0.1;
        sched.seed = 9;
        relax_minimize(&pb, &s, &sched).map_err(|e| e.to_string())
    });
    let refined = structure.as_ref().map_err(|e| e.clone()).and_then(|o| {
        relax_minimize(&pb, &o.state, &Schedule::single(0.02, BETA, 256)).map_err(|e| e.to_string())
    });
    let t9 = t9.elapsed();
    let t10 = Instant::now();
    let ladder = [(0.08, 64), (0.04, 128), (0.02, 256)]
        .into_iter()
        .map(|(eps, grid)| match competitor_start(&points, eps, grid) {
            Ok((s, e, x)) => {
                let sched = Schedule::single(eps, BETA, grid);
                (eps, e, x, relax_minimize(&pb, &s, &sched).map_err(|e| e.to_string()))
            }
            Err(e) => (eps, f64::NAN, f64::NAN, Err(e)),
        })
        .collect();
    Runs {
        argmin,
        structure,
        refined,
        ladder,
        times: [t9, t10.elapsed()],
    }
}

fn c8_max_principle(runs: &Runs) -> Outcome {
    let mut outcomes: Vec<&RelaxOutcome> = Vec::new();
    outcomes.extend(runs.structure.as_ref().ok());
    outcomes.extend(runs.refined.as_ref().ok());
    outcomes.extend(runs.ladder.iter().filter_map(|l| l.3.as_ref().ok()));
    let converged: Vec<&&RelaxOutcome> = outcomes.iter().filter(|o| o.converged).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for o in &converged {
        let a = max_principle_audit(&o.state, &o.params);
        worst = worst.max(a.max_m2 - a.m_bound);
        ok &= a.m_ok;
    }
    outcome(
        ok && !converged.is_empty(),
        format!(
            "{} converged runs of {}; max of max|M|^2 - (1 + sqrt2 beta max|Q| + 5e-3) = {worst:.3e}",
            converged.len(),
            outcomes.len()
        ),
    )
}

fn defects(o: &RelaxOutcome) -> Vec<Vec2> {
    detect_singularities(&o.state.q).non_orientable().map(|d| d.center).collect()
}

/// Largest point distance after the best rotation about the origin and pairing.
fn rotated_mismatch(a: &[Vec2], b: &[Vec2]) -> f64 {
    if a.len() != 2 || b.len() != 2 {
        return f64::INFINITY;
    }
    (0..7200)
        .map(|k| {
            let r = Vec2::from_angle(TAU * k as f64 / 7200.0);
            let rot = |v: Vec2| Vec2::new(r.x * v.x - r.y * v.y, r.y * v.x + r.x * v.y);
            let (b0, b1) = (rot(b[0]), rot(b[1]));
            let direct = a[0].dist(b0).max(a[1].dist(b1));
            let swapped = a[0].dist(b1).max(a[1].dist(b0));
            direct.min(swapped)
        })
        .fold(f64::INFINITY, f64::min)
}

fn c9_structure(runs: &Runs) -> Outcome {
    let (o, argmin, refined) = match (&runs.structure, &runs.argmin, &runs.refined) {
        (Ok(o), Ok(a), Ok(r)) => (o, a, r),
        (s, a, r) => {
            let errs: Vec<String> = [s.as_ref().err(), a.as_ref().err(), r.as_ref().err()]
                .into_iter()
                .flatten()
                .cloned()
                .collect();
            return outcome(false, format!("run failed: {}", errs.join("; ")));
        }
    };
    let h = o.state.grid().h;
    let pts = defects(o);
    let two = pts.len() == 2;
    let wall = match detect_wall(&o.state, &o.params) {
        Ok(w) => w,
        Err(e) => return outcome(false, format!("wall detection failed: {e}")),
    };
    let near = |x: Vec2| pts.iter().any(|&a| a.dist(x) <= 3.0 * h);
    let arcs_ok = !wall.polylines.is_empty()
        && wall.polylines.iter().all(|pl| near(pl[0]) || near(*pl.last().unwrap()));
    let ends_ok = pts
        .iter()
        .all(|&a| wall.polylines.iter().any(|pl| pl[0].dist(a) <= 3.0 * h || pl.last().unwrap().dist(a) <= 3.0 * h));
    let conn = solve_min_connection(&disk_problem().domain, &pts).map(|c| c.total_length).unwrap_or(f64::NAN);
    let length_ok = wall.length >= conn - 3.0 * h;
    let fine = defects(refined);
    let mismatch = rotated_mismatch(&fine, &argmin.best.config.points);
    let coarse_mismatch = rotated_mismatch(&pts, &argmin.best.config.points);
    outcome(
        two && arcs_ok && ends_ok && length_ok && mismatch <= 0.05,
        format!(
            "{} non-orientable defects; wall endpoints within 3h: {}; wall {:.4} vs L {:.4} - 3h; argmin mismatch {:.4} at eps 0.04, {:.4} at eps 0.02 (tol 0.05)",
            pts.len(),
            arcs_ok && ends_ok,
            wall.length,
            conn,
            coarse_mismatch,
            mismatch
        ),
    )
}

fn c10_upper_bound(runs: &Runs) -> Outcome {
    let excess: Vec<f64> = runs.ladder.iter().map(|l| l.2).collect();
    let (lo, hi) = excess
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let variation = (hi - lo) / hi.abs();
    let mut descent = true;
    for (_, e0, _, r) in &runs.ladder {
        match r {
            Ok(o) => {
                let mut prev = *e0;
                for row in &o.ledger {
                    descent &= row.f <= prev;
                    prev = row.f;
                }
                descent &= o.energy.total <= *e0;
            }
            Err(_) => descent = false,
        }
    }
    outcome(
        variation < 0.1 && descent,
        format!(
            "F - 2pi|log eps| = {:?} at eps {{0.08, 0.04, 0.02}}: variation {:.1}% (tol 10%); relaxation never increased F: {descent}",
            excess.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
            100.0 * variation
        ),
    )
}

fn c11_core() -> Outcome {
    match core_energy_limit() {
        Ok(l) => outcome(
            l.ratio >= 2.0 && l.gamma_star > 0.0,
            format!("values {:?}, Cauchy ratio {:.3} (need >= 2), gamma* = {:.5}", l.values, l.ratio, l.gamma_star),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn c12_residual() -> Outcome {
    let pb = disk_problem();
    let cfg = ferroconnect::renorm::VortexConfig::new(vec![Vec2::new(-0.3, 0.0), Vec2::new(0.3, 0.0)], 1).unwrap();
    let r1 = canonical_harmonic_map(&pb, 128, &cfg).unwrap().divergence_residual(0.1);
    let r2 = canonical_harmonic_map(&pb, 256, &cfg).unwrap().divergence_residual(0.1);
    outcome(r2 <= 0.5 * r1, format!("max residual {r1:.3e} on 128^2 -> {r2:.3e} on 256^2"))
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut push = |i: usize, name: &'static str, limit: Option<f64>, f: &dyn Fn() -> Outcome| {
        let (o, dt) = timed(limit, f);
        results.push((i, name, o, dt));
    };
    push(1, "connection oracle equivalence", Some(30.0), &c1_oracle);
    push(2, "minimality diagnostics", None, &c2_diagnostics);
    push(3, "lattice lower bound", Some(60.0), &c3_lower_bound);
    push(4, "symmetric-difference boundary identity", Some(5.0), &c4_symdiff);
    push(5, "wall cost identity", Some(1.0), &c5_wall_cost);
    push(6, "potential normalization and comparison", Some(10.0), &c6_potential);
    push(7, "EL / gradient consistency", Some(10.0), &c7_gradient);
    let runs = shared_runs();
    push(8, "maximum principle audit", None, &|| c8_max_principle(&runs));
    let (mut o9, _) = timed(None, || c9_structure(&runs));
    if runs.times[0].as_secs_f64() >= 600.0 {
        o9.pass = false;
        o9.detail.push_str("; runtime limit 600 s exceeded");
    }
    results.push((9, "defect and wall structure", o9, runs.times[0]));
    let (mut o10, _) = timed(None, || c10_upper_bound(&runs));
    if runs.times[1].as_secs_f64() >= 900.0 {
        o10.pass = false;
        o10.detail.push_str("; runtime limit 900 s exceeded");
    }
    results.push((10, "upper-bound trend", o10, runs.times[1]));
    let (o, dt) = timed(Some(30.0), c11_core);
    results.push((11, "core energy", o, dt));
    let (o, dt) = timed(Some(60.0), c12_residual);
    results.push((12, "canonical map residual", o, dt));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (i, name, o, dt) in &results {
        println!(
            "{} [{i:2}] {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            dt.as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
