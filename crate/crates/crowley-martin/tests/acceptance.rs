//! Acceptance suite: each criterion prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::time::Instant;

use crowley_martin::equilibria::{expected_count, solve_equilibria, Equilibrium};
use crowley_martin::kinetics::{
    beta_tangency, c_of_u, classify_regime, gamma_of_alpha, phi1, psi1_prime, reaction, Kinetics,
};
use crowley_martin::limits::rescale_compare;
use crowley_martin::sim::{
    field_from_profiles, init_field, random_field, run_until, run_with_lyapunov, Field, Grid,
    Outcome, Perturbation, Problem, RunOptions,
};
use crowley_martin::stability::{
    band_opening_d2, classify_stability, default_j_max, dispersion, index_and_degree, jacobian,
    mode_eigenvalue, nonexistence_threshold, Stability,
};
use crowley_martin::steady::{
    distinct_solutions, mode_starts, multistart, newton_solve, seeded_starts, Classification,
    NewtonOptions, Start, SteadyResult,
};
use crowley_martin::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const N: usize = 257;

/// `(d1, d2, alpha, beta, c, d)`.
type ParamRow = (f64, f64, f64, f64, f64, f64);

/// Parameters and Newton solution of the pattern found by criterion 8.
type Pattern = (ModelParams, SteadyResult);

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    /// Deterministic record of the run, compared byte-for-byte by criterion 10.
    report: Value,
}

fn print(v: &Verdict, seconds: f64) {
    println!(
        "{} criterion {:>2} ({}): {} [{:.1} s]",
        if v.pass { "PASS" } else { "FAIL" },
        v.id,
        v.name,
        v.detail,
        seconds
    );
}

fn params(d1: f64, d2: f64, alpha: f64, beta: f64, c: f64, d: f64) -> ModelParams {
    ModelParams::new(d1, d2, alpha, beta, c, d, PI).unwrap()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn distance(f: &Field, u: f64, v: f64) -> f64 {
    let du = f.u.iter().map(|x| (x - u).abs()).fold(0.0, f64::max);
    let dv = f.v.iter().map(|x| (x - v).abs()).fold(0.0, f64::max);
    du.max(dv)
}

fn runtime_ok(start: Instant, limit: f64) -> (bool, String) {
    let s = start.elapsed().as_secs_f64();
    (s < limit, format!("runtime {s:.1} s (limit {limit} s)"))
}

// ---------------------------------------------------------------- 1-3

/// One parameter draw per regime in turn, with β and c kept `1e-6` (relative)
/// away from every case boundary.
fn draw(rng: &mut ChaCha8Rng, regime: usize) -> ModelParams {
    const M: f64 = 1e-6;
    loop {
        let d = log_uniform(rng, 0.1, 2.0);
        let (alpha, beta) = match regime {
            0 => (rng.random_range(0.05..1.0 - M), log_uniform(rng, 0.05, 3.0)),
            1 => (
                log_uniform(rng, 1.0 + M, 30.0),
                log_uniform(rng, 1.0 + M, 3.0),
            ),
            _ => {
                let alpha = log_uniform(rng, 1.05, 30.0);
                let (bt, g) = (beta_tangency(alpha), gamma_of_alpha(alpha));
                let (lo, hi) = match regime {
                    2 => (bt, 1.0),
                    3 => (g, bt),
                    _ => (1e-3 * g, g),
                };
                (alpha, rng.random_range(lo * (1.0 + M)..hi * (1.0 - M)))
            }
        };
        let class = classify_regime(alpha, beta, d);
        let floor = d * (1.0 + alpha);
        let crit: Vec<f64> = class
            .c_critical_values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        // Half the B draws aim at the three-equilibrium window, unless it lies
        // so high that v reaches the rounding limit of an absolute residual.
        let cap = 1e3 * floor;
        let c = match (regime, crit.as_slice()) {
            (2, &[c0, ..]) if 3.0 * c0 < cap && rng.random_bool(0.5) => {
                c0 * rng.random_range(1.0..3.0)
            }
            (3, &[c1, c2]) if c2 < cap && rng.random_bool(0.5) => rng.random_range(c1..c2),
            _ => floor * log_uniform(rng, 0.3, 50.0),
        };
        let far = std::iter::once(floor)
            .chain(crit)
            .all(|b| (c - b).abs() > M * c);
        if far {
            return params(1.0, 1.0, alpha, beta, c, d);
        }
    }
}

fn criterion_1(samples: &mut Vec<(ModelParams, Equilibrium)>) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = Vec::new();
    let mut max_residual = 0.0_f64;
    let mut per_count = [0usize; 4];
    let mut per_regime = [0usize; 5];
    for i in 0..1000 {
        let regime = i % 5;
        let p = draw(&mut rng, regime);
        per_regime[regime] += 1;
        let found = solve_equilibria(&p);
        let expected = expected_count(&p).count;
        if found.len() != expected {
            mismatches.push(json!({"params": p, "expected": expected, "found": found.len()}));
        }
        per_count[found.len().min(3)] += 1;
        for e in found {
            let (f, g) = reaction(e.u, e.v, &p);
            max_residual = max_residual.max(f.abs()).max(g.abs());
            samples.push((p, e));
        }
    }
    let (fast, rt) = runtime_ok(start, 10.0);
    let pass = mismatches.is_empty() && max_residual < 1e-10 && fast;
    Verdict {
        id: 1,
        name: "equilibrium counts",
        pass,
        detail: format!(
            "{} mismatches in 1000 draws, draws with 0/1/2/3 equilibria {:?}, max reaction residual {max_residual:.2e}, {rt}",
            mismatches.len(),
            per_count
        ),
        report: json!({"draws_per_regime": per_regime, "count_histogram": per_count,
                       "mismatches": mismatches, "max_residual": max_residual}),
    }
}

fn criterion_2(samples: &[(ModelParams, Equilibrium)]) -> Verdict {
    let mut checked = 0;
    let mut exceptions = Vec::new();
    for (p, e) in samples {
        if e.c_prime_at_u.abs() <= 1e-8 {
            continue;
        }
        checked += 1;
        let det = jacobian(e, p).det();
        if det.signum() != (-e.c_prime_at_u).signum() {
            exceptions.push(json!({"params": p, "u": e.u, "det": det, "c_prime": e.c_prime_at_u}));
        }
    }
    Verdict {
        id: 2,
        name: "sign of Det equals sign of -C'",
        pass: exceptions.is_empty() && checked > 0,
        detail: format!("{} exceptions among {checked} equilibria", exceptions.len()),
        report: json!({"checked": checked, "exceptions": exceptions}),
    }
}

fn criterion_3(samples: &[(ModelParams, Equilibrium)]) -> Verdict {
    const H: f64 = 1e-6;
    let mut worst = 0.0_f64;
    let mut used = 0;
    let stride = (samples.len() / 200).max(1);
    for (p, e) in samples.iter().step_by(stride).take(200) {
        used += 1;
        let j = jacobian(e, p);
        let (fu1, gu1) = reaction(e.u + H, e.v, p);
        let (fu0, gu0) = reaction(e.u - H, e.v, p);
        let (fv1, gv1) = reaction(e.u, e.v + H, p);
        let (fv0, gv0) = reaction(e.u, e.v - H, p);
        let fd = [
            (fu1 - fu0) / (2.0 * H),
            (fv1 - fv0) / (2.0 * H),
            (gu1 - gu0) / (2.0 * H),
            (gv1 - gv0) / (2.0 * H),
        ];
        let exact = [j.a11, j.a12, j.a21, j.a22];
        let scale = exact.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let err = fd
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        worst = worst.max(err);
    }
    Verdict {
        id: 3,
        name: "Jacobian against finite differences",
        pass: worst < 1e-6 && used == 200,
        detail: format!("max relative error {worst:.2e} over {used} equilibria"),
        report: json!({"equilibria": used, "max_relative_error": worst}),
    }
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Verdict {
    let start = Instant::now();
    // (d1, d2, alpha, beta, c, d); the last group keeps c inside (d(1+α), C((α-1)/α)].
    let cond3 = |d1: f64, d2: f64, alpha: f64, beta: f64, d: f64, t: f64| {
        let base = params(d1, d2, alpha, beta, 1.0, d);
        let top = c_of_u((alpha - 1.0) / alpha, &base).unwrap();
        let floor = d * (1.0 + alpha);
        (d1, d2, alpha, beta, floor + t * (top - floor), d)
    };
    let groups: [(&str, Vec<ParamRow>); 4] = [
        (
            "cond0",
            vec![
                (1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
                (0.1, 2.0, 2.0, 0.5, 1.5, 1.0),
                (0.5, 0.2, 0.5, 0.3, 0.6, 0.8),
                (0.05, 5.0, 4.0, 0.9, 2.5, 0.7),
                (2.0, 0.5, 0.2, 2.0, 0.3, 0.5),
            ],
        ),
        (
            "cond1",
            vec![
                (1.0, 1.0, 1.0, 1.0, 12.0, 1.0),
                (0.1, 1.0, 0.5, 0.5, 3.0, 1.0),
                (0.5, 5.0, 0.8, 0.2, 6.0, 0.5),
                (0.05, 0.5, 0.2, 1.5, 2.0, 1.0),
                (2.0, 0.1, 0.9, 0.8, 10.0, 1.5),
            ],
        ),
        (
            "cond2",
            vec![
                (1.0, 1.0, 2.0, 1.0, 8.0, 1.0),
                (0.1, 2.0, 3.0, 1.5, 10.0, 1.0),
                (0.5, 0.5, 1.5, 1.2, 4.0, 0.5),
                (0.05, 5.0, 5.0, 2.0, 12.0, 1.0),
                (2.0, 0.2, 2.5, 1.0, 5.0, 0.8),
            ],
        ),
        (
            "cond3",
            vec![
                cond3(1.0, 1.0, 2.0, 0.5, 1.0, 0.5),
                cond3(0.1, 2.0, 3.0, 0.8, 1.0, 0.9),
                cond3(0.5, 0.5, 1.5, 0.3, 0.5, 0.3),
                cond3(0.05, 5.0, 5.0, 0.6, 1.0, 1.0),
                cond3(2.0, 0.2, 2.5, 0.95, 0.8, 0.7),
            ],
        ),
    ];
    let opts = RunOptions {
        steady_tol: 1e-10,
        t_max: 2e4,
        ..Default::default()
    };
    let mut runs = Vec::new();
    let mut failures = 0;
    let mut lyap_failures = 0;
    for (name, sets) in &groups {
        for &(d1, d2, alpha, beta, c, d) in sets {
            let p = params(d1, d2, alpha, beta, c, d);
            let problem = Problem::crowley_martin(&p, N).unwrap();
            let eqs = solve_equilibria(&p);
            let target = if *name == "cond0" {
                (1.0, 0.0)
            } else {
                (eqs[0].u, eqs[0].v)
            };
            for seed in 0..3u64 {
                let (ub, vb) = p.invariant_box();
                let vb = if *name == "cond0" { 2.0 } else { vb };
                let field =
                    random_field(&problem.grid, (0.05 * ub, ub), (0.05 * vb, vb), 100 + seed);
                let report = if *name == "cond0" {
                    run_until(field, &problem, &opts).unwrap()
                } else {
                    run_with_lyapunov(field, &problem, &eqs[0], &opts).unwrap()
                };
                let dist = distance(&report.final_field, target.0, target.1);
                let converged = report.outcome == Outcome::ConvergedConstant && dist < 1e-6;
                let lyap_ok = report.lyapunov_trace.as_ref().is_none_or(|t| {
                    let tol = 1e-10 * t[0].abs();
                    t.windows(2).all(|w| w[1] <= w[0] + tol)
                });
                failures += usize::from(!converged);
                lyap_failures += usize::from(!lyap_ok);
                runs.push(json!({"condition": name, "params": p, "seed": 100 + seed, "outcome": report.outcome,
                                 "distance": dist, "steps": report.steps, "lyapunov_nonincreasing": lyap_ok}));
            }
        }
    }
    let (fast, rt) = runtime_ok(start, 300.0);
    Verdict {
        id: 4,
        name: "global stability",
        pass: failures == 0 && lyap_failures == 0 && fast,
        detail: format!(
            "{} of {} runs failed to reach the predicted state within 1e-6, {lyap_failures} Lyapunov violations, {rt}",
            failures,
            runs.len()
        ),
        report: Value::Array(runs),
    }
}

// ---------------------------------------------------------------- 5

/// Relative amplitude of cosine mode `j` in the deviation from `e`.
fn mode_amplitude(f: &Field, e: &Equilibrium, grid: &Grid, j: usize) -> f64 {
    let m = grid.cos_mode(j);
    let norm = grid.integrate(&m.iter().map(|x| x * x).collect::<Vec<_>>());
    let proj = |vals: &[f64], base: f64| {
        let dev: Vec<f64> = vals.iter().zip(&m).map(|(x, c)| (x - base) * c).collect();
        grid.integrate(&dev) / norm / base
    };
    proj(&f.u, e.u).hypot(proj(&f.v, e.v))
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut matches = 0;
    let mut unstable_count = 0;
    while rows.len() < 50 {
        // Half the draws sit in the three-equilibrium window, where the middle
        // state is a saddle and the lowest may be Turing unstable.
        let (alpha, beta, c) = if rng.random_bool(0.5) {
            let alpha = log_uniform(&mut rng, 0.3, 10.0);
            (
                alpha,
                log_uniform(&mut rng, 0.1, 1.5),
                (1.0 + alpha) * log_uniform(&mut rng, 1.2, 10.0),
            )
        } else {
            let alpha = log_uniform(&mut rng, 2.0, 10.0);
            let bt = beta_tangency(alpha);
            let beta = bt + (1.0 - bt) * rng.random_range(0.05..0.5);
            let c0 = classify_regime(alpha, beta, 1.0).c_critical_values[0];
            (alpha, beta, c0 * rng.random_range(1.05..2.0))
        };
        let d1 = log_uniform(&mut rng, 1e-3, 1.0);
        let d2 = log_uniform(&mut rng, 0.1, 300.0);
        let p = params(d1, d2, alpha, beta, c, 1.0);
        let eqs = solve_equilibria(&p);
        if eqs.is_empty() {
            continue;
        }
        let e = eqs[rng.random_range(0..eqs.len())];
        let table = dispersion(&e, &p, default_j_max(&e, &p));
        let stability = classify_stability(&table).unwrap();
        // Least stable mode, restricted to what the grid resolves well.
        let row = *table
            .iter()
            .filter(|r| r.j <= 12)
            .max_by(|a, b| a.max_re_lambda.total_cmp(&b.max_re_lambda))
            .unwrap();
        let predicted_growth = !matches!(stability, Stability::Stable);
        unstable_count += usize::from(predicted_growth);
        let t_end = (4.0 / row.max_re_lambda.abs()).clamp(0.5, 40.0);
        let problem = Problem::crowley_martin(&p, N).unwrap();
        let amp = 1e-3 * e.u.min(e.v);
        let field = init_field(&problem.grid, &e, &Perturbation::single(row.j, amp)).unwrap();
        let a0 = mode_amplitude(&field, &e, &problem.grid, row.j);
        let opts = RunOptions {
            steady_tol: 0.0,
            t_max: t_end,
            ..Default::default()
        };
        let report = run_until(field, &problem, &opts).unwrap();
        let a1 = mode_amplitude(&report.final_field, &e, &problem.grid, row.j);
        let grew = a1 > a0;
        matches += usize::from(grew == predicted_growth);
        rows.push(
            json!({"params": p, "u": e.u, "mode": row.j, "max_re_lambda": row.max_re_lambda,
                         "predicted_growth": predicted_growth, "amplitude_ratio": a1 / a0}),
        );
    }
    let rt = format!("runtime {:.1} s", start.elapsed().as_secs_f64());
    Verdict {
        id: 5,
        name: "local stability consistency",
        pass: matches >= 49,
        detail: format!("{matches}/50 agree ({unstable_count} predicted unstable), {rt}"),
        report: Value::Array(rows),
    }
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let sets = [
        (1.0, 1.0, 12.0, 1.0),
        (2.0, 0.5, 6.0, 1.0),
        (0.5, 0.8, 3.0, 1.0),
        (3.0, 0.9, 10.0, 1.0),
        (2.0, 0.86, 5.0, 0.5),
    ];
    let opts = NewtonOptions::default();
    let mut entries = Vec::new();
    let mut bad = 0;
    for (k, &(alpha, beta, c, d)) in sets.iter().enumerate() {
        let base = params(1.0, 1.0, alpha, beta, c, d);
        let d_star = nonexistence_threshold(&base).d_star;
        let p = base.with_diffusion(1.1 * d_star, 1.1 * d_star);
        let problem = Problem::crowley_martin(&p, N).unwrap();
        let starts = seeded_starts(&problem, 20, 600 + k as u64);
        let results = multistart(&problem, &starts, &opts);
        let converged: Vec<&SteadyResult> = results.iter().flatten().collect();
        let constant = converged
            .iter()
            .filter(|r| r.classification == Classification::Constant)
            .count();
        bad += results.len() - constant;
        entries.push(
            json!({"params": p, "d_star": d_star, "solves": results.len(),
                            "converged": converged.len(), "constant": constant}),
        );
    }
    let (fast, rt) = runtime_ok(start, 120.0);
    Verdict {
        id: 6,
        name: "no patterns for large diffusion",
        pass: bad == 0 && fast,
        detail: format!("{bad} of 100 solves not converged to a constant, {rt}"),
        report: Value::Array(entries),
    }
}

// ---------------------------------------------------------------- 7

/// Distance of `f` to the nearest rescaled limit equilibrium.
fn limit_distance(f: &Field, p: &ModelParams) -> f64 {
    let r = rescale_compare(f, p);
    let wv = r.wv.map(|(a, b)| a.max(b));
    let uz =
        r.uz.iter()
            .map(|&(a, b)| a.max(b))
            .fold(f64::INFINITY, f64::min);
    wv.map_or(uz, |w| w.min(uz))
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    // (label, d1, d2, alpha, beta, d)
    let sets = [
        ("case I, small beta", 0.5, 1.0, 2.0, 0.3, 1.0),
        ("case I, middle beta", 0.2, 0.5, 2.0, 0.86, 1.0),
        ("case II", 2.0, 0.02, 5.0, 0.6, 1.0),
    ];
    let newton = NewtonOptions::default();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (label, d1, d2, alpha, beta, d) in sets {
        let mut distances = Vec::new();
        for (rung, k) in [50.0, 100.0, 200.0, 400.0].into_iter().enumerate() {
            let p = params(d1, d2, alpha, beta, k * d * (1.0 + alpha), d);
            let problem = Problem::crowley_martin(&p, N).unwrap();
            let eqs = solve_equilibria(&p);
            let base = eqs.last().unwrap();
            let pert = Perturbation {
                modes: vec![1, 2, 3],
                amplitude: 0.05 * base.u,
                seed: Some(70 + rung as u64),
            };
            let field = init_field(&problem.grid, base, &pert).unwrap();
            let opts = RunOptions {
                steady_tol: 1e-8,
                t_max: 2e3,
                ..Default::default()
            };
            let report = run_until(field, &problem, &opts).unwrap();
            let mut starts = seeded_starts(&problem, 8, 700 + rung as u64);
            starts.push(Start {
                label: "simulated".into(),
                field: report.final_field.clone(),
            });
            let solves = multistart(&problem, &starts, &newton);
            let converged = solves.iter().flatten().count();
            let errors: Vec<String> = solves
                .iter()
                .filter_map(|r| r.as_ref().err().map(|e| e.to_string()))
                .collect();
            let constant = solves
                .iter()
                .flatten()
                .filter(|r| r.classification == Classification::Constant)
                .count();
            let dist = limit_distance(&report.final_field, &p);
            if report.outcome != Outcome::ConvergedConstant {
                failures.push(format!("{label} c={}: simulator {:?}", p.c, report.outcome));
            }
            if constant != converged || converged == 0 {
                failures.push(format!(
                    "{label} c={}: {constant}/{converged} converged solves constant",
                    p.c
                ));
            }
            distances.push(dist);
            entries.push(json!({"set": label, "params": p, "equilibria": eqs.len(), "outcome": report.outcome,
                                "newton_converged": converged, "newton_constant": constant, "newton_errors": errors,
                                "limit_distance": dist}));
        }
        if !distances.windows(2).all(|w| w[1] < w[0]) {
            failures.push(format!(
                "{label}: distances {distances:?} not strictly decreasing"
            ));
        }
    }
    let (fast, rt) = runtime_ok(start, 600.0);
    Verdict {
        id: 7,
        name: "no patterns for large c",
        pass: failures.is_empty() && fast,
        detail: if failures.is_empty() {
            rt
        } else {
            format!("{}; {rt}", failures.join("; "))
        },
        report: Value::Array(entries),
    }
}

// ---------------------------------------------------------------- 8-9

/// Index `p` with `mu_p < x < mu_{p+1}`, or `None` when `x` sits on an eigenvalue.
fn eigen_bracket(x: f64, length: f64) -> Option<usize> {
    let mut p = 0;
    while mode_eigenvalue(length, p + 1) < x {
        p += 1;
    }
    (mode_eigenvalue(length, p + 1) > x && (p == 0 || mode_eigenvalue(length, p) < x)).then_some(p)
}

/// Step profile: `u` at level `high` on `[0, L/2)` and `low` beyond, `v` constant.
fn step_field(grid: &Grid, high: f64, low: f64, v: f64, reversed: bool) -> Field {
    let half = 0.5 * grid.length;
    let u = grid
        .nodes()
        .iter()
        .map(|&x| if (x < half) != reversed { high } else { low })
        .collect();
    field_from_profiles(grid, u, vec![v; grid.n]).unwrap()
}

fn criterion_8(solution: &mut Option<Pattern>) -> Verdict {
    let start = Instant::now();
    let p = params(0.0015, 1.1, 5.0, 0.56, 200.0, 1.0);
    let mut failures = Vec::new();
    let regime = classify_regime(p.alpha, p.beta, p.d);
    let c_u0 = regime
        .c_critical_values
        .first()
        .copied()
        .unwrap_or(f64::INFINITY);
    if !(p.alpha > 1.0 && beta_tangency(p.alpha) < p.beta && p.beta < 1.0 && p.c > c_u0) {
        failures.push("parameters outside case II with c > C(u0)".to_string());
    }
    let eqs = solve_equilibria(&p);
    if eqs.len() != 3 {
        failures.push(format!("{} equilibria", eqs.len()));
    }
    let slope = |e: &Equilibrium| phi1(e.u, p.alpha) * psi1_prime(e.u, p.alpha) / p.d1;
    let (u1, u2) = (&eqs[0], &eqs[1]);
    let brackets = (
        eigen_bracket(slope(u1), p.domain_length),
        eigen_bracket(slope(u2), p.domain_length),
    );
    match brackets {
        (Some(bp), Some(bq)) if bp >= 1 && bq >= 1 && (bp + bq) % 2 == 1 => {}
        _ => failures.push(format!("mode brackets {brackets:?} lack odd parity")),
    }
    if psi1_prime(u1.u, p.alpha) <= 0.0 {
        failures.push("psi1'(u1) <= 0".into());
    }
    let index = index_and_degree(&eqs, &p).unwrap();
    if index.degree_sum == 1 {
        failures.push("degree_sum = 1".into());
    }
    let opening = band_opening_d2(u1, &p);
    if !opening.is_some_and(|(d2c, _)| p.d2 > d2c) {
        failures.push(format!(
            "d2 = {} not above the band opening {opening:?}",
            p.d2
        ));
    }

    let problem = Problem::crowley_martin(&p, N).unwrap();
    let (ub, _) = problem.kinetics.invariant_box();
    let mut starts = mode_starts(&problem, &eqs);
    for reversed in [false, true] {
        let field = step_field(&problem.grid, eqs[2].u, 1e-3 * u1.u, u2.v, reversed);
        starts.push(Start {
            label: format!("step_reversed_{reversed}"),
            field,
        });
    }
    let results = multistart(&problem, &starts, &NewtonOptions::default());
    let patterns: Vec<SteadyResult> = distinct_solutions(&results)
        .into_iter()
        .filter(|r| r.classification == Classification::Nonconstant && r.bounds_ok)
        .collect();
    if patterns.is_empty() {
        failures.push("no Newton solve returned a nonconstant state inside the bounds".into());
    }

    // Independent run from a different step: `u` at half the box, `v` below the upper equilibrium.
    let initial = step_field(&problem.grid, 0.5 * ub, 0.01, 0.9 * eqs[2].v, false);
    let opts = RunOptions {
        steady_tol: 3e-8,
        t_max: 2e4,
        ..Default::default()
    };
    let report = run_until(initial, &problem, &opts).unwrap();
    let nearest = patterns
        .iter()
        .enumerate()
        .map(|(k, r)| (k, r.field.max_diff(&report.final_field)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if report.outcome != Outcome::ConvergedNonconstant {
        failures.push(format!(
            "simulator {:?} at t = {:.0}",
            report.outcome, report.final_field.t
        ));
    }
    match nearest {
        Some((k, dist)) if dist < 1e-4 => *solution = Some((p, patterns[k].clone())),
        Some((_, dist)) => failures.push(format!("simulator differs from Newton by {dist:.2e}")),
        None => {}
    }
    let (fast, rt) = runtime_ok(start, 300.0);
    let residuals: Vec<f64> = patterns.iter().map(|r| r.residual_norm).collect();
    Verdict {
        id: 8,
        name: "patterns for large d2",
        pass: failures.is_empty() && fast,
        detail: format!(
            "{} nonconstant solutions (residuals {}), degree {}, simulator distance {}; {}{rt}",
            patterns.len(),
            residuals
                .iter()
                .map(|r| format!("{r:.2e}"))
                .collect::<Vec<_>>()
                .join(", "),
            index.degree_sum,
            nearest.map_or("n/a".into(), |(_, d)| format!("{d:.2e}")),
            failures
                .iter()
                .map(|f| format!("{f}; "))
                .collect::<String>(),
        ),
        report: json!({"params": p, "brackets": brackets, "degree_sum": index.degree_sum, "band_opening": opening,
                       "patterns": patterns.iter().map(|r| json!({"field": r.field, "residual": r.residual_norm}))
                           .collect::<Vec<_>>(),
                       "simulator": {"outcome": report.outcome, "t": report.final_field.t, "field": report.final_field}}),
    }
}

/// Linear interpolation of a field onto the grid with twice the intervals.
fn refine(f: &Field) -> Field {
    let mid = |c: &[f64], i: usize| {
        if i.is_multiple_of(2) {
            c[i / 2]
        } else {
            0.5 * (c[i / 2] + c[i / 2 + 1])
        }
    };
    let n = 2 * f.len() - 1;
    Field {
        u: (0..n).map(|i| mid(&f.u, i)).collect(),
        v: (0..n).map(|i| mid(&f.v, i)).collect(),
        t: f.t,
    }
}

fn criterion_9(solution: &Option<Pattern>) -> Verdict {
    let name = "second-order discretization";
    let Some((p, s257)) = solution else {
        return Verdict {
            id: 9,
            name,
            pass: false,
            detail: "no pattern from criterion 8".into(),
            report: Value::Null,
        };
    };
    let coarse = Problem::crowley_martin(p, N.div_ceil(2)).unwrap();
    let fine = Problem::crowley_martin(p, 2 * N - 1).unwrap();
    let s129 = newton_solve(&s257.field.coarsen(), &coarse, &NewtonOptions::default());
    let s513 = newton_solve(
        &refine(&s257.field),
        &fine,
        &NewtonOptions {
            tol: 1e-8,
            ..Default::default()
        },
    );
    let (s129, s513) = match (s129, s513) {
        (Ok(a), Ok(b))
            if a.classification == Classification::Nonconstant
                && b.classification == Classification::Nonconstant =>
        {
            (a, b)
        }
        (a, b) => {
            let detail = format!("refinement solves failed: {:?} / {:?}", a.err(), b.err());
            return Verdict {
                id: 9,
                name,
                pass: false,
                detail,
                report: Value::Null,
            };
        }
    };
    let e_coarse = s257.field.coarsen().max_diff(&s129.field);
    let e_fine = s513.field.coarsen().max_diff(&s257.field);
    let order = (e_coarse / e_fine).log2();
    Verdict {
        id: 9,
        name,
        pass: order >= 1.8,
        detail: format!(
            "|u129-u257| = {e_coarse:.3e}, |u257-u513| = {e_fine:.3e}, observed order {order:.3}"
        ),
        report: json!({"e_coarse": e_coarse, "e_fine": e_fine, "order": order,
                       "residuals": [s129.residual_norm, s257.residual_norm, s513.residual_norm]}),
    }
}

// ---------------------------------------------------------------- suite

fn run_1_to_8() -> (Vec<(Verdict, f64)>, Option<Pattern>) {
    let mut out = Vec::new();
    let timed = |f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let s = t.elapsed().as_secs_f64();
        (v, s)
    };
    let mut samples = Vec::new();
    out.push(timed(&mut || criterion_1(&mut samples)));
    out.push(timed(&mut || criterion_2(&samples)));
    out.push(timed(&mut || criterion_3(&samples)));
    out.push(timed(&mut criterion_4));
    out.push(timed(&mut criterion_5));
    out.push(timed(&mut criterion_6));
    out.push(timed(&mut criterion_7));
    let mut solution = None;
    out.push(timed(&mut || criterion_8(&mut solution)));
    (out, solution)
}

#[test]
fn acceptance() {
    let (first, solution) = run_1_to_8();
    for (v, s) in &first {
        print(v, *s);
    }
    let t = Instant::now();
    let v9 = criterion_9(&solution);
    print(&v9, t.elapsed().as_secs_f64());

    let t = Instant::now();
    let (second, _) = run_1_to_8();
    let differing: Vec<u32> = first
        .iter()
        .zip(&second)
        .filter(|((a, _), (b, _))| {
            serde_json::to_string(&a.report).unwrap() != serde_json::to_string(&b.report).unwrap()
        })
        .map(|((a, _), _)| a.id)
        .collect();
    let v10 = Verdict {
        id: 10,
        name: "determinism",
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            "criteria 1-8 reproduce byte-identical JSON reports".into()
        } else {
            format!("reports differ for criteria {differing:?}")
        },
        report: Value::Null,
    };
    print(&v10, t.elapsed().as_secs_f64());

    let failed: Vec<u32> = first
        .iter()
        .map(|(v, _)| v)
        .chain([&v9, &v10])
        .filter(|v| !v.pass)
        .map(|v| v.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
