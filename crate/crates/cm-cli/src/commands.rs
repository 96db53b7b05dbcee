//! Subcommand implementations. Each writes its files into the output directory
//! and returns the invariant checks it performed.

use crowley_martin::equilibria::{summarize, Equilibrium, ExpectedCount};
use crowley_martin::kinetics::{
    beta_tangency, c_of_u, gamma_of_alpha, h_of_u, reaction, RegimeClass, RegimeTag,
};
use crowley_martin::sim::{
    init_field, init_field_from, random_field, run_until, run_with_lyapunov, Outcome, Perturbation,
    RunReport,
};
use crowley_martin::stability::{
    band_opening_d2, classify_stability, default_j_max, det_quadratic, dispersion,
    index_and_degree, jacobian, lambda_band, nonexistence_threshold, Band, DispersionRow,
    IndexReport, Jacobian2x2, NonexistenceThreshold, Stability,
};
use crowley_martin::steady::{
    distinct_solutions, mode_starts, multistart, seeded_starts, Classification, Start,
};
use crowley_martin::{solve_equilibria, Field, Kinetics, ModelParams, Problem};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{set_axis, InitialKind, RunConfig, StartKind};
use crate::error::CliError;
use crate::report::{num, Invariant, Output, Report};
use crate::svg::{line_plot, Series};

type CmdResult = Result<Vec<Invariant>, CliError>;

fn write_report<T: Serialize>(
    out: &mut Output,
    command: &str,
    cfg: &RunConfig,
    invariants: &[Invariant],
    results: T,
) -> Result<(), CliError> {
    let report = Report {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        invariants,
        results,
    };
    out.json(&format!("{command}.json"), &report)?;
    Ok(())
}

// ---------------------------------------------------------------- regimes

#[derive(Serialize)]
struct RegimeResults {
    regime: RegimeClass,
    expected: ExpectedCount,
    beta_tangency: f64,
    gamma: f64,
    c_threshold: f64,
}

/// Samples of `C` on each component of its domain, as `(branch, u, C(u))`.
fn c_curve(p: &ModelParams, regime: &RegimeClass, samples: usize) -> Vec<(usize, f64, f64)> {
    let samples = samples.max(2);
    let mut out = Vec::new();
    for (k, &(a, b)) in regime.domain_of_c.iter().enumerate() {
        let margin = 1e-3 * (b - a);
        for i in 0..samples {
            let u = a + margin + (b - a - 2.0 * margin) * i as f64 / (samples - 1) as f64;
            if let Ok(cu) = c_of_u(u, p) {
                out.push((k, u, cu));
            }
        }
    }
    out
}

pub fn regimes(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = &cfg.params;
    let summary = summarize(p);
    let regime = summary.regime;
    let c_threshold = p.d * (1.0 + p.alpha);

    let mut invariants = Vec::new();
    let h_max = regime
        .c_critical_points
        .iter()
        .map(|&z| h_of_u(z, p.alpha, p.beta).abs())
        .fold(0.0, f64::max);
    invariants.push(Invariant::new(
        "critical_points_zero_h",
        h_max <= 1e-8,
        format!("max |H| = {h_max:e}"),
    ));
    if matches!(
        regime.tag,
        RegimeTag::A_GT_1_B_MID_HIGH | RegimeTag::A_GT_1_B_MID_LOW
    ) {
        if let Some(&c_min) = regime.c_critical_values.first() {
            invariants.push(Invariant::new(
                "local_minimum_above_threshold",
                c_min > c_threshold,
                format!("C at first critical point {c_min} vs d(1+alpha) = {c_threshold}"),
            ));
        }
    }

    let curve = c_curve(p, &regime, cfg.regimes.samples);
    out.csv(
        "c_curve.csv",
        &["branch", "u", "c_of_u"],
        curve
            .iter()
            .map(|&(k, u, c)| vec![k.to_string(), num(u), num(c)]),
    )?;
    // Clip the poles so the shape stays visible.
    let finite_peak = regime
        .c_critical_values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(p.c, f64::max);
    let clip = 3.0 * finite_peak;
    let mut series = Vec::new();
    let labels: Vec<String> = (0..regime.domain_of_c.len())
        .map(|k| format!("C(u) branch {k}"))
        .collect();
    for (k, label) in labels.iter().enumerate() {
        let points = curve
            .iter()
            .filter(|s| s.0 == k)
            .map(|&(_, u, c)| (u, if c <= clip { c } else { f64::NAN }))
            .collect();
        series.push(Series { label, points });
    }
    series.push(Series {
        label: "c",
        points: vec![(0.0, p.c), (1.0, p.c)],
    });
    out.svg(
        "c_curve.svg",
        &line_plot(
            &format!("C(u), regime {}", regime.tag.as_str()),
            "u",
            "C(u)",
            &series,
        ),
    )?;

    let results = RegimeResults {
        regime,
        expected: summary.expected,
        beta_tangency: beta_tangency(p.alpha),
        gamma: gamma_of_alpha(p.alpha),
        c_threshold,
    };
    write_report(out, "regimes", cfg, &invariants, results)?;
    Ok(invariants)
}

// ---------------------------------------------------------------- equilibria

#[derive(Serialize)]
struct EquilibriumEntry {
    equilibrium: Equilibrium,
    jacobian: Jacobian2x2,
    reaction_residual: f64,
}

#[derive(Serialize)]
struct EquilibriaResults {
    regime: RegimeClass,
    expected_count: usize,
    expected: ExpectedCount,
    consistent: bool,
    equilibria: Vec<EquilibriumEntry>,
}

pub fn equilibria(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = &cfg.params;
    let summary = summarize(p);
    let entries: Vec<EquilibriumEntry> = summary
        .equilibria
        .iter()
        .map(|e| {
            let (f, g) = reaction(e.u, e.v, p);
            EquilibriumEntry {
                equilibrium: *e,
                jacobian: jacobian(e, p),
                reaction_residual: f.abs().max(g.abs()),
            }
        })
        .collect();
    let worst = entries
        .iter()
        .map(|e| e.reaction_residual)
        .fold(0.0, f64::max);
    let invariants = vec![
        Invariant::new(
            "count_matches_prediction",
            summary.consistent,
            format!(
                "expected {}, found {}",
                summary.expected.count,
                entries.len()
            ),
        ),
        Invariant::new(
            "equilibria_positive",
            entries
                .iter()
                .all(|e| e.equilibrium.u > 0.0 && e.equilibrium.v > 0.0),
            "",
        ),
        Invariant::new(
            "reaction_vanishes",
            worst <= 1e-8,
            format!("max |f|,|g| = {worst:e}"),
        ),
    ];
    out.csv(
        "equilibria.csv",
        &["u", "v", "trace", "det"],
        entries.iter().map(|e| {
            vec![
                num(e.equilibrium.u),
                num(e.equilibrium.v),
                num(e.jacobian.trace()),
                num(e.jacobian.det()),
            ]
        }),
    )?;
    let results = EquilibriaResults {
        regime: summary.regime,
        expected_count: summary.expected.count,
        expected: summary.expected,
        consistent: summary.consistent,
        equilibria: entries,
    };
    write_report(out, "equilibria", cfg, &invariants, results)?;
    Ok(invariants)
}

// ---------------------------------------------------------------- dispersion

#[derive(Serialize)]
struct DispersionEntry {
    equilibrium: Equilibrium,
    jacobian: Jacobian2x2,
    j_max: usize,
    stability: Stability,
    band: Band,
    band_opening_d2: Option<(f64, usize)>,
    rows: Vec<DispersionRow>,
}

pub fn dispersion_cmd(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = &cfg.params;
    let mut entries = Vec::new();
    let mut worst_det = 0.0_f64;
    for e in solve_equilibria(p) {
        let j_max = cfg.dispersion.j_max.unwrap_or_else(|| default_j_max(&e, p));
        let rows = dispersion(&e, p, j_max);
        let stability = classify_stability(&rows)?;
        let q = det_quadratic(&e, p);
        for r in &rows {
            let scale = q.a * r.mu_j * r.mu_j + q.b.abs() * r.mu_j + q.c.abs();
            worst_det =
                worst_det.max((r.det_qj - q.eval(r.mu_j)).abs() / scale.max(f64::MIN_POSITIVE));
        }
        entries.push(DispersionEntry {
            equilibrium: e,
            jacobian: jacobian(&e, p),
            j_max,
            stability,
            band: lambda_band(&e, p),
            band_opening_d2: band_opening_d2(&e, p),
            rows,
        });
    }
    let invariants = vec![Invariant::new(
        "det_rows_match_quadratic",
        worst_det <= 1e-12,
        format!("max relative gap {worst_det:e}"),
    )];
    out.csv(
        "dispersion.csv",
        &[
            "equilibrium",
            "j",
            "mu_j",
            "tr_qj",
            "det_qj",
            "max_re_lambda",
        ],
        entries.iter().enumerate().flat_map(|(k, e)| {
            e.rows.iter().map(move |r| {
                vec![
                    k.to_string(),
                    r.j.to_string(),
                    num(r.mu_j),
                    num(r.tr_qj),
                    num(r.det_qj),
                    num(r.max_re_lambda),
                ]
            })
        }),
    )?;
    let labels: Vec<String> = (0..entries.len())
        .map(|k| format!("equilibrium {k}"))
        .collect();
    let series: Vec<Series> = entries
        .iter()
        .zip(&labels)
        .map(|(e, label)| Series {
            label,
            points: e.rows.iter().map(|r| (r.mu_j, r.max_re_lambda)).collect(),
        })
        .collect();
    out.svg(
        "dispersion.svg",
        &line_plot("Dispersion relation", "mu_j", "max Re lambda", &series),
    )?;
    write_report(out, "dispersion", cfg, &invariants, entries)?;
    Ok(invariants)
}

// ---------------------------------------------------------------- simulate

fn initial_field(
    cfg: &RunConfig,
    p: &ModelParams,
    problem: &Problem<ModelParams>,
) -> Result<(Field, Option<Equilibrium>), CliError> {
    let init = &cfg.initial;
    let pert = Perturbation {
        modes: init.modes.clone(),
        amplitude: init.amplitude,
        seed: None,
    };
    match init.kind {
        InitialKind::Equilibrium => {
            let eqs = solve_equilibria(p);
            let e = *eqs.get(init.equilibrium_index).ok_or_else(|| {
                CliError::Usage(format!(
                    "initial.equilibrium_index = {} but only {} equilibria exist",
                    init.equilibrium_index,
                    eqs.len()
                ))
            })?;
            Ok((init_field(&problem.grid, &e, &pert)?, Some(e)))
        }
        InitialKind::Constant => Ok((init_field_from(&problem.grid, init.u, init.v, &pert)?, None)),
        InitialKind::Random => {
            let (ub, vb) = problem.kinetics.invariant_box();
            Ok((
                random_field(&problem.grid, (1e-3 * ub, ub), (1e-3 * vb, vb), cfg.seed),
                None,
            ))
        }
    }
}

#[derive(Serialize)]
struct SimulateResults {
    initial_equilibrium: Option<Equilibrium>,
    lyapunov_nonincreasing: Option<bool>,
    report: RunReport,
}

pub fn simulate(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = &cfg.params;
    let problem = Problem::crowley_martin(p, cfg.grid.n)?;
    let (field, base) = initial_field(cfg, p, &problem)?;
    let opts = cfg.run.options();
    let report = match &base {
        Some(e) => run_with_lyapunov(field, &problem, e, &opts)?,
        None => run_until(field, &problem, &opts)?,
    };
    let lyapunov_nonincreasing = report.lyapunov_trace.as_ref().map(|t| {
        t.windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0))
    });

    let f = &report.final_field;
    let mut invariants = vec![Invariant::new(
        "solution_positive",
        f.all_finite() && f.first_nonpositive().is_none(),
        "",
    )];
    if report.outcome.converged() {
        invariants.push(Invariant::new(
            "converged_rate_below_tolerance",
            report.rate_norm < opts.steady_tol,
            format!("rate norm {:e}", report.rate_norm),
        ));
    }

    let x = problem.grid.nodes();
    out.csv(
        "profile.csv",
        &["x", "u", "v"],
        (0..f.len()).map(|i| vec![num(x[i]), num(f.u[i]), num(f.v[i])]),
    )?;
    let series = [
        Series {
            label: "u",
            points: x.iter().copied().zip(f.u.iter().copied()).collect(),
        },
        Series {
            label: "v",
            points: x.iter().copied().zip(f.v.iter().copied()).collect(),
        },
    ];
    out.svg(
        "profile.svg",
        &line_plot(&format!("Profile at t = {:.3}", f.t), "x", "u, v", &series),
    )?;
    let blowup = report.outcome == Outcome::Blowup;
    let t = f.t;
    write_report(
        out,
        "simulate",
        cfg,
        &invariants,
        SimulateResults {
            initial_equilibrium: base,
            lyapunov_nonincreasing,
            report,
        },
    )?;
    if blowup {
        return Err(crowley_martin::Error::Blowup { t }.into());
    }
    Ok(invariants)
}

// ---------------------------------------------------------------- steady

#[derive(Serialize)]
struct StartFailure {
    label: String,
    error: String,
}

#[derive(Serialize)]
struct SolutionSummary {
    classification: Classification,
    residual_norm: f64,
    newton_iters: usize,
    bounds_ok: bool,
    quadratic_tail_constant: Option<f64>,
    u_range: (f64, f64),
    v_range: (f64, f64),
    field: Field,
}

#[derive(Serialize)]
struct SteadyResults {
    starts: usize,
    converged: usize,
    failures: Vec<StartFailure>,
    solutions: Vec<SolutionSummary>,
}

pub fn steady(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = &cfg.params;
    let problem = Problem::crowley_martin(p, cfg.grid.n)?;
    let eqs = solve_equilibria(p);
    let mut starts: Vec<Start> = Vec::new();
    if matches!(cfg.newton.starts, StartKind::Modes | StartKind::Both) {
        starts.extend(mode_starts(&problem, &eqs));
    }
    if matches!(cfg.newton.starts, StartKind::Seeded | StartKind::Both) {
        starts.extend(seeded_starts(&problem, cfg.newton.seeded_count, cfg.seed));
    }
    if starts.is_empty() {
        return Err(CliError::Usage(
            "no Newton starts: no unstable modes and newton.seeded_count = 0".into(),
        ));
    }
    let opts = cfg.newton.options();
    let results = multistart(&problem, &starts, &opts);
    let failures: Vec<StartFailure> = starts
        .iter()
        .zip(&results)
        .filter_map(|(s, r)| {
            r.as_ref().err().map(|e| StartFailure {
                label: s.label.clone(),
                error: e.to_string(),
            })
        })
        .collect();
    let converged = results.len() - failures.len();
    let distinct = distinct_solutions(&results);
    let solutions: Vec<SolutionSummary> = distinct
        .into_iter()
        .map(|s| SolutionSummary {
            classification: s.classification,
            residual_norm: s.residual_norm,
            newton_iters: s.newton_iters,
            bounds_ok: s.bounds_ok,
            quadratic_tail_constant: s.quadratic_tail_constant(),
            u_range: crowley_martin::sim::min_max(&s.field.u),
            v_range: crowley_martin::sim::min_max(&s.field.v),
            field: s.field,
        })
        .collect();
    let invariants = vec![
        Invariant::new(
            "solutions_within_bounds",
            solutions.iter().all(|s| s.bounds_ok),
            format!("{} distinct solutions", solutions.len()),
        ),
        Invariant::new(
            "residual_below_tolerance",
            solutions.iter().all(|s| s.residual_norm <= opts.tol),
            "",
        ),
    ];

    let x = problem.grid.nodes();
    for (k, s) in solutions.iter().enumerate() {
        out.csv(
            &format!("steady_{k}.csv"),
            &["x", "u", "v"],
            (0..x.len()).map(|i| vec![num(x[i]), num(s.field.u[i]), num(s.field.v[i])]),
        )?;
    }
    let labels: Vec<String> = (0..solutions.len())
        .map(|k| format!("u, solution {k}"))
        .collect();
    let series: Vec<Series> = solutions
        .iter()
        .zip(&labels)
        .map(|(s, label)| Series {
            label,
            points: x.iter().copied().zip(s.field.u.iter().copied()).collect(),
        })
        .collect();
    out.svg("steady.svg", &line_plot("Steady states", "x", "u", &series))?;
    let none = converged == 0;
    write_report(
        out,
        "steady",
        cfg,
        &invariants,
        SteadyResults {
            starts: starts.len(),
            converged,
            failures,
            solutions,
        },
    )?;
    if none {
        return Err(crowley_martin::Error::NoConvergence {
            iterations: opts.max_iter,
            residual: f64::NAN,
        }
        .into());
    }
    Ok(invariants)
}

// ---------------------------------------------------------------- index

#[derive(Serialize)]
struct IndexResults {
    report: IndexReport,
    band_opening_d2: Vec<Option<(f64, usize)>>,
}

pub fn index(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = &cfg.params;
    let eqs = solve_equilibria(p);
    let report = index_and_degree(&eqs, p)?;
    let sum: i32 = report.entries.iter().map(|e| e.index).sum();
    let invariants = vec![
        Invariant::new(
            "one_entry_per_equilibrium",
            report.entries.len() == eqs.len(),
            "",
        ),
        Invariant::new(
            "degree_is_index_sum",
            sum == report.degree_sum,
            format!("sum {sum}"),
        ),
    ];
    let band_opening_d2 = eqs.iter().map(|e| band_opening_d2(e, p)).collect();
    write_report(
        out,
        "index",
        cfg,
        &invariants,
        IndexResults {
            report,
            band_opening_d2,
        },
    )?;
    Ok(invariants)
}

// ---------------------------------------------------------------- threshold

#[derive(Serialize)]
struct ThresholdResults {
    threshold: NonexistenceThreshold,
    d_star: f64,
    d1_above: bool,
    d2_above: bool,
    nonexistence_applies: bool,
}

pub fn threshold(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let p = &cfg.params;
    let t = nonexistence_threshold(p);
    let invariants = vec![Invariant::new(
        "d_star_positive",
        t.d_star.is_finite() && t.d_star > 0.0,
        "",
    )];
    let results = ThresholdResults {
        threshold: t,
        d_star: t.d_star,
        d1_above: p.d1 > t.d_star,
        d2_above: p.d2 > t.d_star,
        nonexistence_applies: p.d1 > t.d_star && p.d2 > t.d_star,
    };
    write_report(out, "threshold", cfg, &invariants, results)?;
    Ok(invariants)
}

// ---------------------------------------------------------------- sweep

#[derive(Serialize)]
struct SweepCell {
    x: f64,
    y: f64,
    expected_count: usize,
    count: usize,
    consistent: bool,
    stability: Vec<String>,
    outcome: Option<Outcome>,
    u_range: Option<(f64, f64)>,
    error: Option<String>,
}

fn stability_label(e: &Equilibrium, p: &ModelParams) -> String {
    let rows = dispersion(e, p, default_j_max(e, p));
    match classify_stability(&rows) {
        Ok(Stability::Stable) => "stable".into(),
        Ok(Stability::UnstableModes(m)) => {
            format!(
                "unstable:{}",
                m.iter()
                    .map(|j| j.to_string())
                    .collect::<Vec<_>>()
                    .join("/")
            )
        }
        Err(e) => format!("error:{e}"),
    }
}

fn sweep_cell(cfg: &RunConfig, x: f64, y: f64) -> SweepCell {
    let s = &cfg.sweep;
    let mut cell = SweepCell {
        x,
        y,
        expected_count: 0,
        count: 0,
        consistent: false,
        stability: Vec::new(),
        outcome: None,
        u_range: None,
        error: None,
    };
    let p = match set_axis(&cfg.params, &s.x_axis, x).and_then(|q| set_axis(&q, &s.y_axis, y)) {
        Some(q) => q,
        None => {
            cell.error = Some("unknown axis".into());
            return cell;
        }
    };
    if let Err(e) = p.validate() {
        cell.error = Some(e.to_string());
        return cell;
    }
    let summary = summarize(&p);
    cell.expected_count = summary.expected.count;
    cell.count = summary.equilibria.len();
    cell.consistent = summary.consistent;
    cell.stability = summary
        .equilibria
        .iter()
        .map(|e| stability_label(e, &p))
        .collect();
    if s.simulate {
        let run = Problem::crowley_martin(&p, cfg.grid.n)
            .map_err(CliError::from)
            .and_then(|problem| {
                let local = RunConfig {
                    params: p,
                    ..cfg.clone()
                };
                let (field, _) = initial_field(&local, &p, &problem)?;
                Ok(run_until(field, &problem, &cfg.run.options())?)
            });
        match run {
            Ok(r) => {
                cell.outcome = Some(r.outcome);
                cell.u_range = Some(crowley_martin::sim::min_max(&r.final_field.u));
            }
            Err(e) => cell.error = Some(e.to_string()),
        }
    }
    cell
}

pub fn sweep(cfg: &RunConfig, out: &mut Output) -> CmdResult {
    let s = &cfg.sweep;
    if s.x_values.is_empty() || s.y_values.is_empty() {
        return Err(CliError::Usage(
            "sweep.x_values and sweep.y_values must be nonempty".into(),
        ));
    }
    let points: Vec<(f64, f64)> = s
        .y_values
        .iter()
        .flat_map(|&y| s.x_values.iter().map(move |&x| (x, y)))
        .collect();
    let cells: Vec<SweepCell> = points
        .par_iter()
        .map(|&(x, y)| sweep_cell(cfg, x, y))
        .collect();
    let inconsistent: Vec<String> = cells
        .iter()
        .filter(|c| c.error.is_none() && !c.consistent)
        .map(|c| format!("({}, {})", c.x, c.y))
        .collect();
    let invariants = vec![Invariant::new(
        "counts_match_prediction",
        inconsistent.is_empty(),
        if inconsistent.is_empty() {
            String::new()
        } else {
            format!("inconsistent at {}", inconsistent.join(" "))
        },
    )];
    out.csv(
        "sweep.csv",
        &[
            s.x_axis.as_str(),
            s.y_axis.as_str(),
            "expected_count",
            "count",
            "consistent",
            "stability",
            "outcome",
            "error",
        ],
        cells.iter().map(|c| {
            vec![
                num(c.x),
                num(c.y),
                c.expected_count.to_string(),
                c.count.to_string(),
                c.consistent.to_string(),
                c.stability.join(" "),
                c.outcome.map_or(String::new(), |o| format!("{o:?}")),
                c.error.clone().unwrap_or_default(),
            ]
        }),
    )?;
    write_report(out, "sweep", cfg, &invariants, cells)?;
    Ok(invariants)
}
