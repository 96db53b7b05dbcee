//! IMEX time stepping of the reaction-diffusion system on a Neumann interval.
//!
//! Each step solves `(I - dt·D·Δh) w^{n+1} = w^n + dt·R(w^n)` per component,
//! with `Δh` the ghost-mirrored second difference. For the Crowley-Martin
//! kinetics and `dt ≤ 0.4/Lip` the explicit reaction update keeps both
//! components positive, `u ≤ 1` and `v ≤ c/(dβ)`, and the implicit diffusion
//! solve (an M-matrix inverse) preserves all three.

mod grid;

pub use grid::{laplacian, min_max, range, Field, Grid, ImplicitDiffusion};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::kinetics::{Kinetics, ModelParams};

/// Fraction of the inverse Lipschitz bound used as the largest admissible step.
pub const DT_SAFETY: f64 = 0.4;

/// Relative spread below which a component counts as spatially constant.
pub const CONSTANCY_TOL: f64 = 1e-6;

/// A component whose maximum modulus is at most this has died out and counts as constant.
pub const VANISHING_TOL: f64 = 1e-8;

/// Diffusion rates, grid and kinetics of one reaction-diffusion problem.
#[derive(Debug, Clone)]
pub struct Problem<K> {
    pub grid: Grid,
    pub d1: f64,
    pub d2: f64,
    pub kinetics: K,
}

impl Problem<ModelParams> {
    /// The Crowley-Martin problem on `n` nodes over `[0, p.domain_length]`.
    pub fn crowley_martin(p: &ModelParams, n: usize) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            grid: Grid::new(n, p.domain_length)?,
            d1: p.d1,
            d2: p.d2,
            kinetics: *p,
        })
    }
}

impl<K: Kinetics> Problem<K> {
    pub fn new(grid: Grid, d1: f64, d2: f64, kinetics: K) -> Self {
        Self {
            grid,
            d1,
            d2,
            kinetics,
        }
    }

    /// `0.4/Lip`, infinite for kinetics without reaction.
    pub fn dt_max(&self) -> f64 {
        let lip = self.kinetics.lipschitz_bound();
        if lip > 0.0 {
            DT_SAFETY / lip
        } else {
            f64::INFINITY
        }
    }

    /// Time derivative `(d1Δh u + f, d2Δh v + g)` at every node.
    pub fn time_derivative(&self, field: &Field) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n;
        let mut du = vec![0.0; n];
        let mut dv = vec![0.0; n];
        laplacian(&field.u, self.grid.dx, &mut du);
        laplacian(&field.v, self.grid.dx, &mut dv);
        for i in 0..n {
            let (f, g) = self.kinetics.rates(field.u[i], field.v[i]);
            du[i] = self.d1 * du[i] + f;
            dv[i] = self.d2 * dv[i] + g;
        }
        (du, dv)
    }

    /// `‖∂_t(u, v)‖∞`.
    pub fn rate_norm(&self, field: &Field) -> f64 {
        let (du, dv) = self.time_derivative(field);
        du.iter().chain(&dv).fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Stepper with the implicit solves factored for a fixed `dt`.
    pub fn stepper(&self, dt: f64) -> Result<Stepper<'_, K>> {
        if !(dt > 0.0 && dt <= self.dt_max()) {
            return Err(Error::StepRejected {
                dt,
                reason: format!("outside (0, {}]", self.dt_max()),
            });
        }
        let n = self.grid.n;
        Ok(Stepper {
            problem: self,
            dt,
            solve_u: ImplicitDiffusion::new(n, self.grid.dx, dt * self.d1),
            solve_v: ImplicitDiffusion::new(n, self.grid.dx, dt * self.d2),
        })
    }
}

/// One fixed-`dt` IMEX integrator bound to a problem.
pub struct Stepper<'a, K> {
    problem: &'a Problem<K>,
    dt: f64,
    solve_u: ImplicitDiffusion,
    solve_v: ImplicitDiffusion,
}

impl<K: Kinetics> Stepper<'_, K> {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `field` by one step in place.
    pub fn step(&self, field: &mut Field) -> Result<()> {
        let kin = &self.problem.kinetics;
        for i in 0..field.u.len() {
            let (f, g) = kin.rates(field.u[i], field.v[i]);
            field.u[i] += self.dt * f;
            field.v[i] += self.dt * g;
        }
        self.solve_u.solve_in_place(&mut field.u);
        self.solve_v.solve_in_place(&mut field.v);
        field.t += self.dt;
        if let Some(node) = field
            .u
            .iter()
            .chain(&field.v)
            .position(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::StepRejected {
                dt: self.dt,
                reason: format!("negative or non-finite entry at index {node}"),
            });
        }
        Ok(())
    }
}

/// One IMEX step of the Crowley-Martin system, returning the new field.
pub fn step(field: &Field, dt: f64, p: &ModelParams) -> Result<Field> {
    let problem = Problem::crowley_martin(p, field.len())?;
    let mut next = field.clone();
    problem.stepper(dt)?.step(&mut next)?;
    Ok(next)
}

/// Modes and amplitude added to a constant state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub modes: Vec<usize>,
    pub amplitude: f64,
    /// When set, each mode gets a weight drawn uniformly from `[-1, 1]`.
    pub seed: Option<u64>,
}

impl Perturbation {
    pub fn none() -> Self {
        Self {
            modes: Vec::new(),
            amplitude: 0.0,
            seed: None,
        }
    }

    pub fn single(j: usize, amplitude: f64) -> Self {
        Self {
            modes: vec![j],
            amplitude,
            seed: None,
        }
    }

    fn profile(&self, grid: &Grid) -> Vec<f64> {
        let mut rng = self.seed.map(ChaCha8Rng::seed_from_u64);
        let mut out = vec![0.0; grid.n];
        for &j in &self.modes {
            let w = rng.as_mut().map_or(1.0, |r| r.random_range(-1.0..=1.0));
            for (o, m) in out.iter_mut().zip(grid.cos_mode(j)) {
                *o += self.amplitude * w * m;
            }
        }
        out
    }
}

/// Constant state plus `amplitude·Σ w_j cos(jπx/L)` added to both components.
pub fn init_field(grid: &Grid, e: &Equilibrium, perturbation: &Perturbation) -> Result<Field> {
    init_field_from(grid, e.u, e.v, perturbation)
}

pub fn init_field_from(grid: &Grid, u: f64, v: f64, perturbation: &Perturbation) -> Result<Field> {
    let delta = perturbation.profile(grid);
    let field = Field {
        u: delta.iter().map(|d| u + d).collect(),
        v: delta.iter().map(|d| v + d).collect(),
        t: 0.0,
    };
    match field.first_nonpositive() {
        Some(node) => Err(Error::NonpositiveInitialData { node }),
        None => Ok(field),
    }
}

/// Field from explicit nodal profiles.
pub fn field_from_profiles(grid: &Grid, u: Vec<f64>, v: Vec<f64>) -> Result<Field> {
    for len in [u.len(), v.len()] {
        if len != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                got: len,
            });
        }
    }
    let field = Field { u, v, t: 0.0 };
    match field.first_nonpositive() {
        Some(node) => Err(Error::NonpositiveInitialData { node }),
        None => Ok(field),
    }
}

/// Seeded random positive field with nodal values uniform in `(lo, hi)` per component,
/// smoothed by a few implicit diffusion sweeps so it is resolved on the grid.
pub fn random_field(grid: &Grid, u_range: (f64, f64), v_range: (f64, f64), seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..grid.n)
        .map(|_| rng.random_range(u_range.0..u_range.1))
        .collect();
    let mut v: Vec<f64> = (0..grid.n)
        .map(|_| rng.random_range(v_range.0..v_range.1))
        .collect();
    let smooth = ImplicitDiffusion::new(grid.n, grid.dx, 1e-3 * grid.length * grid.length);
    for _ in 0..4 {
        smooth.solve_in_place(&mut u);
        smooth.solve_in_place(&mut v);
    }
    Field { u, v, t: 0.0 }
}

/// Final state of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    ConvergedConstant,
    ConvergedNonconstant,
    TimedOut,
    Blowup,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        matches!(
            self,
            Outcome::ConvergedConstant | Outcome::ConvergedNonconstant
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub steady_tol: f64,
    pub t_max: f64,
    /// Step size; `None` uses [`Problem::dt_max`].
    pub dt: Option<f64>,
    /// Steps between convergence checks.
    pub check_every: usize,
    /// Steps between Lyapunov samples when a monitor is attached.
    pub monitor_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            steady_tol: 1e-8,
            t_max: 1e4,
            dt: None,
            check_every: 10,
            monitor_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub final_field: Field,
    pub rate_norm: f64,
    /// `max - min` of `u` and of `v` at the end of the run.
    pub constancy: (f64, f64),
    pub lyapunov_trace: Option<Vec<f64>>,
    pub steps: usize,
    pub dt: f64,
    /// Largest `u` and `v` seen at the convergence checks.
    pub max_seen: (f64, f64),
}

/// Whether both components vary by at most `1e-6` of their maximum (closed threshold).
/// A component below [`VANISHING_TOL`] everywhere, such as the predator near `(1, 0)`, is constant.
pub fn is_constant(field: &Field) -> bool {
    [&field.u, &field.v].into_iter().all(|c| {
        let (lo, hi) = min_max(c);
        let scale = hi.abs().max(lo.abs());
        scale <= VANISHING_TOL || hi - lo <= CONSTANCY_TOL * scale
    })
}

/// Integrates until `‖∂_t‖∞ < steady_tol` or `t > t_max`.
pub fn run_until<K: Kinetics>(
    field: Field,
    problem: &Problem<K>,
    opts: &RunOptions,
) -> Result<RunReport> {
    run_monitored(field, problem, opts, None::<fn(&Field) -> f64>)
}

/// Crowley-Martin run sampling the Lyapunov functional about `e` every `opts.monitor_every` steps.
pub fn run_with_lyapunov(
    field: Field,
    problem: &Problem<ModelParams>,
    e: &Equilibrium,
    opts: &RunOptions,
) -> Result<RunReport> {
    let p = problem.kinetics;
    let grid = problem.grid;
    run_monitored(
        field,
        problem,
        opts,
        Some(|f: &Field| lyapunov_value(f, e, &p, &grid).unwrap_or(f64::NAN)),
    )
}

fn run_monitored<K: Kinetics, M: Fn(&Field) -> f64>(
    mut field: Field,
    problem: &Problem<K>,
    opts: &RunOptions,
    monitor: Option<M>,
) -> Result<RunReport> {
    if let Some(node) = field.first_nonpositive() {
        return Err(Error::NonpositiveInitialData { node });
    }
    let dt = opts.dt.unwrap_or_else(|| problem.dt_max());
    let stepper = problem.stepper(dt)?;
    let mut trace = monitor.as_ref().map(|m| vec![m(&field)]);
    let mut max_seen = (min_max(&field.u).1, min_max(&field.v).1);
    let mut steps = 0usize;
    let check_every = opts.check_every.max(1);
    let monitor_every = opts.monitor_every.max(1);

    let finish = |field: Field, outcome, rate_norm, steps, trace, max_seen| RunReport {
        outcome,
        constancy: field.ranges(),
        final_field: field,
        rate_norm,
        lyapunov_trace: trace,
        steps,
        dt,
        max_seen,
    };

    loop {
        if steps.is_multiple_of(check_every) {
            if !field.all_finite() {
                return Ok(finish(
                    field,
                    Outcome::Blowup,
                    f64::NAN,
                    steps,
                    trace,
                    max_seen,
                ));
            }
            max_seen.0 = max_seen.0.max(min_max(&field.u).1);
            max_seen.1 = max_seen.1.max(min_max(&field.v).1);
            let rate = problem.rate_norm(&field);
            if rate < opts.steady_tol {
                let outcome = if is_constant(&field) {
                    Outcome::ConvergedConstant
                } else {
                    Outcome::ConvergedNonconstant
                };
                return Ok(finish(field, outcome, rate, steps, trace, max_seen));
            }
            if field.t > opts.t_max {
                return Ok(finish(
                    field,
                    Outcome::TimedOut,
                    rate,
                    steps,
                    trace,
                    max_seen,
                ));
            }
        }
        match stepper.step(&mut field) {
            Ok(()) => {}
            Err(_) if !field.all_finite() => {
                return Ok(finish(
                    field,
                    Outcome::Blowup,
                    f64::NAN,
                    steps,
                    trace,
                    max_seen,
                ));
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        if let (Some(m), Some(t)) = (monitor.as_ref(), trace.as_mut()) {
            if steps.is_multiple_of(monitor_every) {
                t.push(m(&field));
            }
        }
    }
}

/// `x - ln(1 + x)` without cancellation for small `x`.
fn x_minus_log1p(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // Alternating series x²/2 - x³/3 + x⁴/4 - x⁵/5 + ..., truncated past x⁸.
        let mut term = x * x;
        let mut sum = 0.0;
        for k in 2..=8 {
            sum += if k % 2 == 0 {
                term / k as f64
            } else {
                -term / k as f64
            };
            term *= x;
        }
        sum
    } else {
        x - x.ln_1p()
    }
}

/// Lyapunov functional about the constant equilibrium `e`,
///
/// ```text
/// V = ∫ c [(u-ũ) - ũ ln(u/ũ)]/(1+αũ) + [(v-ṽ) - ṽ ln(v/ṽ)]/(1+βṽ) dx,
/// ```
///
/// the closed form of `c∫∫_ũ^u (φ1(ξ)-φ1(ũ))/φ1(ξ) dξ dx + ∫∫_ṽ^v (φ2(η)-φ2(ṽ))/φ2(η) dη dx`
/// since `(φ1(ξ)-φ1(ũ))/φ1(ξ) = (ξ-ũ)/((1+αũ)ξ)`. The outer integral uses the trapezoid rule.
pub fn lyapunov_value(field: &Field, e: &Equilibrium, p: &ModelParams, grid: &Grid) -> Result<f64> {
    if let Some(node) = field.first_nonpositive() {
        return Err(Error::NonpositiveField { node });
    }
    let wu = p.c / (1.0 + p.alpha * e.u);
    let wv = 1.0 / (1.0 + p.beta * e.v);
    let density: Vec<f64> = field
        .u
        .iter()
        .zip(&field.v)
        .map(|(&u, &v)| {
            wu * e.u * x_minus_log1p(u / e.u - 1.0) + wv * e.v * x_minus_log1p(v / e.v - 1.0)
        })
        .collect();
    Ok(grid.integrate(&density))
}
