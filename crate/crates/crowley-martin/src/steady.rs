//! Damped Newton solver for discrete steady states `d·Δh w + R(w) = 0`.
//!
//! Unknowns are interleaved as `(u_0, v_0, u_1, v_1, ...)`, so the Jacobian is
//! block tridiagonal with 2×2 blocks: diagonal diffusion couplings off the
//! diagonal and the reaction Jacobian minus `2D/dx²` on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::kinetics::{Kinetics, ModelParams};
use crate::sim::{is_constant, random_field, Field, Problem};
use crate::stability::{classify_stability, default_j_max, dispersion, Stability};

/// Amplitudes (relative to the equilibrium levels) of multi-start perturbations.
pub const START_AMPLITUDES: [f64; 3] = [0.01, 0.05, 0.1];

/// `‖·‖∞` distance below which two solutions are treated as the same.
pub const DEDUP_TOL: f64 = 1e-6;

/// Slack on the a priori box when certifying a solution.
pub const BOUNDS_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Iterates must stay inside `(0, box_scale·U) × (0, box_scale·V)` of the invariant box.
    pub box_scale: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            max_halvings: 30,
            box_scale: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Constant,
    Nonconstant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyResult {
    pub field: Field,
    pub residual_norm: f64,
    pub newton_iters: usize,
    pub classification: Classification,
    pub bounds_ok: bool,
    /// `‖R‖∞` before each iteration and at the end.
    pub residual_history: Vec<f64>,
}

impl SteadyResult {
    /// Largest `r_{k+1}/r_k²` over the last three residuals, if there are three.
    pub fn quadratic_tail_constant(&self) -> Option<f64> {
        let h = &self.residual_history;
        if h.len() < 3 {
            return None;
        }
        let t = &h[h.len() - 3..];
        Some((t[1] / (t[0] * t[0])).max(t[2] / (t[1] * t[1])))
    }
}

/// Constant iff both components vary by at most `1e-6` of their maximum (closed threshold).
pub fn classify_solution(field: &Field) -> Classification {
    if is_constant(field) {
        Classification::Constant
    } else {
        Classification::Nonconstant
    }
}

/// Interleaved residual `(d1Δh u + f, d2Δh v + g)` at every node.
pub fn residual<K: Kinetics>(field: &Field, problem: &Problem<K>) -> Vec<f64> {
    let (du, dv) = problem.time_derivative(field);
    du.into_iter().zip(dv).flat_map(|(a, b)| [a, b]).collect()
}

fn sup_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2_norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

type Block = [[f64; 2]; 2];

fn inverse(b: &Block) -> Option<Block> {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let scale = b.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(det.is_finite() && det.abs() > 1e-14 * scale * scale) {
        return None;
    }
    let inv = 1.0 / det;
    Some([
        [b[1][1] * inv, -b[0][1] * inv],
        [-b[1][0] * inv, b[0][0] * inv],
    ])
}

fn mat_vec(b: &Block, x: [f64; 2]) -> [f64; 2] {
    [
        b[0][0] * x[0] + b[0][1] * x[1],
        b[1][0] * x[0] + b[1][1] * x[1],
    ]
}

/// Solves `J δ = rhs` for the block-tridiagonal Newton matrix at `field`.
fn newton_direction<K: Kinetics>(
    field: &Field,
    problem: &Problem<K>,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = field.len();
    let h2 = problem.grid.dx * problem.grid.dx;
    let (ku, kv) = (problem.d1 / h2, problem.d2 / h2);
    // Lower and upper couplings are diagonal: only their (u, v) weights are stored.
    let lower = |i: usize| {
        if i == n - 1 {
            [2.0 * ku, 2.0 * kv]
        } else {
            [ku, kv]
        }
    };
    let upper = |i: usize| {
        if i == 0 {
            [2.0 * ku, 2.0 * kv]
        } else {
            [ku, kv]
        }
    };

    let mut cp: Vec<Block> = Vec::with_capacity(n);
    let mut yp: Vec<[f64; 2]> = Vec::with_capacity(n);
    for i in 0..n {
        let r = problem.kinetics.rate_jacobian(field.u[i], field.v[i]);
        let mut b = [[r[0][0] - 2.0 * ku, r[0][1]], [r[1][0], r[1][1] - 2.0 * kv]];
        let mut y = [rhs[2 * i], rhs[2 * i + 1]];
        if i > 0 {
            let a = lower(i);
            let prev = &cp[i - 1];
            for row in 0..2 {
                for col in 0..2 {
                    b[row][col] -= a[row] * prev[row][col];
                }
                y[row] -= a[row] * yp[i - 1][row];
            }
        }
        let inv = inverse(&b).ok_or(Error::SingularJacobian { node: i })?;
        let c = upper(i);
        cp.push([
            [inv[0][0] * c[0], inv[0][1] * c[1]],
            [inv[1][0] * c[0], inv[1][1] * c[1]],
        ]);
        yp.push(mat_vec(&inv, y));
    }
    let mut x = vec![[0.0; 2]; n];
    x[n - 1] = yp[n - 1];
    for i in (0..n - 1).rev() {
        let corr = mat_vec(&cp[i], x[i + 1]);
        x[i] = [yp[i][0] - corr[0], yp[i][1] - corr[1]];
    }
    let out: Vec<f64> = x.into_iter().flatten().collect();
    if out.iter().all(|d| d.is_finite()) {
        Ok(out)
    } else {
        Err(Error::SingularJacobian { node: n - 1 })
    }
}

fn inside_box(field: &Field, limits: (f64, f64)) -> bool {
    field.u.iter().all(|&u| u > 0.0 && u < limits.0)
        && field.v.iter().all(|&v| v > 0.0 && v < limits.1)
}

/// Whether every node lies in `(0, U+slack] × (0, V+slack]` of the invariant box.
pub fn within_bounds<K: Kinetics>(field: &Field, problem: &Problem<K>) -> bool {
    let (ub, vb) = problem.kinetics.invariant_box();
    field.u.iter().all(|&u| u > 0.0 && u <= ub + BOUNDS_SLACK)
        && field.v.iter().all(|&v| v > 0.0 && v <= vb + BOUNDS_SLACK)
}

/// Damped Newton iteration from `initial` until `‖R‖∞ < opts.tol`.
pub fn newton_solve<K: Kinetics>(
    initial: &Field,
    problem: &Problem<K>,
    opts: &NewtonOptions,
) -> Result<SteadyResult> {
    if initial.len() != problem.grid.n {
        return Err(Error::LengthMismatch {
            expected: problem.grid.n,
            got: initial.len(),
        });
    }
    if let Some(node) = initial.first_nonpositive() {
        return Err(Error::NonpositiveInitialData { node });
    }
    let (ub, vb) = problem.kinetics.invariant_box();
    let limits = (opts.box_scale * ub, opts.box_scale * vb);
    let mut field = Field {
        t: 0.0,
        ..initial.clone()
    };
    let mut r = residual(&field, problem);
    let mut history = vec![sup_norm(&r)];
    let mut iters = 0;
    while sup_norm(&r) >= opts.tol {
        if iters == opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: iters,
                residual: sup_norm(&r),
            });
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = newton_direction(&field, problem, &rhs)?;
        let r0 = l2_norm(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = Field {
                u: field
                    .u
                    .iter()
                    .enumerate()
                    .map(|(i, u)| u + lambda * delta[2 * i])
                    .collect(),
                v: field
                    .v
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v + lambda * delta[2 * i + 1])
                    .collect(),
                t: 0.0,
            };
            if inside_box(&trial, limits) {
                let rt = residual(&trial, problem);
                if l2_norm(&rt) < (1.0 - 1e-4 * lambda) * r0 {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((next, rn)) = accepted else {
            return Err(Error::NoConvergence {
                iterations: iters,
                residual: sup_norm(&r),
            });
        };
        field = next;
        r = rn;
        iters += 1;
        history.push(sup_norm(&r));
    }
    Ok(SteadyResult {
        classification: classify_solution(&field),
        bounds_ok: within_bounds(&field, problem),
        residual_norm: sup_norm(&r),
        newton_iters: iters,
        residual_history: history,
        field,
    })
}

/// A labelled Newton starting guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Start {
    pub label: String,
    pub field: Field,
}

/// Each equilibrium perturbed by `±a·cos(jπx/L)` (relative to its levels) along every
/// unstable mode `j ≥ 1`, for `a` in [`START_AMPLITUDES`].
pub fn mode_starts(problem: &Problem<ModelParams>, equilibria: &[Equilibrium]) -> Vec<Start> {
    let p = &problem.kinetics;
    let grid = &problem.grid;
    let mut starts = Vec::new();
    for (k, e) in equilibria.iter().enumerate() {
        let rows = dispersion(e, p, default_j_max(e, p));
        let modes = match classify_stability(&rows) {
            Ok(Stability::UnstableModes(m)) => m,
            _ => Vec::new(),
        };
        for &j in modes.iter().filter(|&&j| j >= 1) {
            let shape = grid.cos_mode(j);
            for a in START_AMPLITUDES {
                for sign in [1.0, -1.0] {
                    let s = sign * a;
                    starts.push(Start {
                        label: format!("eq{k}_mode{j}_{}{a}", if sign > 0.0 { "+" } else { "-" }),
                        field: Field {
                            u: shape.iter().map(|m| e.u * (1.0 + s * m)).collect(),
                            v: shape.iter().map(|m| e.v * (1.0 + s * m)).collect(),
                            t: 0.0,
                        },
                    });
                }
            }
        }
    }
    starts
}

/// `count` seeded random positive fields spread over the invariant box.
pub fn seeded_starts<K: Kinetics>(problem: &Problem<K>, count: usize, seed: u64) -> Vec<Start> {
    let (ub, vb) = problem.kinetics.invariant_box();
    (0..count)
        .map(|k| Start {
            label: format!("seed{seed}_{k}"),
            field: random_field(
                &problem.grid,
                (1e-3 * ub, ub),
                (1e-3 * vb, vb),
                seed.wrapping_add(k as u64),
            ),
        })
        .collect()
}

/// Newton solves from every start, in parallel, in the order given.
pub fn multistart<K: Kinetics>(
    problem: &Problem<K>,
    starts: &[Start],
    opts: &NewtonOptions,
) -> Vec<Result<SteadyResult>> {
    starts
        .par_iter()
        .map(|s| newton_solve(&s.field, problem, opts))
        .collect()
}

/// Converged results with duplicates (within [`DEDUP_TOL`]) removed, keeping first occurrences.
pub fn distinct_solutions(results: &[Result<SteadyResult>]) -> Vec<SteadyResult> {
    let mut out: Vec<SteadyResult> = Vec::new();
    for r in results.iter().flatten() {
        if !out.iter().any(|o| o.field.max_diff(&r.field) < DEDUP_TOL) {
            out.push(r.clone());
        }
    }
    out
}
