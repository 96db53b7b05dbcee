//! Linearisation at constant equilibria over the Neumann spectrum of `[0, L]`.

use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::kinetics::{phi1, phi1_prime, phi2, phi2_prime, ModelParams};

/// Distance from a band edge below which a Neumann eigenvalue counts as on the edge.
pub const BAND_EDGE_TOL: f64 = 1e-10;

/// Smallest default mode cutoff.
pub const MIN_J_MAX: usize = 16;

/// Reaction Jacobian at a constant equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2x2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Jacobian2x2 {
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }
}

/// Jacobian in the factored form `[[φ1ψ1', -φ1φ2'], [cφ2φ1', -dβφ2]]`,
/// valid at equilibria where `φ2(v) = ψ1(u)` and `cφ1(u) = d(1+βv)`.
pub fn jacobian(e: &Equilibrium, p: &ModelParams) -> Jacobian2x2 {
    let f1 = phi1(e.u, p.alpha);
    let f2 = phi2(e.v, p.beta);
    Jacobian2x2 {
        a11: f1 * e.psi1_prime_at_u,
        a12: -f1 * phi2_prime(e.v, p.beta),
        a21: p.c * f2 * phi1_prime(e.u, p.alpha),
        a22: -p.d * p.beta * f2,
    }
}

/// `Det = φ1φ2(-dβψ1' + cφ1'φ2')`, the determinant written without cancellation-prone products.
pub fn jacobian_det_factored(e: &Equilibrium, p: &ModelParams) -> f64 {
    phi1(e.u, p.alpha)
        * phi2(e.v, p.beta)
        * (-p.d * p.beta * e.psi1_prime_at_u
            + p.c * phi1_prime(e.u, p.alpha) * phi2_prime(e.v, p.beta))
}

/// Neumann eigenvalues `(j, (jπ/L)²)` for `j = 0..=j_max`.
pub fn neumann_spectrum(length: f64, j_max: usize) -> Vec<(usize, f64)> {
    (0..=j_max)
        .map(|j| (j, mode_eigenvalue(length, j)))
        .collect()
}

pub fn mode_eigenvalue(length: f64, j: usize) -> f64 {
    (j as f64 * std::f64::consts::PI / length).powi(2)
}

/// Coefficients of `Det Q(μ) = aμ² + bμ + c`, which is also the band polynomial `H_i(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quadratic {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn vertex(&self) -> f64 {
        -self.b / (2.0 * self.a)
    }

    /// Real roots in ascending order, computed without cancellation.
    pub fn real_roots(&self) -> Option<(f64, f64)> {
        let disc = self.b * self.b - 4.0 * self.a * self.c;
        if disc < 0.0 {
            return None;
        }
        let q = -0.5 * (self.b + self.b.signum() * disc.sqrt());
        if q == 0.0 {
            return Some((0.0, 0.0));
        }
        let (r1, r2) = (q / self.a, self.c / q);
        Some((r1.min(r2), r1.max(r2)))
    }
}

/// `Det Q_j` as a polynomial in the eigenvalue `μ`.
pub fn det_quadratic(e: &Equilibrium, p: &ModelParams) -> Quadratic {
    let j = jacobian(e, p);
    Quadratic {
        a: p.d1 * p.d2,
        b: -(p.d1 * j.a22 + p.d2 * j.a11),
        c: j.det(),
    }
}

/// Stability data of one Neumann mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub j: usize,
    pub mu_j: f64,
    pub tr_qj: f64,
    pub det_qj: f64,
    pub max_re_lambda: f64,
}

/// Largest real part among the roots of `λ² - tr λ + det = 0`.
pub fn max_re_lambda(tr: f64, det: f64) -> f64 {
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return 0.5 * tr;
    }
    let big = 0.5 * (tr + tr.signum() * disc.sqrt());
    if big == 0.0 {
        return 0.0;
    }
    big.max(det / big)
}

/// One row per mode `j = 0..=j_max`.
pub fn dispersion(e: &Equilibrium, p: &ModelParams, j_max: usize) -> Vec<DispersionRow> {
    let jac = jacobian(e, p);
    let det0 = jac.det();
    neumann_spectrum(p.domain_length, j_max)
        .into_iter()
        .map(|(j, mu)| {
            let tr = -(p.d1 + p.d2) * mu + jac.a11 + jac.a22;
            let det = if j == 0 {
                det0
            } else {
                p.d1 * p.d2 * mu * mu - (p.d1 * jac.a22 + p.d2 * jac.a11) * mu + det0
            };
            DispersionRow {
                j,
                mu_j: mu,
                tr_qj: tr,
                det_qj: det,
                max_re_lambda: max_re_lambda(tr, det),
            }
        })
        .collect()
}

/// Smallest `j ≥ 16` with `μ_j` beyond twice the vertex of `Det Q`.
pub fn default_j_max(e: &Equilibrium, p: &ModelParams) -> usize {
    let vertex = det_quadratic(e, p).vertex();
    let mut j = MIN_J_MAX;
    while mode_eigenvalue(p.domain_length, j) <= 2.0 * vertex {
        j += 1;
    }
    j
}

/// Linear stability verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    UnstableModes(Vec<usize>),
}

/// Stable iff every mode has `Tr Q_j < 0` and `Det Q_j > 0`.
///
/// `Tr Q_j` decreases in `μ` and `Det Q_j` increases past its vertex, so the
/// rows must reach beyond the vertex, which is recovered by interpolating
/// the first three rows.
pub fn classify_stability(rows: &[DispersionRow]) -> Result<Stability> {
    let j_max = rows.last().map_or(0, |r| r.j);
    if rows.len() < 3 {
        return Err(Error::InsufficientModes {
            j_max,
            vertex: f64::NAN,
        });
    }
    let (r0, r1, r2) = (&rows[0], &rows[1], &rows[2]);
    let s01 = (r1.det_qj - r0.det_qj) / (r1.mu_j - r0.mu_j);
    let s12 = (r2.det_qj - r1.det_qj) / (r2.mu_j - r1.mu_j);
    let a = (s12 - s01) / (r2.mu_j - r0.mu_j);
    let b = s01 - a * (r0.mu_j + r1.mu_j);
    let vertex = -b / (2.0 * a);
    let last_mu = rows[rows.len() - 1].mu_j;
    if a <= 0.0 || last_mu <= vertex {
        return Err(Error::InsufficientModes { j_max, vertex });
    }
    let unstable: Vec<usize> = rows
        .iter()
        .filter(|r| !(r.tr_qj < 0.0 && r.det_qj > 0.0))
        .map(|r| r.j)
        .collect();
    Ok(if unstable.is_empty() {
        Stability::Stable
    } else {
        Stability::UnstableModes(unstable)
    })
}

/// Roots of the band polynomial `H_i(λ) = Det Q(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    NoBand,
    Band { lambda_minus: f64, lambda_plus: f64 },
}

pub fn lambda_band(e: &Equilibrium, p: &ModelParams) -> Band {
    match det_quadratic(e, p).real_roots() {
        Some((lambda_minus, lambda_plus)) => Band::Band {
            lambda_minus,
            lambda_plus,
        },
        None => Band::NoBand,
    }
}

/// Smallest `d2` at which some mode `j ≥ 1` acquires `Det Q_j < 0`, with that mode.
///
/// `None` when no mode can destabilise (`φ1ψ1'/d1 ≤ μ1`, or `Det G_u ≤ 0`).
pub fn band_opening_d2(e: &Equilibrium, p: &ModelParams) -> Option<(f64, usize)> {
    let jac = jacobian(e, p);
    let det = jac.det();
    if det <= 0.0 {
        return None;
    }
    let mut best: Option<(f64, usize)> = None;
    let mut j = 1;
    loop {
        let mu = mode_eigenvalue(p.domain_length, j);
        let slope = p.d1 * mu * mu - jac.a11 * mu;
        if slope >= 0.0 {
            break;
        }
        let d2 = (p.d1 * jac.a22 * mu - det) / slope;
        if best.is_none_or(|(b, _)| d2 < b) {
            best = Some((d2, j));
        }
        j += 1;
    }
    best
}

/// Index data of one equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub u: f64,
    pub v: f64,
    pub band: Band,
    pub gamma: usize,
    pub index: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub entries: Vec<IndexEntry>,
    pub degree_sum: i32,
    pub predicts_nonconstant: bool,
}

/// Number of Neumann eigenvalues strictly inside `(λ-, λ+) ∩ [0, ∞)`.
fn band_count(band: Band, length: f64) -> Result<usize> {
    let Band::Band {
        lambda_minus,
        lambda_plus,
    } = band
    else {
        return Ok(0);
    };
    let mut count = 0;
    for j in 0.. {
        let mu = mode_eigenvalue(length, j);
        if (mu - lambda_minus).abs() < BAND_EDGE_TOL || (mu - lambda_plus).abs() < BAND_EDGE_TOL {
            return Err(Error::EigenvalueOnBandBoundary { j, mu });
        }
        if mu >= lambda_plus {
            break;
        }
        if mu > lambda_minus {
            count += 1;
        }
    }
    Ok(count)
}

/// Per-equilibrium indices `(-1)^γ_i` and their sum.
///
/// A sum different from 1 forces a nonconstant steady state.
pub fn index_and_degree(equilibria: &[Equilibrium], p: &ModelParams) -> Result<IndexReport> {
    let mut entries = Vec::with_capacity(equilibria.len());
    for e in equilibria {
        let band = lambda_band(e, p);
        let gamma = band_count(band, p.domain_length)?;
        let index = if gamma % 2 == 0 { 1 } else { -1 };
        entries.push(IndexEntry {
            u: e.u,
            v: e.v,
            band,
            gamma,
            index,
        });
    }
    let degree_sum = entries.iter().map(|e| e.index).sum();
    Ok(IndexReport {
        entries,
        degree_sum,
        predicts_nonconstant: degree_sum != 1,
    })
}

/// Diffusion level above which no nonconstant steady state exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceThreshold {
    pub a: f64,
    pub b: f64,
    pub mu1: f64,
    pub d_star: f64,
}

/// `d* = max(A, B)/μ1` with `A = 3/2 + cα/d + c²/(2d)` and `B = c/(1+α) + c²/(2d) + 1/2`.
pub fn nonexistence_threshold(p: &ModelParams) -> NonexistenceThreshold {
    let c2 = p.c * p.c / (2.0 * p.d);
    let a = 1.5 + p.c * p.alpha / p.d + c2;
    let b = p.c / (1.0 + p.alpha) + c2 + 0.5;
    let mu1 = p.mu1();
    NonexistenceThreshold {
        a,
        b,
        mu1,
        d_star: a.max(b) / mu1,
    }
}
