//! Limit systems reached as the conversion rate `c` grows.
//!
//! With `w = cu` the prey equation degenerates and the constant steady state
//! is `(ŵ, v̂) = (d/(1-β), 1/(1-β))`. With `z = v/c` the large-prey branch
//! solves `ψ1(u) = 1/β` with `ẑ = φ1(û)/(dβ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{
    beta_tangency, phi1, phi1_prime, phi2, phi2_prime, psi1, Kinetics, ModelParams,
};
use crate::roots::bisect;
use crate::sim::{min_max, Field};

/// Constant steady states of the two limit systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEquilibria {
    pub wv_point: Option<(f64, f64)>,
    pub uz_points: Vec<(f64, f64)>,
}

/// `(d/(1-β), 1/(1-β))`, defined for `β < 1`.
pub fn limit_wv_equilibrium(beta: f64, d: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::LimitDomain(format!(
            "(w, v) limit needs 0 < beta < 1, got {beta}"
        )));
    }
    Ok((d / (1.0 - beta), 1.0 / (1.0 - beta)))
}

/// Roots `û` of `(1-u)(1+αu) = 1/β` with `ẑ = φ1(û)/(dβ)`, ascending in `û`.
///
/// Empty when `β < 4α/(1+α)²`; a single point at the tangency `β = 4α/(1+α)²`.
pub fn limit_uz_equilibria(alpha: f64, beta: f64, d: f64) -> Vec<(f64, f64)> {
    if alpha <= 1.0 || beta >= 1.0 {
        return Vec::new();
    }
    let vertex = (alpha - 1.0) / (2.0 * alpha);
    let point = |u: f64| (u, phi1(u, alpha) / (d * beta));
    let b_tan = beta_tangency(alpha);
    if (beta - b_tan).abs() <= crate::kinetics::REGIME_SNAP {
        return vec![point(vertex)];
    }
    if beta < b_tan {
        return Vec::new();
    }
    let f = |u: f64| psi1(u, alpha) - 1.0 / beta;
    vec![point(bisect(f, 0.0, vertex)), point(bisect(f, vertex, 1.0))]
}

pub fn limit_equilibria(alpha: f64, beta: f64, d: f64) -> LimitEquilibria {
    LimitEquilibria {
        wv_point: limit_wv_equilibrium(beta, d).ok(),
        uz_points: limit_uz_equilibria(alpha, beta, d),
    }
}

/// Distances of a solution at conversion rate `c` from the rescaled limit states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleDistances {
    /// `‖c·u - ŵ‖∞` and `‖v - v̂‖∞`.
    pub wv: Option<(f64, f64)>,
    /// `‖u - û_i‖∞` and `‖v/c - ẑ_i‖∞` for each uz point.
    pub uz: Vec<(f64, f64)>,
}

impl RescaleDistances {
    /// The uz point nearest the solution, as `(index, u distance, z distance)`.
    pub fn nearest_uz(&self) -> Option<(usize, f64, f64)> {
        self.uz
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(i, &(du, dz))| (i, du, dz))
    }
}

fn sup_dist(values: impl Iterator<Item = f64>, target: f64) -> f64 {
    values.fold(0.0, |m, x| m.max((x - target).abs()))
}

pub fn rescale_compare(field: &Field, p: &ModelParams) -> RescaleDistances {
    let wv = limit_wv_equilibrium(p.beta, p.d).ok().map(|(w, v)| {
        (
            sup_dist(field.u.iter().map(|u| p.c * u), w),
            sup_dist(field.v.iter().copied(), v),
        )
    });
    let uz = limit_uz_equilibria(p.alpha, p.beta, p.d)
        .into_iter()
        .map(|(u, z)| {
            (
                sup_dist(field.u.iter().copied(), u),
                sup_dist(field.v.iter().map(|v| v / p.c), z),
            )
        })
        .collect();
    RescaleDistances { wv, uz }
}

/// Kinetics of the `(w, v)` limit: `w_t = w - wφ2(v)`, `v_t = -dv + wφ2(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WvLimit {
    pub beta: f64,
    pub d: f64,
    /// Corner of the region used for the step-size bound.
    pub w_max: f64,
    pub v_max: f64,
}

impl WvLimit {
    /// Box sized at `box_factor` times the limit equilibrium.
    pub fn new(beta: f64, d: f64, box_factor: f64) -> Result<Self> {
        let (w, v) = limit_wv_equilibrium(beta, d)?;
        Ok(Self {
            beta,
            d,
            w_max: box_factor * w,
            v_max: box_factor * v,
        })
    }
}

impl Kinetics for WvLimit {
    fn rates(&self, w: f64, v: f64) -> (f64, f64) {
        let uptake = w * phi2(v, self.beta);
        (w - uptake, -self.d * v + uptake)
    }

    fn rate_jacobian(&self, w: f64, v: f64) -> [[f64; 2]; 2] {
        let f2 = phi2(v, self.beta);
        let f2p = phi2_prime(v, self.beta);
        [[1.0 - f2, -w * f2p], [f2, -self.d + w * f2p]]
    }

    fn invariant_box(&self) -> (f64, f64) {
        (self.w_max, self.v_max)
    }

    fn lipschitz_bound(&self) -> f64 {
        let b = 1.0 / self.beta;
        ((b - 1.0).max(1.0) + self.w_max).max(b + self.d + self.w_max)
    }
}

/// Kinetics of the `(u, z)` limit with `ρ = 0`: `u_t = u(1-u) - φ1(u)/β`, `z_t = -dz + φ1(u)/β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UzLimit {
    pub alpha: f64,
    pub beta: f64,
    pub d: f64,
}

impl Kinetics for UzLimit {
    fn rates(&self, u: f64, z: f64) -> (f64, f64) {
        let feed = phi1(u, self.alpha) / self.beta;
        (u * (1.0 - u) - feed, -self.d * z + feed)
    }

    fn rate_jacobian(&self, u: f64, _z: f64) -> [[f64; 2]; 2] {
        let fp = phi1_prime(u, self.alpha) / self.beta;
        [[1.0 - 2.0 * u - fp, 0.0], [fp, -self.d]]
    }

    fn invariant_box(&self) -> (f64, f64) {
        (1.0, 1.0 / (self.d * self.beta * (1.0 + self.alpha)))
    }

    fn lipschitz_bound(&self) -> f64 {
        (1.0 + 1.0 / self.beta).max(1.0 / self.beta + self.d)
    }
}

/// Whether `field` sits within `tol` of the constant state `(a, b)` in `‖·‖∞`.
pub fn near_constant(field: &Field, a: f64, b: f64, tol: f64) -> bool {
    let (ul, uh) = min_max(&field.u);
    let (vl, vh) = min_max(&field.v);
    (ul - a).abs().max((uh - a).abs()) < tol && (vl - b).abs().max((vh - b).abs()) < tol
}
