//! Scalar building blocks of the rescaled Crowley-Martin system
//!
//! ```text
//! u_t = d1 u_xx + u(1 - u) - u v / ((1 + αu)(1 + βv))
//! v_t = d2 v_xx - d v + c u v / ((1 + αu)(1 + βv))
//! ```
//!
//! together with the classification of the five (α, β) regimes that govern
//! the shape of the equilibrium curve `C(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bisect, sample_knots, scan_roots};

/// Absolute width of the snapping band around regime boundaries.
pub const REGIME_SNAP: f64 = 1e-12;

/// Number of uniform samples used to bracket zeros of `G` and `H`.
const ROOT_SAMPLES: usize = 10_000;

/// The seven positive parameters of the rescaled model on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub d1: f64,
    pub d2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub d: f64,
    pub domain_length: f64,
}

impl ModelParams {
    pub fn new(
        d1: f64,
        d2: f64,
        alpha: f64,
        beta: f64,
        c: f64,
        d: f64,
        domain_length: f64,
    ) -> Result<Self> {
        let p = Self {
            d1,
            d2,
            alpha,
            beta,
            c,
            d,
            domain_length,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks that every field is finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("c", self.c),
            ("d", self.d),
            ("domain_length", self.domain_length),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Copy with a different conversion rate.
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    /// Copy with different diffusion rates.
    pub fn with_diffusion(mut self, d1: f64, d2: f64) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self
    }

    /// First nonzero Neumann eigenvalue `(π/L)²`.
    pub fn mu1(&self) -> f64 {
        (std::f64::consts::PI / self.domain_length).powi(2)
    }

    /// Upper bound `c/(dβ)` on the predator density.
    pub fn v_bound(&self) -> f64 {
        self.c / (self.d * self.beta)
    }
}

/// `φ1(u) = u/(1+αu)`.
pub fn phi1(u: f64, alpha: f64) -> f64 {
    u / (1.0 + alpha * u)
}

/// `φ1'(u) = 1/(1+αu)²`.
pub fn phi1_prime(u: f64, alpha: f64) -> f64 {
    (1.0 + alpha * u).powi(-2)
}

/// `φ2(v) = v/(1+βv)`.
pub fn phi2(v: f64, beta: f64) -> f64 {
    v / (1.0 + beta * v)
}

/// `φ2'(v) = 1/(1+βv)²`.
pub fn phi2_prime(v: f64, beta: f64) -> f64 {
    (1.0 + beta * v).powi(-2)
}

/// `ψ1(u) = (1-u)(1+αu)`.
pub fn psi1(u: f64, alpha: f64) -> f64 {
    (1.0 - u) * (1.0 + alpha * u)
}

/// `ψ1'(u) = α - 1 - 2αu`.
pub fn psi1_prime(u: f64, alpha: f64) -> f64 {
    alpha - 1.0 - 2.0 * alpha * u
}

/// `ψ2(v) = -d(1+βv)`.
pub fn psi2(v: f64, beta: f64, d: f64) -> f64 {
    -d * (1.0 + beta * v)
}

/// Crowley-Martin functional response `u/((1+αu)(1+βv))`.
pub fn functional_response(u: f64, v: f64, p: &ModelParams) -> f64 {
    u / ((1.0 + p.alpha * u) * (1.0 + p.beta * v))
}

/// Reaction terms `(f, g)` of the model.
pub fn reaction(u: f64, v: f64, p: &ModelParams) -> (f64, f64) {
    let uptake = v * functional_response(u, v, p);
    (u * (1.0 - u) - uptake, -p.d * v + p.c * uptake)
}

/// Reaction terms in the factored form `(φ1(ψ1-φ2), φ2(cφ1+ψ2))`.
pub fn reaction_factored(u: f64, v: f64, p: &ModelParams) -> (f64, f64) {
    let f1 = phi1(u, p.alpha);
    let f2 = phi2(v, p.beta);
    (
        f1 * (psi1(u, p.alpha) - f2),
        f2 * (p.c * f1 + psi2(v, p.beta, p.d)),
    )
}

/// `G(u) = 1/β - (1-u)(1+αu)`.
pub fn g_of_u(u: f64, alpha: f64, beta: f64) -> f64 {
    1.0 / beta - psi1(u, alpha)
}

fn require_domain(u: f64, g: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 && g > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { u })
    }
}

/// `C(u) = d(1+αu)/(βuG(u))`: the conversion rate that makes `u` an equilibrium.
pub fn c_of_u(u: f64, p: &ModelParams) -> Result<f64> {
    let g = g_of_u(u, p.alpha, p.beta);
    require_domain(u, g)?;
    Ok(p.d * (1.0 + p.alpha * u) / (p.beta * u * g))
}

/// `H(u) = -2α²u³ + α(α-4)u² + 2(α-1)u - (1/β - 1)`, the numerator of `C'`.
pub fn h_of_u(u: f64, alpha: f64, beta: f64) -> f64 {
    let a = alpha;
    ((-2.0 * a * a * u + a * (a - 4.0)) * u + 2.0 * (a - 1.0)) * u - (1.0 / beta - 1.0)
}

/// `C'(u) = dH(u)/(βu²G(u)²)`.
pub fn c_prime(u: f64, p: &ModelParams) -> Result<f64> {
    let g = g_of_u(u, p.alpha, p.beta);
    require_domain(u, g)?;
    Ok(p.d * h_of_u(u, p.alpha, p.beta) / (p.beta * u * u * g * g))
}

/// `γ(α) = 27α/((α-1)²(α+8) + 27α)`.
pub fn gamma_of_alpha(alpha: f64) -> f64 {
    27.0 * alpha / ((alpha - 1.0).powi(2) * (alpha + 8.0) + 27.0 * alpha)
}

/// `4α/(1+α)²`: the β at which the maximum of `ψ1` equals `1/β`.
pub fn beta_tangency(alpha: f64) -> f64 {
    4.0 * alpha / (1.0 + alpha).powi(2)
}

/// The five (α, β) regimes of the equilibrium curve `C(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum RegimeTag {
    /// `α ≤ 1`: `C` strictly decreasing on its domain.
    A_LE_1,
    /// `α > 1, β ≥ 1`: `C` strictly decreasing on `(u*, 1)`.
    A_GT_1_B_GE_1,
    /// `α > 1, 4α/(1+α)² ≤ β < 1`: two branches, local minimum `u0` on the left one.
    A_GT_1_B_MID_HIGH,
    /// `α > 1, γ(α) ≤ β < 4α/(1+α)²`: local min `u1` and local max `u2`.
    A_GT_1_B_MID_LOW,
    /// `α > 1, β < γ(α)`: `C` strictly decreasing on `(0, 1)`.
    A_GT_1_B_SMALL,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::A_LE_1 => "A_LE_1",
            RegimeTag::A_GT_1_B_GE_1 => "A_GT_1_B_GE_1",
            RegimeTag::A_GT_1_B_MID_HIGH => "A_GT_1_B_MID_HIGH",
            RegimeTag::A_GT_1_B_MID_LOW => "A_GT_1_B_MID_LOW",
            RegimeTag::A_GT_1_B_SMALL => "A_GT_1_B_SMALL",
        }
    }
}

/// Regime tag together with the geometry of `G` and `C` on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub tag: RegimeTag,
    /// Zeros of `G` in `(0, 1)`; a double zero is listed once.
    pub g_zeros: Vec<f64>,
    /// Zeros of `C'` (equivalently of `H`) inside the domain of `C`, ascending.
    pub c_critical_points: Vec<f64>,
    /// `C` evaluated at each critical point.
    pub c_critical_values: Vec<f64>,
    /// Open intervals whose union is `{u ∈ (0,1) : G(u) > 0}`.
    pub domain_of_c: Vec<(f64, f64)>,
    /// True when β was within [`REGIME_SNAP`] of a regime boundary and snapped onto it.
    pub snapped: bool,
}

impl RegimeClass {
    /// Whether `u` lies in the (open) domain of `C`.
    pub fn in_domain(&self, u: f64) -> bool {
        self.domain_of_c.iter().any(|&(a, b)| u > a && u < b)
    }
}

fn snap(value: f64, target: f64) -> Option<f64> {
    ((value - target).abs() <= REGIME_SNAP).then_some(target)
}

/// Assigns the regime and computes zeros of `G`, critical points of `C` and the domain of `C`.
///
/// β within [`REGIME_SNAP`] of a boundary is moved onto it and classified as
/// the closed-side case, so the classification is discontinuous there.
pub fn classify_regime(alpha: f64, beta: f64, d: f64) -> RegimeClass {
    let alpha_le_1 = alpha <= 1.0 || snap(alpha, 1.0).is_some();
    let mut beta = beta;
    let mut snapped = false;
    let tag = if alpha_le_1 {
        if let Some(b) = snap(beta, 1.0) {
            snapped = b != beta;
            beta = b;
        }
        RegimeTag::A_LE_1
    } else {
        let b_tan = beta_tangency(alpha);
        let gamma = gamma_of_alpha(alpha);
        for target in [1.0, b_tan, gamma] {
            if let Some(b) = snap(beta, target) {
                snapped = b != beta;
                beta = b;
                break;
            }
        }
        if beta >= 1.0 {
            RegimeTag::A_GT_1_B_GE_1
        } else if beta >= b_tan {
            RegimeTag::A_GT_1_B_MID_HIGH
        } else if beta >= gamma {
            RegimeTag::A_GT_1_B_MID_LOW
        } else {
            RegimeTag::A_GT_1_B_SMALL
        }
    };

    let vertex = (alpha - 1.0) / (2.0 * alpha);
    let inflection = (alpha - 1.0) / (3.0 * alpha);
    let g = |u: f64| g_of_u(u, alpha, beta);
    let g_zeros: Vec<f64> = if tag == RegimeTag::A_GT_1_B_MID_HIGH && beta == beta_tangency(alpha) {
        vec![vertex]
    } else if tag == RegimeTag::A_GT_1_B_MID_HIGH {
        // Both zeros straddle the vertex, where G is negative.
        vec![bisect(g, 0.0, vertex), bisect(g, vertex, 1.0)]
    } else {
        let knots = sample_knots(0.0, 1.0, ROOT_SAMPLES, &[vertex]);
        scan_roots(g, &knots)
            .into_iter()
            .filter(|&z| z > 0.0 && z < 1.0)
            .collect()
    };

    let mut cuts = vec![0.0];
    cuts.extend(g_zeros.iter().copied());
    cuts.push(1.0);
    let domain_of_c: Vec<(f64, f64)> = cuts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(a, b)| b > a && g(0.5 * (a + b)) > 0.0)
        .collect();

    let h = |u: f64| h_of_u(u, alpha, beta);
    let c_critical_points: Vec<f64> = match tag {
        RegimeTag::A_GT_1_B_MID_LOW if beta == gamma_of_alpha(alpha) => vec![inflection],
        RegimeTag::A_GT_1_B_MID_LOW | RegimeTag::A_GT_1_B_MID_HIGH => {
            let mut found = Vec::new();
            for &(a, b) in &domain_of_c {
                let knots = sample_knots(a, b, ROOT_SAMPLES, &[inflection, vertex]);
                found.extend(
                    scan_roots(h, &knots)
                        .into_iter()
                        .filter(|&z| z > a && z < b),
                );
            }
            found
        }
        _ => Vec::new(),
    };

    let shape = ModelParams {
        d1: 1.0,
        d2: 1.0,
        alpha,
        beta,
        c: 1.0,
        d,
        domain_length: 1.0,
    };
    let c_critical_values = c_critical_points
        .iter()
        .map(|&u| c_of_u(u, &shape).unwrap_or(f64::INFINITY))
        .collect();

    RegimeClass {
        tag,
        g_zeros,
        c_critical_points,
        c_critical_values,
        domain_of_c,
        snapped,
    }
}

/// Reaction kinetics plugged into the simulator and the steady-state solver.
pub trait Kinetics: Sync {
    /// Reaction rates at one node.
    fn rates(&self, u: f64, v: f64) -> (f64, f64);

    /// Jacobian `[[∂f/∂u, ∂f/∂v], [∂g/∂u, ∂g/∂v]]` of [`Kinetics::rates`].
    fn rate_jacobian(&self, u: f64, v: f64) -> [[f64; 2]; 2];

    /// Upper corner of the region in which the dynamics of interest live.
    fn invariant_box(&self) -> (f64, f64);

    /// Bound on the row-sum norm of the Jacobian over [`Kinetics::invariant_box`].
    fn lipschitz_bound(&self) -> f64;
}

impl Kinetics for ModelParams {
    fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        reaction(u, v, self)
    }

    fn rate_jacobian(&self, u: f64, v: f64) -> [[f64; 2]; 2] {
        let (a, b) = (self.alpha, self.beta);
        let f1 = phi1(u, a);
        let f2 = phi2(v, b);
        let f1p = phi1_prime(u, a);
        let f2p = phi2_prime(v, b);
        [
            [1.0 - 2.0 * u - f1p * f2, -f1 * f2p],
            [self.c * f1p * f2, -self.d + self.c * f1 * f2p],
        ]
    }

    fn invariant_box(&self) -> (f64, f64) {
        (1.0, self.v_bound())
    }

    fn lipschitz_bound(&self) -> f64 {
        // Row sums over [0,1]×[0,c/(dβ)]: |f_u| ≤ 1+1/β, |f_v| ≤ 1, |g_u| ≤ c/β, |g_v| ≤ d+c.
        (2.0 + 1.0 / self.beta).max(self.c / self.beta + self.d + self.c)
    }
}

/// Kinetics with both rates identically zero (pure diffusion).
#[derive(Debug, Clone, Copy, Default)]
pub struct NoReaction;

impl Kinetics for NoReaction {
    fn rates(&self, _u: f64, _v: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn rate_jacobian(&self, _u: f64, _v: f64) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }

    fn invariant_box(&self) -> (f64, f64) {
        (f64::INFINITY, f64::INFINITY)
    }

    fn lipschitz_bound(&self) -> f64 {
        0.0
    }
}
