//! Constant positive equilibria: the roots of `C(u) = c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{
    c_of_u, c_prime, classify_regime, phi1, psi1_prime, ModelParams, RegimeClass, RegimeTag,
};
use crate::roots::bisect;

/// Inward shrink applied to each monotone piece of `C` before bracketing.
pub const PIECE_SHRINK: f64 = 1e-12;

/// Relative band around a critical value of `C` inside which `c` counts as tangent.
pub const TANGENCY_TOL: f64 = 1e-10;

/// A constant positive steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub u: f64,
    pub v: f64,
    pub c_prime_at_u: f64,
    pub psi1_prime_at_u: f64,
}

impl Equilibrium {
    /// Builds the equilibrium at prey level `u`, deriving `v` and the slopes.
    pub fn at(u: f64, p: &ModelParams) -> Result<Self> {
        Ok(Self {
            u,
            v: v_from_u(u, p)?,
            c_prime_at_u: c_prime(u, p)?,
            psi1_prime_at_u: psi1_prime(u, p.alpha),
        })
    }
}

/// Predator level `(cφ1(u) - d)/(dβ)` paired with prey level `u`.
pub fn v_from_u(u: f64, p: &ModelParams) -> Result<f64> {
    let gain = p.c * phi1(u, p.alpha);
    if gain <= p.d {
        return Err(Error::NoPositivePredator { u });
    }
    Ok((gain - p.d) / (p.d * p.beta))
}

/// Which branch of the equilibrium-count rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountCase {
    /// `c ≤ d(1+α)`.
    NoEquilibrium,
    /// `C` is monotone on its domain.
    Unique,
    /// `β ≥ 4α/(1+α)²`, compared against `C(u0)`.
    CaseBHigh,
    /// `γ(α) ≤ β < 4α/(1+α)²`, compared against `C(u1)` and `C(u2)`.
    CaseBLow,
}

/// Predicted number of equilibria with the branch of the rule used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCount {
    pub count: usize,
    pub case: CountCase,
}

fn near(c: f64, critical: f64) -> bool {
    (c - critical).abs() < TANGENCY_TOL * c
}

/// Equilibrium count predicted from the regime and the position of `c`
/// relative to `d(1+α)` and the critical values of `C`.
pub fn expected_count(p: &ModelParams) -> ExpectedCount {
    expected_count_in(p, &classify_regime(p.alpha, p.beta, p.d))
}

fn expected_count_in(p: &ModelParams, regime: &RegimeClass) -> ExpectedCount {
    let c = p.c;
    if c <= p.d * (1.0 + p.alpha) {
        return ExpectedCount {
            count: 0,
            case: CountCase::NoEquilibrium,
        };
    }
    let crit = &regime.c_critical_values;
    match regime.tag {
        RegimeTag::A_GT_1_B_MID_HIGH => {
            let c0 = crit[0];
            let count = if near(c, c0) {
                2
            } else if c > c0 {
                3
            } else {
                1
            };
            ExpectedCount {
                count,
                case: CountCase::CaseBHigh,
            }
        }
        RegimeTag::A_GT_1_B_MID_LOW if crit.len() == 2 => {
            let (c1, c2) = (crit[0], crit[1]);
            let count = if near(c, c1) || near(c, c2) {
                2
            } else if c > c1 && c < c2 {
                3
            } else {
                1
            };
            ExpectedCount {
                count,
                case: CountCase::CaseBLow,
            }
        }
        RegimeTag::A_GT_1_B_MID_LOW => ExpectedCount {
            count: 1,
            case: CountCase::CaseBLow,
        },
        _ => ExpectedCount {
            count: 1,
            case: CountCase::Unique,
        },
    }
}

/// All constant positive equilibria, ascending in `u`.
///
/// The domain of `C` is cut at its critical points into pieces on which `C`
/// is strictly monotone; each piece holds at most one root of `C(u) = c`.
pub fn solve_equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    let regime = classify_regime(p.alpha, p.beta, p.d);
    if p.c <= p.d * (1.0 + p.alpha) {
        return Vec::new();
    }
    let mut roots: Vec<f64> = Vec::new();

    let mut pieces = Vec::new();
    for &(a, b) in &regime.domain_of_c {
        let mut left = a;
        for &z in &regime.c_critical_points {
            if z > a && z < b {
                pieces.push((left, z));
                left = z;
            }
        }
        pieces.push((left, b));
    }

    // Pieces adjacent to a tangent critical point contribute only that point.
    let tangent: Vec<f64> = regime
        .c_critical_points
        .iter()
        .zip(&regime.c_critical_values)
        .filter(|(_, &cz)| near(p.c, cz))
        .map(|(&z, _)| z)
        .collect();
    roots.extend(tangent.iter().copied());

    let residual = |u: f64| match c_of_u(u, p) {
        Ok(cu) => cu - p.c,
        // Pole of C at a zero of G or at u = 0.
        Err(_) => f64::INFINITY,
    };
    for (a, b) in pieces {
        if tangent.iter().any(|&z| z == a || z == b) {
            continue;
        }
        let lo = a + PIECE_SHRINK;
        let hi = b - PIECE_SHRINK;
        if hi <= lo {
            continue;
        }
        let (flo, fhi) = (residual(lo), residual(hi));
        if flo == 0.0 || fhi == 0.0 || flo.signum() != fhi.signum() {
            roots.push(bisect(residual, lo, hi));
        }
    }

    roots.sort_by(|x, y| x.total_cmp(y));
    roots
        .into_iter()
        .filter_map(|u| Equilibrium::at(u, p).ok())
        .collect()
}

/// Expected count together with the computed equilibria and a consistency flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub regime: RegimeClass,
    pub expected: ExpectedCount,
    pub equilibria: Vec<Equilibrium>,
    pub consistent: bool,
}

pub fn summarize(p: &ModelParams) -> EquilibriumSummary {
    let regime = classify_regime(p.alpha, p.beta, p.d);
    let expected = expected_count_in(p, &regime);
    let equilibria = solve_equilibria(p);
    let consistent = equilibria.len() == expected.count;
    EquilibriumSummary {
        regime,
        expected,
        equilibria,
        consistent,
    }
}
