use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node-centred uniform grid on `[0, L]` with both endpoints as nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub length: f64,
    pub dx: f64,
}

impl Grid {
    pub const MIN_NODES: usize = 16;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < Self::MIN_NODES || !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid { n, length });
        }
        Ok(Self {
            n,
            length,
            dx: length / (n - 1) as f64,
        })
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoid quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Trapezoid integral of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum()
    }

    pub fn mean(&self, values: &[f64]) -> f64 {
        self.integrate(values) / self.length
    }

    /// Eigenvalue of the discrete Neumann Laplacian for the node-sampled mode `cos(jπx/L)`.
    pub fn discrete_eigenvalue(&self, j: usize) -> f64 {
        let s = (j as f64 * std::f64::consts::PI / (2.0 * (self.n - 1) as f64)).sin();
        4.0 * s * s / (self.dx * self.dx)
    }

    /// Nodal samples of `cos(jπx/L)`.
    pub fn cos_mode(&self, j: usize) -> Vec<f64> {
        (0..self.n)
            .map(|i| (j as f64 * std::f64::consts::PI * i as f64 / (self.n - 1) as f64).cos())
            .collect()
    }
}

/// Discrete Neumann Laplacian with mirrored ghost nodes; writes into `out`.
pub fn laplacian(values: &[f64], dx: f64, out: &mut [f64]) {
    let n = values.len();
    let inv = 1.0 / (dx * dx);
    out[0] = 2.0 * (values[1] - values[0]) * inv;
    for i in 1..n - 1 {
        out[i] = (values[i - 1] - 2.0 * values[i] + values[i + 1]) * inv;
    }
    out[n - 1] = 2.0 * (values[n - 2] - values[n - 1]) * inv;
}

/// Prey and predator profiles on a grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn constant(n: usize, u: f64, v: f64) -> Self {
        Self {
            u: vec![u; n],
            v: vec![v; n],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Index of the first node where either component is not strictly positive and finite.
    pub fn first_nonpositive(&self) -> Option<usize> {
        self.u
            .iter()
            .zip(&self.v)
            .position(|(u, v)| !(u.is_finite() && v.is_finite() && *u > 0.0 && *v > 0.0))
    }

    pub fn all_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// `max - min` of each component.
    pub fn ranges(&self) -> (f64, f64) {
        (range(&self.u), range(&self.v))
    }

    /// Largest absolute nodewise difference over both components.
    pub fn max_diff(&self, other: &Field) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Every second node, mapping a grid with `2m - 1` nodes onto one with `m`.
    pub fn coarsen(&self) -> Field {
        Field {
            u: self.u.iter().step_by(2).copied().collect(),
            v: self.v.iter().step_by(2).copied().collect(),
            t: self.t,
        }
    }
}

pub fn range(values: &[f64]) -> f64 {
    let (lo, hi) = min_max(values);
    hi - lo
}

pub fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// LU factors of `I - κ Δh` for constant `κ = dt·D`, reused across steps.
#[derive(Debug, Clone)]
pub struct ImplicitDiffusion {
    /// Modified super-diagonal of the forward sweep.
    c_prime: Vec<f64>,
    /// Reciprocal of the modified diagonal.
    inv_diag: Vec<f64>,
    off: f64,
}

impl ImplicitDiffusion {
    pub fn new(n: usize, dx: f64, coeff: f64) -> Self {
        let k = coeff / (dx * dx);
        let diag = 1.0 + 2.0 * k;
        let mut c_prime = vec![0.0; n];
        let mut inv_diag = vec![0.0; n];
        // Row 0 couples to node 1 with weight -2k through the mirrored ghost.
        inv_diag[0] = 1.0 / diag;
        c_prime[0] = -2.0 * k * inv_diag[0];
        for i in 1..n {
            let sub = if i == n - 1 { -2.0 * k } else { -k };
            let sup = if i == n - 1 { 0.0 } else { -k };
            let m = diag - sub * c_prime[i - 1];
            inv_diag[i] = 1.0 / m;
            c_prime[i] = sup * inv_diag[i];
        }
        Self {
            c_prime,
            inv_diag,
            off: k,
        }
    }

    /// Overwrites `rhs` with the solution of `(I - κΔh) x = rhs`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_diag[0];
        for i in 1..n {
            let sub = if i == n - 1 {
                -2.0 * self.off
            } else {
                -self.off
            };
            rhs[i] = (rhs[i] - sub * rhs[i - 1]) * self.inv_diag[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}
