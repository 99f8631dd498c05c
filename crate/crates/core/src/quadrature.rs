//! Gauss–Hermite quadrature and the squeezed-Gaussian product rules built
//! from it.
//!
//! Nodes and weights come from the Golub–Welsch algorithm: the Hermite
//! three-term recurrence yields a symmetric tridiagonal companion matrix with
//! `sqrt(n/2)` on the off-diagonal, whose eigenvalues are the nodes and whose
//! first eigenvector components give the weights.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Quadrature rule for `int exp(-x^2) f(x) dx` over the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Invalid(
                "quadrature degree must be at least 1".into(),
            ));
        }
        let mut companion = DMatrix::<f64>::zeros(degree, degree);
        for i in 0..degree.saturating_sub(1) {
            let v = ((i as f64 + 1.0) * 0.5).sqrt();
            companion[(i, i + 1)] = v;
            companion[(i + 1, i)] = v;
        }
        let eig = companion.symmetric_eigen();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let first = eig.eigenvectors[(0, k)];
                (x, first * first * sqrt_pi)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

/// Product rule for one complex mode distributed with the squeezed Gaussian
/// density
///
/// ```text
/// p_xi(z) = exp(-(|z|^2 - Re(conj(xi) z^2)) / (1 - |xi|^2)) / (pi sqrt(1 - |xi|^2))
/// ```
///
/// The density is brought to principal axes by rotating `z` by `arg(xi)/2`;
/// there the real and imaginary parts are independent Gaussians with
/// variances `(1 + |xi|)/2` and `(1 - |xi|)/2`, so a tensor Gauss–Hermite
/// rule integrates polynomials in `(z, conj z)` exactly. Weights sum to one.
#[derive(Debug, Clone)]
pub struct SqueezedGaussRule {
    nodes: Vec<C64>,
    weights: Vec<f64>,
}

impl SqueezedGaussRule {
    pub fn new(xi: C64, nodes_per_axis: usize) -> Result<Self> {
        let r = xi.norm();
        if r >= 1.0 {
            return Err(Error::InvalidSqueezing { modulus: r });
        }
        let gh = GaussHermite::new(nodes_per_axis)?;
        let half_phase = C64::from_polar(1.0, 0.5 * xi.arg());
        let sx = (1.0 + r).sqrt(); // sqrt(2) * std dev of the major axis
        let sy = (1.0 - r).sqrt();
        let inv_pi = 1.0 / std::f64::consts::PI;
        let n = nodes_per_axis;
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (i, &u) in gh.nodes().iter().enumerate() {
            for (j, &v) in gh.nodes().iter().enumerate() {
                nodes.push(half_phase * C64::new(sx * u, sy * v));
                weights.push(gh.weights()[i] * gh.weights()[j] * inv_pi);
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Tensor product of per-mode squeezed rules; iterates over all node
/// combinations with their joint weights.
#[derive(Debug, Clone)]
pub struct MultiModeRule {
    per_mode: Vec<SqueezedGaussRule>,
}

impl MultiModeRule {
    pub fn new(xis: &[C64], nodes_per_axis: usize) -> Result<Self> {
        let per_mode = xis
            .iter()
            .map(|&xi| SqueezedGaussRule::new(xi, nodes_per_axis))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { per_mode })
    }

    pub fn n_modes(&self) -> usize {
        self.per_mode.len()
    }

    pub fn len(&self) -> usize {
        self.per_mode.iter().map(SqueezedGaussRule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, flat: usize) -> (Vec<C64>, f64) {
        let mut idx = flat;
        let mut z = Vec::with_capacity(self.per_mode.len());
        let mut w = 1.0;
        for rule in self.per_mode.iter().rev() {
            let k = idx % rule.len();
            idx /= rule.len();
            z.push(rule.nodes[k]);
            w *= rule.weights[k];
        }
        z.reverse();
        (z, w)
    }
}
