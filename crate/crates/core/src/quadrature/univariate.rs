use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Families of univariate rules on `[1, 3]`.
///
/// The level-to-size map ("growth") is part of the family:
///
/// | family                  | nodes at level `i`              | weights sum to |
/// |-------------------------|---------------------------------|----------------|
/// | `ClenshawCurtis`        | 1, then `2^(i-1) + 1` (nested)  | 2              |
/// | `ClenshawCurtisLinear`  | `i`                             | 2              |
/// | `GaussLegendre`         | `i`                             | 2              |
/// | `GaussJacobi`           | `i`                             | 1              |
///
/// Gauss-Jacobi integrates against the density of `2·Beta(α, β) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RuleFamily {
    ClenshawCurtis,
    ClenshawCurtisLinear,
    GaussLegendre,
    GaussJacobi { alpha: f64, beta: f64 },
}

impl RuleFamily {
    /// Number of nodes of the level-`level` rule.
    pub fn size(&self, level: usize) -> usize {
        match self {
            RuleFamily::ClenshawCurtis if level <= 1 => level,
            RuleFamily::ClenshawCurtis => (1usize << (level - 1)) + 1,
            _ => level,
        }
    }

    pub fn rule(&self, level: usize) -> Result<UnivariateRule> {
        if level == 0 {
            return Err(Error::InvalidArgument("quadrature levels start at 1".into()));
        }
        let m = self.size(level);
        let (nodes, weights) = match *self {
            RuleFamily::ClenshawCurtis | RuleFamily::ClenshawCurtisLinear => clenshaw_curtis_points(m),
            RuleFamily::GaussLegendre => gauss_legendre_points(m),
            RuleFamily::GaussJacobi { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(Error::InvalidArgument("Gauss-Jacobi shapes must be positive".into()));
                }
                gauss_jacobi_points(m, alpha, beta)
            }
        };
        Ok(UnivariateRule { family: *self, level, nodes, weights })
    }

    /// Whether weights integrate against the probability density rather than `dy`.
    pub fn is_probability_weighted(&self) -> bool {
        matches!(self, RuleFamily::GaussJacobi { .. })
    }
}

/// A univariate rule on `[1, 3]` with strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateRule {
    pub family: RuleFamily,
    pub level: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnivariateRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Nested Clenshaw-Curtis rule of the given level.
pub fn clenshaw_curtis(level: usize) -> Result<UnivariateRule> {
    RuleFamily::ClenshawCurtis.rule(level)
}

pub fn gauss_legendre(level: usize) -> Result<UnivariateRule> {
    RuleFamily::GaussLegendre.rule(level)
}

pub fn gauss_jacobi(level: usize, alpha: f64, beta: f64) -> Result<UnivariateRule> {
    RuleFamily::GaussJacobi { alpha, beta }.rule(level)
}

/// `m`-point Clenshaw-Curtis rule (Chebyshev extrema) mapped to `[1, 3]`.
fn clenshaw_curtis_points(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![2.0], vec![2.0]);
    }
    let n = m - 1;
    let nf = n as f64;
    // sin form keeps the nodes exactly antisymmetric and nested across levels
    let nodes = (0..m).map(|j| 2.0 + (PI * (2.0 * j as f64 - nf) / (2.0 * nf)).sin()).collect();
    let weights = (0..m)
        .map(|j| {
            let theta = j as f64 * PI / nf;
            let mut s = 1.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                let kf = k as f64;
                s -= b / (4.0 * kf * kf - 1.0) * (2.0 * kf * theta).cos();
            }
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            c * s / nf
        })
        .collect();
    (nodes, weights)
}

/// `m`-point Gauss-Legendre rule by Newton iteration on `P_m`.
fn gauss_legendre_points(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=m {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = mf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if m % 2 == 1 && i == m / 2 {
            z = 0.0;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes.into_iter().map(|x| x + 2.0).collect(), weights)
}

/// Monic Jacobi recurrence for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`.
fn jacobi_recurrence(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = a + b;
    let diag = (0..m)
        .map(|n| {
            if n == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let s = 2.0 * n as f64 + ab;
                (b * b - a * a) / (s * (s + 2.0))
            }
        })
        .collect();
    let off = (1..m)
        .map(|n| {
            let nf = n as f64;
            let s = 2.0 * nf + ab;
            let beta = if n == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * nf * (nf + a) * (nf + b) * (nf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            beta.sqrt()
        })
        .collect();
    (diag, off)
}

/// Golub-Welsch rule for the shifted Beta(α, β) density on `[1, 3]`,
/// normalized to unit mass.
fn gauss_jacobi_points(m: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    // density of t ∈ [0,1] is t^(α-1)(1-t)^(β-1); with x = 2t-1 the Jacobi
    // exponents are a = β-1 on (1-x) and b = α-1 on (1+x)
    let (diag, off) = jacobi_recurrence(m, beta - 1.0, alpha - 1.0);
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = diag[i];
        if i + 1 < m {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
    if alpha == beta {
        for i in 0..m / 2 {
            let j = m - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
    }
    (nodes.into_iter().map(|x| x + 2.0).collect(), weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(d: i32) -> f64 {
        (3f64.powi(d + 1) - 1.0) / (d as f64 + 1.0)
    }

    #[test]
    fn cc_sizes_and_nesting() {
        let r1 = clenshaw_curtis(1).unwrap();
        assert_eq!((r1.nodes.clone(), r1.weights.clone()), (vec![2.0], vec![2.0]));
        let r6 = clenshaw_curtis(6).unwrap();
        assert_eq!(r6.len(), 33);
        assert_eq!(r6.nodes[0], 1.0);
        assert_eq!(r6.nodes[32], 3.0);
        for level in 1..7 {
            let a = clenshaw_curtis(level).unwrap();
            let b = clenshaw_curtis(level + 1).unwrap();
            assert!(a.nodes.iter().all(|x| b.nodes.contains(x)), "level {level}");
            assert!(a.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!((a.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cc_exactness() {
        for level in 3..8 {
            let r = clenshaw_curtis(level).unwrap();
            let v = r.integrate(|y| y * y);
            assert!((v - 26.0 / 3.0).abs() < 1e-12 * 26.0 / 3.0);
        }
        // m-point CC is exact to degree m-1
        for m in 2..9 {
            let r = RuleFamily::ClenshawCurtisLinear.rule(m).unwrap();
            for d in 0..m as i32 {
                let e = monomial_integral(d);
                assert!((r.integrate(|y| y.powi(d)) - e).abs() < 1e-12 * e, "m {m} d {d}");
            }
        }
    }

    #[test]
    fn gl_two_point() {
        let r = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] - (2.0 - s)).abs() < 1e-15);
        assert!((r.nodes[1] - (2.0 + s)).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
        assert!((r.integrate(|y| y.powi(3)) - 20.0).abs() < 1e-13);
    }

    #[test]
    fn gl_exactness() {
        for level in 1..=12 {
            let r = gauss_legendre(level).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for d in 0..(2 * level as i32) {
                let e = monomial_integral(d);
                let v = r.integrate(|y| y.powi(d));
                assert!((v - e).abs() <= 1e-12 * e, "level {level} degree {d}: {v} vs {e}");
            }
        }
    }

    #[test]
    fn gj_moments() {
        let r = gauss_jacobi(1, 10.0, 10.0).unwrap();
        assert_eq!((r.nodes.clone(), r.weights.clone()), (vec![2.0], vec![1.0]));
        let r = gauss_jacobi(4, 10.0, 10.0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let second = r.integrate(|y| y * y);
        assert!((second - (4.0 + 1.0 / 21.0)).abs() < 1e-12);
        assert!(gauss_jacobi(3, 0.0, 1.0).is_err());
        assert!(gauss_jacobi(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gj_asymmetric_mean() {
        // E[2 T + 1] with T ~ Beta(2, 5) is 2·2/7 + 1
        let r = gauss_jacobi(3, 2.0, 5.0).unwrap();
        assert!((r.integrate(|y| y) - (4.0 / 7.0 + 1.0)).abs() < 1e-13);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes.iter().all(|&x| (1.0..=3.0).contains(&x)));
    }
}
