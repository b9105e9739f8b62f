//! Independent shifted/scaled Beta laws on `[1, 3]^K`: `Y_k ~ 2·Beta(α_k, β_k) + 1`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::thermal_block::{ParameterPoint, PARAM_MAX, PARAM_MIN};

/// 64-bit seed of a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

/// Stream tags, so that different consumers of one seed never share state.
pub mod streams {
    pub const DEFAULT: u64 = 0;
    pub const TRAINING: u64 = 1;
    pub const GREEDY_POOL: u64 = 2;
    pub const EVALUATION: u64 = 3;
}

impl Seed {
    /// Independent generator for `(seed, tag)`.
    pub fn rng(self, tag: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(tag);
        rng
    }
}

/// Product of shifted/scaled Beta distributions on `[1, 3]^K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaBox {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaBox {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch { expected: alpha.len(), actual: beta.len() });
        }
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("distribution needs at least one dimension".into()));
        }
        if alpha.iter().chain(&beta).any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument("Beta shape parameters must be positive".into()));
        }
        Ok(Self { alpha, beta })
    }

    /// Same `(α, β)` in every coordinate.
    pub fn symmetric(k: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(vec![alpha; k], vec![beta; k])
    }

    /// Uniform law on `[1, 3]^K` (`α = β = 1`).
    pub fn uniform(k: usize) -> Self {
        Self { alpha: vec![1.0; k], beta: vec![1.0; k] }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `ln ρ(y)`; `-∞` where the density vanishes.
    pub fn ln_density(&self, y: &ParameterPoint) -> Result<f64> {
        y.validate(self.dim())?;
        let width = PARAM_MAX - PARAM_MIN;
        let mut acc = 0.0;
        for ((&v, &a), &b) in y.coords().iter().zip(&self.alpha).zip(&self.beta) {
            let t = (v - PARAM_MIN) / width;
            acc += xlny(a - 1.0, t) + xlny(b - 1.0, 1.0 - t) - ln_beta(a, b) - width.ln();
        }
        Ok(acc)
    }

    /// `ρ(y) = Π_k ½ B(α_k, β_k)⁻¹ ((y_k−1)/2)^{α_k−1} ((3−y_k)/2)^{β_k−1}`.
    pub fn density(&self, y: &ParameterPoint) -> Result<f64> {
        Ok(self.ln_density(y)?.exp())
    }

    /// `count` i.i.d. draws from stream `tag` of `seed`.
    pub fn sample_stream(&self, seed: Seed, tag: u64, count: usize) -> Vec<ParameterPoint> {
        let mut rng = seed.rng(tag);
        let laws: Vec<Beta<f64>> = self
            .alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| Beta::new(a, b).expect("shape parameters validated at construction"))
            .collect();
        (0..count)
            .map(|_| {
                ParameterPoint::new(
                    laws.iter()
                        .map(|law| (PARAM_MIN + (PARAM_MAX - PARAM_MIN) * law.sample(&mut rng)).clamp(PARAM_MIN, PARAM_MAX))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn sample(&self, seed: Seed, count: usize) -> Vec<ParameterPoint> {
        self.sample_stream(seed, streams::DEFAULT, count)
    }
}

/// `a·ln(x)` with the convention `0·ln(0) = 0`.
fn xlny(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

/// Uniform draws on `[1, 3]^K` from stream `tag` of `seed`.
pub fn sample_uniform_stream(k: usize, seed: Seed, tag: u64, count: usize) -> Vec<ParameterPoint> {
    let mut rng = seed.rng(tag);
    (0..count)
        .map(|_| {
            ParameterPoint::new((0..k).map(|_| PARAM_MIN + (PARAM_MAX - PARAM_MIN) * rng.random::<f64>()).collect())
        })
        .collect()
}

pub fn sample_uniform(k: usize, seed: Seed, count: usize) -> Vec<ParameterPoint> {
    sample_uniform_stream(k, seed, streams::DEFAULT, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_is_constant() {
        let d = BetaBox::uniform(3);
        for y in [[1.0, 2.0, 3.0], [1.5, 2.5, 2.9]] {
            let r = d.density(&ParameterPoint::new(y.to_vec())).unwrap();
            assert!((r - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_ten_at_centre() {
        // 0.5 · B(10,10)⁻¹ · 0.5^18
        let d = BetaBox::symmetric(1, 10.0, 10.0).unwrap();
        let r = d.density(&ParameterPoint::new(vec![2.0])).unwrap();
        assert!((r - 1.761_970_520_019_531_25).abs() < 1e-12, "{r}");
        assert_eq!(d.density(&ParameterPoint::new(vec![1.0])).unwrap(), 0.0);
        assert_eq!(d.density(&ParameterPoint::new(vec![3.0])).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_and_finite_for_concentrated_laws() {
        let d = BetaBox::symmetric(2, 75.0, 75.0).unwrap();
        for i in 1..200 {
            let t = 1.0 + i as f64 / 100.0;
            let a = d.density(&ParameterPoint::new(vec![t, 2.0])).unwrap();
            let b = d.density(&ParameterPoint::new(vec![4.0 - t, 2.0])).unwrap();
            assert!(a.is_finite() && b.is_finite());
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(BetaBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(BetaBox::new(vec![1.0, 2.0], vec![1.0]).is_err());
        let d = BetaBox::uniform(2);
        assert!(d.density(&ParameterPoint::new(vec![0.9, 2.0])).is_err());
    }

    #[test]
    fn seeded_determinism() {
        let d = BetaBox::symmetric(4, 10.0, 10.0).unwrap();
        assert_eq!(d.sample(Seed(3), 50), d.sample(Seed(3), 50));
        assert_ne!(d.sample(Seed(3), 50), d.sample(Seed(4), 50));
        assert_ne!(d.sample_stream(Seed(3), 1, 5), d.sample_stream(Seed(3), 2, 5));
        assert_eq!(sample_uniform(4, Seed(1), 20), sample_uniform(4, Seed(1), 20));
    }

    #[test]
    fn sample_means() {
        let d = BetaBox::symmetric(2, 10.0, 10.0).unwrap();
        let s = d.sample(Seed(11), 10_000);
        for k in 0..2 {
            let mean = s.iter().map(|y| y.coords()[k]).sum::<f64>() / s.len() as f64;
            assert!((mean - 2.0).abs() < 0.01, "{mean}");
        }
        let u = sample_uniform(3, Seed(5), 10_000);
        assert!(u.iter().all(|y| y.validate(3).is_ok()));
        for k in 0..3 {
            let mean = u.iter().map(|y| y.coords()[k]).sum::<f64>() / u.len() as f64;
            assert!((mean - 2.0).abs() < 0.01, "{mean}");
        }
    }

    #[test]
    fn kolmogorov_smirnov_uniform() {
        let n = 10_000;
        for sampler in [0, 1] {
            let pts = if sampler == 0 {
                BetaBox::uniform(1).sample(Seed(17), n)
            } else {
                sample_uniform(1, Seed(17), n)
            };
            let mut x: Vec<f64> = pts.iter().map(|y| (y.coords()[0] - 1.0) / 2.0).collect();
            x.sort_by(f64::total_cmp);
            let d = x
                .iter()
                .enumerate()
                .map(|(i, &v)| (v - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - v))
                .fold(0.0, f64::max);
            // 1% critical value, asymptotic
            assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
        }
    }
}
