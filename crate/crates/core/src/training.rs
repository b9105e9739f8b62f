//! Training sets: node sets with POD weights for every sampling variant, and
//! node pools for the greedy algorithm.
//!
//! | variant                 | nodes                    | POD weight `w_i` |
//! |-------------------------|--------------------------|------------------|
//! | `standard`              | uniform samples          | `1/n_t`          |
//! | `monte-carlo`           | samples of the law       | `1/n_t`          |
//! | `uniform-monte-carlo`   | uniform samples          | `ρ_i/n_t`        |
//! | `clenshaw-curtis`       | tensor CC (m-point)      | `ω_i ρ_i`        |
//! | `gauss-legendre`        | tensor GL                | `ω_i ρ_i`        |
//! | `gauss-jacobi`          | tensor GJ                | `ω_i`            |
//! | `sparse-gauss-legendre` | Smolyak GL               | `ω_i ρ_i`        |
//! | `sparse-gauss-jacobi`   | Smolyak GJ               | `ω_i`            |

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{full_tensor, smolyak, MultiRule, RuleFamily, DEFAULT_NODE_BUDGET};
use crate::stochastics::{sample_uniform_stream, streams, BetaBox, Seed};
use crate::thermal_block::{ParameterPoint, PARAM_MAX, PARAM_MIN};

/// Sampling variant of a weighted-POD training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Standard,
    MonteCarlo,
    UniformMonteCarlo,
    ClenshawCurtis,
    GaussLegendre,
    GaussJacobi,
    SparseGaussLegendre,
    SparseGaussJacobi,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Standard,
        Variant::MonteCarlo,
        Variant::UniformMonteCarlo,
        Variant::ClenshawCurtis,
        Variant::GaussLegendre,
        Variant::GaussJacobi,
        Variant::SparseGaussLegendre,
        Variant::SparseGaussJacobi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::MonteCarlo => "monte-carlo",
            Variant::UniformMonteCarlo => "uniform-monte-carlo",
            Variant::ClenshawCurtis => "clenshaw-curtis",
            Variant::GaussLegendre => "gauss-legendre",
            Variant::GaussJacobi => "gauss-jacobi",
            Variant::SparseGaussLegendre => "sparse-gauss-legendre",
            Variant::SparseGaussJacobi => "sparse-gauss-jacobi",
        }
    }

    /// Sampled variants take a sample count, quadrature variants a level.
    pub fn is_sampled(self) -> bool {
        matches!(self, Variant::Standard | Variant::MonteCarlo | Variant::UniformMonteCarlo)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant '{s}'")))
    }
}

/// How a greedy node pool is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolKind {
    Uniform,
    Grid,
    Distribution,
}

impl PoolKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolKind::Uniform => "uniform",
            PoolKind::Grid => "grid",
            PoolKind::Distribution => "distribution",
        }
    }
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [PoolKind::Uniform, PoolKind::Grid, PoolKind::Distribution]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown pool kind '{s}'")))
    }
}

/// Where a training set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingKind {
    Pod(Variant),
    Pool(PoolKind),
    Imported,
}

/// Size parameter of a training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetSize {
    /// Number of random samples.
    Samples(usize),
    /// Quadrature level (points per axis for tensor rules, Smolyak order for sparse).
    Level(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub nodes: Vec<ParameterPoint>,
    pub pod_weights: Vec<f64>,
    /// Quadrature weights `ω_i`, for quadrature-based variants.
    pub quadrature_weights: Option<Vec<f64>>,
    pub kind: TrainingKind,
    pub seed: Option<Seed>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, |y| y.dim())
    }

    /// Recomputes `w_i` from the stored nodes, quadrature weights and the law.
    pub fn recompute_weights(&self, dist: &BetaBox) -> Result<Vec<f64>> {
        let TrainingKind::Pod(variant) = self.kind else {
            return Ok(self.pod_weights.clone());
        };
        let n = self.len();
        (0..n)
            .map(|i| {
                let omega = self.quadrature_weights.as_ref().map(|w| w[i]);
                pod_weight(variant, omega, &self.nodes[i], dist, n)
            })
            .collect()
    }

    /// CSV with columns `y_1 … y_K, w`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=k).map(|i| format!("y_{i}")).collect();
        header.push("w".into());
        w.write_record(&header)?;
        for (y, wt) in self.nodes.iter().zip(&self.pod_weights) {
            let mut rec: Vec<String> = y.coords().iter().map(|v| v.to_string()).collect();
            rec.push(wt.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`TrainingSet::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let k = header.len().checked_sub(1).filter(|&k| k > 0).ok_or_else(|| {
            Error::Format("training-set CSV needs columns y_1..y_K, w".into())
        })?;
        if header.get(k) != Some("w") || (0..k).any(|i| header.get(i) != Some(format!("y_{}", i + 1).as_str())) {
            return Err(Error::Format(format!("unexpected training-set header {header:?}")));
        }
        let mut nodes = Vec::new();
        let mut pod_weights = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad number '{s}': {e}"))))
                .collect::<Result<_>>()?;
            let y = ParameterPoint::new(vals[..k].to_vec());
            y.validate(k)?;
            nodes.push(y);
            pod_weights.push(vals[k]);
        }
        Ok(Self { nodes, pod_weights, quadrature_weights: None, kind: TrainingKind::Imported, seed: None })
    }
}

fn pod_weight(variant: Variant, omega: Option<f64>, y: &ParameterPoint, dist: &BetaBox, n: usize) -> Result<f64> {
    let omega = || omega.ok_or_else(|| Error::InvalidArgument(format!("{variant} needs quadrature weights")));
    Ok(match variant {
        Variant::Standard | Variant::MonteCarlo => 1.0 / n as f64,
        Variant::UniformMonteCarlo => dist.density(y)? / n as f64,
        Variant::ClenshawCurtis | Variant::GaussLegendre | Variant::SparseGaussLegendre => omega()? * dist.density(y)?,
        Variant::GaussJacobi | Variant::SparseGaussJacobi => omega()?,
    })
}

/// Shared `(α, β)` of a law whose coordinates are identically distributed.
fn common_shape(dist: &BetaBox) -> Result<(f64, f64)> {
    let (a, b) = (dist.alpha()[0], dist.beta()[0]);
    if dist.alpha().iter().any(|&x| x != a) || dist.beta().iter().any(|&x| x != b) {
        return Err(Error::Unsupported(
            "Gauss-Jacobi training sets need identical shapes in every coordinate".into(),
        ));
    }
    Ok((a, b))
}

fn quadrature_for(variant: Variant, k: usize, dist: &BetaBox, level: usize, budget: usize) -> Result<MultiRule> {
    let gj = || common_shape(dist).map(|(alpha, beta)| RuleFamily::GaussJacobi { alpha, beta });
    match variant {
        Variant::ClenshawCurtis => full_tensor(RuleFamily::ClenshawCurtisLinear, k, level, budget),
        Variant::GaussLegendre => full_tensor(RuleFamily::GaussLegendre, k, level, budget),
        Variant::GaussJacobi => full_tensor(gj()?, k, level, budget),
        Variant::SparseGaussLegendre => smolyak(RuleFamily::GaussLegendre, k, level, budget),
        Variant::SparseGaussJacobi => smolyak(gj()?, k, level, budget),
        _ => unreachable!("sampled variants have no quadrature rule"),
    }
}

/// Builds the training set of a weighted-POD variant.
///
/// Sampled variants (`standard`, `monte-carlo`, `uniform-monte-carlo`) take
/// [`SetSize::Samples`] and draw from the training stream of `seed`. Quadrature
/// variants take [`SetSize::Level`]; for `clenshaw-curtis` the level is the
/// number of points per axis.
pub fn build_training_set(
    variant: Variant,
    k: usize,
    dist: &BetaBox,
    size: SetSize,
    seed: Seed,
) -> Result<TrainingSet> {
    build_training_set_with_budget(variant, k, dist, size, seed, DEFAULT_NODE_BUDGET)
}

pub fn build_training_set_with_budget(
    variant: Variant,
    k: usize,
    dist: &BetaBox,
    size: SetSize,
    seed: Seed,
    budget: usize,
) -> Result<TrainingSet> {
    if dist.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: dist.dim() });
    }
    let (nodes, omega, seed) = match (variant.is_sampled(), size) {
        (true, SetSize::Samples(n)) if n > 0 => {
            let nodes = match variant {
                Variant::MonteCarlo => dist.sample_stream(seed, streams::TRAINING, n),
                _ => sample_uniform_stream(k, seed, streams::TRAINING, n),
            };
            (nodes, None, Some(seed))
        }
        (false, SetSize::Level(q)) if q > 0 => {
            let rule = quadrature_for(variant, k, dist, q, budget)?;
            (rule.nodes, Some(rule.weights), None)
        }
        _ => {
            return Err(Error::Unsupported(format!("variant {variant} cannot be built with size {size:?}")));
        }
    };
    let n = nodes.len();
    let pod_weights = (0..n)
        .map(|i| pod_weight(variant, omega.as_ref().map(|w| w[i]), &nodes[i], dist, n))
        .collect::<Result<Vec<_>>>()?;
    if pod_weights.iter().all(|&w| w == 0.0) {
        log::warn!("all {n} POD weights of the {variant} training set are zero");
    }
    Ok(TrainingSet { nodes, pod_weights, quadrature_weights: omega, kind: TrainingKind::Pod(variant), seed })
}

/// Smallest tensor Clenshaw-Curtis set with at least `interior_target` nodes
/// off the boundary of `Γ`.
pub fn build_cc_set_with_interior_target(k: usize, dist: &BetaBox, interior_target: usize) -> Result<TrainingSet> {
    build_cc_set_with_interior_target_budget(k, dist, interior_target, DEFAULT_NODE_BUDGET)
}

pub fn build_cc_set_with_interior_target_budget(
    k: usize,
    dist: &BetaBox,
    interior_target: usize,
    budget: usize,
) -> Result<TrainingSet> {
    for m in 1.. {
        let total = (m as u128).pow(k as u32);
        if total > budget as u128 {
            return Err(Error::NodeBudget { requested: total.min(usize::MAX as u128) as usize, budget });
        }
        let rule = RuleFamily::ClenshawCurtisLinear.rule(m)?;
        let inside = rule.nodes.iter().filter(|&&x| x > PARAM_MIN && x < PARAM_MAX).count() as u128;
        if inside.pow(k as u32) >= interior_target as u128 {
            return build_training_set_with_budget(
                Variant::ClenshawCurtis,
                k,
                dist,
                SetSize::Level(m),
                Seed(0),
                budget,
            );
        }
    }
    unreachable!()
}

/// Node pool for the greedy algorithm; `pod_weights` are all 1.
///
/// The grid pool uses the largest `m` with `m^K ≤ n_t` and `m` equispaced
/// points per axis, endpoints included.
pub fn build_greedy_pool(kind: PoolKind, k: usize, dist: &BetaBox, n_t: usize, seed: Seed) -> Result<TrainingSet> {
    if n_t == 0 {
        return Err(Error::InvalidArgument("greedy pool needs at least one node".into()));
    }
    if dist.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: dist.dim() });
    }
    let nodes = match kind {
        PoolKind::Uniform => sample_uniform_stream(k, seed, streams::GREEDY_POOL, n_t),
        PoolKind::Distribution => dist.sample_stream(seed, streams::GREEDY_POOL, n_t),
        PoolKind::Grid => {
            let mut m = 1usize;
            while ((m + 1) as u128).pow(k as u32) <= n_t as u128 {
                m += 1;
            }
            let axis: Vec<f64> = if m == 1 {
                vec![0.5 * (PARAM_MIN + PARAM_MAX)]
            } else {
                (0..m).map(|i| PARAM_MIN + (PARAM_MAX - PARAM_MIN) * i as f64 / (m - 1) as f64).collect()
            };
            let rule = crate::quadrature::UnivariateRule {
                family: RuleFamily::ClenshawCurtisLinear,
                level: m,
                weights: vec![1.0; m],
                nodes: axis,
            };
            let mut nodes = Vec::with_capacity(m.pow(k as u32));
            let mut idx = vec![0usize; k];
            loop {
                nodes.push(ParameterPoint::new(idx.iter().map(|&i| rule.nodes[i]).collect()));
                let mut d = k;
                let done = loop {
                    if d == 0 {
                        break true;
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < m {
                        break false;
                    }
                    idx[d] = 0;
                };
                if done {
                    break;
                }
            }
            nodes
        }
    };
    let n = nodes.len();
    Ok(TrainingSet {
        nodes,
        pod_weights: vec![1.0; n],
        quadrature_weights: None,
        kind: TrainingKind::Pool(kind),
        seed: (kind != PoolKind::Grid).then_some(seed),
    })
}
