//! Benchmark presets: the three thermal-block cases, the training-set sizes
//! used for each variant, and the curve recipes behind each figure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{run_greedy, GreedyOptions, GreedyWeight, Termination};
use crate::online::{project_model, Builder, ModelMetadata, ReducedModel};
use crate::pod::{offline_pod, PodOptions};
use crate::stochastics::{BetaBox, Seed};
use crate::thermal_block::AffineModel;
use crate::training::{
    build_cc_set_with_interior_target, build_greedy_pool, build_training_set, PoolKind, SetSize, TrainingSet, Variant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "K4_b10")]
    K4B10,
    #[serde(rename = "K9_b10")]
    K9B10,
    #[serde(rename = "K9_b75")]
    K9B75,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::K4B10, Preset::K9B10, Preset::K9B75];

    pub fn name(self) -> &'static str {
        match self {
            Preset::K4B10 => "K4_b10",
            Preset::K9B10 => "K9_b10",
            Preset::K9B75 => "K9_b75",
        }
    }

    pub fn k(self) -> usize {
        match self {
            Preset::K4B10 => 4,
            _ => 9,
        }
    }

    /// Common Beta shape `α = β`.
    pub fn shape(self) -> f64 {
        match self {
            Preset::K9B75 => 75.0,
            _ => 10.0,
        }
    }

    pub fn distribution(self) -> BetaBox {
        BetaBox::symmetric(self.k(), self.shape(), self.shape()).expect("preset shapes are positive")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown case '{s}' (expected K4_b10, K9_b10 or K9_b75)")))
    }
}

/// Size of a POD training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingSize {
    Samples(usize),
    Level(usize),
    /// Smallest tensor Clenshaw-Curtis set with this many interior nodes.
    InteriorTarget(usize),
}

/// Training-set size of `variant` in dimension `k`; `set` selects the
/// smaller (1) or larger (2) configuration at `K = 4`.
pub fn table_size(k: usize, variant: Variant, set: usize) -> Result<TrainingSize> {
    use TrainingSize::*;
    use Variant::*;
    let size = match (k, set, variant) {
        (4, 1, Standard | MonteCarlo | UniformMonteCarlo) => Samples(100),
        (4, 2, Standard | MonteCarlo | UniformMonteCarlo) => Samples(500),
        (4, 1, ClenshawCurtis) => InteriorTarget(100),
        (4, 2, ClenshawCurtis) => InteriorTarget(500),
        (4, 1, GaussLegendre | GaussJacobi) => Level(4),
        (4, 2, GaussLegendre | GaussJacobi) => Level(5),
        (9, _, Standard | MonteCarlo) => Samples(500),
        (9, _, UniformMonteCarlo) => Samples(2000),
        (9, _, GaussLegendre | GaussJacobi) => Level(2),
        (9, _, SparseGaussLegendre | SparseGaussJacobi) => Level(3),
        _ => return Err(Error::Unsupported(format!("no preset size for {variant} at K = {k}, set {set}"))),
    };
    Ok(size)
}

/// Greedy pool size at dimension `k`.
pub fn greedy_pool_size(k: usize) -> usize {
    if k <= 4 {
        1000
    } else {
        2000
    }
}

pub fn build_pod_training(variant: Variant, k: usize, dist: &BetaBox, size: TrainingSize, seed: Seed) -> Result<TrainingSet> {
    match size {
        TrainingSize::Samples(n) => build_training_set(variant, k, dist, SetSize::Samples(n), seed),
        TrainingSize::Level(q) => build_training_set(variant, k, dist, SetSize::Level(q), seed),
        TrainingSize::InteriorTarget(t) if variant == Variant::ClenshawCurtis => build_cc_set_with_interior_target(k, dist, t),
        TrainingSize::InteriorTarget(_) => {
            Err(Error::Unsupported(format!("interior targets only apply to clenshaw-curtis, not {variant}")))
        }
    }
}

/// How one reduced model is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case")]
pub enum Recipe {
    Pod { variant: Variant, size: TrainingSize },
    Greedy { pool: PoolKind, weight: GreedyWeight, n_t: usize },
}

impl Recipe {
    /// Identifier used in the `variant` column of curve CSVs and file names.
    pub fn label(&self) -> String {
        match self {
            Recipe::Pod { variant, .. } => format!("pod-{variant}"),
            Recipe::Greedy { pool, weight, .. } => {
                let w = match weight {
                    GreedyWeight::Uniform => "standard",
                    GreedyWeight::SqrtDensity => "weighted",
                    GreedyWeight::Density => "density",
                };
                format!("greedy-{w}-{pool}")
            }
        }
    }

    pub fn pod(variant: Variant, k: usize, set: usize) -> Result<Self> {
        Ok(Recipe::Pod { variant, size: table_size(k, variant, set)? })
    }

    pub fn greedy(pool: PoolKind, weight: GreedyWeight, k: usize) -> Self {
        Recipe::Greedy { pool, weight, n_t: greedy_pool_size(k) }
    }
}

/// Offline diagnostics of a build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub label: String,
    pub n_training: usize,
    pub n_snapshots: usize,
    pub pruned: usize,
    pub clamped_negative: usize,
    pub clamped_mass: f64,
    pub basis_dim: usize,
    pub termination: Option<Termination>,
}

/// Weighted POD on a prepared training set, with metadata filled in.
pub fn pod_from_training(
    model: &AffineModel,
    dist: &BetaBox,
    ts: &TrainingSet,
    label: &str,
    opts: PodOptions,
) -> Result<(ReducedModel, BuildReport)> {
    let out = offline_pod(model, ts, opts)?;
    let mut rm = project_model(model, out.basis);
    rm.metadata = ModelMetadata {
        variant: Some(label.to_string()),
        seed: ts.seed.map(|s| s.0),
        n_training: ts.len(),
        ..ModelMetadata::new(Builder::Pod, model).with_distribution(dist)
    };
    let report = BuildReport {
        label: label.to_string(),
        n_training: ts.len(),
        n_snapshots: out.n_snapshots,
        pruned: out.pruned,
        clamped_negative: out.clamped_negative,
        clamped_mass: out.clamped_mass,
        basis_dim: rm.len(),
        termination: None,
    };
    Ok((rm, report))
}

/// Runs the offline phase of `recipe`.
pub fn build_reduced_model(
    model: &AffineModel,
    dist: &BetaBox,
    recipe: &Recipe,
    seed: Seed,
    opts: PodOptions,
) -> Result<(ReducedModel, BuildReport)> {
    let n_max = opts.n_max;
    let label = recipe.label();
    match *recipe {
        Recipe::Pod { variant, size } => {
            let ts = build_pod_training(variant, model.k(), dist, size, seed)?;
            pod_from_training(model, dist, &ts, &label, opts)
        }
        Recipe::Greedy { pool, weight, n_t } => {
            let ts = build_greedy_pool(pool, model.k(), dist, n_t, seed)?;
            let state = run_greedy(model, dist, &ts, GreedyOptions { n_max, weight, tolerance: None })?;
            let termination = state.termination;
            let mut rm = state.into_reduced_model();
            rm.metadata.variant = Some(label.clone());
            let report = BuildReport {
                label,
                n_training: ts.len(),
                n_snapshots: rm.len(),
                pruned: 0,
                clamped_negative: 0,
                clamped_mass: 0.0,
                basis_dim: rm.len(),
                termination,
            };
            Ok((rm, report))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Panel {
    Left,
    Right,
}

impl FromStr for Panel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Panel::Left),
            "right" => Ok(Panel::Right),
            _ => Err(Error::InvalidArgument(format!("unknown panel '{s}' (expected left or right)"))),
        }
    }
}

impl fmt::Display for Panel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Panel::Left => "left",
            Panel::Right => "right",
        })
    }
}

impl Figure {
    pub const ALL: [Figure; 9] = [
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
        Figure::Fig9,
        Figure::Fig10,
        Figure::Fig11,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
            Figure::Fig10 => "fig10",
            Figure::Fig11 => "fig11",
        }
    }

    /// Case and curve recipes of one panel.
    ///
    /// For the `K = 4` figures the left panel uses the smaller training sets
    /// and the right panel the larger ones (figs. 3, 4); fig. 5 shows greedy
    /// variants on the left and a greedy/POD mix on the right. For the
    /// `K = 9` figures the left panel is `α = β = 10` and the right `α = β = 75`.
    pub fn panel(self, panel: Panel) -> Result<(Preset, Vec<Recipe>)> {
        use GreedyWeight::{SqrtDensity, Uniform};
        use Variant::*;
        let set = if panel == Panel::Left { 1 } else { 2 };
        let high = if panel == Panel::Left { Preset::K9B10 } else { Preset::K9B75 };
        let pods = |k: usize, set: usize, vs: &[Variant]| vs.iter().map(|&v| Recipe::pod(v, k, set)).collect::<Result<Vec<_>>>();
        let out = match self {
            Figure::Fig3 => (Preset::K4B10, pods(4, set, &[Standard, UniformMonteCarlo, MonteCarlo])?),
            Figure::Fig4 => (Preset::K4B10, pods(4, set, &[ClenshawCurtis, GaussLegendre, GaussJacobi])?),
            Figure::Fig5 => {
                let r = match panel {
                    Panel::Left => vec![
                        Recipe::greedy(PoolKind::Uniform, Uniform, 4),
                        Recipe::greedy(PoolKind::Uniform, SqrtDensity, 4),
                        Recipe::greedy(PoolKind::Distribution, SqrtDensity, 4),
                    ],
                    Panel::Right => {
                        let mut r = vec![
                            Recipe::greedy(PoolKind::Uniform, Uniform, 4),
                            Recipe::greedy(PoolKind::Uniform, SqrtDensity, 4),
                        ];
                        r.extend(pods(4, 1, &[Standard, GaussJacobi])?);
                        r
                    }
                };
                (Preset::K4B10, r)
            }
            Figure::Fig6 => (high, pods(9, 1, &[Standard, UniformMonteCarlo, MonteCarlo])?),
            Figure::Fig7 => (high, pods(9, 1, &[GaussLegendre, GaussJacobi])?),
            Figure::Fig8 => (high, pods(9, 1, &[GaussLegendre, SparseGaussLegendre, GaussJacobi, SparseGaussJacobi])?),
            Figure::Fig9 => (high, pods(9, 1, &[Standard, MonteCarlo, GaussJacobi])?),
            Figure::Fig10 => (
                high,
                vec![
                    Recipe::greedy(PoolKind::Uniform, Uniform, 9),
                    Recipe::greedy(PoolKind::Uniform, SqrtDensity, 9),
                    Recipe::greedy(PoolKind::Distribution, SqrtDensity, 9),
                ],
            ),
            Figure::Fig11 => {
                let mut r = vec![
                    Recipe::greedy(PoolKind::Uniform, Uniform, 9),
                    Recipe::greedy(PoolKind::Uniform, SqrtDensity, 9),
                ];
                r.extend(pods(9, 1, &[Standard, MonteCarlo])?);
                (high, r)
            }
        };
        Ok(out)
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown figure '{s}' (expected fig3 … fig11)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(table_size(4, Variant::GaussJacobi, 2).unwrap(), TrainingSize::Level(5));
        assert_eq!(table_size(9, Variant::UniformMonteCarlo, 1).unwrap(), TrainingSize::Samples(2000));
        assert!(table_size(9, Variant::ClenshawCurtis, 1).is_err());
        assert!(table_size(4, Variant::SparseGaussJacobi, 1).is_err());
        assert_eq!(greedy_pool_size(4), 1000);
        assert_eq!(greedy_pool_size(9), 2000);
    }

    #[test]
    fn every_panel_resolves() {
        for f in Figure::ALL {
            for p in [Panel::Left, Panel::Right] {
                let (case, recipes) = f.panel(p).unwrap();
                assert!(!recipes.is_empty());
                let labels: std::collections::HashSet<_> = recipes.iter().map(|r| r.label()).collect();
                assert_eq!(labels.len(), recipes.len(), "{f} {p}");
                if matches!(f, Figure::Fig3 | Figure::Fig4 | Figure::Fig5) {
                    assert_eq!(case, Preset::K4B10);
                }
            }
        }
        assert_eq!(Figure::Fig3.panel(Panel::Left).unwrap().1.len(), 3);
        assert_eq!("fig11".parse::<Figure>().unwrap(), Figure::Fig11);
        assert_eq!("k9_B75".parse::<Preset>().unwrap(), Preset::K9B75);
    }
}
