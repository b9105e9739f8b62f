//! Monte-Carlo error curves and expectations.

use std::io::{Read, Write};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Field;
use crate::online::{reduced_solve, reduced_solve_unchecked, ReducedModel};
use crate::stochastics::{streams, BetaBox, Seed};
use crate::thermal_block::{AffineModel, ParameterPoint};

/// Default number of Monte-Carlo test samples.
pub const DEFAULT_M: usize = 100;

/// Test parameters drawn once, with their truth solutions.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub seed: Seed,
    pub nodes: Vec<ParameterPoint>,
    pub truths: Vec<Field>,
}

impl TestSet {
    /// Draws `m` samples from the evaluation stream of `seed` and solves at each.
    pub fn draw(model: &AffineModel, dist: &BetaBox, m: usize, seed: Seed) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("Monte-Carlo sample count must be at least 1".into()));
        }
        let nodes = dist.sample_stream(seed, streams::EVALUATION, m);
        let truths = nodes
            .par_iter()
            .enumerate()
            .map(|(index, y)| model.truth_solve(y).map_err(|e| Error::SnapshotFailed { index, source: Box::new(e) }))
            .collect::<Result<_>>()?;
        Ok(Self { seed, nodes, truths })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Mean-square X-norm reduction error as a function of `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub n_values: Vec<usize>,
    pub mse: Vec<f64>,
    pub seed: u64,
    pub m: usize,
    pub variant: String,
    pub case: String,
    /// Basis dimension; requested `N` above it are evaluated at this size.
    pub basis_dim: usize,
    /// `N` values at which some reduced matrix was near-singular.
    pub singular: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    #[serde(rename = "N")]
    n: usize,
    mse: f64,
    variant: String,
    case: String,
    seed: u64,
    #[serde(rename = "M")]
    m: usize,
}

impl ErrorCurve {
    pub fn len(&self) -> usize {
        self.n_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_values.is_empty()
    }

    pub fn at(&self, n: usize) -> Option<f64> {
        self.n_values.iter().position(|&v| v == n).map(|i| self.mse[i])
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.case, self.variant)
    }

    /// Columns `N,mse,variant,case,seed,M`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (&n, &mse) in self.n_values.iter().zip(&self.mse) {
            w.serialize(CurveRow { n, mse, variant: self.variant.clone(), case: self.case.clone(), seed: self.seed, m: self.m })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows: Vec<CurveRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
        let first = rows.first().ok_or_else(|| Error::Format("error curve CSV has no rows".into()))?;
        Ok(Self {
            n_values: rows.iter().map(|r| r.n).collect(),
            mse: rows.iter().map(|r| r.mse).collect(),
            seed: first.seed,
            m: first.m,
            variant: first.variant.clone(),
            case: first.case.clone(),
            basis_dim: rows.iter().map(|r| r.n).max().unwrap_or(0),
            singular: Vec::new(),
        })
    }
}

/// Squared X-errors `‖u(y) − u_N(y)‖²` for every requested `N` at one sample.
fn sample_errors(model: &AffineModel, rm: &ReducedModel, y: &ParameterPoint, u: &Field, n_list: &[usize]) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut errs = Vec::with_capacity(n_list.len());
    let mut flags = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let n = n.min(rm.len());
        let (c, singular) = match reduced_solve(rm, y, n) {
            Ok(s) => (Some(s.coefficients), false),
            Err(Error::NearSingular { .. }) => (reduced_solve_unchecked(rm, y, n).ok(), true),
            Err(e) => return Err(e),
        };
        let e = match c {
            Some(c) => model.x_norm_squared(&(u - rm.lift(&c))),
            None => f64::NAN,
        };
        errs.push(e);
        flags.push(singular);
    }
    Ok((errs, flags))
}

/// Error curve against a prepared test set.
pub fn error_curve(
    model: &AffineModel,
    rm: &ReducedModel,
    test: &TestSet,
    n_list: &[usize],
    variant: &str,
    case: &str,
) -> Result<ErrorCurve> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let per_sample: Vec<(Vec<f64>, Vec<bool>)> = test
        .nodes
        .par_iter()
        .zip(&test.truths)
        .enumerate()
        .map(|(index, (y, u))| {
            sample_errors(model, rm, y, u, n_list).map_err(|e| Error::SnapshotFailed { index, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let m = test.len();
    let mut mse = vec![0.0; n_list.len()];
    let mut singular_any = vec![false; n_list.len()];
    for (errs, flags) in &per_sample {
        for j in 0..n_list.len() {
            mse[j] += errs[j];
            singular_any[j] |= flags[j];
        }
    }
    for v in &mut mse {
        *v /= m as f64;
    }
    let singular: Vec<usize> = n_list.iter().zip(&singular_any).filter(|(_, &s)| s).map(|(&n, _)| n).collect();
    if !singular.is_empty() {
        log::warn!("{case}/{variant}: near-singular reduced matrices at N = {singular:?}");
    }
    Ok(ErrorCurve {
        n_values: n_list.to_vec(),
        mse,
        seed: test.seed.0,
        m,
        variant: variant.to_string(),
        case: case.to_string(),
        basis_dim: rm.len(),
        singular,
    })
}

/// `(1/M) Σ_m ‖u(y^m) − u_N(y^m)‖²_X` for each `N` in `n_list`, one sample
/// shared by all `N`.
pub fn mc_error_curve(
    model: &AffineModel,
    rm: &ReducedModel,
    dist: &BetaBox,
    m: usize,
    n_list: &[usize],
    seed: Seed,
) -> Result<ErrorCurve> {
    let test = TestSet::draw(model, dist, m, seed)?;
    let variant = rm.metadata.variant.clone().unwrap_or_else(|| "unknown".into());
    error_curve(model, rm, &test, n_list, &variant, "custom")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    /// `(1/M) Σ u_N(y^m)`.
    pub field: Field,
    /// `(1/M) Σ s(u_N(y^m))`.
    pub output: f64,
    /// Standard error of `output`.
    pub output_std_error: f64,
    pub m: usize,
}

/// Sample-mean statistics of the reduced solution at size `n`.
pub fn expectation_field(rm: &ReducedModel, dist: &BetaBox, m: usize, n: usize, seed: Seed) -> Result<Expectation> {
    if m == 0 {
        return Err(Error::InvalidArgument("Monte-Carlo sample count must be at least 1".into()));
    }
    let n = n.min(rm.len());
    let nodes = dist.sample_stream(seed, streams::EVALUATION, m);
    let coeffs: Vec<DVector<f64>> =
        nodes.par_iter().map(|y| reduced_solve(rm, y, n).map(|s| s.coefficients)).collect::<Result<_>>()?;
    let mean_c = coeffs.iter().fold(DVector::zeros(n), |acc, c| acc + c) / m as f64;
    let outputs: Vec<f64> = coeffs.iter().map(|c| rm.output(c)).collect();
    let (output, output_std_error) = mean_and_std_error(&outputs);
    Ok(Expectation { field: rm.lift(&mean_c), output, output_std_error, m })
}

/// Sample mean and its standard error.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Per-`N` comparison of curves against the first one.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub n_values: Vec<usize>,
    pub curves: Vec<ErrorCurve>,
    /// `ratios[c][j] = curves[c].mse[j] / curves[0].mse[j]`.
    pub ratios: Vec<Vec<f64>>,
}

pub fn compare_curves(curves: &[ErrorCurve]) -> Result<Comparison> {
    let first = curves.first().ok_or_else(|| Error::InvalidArgument("no curves to compare".into()))?;
    for c in curves {
        if c.n_values != first.n_values {
            return Err(Error::InvalidArgument(format!("curve {} uses a different N grid than {}", c.label(), first.label())));
        }
        if c.seed != first.seed || c.m != first.m {
            log::warn!("curve {} does not share the test sample of {}", c.label(), first.label());
        }
    }
    let ratios = curves.iter().map(|c| c.mse.iter().zip(&first.mse).map(|(a, b)| a / b).collect()).collect();
    Ok(Comparison { n_values: first.n_values.clone(), curves: curves.to_vec(), ratios })
}

impl Comparison {
    /// Long format: `N,variant,case,seed,M,mse,ratio`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "variant", "case", "seed", "M", "mse", "ratio"])?;
        for (c, ratios) in self.curves.iter().zip(&self.ratios) {
            for (j, &n) in self.n_values.iter().enumerate() {
                w.write_record([
                    n.to_string(),
                    c.variant.clone(),
                    c.case.clone(),
                    c.seed.to_string(),
                    c.m.to_string(),
                    c.mse[j].to_string(),
                    ratios[j].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table of ratios to the reference curve.
    pub fn summary(&self) -> String {
        let mut s = format!("reference: {}\n{:>4}", self.curves[0].label(), "N");
        for c in &self.curves[1..] {
            s += &format!(" {:>24}", c.label());
        }
        s.push('\n');
        for (j, n) in self.n_values.iter().enumerate() {
            s += &format!("{n:>4}");
            for r in &self.ratios[1..] {
                s += &format!(" {:>24.4e}", r[j]);
            }
            s.push('\n');
        }
        s
    }
}
