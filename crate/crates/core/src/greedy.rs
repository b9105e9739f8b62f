//! Weighted greedy basis construction with a residual-based error estimator.
//!
//! The residual of `u_N(y) = Σ_n c_n ξ^n` is
//! `r(·; y) = F − Σ_{k,n} y_k c_n A_k(ξ^n, ·)`, so its X-Riesz representer is a
//! fixed linear combination of `ê_f = X⁻¹F` and `ê_a^{k,n} = X⁻¹ A_k ξ^n`.
//! Besides the Gram entries of those representers, the estimator keeps an
//! X-orthonormal factorization `ê_j = Σ_i q_i R_ij` so the online dual norm
//! `‖R · coef‖₂` does not lose accuracy to cancellation near zero residual.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Orthonormalizer, ReducedBasis};
use crate::error::{Error, Result};
use crate::fem::{solve_with_factor, Field, SparseSymMatrix};
use crate::online::{reduced_solve, Builder, ReducedModel};
use crate::stochastics::BetaBox;
use crate::thermal_block::{coercivity_lower_bound, AffineModel, ParameterPoint};
use crate::training::TrainingSet;

/// Solves `X ê = functional`.
pub fn riesz_representer(x: &SparseSymMatrix, functional: &Field) -> Result<Field> {
    crate::fem::solve_spd(x, functional)
}

/// Offline data for the residual dual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorData {
    pub k: usize,
    /// `⟨ê_f, ê_f⟩_X`.
    pub riesz_ff: f64,
    /// `⟨ê_f, ê_a^{k,n}⟩_X`, row `n`, column `k`.
    pub riesz_fa: DMatrix<f64>,
    /// `⟨ê_a^{k,n}, ê_a^{k',n'}⟩_X`, indexed by `n·K + k`.
    pub riesz_aa: DMatrix<f64>,
    q: Vec<Field>,
    xq: Vec<Field>,
    /// Columns of `R`; column 0 is `ê_f`, then `ê_a^{k,n}` at `1 + n·K + k`.
    r: Vec<Vec<f64>>,
    representers: Vec<Field>,
}

impl EstimatorData {
    pub fn new(model: &AffineModel) -> Result<Self> {
        let ef = model.solve_x(model.load())?;
        let mut data = Self {
            k: model.k(),
            riesz_ff: model.x_norm_squared(&ef),
            riesz_fa: DMatrix::zeros(0, model.k()),
            riesz_aa: DMatrix::zeros(0, 0),
            q: Vec::new(),
            xq: Vec::new(),
            r: Vec::new(),
            representers: Vec::new(),
        };
        data.factor_in(model.x(), ef);
        Ok(data)
    }

    /// Number of basis functions covered.
    pub fn len(&self) -> usize {
        self.riesz_fa.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn factor_in(&mut self, x: &SparseSymMatrix, e: Field) {
        let xe = x.mul_vec(&e);
        let norm = e.dot(&xe).max(0.0).sqrt();
        let mut col = vec![0.0; self.q.len()];
        let mut v = e.clone();
        for _ in 0..2 {
            for (i, (q, xq)) in self.q.iter().zip(&self.xq).enumerate() {
                let c = xq.dot(&v);
                col[i] += c;
                v.axpy(-c, q, 1.0);
            }
        }
        let xv = x.mul_vec(&v);
        let rest = v.dot(&xv).max(0.0).sqrt();
        if rest > 1e-14 * norm {
            self.q.push(v / rest);
            self.xq.push(xv / rest);
            col.push(rest);
        }
        self.r.push(col);
        self.representers.push(e);
    }

    /// Adds the representers of `A_k ξ` for the next basis function.
    pub fn extend(&mut self, model: &AffineModel, xi: &Field) -> Result<()> {
        let k = self.k;
        let n = self.len();
        let new: Vec<Field> = model
            .stiffness_blocks()
            .par_iter()
            .map(|a| solve_with_factor(model.x(), model.x_factor(), &a.mul_vec(xi)))
            .collect::<Result<_>>()?;
        let x_new: Vec<Field> = new.iter().map(|e| model.x().mul_vec(e)).collect();

        let mut fa = self.riesz_fa.clone().resize_vertically(n + 1, 0.0);
        for kk in 0..k {
            fa[(n, kk)] = self.representers[0].dot(&x_new[kk]);
        }
        self.riesz_fa = fa;

        let old = n * k;
        let mut aa = self.riesz_aa.clone().resize(old + k, old + k, 0.0);
        for (j, xe) in x_new.iter().enumerate() {
            for i in 0..old {
                let v = self.representers[1 + i].dot(xe);
                aa[(i, old + j)] = v;
                aa[(old + j, i)] = v;
            }
            for (i, e) in new.iter().enumerate().take(j + 1) {
                let v = e.dot(xe);
                aa[(old + i, old + j)] = v;
                aa[(old + j, old + i)] = v;
            }
        }
        self.riesz_aa = aa;

        for e in new {
            self.factor_in(model.x(), e);
        }
        Ok(())
    }

    /// Coefficient vector `(1, −y_k c_n)` in representer order.
    fn combination(&self, y: &ParameterPoint, c: &DVector<f64>) -> Vec<f64> {
        let mut coef = Vec::with_capacity(1 + c.len() * self.k);
        coef.push(1.0);
        for cn in c.iter() {
            for yk in y.coords() {
                coef.push(-yk * cn);
            }
        }
        coef
    }

    /// Residual dual norm from the orthonormal factor.
    pub fn residual_norm(&self, y: &ParameterPoint, c: &DVector<f64>) -> f64 {
        let coef = self.combination(y, c);
        let mut acc = vec![0.0; self.q.len()];
        for (col, w) in self.r.iter().zip(&coef) {
            for (a, r) in acc.iter_mut().zip(col) {
                *a += w * r;
            }
        }
        acc.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Residual dual norm from the Gram entries, clamped at zero.
    pub fn residual_norm_gram(&self, y: &ParameterPoint, c: &DVector<f64>) -> f64 {
        let coef = self.combination(y, c);
        let a = DVector::from_column_slice(&coef[1..]);
        let fa = DVector::from_iterator(a.len(), self.riesz_fa.rows(0, c.len()).transpose().iter().copied());
        let q = self.riesz_ff + 2.0 * a.dot(&fa) + a.dot(&(self.riesz_aa.view((0, 0), (a.len(), a.len())) * &a));
        q.max(0.0).sqrt()
    }
}

/// Weight applied to the estimator when picking the next parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreedyWeight {
    /// `w ≡ 1`, the standard greedy.
    Uniform,
    /// `w = √ρ`.
    SqrtDensity,
    /// `w = ρ`.
    Density,
}

impl GreedyWeight {
    pub fn eval(self, dist: &BetaBox, y: &ParameterPoint) -> Result<f64> {
        Ok(match self {
            GreedyWeight::Uniform => 1.0,
            GreedyWeight::SqrtDensity => dist.density(y)?.sqrt(),
            GreedyWeight::Density => dist.density(y)?,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            GreedyWeight::Uniform => "uniform",
            GreedyWeight::SqrtDensity => "sqrt-density",
            GreedyWeight::Density => "density",
        }
    }
}

impl std::str::FromStr for GreedyWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "standard" | "none" => Ok(GreedyWeight::Uniform),
            "sqrt-density" | "weighted" => Ok(GreedyWeight::SqrtDensity),
            "density" => Ok(GreedyWeight::Density),
            _ => Err(Error::InvalidArgument(format!("unknown greedy weight '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxSize,
    /// The selected snapshot was already in the span.
    Deflation,
    /// Every weighted estimate over the remaining pool was zero.
    EstimatorUnderflow,
    Tolerance,
    PoolExhausted,
}

#[derive(Debug, Clone)]
pub struct GreedyState {
    pub chosen_parameters: Vec<ParameterPoint>,
    pub reduced: ReducedModel,
    pub estimator: EstimatorData,
    /// Largest weighted estimate over the pool before each extension past
    /// the first.
    pub max_estimates: Vec<f64>,
    pub termination: Option<Termination>,
}

impl GreedyState {
    pub fn new(model: &AffineModel, n_max: usize) -> Result<Self> {
        Ok(Self {
            chosen_parameters: Vec::new(),
            reduced: ReducedModel::empty(model, Builder::Greedy, n_max),
            estimator: EstimatorData::new(model)?,
            max_estimates: Vec::new(),
            termination: None,
        })
    }

    pub fn basis(&self) -> &ReducedBasis {
        &self.reduced.basis
    }

    pub fn len(&self) -> usize {
        self.reduced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced.is_empty()
    }

    /// Truth-solves at `y` and extends the basis. Returns `false` on
    /// deflation.
    pub fn extend(&mut self, model: &AffineModel, y: &ParameterPoint) -> Result<bool> {
        let u = model.truth_solve(y)?;
        let mut ortho = Orthonormalizer::with_orthonormal(model.x(), &self.reduced.basis.fields);
        let Some(xi) = ortho.push(u).cloned() else {
            return Ok(false);
        };
        self.estimator.extend(model, &xi)?;
        self.reduced.push(model, xi);
        self.chosen_parameters.push(y.clone());
        Ok(true)
    }

    pub fn into_reduced_model(self) -> ReducedModel {
        let mut rm = self.reduced;
        rm.metadata.chosen_parameters = self.chosen_parameters;
        rm
    }
}

/// `η_N(y) = ‖r_N(·; y)‖_{X'} / min_k y_k`.
pub fn error_estimator(state: &GreedyState, y: &ParameterPoint) -> Result<f64> {
    let n = state.len();
    let c = reduced_solve(&state.reduced, y, n)?.coefficients;
    Ok(state.estimator.residual_norm(y, &c) / coercivity_lower_bound(y))
}

/// `w(y) η_N(y)`.
pub fn weighted_estimator(state: &GreedyState, dist: &BetaBox, y: &ParameterPoint, weight: GreedyWeight) -> Result<f64> {
    let w = weight.eval(dist, y)?;
    if w == 0.0 {
        return Ok(0.0);
    }
    Ok(w * error_estimator(state, y)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyOptions {
    pub n_max: usize,
    pub weight: GreedyWeight,
    /// Stop once the largest weighted estimate drops to this value.
    pub tolerance: Option<f64>,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self { n_max: 30, weight: GreedyWeight::SqrtDensity, tolerance: None }
    }
}

/// Greedy loop with weights given per pool entry.
pub fn run_greedy_with_weights(
    model: &AffineModel,
    pool: &[ParameterPoint],
    weights: &[f64],
    n_max: usize,
    tolerance: Option<f64>,
) -> Result<GreedyState> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("greedy pool is empty".into()));
    }
    if weights.len() != pool.len() {
        return Err(Error::DimensionMismatch { expected: pool.len(), actual: weights.len() });
    }
    for y in pool {
        y.validate(model.k())?;
    }
    let mut state = GreedyState::new(model, n_max)?;
    if n_max == 0 {
        state.termination = Some(Termination::MaxSize);
        return Ok(state);
    }
    let start = ParameterPoint::center(model.k());
    let mut used = vec![false; pool.len()];
    if let Some(i) = pool.iter().position(|y| *y == start) {
        used[i] = true;
    }
    state.extend(model, &start)?;

    while state.len() < n_max {
        let scores: Vec<Option<f64>> = pool
            .par_iter()
            .zip(weights)
            .zip(&used)
            .map(|((y, &w), &u)| {
                if u {
                    Ok(None)
                } else if w == 0.0 {
                    Ok(Some(0.0))
                } else {
                    error_estimator(&state, y).map(|e| Some(w * e))
                }
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in scores.iter().enumerate() {
            if let Some(s) = *s {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((i, s));
                }
            }
        }
        let Some((i, value)) = best else {
            state.termination = Some(Termination::PoolExhausted);
            break;
        };
        state.max_estimates.push(value);
        if !(value > 0.0) {
            state.termination = Some(Termination::EstimatorUnderflow);
            break;
        }
        if tolerance.is_some_and(|t| value <= t) {
            state.termination = Some(Termination::Tolerance);
            break;
        }
        used[i] = true;
        if !state.extend(model, &pool[i])? {
            state.termination = Some(Termination::Deflation);
            break;
        }
    }
    if state.termination.is_none() {
        state.termination = Some(Termination::MaxSize);
    }
    log::info!("greedy stopped at N = {} ({:?})", state.len(), state.termination.unwrap());
    Ok(state)
}

/// Greedy over a training pool with `w ≡ 1`, `√ρ` or `ρ`.
pub fn run_greedy(model: &AffineModel, dist: &BetaBox, pool: &TrainingSet, opts: GreedyOptions) -> Result<GreedyState> {
    let weights: Vec<f64> = pool.nodes.iter().map(|y| opts.weight.eval(dist, y)).collect::<Result<_>>()?;
    let mut state = run_greedy_with_weights(model, &pool.nodes, &weights, opts.n_max, opts.tolerance)?;
    let meta = &mut state.reduced.metadata;
    meta.variant = Some(format!("greedy-{}", opts.weight.name()));
    meta.seed = pool.seed.map(|s| s.0);
    meta.n_training = pool.len();
    meta.alpha = Some(dist.alpha().to_vec());
    meta.beta = Some(dist.beta().to_vec());
    Ok(state)
}
