//! Weighted proper orthogonal decomposition.
//!
//! Given snapshots `φ_i = u(y^i)` and weights `w_i`, the retained space
//! minimizes `Σ_i w_i ‖φ_i − P_N φ_i‖²_X`. The weighted correlation operator
//! `Ĉ = diag(w) C` is only self-adjoint in the `C` inner product, so the
//! eigenproblem is solved in the symmetric form `D^{1/2} C D^{1/2} v = λ v`
//! with `D = diag(w)`, and the snapshot coefficients are `n = D^{1/2} v`
//! (then `Ĉ n = λ n`).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::basis::{Orthonormalizer, ReducedBasis};
use crate::error::{Error, Result};
use crate::fem::{Field, SparseSymMatrix};
use crate::thermal_block::AffineModel;
use crate::training::TrainingSet;

/// Default relative eigenvalue cutoff.
pub const DEFAULT_TOL_REL: f64 = 1e-12;

/// Snapshot correlation matrix `C_ij = ⟨φ_i, φ_j⟩_X`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(pub DMatrix<f64>);

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Eigen-decomposition output of [`weighted_pod`].
#[derive(Debug, Clone)]
pub struct PodCoefficients {
    /// `n^i` for the retained modes, each of length `n_t`.
    pub coefficients: Vec<DVector<f64>>,
    /// Every eigenvalue of `D^{1/2} C D^{1/2}`, nonincreasing.
    pub eigenvalues: Vec<f64>,
    pub n_max: usize,
    /// Number of negative weights set to zero.
    pub clamped_negative: usize,
    /// Sum of the magnitudes of the clamped weights.
    pub clamped_mass: f64,
}

/// Truth solves at every training node, in node order.
pub fn compute_snapshots(model: &AffineModel, ts: &TrainingSet) -> Result<Vec<Field>> {
    ts.nodes
        .par_iter()
        .enumerate()
        .map(|(index, y)| {
            model.truth_solve(y).map_err(|e| Error::SnapshotFailed { index, source: Box::new(e) })
        })
        .collect()
}

/// `C = Sᵀ X S`, symmetrized.
pub fn correlation(snapshots: &[Field], x: &SparseSymMatrix) -> CorrelationMatrix {
    let n = snapshots.len();
    let xs: Vec<Field> = snapshots.par_iter().map(|s| x.mul_vec(s)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| snapshots[i].dot(&xs[j])).collect())
        .collect();
    let c = DMatrix::from_fn(n, n, |i, j| 0.5 * (rows[i][j] + rows[j][i]));
    CorrelationMatrix(c)
}

/// Weighted POD eigenproblem. Negative weights are clamped to zero.
///
/// Retains `N = min(n_max, #{λ_i > tol_rel · λ_1})` modes.
pub fn weighted_pod(c: &CorrelationMatrix, weights: &[f64], n_max: usize, tol_rel: f64) -> Result<PodCoefficients> {
    let n = c.dim();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: weights.len() });
    }
    let clamped: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
    let clamped_negative = weights.iter().filter(|&&w| w < 0.0).count();
    let clamped_mass: f64 = weights.iter().filter(|&&w| w < 0.0).fold(0.0, |acc, w| acc - w);
    if clamped_negative > 0 {
        log::warn!("clamped {clamped_negative} negative POD weights (total mass {clamped_mass:e}) to zero");
    }
    if !clamped.iter().any(|&w| w > 0.0) {
        return Err(Error::NoPositiveWeights(format!("{n} training weights, none positive")));
    }
    let sqrt_w: Vec<f64> = clamped.iter().map(|w| w.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| sqrt_w[i] * c.0[(i, j)] * sqrt_w[j]);
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lead = eigenvalues[0];
    if !(lead > 0.0) {
        return Err(Error::NoPositiveWeights("weighted correlation matrix has no positive eigenvalue".into()));
    }
    let retained = eigenvalues.iter().take(n_max).take_while(|&&l| l > tol_rel * lead).count();
    let coefficients = order
        .iter()
        .take(retained)
        .map(|&i| {
            let v = eig.eigenvectors.column(i);
            DVector::from_fn(n, |j, _| sqrt_w[j] * v[j])
        })
        .collect();
    Ok(PodCoefficients { coefficients, eigenvalues, n_max, clamped_negative, clamped_mass })
}

/// `ξ^i = Σ_j n^i_j φ_j`, X-orthonormalized with deflation.
pub fn lift_basis(snapshots: &[Field], pod: &PodCoefficients, x: &SparseSymMatrix) -> ReducedBasis {
    let mut ortho = Orthonormalizer::new(x);
    for coeffs in &pod.coefficients {
        let mut xi = Field::zeros(snapshots.first().map_or(0, |s| s.len()));
        for (s, &c) in snapshots.iter().zip(coeffs.iter()) {
            if c != 0.0 {
                xi.axpy(c, s, 1.0);
            }
        }
        ortho.push(xi);
    }
    let fields = ortho.into_fields();
    let eigenvalues = pod.eigenvalues.clone();
    ReducedBasis { fields, eigenvalues, n_max: pod.n_max }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PodOptions {
    pub n_max: usize,
    pub tol_rel: f64,
}

impl Default for PodOptions {
    fn default() -> Self {
        Self { n_max: 30, tol_rel: DEFAULT_TOL_REL }
    }
}

#[derive(Debug, Clone)]
pub struct PodOutcome {
    pub basis: ReducedBasis,
    /// Training nodes actually solved (nonzero clamped weight).
    pub n_snapshots: usize,
    /// Nodes skipped for zero (or clamped negative) weight.
    pub pruned: usize,
    pub clamped_negative: usize,
    pub clamped_mass: f64,
}

/// Full weighted-POD offline phase. Nodes whose weight is not positive are
/// pruned before any truth solve.
pub fn offline_pod(model: &AffineModel, ts: &TrainingSet, opts: PodOptions) -> Result<PodOutcome> {
    if ts.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let clamped_negative = ts.pod_weights.iter().filter(|&&w| w < 0.0).count();
    let clamped_mass: f64 = ts.pod_weights.iter().filter(|&&w| w < 0.0).fold(0.0, |acc, w| acc - w);
    if clamped_negative > 0 {
        log::warn!("clamped {clamped_negative} negative POD weights (total mass {clamped_mass:e}) to zero");
    }
    let keep: Vec<usize> = (0..ts.len()).filter(|&i| ts.pod_weights[i] > 0.0).collect();
    if keep.is_empty() {
        return Err(Error::NoPositiveWeights(format!("all {} training weights are zero or negative", ts.len())));
    }
    let kept = TrainingSet {
        nodes: keep.iter().map(|&i| ts.nodes[i].clone()).collect(),
        pod_weights: keep.iter().map(|&i| ts.pod_weights[i]).collect(),
        quadrature_weights: None,
        kind: ts.kind,
        seed: ts.seed,
    };
    let snapshots = compute_snapshots(model, &kept)?;
    let c = correlation(&snapshots, model.x());
    let pod = weighted_pod(&c, &kept.pod_weights, opts.n_max, opts.tol_rel)?;
    let basis = lift_basis(&snapshots, &pod, model.x());
    Ok(PodOutcome {
        basis,
        n_snapshots: kept.len(),
        pruned: ts.len() - kept.len(),
        clamped_negative,
        clamped_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh;
    use crate::stochastics::{BetaBox, Seed};
    use crate::thermal_block::ParameterPoint;
    use crate::training::{build_training_set, SetSize, TrainingKind, Variant};

    fn model() -> AffineModel {
        AffineModel::new(Mesh::new(8).unwrap(), 4).unwrap()
    }

    fn set(nodes: Vec<Vec<f64>>, w: Vec<f64>) -> TrainingSet {
        TrainingSet {
            nodes: nodes.into_iter().map(ParameterPoint::new).collect(),
            pod_weights: w,
            quadrature_weights: None,
            kind: TrainingKind::Imported,
            seed: None,
        }
    }

    #[test]
    fn centre_snapshot_is_half_poisson() {
        let m = model();
        let s = compute_snapshots(&m, &set(vec![vec![2.0; 4]], vec![1.0])).unwrap();
        let u1 = m.truth_solve(&ParameterPoint::new(vec![1.0; 4])).unwrap();
        assert!((&s[0] - u1 / 2.0).norm() < 1e-13);
    }

    #[test]
    fn snapshot_failure_carries_index() {
        let m = model();
        let err = compute_snapshots(&m, &set(vec![vec![2.0; 4], vec![4.0; 4]], vec![1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::SnapshotFailed { index: 1, .. }));
    }

    #[test]
    fn single_snapshot() {
        let m = model();
        let ts = set(vec![vec![1.5, 2.0, 2.5, 1.2]], vec![1.0]);
        let s = compute_snapshots(&m, &ts).unwrap();
        let c = correlation(&s, m.x());
        assert!((c.0[(0, 0)] - m.x_norm_squared(&s[0])).abs() < 1e-15 * c.0[(0, 0)]);
        let pod = weighted_pod(&c, &[1.0], 5, DEFAULT_TOL_REL).unwrap();
        let b = lift_basis(&s, &pod, m.x());
        assert_eq!(b.len(), 1);
        let expect = &s[0] / m.x_norm(&s[0]);
        let diff = (&b.fields[0] - &expect).norm().min((&b.fields[0] + &expect).norm());
        assert!(diff < 1e-12 * expect.norm());
    }

    #[test]
    fn duplicates_deflate() {
        let m = model();
        let ts = set(vec![vec![1.5; 4], vec![1.5; 4]], vec![0.5, 0.5]);
        let s = compute_snapshots(&m, &ts).unwrap();
        assert_eq!(s[0], s[1]);
        let c = correlation(&s, m.x());
        let pod = weighted_pod(&c, &ts.pod_weights, 2, 0.0).unwrap();
        assert!(pod.eigenvalues[1].abs() < 1e-12 * pod.eigenvalues[0]);
        assert_eq!(lift_basis(&s, &pod, m.x()).len(), 1);
    }

    #[test]
    fn one_hot_weight_picks_that_snapshot() {
        let m = model();
        let ts = set(vec![vec![1.1, 2.0, 2.9, 1.5], vec![2.5, 1.2, 1.0, 3.0], vec![2.0; 4]], vec![0.0, 1.0, 0.0]);
        let s = compute_snapshots(&m, &ts).unwrap();
        let c = correlation(&s, m.x());
        let pod = weighted_pod(&c, &ts.pod_weights, 3, DEFAULT_TOL_REL).unwrap();
        let b = lift_basis(&s, &pod, m.x());
        assert_eq!(b.len(), 1);
        let e = &s[1] / m.x_norm(&s[1]);
        assert!((m.x_inner(&b.fields[0], &e).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let c = CorrelationMatrix(DMatrix::identity(2, 2));
        assert!(matches!(weighted_pod(&c, &[0.0, -1.0], 2, 0.0), Err(Error::NoPositiveWeights(_))));
        let p = weighted_pod(&c, &[1.0, -1.0], 2, 0.0).unwrap();
        assert_eq!(p.clamped_negative, 1);
        assert_eq!(p.clamped_mass, 1.0);
    }

    #[test]
    fn offline_prunes_zero_weights() {
        let m = model();
        let d = BetaBox::symmetric(4, 10.0, 10.0).unwrap();
        let ts = build_training_set(Variant::ClenshawCurtis, 4, &d, SetSize::Level(3), Seed(0)).unwrap();
        let out = offline_pod(&m, &ts, PodOptions { n_max: 5, tol_rel: DEFAULT_TOL_REL }).unwrap();
        assert_eq!(out.n_snapshots, 1);
        assert_eq!(out.pruned, 80);
        assert_eq!(out.basis.len(), 1);
    }
}
