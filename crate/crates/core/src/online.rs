//! Online phase: reduced assembly and solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::ReducedBasis;
use crate::error::{Error, Result};
use crate::fem::{assemble_load, Field, Mesh};
use crate::stochastics::BetaBox;
use crate::thermal_block::{AffineModel, ParameterPoint};

/// Reduced matrices with a larger condition estimate are reported as
/// near-singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builder {
    Pod,
    Greedy,
}

/// Provenance of a reduced model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub builder: Builder,
    pub variant: Option<String>,
    pub seed: Option<u64>,
    pub mesh_n: usize,
    pub k: usize,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    /// Training nodes or greedy pool size.
    pub n_training: usize,
    /// Greedy selections in order; empty for POD.
    #[serde(default)]
    pub chosen_parameters: Vec<ParameterPoint>,
}

impl ModelMetadata {
    pub fn new(builder: Builder, model: &AffineModel) -> Self {
        Self {
            builder,
            variant: None,
            seed: None,
            mesh_n: model.mesh().n_per_side(),
            k: model.k(),
            alpha: None,
            beta: None,
            n_training: 0,
            chosen_parameters: Vec::new(),
        }
    }

    pub fn with_distribution(mut self, dist: &BetaBox) -> Self {
        self.alpha = Some(dist.alpha().to_vec());
        self.beta = Some(dist.beta().to_vec());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub basis: ReducedBasis,
    /// `A_k^N = Zᵀ A_k Z`.
    pub blocks: Vec<DMatrix<f64>>,
    /// `F^N = Zᵀ F₀`.
    pub load: DVector<f64>,
    pub metadata: ModelMetadata,
}

/// Coefficients of `u_N(y)` in the reduced basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub coefficients: DVector<f64>,
    pub condition: f64,
}

impl ReducedModel {
    pub fn empty(model: &AffineModel, builder: Builder, n_max: usize) -> Self {
        Self {
            basis: ReducedBasis::empty(n_max),
            blocks: vec![DMatrix::zeros(0, 0); model.k()],
            load: DVector::zeros(0),
            metadata: ModelMetadata::new(builder, model),
        }
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Appends an X-normalized field, growing every reduced block by one
    /// row and column.
    pub fn push(&mut self, model: &AffineModel, xi: Field) {
        let n = self.len();
        for (block, a) in self.blocks.iter_mut().zip(model.stiffness_blocks()) {
            let axi = a.mul_vec(&xi);
            let mut grown = block.clone().resize(n + 1, n + 1, 0.0);
            for (i, f) in self.basis.fields.iter().enumerate() {
                let v = f.dot(&axi);
                grown[(i, n)] = v;
                grown[(n, i)] = v;
            }
            grown[(n, n)] = xi.dot(&axi);
            *block = grown;
        }
        let mut load = self.load.clone().resize_vertically(n + 1, 0.0);
        load[n] = xi.dot(model.load());
        self.load = load;
        self.basis.fields.push(xi);
    }

    /// `Σ_k y_k A_k^N` restricted to the leading `n × n` block.
    pub fn operator(&self, y: &ParameterPoint, n: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for (yk, block) in y.coords().iter().zip(&self.blocks) {
            a += block.view((0, 0), (n, n)) * *yk;
        }
        a
    }

    /// Lifts reduced coefficients to a truth-space field.
    pub fn lift(&self, coefficients: &DVector<f64>) -> Field {
        let dofs = self.basis.fields.first().map_or(0, |f| f.len());
        let mut u = Field::zeros(dofs);
        for (c, xi) in coefficients.iter().zip(&self.basis.fields) {
            u.axpy(*c, xi, 1.0);
        }
        u
    }

    /// Compliance output `s(u_N) = cᵀ F^N`.
    pub fn output(&self, coefficients: &DVector<f64>) -> f64 {
        coefficients.dot(&self.load.rows(0, coefficients.len()))
    }
}

/// Dense Galerkin projection of every affine block onto `basis`.
pub fn project_model(model: &AffineModel, basis: ReducedBasis) -> ReducedModel {
    let mut rm = ReducedModel::empty(model, Builder::Pod, basis.n_max);
    rm.basis.eigenvalues = basis.eigenvalues;
    for xi in basis.fields {
        rm.push(model, xi);
    }
    rm
}

fn check_size(rm: &ReducedModel, y: &ParameterPoint, n: usize) -> Result<()> {
    y.validate(rm.k())?;
    if n > rm.len() {
        return Err(Error::InvalidArgument(format!("requested N = {n} exceeds basis dimension {}", rm.len())));
    }
    Ok(())
}

/// Solves the size-`n` reduced problem at `y`, failing on a condition
/// estimate above [`CONDITION_LIMIT`].
pub fn reduced_solve(rm: &ReducedModel, y: &ParameterPoint, n: usize) -> Result<ReducedSolution> {
    check_size(rm, y, n)?;
    if n == 0 {
        return Ok(ReducedSolution { coefficients: DVector::zeros(0), condition: 1.0 });
    }
    let a = rm.operator(y, n);
    let eig = SymmetricEigen::new(a.clone());
    let hi = eig.eigenvalues.max();
    let lo = eig.eigenvalues.min();
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::NearSingular { n, condition });
    }
    let rhs = rm.load.rows(0, n).into_owned();
    let coefficients = a
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or(Error::NearSingular { n, condition })?;
    Ok(ReducedSolution { coefficients, condition })
}

/// Reduced solve by LU without a conditioning check.
pub fn reduced_solve_unchecked(rm: &ReducedModel, y: &ParameterPoint, n: usize) -> Result<DVector<f64>> {
    check_size(rm, y, n)?;
    let rhs = rm.load.rows(0, n).into_owned();
    rm.operator(y, n)
        .lu()
        .solve(&rhs)
        .ok_or(Error::NearSingular { n, condition: f64::INFINITY })
}

/// `s(u) = ∫_D u`, with the vertex quadrature used for the load.
pub fn output_functional(field: &Field, mesh: &Mesh) -> f64 {
    field.dot(&assemble_load(mesh, |_| 1.0))
}
