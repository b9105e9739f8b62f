use crate::fem::{Field, SparseSymMatrix};

/// Relative X-norm below which a vector counts as linearly dependent on the
/// current basis.
pub const DEFLATION_TOL: f64 = 1e-10;

/// X-orthonormal reduced basis `ξ¹ … ξᴺ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis {
    pub fields: Vec<Field>,
    /// POD eigenvalues in nonincreasing order (empty for greedy bases).
    pub eigenvalues: Vec<f64>,
    pub n_max: usize,
}

impl ReducedBasis {
    pub fn empty(n_max: usize) -> Self {
        Self { fields: Vec::new(), eigenvalues: Vec::new(), n_max }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `⟨ξ^i, ξ^j⟩_X`.
    pub fn gram(&self, x: &SparseSymMatrix) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let xf: Vec<Field> = self.fields.iter().map(|f| x.mul_vec(f)).collect();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.fields[i].dot(&xf[j]))
    }

    /// X-orthogonal projection of `v` onto the span of the first `n` vectors.
    pub fn project(&self, x: &SparseSymMatrix, v: &Field, n: usize) -> Field {
        let xv = x.mul_vec(v);
        let mut p = Field::zeros(v.len());
        for xi in self.fields.iter().take(n) {
            p.axpy(xi.dot(&xv), xi, 1.0);
        }
        p
    }
}

/// Incremental X-orthonormalizer: modified Gram-Schmidt with one
/// re-orthogonalization pass.
#[derive(Debug, Clone)]
pub struct Orthonormalizer<'a> {
    x: &'a SparseSymMatrix,
    basis: Vec<Field>,
    x_basis: Vec<Field>,
}

impl<'a> Orthonormalizer<'a> {
    pub fn new(x: &'a SparseSymMatrix) -> Self {
        Self { x, basis: Vec::new(), x_basis: Vec::new() }
    }

    /// Starts from fields that are already X-orthonormal.
    pub fn with_orthonormal(x: &'a SparseSymMatrix, fields: &[Field]) -> Self {
        let x_basis = fields.iter().map(|f| x.mul_vec(f)).collect();
        Self { x, basis: fields.to_vec(), x_basis }
    }

    /// Orthonormalizes `v` against the current basis. Returns the new unit
    /// vector, or `None` when `v` deflates.
    pub fn push(&mut self, mut v: Field) -> Option<&Field> {
        let before = self.x.bilinear(&v, &v).max(0.0).sqrt();
        if before == 0.0 || !before.is_finite() {
            return None;
        }
        for _ in 0..2 {
            for (q, xq) in self.basis.iter().zip(&self.x_basis) {
                let c = xq.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let xv = self.x.mul_vec(&v);
        let after = v.dot(&xv).max(0.0).sqrt();
        if after < DEFLATION_TOL * before {
            return None;
        }
        self.basis.push(v / after);
        self.x_basis.push(xv / after);
        self.basis.last()
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn into_fields(self) -> Vec<Field> {
        self.basis
    }
}
