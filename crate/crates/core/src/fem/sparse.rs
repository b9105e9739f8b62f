use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric sparse matrix in compressed-row storage (both triangles stored).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    /// Builds the matrix from `(row, col, value)` triplets, summing duplicates
    /// in insertion order. The caller is responsible for symmetry.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        // stable sort keeps the insertion order of duplicates
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) out of range for dimension {dim}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.dim);
        DVector::from_iterator(self.dim, (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()))
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (0..self.dim).map(|r| x[r] * self.row(r).map(|(c, v)| v * y[c]).sum::<f64>()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `Σ c_k A_k` over matrices of equal dimension.
    pub fn linear_combination(terms: &[(f64, &SparseSymMatrix)]) -> Result<Self> {
        let dim = terms.first().map(|(_, m)| m.dim).unwrap_or(0);
        let mut triplets = Vec::with_capacity(terms.iter().map(|(_, m)| m.nnz()).sum());
        for (c, m) in terms {
            if m.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: m.dim });
            }
            triplets.extend(m.triplets().map(|(r, col, v)| (r, col, c * v)));
        }
        Ok(Self::from_triplets(dim, triplets))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    pub fn is_symmetric(&self) -> bool {
        self.triplets().all(|(r, c, v)| self.get(c, r) == v)
    }

    /// Largest `|row - col|` among stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(r, c, _)| r.abs_diff(c)).max().unwrap_or(0)
    }

    /// Exact entrywise equality that ignores explicitly stored zeros.
    pub fn same_entries(&self, other: &SparseSymMatrix) -> bool {
        self.dim == other.dim
            && self.triplets().all(|(r, c, v)| other.get(r, c) == v)
            && other.triplets().all(|(r, c, v)| self.get(r, c) == v)
    }
}

/// Cholesky factor of a symmetric positive definite banded matrix.
///
/// Row `i` of the lower factor keeps columns `i - bw ..= i` in a dense strip.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    dim: usize,
    bw: usize,
    strip: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &SparseSymMatrix) -> Result<Self> {
        let dim = a.dim();
        let bw = a.bandwidth();
        let width = bw + 1;
        let mut strip = vec![0.0; dim * width];
        let at = |i: usize, j: usize| i * width + (bw + j - i);
        for (r, c, v) in a.triplets() {
            if c <= r {
                strip[at(r, c)] = v;
            }
        }
        let max_diag = (0..dim).map(|i| strip[at(i, i)].abs()).fold(0.0, f64::max);
        let tiny = max_diag * 1e-14;
        for i in 0..dim {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                let mut s = strip[at(i, j)];
                for k in lo..j {
                    s -= strip[at(i, k)] * strip[at(j, k)];
                }
                if i == j {
                    if !(s > tiny) {
                        return Err(Error::SingularMatrix { row: i, pivot: s });
                    }
                    strip[at(i, i)] = s.sqrt();
                } else {
                    strip[at(i, j)] = s / strip[at(j, j)];
                }
            }
        }
        Ok(Self { dim, bw, strip })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.dim);
        let width = self.bw + 1;
        let at = |i: usize, j: usize| i * width + (self.bw + j - i);
        let mut x = b.clone();
        for i in 0..self.dim {
            let mut s = x[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.strip[at(i, k)] * x[k];
            }
            x[i] = s / self.strip[at(i, i)];
        }
        for i in (0..self.dim).rev() {
            let mut s = x[i];
            for k in (i + 1)..(i + 1 + self.bw).min(self.dim) {
                s -= self.strip[at(k, i)] * x[k];
            }
            x[i] = s / self.strip[at(i, i)];
        }
        x
    }
}

/// Relative residual target of every truth solve.
pub const SOLVE_RTOL: f64 = 1e-10;

/// Solves `A x = b` for SPD `A` with a banded Cholesky factorization followed
/// by at most two steps of iterative refinement.
pub fn solve_spd(a: &SparseSymMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    let factor = BandedCholesky::factor(a)?;
    solve_with_factor(a, &factor, b)
}

/// As [`solve_spd`] with an existing factorization of `a`.
pub fn solve_with_factor(
    a: &SparseSymMatrix,
    factor: &BandedCholesky,
    b: &DVector<f64>,
) -> Result<DVector<f64>> {
    if a.dim() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.len() });
    }
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(DVector::zeros(b.len()));
    }
    let mut x = factor.solve(b);
    let mut rel = f64::INFINITY;
    for _ in 0..3 {
        let r = b - a.mul_vec(&x);
        rel = r.norm() / b_norm;
        if rel <= SOLVE_RTOL {
            return Ok(x);
        }
        x += factor.solve(&r);
    }
    Err(Error::SolverStagnation { residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseSymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSymMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseSymMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 4.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn diagonal_identity_solve() {
        let m = SparseSymMatrix::from_triplets(3, (0..3).map(|i| (i, i, 1.0)).collect());
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        assert_eq!(solve_spd(&m, &b).unwrap(), b);
    }

    #[test]
    fn zero_rhs() {
        let x = solve_spd(&tridiag(5), &DVector::zeros(5)).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let a = tridiag(20);
        let b = DVector::from_fn(20, |i, _| (i as f64).sin());
        let x = solve_spd(&a, &b).unwrap();
        let dense = a.to_dense().cholesky().unwrap().solve(&b);
        assert!((x - dense).norm() < 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let a = SparseSymMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(BandedCholesky::factor(&a), Err(Error::SingularMatrix { .. })));
        let z = SparseSymMatrix::zeros(3);
        assert!(solve_spd(&z, &DVector::from_element(3, 1.0)).is_err());
    }
}
