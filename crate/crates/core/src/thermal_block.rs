//! The thermal-block benchmark: piecewise-constant diffusion on a uniform
//! `√K × √K` partition of the unit square, `f ≡ 1`, parameters in `[1, 3]^K`.
//!
//! The operator is affine in the parameter,
//! `A(y) = Σ_k y_k A_k`, with `A_k` the stiffness restricted to block `k`.
//! Blocks are numbered row-major from the lower-left subsquare, `x` fastest.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_load, assemble_stiffness, inner_product_matrix, solve_spd, solve_with_factor,
    BandedCholesky, Field, Mesh, SparseSymMatrix,
};

/// Lower end of every parameter interval.
pub const PARAM_MIN: f64 = 1.0;
/// Upper end of every parameter interval.
pub const PARAM_MAX: f64 = 3.0;

/// A point `y` of the parameter box `Γ = [1, 3]^K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterPoint(pub Vec<f64>);

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    /// The centre `(2, …, 2)` of the box.
    pub fn center(k: usize) -> Self {
        Self(vec![0.5 * (PARAM_MIN + PARAM_MAX); k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Rejects points outside the closed box (or of the wrong dimension).
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.0.len() != k {
            return Err(Error::DimensionMismatch { expected: k, actual: self.0.len() });
        }
        for (index, &value) in self.0.iter().enumerate() {
            if !(PARAM_MIN..=PARAM_MAX).contains(&value) {
                return Err(Error::OutOfDomain { index, value });
            }
        }
        Ok(())
    }

    /// True when some coordinate sits on the boundary of `[1, 3]`.
    pub fn on_boundary(&self) -> bool {
        self.0.iter().any(|&v| v == PARAM_MIN || v == PARAM_MAX)
    }
}

impl fmt::Display for ParameterPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Affinely decomposed thermal-block model.
#[derive(Debug, Clone)]
pub struct AffineModel {
    k: usize,
    mesh: Mesh,
    blocks: Vec<SparseSymMatrix>,
    triangle_block: Vec<usize>,
    load: Field,
    x: SparseSymMatrix,
    x_factor: BandedCholesky,
}

impl AffineModel {
    pub fn new(mesh: Mesh, k: usize) -> Result<Self> {
        let side = match k {
            4 => 2,
            9 => 3,
            _ => return Err(Error::Unsupported(format!("thermal block needs K = 4 or 9, got {k}"))),
        };
        let n = mesh.n_per_side();
        if n % side != 0 {
            return Err(Error::InvalidArgument(format!(
                "mesh with {n} cells per side does not align with a {side}x{side} block partition"
            )));
        }
        let cells_per_block = (n / side) as i64;
        // barycenter in lattice units is (Σi/3, Σj/3); it never lies on a block edge
        let triangle_block: Vec<usize> = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let (si, sj) = tri.iter().fold((0, 0), |(a, b), &v| {
                    let [i, j] = mesh.lattice(v);
                    (a + i, b + j)
                });
                let bx = (si / (3 * cells_per_block)) as usize;
                let by = (sj / (3 * cells_per_block)) as usize;
                by * side + bx
            })
            .collect();
        let blocks = (0..k).map(|b| assemble_stiffness(&mesh, |t| triangle_block[t] == b)).collect();
        let load = assemble_load(&mesh, |_| 1.0);
        let x = inner_product_matrix(&mesh);
        let x_factor = BandedCholesky::factor(&x)?;
        Ok(Self { k, mesh, blocks, triangle_block, load, x, x_factor })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_interior()
    }

    /// Stiffness blocks `A_1 … A_K` (stored zero-based).
    pub fn stiffness_blocks(&self) -> &[SparseSymMatrix] {
        &self.blocks
    }

    /// Block index of every triangle.
    pub fn triangle_blocks(&self) -> &[usize] {
        &self.triangle_block
    }

    /// The parameter-independent load `F_0` (`f ≡ 1`).
    pub fn load(&self) -> &Field {
        &self.load
    }

    /// The V-inner-product matrix.
    pub fn x(&self) -> &SparseSymMatrix {
        &self.x
    }

    pub fn x_factor(&self) -> &BandedCholesky {
        &self.x_factor
    }

    /// `A(y) = Σ_k y_k A_k`.
    pub fn assemble_operator(&self, y: &ParameterPoint) -> Result<SparseSymMatrix> {
        y.validate(self.k)?;
        let terms: Vec<_> = y.coords().iter().copied().zip(self.blocks.iter()).collect();
        SparseSymMatrix::linear_combination(&terms)
    }

    /// Truth solution `u(y)`.
    pub fn truth_solve(&self, y: &ParameterPoint) -> Result<Field> {
        let a = self.assemble_operator(y)?;
        solve_spd(&a, &self.load)
    }

    /// Solves `X u = g`.
    pub fn solve_x(&self, rhs: &Field) -> Result<Field> {
        solve_with_factor(&self.x, &self.x_factor, rhs)
    }

    /// `‖v‖²_X`.
    pub fn x_norm_squared(&self, v: &Field) -> f64 {
        self.x.bilinear(v, v)
    }

    /// `‖v‖_X`.
    pub fn x_norm(&self, v: &Field) -> f64 {
        self.x_norm_squared(v).max(0.0).sqrt()
    }

    /// `⟨u, v⟩_X`.
    pub fn x_inner(&self, u: &Field, v: &Field) -> f64 {
        self.x.bilinear(u, v)
    }
}

pub fn build_thermal_block(mesh: Mesh, k: usize) -> Result<AffineModel> {
    AffineModel::new(mesh, k)
}

/// Coercivity lower bound with respect to the X-inner product: `min_k y_k`.
pub fn coercivity_lower_bound(y: &ParameterPoint) -> f64 {
    y.coords().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Continuity constant with respect to the X-inner product: `max_k y_k`.
pub fn continuity_constant(y: &ParameterPoint) -> f64 {
    y.coords().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize, k: usize) -> AffineModel {
        AffineModel::new(Mesh::new(n).unwrap(), k).unwrap()
    }

    #[test]
    fn rejects_bad_configurations() {
        assert!(AffineModel::new(Mesh::new(4).unwrap(), 5).is_err());
        assert!(AffineModel::new(Mesh::new(5).unwrap(), 4).is_err());
        assert!(AffineModel::new(Mesh::new(4).unwrap(), 9).is_err());
    }

    #[test]
    fn blocks_partition_the_laplacian() {
        for (n, k) in [(4, 4), (6, 9), (12, 4), (12, 9)] {
            let m = model(n, k);
            let terms: Vec<_> = m.stiffness_blocks().iter().map(|b| (1.0, b)).collect();
            let sum = SparseSymMatrix::linear_combination(&terms).unwrap();
            assert!(sum.same_entries(m.x()));
        }
    }

    #[test]
    fn nine_blocks_eight_triangles_each() {
        let m = model(6, 9);
        assert_eq!(m.triangle_blocks().len(), 72);
        for b in 0..9 {
            assert_eq!(m.triangle_blocks().iter().filter(|&&t| t == b).count(), 8);
        }
        // block 0 is the lower-left subsquare, block 2 lower-right
        let centroid = |t: usize| {
            let tri = m.mesh().triangles()[t];
            let v = m.mesh().vertices();
            [(v[tri[0]][0] + v[tri[1]][0] + v[tri[2]][0]) / 3.0, (v[tri[0]][1] + v[tri[1]][1] + v[tri[2]][1]) / 3.0]
        };
        for (t, &b) in m.triangle_blocks().iter().enumerate() {
            let c = centroid(t);
            assert_eq!(b, (c[1] * 3.0) as usize * 3 + (c[0] * 3.0) as usize);
        }
    }

    #[test]
    fn block_support_is_local() {
        let m = model(4, 4);
        let mesh = m.mesh();
        for (b, a) in m.stiffness_blocks().iter().enumerate() {
            let touching: Vec<bool> = {
                let mut t = vec![false; mesh.n_interior()];
                for (tri, &blk) in mesh.triangles().iter().zip(m.triangle_blocks()) {
                    if blk == b {
                        for &v in tri {
                            if let Some(i) = mesh.interior_index(v) {
                                t[i] = true;
                            }
                        }
                    }
                }
                t
            };
            for (r, c, v) in a.triplets() {
                if v != 0.0 {
                    assert!(touching[r] && touching[c]);
                }
            }
        }
    }

    #[test]
    fn operator_scaling() {
        let m = model(4, 4);
        let a1 = m.assemble_operator(&ParameterPoint::new(vec![1.0; 4])).unwrap();
        assert!(a1.same_entries(m.x()));
        let a3 = m.assemble_operator(&ParameterPoint::new(vec![3.0; 4])).unwrap();
        assert!(a3.same_entries(&m.x().scale(3.0)));
        assert!(m.assemble_operator(&ParameterPoint::new(vec![0.5, 1.0, 1.0, 1.0])).is_err());
        assert!(m.assemble_operator(&ParameterPoint::new(vec![1.0; 3])).is_err());
    }

    #[test]
    fn rayleigh_quotients_and_coercivity() {
        let m = model(8, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let y = ParameterPoint::new((0..4).map(|_| rng.random_range(1.0..=3.0)).collect());
            let a = m.assemble_operator(&y).unwrap();
            let v = Field::from_fn(m.n_dofs(), |_, _| rng.random_range(-1.0..1.0));
            let q = a.bilinear(&v, &v) / m.x_norm_squared(&v);
            let lo = coercivity_lower_bound(&y);
            let hi = continuity_constant(&y);
            assert!(q >= lo * (1.0 - 1e-12) && q <= hi * (1.0 + 1e-12));
        }
        assert_eq!(coercivity_lower_bound(&ParameterPoint::new(vec![1.0, 3.0, 1.0, 3.0])), 1.0);
        assert_eq!(coercivity_lower_bound(&ParameterPoint::new(vec![2.0; 4])), 2.0);
    }

    #[test]
    fn truth_solution_linearity() {
        let m = model(8, 4);
        let u1 = m.truth_solve(&ParameterPoint::new(vec![1.0; 4])).unwrap();
        let poisson = solve_spd(m.x(), m.load()).unwrap();
        assert!((&u1 - &poisson).norm() <= 1e-14 * poisson.norm());
        let u2 = m.truth_solve(&ParameterPoint::center(4)).unwrap();
        let u3 = m.truth_solve(&ParameterPoint::new(vec![3.0; 4])).unwrap();
        assert!((&u2 - &u1 / 2.0).norm() <= 1e-13 * u1.norm());
        assert!((&u3 - &u1 / 3.0).norm() <= 1e-13 * u1.norm());
    }

    #[test]
    fn compliance_decreases_with_diffusion() {
        let m = model(8, 4);
        let lo = ParameterPoint::new(vec![1.2, 1.5, 2.0, 1.1]);
        let hi = ParameterPoint::new(vec![1.3, 2.5, 2.0, 2.9]);
        let s = |y: &ParameterPoint| m.truth_solve(y).unwrap().dot(m.load());
        assert!(s(&lo) >= s(&hi));
    }
}
