use nalgebra::DVector;

use super::mesh::Mesh;
use super::sparse::SparseSymMatrix;

/// Coefficient vector over the interior dofs of a mesh.
pub type Field = DVector<f64>;

/// P1 element stiffness of triangle `t`.
///
/// The P1 stiffness matrix is invariant under uniform scaling in 2D, so it is
/// computed from the integer lattice coordinates. On this mesh every entry is
/// a multiple of 1/2 and all sums are exact in floating point.
fn local_stiffness(mesh: &Mesh, t: usize) -> [[f64; 3]; 3] {
    let tri = mesh.triangles()[t];
    let p = tri.map(|v| mesh.lattice(v));
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let two_area = mesh.lattice_double_area(t) as f64;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) as f64 / (2.0 * two_area);
        }
    }
    k
}

fn assemble_with<F>(mesh: &Mesh, dim: usize, dof: F, mask: &dyn Fn(usize) -> bool) -> SparseSymMatrix
where
    F: Fn(usize) -> Option<usize>,
{
    let mut triplets = Vec::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !mask(t) {
            continue;
        }
        let k = local_stiffness(mesh, t);
        for a in 0..3 {
            let Some(r) = dof(tri[a]) else { continue };
            for b in 0..3 {
                let Some(c) = dof(tri[b]) else { continue };
                triplets.push((r, c, k[a][b]));
            }
        }
    }
    SparseSymMatrix::from_triplets(dim, triplets)
}

/// Stiffness matrix `∫ ∇u·∇v` restricted to interior dofs, integrating only
/// over triangles for which `mask(t)` holds.
pub fn assemble_stiffness(mesh: &Mesh, mask: impl Fn(usize) -> bool) -> SparseSymMatrix {
    assemble_with(mesh, mesh.n_interior(), |v| mesh.interior_index(v), &mask)
}

/// Stiffness over all vertices, before Dirichlet elimination.
pub fn assemble_stiffness_all_vertices(mesh: &Mesh, mask: impl Fn(usize) -> bool) -> SparseSymMatrix {
    assemble_with(mesh, mesh.vertices().len(), Some, &mask)
}

/// Load vector `∫ f v` with the three-point vertex rule on every triangle.
pub fn assemble_load(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Field {
    let mut load = DVector::zeros(mesh.n_interior());
    let w = mesh.triangle_area() / 3.0;
    for tri in mesh.triangles() {
        for &v in tri {
            if let Some(i) = mesh.interior_index(v) {
                load[i] += w * f(mesh.vertices()[v]);
            }
        }
    }
    load
}

/// The V-inner-product matrix: the H¹₀ seminorm `∫ ∇u·∇v`.
pub fn inner_product_matrix(mesh: &Mesh) -> SparseSymMatrix {
    assemble_stiffness(mesh, |_| true)
}

/// Squared norm `vᵀ X v`.
pub fn norm_squared(x: &SparseSymMatrix, v: &Field) -> f64 {
    x.bilinear(v, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::sparse::solve_spd;
    use std::f64::consts::PI;

    #[test]
    fn single_interior_dof() {
        let mesh = Mesh::new(2).unwrap();
        let a = inner_product_matrix(&mesh);
        assert_eq!(a.dim(), 1);
        assert_eq!(a.get(0, 0), 4.0);
        let f = assemble_load(&mesh, |_| 1.0);
        assert!((f[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_mask_is_zero() {
        let mesh = Mesh::new(4).unwrap();
        let a = assemble_stiffness(&mesh, |_| false);
        assert_eq!(a.nnz(), 0);
        assert!(assemble_load(&mesh, |_| 0.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_stencil_rows_sum_to_zero() {
        let mesh = Mesh::new(5).unwrap();
        let a = assemble_stiffness_all_vertices(&mesh, |_| true);
        for r in 0..a.dim() {
            assert_eq!(a.row(r).map(|(_, v)| v).sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn masks_partition_exactly() {
        let mesh = Mesh::new(6).unwrap();
        let full = inner_product_matrix(&mesh);
        let parts: Vec<_> = (0..3).map(|p| assemble_stiffness(&mesh, move |t| t % 3 == p)).collect();
        let sum = SparseSymMatrix::linear_combination(&parts.iter().map(|m| (1.0, m)).collect::<Vec<_>>()).unwrap();
        assert!(sum.same_entries(&full));
        assert!(full.is_symmetric());
        assert!(parts.iter().all(|p| p.is_symmetric()));
    }

    #[test]
    fn unit_load_sums_below_one() {
        let mesh = Mesh::new(8).unwrap();
        let s: f64 = assemble_load(&mesh, |_| 1.0).sum();
        assert!(s > 0.0 && s <= 1.0);
        // lumped area of the interior vertices: (n-1)^2 h^2
        assert!((s - 49.0 / 64.0).abs() < 1e-14);
    }

    #[test]
    fn positive_definite_small() {
        let mesh = Mesh::new(4).unwrap();
        let x = inner_product_matrix(&mesh).to_dense();
        let eig = x.symmetric_eigenvalues();
        assert!(eig.min() > 0.0);
    }

    /// Exact-solution oracle: elementwise H¹ seminorm of `u - u_h` with a
    /// degree-4 triangle rule.
    fn h1_error(n: usize) -> f64 {
        let mesh = Mesh::new(n).unwrap();
        let x = inner_product_matrix(&mesh);
        let f = assemble_load(&mesh, |p| 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin());
        let u = solve_spd(&x, &f).unwrap();
        let rule = [
            (0.223381589678011, [0.445948490915965, 0.445948490915965, 0.108103018168070]),
            (0.223381589678011, [0.445948490915965, 0.108103018168070, 0.445948490915965]),
            (0.223381589678011, [0.108103018168070, 0.445948490915965, 0.445948490915965]),
            (0.109951743655322, [0.091576213509771, 0.091576213509771, 0.816847572980459]),
            (0.109951743655322, [0.091576213509771, 0.816847572980459, 0.091576213509771]),
            (0.109951743655322, [0.816847572980459, 0.091576213509771, 0.091576213509771]),
        ];
        let area = mesh.triangle_area();
        let mut err2 = 0.0;
        for tri in mesh.triangles() {
            let p = tri.map(|v| mesh.vertices()[v]);
            let val = tri.map(|v| mesh.interior_index(v).map_or(0.0, |i| u[i]));
            let mut g = [0.0; 2];
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                g[0] += val[i] * (p[j][1] - p[k][1]) / (2.0 * area);
                g[1] += val[i] * (p[k][0] - p[j][0]) / (2.0 * area);
            }
            for (w, l) in rule {
                let xq = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
                let yq = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
                let ux = PI * (PI * xq).cos() * (PI * yq).sin();
                let uy = PI * (PI * xq).sin() * (PI * yq).cos();
                err2 += w * area * ((ux - g[0]).powi(2) + (uy - g[1]).powi(2));
            }
        }
        err2.sqrt()
    }

    #[test]
    fn manufactured_convergence() {
        let e: Vec<f64> = [8, 16, 32].iter().map(|&n| h1_error(n)).collect();
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
        }
    }
}
