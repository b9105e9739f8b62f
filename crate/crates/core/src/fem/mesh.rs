use crate::error::{Error, Result};

/// Uniform right-triangle mesh of the unit square.
///
/// Vertex `(i, j)` sits at `(i/n, j/n)` and has index `j * (n + 1) + i`.
/// Every grid square is split along its lower-left to upper-right diagonal,
/// giving the triangles `(v00, v10, v11)` and `(v00, v11, v01)`, both
/// counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n_per_side: usize,
    vertices: Vec<[f64; 2]>,
    lattice: Vec<[i64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    n_interior: usize,
}

impl Mesh {
    pub fn new(n_per_side: usize) -> Result<Self> {
        if n_per_side == 0 {
            return Err(Error::InvalidArgument("mesh needs at least one cell per side".into()));
        }
        let n = n_per_side;
        let side = n + 1;
        let mut vertices = Vec::with_capacity(side * side);
        let mut lattice = Vec::with_capacity(side * side);
        let mut boundary = Vec::with_capacity(side * side);
        let mut interior_index = Vec::with_capacity(side * side);
        let mut n_interior = 0;
        for j in 0..side {
            for i in 0..side {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
                lattice.push([i as i64, j as i64]);
                let on_boundary = i == 0 || j == 0 || i == n || j == n;
                boundary.push(on_boundary);
                if on_boundary {
                    interior_index.push(None);
                } else {
                    interior_index.push(Some(n_interior));
                    n_interior += 1;
                }
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * side + i;
                let v10 = v00 + 1;
                let v01 = v00 + side;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        Ok(Self { n_per_side, vertices, lattice, triangles, boundary, interior_index, n_interior })
    }

    pub fn n_per_side(&self) -> usize {
        self.n_per_side
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Interior-dof index of a vertex, `None` on the Dirichlet boundary.
    pub fn interior_index(&self, vertex: usize) -> Option<usize> {
        self.interior_index[vertex]
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Integer lattice coordinates `(i, j)` of a vertex.
    pub fn lattice(&self, vertex: usize) -> [i64; 2] {
        self.lattice[vertex]
    }

    /// Area of every triangle, `1 / (2 n^2)`.
    pub fn triangle_area(&self) -> f64 {
        let n = self.n_per_side as f64;
        0.5 / (n * n)
    }

    /// Twice the signed area of a triangle in lattice units (always 1 here).
    pub(crate) fn lattice_double_area(&self, t: usize) -> i64 {
        let [a, b, c] = self.triangles[t].map(|v| self.lattice[v]);
        (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    }

    /// Interior-dof index of every vertex of the interior grid, in dof order.
    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.boundary[v])
    }
}

pub fn build_mesh(n_per_side: usize) -> Result<Mesh> {
    Mesh::new(n_per_side)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for (n, nv, nt, ni) in [(1, 4, 2, 0), (2, 9, 8, 1), (32, 1089, 2048, 961)] {
            let m = Mesh::new(n).unwrap();
            assert_eq!(m.vertices().len(), nv);
            assert_eq!(m.triangles().len(), nt);
            assert_eq!(m.n_interior(), ni);
        }
        let m = Mesh::new(2).unwrap();
        let v = m.interior_vertices().next().unwrap();
        assert_eq!(m.vertices()[v], [0.5, 0.5]);
    }

    #[test]
    fn rejects_empty() {
        assert!(Mesh::new(0).is_err());
    }

    #[test]
    fn orientation_and_boundary() {
        let m = Mesh::new(5).unwrap();
        for t in 0..m.triangles().len() {
            assert_eq!(m.lattice_double_area(t), 1);
        }
        for (v, x) in m.vertices().iter().enumerate() {
            let on = x.iter().any(|&c| c == 0.0 || c == 1.0);
            assert_eq!(on, m.boundary_flags()[v]);
        }
    }
}
