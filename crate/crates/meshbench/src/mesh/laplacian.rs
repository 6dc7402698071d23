//! Cotangent stiffness matrix and lumped mass for the Laplace–Beltrami
//! operator.
//!
//! Conventions: the stiffness `W` is symmetric positive semidefinite with
//! `(W x)_i = Σ_j w_ij (x_i − x_j)` where `w_ij = (cot α + cot β) / 2` over
//! the (up to two) angles opposite edge `(i,j)`. Cotangents are clamped to
//! `[1e-6, 1e6]` — negative (obtuse) contributions are raised to the lower
//! clamp so all edge weights stay positive — and zero-area triangles
//! contribute nothing. The mass matrix is the diagonal of barycentric vertex
//! areas. Row sums of `W` are zero by construction, so constants are in its
//! kernel.

use crate::TriMesh;

/// Clamping range for cotangent values.
pub const COT_CLAMP: (f64, f64) = (1e-6, 1e6);

/// Symmetric sparse matrix in CSR form with rows stored in canonical
/// (rank-sorted) column order, so matrix–vector products reduce in a
/// relabeling-invariant order.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_off: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Assembles from raw CSR arrays. Row offsets must be monotone with
    /// `row_off.len() == n + 1`, and columns within each row sorted.
    pub fn from_parts(n: usize, row_off: Vec<usize>, cols: Vec<u32>, vals: Vec<f64>) -> SparseSym {
        debug_assert_eq!(row_off.len(), n + 1);
        debug_assert_eq!(*row_off.last().unwrap(), cols.len());
        debug_assert_eq!(cols.len(), vals.len());
        SparseSym { n, row_off, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_off[i]..self.row_off[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    /// `y = A x`.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c as usize];
            }
            y[i] = acc;
        }
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut row = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                row += v * x[*c as usize];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                if *c as usize == i {
                    d[i] = *v;
                }
            }
        }
        d
    }

    /// Entry lookup by linear scan of the (short) row; test helper.
    pub fn get(&self, i: u32, j: u32) -> f64 {
        let (cols, vals) = self.row(i as usize);
        cols.iter()
            .zip(vals)
            .find(|(c, _)| **c == j)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    /// Reindexed copy: vertex `v` becomes `perm[v]`. Pure relabeling, values
    /// are bit-copied. Requires `perm` to map row order such that the stored
    /// rank-sorted rows remain sorted (true for the canonical rank map).
    pub fn permuted(&self, perm: &[u32]) -> SparseSym {
        let n = self.n;
        let mut inv = vec![0u32; n];
        for (old, &new) in perm.iter().enumerate() {
            inv[new as usize] = old as u32;
        }
        let mut row_off = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        row_off.push(0);
        for new_row in 0..n {
            let old_row = inv[new_row] as usize;
            let (c, v) = self.row(old_row);
            for (ci, vi) in c.iter().zip(v) {
                cols.push(perm[*ci as usize]);
                vals.push(*vi);
            }
            row_off.push(cols.len());
        }
        SparseSym { n, row_off, cols, vals }
    }
}

/// Assembled Laplace–Beltrami pieces: stiffness `W` and lumped mass diag.
#[derive(Debug, Clone)]
pub struct Laplacian {
    pub stiffness: SparseSym,
    /// Barycentric vertex areas; zero only for unreferenced vertices.
    pub mass: Vec<f64>,
}

/// Cotangent of the angle at `c` opposite edge `(u, v)` in one triangle,
/// clamped; zero-area triangles contribute zero.
fn clamped_cot(mesh: &TriMesh, face: u32, u: u32, v: u32) -> f64 {
    let f = mesh.face(face);
    let c = *f
        .iter()
        .find(|&&x| x != u && x != v)
        .expect("face incident to an edge contains a third vertex");
    let a = mesh.position(u) - mesh.position(c);
    let b = mesh.position(v) - mesh.position(c);
    let cross = a.cross(&b).norm();
    if cross == 0.0 {
        return 0.0;
    }
    (a.dot(&b) / cross).clamp(COT_CLAMP.0, COT_CLAMP.1)
}

/// Assembles the cotangent stiffness and lumped mass for a mesh.
pub fn cotangent_laplacian(mesh: &TriMesh) -> Laplacian {
    let n = mesh.nv();
    let edges = mesh.edges();

    // Per-edge positive weight (cot α + cot β)/2, incident faces visited in
    // canonical order.
    let mut edge_w = Vec::with_capacity(edges.len());
    for (e, &[u, v]) in edges.iter().enumerate() {
        let mut w = 0.0;
        for &f in &mesh.edge_faces(e) {
            if f != u32::MAX {
                w += clamped_cot(mesh, f, u, v);
            }
        }
        edge_w.push(w / 2.0);
    }

    // Scatter into rows, then order each row by column rank with the
    // diagonal (sum of the row's weights, accumulated in that same order)
    // inserted at its own rank position.
    let mut neighbors: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (e, &[u, v]) in edges.iter().enumerate() {
        neighbors[u as usize].push((v, edge_w[e]));
        neighbors[v as usize].push((u, edge_w[e]));
    }
    let mut row_off = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_off.push(0usize);
    for v in 0..n as u32 {
        let row = &mut neighbors[v as usize];
        row.sort_unstable_by_key(|&(u, _)| mesh.rank(u));
        let mut diag = 0.0;
        for &(_, w) in row.iter() {
            diag += w;
        }
        let self_rank = mesh.rank(v);
        let mut placed = false;
        for &(u, w) in row.iter() {
            if !placed && mesh.rank(u) > self_rank {
                cols.push(v);
                vals.push(diag);
                placed = true;
            }
            cols.push(u);
            vals.push(-w);
        }
        if !placed {
            cols.push(v);
            vals.push(diag);
        }
        row_off.push(cols.len());
    }

    Laplacian {
        stiffness: SparseSym { n, row_off, cols, vals },
        mass: mesh.vertex_areas().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::Point3;

    use super::*;
    use crate::mesh::synth;
    use crate::TriMesh;

    /// Two coplanar triangles sharing edge (0,1), no obtuse angles opposite
    /// the shared edge.
    fn butterfly() -> TriMesh {
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.3, 0.8, 0.0),
            Point3::new(0.7, -0.9, 0.0),
        ];
        TriMesh::new(p, vec![[0, 1, 2], [1, 0, 3]]).unwrap()
    }

    fn cot_at(c: Point3<f64>, u: Point3<f64>, v: Point3<f64>) -> f64 {
        let a = u - c;
        let b = v - c;
        a.dot(&b) / a.cross(&b).norm()
    }

    #[test]
    fn interior_edge_weight_matches_hand_formula() {
        let m = butterfly();
        let lap = cotangent_laplacian(&m);
        let alpha = cot_at(m.position(2), m.position(0), m.position(1));
        let beta = cot_at(m.position(3), m.position(0), m.position(1));
        let expect = (alpha + beta) / 2.0;
        assert!((lap.stiffness.get(0, 1) + expect).abs() < 1e-14); // off-diag = −w
        assert!((lap.stiffness.get(1, 0) + expect).abs() < 1e-14);
    }

    #[test]
    fn boundary_edge_weight_is_single_cot_half() {
        let m = butterfly();
        let lap = cotangent_laplacian(&m);
        // Edge (0,2) belongs only to face 0; opposite vertex is 1.
        let expect = cot_at(m.position(1), m.position(0), m.position(2)) / 2.0;
        assert!((lap.stiffness.get(0, 2) + expect).abs() < 1e-14);
    }

    #[test]
    fn row_sums_vanish() {
        let m = synth::icosphere(1.0, 2);
        let lap = cotangent_laplacian(&m);
        for i in 0..m.nv() {
            let (_, vals) = lap.stiffness.row(i);
            let sum: f64 = vals.iter().sum();
            assert!(sum.abs() < 1e-9, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn stiffness_is_positive_semidefinite() {
        let m = synth::bumpy_sphere(1.0, 2, 0.15);
        let lap = cotangent_laplacian(&m);
        // Deterministic pseudo-random probe vectors.
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..10 {
            let x: Vec<f64> = (0..m.nv())
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            assert!(lap.stiffness.quad_form(&x) > -1e-9);
        }
    }

    #[test]
    fn degenerate_face_contributes_zero() {
        // Second triangle is a zero-area sliver (three collinear points).
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 1.0, 0.0),
            Point3::new(2.0, 0.0, 0.0), // collinear with 0 and 1
        ];
        let m = TriMesh::new(p, vec![[0, 1, 2], [1, 0, 3]]).unwrap();
        let lap = cotangent_laplacian(&m);
        let alpha = cot_at(m.position(2), m.position(0), m.position(1));
        // Only the healthy triangle contributes to the shared edge.
        assert!((lap.stiffness.get(0, 1) + alpha / 2.0).abs() < 1e-14);
    }

    #[test]
    fn clamping_keeps_weights_positive_on_obtuse_meshes() {
        // Very obtuse opposite angle: cot would be negative, clamp raises it.
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 0.05, 0.0),
        ];
        let m = TriMesh::new(p, vec![[0, 1, 2]]).unwrap();
        let lap = cotangent_laplacian(&m);
        // w_01 = clamp(cot(obtuse))/2 = 1e-6/2 > 0.
        assert!((lap.stiffness.get(0, 1) + COT_CLAMP.0 / 2.0).abs() < 1e-18);
    }

    #[test]
    fn mass_is_vertex_areas() {
        let m = synth::icosphere(1.0, 1);
        let lap = cotangent_laplacian(&m);
        assert_eq!(lap.mass, m.vertex_areas());
        let total: f64 = lap.mass.iter().sum();
        assert!((total - m.total_area()).abs() < 1e-9 * m.total_area());
    }

    #[test]
    fn permuted_matrix_is_bit_identical_relabeling() {
        let m = synth::icosphere(1.0, 1);
        let lap = cotangent_laplacian(&m);
        let rank: Vec<u32> = (0..m.nv() as u32).map(|v| m.rank(v)).collect();
        let p = lap.stiffness.permuted(&rank);
        for v in 0..m.nv() as u32 {
            for u in 0..m.nv() as u32 {
                assert_eq!(
                    lap.stiffness.get(v, u).to_bits(),
                    p.get(m.rank(v), m.rank(u)).to_bits()
                );
            }
        }
    }
}
