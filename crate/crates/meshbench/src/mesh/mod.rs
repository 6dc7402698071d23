//! Triangle mesh container and geometry kernels.
//!
//! [`TriMesh`] is immutable after construction and precomputes everything the
//! rest of the crate needs: one-ring adjacency, incident faces, barycentric
//! vertex areas, area-weighted vertex normals, bounding-box diameter, mean
//! edge length, and the unique edge list with incident faces.
//!
//! # Canonical iteration order
//!
//! Results must be invariant to vertex relabeling (permuting the vertex
//! array and renumbering faces accordingly), *bit for bit*. Floating-point
//! addition is not associative, so every reduction in this crate iterates in
//! a canonical order derived from vertex positions rather than from storage
//! indices: vertices are ranked lexicographically by position, faces by
//! their sorted corner-rank triple, and adjacency lists are stored sorted by
//! rank. Identical geometry therefore produces identical rounding no matter
//! how the input was ordered.

pub mod curvature;
pub mod geodesic;
pub(crate) mod grid;
pub mod io;
pub mod laplacian;
pub mod spectral;
pub mod synth;

use nalgebra::{Point3, Vector3};

use crate::{Error, Result};

/// Immutable triangle mesh with cached derived quantities.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Point3<f64>>,
    faces: Vec<[u32; 3]>,

    /// `rank[v]` = position of vertex `v` in the lexicographic position
    /// order; the canonical iteration key.
    rank: Vec<u32>,
    /// Inverse permutation: `order[r]` is the vertex with rank `r`.
    order: Vec<u32>,
    /// Faces sorted by their canonical key (sorted corner-rank triple).
    face_order: Vec<u32>,
    /// `face_rank[f]` = position of face `f` in `face_order`.
    face_rank: Vec<u32>,

    ring_off: Vec<u32>,
    ring: Vec<u32>,
    vface_off: Vec<u32>,
    vfaces: Vec<u32>,

    /// Unique undirected edges `[u, v]` with `rank[u] < rank[v]`, sorted by
    /// (rank[u], rank[v]).
    edges: Vec<[u32; 2]>,
    /// Up to two incident faces per edge (canonically ordered);
    /// `u32::MAX` marks an absent second face (boundary).
    edge_faces: Vec<[u32; 2]>,
    /// Edges with more than two incident faces (extra faces ignored),
    /// ascending.
    nonmanifold_edge_ids: Vec<u32>,

    face_areas: Vec<f64>,
    face_normals: Vec<Vector3<f64>>,
    vertex_areas: Vec<f64>,
    vertex_normals: Vec<Vector3<f64>>,
    unreferenced: usize,

    total_area: f64,
    diam: f64,
    mean_edge_len: f64,
    bbox: (Point3<f64>, Point3<f64>),
}

impl TriMesh {
    /// Builds a mesh and all derived data.
    ///
    /// Fails on an empty vertex/face list, an out-of-range face index, or a
    /// face with repeated corners. Vertices referenced by no face are
    /// permitted (their area weight is zero and they are skipped by the
    /// geometry kernels) so that externally produced files still load.
    pub fn new(positions: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidMesh("no vertices".into()));
        }
        if faces.is_empty() {
            return Err(Error::InvalidMesh("no faces".into()));
        }
        let nv = positions.len();
        if nv > u32::MAX as usize {
            return Err(Error::InvalidMesh("too many vertices".into()));
        }
        for (fi, f) in faces.iter().enumerate() {
            for &c in f {
                if c as usize >= nv {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi} references vertex {c} but there are only {nv} vertices"
                    )));
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} has repeated corners {f:?}"
                )));
            }
        }
        for (vi, p) in positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::InvalidMesh(format!(
                    "vertex {vi} has a non-finite coordinate"
                )));
            }
        }

        // Canonical vertex order: lexicographic by position, index as the
        // final tie-break (reachable only for exactly duplicated points).
        let mut order: Vec<u32> = (0..nv as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let pa = &positions[a as usize];
            let pb = &positions[b as usize];
            pa.x.total_cmp(&pb.x)
                .then(pa.y.total_cmp(&pb.y))
                .then(pa.z.total_cmp(&pb.z))
                .then(a.cmp(&b))
        });
        let mut rank = vec![0u32; nv];
        for (r, &v) in order.iter().enumerate() {
            rank[v as usize] = r as u32;
        }

        // Canonical face order: sorted corner-rank triples, lexicographic.
        let face_key = |f: &[u32; 3]| {
            let mut k = [rank[f[0] as usize], rank[f[1] as usize], rank[f[2] as usize]];
            k.sort_unstable();
            k
        };
        let mut face_order: Vec<u32> = (0..faces.len() as u32).collect();
        face_order.sort_unstable_by_key(|&f| face_key(&faces[f as usize]));
        let mut face_rank = vec![0u32; faces.len()];
        for (r, &f) in face_order.iter().enumerate() {
            face_rank[f as usize] = r as u32;
        }

        // Per-face geometry. Computed per face from its stored corner order,
        // which relabeling does not change.
        let mut face_areas = Vec::with_capacity(faces.len());
        let mut face_normals = Vec::with_capacity(faces.len());
        for f in &faces {
            let a = positions[f[0] as usize];
            let b = positions[f[1] as usize];
            let c = positions[f[2] as usize];
            let n = (b - a).cross(&(c - a));
            let len = n.norm();
            face_areas.push(0.5 * len);
            face_normals.push(if len > 0.0 { n / len } else { Vector3::zeros() });
        }

        // Unique edges in canonical order, with incident faces.
        let mut half: Vec<(u32, u32, u32)> = Vec::with_capacity(faces.len() * 3);
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (mut u, mut v) = (f[k], f[(k + 1) % 3]);
                if rank[u as usize] > rank[v as usize] {
                    std::mem::swap(&mut u, &mut v);
                }
                half.push((u, v, fi as u32));
            }
        }
        half.sort_unstable_by_key(|&(u, v, f)| {
            (rank[u as usize], rank[v as usize], face_rank[f as usize])
        });
        let mut edges: Vec<[u32; 2]> = Vec::new();
        let mut edge_faces: Vec<[u32; 2]> = Vec::new();
        let mut nonmanifold_edge_ids: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < half.len() {
            let (u, v, _) = half[i];
            let mut j = i;
            while j < half.len() && half[j].0 == u && half[j].1 == v {
                j += 1;
            }
            let mut inc = [u32::MAX; 2];
            inc[0] = half[i].2;
            if j - i >= 2 {
                inc[1] = half[i + 1].2;
            }
            if j - i > 2 {
                nonmanifold_edge_ids.push(edges.len() as u32);
            }
            edges.push([u, v]);
            edge_faces.push(inc);
            i = j;
        }

        // One-ring adjacency (CSR), neighbor lists sorted by rank.
        let mut ring_off = vec![0u32; nv + 1];
        for e in &edges {
            ring_off[e[0] as usize + 1] += 1;
            ring_off[e[1] as usize + 1] += 1;
        }
        for i in 1..=nv {
            ring_off[i] += ring_off[i - 1];
        }
        let mut ring = vec![0u32; ring_off[nv] as usize];
        let mut cursor = ring_off.clone();
        for e in &edges {
            ring[cursor[e[0] as usize] as usize] = e[1];
            cursor[e[0] as usize] += 1;
            ring[cursor[e[1] as usize] as usize] = e[0];
            cursor[e[1] as usize] += 1;
        }
        for v in 0..nv {
            ring[ring_off[v] as usize..ring_off[v + 1] as usize]
                .sort_unstable_by_key(|&n| rank[n as usize]);
        }

        // Incident faces (CSR), sorted by canonical face rank.
        let mut vface_off = vec![0u32; nv + 1];
        for f in &faces {
            for &c in f {
                vface_off[c as usize + 1] += 1;
            }
        }
        for i in 1..=nv {
            vface_off[i] += vface_off[i - 1];
        }
        let mut vfaces = vec![0u32; vface_off[nv] as usize];
        let mut cursor = vface_off.clone();
        for (fi, f) in faces.iter().enumerate() {
            for &c in f {
                vfaces[cursor[c as usize] as usize] = fi as u32;
                cursor[c as usize] += 1;
            }
        }
        for v in 0..nv {
            vfaces[vface_off[v] as usize..vface_off[v + 1] as usize]
                .sort_unstable_by_key(|&f| face_rank[f as usize]);
        }

        // Vertex areas (barycentric: one third of each incident face) and
        // area-weighted normals, both accumulated in canonical face order.
        let mut vertex_areas = vec![0.0f64; nv];
        let mut vertex_normals = vec![Vector3::zeros(); nv];
        let mut unreferenced = 0usize;
        for v in 0..nv {
            let fs = &vfaces[vface_off[v] as usize..vface_off[v + 1] as usize];
            if fs.is_empty() {
                unreferenced += 1;
                continue;
            }
            let mut area = 0.0;
            let mut normal = Vector3::zeros();
            for &f in fs {
                area += face_areas[f as usize] / 3.0;
                normal += face_areas[f as usize] * face_normals[f as usize];
            }
            vertex_areas[v] = area;
            let len = normal.norm();
            vertex_normals[v] = if len > 0.0 { normal / len } else { Vector3::zeros() };
        }

        let mut total_area = 0.0;
        for &f in &face_order {
            total_area += face_areas[f as usize];
        }

        let mut lo = positions[0];
        let mut hi = positions[0];
        for p in &positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let diam = (hi - lo).norm();

        let mut edge_len_sum = 0.0;
        for e in &edges {
            edge_len_sum += (positions[e[0] as usize] - positions[e[1] as usize]).norm();
        }
        let mean_edge_len = edge_len_sum / edges.len() as f64;

        Ok(TriMesh {
            positions,
            faces,
            rank,
            order,
            face_order,
            face_rank,
            ring_off,
            ring,
            vface_off,
            vfaces,
            edges,
            edge_faces,
            nonmanifold_edge_ids,
            face_areas,
            face_normals,
            vertex_areas,
            vertex_normals,
            unreferenced,
            total_area,
            diam,
            mean_edge_len,
            bbox: (lo, hi),
        })
    }

    /// Rebuilds the mesh with new positions on the same connectivity.
    pub fn with_positions(&self, positions: Vec<Point3<f64>>) -> Result<Self> {
        if positions.len() != self.positions.len() {
            return Err(Error::InvalidInput(format!(
                "position count {} does not match vertex count {}",
                positions.len(),
                self.positions.len()
            )));
        }
        TriMesh::new(positions, self.faces.clone())
    }

    /// Uniformly scaled copy.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_positions(self.positions.iter().map(|p| (p * factor).into()).collect())
    }

    /// Copy rescaled so the bounding-box diameter is exactly 1.
    pub fn normalized_to_unit_diam(&self) -> Result<Self> {
        self.scaled(1.0 / self.diam)
    }

    /// Copy with vertex `v` renumbered to `perm[v]`; `perm` must be a
    /// permutation of `0..nv`. Face order is preserved, only the vertex
    /// labels inside each face change.
    pub fn relabeled(&self, perm: &[u32]) -> Result<Self> {
        let n = self.nv();
        if perm.len() != n {
            return Err(Error::InvalidInput(format!(
                "permutation has {} entries for {} vertices",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        let mut pos = vec![Point3::origin(); n];
        for v in 0..n {
            pos[perm[v] as usize] = self.positions[v];
        }
        let faces = self.faces.iter().map(|f| f.map(|c| perm[c as usize])).collect();
        TriMesh::new(pos, faces)
    }

    pub fn nv(&self) -> usize {
        self.positions.len()
    }

    pub fn nf(&self) -> usize {
        self.faces.len()
    }

    pub fn position(&self, v: u32) -> Point3<f64> {
        self.positions[v as usize]
    }

    pub fn positions(&self) -> &[Point3<f64>] {
        &self.positions
    }

    pub fn face(&self, f: u32) -> [u32; 3] {
        self.faces[f as usize]
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    /// Canonical rank of a vertex (lexicographic position order).
    pub fn rank(&self, v: u32) -> u32 {
        self.rank[v as usize]
    }

    /// Vertices in canonical order: element `r` is the vertex with rank `r`.
    pub fn by_rank(&self) -> &[u32] {
        &self.order
    }

    /// Faces in canonical order.
    pub fn faces_by_rank(&self) -> &[u32] {
        &self.face_order
    }

    /// Canonical rank of a face.
    pub fn face_rank(&self, f: u32) -> u32 {
        self.face_rank[f as usize]
    }

    /// One-ring neighbors of `v`, sorted by canonical rank.
    pub fn ring(&self, v: u32) -> &[u32] {
        &self.ring[self.ring_off[v as usize] as usize..self.ring_off[v as usize + 1] as usize]
    }

    /// Faces incident to `v`, sorted canonically.
    pub fn vertex_faces(&self, v: u32) -> &[u32] {
        &self.vfaces[self.vface_off[v as usize] as usize..self.vface_off[v as usize + 1] as usize]
    }

    /// Unique undirected edges in canonical order.
    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    /// The (up to two) faces incident to edge `e`; `u32::MAX` = absent.
    pub fn edge_faces(&self, e: usize) -> [u32; 2] {
        self.edge_faces[e]
    }

    pub fn nonmanifold_edges(&self) -> usize {
        self.nonmanifold_edge_ids.len()
    }

    /// True if edge `e` has more than two incident faces.
    pub fn edge_is_nonmanifold(&self, e: u32) -> bool {
        self.nonmanifold_edge_ids.binary_search(&e).is_ok()
    }

    /// True if edge `e` has exactly one incident face.
    pub fn edge_is_boundary(&self, e: u32) -> bool {
        self.edge_faces[e as usize][1] == u32::MAX
    }

    pub fn face_area(&self, f: u32) -> f64 {
        self.face_areas[f as usize]
    }

    pub fn face_normal(&self, f: u32) -> Vector3<f64> {
        self.face_normals[f as usize]
    }

    /// Barycentric area weight of a vertex (zero for unreferenced vertices).
    pub fn vertex_area(&self, v: u32) -> f64 {
        self.vertex_areas[v as usize]
    }

    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    /// Area-weighted unit vertex normal (zero if degenerate).
    pub fn vertex_normal(&self, v: u32) -> Vector3<f64> {
        self.vertex_normals[v as usize]
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Euclidean bounding-box diagonal; the global length scale.
    pub fn diam(&self) -> f64 {
        self.diam
    }

    pub fn bbox(&self) -> (Point3<f64>, Point3<f64>) {
        self.bbox
    }

    pub fn mean_edge_len(&self) -> f64 {
        self.mean_edge_len
    }

    /// Number of vertices referenced by no face.
    pub fn unreferenced_vertices(&self) -> usize {
        self.unreferenced
    }

    /// Connected components over the edge graph.
    ///
    /// Returns `(count, label)` where labels are assigned in canonical order
    /// (component containing the lowest-ranked vertex gets label 0).
    pub fn components(&self) -> (usize, Vec<u32>) {
        let nv = self.nv();
        let mut parent: Vec<u32> = (0..nv as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                parent[a as usize] = b;
            }
        }
        let mut label = vec![u32::MAX; nv];
        let mut count = 0;
        for &v in &self.order {
            let root = find(&mut parent, v);
            if label[root as usize] == u32::MAX {
                label[root as usize] = count;
                count += 1;
            }
            label[v as usize] = label[root as usize];
        }
        (count as usize, label)
    }

    pub fn is_connected(&self) -> bool {
        self.components().0 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetrahedron() -> TriMesh {
        // Regular tetrahedron with edge length sqrt(8): vertices on
        // alternating cube corners (+-1 coordinates).
        let p = vec![
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(1.0, -1.0, -1.0),
            Point3::new(-1.0, 1.0, -1.0),
            Point3::new(-1.0, -1.0, 1.0),
        ];
        let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        TriMesh::new(p, f).unwrap()
    }

    #[test]
    fn tetrahedron_areas_sum_to_surface() {
        let m = tetrahedron();
        // Each face is an equilateral triangle with side sqrt(8):
        // area = sqrt(3)/4 * 8 = 2*sqrt(3); four faces total 8*sqrt(3).
        let expect = 8.0 * 3.0f64.sqrt();
        assert!((m.total_area() - expect).abs() < 1e-12 * expect);
        let sum: f64 = m.vertex_areas().iter().sum();
        assert!((sum - expect).abs() < 1e-9 * expect);
        for v in 0..4 {
            assert!(m.vertex_area(v) > 0.0);
        }
    }

    #[test]
    fn tetrahedron_adjacency() {
        let m = tetrahedron();
        assert_eq!(m.edges().len(), 6);
        for v in 0..4u32 {
            assert_eq!(m.ring(v).len(), 3);
            assert_eq!(m.vertex_faces(v).len(), 3);
        }
        // Closed manifold: every edge has exactly two incident faces.
        for e in 0..6 {
            assert!(m.edge_faces(e).iter().all(|&f| f != u32::MAX));
        }
        assert_eq!(m.nonmanifold_edges(), 0);
        assert!(m.is_connected());
    }

    #[test]
    fn tetrahedron_diam_is_bbox_diagonal() {
        let m = tetrahedron();
        // Bounding box is [-1,1]^3, diagonal 2*sqrt(3).
        assert!((m.diam() - 2.0 * 3.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normals_point_outward_on_tetrahedron() {
        let m = tetrahedron();
        for v in 0..4u32 {
            let n = m.vertex_normal(v);
            // Outward means positive dot with the position (centroid at 0).
            assert!(n.dot(&m.position(v).coords) > 0.5);
        }
    }

    #[test]
    fn rejects_bad_faces() {
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert!(TriMesh::new(p.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriMesh::new(p.clone(), vec![[0, 1, 1]]).is_err());
        assert!(TriMesh::new(p.clone(), vec![]).is_err());
        assert!(TriMesh::new(vec![], vec![[0, 1, 2]]).is_err());
        assert!(TriMesh::new(p, vec![[0, 1, 2]]).is_ok());
    }

    #[test]
    fn canonical_rank_is_permutation_invariant() {
        let m = tetrahedron();
        // Relabel vertices with a fixed permutation and renumber faces.
        let perm = [2u32, 0, 3, 1]; // new index of old vertex i
        let mut pos = vec![Point3::origin(); 4];
        for (old, p) in m.positions().iter().enumerate() {
            pos[perm[old] as usize] = *p;
        }
        let faces: Vec<[u32; 3]> = m
            .faces()
            .iter()
            .map(|f| [perm[f[0] as usize], perm[f[1] as usize], perm[f[2] as usize]])
            .collect();
        let m2 = TriMesh::new(pos, faces).unwrap();
        for old in 0..4u32 {
            assert_eq!(m.rank(old), m2.rank(perm[old as usize]));
            // Derived per-vertex quantities must be bit-identical.
            assert_eq!(
                m.vertex_area(old).to_bits(),
                m2.vertex_area(perm[old as usize]).to_bits()
            );
            let n1 = m.vertex_normal(old);
            let n2 = m2.vertex_normal(perm[old as usize]);
            for k in 0..3 {
                assert_eq!(n1[k].to_bits(), n2[k].to_bits());
            }
        }
        assert_eq!(m.total_area().to_bits(), m2.total_area().to_bits());
        assert_eq!(m.mean_edge_len().to_bits(), m2.mean_edge_len().to_bits());
    }

    #[test]
    fn unreferenced_vertices_are_tolerated() {
        let p = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(5.0, 5.0, 5.0), // referenced by nothing
        ];
        let m = TriMesh::new(p, vec![[0, 1, 2]]).unwrap();
        assert_eq!(m.unreferenced_vertices(), 1);
        assert_eq!(m.vertex_area(3), 0.0);
    }
}
