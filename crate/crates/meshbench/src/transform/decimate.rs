//! Quadric-error edge-collapse simplification with origin tracking.
//!
//! Standard greedy scheme: every vertex accumulates the squared-distance
//! quadric of its incident face planes (area weighted, plus stiff
//! perpendicular constraint planes along boundary edges); edges collapse
//! cheapest-first into whichever of {endpoint A, endpoint B, midpoint} has
//! the lowest quadric cost. A collapse is admitted only if it keeps the
//! local topology intact (link condition, no two boundary vertices joined
//! across an interior edge) and does not flip any surviving face normal.
//!
//! Each output vertex reports where it came from on the input mesh: a
//! vertex index when it never moved, otherwise the closest point — in
//! barycentric coordinates — among the input faces incident to the
//! vertices merged into it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::{Point3, Vector3};

use super::corr::NullRef;
use crate::{Error, Result, TriMesh};

/// Stiffness of the boundary-preservation planes relative to unit area.
const BOUNDARY_PENALTY: f64 = 1e3;

/// Symmetric 4×4 quadric form, upper triangle packed as
/// (xx, xy, xz, xw, yy, yz, yw, zz, zw, ww).
#[derive(Clone, Copy, Default)]
struct Quadric {
    m: [f64; 10],
}

impl Quadric {
    /// Squared-distance form of the plane `n·x + d = 0` (unit `n`),
    /// weighted by `w`.
    fn plane(n: Vector3<f64>, d: f64, w: f64) -> Self {
        let (a, b, c) = (n.x, n.y, n.z);
        Quadric {
            m: [
                w * a * a,
                w * a * b,
                w * a * c,
                w * a * d,
                w * b * b,
                w * b * c,
                w * b * d,
                w * c * c,
                w * c * d,
                w * d * d,
            ],
        }
    }

    fn add(&mut self, o: &Quadric) {
        for (s, t) in self.m.iter_mut().zip(&o.m) {
            *s += t;
        }
    }

    fn eval(&self, p: &Point3<f64>) -> f64 {
        let (x, y, z) = (p.x, p.y, p.z);
        let m = &self.m;
        m[0] * x * x
            + m[4] * y * y
            + m[7] * z * z
            + m[9]
            + 2.0 * (m[1] * x * y + m[2] * x * z + m[3] * x + m[5] * y * z + m[6] * y + m[8] * z)
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Cand {
    cost: f64,
    u: u32,
    v: u32,
    stamp: u64,
}

impl Eq for Cand {}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
            .then(self.stamp.cmp(&other.stamp))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Collapses edges until only `fraction` of the vertices remain.
///
/// Returns the simplified mesh and, per output vertex, its origin on the
/// input mesh. Fails with [`Error::DecimationStalled`] when every remaining
/// edge collapse would break topology before the target is reached.
pub fn decimate_to_fraction(mesh: &TriMesh, fraction: f64) -> Result<(TriMesh, Vec<NullRef>)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "vertex fraction must be in (0, 1], got {fraction}"
        )));
    }
    let nv = mesh.nv();
    let target = ((fraction * nv as f64).round() as usize).max(1);
    let mut st = State::new(mesh);
    let mut heap: BinaryHeap<Reverse<Cand>> = BinaryHeap::new();
    for &[a, b] in mesh.edges() {
        let (u, v) = (a.min(b), a.max(b));
        heap.push(Reverse(Cand {
            cost: st.cost(u, v).0,
            u,
            v,
            stamp: st.stamp(u, v),
        }));
    }

    let mut alive = nv;
    while alive > target {
        let Some(Reverse(cand)) = heap.pop() else {
            return Err(Error::DecimationStalled {
                achieved: alive,
                target,
            });
        };
        let (u, v) = (cand.u, cand.v);
        if !st.alive_v[u as usize]
            || !st.alive_v[v as usize]
            || cand.stamp != st.stamp(u, v)
            || !st.adj[u as usize].contains(&v)
        {
            continue;
        }
        let placement = st.cost(u, v).1;
        if !st.admissible(u, v, &placement) {
            // Dropped, not requeued: every edge this collapse could have
            // legalized later is re-pushed when a nearby collapse succeeds,
            // so nothing is lost, and an empty heap genuinely means stuck.
            continue;
        }
        st.collapse(u, v, placement);
        alive -= 1;
        // Re-examine every edge whose admissibility or cost the collapse
        // can have changed: those incident to u's new ring (which contains
        // everything rewired or moved) and to u itself.
        let mut repush: Vec<(u32, u32)> = Vec::new();
        let ring = st.adj[u as usize].clone();
        for &x in &ring {
            repush.push((u.min(x), u.max(x)));
            for &y in &st.adj[x as usize] {
                repush.push((x.min(y), x.max(y)));
            }
        }
        repush.sort_unstable();
        repush.dedup();
        for (a, b) in repush {
            heap.push(Reverse(Cand {
                cost: st.cost(a, b).0,
                u: a,
                v: b,
                stamp: st.stamp(a, b),
            }));
        }
    }

    st.build_output(mesh)
}

struct State {
    pos: Vec<Point3<f64>>,
    alive_v: Vec<bool>,
    alive_f: Vec<bool>,
    fcorners: Vec<[u32; 3]>,
    vfaces: Vec<Vec<u32>>,
    adj: Vec<Vec<u32>>,
    quad: Vec<Quadric>,
    version: Vec<u32>,
    merged: Vec<Vec<u32>>,
    alive_faces: usize,
}

impl State {
    fn new(mesh: &TriMesh) -> Self {
        let nv = mesh.nv();
        let nf = mesh.nf();
        let pos: Vec<Point3<f64>> = mesh.positions().to_vec();
        let fcorners: Vec<[u32; 3]> = mesh.faces().to_vec();
        let mut vfaces = vec![Vec::new(); nv];
        for (fi, f) in fcorners.iter().enumerate() {
            for &c in f {
                vfaces[c as usize].push(fi as u32);
            }
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nv];
        for &[u, v] in mesh.edges() {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }

        let mut quad = vec![Quadric::default(); nv];
        for (fi, f) in fcorners.iter().enumerate() {
            let area = mesh.face_area(fi as u32);
            if area <= 0.0 {
                continue;
            }
            let n = mesh.face_normal(fi as u32);
            let d = -n.dot(&pos[f[0] as usize].coords);
            let k = Quadric::plane(n, d, area);
            for &c in f {
                quad[c as usize].add(&k);
            }
        }
        for (e, &[u, v]) in mesh.edges().iter().enumerate() {
            if !mesh.edge_is_boundary(e as u32) {
                continue;
            }
            let f = mesh.edge_faces(e)[0];
            let along = pos[v as usize] - pos[u as usize];
            let c = along.cross(&mesh.face_normal(f));
            let norm = c.norm();
            if norm == 0.0 {
                continue;
            }
            let c = c / norm;
            let d = -c.dot(&pos[u as usize].coords);
            let k = Quadric::plane(c, d, BOUNDARY_PENALTY * along.norm_squared());
            quad[u as usize].add(&k);
            quad[v as usize].add(&k);
        }

        State {
            pos,
            alive_v: vec![true; nv],
            alive_f: vec![true; nf],
            fcorners,
            vfaces,
            adj,
            quad,
            version: vec![0; nv],
            merged: (0..nv as u32).map(|v| vec![v]).collect(),
            alive_faces: nf,
        }
    }

    fn stamp(&self, u: u32, v: u32) -> u64 {
        self.version[u as usize] as u64 + self.version[v as usize] as u64
    }

    /// Cheapest of {keep u, keep v, midpoint} under the combined quadric.
    /// Ties keep the earliest candidate, so results are deterministic.
    fn cost(&self, u: u32, v: u32) -> (f64, Point3<f64>) {
        let mut q = self.quad[u as usize];
        q.add(&self.quad[v as usize]);
        let pu = self.pos[u as usize];
        let pv = self.pos[v as usize];
        let mid = Point3::from((pu.coords + pv.coords) * 0.5);
        let mut best = (q.eval(&pu), pu);
        for p in [pv, mid] {
            let c = q.eval(&p);
            if c < best.0 {
                best = (c, p);
            }
        }
        best
    }

    /// Alive faces containing both `u` and `v`.
    fn shared_faces(&self, u: u32, v: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(2);
        for &f in &self.vfaces[u as usize] {
            if self.alive_f[f as usize] && self.fcorners[f as usize].contains(&v) {
                out.push(f);
            }
        }
        out
    }

    /// Whether any alive edge at `x` borders fewer than two faces.
    fn on_boundary(&self, x: u32) -> bool {
        let mut counts: Vec<(u32, u32)> = Vec::new();
        for &f in &self.vfaces[x as usize] {
            if !self.alive_f[f as usize] {
                continue;
            }
            for &c in &self.fcorners[f as usize] {
                if c == x {
                    continue;
                }
                match counts.iter_mut().find(|(n, _)| *n == c) {
                    Some((_, k)) => *k += 1,
                    None => counts.push((c, 1)),
                }
            }
        }
        counts.iter().any(|&(_, k)| k < 2)
    }

    /// Link condition + boundary pinch rule + normal-flip rejection +
    /// never-empty guard.
    fn admissible(&self, u: u32, v: u32, placement: &Point3<f64>) -> bool {
        let shared = self.shared_faces(u, v);
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        if self.alive_faces - shared.len() < 1 {
            return false;
        }
        // Link condition: the common neighbors must be exactly the apexes
        // of the shared faces, else the collapse pinches the surface.
        let mut apexes: Vec<u32> = shared
            .iter()
            .filter_map(|&f| {
                self.fcorners[f as usize]
                    .into_iter()
                    .find(|&c| c != u && c != v)
            })
            .collect();
        apexes.sort_unstable();
        apexes.dedup();
        let mut common: Vec<u32> = self.adj[u as usize]
            .iter()
            .filter(|x| self.adj[v as usize].contains(x))
            .copied()
            .collect();
        common.sort_unstable();
        if common != apexes {
            return false;
        }
        // Joining two boundary vertices through the interior creates a
        // non-manifold waist.
        if shared.len() == 2 && self.on_boundary(u) && self.on_boundary(v) {
            return false;
        }
        // No surviving face may flip or collapse to zero area.
        for &w in [u, v].iter() {
            for &f in &self.vfaces[w as usize] {
                if !self.alive_f[f as usize] || shared.contains(&f) {
                    continue;
                }
                let c = self.fcorners[f as usize];
                let before = self.face_normal_raw(c);
                let moved = c.map(|x| {
                    if x == u || x == v {
                        *placement
                    } else {
                        self.pos[x as usize]
                    }
                });
                let after = (moved[1] - moved[0]).cross(&(moved[2] - moved[0]));
                if before.norm_squared() > 0.0
                    && (after.norm_squared() == 0.0 || before.dot(&after) <= 0.0)
                {
                    return false;
                }
            }
        }
        true
    }

    fn face_normal_raw(&self, c: [u32; 3]) -> Vector3<f64> {
        let a = self.pos[c[0] as usize];
        (self.pos[c[1] as usize] - a).cross(&(self.pos[c[2] as usize] - a))
    }

    fn collapse(&mut self, u: u32, v: u32, placement: Point3<f64>) {
        let qv = self.quad[v as usize];
        self.quad[u as usize].add(&qv);
        self.pos[u as usize] = placement;
        let absorbed = std::mem::take(&mut self.merged[v as usize]);
        self.merged[u as usize].extend(absorbed);
        self.alive_v[v as usize] = false;

        let vf = std::mem::take(&mut self.vfaces[v as usize]);
        for f in vf {
            if !self.alive_f[f as usize] {
                continue;
            }
            let corners = &mut self.fcorners[f as usize];
            if corners.contains(&u) {
                self.alive_f[f as usize] = false;
                self.alive_faces -= 1;
            } else {
                for c in corners.iter_mut() {
                    if *c == v {
                        *c = u;
                    }
                }
                self.vfaces[u as usize].push(f);
            }
        }

        // Rebuild face-exact adjacency for u and everyone that touched v.
        let mut dirty: Vec<u32> = std::mem::take(&mut self.adj[v as usize]);
        dirty.push(u);
        dirty.sort_unstable();
        dirty.dedup();
        for x in dirty {
            if !self.alive_v[x as usize] {
                continue;
            }
            self.vfaces[x as usize].retain(|&f| self.alive_f[f as usize]);
            let mut ring: Vec<u32> = self.vfaces[x as usize]
                .iter()
                .flat_map(|&f| self.fcorners[f as usize])
                .filter(|&c| c != x)
                .collect();
            ring.sort_unstable();
            ring.dedup();
            self.adj[x as usize] = ring;
        }

        self.version[u as usize] += 1;
        self.version[v as usize] += 1;
    }

    fn build_output(&self, mesh: &TriMesh) -> Result<(TriMesh, Vec<NullRef>)> {
        let nv = self.alive_v.len();
        let mut new_of_old = vec![u32::MAX; nv];
        let mut positions = Vec::new();
        let mut refs = Vec::new();
        for old in 0..nv {
            if !self.alive_v[old] {
                continue;
            }
            new_of_old[old] = positions.len() as u32;
            positions.push(self.pos[old]);
            if self.pos[old] == mesh.position(old as u32) {
                refs.push(NullRef::Vertex(old as u32));
            } else {
                refs.push(self.project_to_input(mesh, old));
            }
        }
        let mut faces = Vec::with_capacity(self.alive_faces);
        for (f, corners) in self.fcorners.iter().enumerate() {
            if self.alive_f[f] {
                faces.push(corners.map(|c| new_of_old[c as usize]));
            }
        }
        let out = TriMesh::new(positions, faces)?;
        Ok((out, refs))
    }

    /// Closest point to the (moved) vertex among the input faces incident
    /// to any input vertex merged into it.
    fn project_to_input(&self, mesh: &TriMesh, old: usize) -> NullRef {
        let p = self.pos[old];
        let mut cand: Vec<u32> = self.merged[old]
            .iter()
            .flat_map(|&x| mesh.vertex_faces(x).iter().copied())
            .collect();
        cand.sort_unstable();
        cand.dedup();
        let mut best: Option<(f64, u32, [f64; 3])> = None;
        for f in cand {
            let [a, b, c] = mesh.face(f);
            let (weights, d2) = closest_point_weights(
                &p,
                &mesh.position(a),
                &mesh.position(b),
                &mesh.position(c),
            );
            if best.is_none() || d2 < best.unwrap().0 {
                best = Some((d2, f, weights));
            }
        }
        let (_, face, weights) = best.expect("merged vertices always have incident faces");
        NullRef::Barycentric { face, weights }
    }
}

/// Closest point on triangle `abc` to `p`, returned as barycentric weights
/// plus the squared distance.
fn closest_point_weights(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> ([f64; 3], f64) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ([1.0, 0.0, 0.0], (p - a).norm_squared());
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return ([0.0, 1.0, 0.0], (p - b).norm_squared());
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 && d1 - d3 > 0.0 {
        let t = d1 / (d1 - d3);
        let q = a + ab * t;
        return ([1.0 - t, t, 0.0], (p - q).norm_squared());
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return ([0.0, 0.0, 1.0], (p - c).norm_squared());
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 && d2 - d6 > 0.0 {
        let t = d2 / (d2 - d6);
        let q = a + ac * t;
        return ([1.0 - t, 0.0, t], (p - q).norm_squared());
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 && (d4 - d3) + (d5 - d6) > 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        let q = b + (c - b) * t;
        return ([0.0, 1.0 - t, t], (p - q).norm_squared());
    }
    let denom = va + vb + vc;
    if denom > 0.0 {
        let s = vb / denom;
        let t = vc / denom;
        let q = a + ab * s + ac * t;
        ([1.0 - s - t, s, t], (p - q).norm_squared())
    } else {
        // Degenerate triangle: fall back to the nearest corner.
        let mut best = ([1.0, 0.0, 0.0], (p - a).norm_squared());
        for (w, q) in [([0.0, 1.0, 0.0], b), ([0.0, 0.0, 1.0], c)] {
            let d = (p - q).norm_squared();
            if d < best.1 {
                best = (w, d);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::synth;

    #[test]
    fn halves_a_sphere_and_stays_closed() {
        let m = synth::icosphere(1.0, 3);
        let (out, refs) = decimate_to_fraction(&m, 0.5).unwrap();
        assert_eq!(out.nv(), 321);
        assert_eq!(refs.len(), 321);
        // Still a closed genus-0 surface: every edge has two faces and
        // Euler's formula gives F = 2V - 4.
        assert_eq!(out.nonmanifold_edges(), 0);
        for e in 0..out.edges().len() {
            assert!(!out.edge_is_boundary(e as u32));
        }
        assert_eq!(out.nf(), 2 * out.nv() - 4);
        assert!(out.is_connected());
        // Origin tracking: unmoved vertices carry their input index with a
        // bit-identical position; moved ones project onto nearby input faces.
        for (j, r) in refs.iter().enumerate() {
            match r {
                NullRef::Vertex(i) => {
                    assert_eq!(out.position(j as u32), m.position(*i));
                }
                NullRef::Barycentric { face, weights } => {
                    assert!((*face as usize) < m.nf());
                    let sum: f64 = weights.iter().sum();
                    assert!((sum - 1.0).abs() < 1e-9);
                    assert!(weights.iter().all(|w| *w >= -1e-9));
                    let [a, b, c] = m.face(*face);
                    let q = m.position(a).coords * weights[0]
                        + m.position(b).coords * weights[1]
                        + m.position(c).coords * weights[2];
                    let d = (out.position(j as u32).coords - q).norm();
                    assert!(
                        d <= 3.0 * m.mean_edge_len(),
                        "projected origin {d} too far from the vertex"
                    );
                }
                NullRef::Missing => panic!("decimation never loses groundtruth"),
            }
        }
    }

    #[test]
    fn runs_are_bit_identical() {
        let m = synth::bumpy_sphere(1.0, 3, 0.25);
        let (a, ra) = decimate_to_fraction(&m, 0.4).unwrap();
        let (b, rb) = decimate_to_fraction(&m, 0.4).unwrap();
        assert_eq!(a.faces(), b.faces());
        assert_eq!(ra, rb);
        for (p, q) in a.positions().iter().zip(b.positions()) {
            assert_eq!(p, q);
        }
    }

    #[test]
    fn fraction_one_is_identity() {
        let m = synth::tetrahedron(1.0);
        let (out, refs) = decimate_to_fraction(&m, 1.0).unwrap();
        assert_eq!(out.nv(), 4);
        for (j, r) in refs.iter().enumerate() {
            assert_eq!(r, &NullRef::Vertex(j as u32));
        }
    }

    #[test]
    fn stalls_when_topology_blocks_the_target() {
        let m = synth::plane_grid(2, 2, 1.0);
        match decimate_to_fraction(&m, 0.25) {
            Err(Error::DecimationStalled { achieved, target }) => {
                assert_eq!(target, 1);
                assert!(achieved > target);
            }
            other => panic!("expected a stall, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_fraction() {
        let m = synth::tetrahedron(1.0);
        assert!(decimate_to_fraction(&m, 0.0).is_err());
        assert!(decimate_to_fraction(&m, 1.5).is_err());
    }
}
