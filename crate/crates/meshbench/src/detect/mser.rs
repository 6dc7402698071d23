//! Maximally stable component regions.
//!
//! A weighting (per vertex or per edge, typically derived from heat
//! diffusion) is swept from low to high threshold while a union-find grows
//! connected components; the full merge history forms a component tree.
//! Components whose area stays nearly constant over a wide threshold window
//! are "stable": stability of component `C` at threshold `θ` is
//!
//! ```text
//! s(C) = area(C) / |area(C at θ+Δ) − area(C at θ−Δ)|
//! ```
//!
//! (infinite when the window sees no change at all). Regions are emitted at
//! local maxima of `s` along root paths of the tree, filtered by area
//! bounds and deduplicated when two survivors overlap almost completely.
//!
//! Bookkeeping model: every branch of the tree keeps a piecewise-constant
//! area history. When two components merge, the larger-area one continues
//! the branch (ties go to the earlier-created branch) and the other branch
//! is frozen with a pointer to its absorber, so area lookups past a
//! branch's death follow the absorber chain while lookups before its birth
//! return zero. Breakpoints at one threshold coalesce, so a cascade of
//! merges at a single weight level counts as one state change, and only
//! plateaus that persist over a positive threshold interval are candidates.
//! Regions never span mesh components: there is simply no edge to merge
//! across, so disconnected inputs produce one tree per component.

use crate::detect::FeatureRegions;
use crate::mesh::spectral::SpectralBasis;
use crate::{Error, Result, TriMesh};

/// How to derive the sweep weights from a spectral basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MserWeighting {
    /// Vertex weight = heat-kernel diagonal `k_t(v,v)`; `None` uses the
    /// default time `0.1/λ₁`.
    VertexHks { t: Option<f64> },
    /// Edge weight = `1 / k_t(u,v)` (inverse heat kernel between the
    /// endpoints); non-positive kernel values are clamped so such edges
    /// merge last.
    EdgeInvHks { t: Option<f64> },
    /// Edge weight = `1 / c(u,v)` with the commute-time kernel
    /// `c(u,v) = Σ_{λᵢ>0} φᵢ(u)φᵢ(v)/λᵢ`, clamped the same way.
    EdgeInvCommuteTime,
}

#[derive(Debug, Clone)]
pub struct MserConfig {
    pub weighting: MserWeighting,
    /// Stability window as a fraction of the full sweep weight range.
    pub delta: f64,
    /// Smallest emitted region area, as a fraction of total surface area.
    pub min_area: f64,
    /// Largest emitted region area, as a fraction of total surface area.
    pub max_area: f64,
}

impl Default for MserConfig {
    fn default() -> Self {
        MserConfig {
            weighting: MserWeighting::VertexHks { t: None },
            delta: 0.05,
            min_area: 0.01,
            max_area: 0.75,
        }
    }
}

/// Sweep weights: one value per vertex, or one per mesh edge (parallel to
/// `mesh.edges()`).
#[derive(Debug, Clone, PartialEq)]
pub enum MserWeights {
    Vertex(Vec<f64>),
    Edge(Vec<f64>),
}

/// Derives sweep weights from a spectral basis.
pub fn mser_weights(
    mesh: &TriMesh,
    basis: &SpectralBasis,
    weighting: &MserWeighting,
) -> Result<MserWeights> {
    if basis.eigenfunctions.iter().any(|f| f.len() != mesh.nv()) {
        return Err(Error::InvalidInput(
            "spectral basis does not match the mesh vertex count".into(),
        ));
    }
    let default_t = || -> Result<f64> {
        basis
            .lambda1()
            .map(|l| 0.1 / l)
            .ok_or_else(|| Error::InvalidInput(
                "spectral basis has no positive eigenvalue (need k >= 2)".into(),
            ))
    };
    match *weighting {
        MserWeighting::VertexHks { t } => {
            let t = match t {
                Some(x) => x,
                None => default_t()?,
            };
            let mut w = vec![0.0f64; mesh.nv()];
            for (lam, phi) in basis.eigenvalues.iter().zip(&basis.eigenfunctions) {
                let decay = (-lam * t).exp();
                for (wv, &p) in w.iter_mut().zip(phi) {
                    *wv += decay * p * p;
                }
            }
            Ok(MserWeights::Vertex(w))
        }
        MserWeighting::EdgeInvHks { t } => {
            let t = match t {
                Some(x) => x,
                None => default_t()?,
            };
            let w = edge_kernel_weights(mesh, basis, |lam| (-lam * t).exp());
            Ok(MserWeights::Edge(w))
        }
        MserWeighting::EdgeInvCommuteTime => {
            let w = edge_kernel_weights(mesh, basis, |lam| if lam > 0.0 { 1.0 / lam } else { 0.0 });
            Ok(MserWeights::Edge(w))
        }
    }
}

/// `1 / Σ coeff(λᵢ)·φᵢ(u)·φᵢ(v)` per edge; kernels that come out
/// non-positive get twice the largest positive weight so they merge last.
fn edge_kernel_weights(
    mesh: &TriMesh,
    basis: &SpectralBasis,
    coeff: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let decays: Vec<f64> = basis.eigenvalues.iter().map(|&l| coeff(l)).collect();
    let kernels: Vec<f64> = mesh
        .edges()
        .iter()
        .map(|&[u, v]| {
            let mut k = 0.0;
            for (d, phi) in decays.iter().zip(&basis.eigenfunctions) {
                k += d * phi[u as usize] * phi[v as usize];
            }
            k
        })
        .collect();
    let max_w = kernels
        .iter()
        .filter(|&&k| k > 0.0)
        .map(|&k| 1.0 / k)
        .fold(0.0f64, f64::max);
    let fallback = if max_w > 0.0 { 2.0 * max_w } else { 1.0 };
    kernels
        .iter()
        .map(|&k| if k > 0.0 { 1.0 / k } else { fallback })
        .collect()
}

/// Full detector: derive weights from the basis, then sweep.
pub fn shape_mser(mesh: &TriMesh, basis: &SpectralBasis, cfg: &MserConfig) -> Result<FeatureRegions> {
    let weights = mser_weights(mesh, basis, &cfg.weighting)?;
    shape_mser_from_weights(mesh, &weights, cfg.delta, cfg.min_area, cfg.max_area)
}

/// One branch of the component tree: a maximal chain of states that share
/// a continuation. `history[j] = (threshold, area, members_len)` holds from
/// that threshold until the next breakpoint (or `death`).
struct Branch {
    birth: f64,
    death: f64,
    parent: Option<u32>,
    members: Vec<u32>,
    history: Vec<(f64, f64, usize)>,
    area: f64,
}

struct Sweep<'a> {
    mesh: &'a TriMesh,
    dsu: Vec<u32>,
    branch_of: Vec<u32>,
    branches: Vec<Branch>,
}

impl<'a> Sweep<'a> {
    fn new(mesh: &'a TriMesh) -> Self {
        Sweep {
            mesh,
            dsu: vec![u32::MAX; mesh.nv()],
            branch_of: vec![u32::MAX; mesh.nv()],
            branches: Vec::new(),
        }
    }

    fn find(&mut self, v: u32) -> u32 {
        let mut r = v;
        while self.dsu[r as usize] != r {
            r = self.dsu[r as usize];
        }
        let mut c = v;
        while self.dsu[c as usize] != r {
            let next = self.dsu[c as usize];
            self.dsu[c as usize] = r;
            c = next;
        }
        r
    }

    fn activate(&mut self, v: u32, t: f64) {
        let a = self.mesh.vertex_area(v);
        self.dsu[v as usize] = v;
        self.branch_of[v as usize] = self.branches.len() as u32;
        self.branches.push(Branch {
            birth: t,
            death: f64::NAN,
            parent: None,
            members: vec![v],
            history: vec![(t, a, 1)],
            area: a,
        });
    }

    fn union(&mut self, a: u32, b: u32, t: f64) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let ba = self.branch_of[ra as usize];
        let bb = self.branch_of[rb as usize];
        // The larger area continues the branch; ties go to the branch
        // created first (deterministic, label-independent given canonical
        // event order).
        let a_area = self.branches[ba as usize].area;
        let b_area = self.branches[bb as usize].area;
        let ((kr, kb), (_, lb)) = if (b_area, bb) < (a_area, ba) {
            ((ra, ba), (rb, bb))
        } else {
            ((rb, bb), (ra, ba))
        };
        self.branches[lb as usize].death = t;
        self.branches[lb as usize].parent = Some(kb);
        let moved = std::mem::take(&mut self.branches[lb as usize].members);
        let keep = &mut self.branches[kb as usize];
        keep.members.extend_from_slice(&moved);
        self.branches[lb as usize].members = moved;
        let lost_area = self.branches[lb as usize].area;
        let keep = &mut self.branches[kb as usize];
        keep.area += lost_area;
        let state = (t, keep.area, keep.members.len());
        match keep.history.last_mut() {
            Some(last) if last.0 == t => *last = state,
            _ => keep.history.push(state),
        }
        self.dsu[ra as usize] = kr;
        self.dsu[rb as usize] = kr;
        self.branch_of[kr as usize] = kb;
    }

    fn close(&mut self, t_end: f64) {
        for v in 0..self.mesh.nv() as u32 {
            if self.dsu[v as usize] == u32::MAX {
                continue;
            }
            let r = self.find(v);
            let b = self.branch_of[r as usize] as usize;
            if self.branches[b].death.is_nan() {
                self.branches[b].death = t_end;
            }
        }
    }
}

/// Area of the component containing branch `bi`'s chain at threshold `q`:
/// zero before the branch was born, its own history while alive, the
/// absorber's history after death (and the final area past the tree top).
fn area_at(branches: &[Branch], bi: u32, q: f64) -> f64 {
    let mut i = bi as usize;
    loop {
        let b = &branches[i];
        if q < b.birth {
            return 0.0;
        }
        if q >= b.death {
            match b.parent {
                Some(p) => {
                    i = p as usize;
                    continue;
                }
                None => return b.history.last().expect("non-empty history").1,
            }
        }
        let j = b.history.partition_point(|&(th, _, _)| th <= q) - 1;
        return b.history[j].1;
    }
}

fn stability(area: f64, a_plus: f64, a_minus: f64) -> f64 {
    let d = (a_plus - a_minus).abs();
    if d == 0.0 {
        f64::INFINITY
    } else {
        area / d
    }
}

/// Sweeps caller-supplied weights. `delta` is a fraction of the sweep's
/// weight range; `min_area`/`max_area` bound emitted regions as fractions
/// of total surface area.
pub fn shape_mser_from_weights(
    mesh: &TriMesh,
    weights: &MserWeights,
    delta: f64,
    min_area: f64,
    max_area: f64,
) -> Result<FeatureRegions> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "stability window must be positive, got {delta}"
        )));
    }
    if !(0.0..=1.0).contains(&min_area) || !(min_area <= max_area) {
        return Err(Error::InvalidInput(format!(
            "bad region size bounds [{min_area}, {max_area}]"
        )));
    }

    let mut sweep = Sweep::new(mesh);
    let (w_min, w_max);
    match weights {
        MserWeights::Vertex(w) => {
            if w.len() != mesh.nv() {
                return Err(Error::InvalidInput(format!(
                    "{} vertex weights for {} vertices",
                    w.len(),
                    mesh.nv()
                )));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite vertex weight".into()));
            }
            w_min = w.iter().copied().fold(f64::INFINITY, f64::min);
            w_max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut order: Vec<u32> = (0..mesh.nv() as u32).collect();
            order.sort_unstable_by(|&a, &b| {
                w[a as usize]
                    .total_cmp(&w[b as usize])
                    .then_with(|| mesh.rank(a).cmp(&mesh.rank(b)))
            });
            let mut active = vec![false; mesh.nv()];
            for v in order {
                let t = w[v as usize];
                sweep.activate(v, t);
                active[v as usize] = true;
                for &u in mesh.ring(v) {
                    if active[u as usize] {
                        sweep.union(v, u, t);
                    }
                }
            }
            sweep.close(w_max);
        }
        MserWeights::Edge(w) => {
            let ne = mesh.edges().len();
            if w.len() != ne {
                return Err(Error::InvalidInput(format!(
                    "{} edge weights for {ne} edges",
                    w.len()
                )));
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidInput(
                    "edge weights must be finite and non-negative".into(),
                ));
            }
            for v in 0..mesh.nv() as u32 {
                sweep.activate(v, 0.0);
            }
            w_min = w.iter().copied().fold(f64::INFINITY, f64::min);
            w_max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut order: Vec<u32> = (0..ne as u32).collect();
            order.sort_unstable_by(|&a, &b| {
                w[a as usize].total_cmp(&w[b as usize]).then(a.cmp(&b))
            });
            for e in order {
                let [u, v] = mesh.edges()[e as usize];
                sweep.union(u, v, w[e as usize]);
            }
            sweep.close(w_max);
        }
    }
    let range = w_max - w_min;
    if !(range > 0.0) {
        // Every event shares one threshold: nothing persists.
        return FeatureRegions::new(Vec::new(), mesh.nv());
    }
    let d = delta * range;
    let total_area = mesh.total_area();
    let lo = min_area * total_area;
    let hi = max_area * total_area;

    let branches = &sweep.branches;
    let mut kept: Vec<(f64, f64, Vec<u32>)> = Vec::new(); // (stability, area, sorted members)
    for (bi, b) in branches.iter().enumerate() {
        if !(b.death > b.birth) {
            continue;
        }
        // Plateau stabilities along this branch.
        let mut plats: Vec<(f64, f64, usize)> = Vec::new(); // (s, area, members_len)
        for j in 0..b.history.len() {
            let start = b.history[j].0;
            let end = if j + 1 < b.history.len() {
                b.history[j + 1].0
            } else {
                b.death
            };
            if !(end > start) {
                continue;
            }
            let theta = 0.5 * (start + end);
            let s = stability(
                b.history[j].1,
                area_at(branches, bi as u32, theta + d),
                area_at(branches, bi as u32, theta - d),
            );
            plats.push((s, b.history[j].1, b.history[j].2));
        }
        // Stability of the absorbing component right after this branch
        // dies, for the junction comparison at the branch's end.
        let junction = b.parent.map(|p| {
            stability(
                area_at(branches, p, b.death),
                area_at(branches, p, b.death + d),
                area_at(branches, p, b.death - d),
            )
        });
        for j in 0..plats.len() {
            let (s, area, mlen) = plats[j];
            if !(area >= lo && area <= hi) {
                continue;
            }
            let left_ok = j == 0 || s >= plats[j - 1].0;
            let right = if j + 1 < plats.len() {
                Some(plats[j + 1].0)
            } else {
                junction
            };
            if left_ok && right.is_none_or(|r| s >= r) {
                let mut verts = b.members[..mlen].to_vec();
                verts.sort_unstable();
                kept.push((s, area, verts));
            }
        }
    }

    // Near-duplicate removal: keep the more stable of any pair whose
    // mutual area overlap is at least 95%.
    kept.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| b.1.total_cmp(&a.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    let mut final_regions: Vec<(f64, f64, Vec<u32>)> = Vec::new();
    'next: for cand in kept {
        for prev in &final_regions {
            let inter = intersection_area(mesh, &cand.2, &prev.2);
            if inter >= 0.95 * cand.1 && inter >= 0.95 * prev.1 {
                continue 'next;
            }
        }
        final_regions.push(cand);
    }
    FeatureRegions::new(
        final_regions.into_iter().map(|(s, _, v)| (s, v)).collect(),
        mesh.nv(),
    )
}

/// Total vertex area shared by two ascending vertex lists.
fn intersection_area(mesh: &TriMesh, a: &[u32], b: &[u32]) -> f64 {
    let mut area = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                area += mesh.vertex_area(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::spectral::eigendecompose;
    use crate::mesh::synth;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Grid vertices within Euclidean radius `r` of the grid center.
    fn center_disk(mesh: &TriMesh, n: usize, r: f64) -> Vec<u32> {
        let c = (n as f64 - 1.0) / 2.0;
        (0..mesh.nv() as u32)
            .filter(|&v| {
                let p = mesh.position(v);
                (p.x - c).powi(2) + (p.y - c).powi(2) <= r * r
            })
            .collect()
    }

    #[test]
    fn two_level_vertex_weights_yield_exactly_the_disk() {
        let n = 12usize;
        let m = synth::plane_grid(n, n, 1.0);
        let disk = center_disk(&m, n, 3.0);
        assert!(disk.len() > 10 && disk.len() < m.nv() / 2);
        let mut w = vec![2.0; m.nv()];
        for &v in &disk {
            w[v as usize] = 1.0;
        }
        let regions =
            shape_mser_from_weights(&m, &MserWeights::Vertex(w), 0.05, 0.0, 0.9).unwrap();
        assert_eq!(regions.len(), 1, "expected exactly the disk");
        let r = &regions.regions()[0];
        assert_eq!(r.vertices, disk);
        assert_eq!(r.stability, f64::INFINITY);
    }

    #[test]
    fn two_level_edge_weights_yield_the_disk_too() {
        let n = 12usize;
        let m = synth::plane_grid(n, n, 1.0);
        let disk = center_disk(&m, n, 3.0);
        let in_disk = vec![false; m.nv()];
        let mut in_disk = in_disk;
        for &v in &disk {
            in_disk[v as usize] = true;
        }
        let w: Vec<f64> = m
            .edges()
            .iter()
            .map(|&[u, v]| {
                if in_disk[u as usize] && in_disk[v as usize] {
                    1.0
                } else {
                    2.0
                }
            })
            .collect();
        let regions =
            shape_mser_from_weights(&m, &MserWeights::Edge(w), 0.05, 0.05, 0.9).unwrap();
        assert_eq!(regions.len(), 1);
        assert_eq!(regions.regions()[0].vertices, disk);
    }

    /// Components at different thresholds can only nest or stay apart.
    #[test]
    fn emitted_regions_are_nested_or_disjoint() {
        let m = synth::icosphere(1.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let w: Vec<f64> = (0..m.nv()).map(|_| rng.random::<f64>()).collect();
            let regions =
                shape_mser_from_weights(&m, &MserWeights::Vertex(w), 0.02, 0.0, 1.0).unwrap();
            assert!(!regions.is_empty());
            let rs = regions.regions();
            for i in 0..rs.len() {
                for j in i + 1..rs.len() {
                    let (a, b) = (&rs[i].vertices, &rs[j].vertices);
                    let inter = a.iter().filter(|v| b.binary_search(v).is_ok()).count();
                    let nested = inter == a.len().min(b.len());
                    let disjoint = inter == 0;
                    assert!(nested || disjoint, "regions partially cross ({inter} shared)");
                }
            }
        }
    }

    #[test]
    fn size_bounds_filter_every_emitted_region() {
        let m = synth::icosphere(1.0, 2);
        let total = m.total_area();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..6 {
            let w: Vec<f64> = (0..m.nv()).map(|_| rng.random::<f64>()).collect();
            let regions =
                shape_mser_from_weights(&m, &MserWeights::Vertex(w), 0.02, 0.4, 0.5).unwrap();
            for r in regions.regions() {
                let area: f64 = r.vertices.iter().map(|&v| m.vertex_area(v)).sum();
                assert!(
                    area >= 0.4 * total - 1e-9 && area <= 0.5 * total + 1e-9,
                    "region area {area} outside [{}, {}]",
                    0.4 * total,
                    0.5 * total
                );
            }
        }
        // A two-level disk sized inside the bounds shows the filter is not
        // vacuous.
        let n = 14usize;
        let grid = synth::plane_grid(n, n, 1.0);
        let disk = center_disk(&grid, n, 4.9);
        let mut w = vec![2.0; grid.nv()];
        for &v in &disk {
            w[v as usize] = 1.0;
        }
        let disk_area: f64 = disk.iter().map(|&v| grid.vertex_area(v)).sum();
        let gt = grid.total_area();
        let (lo, hi) = (0.8 * disk_area / gt, 1.2 * disk_area / gt);
        let regions =
            shape_mser_from_weights(&grid, &MserWeights::Vertex(w), 0.05, lo, hi.min(1.0)).unwrap();
        assert_eq!(regions.len(), 1);
        assert_eq!(regions.regions()[0].vertices, disk);
    }

    #[test]
    fn regions_never_span_mesh_components() {
        // Two separate spheres in one container.
        let a = synth::icosphere(1.0, 1);
        let b = synth::icosphere(1.0, 1);
        let off = a.nv() as u32;
        let mut pos = a.positions().to_vec();
        pos.extend(b.positions().iter().map(|p| nalgebra::Point3::new(p.x + 5.0, p.y, p.z)));
        let mut faces = a.faces().to_vec();
        faces.extend(b.faces().iter().map(|f| f.map(|c| c + off)));
        let m = crate::TriMesh::new(pos, faces).unwrap();
        assert!(!m.is_connected());

        let (n_comp, labels) = m.components();
        assert_eq!(n_comp, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w: Vec<f64> = (0..m.nv()).map(|_| rng.random::<f64>()).collect();
        let regions =
            shape_mser_from_weights(&m, &MserWeights::Vertex(w), 0.02, 0.0, 1.0).unwrap();
        assert!(!regions.is_empty());
        for r in regions.regions() {
            let first = labels[r.vertices[0] as usize];
            assert!(r.vertices.iter().all(|&v| labels[v as usize] == first));
        }
    }

    #[test]
    fn spectral_weightings_are_usable_end_to_end() {
        let m = synth::bumpy_sphere(1.0, 2, 0.35);
        let basis = eigendecompose(&m, 40).unwrap();
        for weighting in [
            MserWeighting::VertexHks { t: None },
            MserWeighting::EdgeInvHks { t: None },
            MserWeighting::EdgeInvCommuteTime,
        ] {
            let w = mser_weights(&m, &basis, &weighting).unwrap();
            match &w {
                MserWeights::Vertex(v) => {
                    assert_eq!(v.len(), m.nv());
                    assert!(v.iter().all(|x| x.is_finite() && *x > 0.0));
                }
                MserWeights::Edge(e) => {
                    assert_eq!(e.len(), m.edges().len());
                    assert!(e.iter().all(|x| x.is_finite() && *x > 0.0));
                }
            }
            let cfg = MserConfig { weighting, ..MserConfig::default() };
            let regions = shape_mser(&m, &basis, &cfg).unwrap();
            for r in regions.regions() {
                assert!(!r.vertices.is_empty());
                assert!(!r.stability.is_nan());
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = synth::tetrahedron(1.0);
        let w = MserWeights::Vertex(vec![1.0; 4]);
        assert!(shape_mser_from_weights(&m, &w, 0.0, 0.0, 1.0).is_err());
        assert!(shape_mser_from_weights(&m, &w, 0.1, 0.5, 0.4).is_err());
        let short = MserWeights::Vertex(vec![1.0; 3]);
        assert!(shape_mser_from_weights(&m, &short, 0.1, 0.0, 1.0).is_err());
        let neg = MserWeights::Edge(vec![-1.0; m.edges().len()]);
        assert!(shape_mser_from_weights(&m, &neg, 0.1, 0.0, 1.0).is_err());
        let nan = MserWeights::Vertex(vec![f64::NAN; 4]);
        assert!(shape_mser_from_weights(&m, &nan, 0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn constant_weights_emit_nothing() {
        let m = synth::icosphere(1.0, 1);
        let w = MserWeights::Vertex(vec![3.0; m.nv()]);
        let regions = shape_mser_from_weights(&m, &w, 0.1, 0.0, 1.0).unwrap();
        assert!(regions.is_empty());
    }
}
