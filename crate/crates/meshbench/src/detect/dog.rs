//! Difference-of-Gaussians detectors over a mesh scale space.
//!
//! Both detectors share one smoothing primitive: a renormalized one-ring
//! Gaussian ([`RingKernel`]) with bandwidth `h` = mean edge length, applied
//! repeatedly. Level `i` of the scale space applies the kernel `2^(i−1)`
//! more times than level `i−1`, so the cumulative iteration count after
//! level `i` is `2^i − 1` and the effective kernel width grows as
//! `h·√(2^i − 1)` (t-fold smoothing ≈ one Gaussian of width `h·√t`); that
//! width is what detected features record as their scale.
//!
//! [`mesh_dog`] differences a curvature field across levels; a feature is a
//! vertex that is a strict extremum of `DoG_i = f_{i+1} − f_i` over its
//! one-ring at level `i` and over the same vertex at levels `i±1` (the
//! first and last levels compare one-sided, so a disturbance whose response
//! decays or grows monotonically through the pyramid — an isolated spike,
//! say — still registers at the boundary level where it is largest).
//! [`mesh_scale_dog`] differences the geometry itself: `DoG_i(v)` is the
//! distance vertex `v` moves between smoothed meshes `i` and `i+1`.
//! Displacement is nonnegative, so only maxima are salient there, while the
//! curvature detector keeps both maxima and minima. A feature at difference
//! level `i` records the cumulative width of the more-smoothed side of the
//! pair, `h·√(2^(i+1) − 1)`, as its scale.

use nalgebra::Vector3;

use crate::detect::{DetectorDiagnostics, FeatureEntry, FeaturePoints};
use crate::mesh::curvature;
use crate::{Error, Result, TriMesh};

/// Which curvature field [`mesh_dog`] builds its scale space from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureField {
    Mean,
    Gaussian,
}

#[derive(Debug, Clone)]
pub struct MeshDogConfig {
    pub field: CurvatureField,
    /// Number of difference levels (needs ≥ 3 so at least one level has
    /// both scale neighbors).
    pub scales: usize,
    pub target: usize,
}

impl Default for MeshDogConfig {
    fn default() -> Self {
        MeshDogConfig { field: CurvatureField::Mean, scales: 6, target: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct ScaleDogConfig {
    /// Number of difference levels (≥ 3).
    pub levels: usize,
    pub target: usize,
}

impl Default for ScaleDogConfig {
    fn default() -> Self {
        ScaleDogConfig { levels: 6, target: 4000 }
    }
}

/// One-ring Gaussian smoothing operator: neighbor `u` of `v` gets weight
/// `exp(−‖p_u − p_v‖² / 2h²)`, the vertex itself weight 1, all renormalized
/// to sum 1. Weights are fixed at construction (from the input geometry)
/// and accumulate in canonical rank order.
#[derive(Debug, Clone)]
pub struct RingKernel {
    /// Per vertex: `(neighbor, weight)` including the vertex itself.
    stencil: Vec<Vec<(u32, f64)>>,
    width: f64,
}

impl RingKernel {
    pub fn new(mesh: &TriMesh) -> RingKernel {
        let h = mesh.mean_edge_len();
        let inv = if h > 0.0 { 1.0 / (2.0 * h * h) } else { 0.0 };
        let mut stencil = Vec::with_capacity(mesh.nv());
        for v in 0..mesh.nv() as u32 {
            let pv = mesh.position(v);
            // ring() is rank-sorted; splice the vertex itself in at its own
            // rank so the weighted sum runs in one canonical order.
            let mut row: Vec<(u32, f64)> = Vec::with_capacity(mesh.ring(v).len() + 1);
            let mut placed = false;
            for &u in mesh.ring(v) {
                if !placed && mesh.rank(u) > mesh.rank(v) {
                    row.push((v, 1.0));
                    placed = true;
                }
                let l2 = (mesh.position(u) - pv).norm_squared();
                row.push((u, (-l2 * inv).exp()));
            }
            if !placed {
                row.push((v, 1.0));
            }
            let total: f64 = row.iter().map(|&(_, w)| w).sum();
            for entry in row.iter_mut() {
                entry.1 /= total;
            }
            stencil.push(row);
        }
        RingKernel { stencil, width: h }
    }

    /// Bandwidth `h` of a single application.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Effective width after `2^level − 1` cumulative applications.
    pub fn level_width(&self, level: usize) -> f64 {
        self.width * (((1u64 << level) - 1) as f64).sqrt()
    }

    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        for (v, row) in self.stencil.iter().enumerate() {
            out[v] = row.iter().map(|&(u, w)| w * f[u as usize]).sum();
        }
    }

    pub fn apply_points(&self, p: &[Vector3<f64>], out: &mut [Vector3<f64>]) {
        for (v, row) in self.stencil.iter().enumerate() {
            let mut acc = Vector3::zeros();
            for &(u, w) in row {
                acc += w * p[u as usize];
            }
            out[v] = acc;
        }
    }
}

/// Smooths `start` through `levels` doubling steps, returning all
/// `levels + 1` fields (index 0 = input).
fn scale_space(kernel: &RingKernel, start: Vec<f64>, levels: usize) -> Vec<Vec<f64>> {
    let n = start.len();
    let mut fields = Vec::with_capacity(levels + 1);
    fields.push(start);
    let mut scratch = vec![0.0f64; n];
    for i in 1..=levels {
        let mut cur = fields[i - 1].clone();
        for _ in 0..(1u64 << (i - 1)) {
            kernel.apply(&cur, &mut scratch);
            std::mem::swap(&mut cur, &mut scratch);
        }
        fields.push(cur);
    }
    fields
}

/// Difference-of-Gaussians extrema of a curvature field. Returns ranked
/// points (scale = kernel width at the feature's level) plus diagnostics;
/// an empty result carries a warning, since it usually means the field was
/// constant.
pub fn mesh_dog(mesh: &TriMesh, cfg: &MeshDogConfig) -> Result<(FeaturePoints, DetectorDiagnostics)> {
    let field = match cfg.field {
        CurvatureField::Mean => curvature::mean_curvature(mesh),
        CurvatureField::Gaussian => curvature::gaussian_curvature(mesh),
    };
    let (points, mut diag) = mesh_dog_on_field(mesh, &field.values, cfg.scales, cfg.target)?;
    diag.skipped_vertices += field.fallback_count;
    Ok((points, diag))
}

/// [`mesh_dog`] on a caller-supplied per-vertex field.
pub fn mesh_dog_on_field(
    mesh: &TriMesh,
    values: &[f64],
    scales: usize,
    target: usize,
) -> Result<(FeaturePoints, DetectorDiagnostics)> {
    validate(mesh, scales, target)?;
    if values.len() != mesh.nv() {
        return Err(Error::InvalidInput(format!(
            "field has {} values for {} vertices",
            values.len(),
            mesh.nv()
        )));
    }
    const EMPTY_WARNING: &str =
        "curvature difference-of-Gaussians has no strict extrema (constant field?)";
    // A constant field is a fixed point of the normalized kernel in exact
    // arithmetic, but roundoff in the weighted sums leaves ~1e-16 ripples
    // that strict comparisons would call extrema; recognize the degenerate
    // input directly instead.
    if values.windows(2).all(|w| w[0] == w[1]) {
        return finish(mesh, vec![None; mesh.nv()], target, EMPTY_WARNING);
    }
    let kernel = RingKernel::new(mesh);
    let fields = scale_space(&kernel, values.to_vec(), scales);
    let dogs: Vec<Vec<f64>> = (0..scales)
        .map(|i| {
            fields[i + 1]
                .iter()
                .zip(&fields[i])
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();

    let mut best: Vec<Option<(f64, f64)>> = vec![None; mesh.nv()]; // (|dog|, scale)
    for i in 0..scales {
        let d = &dogs[i];
        for v in 0..mesh.nv() as u32 {
            let x = d[v as usize];
            let spatial_max = mesh.ring(v).iter().all(|&u| x > d[u as usize]);
            let spatial_min = mesh.ring(v).iter().all(|&u| x < d[u as usize]);
            if !spatial_max && !spatial_min {
                continue;
            }
            let below = (i > 0).then(|| dogs[i - 1][v as usize]);
            let above = (i + 1 < scales).then(|| dogs[i + 1][v as usize]);
            let scale_max = below.is_none_or(|b| x > b) && above.is_none_or(|a| x > a);
            let scale_min = below.is_none_or(|b| x < b) && above.is_none_or(|a| x < a);
            if (spatial_max && scale_max) || (spatial_min && scale_min) {
                let cand = (x.abs(), kernel.level_width(i + 1));
                let better = match best[v as usize] {
                    None => true,
                    Some((r, s)) => cand.0 > r || (cand.0 == r && cand.1 < s),
                };
                if better {
                    best[v as usize] = Some(cand);
                }
            }
        }
    }
    finish(mesh, best, target, EMPTY_WARNING)
}

/// Difference-of-Gaussians on the geometry: per level, the distance each
/// vertex moves under one more round of smoothing. Maxima in location and
/// scale become features whose scale is the kernel width at their level.
pub fn mesh_scale_dog(
    mesh: &TriMesh,
    cfg: &ScaleDogConfig,
) -> Result<(FeaturePoints, DetectorDiagnostics)> {
    validate(mesh, cfg.levels, cfg.target)?;
    let kernel = RingKernel::new(mesh);
    let n = mesh.nv();
    let levels = cfg.levels;
    let mut meshes: Vec<Vec<Vector3<f64>>> = Vec::with_capacity(levels + 1);
    meshes.push(mesh.positions().iter().map(|p| p.coords).collect());
    let mut scratch = vec![Vector3::zeros(); n];
    for i in 1..=levels {
        let mut cur = meshes[i - 1].clone();
        for _ in 0..(1u64 << (i - 1)) {
            kernel.apply_points(&cur, &mut scratch);
            std::mem::swap(&mut cur, &mut scratch);
        }
        meshes.push(cur);
    }
    let dogs: Vec<Vec<f64>> = (0..levels)
        .map(|i| {
            (0..n)
                .map(|v| (meshes[i + 1][v] - meshes[i][v]).norm())
                .collect()
        })
        .collect();

    let mut best: Vec<Option<(f64, f64)>> = vec![None; n];
    for i in 0..levels {
        let d = &dogs[i];
        for v in 0..n as u32 {
            let x = d[v as usize];
            if !mesh.ring(v).iter().all(|&u| x > d[u as usize]) {
                continue;
            }
            let below = (i > 0).then(|| dogs[i - 1][v as usize]);
            let above = (i + 1 < levels).then(|| dogs[i + 1][v as usize]);
            if below.is_none_or(|b| x > b) && above.is_none_or(|a| x > a) {
                let cand = (x, kernel.level_width(i + 1));
                let better = match best[v as usize] {
                    None => true,
                    Some((r, s)) => cand.0 > r || (cand.0 == r && cand.1 < s),
                };
                if better {
                    best[v as usize] = Some(cand);
                }
            }
        }
    }
    finish(mesh, best, cfg.target, "geometry difference-of-Gaussians has no strict maxima (already smooth?)")
}

fn validate(mesh: &TriMesh, levels: usize, target: usize) -> Result<()> {
    if levels < 3 {
        return Err(Error::InvalidInput(format!(
            "difference-of-Gaussians needs >= 3 levels, got {levels}"
        )));
    }
    if target == 0 {
        return Err(Error::InvalidInput("feature target must be >= 1".into()));
    }
    if mesh.nv() == 0 {
        return Err(Error::InvalidMesh("empty mesh".into()));
    }
    Ok(())
}

fn finish(
    mesh: &TriMesh,
    best: Vec<Option<(f64, f64)>>,
    target: usize,
    empty_warning: &str,
) -> Result<(FeaturePoints, DetectorDiagnostics)> {
    let mut cands: Vec<(u32, f64, f64)> = best
        .into_iter()
        .enumerate()
        .filter_map(|(v, b)| b.map(|(r, s)| (v as u32, r, s)))
        .collect();
    cands.sort_unstable_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| mesh.rank(a.0).cmp(&mesh.rank(b.0)))
    });
    cands.truncate(target);
    let entries = cands
        .into_iter()
        .map(|(v, r, s)| FeatureEntry { vertex: v, response: r, scale: Some(s) })
        .collect();
    let points = FeaturePoints::new(entries, mesh.nv())?;
    let mut diag = DetectorDiagnostics::default();
    if points.is_empty() {
        diag.warnings.push(empty_warning.to_string());
    }
    Ok((points, diag))
}
