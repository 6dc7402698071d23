//! Spin images: cylindrical-coordinate surface mass maps.
//!
//! For a feature at `p` with unit normal `n` and support radius `r`, every
//! support vertex `q` lands at the normalized cylindrical coordinates
//!
//! ```text
//! α = ‖(q−p) − ((q−p)·n)·n‖ / r   ∈ [0, 1]   (radial offset)
//! β = ((q−p)·n) / r               ∈ [−1, 1]  (height above the plane)
//! ```
//!
//! and deposits its barycentric vertex area into an `nα × nβ` grid with
//! bilinear splatting (edge bins absorb clamped overflow, so total mass is
//! conserved). Rows are L1-normalized, which cancels the `area ∝ scale²`
//! factor and makes the descriptor scale-invariant when feature scales
//! track mesh scale.

use crate::desc::{
    feature_radius, DescriptorBinding, DescriptorDiagnostics, DescriptorKind, DescriptorSet,
};
use crate::detect::FeaturePoints;
use crate::mesh::grid::SpatialGrid;
use crate::{Error, Result, TriMesh};

#[derive(Debug, Clone)]
pub struct SpinConfig {
    pub alpha_bins: usize,
    pub beta_bins: usize,
    /// Support radius as a multiple of the feature scale.
    pub support_scales: f64,
    /// Stand-in scale for features that carry none (e.g. corner features).
    pub default_scale: Option<f64>,
}

impl Default for SpinConfig {
    fn default() -> Self {
        SpinConfig { alpha_bins: 8, beta_bins: 8, support_scales: 6.0, default_scale: None }
    }
}

pub fn spin_image(
    mesh: &TriMesh,
    feats: &FeaturePoints,
    cfg: &SpinConfig,
) -> Result<(DescriptorSet, DescriptorDiagnostics)> {
    if cfg.alpha_bins == 0 || cfg.beta_bins == 0 {
        return Err(Error::InvalidInput("spin image needs at least one bin per axis".into()));
    }
    if !(cfg.support_scales > 0.0 && cfg.support_scales.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bad support multiplier {}",
            cfg.support_scales
        )));
    }
    let cols = cfg.alpha_bins * cfg.beta_bins;
    let mut radii = Vec::with_capacity(feats.len());
    for e in feats.entries() {
        radii.push(feature_radius(e.scale, cfg.support_scales, cfg.default_scale)?);
    }
    let max_r = radii.iter().copied().fold(0.0f64, f64::max);
    let grid = (max_r > 0.0).then(|| SpatialGrid::new(mesh, max_r));

    let mut diag = DescriptorDiagnostics::default();
    let mut data = vec![0.0f64; feats.len() * cols];
    let mut support: Vec<u32> = Vec::new();
    for (idx, e) in feats.entries().iter().enumerate() {
        let row = &mut data[idx * cols..(idx + 1) * cols];
        let p = mesh.position(e.vertex);
        let n = mesh.vertex_normal(e.vertex);
        let r = radii[idx];
        if n.norm_squared() == 0.0 {
            diag.zero_rows += 1;
            diag.warnings.push(format!(
                "feature {} has a degenerate normal; descriptor zeroed",
                e.vertex
            ));
            continue;
        }
        let grid = grid.as_ref().expect("positive radius implies a grid");
        grid.within(mesh, e.vertex, r, &mut support);
        support.sort_unstable_by_key(|&u| mesh.rank(u));
        for &q in &support {
            let w = mesh.vertex_area(q);
            if w == 0.0 {
                continue;
            }
            let d = mesh.position(q) - p;
            let beta_raw = d.dot(&n);
            let alpha = (d - beta_raw * n).norm() / r;
            let beta = (beta_raw / r).clamp(-1.0, 1.0);
            splat(row, cfg.alpha_bins, cfg.beta_bins, alpha, beta, w);
        }
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            for x in row.iter_mut() {
                *x /= total;
            }
        } else {
            diag.zero_rows += 1;
            diag.warnings.push(format!("feature {} has empty support", e.vertex));
        }
    }
    let set = DescriptorSet::new(
        DescriptorKind::SpinImage,
        DescriptorBinding::Features(feats.entries().iter().map(|e| e.vertex).collect()),
        cols,
        data,
    )?;
    Ok((set, diag))
}

/// Bilinear deposit of `w` at grid position (α ∈ [0,1], β ∈ [−1,1]); row
/// layout is β-major (`row[b·nα + a]`).
fn splat(row: &mut [f64], na: usize, nb: usize, alpha: f64, beta: f64, w: f64) {
    let a = alpha * na as f64 - 0.5;
    let b = (beta + 1.0) * 0.5 * nb as f64 - 0.5;
    let (a0, fa) = floor_frac(a, na);
    let (b0, fb) = floor_frac(b, nb);
    let deposit = |row: &mut [f64], ai: usize, bi: usize, m: f64| {
        row[bi * na + ai] += m;
    };
    let a1 = (a0 + 1).min(na - 1);
    let b1 = (b0 + 1).min(nb - 1);
    deposit(row, a0, b0, w * (1.0 - fa) * (1.0 - fb));
    deposit(row, a1, b0, w * fa * (1.0 - fb));
    deposit(row, a0, b1, w * (1.0 - fa) * fb);
    deposit(row, a1, b1, w * fa * fb);
}

/// Splits a continuous bin coordinate into (lower bin, fraction), clamping
/// below 0 and above the last bin so no mass escapes.
fn floor_frac(x: f64, n: usize) -> (usize, f64) {
    if x <= 0.0 {
        return (0, 0.0);
    }
    let last = (n - 1) as f64;
    if x >= last {
        return (n - 1, 0.0);
    }
    let f = x.floor();
    (f as usize, x - f)
}
