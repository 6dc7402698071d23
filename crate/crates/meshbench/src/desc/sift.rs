//! Local-depth SIFT: a SIFT histogram over a rasterized depth map.
//!
//! Per feature: fit a tangent plane by PCA of the support ball (normal =
//! least-variance axis), take each support vertex's signed distance to
//! that plane as depth, rasterize the depths onto a square grid whose
//! viewport side matches the support, difference the grid for gradients,
//! and accumulate a 4×4-spatial × 8-orientation gradient histogram with
//! Gaussian radial weighting — L2-normalized, clamped at 0.2, renormalized.
//!
//! Two sign ambiguities are fixed deterministically from the geometry:
//! the normal points toward the larger signed depth mass, and the in-plane
//! dominant axis (principal direction of the depth-mass distribution)
//! points into the half-plane holding more depth mass. Both rules rotate
//! with the surface, which is what makes the descriptor invariant to rigid
//! motion and to in-plane rotation of the underlying patch.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};

use crate::desc::{
    feature_radius, DescriptorBinding, DescriptorDiagnostics, DescriptorKind, DescriptorSet,
};
use crate::detect::FeaturePoints;
use crate::mesh::grid::SpatialGrid;
use crate::{Error, Result, TriMesh};

#[derive(Debug, Clone)]
pub struct SiftConfig {
    /// Depth-map resolution (side length in pixels).
    pub grid: usize,
    /// Spatial histogram cells per axis (4 → 4×4 cells).
    pub spatial_bins: usize,
    pub orientation_bins: usize,
    /// Support radius and viewport side as a multiple of feature scale.
    pub support_scales: f64,
    pub default_scale: Option<f64>,
    /// Post-normalization clamp before the final renormalization.
    pub clamp: f64,
}

impl Default for SiftConfig {
    fn default() -> Self {
        SiftConfig {
            grid: 32,
            spatial_bins: 4,
            orientation_bins: 8,
            support_scales: 6.0,
            default_scale: None,
            clamp: 0.2,
        }
    }
}

pub fn local_depth_sift(
    mesh: &TriMesh,
    feats: &FeaturePoints,
    cfg: &SiftConfig,
) -> Result<(DescriptorSet, DescriptorDiagnostics)> {
    if cfg.grid < 2 || cfg.spatial_bins == 0 || cfg.orientation_bins == 0 {
        return Err(Error::InvalidInput("bad depth-map or histogram resolution".into()));
    }
    if cfg.grid % cfg.spatial_bins != 0 {
        return Err(Error::InvalidInput(format!(
            "depth map side {} must be a multiple of the spatial bins {}",
            cfg.grid, cfg.spatial_bins
        )));
    }
    if !(cfg.support_scales > 0.0 && cfg.support_scales.is_finite()) || !(cfg.clamp > 0.0) {
        return Err(Error::InvalidInput("bad support multiplier or clamp".into()));
    }
    let cols = cfg.spatial_bins * cfg.spatial_bins * cfg.orientation_bins;
    let mut radii = Vec::with_capacity(feats.len());
    for e in feats.entries() {
        radii.push(feature_radius(e.scale, cfg.support_scales, cfg.default_scale)?);
    }
    let max_r = radii.iter().copied().fold(0.0f64, f64::max);
    let grid = (max_r > 0.0).then(|| SpatialGrid::new(mesh, max_r));

    let mut diag = DescriptorDiagnostics::default();
    let mut data: Vec<f64> = Vec::new();
    let mut bound: Vec<u32> = Vec::new();
    let mut support: Vec<u32> = Vec::new();
    for (idx, e) in feats.entries().iter().enumerate() {
        let r = radii[idx];
        let grid_ref = grid.as_ref().expect("positive radius implies a grid");
        grid_ref.within(mesh, e.vertex, r, &mut support);
        support.sort_unstable_by_key(|&u| mesh.rank(u));
        match feature_row(mesh, e.vertex, r, &support, cfg) {
            Some(row) => {
                if row.iter().all(|&x| x == 0.0) {
                    diag.zero_rows += 1;
                    diag.warnings.push(format!(
                        "feature {}: constant depth, zero histogram",
                        e.vertex
                    ));
                }
                data.extend_from_slice(&row);
                bound.push(e.vertex);
            }
            None => {
                diag.dropped_features += 1;
                diag.warnings.push(format!(
                    "feature {}: support has no usable tangent frame",
                    e.vertex
                ));
            }
        }
    }
    let set = DescriptorSet::new(
        DescriptorKind::LocalDepthSift,
        DescriptorBinding::Features(bound),
        cols,
        data,
    )?;
    Ok((set, diag))
}

/// One descriptor row; `None` = the support is too flat-degenerate to
/// orient (fewer than three points, or collinear).
fn feature_row(
    mesh: &TriMesh,
    vertex: u32,
    r: f64,
    support: &[u32],
    cfg: &SiftConfig,
) -> Option<Vec<f64>> {
    if support.len() < 3 {
        return None;
    }
    // PCA of the support: tangent plane normal = least-variance axis.
    let mut centroid = Vector3::zeros();
    for &q in support {
        centroid += mesh.position(q).coords;
    }
    centroid /= support.len() as f64;
    let mut cov = Matrix3::zeros();
    for &q in support {
        let d = mesh.position(q).coords - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let (l0, l1) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if !(l0 > 0.0) || l1 <= 1e-12 * l0 {
        return None; // collinear support has no tangent plane
    }
    let t1 = eig.eigenvectors.column(order[0]).into_owned();
    let t2 = eig.eigenvectors.column(order[1]).into_owned();
    let mut n = eig.eigenvectors.column(order[2]).into_owned();

    // Point the normal at the heavier signed-depth side.
    let signed_mass: f64 = support
        .iter()
        .map(|&q| mesh.vertex_area(q) * (mesh.position(q).coords - centroid).dot(&n))
        .sum();
    if signed_mass < 0.0 {
        n = -n;
    } else if signed_mass == 0.0 {
        orient_by_components(&mut n);
    }

    // Dominant in-plane axis: principal direction of the projected points
    // weighted by depth mass, pointing into the heavier half-plane.
    let w_of = |q: u32| -> f64 {
        let depth = (mesh.position(q).coords - centroid).dot(&n);
        mesh.vertex_area(q) * depth.abs()
    };
    let (mut mu, mut mv, mut wsum) = (0.0f64, 0.0f64, 0.0f64);
    for &q in support {
        let d = mesh.position(q).coords - centroid;
        let w = w_of(q);
        mu += w * d.dot(&t1);
        mv += w * d.dot(&t2);
        wsum += w;
    }
    if wsum == 0.0 {
        // Zero depth everywhere: a perfect plane. No gradients can exist;
        // the caller records the zero row.
        return Some(vec![0.0; cfg.spatial_bins * cfg.spatial_bins * cfg.orientation_bins]);
    }
    mu /= wsum;
    mv /= wsum;
    let mut c2 = Matrix2::zeros();
    for &q in support {
        let d = mesh.position(q).coords - centroid;
        let (u, v) = (d.dot(&t1) - mu, d.dot(&t2) - mv);
        c2 += w_of(q) * Matrix2::new(u * u, u * v, u * v, v * v);
    }
    let mut phi = 0.5 * (2.0 * c2[(0, 1)]).atan2(c2[(0, 0)] - c2[(1, 1)]);
    let half_plane_mass = |phi: f64| -> f64 {
        let (c, s) = (phi.cos(), phi.sin());
        support
            .iter()
            .map(|&q| {
                let d = mesh.position(q).coords - centroid;
                let along = (d.dot(&t1) - mu) * c + (d.dot(&t2) - mv) * s;
                if along > 0.0 {
                    w_of(q)
                } else {
                    0.0
                }
            })
            .sum()
    };
    if half_plane_mass(phi) < half_plane_mass(phi + std::f64::consts::PI) {
        phi += std::f64::consts::PI;
    }
    let xhat = (phi.cos() * t1 + phi.sin() * t2).normalize();
    let yhat = n.cross(&xhat);

    // Rasterize area-weighted mean depth over the viewport, splatting each
    // vertex bilinearly onto the four nearest pixel centers so that pixel
    // coverage does not depend on how the frame sits on the mesh sampling.
    let g = cfg.grid;
    let p = mesh.position(vertex).coords;
    let delta = r / g as f64;
    let half = r / 2.0;
    let mut num = vec![0.0f64; g * g];
    let mut den = vec![0.0f64; g * g];
    for &q in support {
        let d = mesh.position(q).coords - p;
        let (u, v) = (d.dot(&xhat), d.dot(&yhat));
        if u.abs() >= half || v.abs() >= half {
            continue;
        }
        let w = mesh.vertex_area(q);
        let depth = (mesh.position(q).coords - centroid).dot(&n);
        let cu = (u + half) / delta - 0.5;
        let cv = (v + half) / delta - 0.5;
        let (i0, j0) = (cu.floor(), cv.floor());
        let (fu, fv) = (cu - i0, cv - j0);
        for (di, dj, bw) in [
            (0i64, 0i64, (1.0 - fu) * (1.0 - fv)),
            (1, 0, fu * (1.0 - fv)),
            (0, 1, (1.0 - fu) * fv),
            (1, 1, fu * fv),
        ] {
            let (i, j) = (i0 as i64 + di, j0 as i64 + dj);
            if i < 0 || j < 0 || i >= g as i64 || j >= g as i64 || bw == 0.0 {
                continue;
            }
            num[j as usize * g + i as usize] += w * bw * depth;
            den[j as usize * g + i as usize] += w * bw;
        }
    }
    let map: Vec<f64> = num
        .iter()
        .zip(&den)
        .map(|(a, b)| if *b > 0.0 { a / b } else { 0.0 })
        .collect();

    // Gradient histogram over interior pixels, with the usual trilinear
    // soft binning (spatial cells and circular orientation) so small
    // rotations of the pattern move mass smoothly between bins.
    let cells = cfg.spatial_bins;
    let nbins = cfg.orientation_bins;
    let mut hist = vec![0.0f64; cells * cells * nbins];
    let sigma = r / 2.0;
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    let pix = (g / cells) as f64;
    let obin_width = 2.0 * std::f64::consts::PI / nbins as f64;
    for j in 1..g - 1 {
        for i in 1..g - 1 {
            let gx = (map[j * g + i + 1] - map[j * g + i - 1]) / (2.0 * delta);
            let gy = (map[(j + 1) * g + i] - map[(j - 1) * g + i]) / (2.0 * delta);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let theta = gy.atan2(gx);
            let uc = (i as f64 + 0.5) * delta - half;
            let vc = (j as f64 + 0.5) * delta - half;
            let w = mag * (-(uc * uc + vc * vc) * inv2s2).exp();
            let co = (theta + std::f64::consts::PI) / obin_width - 0.5;
            let o0 = co.floor();
            let fo = co - o0;
            let su = (i as f64 + 0.5) / pix - 0.5;
            let sv = (j as f64 + 0.5) / pix - 0.5;
            let (s0u, s0v) = (su.floor(), sv.floor());
            let (fsu, fsv) = (su - s0u, sv - s0v);
            for (du, wu) in [(0i64, 1.0 - fsu), (1, fsu)] {
                let sx = s0u as i64 + du;
                if sx < 0 || sx >= cells as i64 || wu == 0.0 {
                    continue;
                }
                for (dv, wv) in [(0i64, 1.0 - fsv), (1, fsv)] {
                    let sy = s0v as i64 + dv;
                    if sy < 0 || sy >= cells as i64 || wv == 0.0 {
                        continue;
                    }
                    for (dodd, wo) in [(0i64, 1.0 - fo), (1, fo)] {
                        let o = (o0 as i64 + dodd).rem_euclid(nbins as i64) as usize;
                        hist[(sy as usize * cells + sx as usize) * nbins + o] +=
                            w * wu * wv * wo;
                    }
                }
            }
        }
    }
    let norm = hist.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Some(hist);
    }
    for x in hist.iter_mut() {
        *x = (*x / norm).min(cfg.clamp);
    }
    let norm2 = hist.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in hist.iter_mut() {
        *x /= norm2;
    }
    Some(hist)
}

/// Deterministic sign for an axis with no geometric preference: make the
/// largest-magnitude component positive.
fn orient_by_components(v: &mut Vector3<f64>) {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] < 0.0 {
        *v = -*v;
    }
}
