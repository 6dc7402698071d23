//! Histogram of oriented field gradients around a feature.
//!
//! The field is any per-vertex scalar (curvature, heat kernel value, …).
//! Its gradient is constant on each face (linear interpolation over the
//! triangle); each face inside the support contributes its area-weighted
//! tangent-projected gradient magnitude to a polar-ring × orientation
//! histogram. Orientations are measured from the dominant gradient
//! direction — the area-weighted resultant of the projected gradients — so
//! the row does not change under rigid motion. The 4-ring × 8-orientation
//! layout is a deliberately compact stand-in for richer two-level HoG
//! variants.

use nalgebra::Vector3;

use crate::desc::{DescriptorBinding, DescriptorDiagnostics, DescriptorKind, DescriptorSet};
use crate::detect::FeaturePoints;
use crate::mesh::grid::SpatialGrid;
use crate::{Error, Result, TriMesh};

#[derive(Debug, Clone)]
pub struct MeshHogConfig {
    /// Concentric distance rings around the feature.
    pub polar_bins: usize,
    pub orientation_bins: usize,
    /// Support radius as a multiple of feature scale, when a scale exists.
    pub support_scales: f64,
    /// Fallback support radius as a fraction of the mesh diameter, for
    /// features without a scale.
    pub default_radius_frac: f64,
}

impl Default for MeshHogConfig {
    fn default() -> Self {
        MeshHogConfig {
            polar_bins: 4,
            orientation_bins: 8,
            support_scales: 6.0,
            default_radius_frac: 0.05,
        }
    }
}

pub fn mesh_hog(
    mesh: &TriMesh,
    feats: &FeaturePoints,
    field: &[f64],
    cfg: &MeshHogConfig,
) -> Result<(DescriptorSet, DescriptorDiagnostics)> {
    if field.len() != mesh.nv() {
        return Err(Error::InvalidInput(format!(
            "field has {} values for {} vertices",
            field.len(),
            mesh.nv()
        )));
    }
    if field.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("field contains a non-finite value".into()));
    }
    if cfg.polar_bins == 0 || cfg.orientation_bins == 0 {
        return Err(Error::InvalidInput("histogram needs at least one bin per axis".into()));
    }
    if !(cfg.support_scales > 0.0 && cfg.support_scales.is_finite())
        || !(cfg.default_radius_frac > 0.0 && cfg.default_radius_frac.is_finite())
    {
        return Err(Error::InvalidInput("bad support radius parameters".into()));
    }

    let fallback = cfg.default_radius_frac * mesh.diam();
    let mut radii = Vec::with_capacity(feats.len());
    for e in feats.entries() {
        let r = match e.scale {
            Some(s) => cfg.support_scales * s,
            None => fallback,
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "feature {} has support radius {r}",
                e.vertex
            )));
        }
        radii.push(r);
    }

    // Face gradients, once. A face whose centroid lies within r of the
    // feature has its nearest vertex within r + the longest edge, so the
    // vertex grid with that slack finds every candidate face.
    let gradients = face_gradients(mesh, field);
    let max_edge = mesh
        .edges()
        .iter()
        .map(|&[a, b]| (mesh.position(a) - mesh.position(b)).norm())
        .fold(0.0f64, f64::max);
    let max_r = radii.iter().copied().fold(0.0f64, f64::max);
    let grid = SpatialGrid::new(mesh, max_r + max_edge);

    let cols = cfg.polar_bins * cfg.orientation_bins;
    let mut diag = DescriptorDiagnostics::default();
    let mut data: Vec<f64> = Vec::new();
    let mut bound: Vec<u32> = Vec::new();
    let mut verts: Vec<u32> = Vec::new();
    let mut faces: Vec<u32> = Vec::new();
    for (idx, e) in feats.entries().iter().enumerate() {
        let r = radii[idx];
        let p = mesh.position(e.vertex).coords;
        grid.within(mesh, e.vertex, r + max_edge, &mut verts);
        faces.clear();
        for &v in &verts {
            faces.extend_from_slice(mesh.vertex_faces(v));
        }
        faces.sort_unstable();
        faces.dedup();

        let n = mesh.vertex_normal(e.vertex);
        let mut row = vec![0.0f64; cols];
        if n.norm_squared() > 0.0 {
            // Keep only faces in the support, with their tangent-projected
            // gradients; everything downstream reads from this list.
            let mut local: Vec<(f64, Vector3<f64>, f64)> = Vec::new(); // (dist, g_t, area)
            let mut resultant = Vector3::zeros();
            for &f in &faces {
                let [a, b, c] = mesh.faces()[f as usize];
                let centroid = (mesh.position(a).coords
                    + mesh.position(b).coords
                    + mesh.position(c).coords)
                    / 3.0;
                let dist = (centroid - p).norm();
                if dist >= r {
                    continue;
                }
                let g = gradients[f as usize];
                let g_t = g - n * g.dot(&n);
                let area = mesh.face_area(f);
                resultant += area * g_t;
                local.push((dist, g_t, area));
            }
            let total_mag: f64 = local.iter().map(|(_, g, a)| a * g.norm()).sum();
            if total_mag > 0.0 {
                let dominant = if resultant.norm() > 1e-12 * total_mag {
                    resultant.normalize()
                } else {
                    // Symmetric cancellation: fall back to the strongest
                    // single contribution (still rotates with the mesh).
                    let (_, g, _) = local
                        .iter()
                        .max_by(|x, y| (x.2 * x.1.norm()).total_cmp(&(y.2 * y.1.norm())))
                        .expect("total_mag > 0 implies a face");
                    g.normalize()
                };
                let yhat = n.normalize().cross(&dominant);
                let width = 2.0 * std::f64::consts::PI / cfg.orientation_bins as f64;
                for &(dist, g_t, area) in &local {
                    let mag = g_t.norm();
                    if mag == 0.0 {
                        continue;
                    }
                    let ring = ((dist / r * cfg.polar_bins as f64) as usize)
                        .min(cfg.polar_bins - 1);
                    // Circular bilinear split between the two nearest
                    // orientation bins; bin k is centred at angle k·width
                    // from the dominant direction.
                    let theta = g_t.dot(&yhat).atan2(g_t.dot(&dominant));
                    let c = theta / width;
                    let lo = c.floor();
                    let frac = c - lo;
                    let b0 = (lo as i64).rem_euclid(cfg.orientation_bins as i64) as usize;
                    let b1 = (b0 + 1) % cfg.orientation_bins;
                    let w = area * mag;
                    row[ring * cfg.orientation_bins + b0] += w * (1.0 - frac);
                    row[ring * cfg.orientation_bins + b1] += w * frac;
                }
            }
        } else {
            diag.warnings.push(format!("feature {}: degenerate normal", e.vertex));
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in row.iter_mut() {
                *x /= norm;
            }
        } else {
            diag.zero_rows += 1;
            diag.warnings.push(format!(
                "feature {}: no field gradient in support, zero row",
                e.vertex
            ));
        }
        data.extend_from_slice(&row);
        bound.push(e.vertex);
    }
    let set = DescriptorSet::new(
        DescriptorKind::MeshHog,
        DescriptorBinding::Features(bound),
        cols,
        data,
    )?;
    Ok((set, diag))
}

/// Gradient of the piecewise-linear interpolant of `field`, one constant
/// vector per face (zero for degenerate faces).
pub fn face_gradients(mesh: &TriMesh, field: &[f64]) -> Vec<Vector3<f64>> {
    let mut out = Vec::with_capacity(mesh.nf());
    for (f, &[a, b, c]) in mesh.faces().iter().enumerate() {
        let area = mesh.face_area(f as u32);
        if area <= 0.0 {
            out.push(Vector3::zeros());
            continue;
        }
        let n = mesh.face_normal(f as u32);
        let (pa, pb, pc) = (
            mesh.position(a).coords,
            mesh.position(b).coords,
            mesh.position(c).coords,
        );
        // ∇f = Σ_i f_i · (n × e_i) / 2A with e_i the edge opposite vertex i,
        // written in difference form so a constant field gives exactly zero.
        let g = ((field[b as usize] - field[a as usize]) * n.cross(&(pa - pc))
            + (field[c as usize] - field[a as usize]) * n.cross(&(pb - pa)))
            / (2.0 * area);
        out.push(g);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::FeatureEntry;
    use crate::mesh::synth;

    fn feats(mesh: &TriMesh, specs: &[(u32, Option<f64>)]) -> FeaturePoints {
        FeaturePoints::new(
            specs
                .iter()
                .map(|&(v, s)| FeatureEntry { vertex: v, response: 1.0, scale: s })
                .collect(),
            mesh.nv(),
        )
        .unwrap()
    }

    #[test]
    fn face_gradient_reproduces_a_linear_field_exactly() {
        let m = synth::plane_grid(8, 8, 1.0);
        let field: Vec<f64> = m.positions().iter().map(|p| 3.0 * p.x - 2.0 * p.y + 7.0).collect();
        for g in face_gradients(&m, &field) {
            assert!((g - Vector3::new(3.0, -2.0, 0.0)).norm() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn linear_field_lands_in_one_orientation_bin() {
        let m = synth::plane_grid(21, 21, 1.0);
        let dir = 0.3f64;
        let field: Vec<f64> =
            m.positions().iter().map(|p| p.x * dir.cos() + p.y * dir.sin()).collect();
        let center = (10 * 21 + 10) as u32;
        let cfg = MeshHogConfig::default();
        let (set, diag) = mesh_hog(&m, &feats(&m, &[(center, Some(1.0))]), &field, &cfg).unwrap();
        assert_eq!(set.cols(), 32);
        assert_eq!(diag.zero_rows, 0);
        let row = set.row(0);
        let mut marginal = [0.0f64; 8];
        for ring in 0..4 {
            for o in 0..8 {
                marginal[o] += row[ring * 8 + o];
            }
        }
        let total: f64 = marginal.iter().sum();
        assert!(
            marginal[0] >= 0.9 * total,
            "orientation marginal {marginal:?} not concentrated"
        );
    }

    #[test]
    fn rigid_motion_is_invisible() {
        let m = synth::bumpy_sphere(1.0, 3, 0.3);
        let field: Vec<f64> = m.positions().iter().map(|p| (2.0 * p.x).sin() + p.z).collect();
        let moved = m
            .with_positions(
                m.positions()
                    .iter()
                    .map(|p| nalgebra::Point3::new(-p.y + 1.0, p.x, p.z - 2.0))
                    .collect(),
            )
            .unwrap();
        let f = feats(&m, &[(50, Some(0.15)), (300, None)]);
        let cfg = MeshHogConfig::default();
        let (a, _) = mesh_hog(&m, &f, &field, &cfg).unwrap();
        let (b, _) = mesh_hog(&moved, &f, &field, &cfg).unwrap();
        for i in 0..a.rows() {
            assert!(a.row_distance(i, &b, i) <= 1e-6, "row {i} moved under rigid motion");
        }
    }

    #[test]
    fn field_scaling_changes_nothing() {
        let m = synth::bumpy_sphere(1.0, 2, 0.3);
        let field: Vec<f64> = m.positions().iter().map(|p| p.x * p.y + 0.5 * p.z).collect();
        let scaled: Vec<f64> = field.iter().map(|x| 37.0 * x).collect();
        let f = feats(&m, &[(10, Some(0.2))]);
        let cfg = MeshHogConfig::default();
        let (a, _) = mesh_hog(&m, &f, &field, &cfg).unwrap();
        let (b, _) = mesh_hog(&m, &f, &scaled, &cfg).unwrap();
        assert!(a.row_distance(0, &b, 0) <= 1e-9);
    }

    #[test]
    fn constant_field_yields_a_zero_row_with_diagnostic() {
        let m = synth::icosphere(1.0, 2);
        let field = vec![4.2; m.nv()];
        let (set, diag) =
            mesh_hog(&m, &feats(&m, &[(0, Some(0.2))]), &field, &MeshHogConfig::default())
                .unwrap();
        assert_eq!(set.rows(), 1);
        assert_eq!(diag.zero_rows, 1);
        assert!(set.row(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_mismatched_or_bad_field() {
        let m = synth::icosphere(1.0, 1);
        let f = feats(&m, &[(0, Some(0.1))]);
        let cfg = MeshHogConfig::default();
        assert!(mesh_hog(&m, &f, &vec![0.0; m.nv() - 1], &cfg).is_err());
        let mut bad = vec![0.0; m.nv()];
        bad[3] = f64::NAN;
        assert!(mesh_hog(&m, &f, &bad, &cfg).is_err());
    }
}
