//! Corner-response point detector on local quadric fits.
//!
//! Per vertex: gather a neighborhood, build a tangent frame from PCA of the
//! centered neighborhood (normal = least-variance axis), least-squares fit
//! the height field `z = ax² + bxy + cy² + dx + ey + f` over the tangent
//! coordinates (origin at the vertex), and score the patch with the corner
//! response `det(E) − 0.04·tr(E)²` of the Gaussian-weighted first-derivative
//! structure matrix
//!
//! ```text
//! E = ∫ g_σ(x,y) · [fx² fx·fy; fx·fy fy²] dx dy,   σ = radius/3,
//! ```
//!
//! evaluated in closed form from the fitted coefficients (the integrals of
//! a quadratic's derivatives against a Gaussian are polynomial in σ²):
//! `E₁₁ = d² + σ²(4a²+b²)`, `E₂₂ = e² + σ²(b²+4c²)`,
//! `E₁₂ = de + 2σ²b(a+c)`. Features are the highest-response vertices that
//! are one-ring local maxima.

use nalgebra::{Matrix3, SMatrix, SVector, SymmetricEigen, Vector3};

use crate::detect::{DetectorDiagnostics, FeatureEntry, FeaturePoints};
use crate::mesh::grid::SpatialGrid;
use crate::{Error, Result, TriMesh};

/// Neighborhood rule for the quadric fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighborhood {
    /// Direct one-ring neighbors (plus the vertex).
    Ring1,
    /// Neighbors up to two edges away.
    Ring2,
    /// Every vertex within `delta · diam` Euclidean distance.
    Adaptive { delta: f64 },
}

#[derive(Debug, Clone)]
pub struct HarrisConfig {
    pub neighborhood: Neighborhood,
    /// How many features to keep (highest responses first).
    pub target: usize,
}

impl Default for HarrisConfig {
    fn default() -> Self {
        HarrisConfig {
            neighborhood: Neighborhood::Adaptive { delta: 0.01 },
            target: 450,
        }
    }
}

/// Runs the detector. Besides the ranked points it reports how many
/// vertices were skipped (neighborhood under six points, or a degenerate
/// fit).
pub fn harris3d(mesh: &TriMesh, cfg: &HarrisConfig) -> Result<(FeaturePoints, DetectorDiagnostics)> {
    let nv = mesh.nv();
    if cfg.target == 0 {
        return Err(Error::InvalidInput("harris3d target must be >= 1".into()));
    }
    if cfg.target > nv {
        return Err(Error::InvalidInput(format!(
            "harris3d target {} exceeds vertex count {nv}",
            cfg.target
        )));
    }
    let ball = match cfg.neighborhood {
        Neighborhood::Adaptive { delta } => {
            if !(delta > 0.0 && delta <= 0.2) {
                return Err(Error::InvalidInput(format!(
                    "adaptive neighborhood fraction must be in (0, 0.2], got {delta}"
                )));
            }
            let radius = delta * mesh.diam();
            if !(radius > 0.0) {
                return Err(Error::InvalidInput(
                    "degenerate mesh: zero diameter".into(),
                ));
            }
            Some((SpatialGrid::new(mesh, radius), radius))
        }
        _ => None,
    };

    let mut response = vec![f64::NAN; nv];
    let mut skipped = 0usize;
    let mut nbrs: Vec<u32> = Vec::new();
    let mut stamp = vec![0u32; nv];
    for v in 0..nv as u32 {
        match cfg.neighborhood {
            Neighborhood::Ring1 => {
                nbrs.clear();
                nbrs.push(v);
                nbrs.extend_from_slice(mesh.ring(v));
            }
            Neighborhood::Ring2 => {
                nbrs.clear();
                nbrs.push(v);
                stamp[v as usize] = v + 1;
                for &u in mesh.ring(v) {
                    if stamp[u as usize] != v + 1 {
                        stamp[u as usize] = v + 1;
                        nbrs.push(u);
                    }
                }
                for i in 1..=mesh.ring(v).len() {
                    let u = nbrs[i];
                    for &w in mesh.ring(u) {
                        if stamp[w as usize] != v + 1 {
                            stamp[w as usize] = v + 1;
                            nbrs.push(w);
                        }
                    }
                }
            }
            Neighborhood::Adaptive { .. } => {
                let (grid, radius) = ball.as_ref().expect("grid built above");
                grid.within(mesh, v, *radius, &mut nbrs);
            }
        }
        // Canonical accumulation order, independent of gather order.
        nbrs.sort_unstable_by_key(|&u| mesh.rank(u));
        let radius = match &ball {
            Some((_, r)) => *r,
            None => nbrs
                .iter()
                .map(|&u| (mesh.position(u) - mesh.position(v)).norm())
                .fold(0.0f64, f64::max),
        };
        match vertex_response(mesh, v, &nbrs, radius) {
            Some(r) => response[v as usize] = r,
            None => skipped += 1,
        }
    }

    // One-ring local maxima among scored vertices. Non-strict, so an exact
    // response plateau (e.g. a perfect plane, where every response is 0)
    // keeps all its members and the target cut below picks among the ties
    // deterministically by canonical rank.
    let mut candidates: Vec<u32> = Vec::new();
    for v in 0..nv as u32 {
        let rv = response[v as usize];
        if rv.is_nan() {
            continue;
        }
        if mesh.ring(v).iter().all(|&u| !(response[u as usize] > rv)) {
            candidates.push(v);
        }
    }
    candidates.sort_unstable_by(|&a, &b| {
        response[b as usize]
            .total_cmp(&response[a as usize])
            .then_with(|| mesh.rank(a).cmp(&mesh.rank(b)))
    });
    candidates.truncate(cfg.target);

    let entries = candidates
        .into_iter()
        .map(|v| FeatureEntry { vertex: v, response: response[v as usize], scale: None })
        .collect();
    let points = FeaturePoints::new(entries, nv)?;
    let diagnostics = DetectorDiagnostics { skipped_vertices: skipped, warnings: Vec::new() };
    Ok((points, diagnostics))
}

/// Corner response at `v` from its gathered neighborhood (`nbrs` includes
/// `v`, rank-sorted). `None` = skipped (too few points or degenerate fit).
fn vertex_response(mesh: &TriMesh, v: u32, nbrs: &[u32], radius: f64) -> Option<f64> {
    if nbrs.len() < 6 || !(radius > 0.0) {
        return None;
    }
    let pv = mesh.position(v);
    let mut centroid = Vector3::zeros();
    for &u in nbrs {
        centroid += mesh.position(u).coords;
    }
    centroid /= nbrs.len() as f64;
    let mut cov = Matrix3::zeros();
    for &u in nbrs {
        let q = mesh.position(u).coords - centroid;
        cov += q * q.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    // Axes by descending variance: tangent x, tangent y, normal.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let ax = eig.eigenvectors.column(order[0]).into_owned();
    let ay = eig.eigenvectors.column(order[1]).into_owned();
    let an = eig.eigenvectors.column(order[2]).into_owned();

    let mut ata = SMatrix::<f64, 6, 6>::zeros();
    let mut atz = SVector::<f64, 6>::zeros();
    for &u in nbrs {
        let d = mesh.position(u) - pv;
        let (x, y, z) = (d.dot(&ax), d.dot(&ay), d.dot(&an));
        let row = SVector::<f64, 6>::from([x * x, x * y, y * y, x, y, 1.0]);
        ata += row * row.transpose();
        atz += row * z;
    }
    let coeffs = ata.cholesky()?.solve(&atz);
    let (a, b, c, d, e) = (coeffs[0], coeffs[1], coeffs[2], coeffs[3], coeffs[4]);
    let s2 = (radius / 3.0) * (radius / 3.0);
    let e11 = d * d + s2 * (4.0 * a * a + b * b);
    let e22 = e * e + s2 * (b * b + 4.0 * c * c);
    let e12 = d * e + 2.0 * s2 * b * (a + c);
    let r = e11 * e22 - e12 * e12 - 0.04 * (e11 + e22) * (e11 + e22);
    r.is_finite().then_some(r)
}
