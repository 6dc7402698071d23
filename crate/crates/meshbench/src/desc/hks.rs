//! Dense heat-kernel signatures.
//!
//! For every vertex x the row holds k_t(x,x) = Σ_i e^{−λ_i t} φ_i(x)² at a
//! fixed set of diffusion times. Times default to a log-spaced sweep of
//! [4·ln10/λ_max, 4·ln10/λ_min⁺] (λ_min⁺ = smallest strictly positive
//! eigenvalue, so extra zero modes of disconnected meshes are skipped);
//! bases truncated so hard that no positive eigenvalue remains have no
//! usable sweep and require explicit times. Optional per-time global
//! normalization divides by the area-weighted surface integral of k_t,
//! making the signature robust to uniform scaling.

use crate::desc::{DescriptorBinding, DescriptorDiagnostics, DescriptorKind, DescriptorSet};
use crate::mesh::spectral::SpectralBasis;
use crate::{Error, Result, TriMesh};

#[derive(Debug, Clone)]
pub struct HksConfig {
    /// Number of log-spaced times when `times` is not given.
    pub n_times: usize,
    /// Explicit diffusion times (ascending not required, all > 0).
    pub times: Option<Vec<f64>>,
    /// Divide each time slice by ∫ k_t dA.
    pub normalize: bool,
}

impl Default for HksConfig {
    fn default() -> Self {
        HksConfig { n_times: 16, times: None, normalize: false }
    }
}

/// The default log-spaced time sweep for a basis; needs `n >= 2` and at
/// least one strictly positive eigenvalue.
pub fn hks_times(basis: &SpectralBasis, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput("time sweep needs n >= 2".into()));
    }
    let lambda_pos = basis.lambda1().ok_or_else(|| {
        Error::InvalidInput(
            "basis has no positive eigenvalue; supply explicit diffusion times".into(),
        )
    })?;
    let lambda_max = *basis.eigenvalues.last().expect("lambda1 implies nonempty");
    let four_ln10 = 4.0 * std::f64::consts::LN_10;
    let (a, b) = ((four_ln10 / lambda_max).ln(), (four_ln10 / lambda_pos).ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

pub fn hks_dense(
    mesh: &TriMesh,
    basis: &SpectralBasis,
    cfg: &HksConfig,
) -> Result<(DescriptorSet, DescriptorDiagnostics)> {
    let n = mesh.nv();
    if basis.k() == 0 || basis.eigenfunctions.iter().any(|phi| phi.len() != n) {
        return Err(Error::InvalidInput("basis does not match the mesh".into()));
    }
    let times = match &cfg.times {
        Some(t) => {
            if t.is_empty() || t.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::InvalidInput("diffusion times must be positive and finite".into()));
            }
            t.clone()
        }
        None => hks_times(basis, cfg.n_times)?,
    };

    let nt = times.len();
    let mut data = vec![0.0f64; n * nt];
    for (i, phi) in basis.eigenfunctions.iter().enumerate() {
        let lambda = basis.eigenvalues[i];
        for (j, &t) in times.iter().enumerate() {
            let decay = (-lambda * t).exp();
            if decay == 0.0 {
                continue;
            }
            for (v, &p) in phi.iter().enumerate() {
                data[v * nt + j] += decay * p * p;
            }
        }
    }
    if cfg.normalize {
        // Surface integral in canonical vertex order, so the result is
        // independent of vertex labeling.
        for j in 0..nt {
            let mut integral = 0.0f64;
            for &v in mesh.by_rank() {
                integral += mesh.vertex_area(v) * data[v as usize * nt + j];
            }
            if !(integral > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "heat kernel integrates to {integral} at t = {}",
                    times[j]
                )));
            }
            for v in 0..n {
                data[v * nt + j] /= integral;
            }
        }
    }
    let set = DescriptorSet::new(DescriptorKind::HksDense, DescriptorBinding::Dense, nt, data)?;
    Ok((set, DescriptorDiagnostics::default()))
}
