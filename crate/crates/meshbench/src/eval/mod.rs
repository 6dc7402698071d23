//! Scoring: repeatability of points and regions, descriptor distance
//! statistics, ROC curves, dense-field quality, and table aggregation.
//!
//! Everything here evaluates a *transformed* shape Y against its *null*
//! shape X through a per-vertex correspondence. Feature points are
//! repeatable when a geodesic ball around their corresponding null-shape
//! point contains a detected null-shape feature; regions are repeatable
//! when their mapped vertex set overlaps a detected null-shape region by
//! area Jaccard above a threshold; descriptors are scored by L2 distance
//! normalized by the mean distance over non-corresponding pairs.
//!
//! All operations are deterministic: reductions iterate in canonical
//! order, greedy choices carry explicit total tie-breaks, and the one
//! sampling estimator (the dense denominator) is driven by an explicit
//! seed.

use crate::{Error, Result, TriMesh};

pub mod points;
pub mod quality;
pub mod regions;
pub mod table;

pub use points::{point_repeatability, PointRepeatability};
pub use quality::{
    dense_quality, descriptor_quality, roc, DenseQuality, DescriptorQuality, MatchedPair,
    RocCurve, RocPoint,
};
pub use regions::{region_repeatability, RegionRepeatability};
pub use table::{
    aggregate, aggregate_percent, report_to_csv, roc_to_csv, ClassStrengthValue,
    RepeatabilityReport,
};

/// Geodesic acceptance radius, either in shape units or relative to the
/// shape's bounding-box diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rho {
    Absolute(f64),
    PercentDiam(f64),
}

impl Rho {
    /// The radius in shape units for a given null shape.
    pub fn resolve(&self, null: &TriMesh) -> Result<f64> {
        let r = match *self {
            Rho::Absolute(r) => r,
            Rho::PercentDiam(p) => p / 100.0 * null.diam(),
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("acceptance radius {r} must be positive")));
        }
        Ok(r)
    }
}

/// The evaluation knobs a whole benchmark run shares.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub rho: Rho,
    /// Region overlap threshold in (0, 1].
    pub overlap: f64,
    /// Strictly ascending thresholds for ROC curves (normalized distance).
    pub taus: Vec<f64>,
    /// Normalize descriptor distances by the non-corresponding mean; when
    /// off, raw L2 distances are reported.
    pub normalize: bool,
    /// Pair budget for the sampled dense denominator estimator.
    pub dense_sample: usize,
    /// Seed for that estimator.
    pub sample_seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            rho: Rho::PercentDiam(1.0),
            overlap: 0.7,
            taus: (0..=100).map(|i| i as f64 * 0.02).collect(),
            normalize: true,
            dense_sample: 2000,
            sample_seed: 0x7265_7065_6174,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.overlap > 0.0 && self.overlap <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "overlap threshold {} outside (0, 1]",
                self.overlap
            )));
        }
        validate_taus(&self.taus)?;
        if self.dense_sample == 0 {
            return Err(Error::InvalidInput("dense sample budget must be >= 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn validate_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::InvalidInput("tau grid is empty".into()));
    }
    if taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("tau grid has a non-finite entry".into()));
    }
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("tau grid must be strictly ascending".into()));
    }
    Ok(())
}
