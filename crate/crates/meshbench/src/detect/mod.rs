//! Feature detectors.
//!
//! Three point detectors and one region detector, all deterministic:
//!
//! - [`harris3d`] — corner response of a local quadric fit, per vertex.
//! - [`mesh_dog`] — difference-of-Gaussians of a curvature field across a
//!   smoothing scale space.
//! - [`mesh_scale_dog`] — difference-of-Gaussians of the geometry itself
//!   (per-vertex displacement between consecutive smoothed meshes), which
//!   attaches an intrinsic scale to every feature.
//! - [`shape_mser`] — maximally stable components of a diffusion-derived
//!   vertex or edge weighting, swept with a union-find component tree.
//!
//! Detected points carry a response and an optional scale and are returned
//! ranked; regions carry a stability score and may overlap. Both have a
//! plain text file format ([`files`]).
//!
//! Determinism contract: reductions iterate neighborhoods in canonical
//! (position-rank) order and all tie-breaks use canonical rank first, so
//! detector output is invariant to vertex relabeling — not just as a set,
//! but bit for bit on responses.

pub mod dog;
pub mod files;
pub mod harris;
pub mod mser;

pub use dog::{mesh_dog, mesh_dog_on_field, mesh_scale_dog, CurvatureField, MeshDogConfig, RingKernel, ScaleDogConfig};
pub use files::{
    feature_points_to_bytes, feature_regions_to_bytes, load_feature_points, load_feature_regions,
    parse_feature_points_bytes, parse_feature_regions_bytes, save_feature_points,
    save_feature_regions,
};
pub use harris::{harris3d, HarrisConfig, Neighborhood};
pub use mser::{mser_weights, shape_mser, shape_mser_from_weights, MserConfig, MserWeighting, MserWeights};

use crate::{Error, Result};

/// One detected feature point.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEntry {
    pub vertex: u32,
    pub response: f64,
    /// Support radius in shape units, when the detector defines one.
    pub scale: Option<f64>,
}

/// Ranked feature points: distinct valid vertices, finite responses,
/// sorted by descending response (ties by ascending vertex index).
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePoints {
    entries: Vec<FeatureEntry>,
}

impl FeaturePoints {
    pub fn new(mut entries: Vec<FeatureEntry>, nv: usize) -> Result<Self> {
        let mut seen = vec![false; nv];
        for e in &entries {
            if e.vertex as usize >= nv {
                return Err(Error::InvalidInput(format!(
                    "feature vertex {} out of range (mesh has {nv} vertices)",
                    e.vertex
                )));
            }
            if !e.response.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "feature at vertex {} has non-finite response",
                    e.vertex
                )));
            }
            if let Some(s) = e.scale {
                if !s.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "feature at vertex {} has non-finite scale",
                        e.vertex
                    )));
                }
            }
            if seen[e.vertex as usize] {
                return Err(Error::InvalidInput(format!(
                    "duplicate feature vertex {}",
                    e.vertex
                )));
            }
            seen[e.vertex as usize] = true;
        }
        entries.sort_by(|a, b| {
            b.response
                .total_cmp(&a.response)
                .then(a.vertex.cmp(&b.vertex))
        });
        Ok(FeaturePoints { entries })
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Feature vertices in ascending index order.
    pub fn vertex_set(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.entries.iter().map(|e| e.vertex).collect();
        v.sort_unstable();
        v
    }
}

/// One detected region: a non-empty vertex set (stored ascending) with its
/// stability score. Stability may be infinite (a perfectly stable plateau)
/// but never NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRegion {
    pub stability: f64,
    pub vertices: Vec<u32>,
}

/// Detected regions, most stable first. Regions may overlap but no two are
/// exactly the same vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRegions {
    regions: Vec<FeatureRegion>,
}

impl FeatureRegions {
    pub fn new(raw: Vec<(f64, Vec<u32>)>, nv: usize) -> Result<Self> {
        let mut regions = Vec::with_capacity(raw.len());
        for (stability, mut vertices) in raw {
            if stability.is_nan() {
                return Err(Error::InvalidInput("region stability is NaN".into()));
            }
            vertices.sort_unstable();
            vertices.dedup();
            if vertices.is_empty() {
                return Err(Error::InvalidInput("empty region".into()));
            }
            if let Some(&v) = vertices.last() {
                if v as usize >= nv {
                    return Err(Error::InvalidInput(format!(
                        "region vertex {v} out of range (mesh has {nv} vertices)"
                    )));
                }
            }
            regions.push(FeatureRegion { stability, vertices });
        }
        regions.sort_by(|a, b| {
            b.stability
                .total_cmp(&a.stability)
                .then_with(|| a.vertices.cmp(&b.vertices))
        });
        for w in regions.windows(2) {
            if w[0].vertices == w[1].vertices {
                return Err(Error::InvalidInput(
                    "two regions have the exact same vertex set".into(),
                ));
            }
        }
        Ok(FeatureRegions { regions })
    }

    pub fn regions(&self) -> &[FeatureRegion] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// Side information a detector run collects: how many vertices could not be
/// processed, and human-readable warnings (for the CLI log).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectorDiagnostics {
    pub skipped_vertices: usize,
    pub warnings: Vec<String>,
}
