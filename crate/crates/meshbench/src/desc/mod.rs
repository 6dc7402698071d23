//! Feature and dense descriptors.
//!
//! Three local descriptors computed at detected feature points — spin
//! images ([`spin_image`]), a depth-map SIFT ([`local_depth_sift`]) and a
//! gradient-orientation histogram ([`mesh_hog`]) — plus the dense
//! per-vertex heat-kernel signature ([`hks_dense`]). All of them produce a
//! [`DescriptorSet`]: a row-major matrix whose rows are bound either to a
//! list of feature vertices or to every vertex of the mesh.
//!
//! Scale-aware descriptors size their support as a multiple (default 6×)
//! of the feature's detected scale, so features from a scale-equivariant
//! detector keep their descriptors stable under uniform mesh scaling.
//! Every cross-vertex reduction iterates support sets in canonical
//! (position-rank) order, making rows exactly equivariant under vertex
//! relabeling.

use crate::{Error, Result};

pub mod files;
pub mod hks;
pub mod hog;
pub mod sift;
pub mod spin;

pub use files::{
    descriptors_to_bytes, descriptors_to_csv, load_descriptors, parse_descriptors_bytes,
    save_descriptors,
};
pub use hks::{hks_dense, hks_times, HksConfig};
pub use hog::{mesh_hog, MeshHogConfig};
pub use sift::{local_depth_sift, SiftConfig};
pub use spin::{spin_image, SpinConfig};

/// What kind of descriptor a set holds (serialized in the file header).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorKind {
    SpinImage,
    LocalDepthSift,
    MeshHog,
    HksDense,
}

impl DescriptorKind {
    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::SpinImage => "spin-image",
            DescriptorKind::LocalDepthSift => "ld-sift",
            DescriptorKind::MeshHog => "mesh-hog",
            DescriptorKind::HksDense => "hks-dense",
        }
    }

    pub fn from_name(name: &str) -> Option<DescriptorKind> {
        Some(match name {
            "spin-image" => DescriptorKind::SpinImage,
            "ld-sift" => DescriptorKind::LocalDepthSift,
            "mesh-hog" => DescriptorKind::MeshHog,
            "hks-dense" => DescriptorKind::HksDense,
            _ => return None,
        })
    }
}

/// What the rows of a [`DescriptorSet`] refer to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescriptorBinding {
    /// Row `i` describes feature vertex `vertices[i]`.
    Features(Vec<u32>),
    /// Row `v` describes mesh vertex `v`; rows = vertex count.
    Dense,
}

/// Row-major matrix of descriptors plus what each row is bound to.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    pub kind: DescriptorKind,
    pub binding: DescriptorBinding,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DescriptorSet {
    /// Validates shape, binding arity, and entry finiteness.
    pub fn new(
        kind: DescriptorKind,
        binding: DescriptorBinding,
        cols: usize,
        data: Vec<f64>,
    ) -> Result<DescriptorSet> {
        if cols == 0 {
            return Err(Error::InvalidInput("descriptor dimension must be >= 1".into()));
        }
        if data.len() % cols != 0 {
            return Err(Error::InvalidInput(format!(
                "{} values do not tile into rows of {cols}",
                data.len()
            )));
        }
        let rows = data.len() / cols;
        if let DescriptorBinding::Features(v) = &binding {
            if v.len() != rows {
                return Err(Error::InvalidInput(format!(
                    "{} bound vertices for {rows} descriptor rows",
                    v.len()
                )));
            }
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite descriptor entry {bad}"
            )));
        }
        Ok(DescriptorSet { kind, binding, rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Euclidean distance between row `i` here and row `j` of `other`.
    pub fn row_distance(&self, i: usize, other: &DescriptorSet, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(other.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Per-run notes from a descriptor builder.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DescriptorDiagnostics {
    /// Features whose descriptor came out identically zero (degenerate
    /// support); the rows are kept.
    pub zero_rows: usize,
    /// Features dropped entirely (no usable local frame); these have no
    /// row in the output.
    pub dropped_features: usize,
    pub warnings: Vec<String>,
}

/// Support radius for a feature: `support_scales`× its detected scale, or
/// the configured fallback for scale-less features.
fn feature_radius(scale: Option<f64>, support_scales: f64, fallback: Option<f64>) -> Result<f64> {
    let base = match scale {
        Some(s) => s,
        None => fallback.ok_or_else(|| {
            Error::InvalidInput(
                "feature has no scale and no default scale is configured".into(),
            )
        })?,
    };
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::InvalidInput(format!("bad feature scale {base}")));
    }
    Ok(support_scales * base)
}
