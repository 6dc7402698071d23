//! Region repeatability: area-overlap matching of detected regions.
//!
//! Each transformed-shape region is pulled back to the null shape through
//! the correspondence (vertex references map directly, barycentric ones to
//! their heaviest corner). Overlap between vertex sets is the Jaccard
//! ratio of their barycentric vertex areas. Pairs are then assigned
//! greedily, best overlap first, each region used at most once; a
//! transformed region counts as repeatable when its assigned overlap
//! reaches the threshold.

use crate::detect::FeatureRegions;
use crate::transform::corr::CorrespondenceMap;
use crate::{Error, Result, TriMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRepeatability {
    /// 100 · repeatable / evaluated.
    pub percent: f64,
    pub repeatable: usize,
    /// Mapped transformed regions (the denominator).
    pub evaluated: usize,
    /// Transformed regions whose every vertex lost its groundtruth; they
    /// are in neither the numerator nor the denominator.
    pub ignored_empty: usize,
    /// Greedy assignment, best overlap first: (transformed region index,
    /// null region index, overlap).
    pub assignments: Vec<(usize, usize, f64)>,
}

/// Jaccard area overlap of two ascending vertex sets.
fn area_overlap(null: &TriMesh, a: &[u32], b: &[u32]) -> f64 {
    let area_of = |set: &[u32]| set.iter().map(|&v| null.vertex_area(v)).sum::<f64>();
    let (mut i, mut j, mut inter) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += null.vertex_area(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    let union = area_of(a) + area_of(b) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

pub fn region_repeatability(
    null: &TriMesh,
    rx: &FeatureRegions,
    ry: &FeatureRegions,
    corr: &CorrespondenceMap,
    threshold: f64,
) -> Result<RegionRepeatability> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "overlap threshold {threshold} outside (0, 1]"
        )));
    }
    if rx.is_empty() || ry.is_empty() {
        return Err(Error::EmptyEvaluableSet("a region set is empty".into()));
    }

    // Pull every transformed region back to the null shape.
    let mut mapped: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut ignored_empty = 0usize;
    for (l, region) in ry.regions().iter().enumerate() {
        let mut verts: Vec<u32> = Vec::with_capacity(region.vertices.len());
        for &v in &region.vertices {
            if v as usize >= corr.len() {
                return Err(Error::Correspondence(format!(
                    "region vertex {v} beyond the {}-entry correspondence",
                    corr.len()
                )));
            }
            if let Some(x) = corr.resolve_vertex(null, v) {
                verts.push(x);
            }
        }
        verts.sort_unstable();
        verts.dedup();
        if verts.is_empty() {
            ignored_empty += 1;
        } else {
            mapped.push((l, verts));
        }
    }
    if mapped.is_empty() {
        return Err(Error::EmptyEvaluableSet(
            "every transformed region lost its groundtruth".into(),
        ));
    }

    // All positive-overlap candidates, then greedy one-to-one assignment.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (slot, (_, verts)) in mapped.iter().enumerate() {
        for (m, xr) in rx.regions().iter().enumerate() {
            let ov = area_overlap(null, verts, &xr.vertices);
            if ov > 0.0 {
                candidates.push((ov, slot, m));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    let mut used_y = vec![false; mapped.len()];
    let mut used_x = vec![false; rx.len()];
    let mut assignments: Vec<(usize, usize, f64)> = Vec::new();
    let mut repeatable = 0usize;
    for (ov, slot, m) in candidates {
        if used_y[slot] || used_x[m] {
            continue;
        }
        used_y[slot] = true;
        used_x[m] = true;
        assignments.push((mapped[slot].0, m, ov));
        if ov >= threshold {
            repeatable += 1;
        }
    }

    let evaluated = mapped.len();
    Ok(RegionRepeatability {
        percent: 100.0 * repeatable as f64 / evaluated as f64,
        repeatable,
        evaluated,
        ignored_empty,
        assignments,
    })
}
