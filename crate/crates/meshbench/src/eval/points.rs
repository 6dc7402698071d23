//! Feature-point repeatability.
//!
//! A transformed-shape feature y is repeatable when the geodesic ball of
//! radius ρ around its corresponding null-shape point contains some
//! detected null-shape feature. One capped multi-source sweep from all
//! null features answers that for every y at once. Features whose vertex
//! carries no groundtruth are ignored — they are in neither the numerator
//! nor the denominator.

use crate::detect::FeaturePoints;
use crate::mesh::geodesic::geodesic_distances;
use crate::transform::corr::CorrespondenceMap;
use crate::{Error, Result, TriMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct PointRepeatability {
    /// 100 · repeatable / evaluated.
    pub percent: f64,
    pub repeatable: usize,
    /// Transformed features with groundtruth (the denominator).
    pub evaluated: usize,
    /// Transformed features without groundtruth, left out entirely.
    pub ignored: usize,
}

pub fn point_repeatability(
    null: &TriMesh,
    fx: &FeaturePoints,
    fy: &FeaturePoints,
    corr: &CorrespondenceMap,
    rho: f64,
) -> Result<PointRepeatability> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("radius {rho} must be positive")));
    }
    let mut targets: Vec<u32> = Vec::with_capacity(fy.len());
    let mut ignored = 0usize;
    for e in fy.entries() {
        if e.vertex as usize >= corr.len() {
            return Err(Error::Correspondence(format!(
                "feature vertex {} beyond the {}-entry correspondence",
                e.vertex,
                corr.len()
            )));
        }
        match corr.resolve_vertex(null, e.vertex) {
            Some(x) => targets.push(x),
            None => ignored += 1,
        }
    }
    if targets.is_empty() {
        return Err(Error::EmptyEvaluableSet(
            "every transformed feature lacks groundtruth".into(),
        ));
    }
    let field = geodesic_distances(null, &fx.vertex_set(), Some(rho));
    let repeatable = targets.iter().filter(|&&x| field.distance(x) <= rho).count();
    let evaluated = targets.len();
    Ok(PointRepeatability {
        percent: 100.0 * repeatable as f64 / evaluated as f64,
        repeatable,
        evaluated,
        ignored,
    })
}
