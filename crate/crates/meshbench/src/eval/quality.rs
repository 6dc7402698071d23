//! Descriptor distance statistics: matched-pair quality, ROC curves, and
//! dense per-vertex quality.
//!
//! All three share one normalization: distances are divided by D, the mean
//! L2 distance over non-corresponding cross pairs (transformed row ×
//! null row), excluding the accepted correspondences themselves. The
//! matched-pair score accepts, for each transformed feature, the
//! geodesically nearest null feature within radius ρ of its groundtruth
//! point; the ROC classifies every cross pair as positive (within ρ) or
//! negative and sweeps a distance threshold τ.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::desc::{DescriptorBinding, DescriptorSet};
use crate::eval::validate_taus;
use crate::mesh::geodesic::ShortcutGraph;
use crate::transform::corr::CorrespondenceMap;
use crate::{Error, Result, TriMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    /// Row in the transformed-shape set.
    pub y_row: usize,
    /// Accepted row in the null-shape set.
    pub x_row: usize,
    /// Geodesic distance from the groundtruth point to that feature.
    pub geodesic: f64,
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorQuality {
    pub pairs: Vec<MatchedPair>,
    /// Mean of the normalized distances over accepted pairs.
    pub mean: f64,
    /// The normalization denominator D actually used.
    pub denominator: f64,
    /// True when no non-corresponding pairs existed (or they were all
    /// zero), in which case D falls back to 1 and distances stay raw.
    pub degenerate_denominator: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub tau: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// (FPR, TPR) per threshold; both coordinates are non-decreasing in τ.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub positives: usize,
    pub negatives: usize,
    pub denominator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseQuality {
    /// Mean normalized distance over corresponding vertex pairs.
    pub mean: f64,
    pub denominator: f64,
    /// Corresponding pairs evaluated.
    pub evaluated: usize,
    /// Whether the denominator came from the sampled estimator.
    pub sampled: bool,
    pub degenerate_denominator: bool,
}

fn feature_vertices<'a>(set: &'a DescriptorSet, which: &str) -> Result<&'a [u32]> {
    match &set.binding {
        DescriptorBinding::Features(v) => Ok(v),
        DescriptorBinding::Dense => Err(Error::InvalidInput(format!(
            "{which} descriptor set is dense; this score needs feature-bound sets"
        ))),
    }
}

/// Shared setup: groundtruth targets for every transformed row, the
/// capped geodesic matrix r[k][j], and the accepted match per row
/// (geodesically nearest null feature, ties to the lower row, accepted
/// strictly inside ρ).
struct MatchSetup {
    targets: Vec<Option<u32>>,
    geodesics: Vec<Vec<f64>>,
    accepted: Vec<Option<usize>>,
    n_accepted: usize,
}

fn match_setup(
    null: &TriMesh,
    dx: &DescriptorSet,
    dy: &DescriptorSet,
    corr: &CorrespondenceMap,
    rho: f64,
) -> Result<MatchSetup> {
    let xverts = feature_vertices(dx, "null")?;
    let yverts = feature_vertices(dy, "transformed")?;
    if dx.cols() != dy.cols() {
        return Err(Error::InvalidInput(format!(
            "descriptor dimensions differ ({} vs {})",
            dx.cols(),
            dy.cols()
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("radius {rho} must be positive")));
    }
    for &x in xverts {
        if x as usize >= null.nv() {
            return Err(Error::InvalidInput(format!(
                "null feature vertex {x} outside the mesh"
            )));
        }
    }
    let mut targets = Vec::with_capacity(yverts.len());
    for &yv in yverts {
        if yv as usize >= corr.len() {
            return Err(Error::Correspondence(format!(
                "feature vertex {yv} beyond the {}-entry correspondence",
                corr.len()
            )));
        }
        targets.push(corr.resolve_vertex(null, yv));
    }

    // One capped sweep per null feature fills a column of r.
    let graph = ShortcutGraph::new(null);
    let mut geodesics = vec![vec![f64::INFINITY; xverts.len()]; yverts.len()];
    for (j, &xv) in xverts.iter().enumerate() {
        let field = graph.distances(&[xv], Some(rho));
        for (k, t) in targets.iter().enumerate() {
            if let Some(x_prime) = t {
                geodesics[k][j] = field.distance(*x_prime);
            }
        }
    }

    let mut accepted = vec![None; yverts.len()];
    let mut n_accepted = 0usize;
    for (k, row) in geodesics.iter().enumerate() {
        if targets[k].is_none() {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for (j, &r) in row.iter().enumerate() {
            if best.is_none_or(|(br, _)| r < br) {
                best = Some((r, j));
            }
        }
        if let Some((r, j)) = best {
            if r < rho {
                accepted[k] = Some(j);
                n_accepted += 1;
            }
        }
    }
    Ok(MatchSetup { targets, geodesics, accepted, n_accepted })
}

/// Mean raw distance over cross pairs excluding accepted matches; falls
/// back to 1 (flagged) when no such pair exists or they are all equal.
fn cross_pair_denominator(
    dx: &DescriptorSet,
    dy: &DescriptorSet,
    accepted: &[Option<usize>],
) -> (f64, bool) {
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for k in 0..dy.rows() {
        for j in 0..dx.rows() {
            if accepted[k] == Some(j) {
                continue;
            }
            sum += dy.row_distance(k, dx, j);
            count += 1;
        }
    }
    if count == 0 || !(sum > 0.0) {
        (1.0, true)
    } else {
        (sum / count as f64, false)
    }
}

pub fn descriptor_quality(
    null: &TriMesh,
    dx: &DescriptorSet,
    dy: &DescriptorSet,
    corr: &CorrespondenceMap,
    rho: f64,
    normalize: bool,
) -> Result<DescriptorQuality> {
    let setup = match_setup(null, dx, dy, corr, rho)?;
    if setup.n_accepted == 0 {
        return Err(Error::NoMatches);
    }
    let (denominator, degenerate) = if normalize {
        cross_pair_denominator(dx, dy, &setup.accepted)
    } else {
        (1.0, false)
    };
    let mut pairs = Vec::with_capacity(setup.n_accepted);
    let mut total = 0.0f64;
    for (k, a) in setup.accepted.iter().enumerate() {
        let Some(j) = *a else { continue };
        let raw = dy.row_distance(k, dx, j);
        let normalized = raw / denominator;
        total += normalized;
        pairs.push(MatchedPair {
            y_row: k,
            x_row: j,
            geodesic: setup.geodesics[k][j],
            raw,
            normalized,
        });
    }
    Ok(DescriptorQuality {
        mean: total / pairs.len() as f64,
        pairs,
        denominator,
        degenerate_denominator: degenerate,
    })
}

pub fn roc(
    null: &TriMesh,
    dx: &DescriptorSet,
    dy: &DescriptorSet,
    corr: &CorrespondenceMap,
    rho: f64,
    taus: &[f64],
    normalize: bool,
) -> Result<RocCurve> {
    validate_taus(taus)?;
    let setup = match_setup(null, dx, dy, corr, rho)?;
    let (denominator, _) = if normalize {
        cross_pair_denominator(dx, dy, &setup.accepted)
    } else {
        (1.0, false)
    };

    // Classify every groundtruth-bearing cross pair once.
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    for k in 0..dy.rows() {
        if setup.targets[k].is_none() {
            continue;
        }
        for j in 0..dx.rows() {
            let d = dy.row_distance(k, dx, j) / denominator;
            if setup.geodesics[k][j] <= rho {
                pos.push(d);
            } else {
                neg.push(d);
            }
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegeneratePopulation(format!(
            "{} positive and {} negative pairs",
            pos.len(),
            neg.len()
        )));
    }
    let points = taus
        .iter()
        .map(|&tau| {
            let tp = pos.iter().filter(|&&d| d <= tau).count();
            let fp = neg.iter().filter(|&&d| d <= tau).count();
            RocPoint {
                tau,
                fpr: fp as f64 / neg.len() as f64,
                tpr: tp as f64 / pos.len() as f64,
            }
        })
        .collect();
    Ok(RocCurve {
        points,
        positives: pos.len(),
        negatives: neg.len(),
        denominator,
    })
}

pub fn dense_quality(
    null: &TriMesh,
    dx: &DescriptorSet,
    dy: &DescriptorSet,
    corr: &CorrespondenceMap,
    sample: usize,
    seed: u64,
    normalize: bool,
) -> Result<DenseQuality> {
    if dx.binding != DescriptorBinding::Dense || dy.binding != DescriptorBinding::Dense {
        return Err(Error::InvalidInput("dense quality needs dense descriptor sets".into()));
    }
    if dx.cols() != dy.cols() {
        return Err(Error::InvalidInput(format!(
            "descriptor dimensions differ ({} vs {})",
            dx.cols(),
            dy.cols()
        )));
    }
    if dx.rows() != null.nv() {
        return Err(Error::InvalidInput(format!(
            "null set has {} rows for {} vertices",
            dx.rows(),
            null.nv()
        )));
    }
    if dy.rows() != corr.len() {
        return Err(Error::Correspondence(format!(
            "transformed set has {} rows but the correspondence has {} entries",
            dy.rows(),
            corr.len()
        )));
    }
    if sample == 0 {
        return Err(Error::InvalidInput("sample budget must be >= 1".into()));
    }

    let correspond: Vec<Option<u32>> = (0..dy.rows() as u32)
        .map(|k| corr.resolve_vertex(null, k))
        .collect();
    let raws: Vec<f64> = correspond
        .iter()
        .enumerate()
        .filter_map(|(k, t)| t.map(|u| dy.row_distance(k, dx, u as usize)))
        .collect();
    if raws.is_empty() {
        return Err(Error::EmptyEvaluableSet(
            "no vertex carries groundtruth".into(),
        ));
    }

    let cross = dy.rows() * dx.rows() - raws.len();
    let (denominator, sampled, degenerate) = if !normalize {
        (1.0, false, false)
    } else if cross == 0 {
        (1.0, false, true)
    } else if cross <= sample {
        let mut sum = 0.0f64;
        for (k, t) in correspond.iter().enumerate() {
            for j in 0..dx.rows() {
                if *t == Some(j as u32) {
                    continue;
                }
                sum += dy.row_distance(k, dx, j);
            }
        }
        let d = sum / cross as f64;
        if d > 0.0 { (d, false, false) } else { (1.0, false, true) }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0f64;
        let mut got = 0usize;
        while got < sample {
            let k = rng.random_range(0..dy.rows());
            let j = rng.random_range(0..dx.rows());
            if correspond[k] == Some(j as u32) {
                continue;
            }
            sum += dy.row_distance(k, dx, j);
            got += 1;
        }
        let d = sum / sample as f64;
        if d > 0.0 { (d, true, false) } else { (1.0, true, true) }
    };

    let mean = raws.iter().map(|r| r / denominator).sum::<f64>() / raws.len() as f64;
    Ok(DenseQuality {
        mean,
        denominator,
        evaluated: raws.len(),
        sampled,
        degenerate_denominator: degenerate,
    })
}
