//! Seeded synthesis of transformed copies of a null shape, with exact
//! groundtruth correspondences.
//!
//! Eight transformation classes are generated here, each in five strengths;
//! four more (isometry, rasterization, view, topology) exist only as
//! externally produced files that the [`manifest`] references. Every
//! synthesized transform is a pure function of `(mesh, class, strength,
//! seed)` — rerunning it reproduces the output bit for bit — and ships a
//! [`CorrespondenceMap`] locating each output vertex on the null shape.
//!
//! The strength→magnitude calibrations (noise σ, hole radius, sampling
//! fractions, ...) live in [`TransformParams`] and can be overridden; the
//! defaults keep strength 5 clearly harder than strength 1 without
//! destroying the shape.

pub mod corr;
pub mod decimate;
pub mod manifest;

use nalgebra::{Matrix3, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use corr::{load_correspondence, parse_correspondence_bytes, CorrespondenceMap, NullRef};
pub use manifest::{Manifest, ManifestEntry};

use crate::mesh::geodesic;
use crate::{Error, Result, TriMesh};

/// A transformation class. The eight synthesizable ones have generators in
/// this module; `External` stands for classes that arrive as files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformClass {
    Noise,
    ShotNoise,
    Holes,
    MicroHoles,
    Sampling,
    Scaling,
    Affine,
    Partial,
    External,
}

impl TransformClass {
    /// All synthesizable classes, in canonical (alphabetical) order.
    pub const SYNTHESIZABLE: [TransformClass; 8] = [
        TransformClass::Affine,
        TransformClass::Holes,
        TransformClass::MicroHoles,
        TransformClass::Noise,
        TransformClass::Partial,
        TransformClass::Sampling,
        TransformClass::Scaling,
        TransformClass::ShotNoise,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TransformClass::Noise => "noise",
            TransformClass::ShotNoise => "shot-noise",
            TransformClass::Holes => "holes",
            TransformClass::MicroHoles => "micro-holes",
            TransformClass::Sampling => "sampling",
            TransformClass::Scaling => "scaling",
            TransformClass::Affine => "affine",
            TransformClass::Partial => "partial",
            TransformClass::External => "external",
        }
    }

    /// Parses a synthesizable class name; external labels return `None`.
    pub fn from_name(s: &str) -> Option<TransformClass> {
        Self::SYNTHESIZABLE
            .into_iter()
            .find(|c| c.name() == s)
    }
}

/// One transformation to synthesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransformSpec {
    pub class: TransformClass,
    /// Severity 1..=5.
    pub strength: u8,
    pub seed: u64,
}

impl TransformSpec {
    pub fn new(class: TransformClass, strength: u8, seed: u64) -> Result<Self> {
        let spec = TransformSpec {
            class,
            strength,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.strength) {
            return Err(Error::InvalidInput(format!(
                "transform strength must be 1..=5, got {}",
                self.strength
            )));
        }
        Ok(())
    }
}

/// Magnitude calibrations per strength. All are multiples of the shape's
/// bounding-box diameter where a length is involved.
#[derive(Debug, Clone)]
pub struct TransformParams {
    /// Gaussian noise σ = coeff · strength · diam.
    pub noise_sigma_coeff: f64,
    /// Displacement samples are redrawn above this many σ, so groundtruth
    /// error is bounded.
    pub noise_max_sigmas: f64,
    /// Fraction of vertices hit by shot noise = coeff · strength.
    pub shot_fraction_coeff: f64,
    /// Shot displacement along the normal = coeff · diam.
    pub shot_offset_coeff: f64,
    /// Geodesic radius of each hole = coeff · diam.
    pub hole_radius_coeff: f64,
    /// Micro-hole punctures = count · strength.
    pub micro_holes_per_strength: usize,
    /// Surviving vertex fraction per strength for down-sampling.
    pub sampling_fractions: [f64; 5],
    /// Uniform scale factor per version (powers of two stay exact).
    pub scaling_factors: [f64; 5],
    /// Affine map x ↦ (I + coeff · strength · R)x.
    pub affine_coeff: f64,
    /// Kept vertex fraction per strength for partial cuts.
    pub partial_fractions: [f64; 5],
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            noise_sigma_coeff: 0.002,
            noise_max_sigmas: 3.5,
            shot_fraction_coeff: 0.002,
            shot_offset_coeff: 0.02,
            hole_radius_coeff: 0.025,
            micro_holes_per_strength: 20,
            sampling_fractions: [0.80, 0.60, 0.40, 0.25, 0.18],
            scaling_factors: [0.25, 0.5, 2.0, 4.0, 8.0],
            affine_coeff: 0.05,
            partial_fractions: [0.90, 0.75, 0.60, 0.45, 0.30],
        }
    }
}

/// What a transform synthesized, beyond the mesh and its groundtruth: the
/// hidden random choices, for verification, and derived flags.
#[derive(Debug, Clone, Default)]
pub struct TransformMeta {
    /// The output is not a single connected component (holes or cuts can
    /// sever the shape; permitted, but evaluation wants to know).
    pub disconnected: bool,
    /// Hole transform: seed vertices of the removed geodesic disks.
    pub hole_seeds: Vec<u32>,
    /// Micro-holes: the punctured null vertices.
    pub punctures: Vec<u32>,
    /// Shot noise: the displaced null vertices.
    pub shot_vertices: Vec<u32>,
    /// Partial: unit cut normal `n` and offset `o`; the kept vertices are
    /// the target count lowest in (n·p, index) order, so every kept vertex
    /// has n·p ≤ o and every plane-removed one has n·p ≥ o.
    pub plane: Option<(Vector3<f64>, f64)>,
    /// Affine: the applied matrix.
    pub affine: Option<Matrix3<f64>>,
    /// Sampling: surviving vertex fraction actually reached.
    pub achieved_fraction: Option<f64>,
}

/// A synthesized transform: the mesh, its groundtruth, and the synthesis
/// metadata.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub mesh: TriMesh,
    pub corr: CorrespondenceMap,
    pub meta: TransformMeta,
}

/// Applies a synthesizable transform with default calibrations.
pub fn apply_transform(mesh: &TriMesh, spec: &TransformSpec) -> Result<Transformed> {
    apply_transform_with(mesh, spec, &TransformParams::default())
}

/// Applies a synthesizable transform. Deterministic in `(mesh, spec,
/// params)`: the same inputs give bit-identical outputs.
pub fn apply_transform_with(
    mesh: &TriMesh,
    spec: &TransformSpec,
    params: &TransformParams,
) -> Result<Transformed> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let s = spec.strength;
    let (out, corr, mut meta) = match spec.class {
        TransformClass::Noise => noise(mesh, s, params, &mut rng)?,
        TransformClass::ShotNoise => shot_noise(mesh, s, params, &mut rng)?,
        TransformClass::Holes => holes(mesh, s, params, &mut rng)?,
        TransformClass::MicroHoles => micro_holes(mesh, s, params, &mut rng)?,
        TransformClass::Sampling => sampling(mesh, s, params)?,
        TransformClass::Scaling => scaling(mesh, s, params)?,
        TransformClass::Affine => affine(mesh, s, params, &mut rng)?,
        TransformClass::Partial => partial(mesh, s, params, &mut rng)?,
        TransformClass::External => {
            return Err(Error::InvalidInput(
                "external transforms are loaded from files, not synthesized".into(),
            ))
        }
    };
    meta.disconnected = !out.is_connected();
    Ok(Transformed {
        mesh: out,
        corr,
        meta,
    })
}

type Pieces = (TriMesh, CorrespondenceMap, TransformMeta);

fn noise(
    mesh: &TriMesh,
    strength: u8,
    params: &TransformParams,
    rng: &mut ChaCha8Rng,
) -> Result<Pieces> {
    let sigma = params.noise_sigma_coeff * strength as f64 * mesh.diam();
    let lim = params.noise_max_sigmas * sigma;
    let positions = mesh
        .positions()
        .iter()
        .map(|p| {
            loop {
                let d = Vector3::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ) * sigma;
                if d.norm() <= lim {
                    return p + d;
                }
            }
        })
        .collect();
    let out = mesh.with_positions(positions)?;
    let corr = CorrespondenceMap::identity(mesh.nv());
    Ok((out, corr, TransformMeta::default()))
}

fn shot_noise(
    mesh: &TriMesh,
    strength: u8,
    params: &TransformParams,
    rng: &mut ChaCha8Rng,
) -> Result<Pieces> {
    let nv = mesh.nv();
    let frac = params.shot_fraction_coeff * strength as f64;
    let count = ((frac * nv as f64).round() as usize).clamp(1, nv);
    let mut chosen: Vec<u32> = rand::seq::index::sample(rng, nv, count)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    chosen.sort_unstable();
    let offset = params.shot_offset_coeff * mesh.diam();
    let mut positions = mesh.positions().to_vec();
    for &v in &chosen {
        positions[v as usize] += mesh.vertex_normal(v) * offset;
    }
    let out = mesh.with_positions(positions)?;
    let corr = CorrespondenceMap::identity(nv);
    let meta = TransformMeta {
        shot_vertices: chosen,
        ..TransformMeta::default()
    };
    Ok((out, corr, meta))
}

fn holes(
    mesh: &TriMesh,
    strength: u8,
    params: &TransformParams,
    rng: &mut ChaCha8Rng,
) -> Result<Pieces> {
    let nv = mesh.nv();
    let count = (strength as usize).min(nv);
    let mut seeds: Vec<u32> = rand::seq::index::sample(rng, nv, count)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    seeds.sort_unstable();
    let radius = params.hole_radius_coeff * mesh.diam();
    let field = geodesic::geodesic_distances(mesh, &seeds, Some(radius));
    let removed: Vec<bool> = (0..nv as u32).map(|v| field.reached(v)).collect();
    let (out, old_of_new) = remove_marked(mesh, &removed)?;
    let corr = CorrespondenceMap::from_vertex_indices(&old_of_new);
    let meta = TransformMeta {
        hole_seeds: seeds,
        ..TransformMeta::default()
    };
    Ok((out, corr, meta))
}

fn micro_holes(
    mesh: &TriMesh,
    strength: u8,
    params: &TransformParams,
    rng: &mut ChaCha8Rng,
) -> Result<Pieces> {
    let nv = mesh.nv();
    let need = params.micro_holes_per_strength * strength as usize;
    // Punctures are kept two rings apart so each one removes exactly its
    // own star: no face loses two corners and no survivor loses its whole
    // ring, which keeps hole count and groundtruth size exact.
    let mut blocked = vec![false; nv];
    let mut punctures: Vec<u32> = Vec::with_capacity(need);
    let mut attempts = 0usize;
    while punctures.len() < need {
        attempts += 1;
        if attempts > 200 * need {
            return Err(Error::TransformFailed(format!(
                "could not place {need} separated micro holes on a {nv}-vertex mesh \
                 (placed {})",
                punctures.len()
            )));
        }
        let v = rng.random_range(0..nv) as u32;
        if blocked[v as usize] {
            continue;
        }
        punctures.push(v);
        blocked[v as usize] = true;
        for &r1 in mesh.ring(v) {
            blocked[r1 as usize] = true;
            for &r2 in mesh.ring(r1) {
                blocked[r2 as usize] = true;
            }
        }
    }
    punctures.sort_unstable();
    let mut removed = vec![false; nv];
    for &v in &punctures {
        removed[v as usize] = true;
    }
    let (out, old_of_new) = remove_marked(mesh, &removed)?;
    let corr = CorrespondenceMap::from_vertex_indices(&old_of_new);
    let meta = TransformMeta {
        punctures,
        ..TransformMeta::default()
    };
    Ok((out, corr, meta))
}

fn sampling(mesh: &TriMesh, strength: u8, params: &TransformParams) -> Result<Pieces> {
    let fraction = params.sampling_fractions[strength as usize - 1];
    let (out, refs) = decimate::decimate_to_fraction(mesh, fraction)?;
    let achieved = out.nv() as f64 / mesh.nv() as f64;
    let corr = CorrespondenceMap::from_refs(refs, mesh.nv(), mesh.nf())?;
    let meta = TransformMeta {
        achieved_fraction: Some(achieved),
        ..TransformMeta::default()
    };
    Ok((out, corr, meta))
}

fn scaling(mesh: &TriMesh, strength: u8, params: &TransformParams) -> Result<Pieces> {
    let factor = params.scaling_factors[strength as usize - 1];
    let out = mesh.scaled(factor)?;
    let corr = CorrespondenceMap::identity(mesh.nv());
    Ok((out, corr, TransformMeta::default()))
}

fn affine(
    mesh: &TriMesh,
    strength: u8,
    params: &TransformParams,
    rng: &mut ChaCha8Rng,
) -> Result<Pieces> {
    let coeff = params.affine_coeff * strength as f64;
    let a = loop {
        let mut r = Matrix3::zeros();
        for row in 0..3 {
            for col in 0..3 {
                r[(row, col)] = rng.random_range(-1.0..=1.0);
            }
        }
        let a = Matrix3::identity() + r * coeff;
        if a.determinant() > 0.2 {
            break a;
        }
    };
    let positions = mesh
        .positions()
        .iter()
        .map(|p| Point3::from(a * p.coords))
        .collect();
    let out = mesh.with_positions(positions)?;
    let corr = CorrespondenceMap::identity(mesh.nv());
    let meta = TransformMeta {
        affine: Some(a),
        ..TransformMeta::default()
    };
    Ok((out, corr, meta))
}

fn partial(
    mesh: &TriMesh,
    strength: u8,
    params: &TransformParams,
    rng: &mut ChaCha8Rng,
) -> Result<Pieces> {
    let nv = mesh.nv();
    let fraction = params.partial_fractions[strength as usize - 1];
    let keep = ((fraction * nv as f64).round() as usize).clamp(1, nv);
    let normal = loop {
        let n = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let len = n.norm();
        if len > 1e-12 {
            break n / len;
        }
    };
    let mut order: Vec<u32> = (0..nv as u32).collect();
    let dot = |v: u32| normal.dot(&mesh.position(v).coords);
    order.sort_unstable_by(|&a, &b| dot(a).total_cmp(&dot(b)).then(a.cmp(&b)));
    let offset = dot(order[keep - 1]);
    let mut removed = vec![true; nv];
    for &v in &order[..keep] {
        removed[v as usize] = false;
    }
    let (out, old_of_new) = remove_marked(mesh, &removed)?;
    let corr = CorrespondenceMap::from_vertex_indices(&old_of_new);
    let meta = TransformMeta {
        plane: Some((normal, offset)),
        ..TransformMeta::default()
    };
    Ok((out, corr, meta))
}

/// Deletes the marked vertices together with their incident faces, then
/// drops any vertex left without a face. Returns the new mesh and, per new
/// vertex, its original index (ascending).
fn remove_marked(mesh: &TriMesh, removed: &[bool]) -> Result<(TriMesh, Vec<u32>)> {
    let nv = mesh.nv();
    let mut kept_faces: Vec<[u32; 3]> = Vec::new();
    let mut referenced = vec![false; nv];
    for f in mesh.faces() {
        if f.iter().all(|&c| !removed[c as usize]) {
            kept_faces.push(*f);
            for &c in f {
                referenced[c as usize] = true;
            }
        }
    }
    if kept_faces.is_empty() {
        return Err(Error::TransformFailed(
            "vertex removal left no faces".into(),
        ));
    }
    let mut new_of_old = vec![u32::MAX; nv];
    let mut old_of_new = Vec::new();
    let mut positions = Vec::new();
    for (old, &r) in referenced.iter().enumerate() {
        if r {
            new_of_old[old] = old_of_new.len() as u32;
            old_of_new.push(old as u32);
            positions.push(mesh.position(old as u32));
        }
    }
    for f in kept_faces.iter_mut() {
        *f = f.map(|c| new_of_old[c as usize]);
    }
    Ok((TriMesh::new(positions, kept_faces)?, old_of_new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::synth;

    fn spec(class: TransformClass, strength: u8) -> TransformSpec {
        TransformSpec::new(class, strength, 0xABCD_EF01).unwrap()
    }

    /// Checks the survivors-map-by-index contract: every output vertex is a
    /// null vertex at the identical position.
    fn assert_identity_on_survivors(null: &TriMesh, t: &Transformed) {
        assert_eq!(t.corr.len(), t.mesh.nv());
        for j in 0..t.mesh.nv() as u32 {
            match t.corr.get(j) {
                NullRef::Vertex(i) => assert_eq!(t.mesh.position(j), null.position(*i)),
                other => panic!("expected a vertex reference, got {other:?}"),
            }
        }
    }

    /// Expected result of deleting `removed` vertices with their stars:
    /// faces with no removed corner, vertices still referenced.
    fn expected_removal(null: &TriMesh, removed: &[bool]) -> (Vec<u32>, usize) {
        let mut referenced = vec![false; null.nv()];
        let mut faces = 0;
        for f in null.faces() {
            if f.iter().all(|&c| !removed[c as usize]) {
                faces += 1;
                for &c in f {
                    referenced[c as usize] = true;
                }
            }
        }
        let verts = (0..null.nv() as u32)
            .filter(|&v| referenced[v as usize])
            .collect();
        (verts, faces)
    }

    fn survivor_ids(t: &Transformed) -> Vec<u32> {
        (0..t.mesh.nv() as u32)
            .map(|j| match t.corr.get(j) {
                NullRef::Vertex(i) => *i,
                other => panic!("expected a vertex reference, got {other:?}"),
            })
            .collect()
    }

    #[test]
    fn noise_matches_its_stated_magnitude() {
        let m = synth::icosphere(1.0, 5); // 10242 vertices
        let t = apply_transform(&m, &spec(TransformClass::Noise, 5)).unwrap();
        assert_eq!(t.mesh.nv(), m.nv());
        assert_eq!(t.mesh.faces(), m.faces());
        let sigma = 0.002 * 5.0 * m.diam();
        let lim = 3.5 * sigma + 1e-9;
        let mut sum2 = 0.0;
        let mut sum = 0.0;
        let n = 3 * m.nv();
        for v in 0..m.nv() as u32 {
            let d = t.mesh.position(v) - m.position(v);
            assert!(d.norm() <= lim, "displacement {} beyond the cap", d.norm());
            for c in 0..3 {
                sum += d[c];
                sum2 += d[c] * d[c];
            }
        }
        let mean = sum / n as f64;
        let std = ((sum2 - n as f64 * mean * mean) / (n as f64 - 1.0)).sqrt();
        assert!(
            (std - sigma).abs() <= 0.05 * sigma,
            "sample std {std} vs σ {sigma}"
        );
        assert_eq!(t.corr, CorrespondenceMap::identity(m.nv()));
    }

    #[test]
    fn shot_noise_displaces_the_reported_subset_exactly() {
        let m = synth::icosphere(1.0, 3); // 642 vertices
        for strength in [1u8, 5] {
            let t = apply_transform(&m, &spec(TransformClass::ShotNoise, strength)).unwrap();
            let expected_count = ((0.002 * strength as f64 * m.nv() as f64).round() as usize).max(1);
            assert_eq!(t.meta.shot_vertices.len(), expected_count);
            let offset = 0.02 * m.diam();
            let mut hit = vec![false; m.nv()];
            for &v in &t.meta.shot_vertices {
                hit[v as usize] = true;
                let want = m.position(v) + m.vertex_normal(v) * offset;
                assert_eq!(t.mesh.position(v), want);
            }
            for v in 0..m.nv() as u32 {
                if !hit[v as usize] {
                    assert_eq!(t.mesh.position(v), m.position(v));
                }
            }
            assert_eq!(t.corr, CorrespondenceMap::identity(m.nv()));
        }
    }

    #[test]
    fn scaling_multiplies_positions_exactly() {
        let m = synth::bumpy_sphere(1.0, 2, 0.3);
        let factors = [0.25, 0.5, 2.0, 4.0, 8.0];
        for strength in 1..=5u8 {
            let t = apply_transform(&m, &spec(TransformClass::Scaling, strength)).unwrap();
            let f = factors[strength as usize - 1];
            for v in 0..m.nv() as u32 {
                assert_eq!(t.mesh.position(v), Point3::from(m.position(v) * f));
            }
            assert_eq!(t.corr, CorrespondenceMap::identity(m.nv()));
        }
    }

    #[test]
    fn scaling_then_diameter_normalization_recovers_the_shape() {
        let m = synth::bumpy_sphere(1.0, 2, 0.3);
        let base = m.normalized_to_unit_diam().unwrap();
        for strength in 1..=5u8 {
            let t = apply_transform(&m, &spec(TransformClass::Scaling, strength)).unwrap();
            let norm = t.mesh.normalized_to_unit_diam().unwrap();
            for v in 0..m.nv() as u32 {
                let d = (norm.position(v) - base.position(v)).norm();
                assert!(d <= 1e-9, "vertex {v} off by {d}");
            }
        }
    }

    #[test]
    fn affine_applies_a_bounded_well_conditioned_matrix() {
        let m = synth::bumpy_sphere(1.0, 2, 0.3);
        for strength in [1u8, 5] {
            let t = apply_transform(&m, &spec(TransformClass::Affine, strength)).unwrap();
            let a = t.meta.affine.expect("affine metadata");
            assert!(a.determinant() > 0.2);
            let r = (a - Matrix3::identity()) / (0.05 * strength as f64);
            assert!(r.iter().all(|x| x.abs() <= 1.0 + 1e-12));
            for v in 0..m.nv() as u32 {
                assert_eq!(t.mesh.position(v), Point3::from(a * m.position(v).coords));
            }
        }
    }

    #[test]
    fn holes_remove_capped_geodesic_disks() {
        let m = synth::icosphere(1.0, 3);
        for strength in [1u8, 3, 5] {
            let t = apply_transform(&m, &spec(TransformClass::Holes, strength)).unwrap();
            assert_eq!(t.meta.hole_seeds.len(), strength as usize);
            let radius = 0.025 * m.diam();
            let field = geodesic::geodesic_distances(&m, &t.meta.hole_seeds, Some(radius));
            let removed: Vec<bool> = (0..m.nv() as u32).map(|v| field.reached(v)).collect();
            let (verts, faces) = expected_removal(&m, &removed);
            assert_eq!(survivor_ids(&t), verts);
            assert_eq!(t.mesh.nf(), faces);
            assert!(t.mesh.nv() < m.nv());
            assert_identity_on_survivors(&m, &t);
        }
    }

    #[test]
    fn micro_holes_puncture_separated_stars() {
        let m = synth::icosphere(1.0, 3);
        let t = apply_transform(&m, &spec(TransformClass::MicroHoles, 1)).unwrap();
        assert_eq!(t.meta.punctures.len(), 20);
        // Separation: no two punctures adjacent (in fact two rings apart).
        for (i, &a) in t.meta.punctures.iter().enumerate() {
            for &b in &t.meta.punctures[i + 1..] {
                assert!(!m.ring(a).contains(&b), "punctures {a},{b} adjacent");
            }
        }
        let mut removed = vec![false; m.nv()];
        for &v in &t.meta.punctures {
            removed[v as usize] = true;
        }
        let (verts, faces) = expected_removal(&m, &removed);
        assert_eq!(survivor_ids(&t), verts);
        assert_eq!(t.mesh.nf(), faces);
        // Exactly the punctured stars vanish: with two-ring separation no
        // survivor loses its whole ring.
        assert_eq!(t.mesh.nv(), m.nv() - 20);
        assert_identity_on_survivors(&m, &t);
    }

    #[test]
    fn micro_holes_error_out_when_the_mesh_is_too_small() {
        let m = synth::tetrahedron(1.0);
        match apply_transform(&m, &spec(TransformClass::MicroHoles, 5)) {
            Err(Error::TransformFailed(_)) => {}
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn partial_keeps_one_side_of_the_reported_plane() {
        let m = synth::icosphere(1.0, 4); // 2562 vertices
        for strength in [1u8, 3, 5] {
            let fractions = [0.90, 0.75, 0.60, 0.45, 0.30];
            let t = apply_transform(&m, &spec(TransformClass::Partial, strength)).unwrap();
            let (n, offset) = t.meta.plane.expect("plane metadata");
            let keep = (fractions[strength as usize - 1] * m.nv() as f64).round() as usize;
            let mut order: Vec<u32> = (0..m.nv() as u32).collect();
            let dot = |v: u32| n.dot(&m.position(v).coords);
            order.sort_unstable_by(|&a, &b| dot(a).total_cmp(&dot(b)).then(a.cmp(&b)));
            assert_eq!(dot(order[keep - 1]), offset);
            let mut removed = vec![true; m.nv()];
            for &v in &order[..keep] {
                removed[v as usize] = false;
            }
            let (verts, faces) = expected_removal(&m, &removed);
            assert_eq!(survivor_ids(&t), verts);
            assert_eq!(t.mesh.nf(), faces);
            assert!(t.mesh.nv() <= keep);
            assert_identity_on_survivors(&m, &t);
        }
    }

    #[test]
    fn sampling_hits_the_target_count_and_tracks_origins() {
        let m = synth::icosphere(1.0, 5); // 10242 vertices
        let t = apply_transform(&m, &spec(TransformClass::Sampling, 5)).unwrap();
        assert_eq!(t.mesh.nv(), (0.18f64 * 10242.0).round() as usize);
        assert!(t.mesh.nv() <= 2000, "strength 5 keeps under a fifth");
        let frac = t.meta.achieved_fraction.unwrap();
        assert!((frac - t.mesh.nv() as f64 / m.nv() as f64).abs() < 1e-15);
        let mut moved = 0usize;
        for j in 0..t.mesh.nv() as u32 {
            match t.corr.get(j) {
                NullRef::Vertex(i) => assert_eq!(t.mesh.position(j), m.position(*i)),
                NullRef::Barycentric { .. } => {
                    moved += 1;
                    let p = t.corr.resolve_point(&m, j).unwrap();
                    let d = (p - t.mesh.position(j)).norm();
                    assert!(d <= 3.0 * m.mean_edge_len());
                }
                NullRef::Missing => panic!("sampling keeps groundtruth everywhere"),
            }
        }
        assert!(moved > 0, "aggressive sampling must move some vertices");
    }

    #[test]
    fn every_class_is_reproducible_bit_for_bit() {
        let m = synth::bumpy_sphere(1.0, 3, 0.25);
        for class in TransformClass::SYNTHESIZABLE {
            let sp = spec(class, 2);
            let a = apply_transform(&m, &sp).unwrap();
            let b = apply_transform(&m, &sp).unwrap();
            assert_eq!(a.mesh.faces(), b.mesh.faces(), "{class:?}");
            assert_eq!(a.corr, b.corr, "{class:?}");
            for (p, q) in a.mesh.positions().iter().zip(b.mesh.positions()) {
                assert_eq!(p, q, "{class:?}");
            }
            // And a different seed actually changes randomized classes.
            if !matches!(class, TransformClass::Scaling | TransformClass::Sampling) {
                let other = TransformSpec::new(class, 2, 1).unwrap();
                let c = apply_transform(&m, &other).unwrap();
                let same = a.mesh.nv() == c.mesh.nv()
                    && a.mesh
                        .positions()
                        .iter()
                        .zip(c.mesh.positions())
                        .all(|(p, q)| p == q);
                assert!(!same, "{class:?} ignored its seed");
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let m = synth::tetrahedron(1.0);
        assert!(TransformSpec::new(TransformClass::Noise, 0, 0).is_err());
        assert!(TransformSpec::new(TransformClass::Noise, 6, 0).is_err());
        let ext = TransformSpec {
            class: TransformClass::External,
            strength: 1,
            seed: 0,
        };
        assert!(apply_transform(&m, &ext).is_err());
    }

    #[test]
    fn class_names_round_trip() {
        for class in TransformClass::SYNTHESIZABLE {
            assert_eq!(TransformClass::from_name(class.name()), Some(class));
        }
        assert_eq!(TransformClass::from_name("isometry"), None);
        assert_eq!(TransformClass::from_name("external"), None);
    }
}
