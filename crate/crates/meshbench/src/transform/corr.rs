//! Dense groundtruth correspondence between a transformed mesh and the null
//! shape it was derived from.
//!
//! Every transformed vertex carries exactly one reference into the null
//! shape: a vertex index, a point inside a face in barycentric coordinates,
//! or a "no groundtruth" marker (such vertices are skipped by all scoring).
//!
//! The on-disk format is line oriented, one line per transformed vertex
//! `j`, in any order but each `j` exactly once:
//!
//! ```text
//! j i            # maps to null vertex i
//! j f b0 b1 b2   # maps to the point b0·A + b1·B + b2·C of null face f
//! j -1           # no groundtruth
//! ```
//!
//! Blank lines and `#` comments are permitted.

use std::fs;
use std::path::Path;

use nalgebra::Point3;

use crate::{Error, Result, TriMesh};

/// Where a transformed vertex came from on the null shape.
#[derive(Debug, Clone, PartialEq)]
pub enum NullRef {
    /// A null-shape vertex.
    Vertex(u32),
    /// A point inside a null-shape face; weights sum to 1 and are
    /// non-negative up to rounding (≥ −1e-9).
    Barycentric { face: u32, weights: [f64; 3] },
    /// No groundtruth for this vertex.
    Missing,
}

/// One [`NullRef`] per transformed vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMap {
    refs: Vec<NullRef>,
}

impl CorrespondenceMap {
    /// The identity map: transformed vertex `j` is null vertex `j`.
    pub fn identity(n: usize) -> Self {
        CorrespondenceMap {
            refs: (0..n as u32).map(NullRef::Vertex).collect(),
        }
    }

    /// Map for a mesh whose vertices are a subset of the null vertices:
    /// transformed vertex `j` is null vertex `old_of_new[j]`.
    pub fn from_vertex_indices(old_of_new: &[u32]) -> Self {
        CorrespondenceMap {
            refs: old_of_new.iter().map(|&i| NullRef::Vertex(i)).collect(),
        }
    }

    /// Wraps raw references, validating them against null-shape counts.
    pub fn from_refs(refs: Vec<NullRef>, null_nv: usize, null_nf: usize) -> Result<Self> {
        for (j, r) in refs.iter().enumerate() {
            validate_ref(r, j, null_nv, null_nf)?;
        }
        Ok(CorrespondenceMap { refs })
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn get(&self, j: u32) -> &NullRef {
        &self.refs[j as usize]
    }

    pub fn refs(&self) -> &[NullRef] {
        &self.refs
    }

    /// How many vertices carry groundtruth.
    pub fn with_groundtruth(&self) -> usize {
        self.refs.iter().filter(|r| **r != NullRef::Missing).count()
    }

    /// The null-shape point transformed vertex `j` corresponds to.
    pub fn resolve_point(&self, null: &TriMesh, j: u32) -> Option<Point3<f64>> {
        match &self.refs[j as usize] {
            NullRef::Vertex(i) => Some(null.position(*i)),
            NullRef::Barycentric { face, weights } => {
                let [a, b, c] = null.face(*face);
                let pa = null.position(a).coords * weights[0];
                let pb = null.position(b).coords * weights[1];
                let pc = null.position(c).coords * weights[2];
                Some(Point3::from(pa + pb + pc))
            }
            NullRef::Missing => None,
        }
    }

    /// The null-shape vertex transformed vertex `j` corresponds to;
    /// barycentric references resolve to the largest-weight corner, exact
    /// weight ties to the corner earliest in canonical vertex order, so the
    /// result is stable under relabeling of the null mesh.
    pub fn resolve_vertex(&self, null: &TriMesh, j: u32) -> Option<u32> {
        match &self.refs[j as usize] {
            NullRef::Vertex(i) => Some(*i),
            NullRef::Barycentric { face, weights } => {
                let corners = null.face(*face);
                let mut best = 0usize;
                for k in 1..3 {
                    let better = weights[k] > weights[best]
                        || (weights[k] == weights[best]
                            && null.rank(corners[k]) < null.rank(corners[best]));
                    if better {
                        best = k;
                    }
                }
                Some(corners[best])
            }
            NullRef::Missing => None,
        }
    }

    /// Serializes in the line format, ascending by transformed vertex.
    /// Floats print in shortest round-trip form, so write → parse → write
    /// is byte-stable.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        use std::fmt::Write;
        let mut s = String::with_capacity(self.refs.len() * 12);
        for (j, r) in self.refs.iter().enumerate() {
            match r {
                NullRef::Vertex(i) => writeln!(s, "{j} {i}").unwrap(),
                NullRef::Barycentric { face, weights } => writeln!(
                    s,
                    "{j} {face} {} {} {}",
                    weights[0], weights[1], weights[2]
                )
                .unwrap(),
                NullRef::Missing => writeln!(s, "{j} -1").unwrap(),
            }
        }
        out.extend_from_slice(s.as_bytes());
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        self.write_bytes(&mut out);
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn validate_ref(r: &NullRef, j: usize, null_nv: usize, null_nf: usize) -> Result<()> {
    match r {
        NullRef::Vertex(i) => {
            if *i as usize >= null_nv {
                return Err(Error::Correspondence(format!(
                    "vertex {j} maps to null vertex {i}, but the null shape has {null_nv} vertices"
                )));
            }
        }
        NullRef::Barycentric { face, weights } => {
            if *face as usize >= null_nf {
                return Err(Error::Correspondence(format!(
                    "vertex {j} maps to null face {face}, but the null shape has {null_nf} faces"
                )));
            }
            let sum: f64 = weights.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Correspondence(format!(
                    "vertex {j}: barycentric weights sum to {sum}, not 1"
                )));
            }
            if weights.iter().any(|w| *w < -1e-9 || !w.is_finite()) {
                return Err(Error::Correspondence(format!(
                    "vertex {j}: barycentric weights {weights:?} out of range"
                )));
            }
        }
        NullRef::Missing => {}
    }
    Ok(())
}

/// Parses the line format against explicit null/transformed sizes (the
/// mesh-free core of [`load_correspondence`], also the fuzzing entry point).
pub fn parse_correspondence_bytes(
    bytes: &[u8],
    null_nv: usize,
    null_nf: usize,
    transformed_nv: usize,
) -> Result<CorrespondenceMap> {
    const WHAT: &str = "correspondence";
    let err = |line: usize, msg: String| Error::Parse {
        what: WHAT,
        line,
        msg,
    };
    let text = String::from_utf8_lossy(bytes);
    let mut refs: Vec<Option<NullRef>> = vec![None; transformed_nv];
    let mut seen = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let j: usize = toks[0]
            .parse()
            .map_err(|_| err(line_no, format!("expected a vertex index, got `{}`", toks[0])))?;
        if j >= transformed_nv {
            return Err(err(
                line_no,
                format!("transformed vertex {j} out of range (mesh has {transformed_nv})"),
            ));
        }
        let r = match toks.len() {
            2 => {
                let i: i64 = toks[1].parse().map_err(|_| {
                    err(line_no, format!("expected a null index or -1, got `{}`", toks[1]))
                })?;
                if i == -1 {
                    NullRef::Missing
                } else if i < 0 {
                    return Err(err(line_no, format!("negative null vertex {i}")));
                } else {
                    NullRef::Vertex(u32::try_from(i).map_err(|_| {
                        err(line_no, format!("null vertex {i} out of range"))
                    })?)
                }
            }
            5 => {
                let face: u32 = toks[1].parse().map_err(|_| {
                    err(line_no, format!("expected a face index, got `{}`", toks[1]))
                })?;
                let mut weights = [0.0f64; 3];
                for (w, t) in weights.iter_mut().zip(&toks[2..]) {
                    *w = t
                        .parse()
                        .map_err(|_| err(line_no, format!("expected a weight, got `{t}`")))?;
                }
                NullRef::Barycentric { face, weights }
            }
            n => {
                return Err(err(
                    line_no,
                    format!("expected 2 or 5 fields, got {n}"),
                ));
            }
        };
        validate_ref(&r, j, null_nv, null_nf)
            .map_err(|e| err(line_no, e.to_string()))?;
        if refs[j].is_some() {
            return Err(err(line_no, format!("vertex {j} listed twice")));
        }
        refs[j] = Some(r);
        seen += 1;
    }
    if seen != transformed_nv {
        let missing = refs.iter().position(|r| r.is_none()).unwrap_or(0);
        return Err(Error::Correspondence(format!(
            "file lists {seen} of {transformed_nv} transformed vertices (vertex {missing} missing)"
        )));
    }
    Ok(CorrespondenceMap {
        refs: refs.into_iter().map(|r| r.unwrap()).collect(),
    })
}

/// Loads and validates a correspondence file for a (null, transformed) pair.
pub fn load_correspondence(
    path: impl AsRef<Path>,
    null: &TriMesh,
    transformed: &TriMesh,
) -> Result<CorrespondenceMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_correspondence_bytes(&bytes, null.nv(), null.nf(), transformed.nv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::synth;

    #[test]
    fn identity_round_trip() {
        let m = synth::tetrahedron(1.0);
        let id = CorrespondenceMap::identity(m.nv());
        let mut bytes = Vec::new();
        id.write_bytes(&mut bytes);
        assert_eq!(String::from_utf8_lossy(&bytes), "0 0\n1 1\n2 2\n3 3\n");
        let back = parse_correspondence_bytes(&bytes, m.nv(), m.nf(), m.nv()).unwrap();
        assert_eq!(back, id);
    }

    #[test]
    fn barycentric_line_echoes_format() {
        let m = synth::icosphere(1.0, 1); // 42 vertices, 80 faces
        let mut text = String::new();
        for j in 0..m.nv() {
            if j == 7 {
                text.push_str("7 12 0.2 0.3 0.5\n");
            } else {
                text.push_str(&format!("{j} {j}\n"));
            }
        }
        let c = parse_correspondence_bytes(text.as_bytes(), m.nv(), m.nf(), m.nv()).unwrap();
        assert_eq!(
            c.get(7),
            &NullRef::Barycentric {
                face: 12,
                weights: [0.2, 0.3, 0.5]
            }
        );
        // Largest weight wins the vertex resolution.
        assert_eq!(c.resolve_vertex(&m, 7), Some(m.face(12)[2]));
        let p = c.resolve_point(&m, 7).unwrap();
        let [a, b, cc] = m.face(12);
        let expect = m.position(a).coords * 0.2
            + m.position(b).coords * 0.3
            + m.position(cc).coords * 0.5;
        assert!((p.coords - expect).norm() < 1e-15);
        // Write → parse → write is byte-stable.
        let mut once = Vec::new();
        c.write_bytes(&mut once);
        let again = parse_correspondence_bytes(&once, m.nv(), m.nf(), m.nv()).unwrap();
        let mut twice = Vec::new();
        again.write_bytes(&mut twice);
        assert_eq!(once, twice);
    }

    #[test]
    fn equal_weights_resolve_by_canonical_order() {
        let m = synth::tetrahedron(1.0);
        let corners = m.face(0);
        let c = CorrespondenceMap::from_refs(
            vec![NullRef::Barycentric {
                face: 0,
                weights: [0.5, 0.5, 0.0],
            }],
            m.nv(),
            m.nf(),
        )
        .unwrap();
        let want = if m.rank(corners[0]) < m.rank(corners[1]) {
            corners[0]
        } else {
            corners[1]
        };
        assert_eq!(c.resolve_vertex(&m, 0), Some(want));
    }

    #[test]
    fn missing_marker_and_comments() {
        let m = synth::tetrahedron(1.0);
        let text = "# header\n0 0\n1 -1\n2 2 # inline\n\n3 3\n";
        let c = parse_correspondence_bytes(text.as_bytes(), m.nv(), m.nf(), m.nv()).unwrap();
        assert_eq!(c.get(1), &NullRef::Missing);
        assert_eq!(c.resolve_point(&m, 1), None);
        assert_eq!(c.resolve_vertex(&m, 1), None);
        assert_eq!(c.with_groundtruth(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        let nv = 4;
        let nf = 4;
        // Null vertex index == count is out of range.
        assert!(parse_correspondence_bytes(b"0 4\n1 1\n2 2\n3 3\n", nv, nf, 4).is_err());
        // Transformed vertex out of range.
        assert!(parse_correspondence_bytes(b"4 0\n", nv, nf, 4).is_err());
        // Face out of range.
        assert!(
            parse_correspondence_bytes(b"0 9 0.3 0.3 0.4\n1 1\n2 2\n3 3\n", nv, nf, 4).is_err()
        );
        // Count mismatch (vertex 3 missing).
        assert!(parse_correspondence_bytes(b"0 0\n1 1\n2 2\n", nv, nf, 4).is_err());
        // Duplicate vertex.
        assert!(parse_correspondence_bytes(b"0 0\n0 1\n1 1\n2 2\n3 3\n", nv, nf, 4).is_err());
        // Malformed token and wrong field counts.
        assert!(parse_correspondence_bytes(b"zero 0\n", nv, nf, 4).is_err());
        assert!(parse_correspondence_bytes(b"0 1 2\n", nv, nf, 4).is_err());
        // Barycentric weights must sum to 1 and sit above -1e-9.
        assert!(
            parse_correspondence_bytes(b"0 0 0.5 0.2 0.2\n1 1\n2 2\n3 3\n", nv, nf, 4).is_err()
        );
        assert!(
            parse_correspondence_bytes(b"0 0 1.2 -0.2 0.0\n1 1\n2 2\n3 3\n", nv, nf, 4).is_err()
        );
        // Negative null vertex other than -1.
        assert!(parse_correspondence_bytes(b"0 -2\n1 1\n2 2\n3 3\n", nv, nf, 4).is_err());
    }
}
