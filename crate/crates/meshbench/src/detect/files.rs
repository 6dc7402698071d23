//! Plain-text storage for detector output.
//!
//! Feature points: one `vertex response` or `vertex response scale` line
//! per feature. Feature regions: one `stability v1 v2 ...` line per
//! region. `#` starts a comment, blank lines are skipped. Floats print in
//! shortest round-trip form, so write → parse → write is byte-stable
//! (infinite stabilities serialize as `inf`).

use std::fs;
use std::path::Path;

use crate::detect::{FeatureEntry, FeaturePoints, FeatureRegions};
use crate::{Error, Result};

fn strip_comment(raw: &str) -> &str {
    match raw.find('#') {
        Some(p) => &raw[..p],
        None => raw,
    }
}

/// Syntactic parse of a feature-point file; index/response validity is
/// checked later against a concrete mesh. This is the fuzzing entry point.
pub fn parse_feature_points_bytes(bytes: &[u8]) -> Result<Vec<FeatureEntry>> {
    const WHAT: &str = "feature points";
    let err = |line: usize, msg: String| Error::Parse { what: WHAT, line, msg };
    let text = String::from_utf8_lossy(bytes);
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 2 && toks.len() != 3 {
            return Err(err(
                line_no,
                format!("expected `vertex response [scale]`, got {} fields", toks.len()),
            ));
        }
        let vertex: u32 = toks[0]
            .parse()
            .map_err(|_| err(line_no, format!("bad vertex index `{}`", toks[0])))?;
        let response: f64 = toks[1]
            .parse()
            .map_err(|_| err(line_no, format!("bad response `{}`", toks[1])))?;
        let scale = match toks.get(2) {
            Some(tok) => Some(
                tok.parse::<f64>()
                    .map_err(|_| err(line_no, format!("bad scale `{tok}`")))?,
            ),
            None => None,
        };
        entries.push(FeatureEntry { vertex, response, scale });
    }
    Ok(entries)
}

/// Syntactic parse of a feature-region file (the fuzzing entry point).
pub fn parse_feature_regions_bytes(bytes: &[u8]) -> Result<Vec<(f64, Vec<u32>)>> {
    const WHAT: &str = "feature regions";
    let err = |line: usize, msg: String| Error::Parse { what: WHAT, line, msg };
    let text = String::from_utf8_lossy(bytes);
    let mut regions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 2 {
            return Err(err(line_no, "region line needs a stability and at least one vertex".into()));
        }
        let stability: f64 = toks[0]
            .parse()
            .map_err(|_| err(line_no, format!("bad stability `{}`", toks[0])))?;
        let mut verts = Vec::with_capacity(toks.len() - 1);
        for tok in &toks[1..] {
            let v: u32 = tok
                .parse()
                .map_err(|_| err(line_no, format!("bad vertex index `{tok}`")))?;
            verts.push(v);
        }
        regions.push((stability, verts));
    }
    Ok(regions)
}

pub fn feature_points_to_bytes(points: &FeaturePoints) -> Vec<u8> {
    use std::fmt::Write;
    let mut s = String::with_capacity(points.len() * 24);
    for e in points.entries() {
        match e.scale {
            Some(sc) => writeln!(s, "{} {} {}", e.vertex, e.response, sc).unwrap(),
            None => writeln!(s, "{} {}", e.vertex, e.response).unwrap(),
        }
    }
    s.into_bytes()
}

pub fn feature_regions_to_bytes(regions: &FeatureRegions) -> Vec<u8> {
    use std::fmt::Write;
    let mut s = String::new();
    for r in regions.regions() {
        write!(s, "{}", r.stability).unwrap();
        for v in &r.vertices {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s.into_bytes()
}

pub fn save_feature_points(path: impl AsRef<Path>, points: &FeaturePoints) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, feature_points_to_bytes(points)).map_err(|e| Error::io(path, e))
}

/// Loads and validates against a mesh with `nv` vertices.
pub fn load_feature_points(path: impl AsRef<Path>, nv: usize) -> Result<FeaturePoints> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeaturePoints::new(parse_feature_points_bytes(&bytes)?, nv)
}

pub fn save_feature_regions(path: impl AsRef<Path>, regions: &FeatureRegions) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, feature_regions_to_bytes(regions)).map_err(|e| Error::io(path, e))
}

/// Loads and validates against a mesh with `nv` vertices.
pub fn load_feature_regions(path: impl AsRef<Path>, nv: usize) -> Result<FeatureRegions> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureRegions::new(parse_feature_regions_bytes(&bytes)?, nv)
}
