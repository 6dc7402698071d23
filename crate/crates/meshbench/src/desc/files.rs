//! Binary descriptor container and CSV export.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic  8 bytes  "MBDESC\0\x01"
//! rows   u64
//! cols   u64
//! kind   u8       0 spin-image, 1 ld-sift, 2 mesh-hog, 3 hks-dense
//! data   rows·cols × f64, row-major
//! bound  rows × u32       only for feature-bound kinds (0–2)
//! ```
//!
//! Dense kinds bind row `v` to vertex `v` implicitly, so they carry no
//! vertex list. The total length is fully determined by the header; any
//! surplus or shortfall is a parse error, which keeps the reader safe on
//! corrupt input.

use std::path::Path;

use crate::desc::{DescriptorBinding, DescriptorKind, DescriptorSet};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"MBDESC\0\x01";

fn kind_code(kind: DescriptorKind) -> u8 {
    match kind {
        DescriptorKind::SpinImage => 0,
        DescriptorKind::LocalDepthSift => 1,
        DescriptorKind::MeshHog => 2,
        DescriptorKind::HksDense => 3,
    }
}

fn kind_from_code(code: u8) -> Option<DescriptorKind> {
    Some(match code {
        0 => DescriptorKind::SpinImage,
        1 => DescriptorKind::LocalDepthSift,
        2 => DescriptorKind::MeshHog,
        3 => DescriptorKind::HksDense,
        _ => return None,
    })
}

pub fn descriptors_to_bytes(set: &DescriptorSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(25 + set.data().len() * 8 + set.rows() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(set.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(set.cols() as u64).to_le_bytes());
    out.push(kind_code(set.kind));
    for x in set.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    if let DescriptorBinding::Features(verts) = &set.binding {
        for v in verts {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse { what: "descriptor file", line: 0, msg: msg.into() }
}

pub fn parse_descriptors_bytes(bytes: &[u8]) -> Result<DescriptorSet> {
    if bytes.len() < 25 {
        return Err(parse_err("shorter than the fixed header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(parse_err("bad magic"));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let kind = kind_from_code(bytes[24]).ok_or_else(|| parse_err("unknown kind code"))?;
    if cols == 0 {
        return Err(parse_err("zero descriptor dimension"));
    }
    let dense = kind == DescriptorKind::HksDense;
    // Do the size arithmetic before allocating anything.
    let cells = rows.checked_mul(cols).ok_or_else(|| parse_err("size overflow"))?;
    let data_bytes = cells.checked_mul(8).ok_or_else(|| parse_err("size overflow"))?;
    let bound_bytes = if dense {
        0
    } else {
        rows.checked_mul(4).ok_or_else(|| parse_err("size overflow"))?
    };
    let expected = 25u64
        .checked_add(data_bytes)
        .and_then(|x| x.checked_add(bound_bytes))
        .ok_or_else(|| parse_err("size overflow"))?;
    if bytes.len() as u64 != expected {
        return Err(parse_err(format!(
            "{} bytes for a {rows}×{cols} set needing {expected}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(cells as usize);
    let mut at = 25usize;
    for _ in 0..cells {
        data.push(f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()));
        at += 8;
    }
    let binding = if dense {
        DescriptorBinding::Dense
    } else {
        let mut verts = Vec::with_capacity(rows as usize);
        for _ in 0..rows {
            verts.push(u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()));
            at += 4;
        }
        DescriptorBinding::Features(verts)
    };
    DescriptorSet::new(kind, binding, cols as usize, data)
        .map_err(|e| parse_err(format!("invalid payload: {e}")))
}

pub fn save_descriptors(path: &Path, set: &DescriptorSet) -> Result<()> {
    std::fs::write(path, descriptors_to_bytes(set)).map_err(|e| Error::io(path, e))
}

pub fn load_descriptors(path: &Path) -> Result<DescriptorSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_descriptors_bytes(&bytes)
}

/// One line per row: the bound vertex (or the row index for dense sets)
/// followed by the descriptor values in shortest round-trip decimal.
pub fn descriptors_to_csv(set: &DescriptorSet) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    out.push_str("vertex");
    for c in 0..set.cols() {
        let _ = write!(out, ",d{c}");
    }
    out.push('\n');
    for i in 0..set.rows() {
        let v = match &set.binding {
            DescriptorBinding::Features(verts) => verts[i] as usize,
            DescriptorBinding::Dense => i,
        };
        let _ = write!(out, "{v}");
        for x in set.row(i) {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feature_set() -> DescriptorSet {
        DescriptorSet::new(
            DescriptorKind::MeshHog,
            DescriptorBinding::Features(vec![9, 2, 77]),
            2,
            vec![0.25, -1.5e-300, 3.7, 0.0, f64::MIN_POSITIVE, 1.0 / 3.0],
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        for set in [
            feature_set(),
            DescriptorSet::new(
                DescriptorKind::HksDense,
                DescriptorBinding::Dense,
                3,
                vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            )
            .unwrap(),
        ] {
            let bytes = descriptors_to_bytes(&set);
            let back = parse_descriptors_bytes(&bytes).unwrap();
            assert_eq!(back.kind, set.kind);
            assert_eq!(back.binding, set.binding);
            assert_eq!(back.cols(), set.cols());
            let bits = |s: &DescriptorSet| s.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&back), bits(&set));
            assert_eq!(descriptors_to_bytes(&back), bytes);
        }
    }

    #[test]
    fn save_and_load_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.desc");
        let set = feature_set();
        save_descriptors(&path, &set).unwrap();
        assert_eq!(load_descriptors(&path).unwrap(), set);
    }

    #[test]
    fn parser_rejects_corrupt_input() {
        let good = descriptors_to_bytes(&feature_set());
        assert!(parse_descriptors_bytes(&good[..10]).is_err(), "truncated header");
        assert!(parse_descriptors_bytes(&good[..good.len() - 1]).is_err(), "truncated body");
        let mut extra = good.clone();
        extra.push(0);
        assert!(parse_descriptors_bytes(&extra).is_err(), "trailing garbage");
        let mut magic = good.clone();
        magic[0] ^= 0xff;
        assert!(parse_descriptors_bytes(&magic).is_err(), "bad magic");
        let mut kind = good.clone();
        kind[24] = 200;
        assert!(parse_descriptors_bytes(&kind).is_err(), "unknown kind");
        let mut huge = good.clone();
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(parse_descriptors_bytes(&huge).is_err(), "overflowing row count");
        let mut nan = good;
        nan[25..33].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(parse_descriptors_bytes(&nan).is_err(), "non-finite entry");
    }

    #[test]
    fn csv_lists_bound_vertices_and_round_trip_values() {
        let set = feature_set();
        let csv = descriptors_to_csv(&set);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("vertex,d0,d1"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "9");
        assert_eq!(first[1].parse::<f64>().unwrap().to_bits(), 0.25f64.to_bits());
        assert_eq!(
            first[2].parse::<f64>().unwrap().to_bits(),
            (-1.5e-300f64).to_bits()
        );
        assert_eq!(csv.lines().count(), 4);
    }
}
