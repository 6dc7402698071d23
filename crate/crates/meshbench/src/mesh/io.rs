//! ASCII OFF and PLY readers, and a deterministic OFF writer.
//!
//! The byte-slice entry points ([`read_off_bytes`], [`read_ply_bytes`])
//! never panic on malformed input — they are fuzzed — and refuse to
//! preallocate unbounded memory from hostile header counts.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Point3;

use crate::{Error, Result, TriMesh};

/// Hard cap on upfront allocation per element table; beyond this the vectors
/// grow on demand so a forged header cannot trigger a huge allocation.
const MAX_PREALLOC: usize = 1 << 20;

/// Loads a mesh, dispatching on the file content (`OFF` magic or `ply`
/// header), falling back to the file extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let head: Vec<u8> = bytes
        .iter()
        .copied()
        .skip_while(|b| b.is_ascii_whitespace())
        .take(3)
        .collect();
    if head.eq_ignore_ascii_case(b"ply") {
        read_ply_bytes(&bytes)
    } else if head.eq_ignore_ascii_case(b"off") {
        read_off_bytes(&bytes)
    } else {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => read_ply_bytes(&bytes),
            _ => read_off_bytes(&bytes),
        }
    }
}

/// Writes a mesh in ASCII OFF.
///
/// Output is byte-deterministic: coordinates are printed with 9 significant
/// digits, and rewriting a just-read file reproduces it exactly.
pub fn write_mesh(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(mesh.nv() * 40 + mesh.nf() * 16);
    write_off_bytes(&mut out, mesh);
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Serializes a mesh as ASCII OFF into `out`.
pub fn write_off_bytes(out: &mut Vec<u8>, mesh: &TriMesh) {
    out.extend_from_slice(b"OFF\n");
    out.extend_from_slice(format!("{} {} 0\n", mesh.nv(), mesh.nf()).as_bytes());
    for p in mesh.positions() {
        out.extend_from_slice(format!("{:.8e} {:.8e} {:.8e}\n", p.x, p.y, p.z).as_bytes());
    }
    for f in mesh.faces() {
        out.extend_from_slice(format!("3 {} {} {}\n", f[0], f[1], f[2]).as_bytes());
    }
}

/// Whitespace tokenizer that strips `#` comments and tracks line numbers.
struct Tokens<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens { rest: text, line: 1 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        loop {
            let mut chars = self.rest.char_indices();
            let mut start = None;
            for (i, c) in &mut chars {
                if c == '\n' {
                    self.line += 1;
                } else if c == '#' {
                    // Skip to end of line.
                    let nl = self.rest[i..].find('\n');
                    match nl {
                        Some(off) => {
                            self.rest = &self.rest[i + off..];
                        }
                        None => {
                            self.rest = "";
                        }
                    }
                    start = None;
                    break;
                } else if !c.is_whitespace() {
                    start = Some(i);
                    break;
                }
            }
            match start {
                Some(s) => {
                    let end = self.rest[s..]
                        .find(|c: char| c.is_whitespace())
                        .map(|o| s + o)
                        .unwrap_or(self.rest.len());
                    let tok = &self.rest[s..end];
                    self.rest = &self.rest[end..];
                    return Some((self.line, tok));
                }
                None => {
                    if self.rest.is_empty() {
                        return None;
                    }
                    if self.rest.starts_with('#') || self.rest.trim().is_empty() {
                        if self.rest.trim().is_empty() {
                            return None;
                        }
                        continue;
                    }
                    continue;
                }
            }
        }
    }
}

fn parse_err(what: &'static str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        what,
        line,
        msg: msg.into(),
    }
}

fn next_usize(t: &mut Tokens, what: &'static str, ctx: &str) -> Result<usize> {
    let (line, tok) = t
        .next()
        .ok_or_else(|| parse_err(what, t.line, format!("unexpected end of file, expected {ctx}")))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(what, line, format!("expected {ctx}, got `{tok}`")))
}

fn next_f64(t: &mut Tokens, what: &'static str, ctx: &str) -> Result<f64> {
    let (line, tok) = t
        .next()
        .ok_or_else(|| parse_err(what, t.line, format!("unexpected end of file, expected {ctx}")))?;
    tok.parse::<f64>()
        .map_err(|_| parse_err(what, line, format!("expected {ctx}, got `{tok}`")))
}

/// Parses an ASCII OFF mesh.
pub fn read_off_bytes(bytes: &[u8]) -> Result<TriMesh> {
    const WHAT: &str = "OFF mesh";
    let text = String::from_utf8_lossy(bytes);
    let mut t = Tokens::new(&text);
    let (line, magic) = t
        .next()
        .ok_or_else(|| parse_err(WHAT, 1, "empty file"))?;
    // Accept `OFF` either alone or glued to the first count (`OFF4`).
    let rest_of_magic = if magic.eq_ignore_ascii_case("off") {
        None
    } else if magic.len() > 3 && magic[..3].eq_ignore_ascii_case("off") {
        Some(&magic[3..])
    } else {
        return Err(parse_err(WHAT, line, format!("missing OFF magic, got `{magic}`")));
    };
    let nv = match rest_of_magic {
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| parse_err(WHAT, line, format!("expected vertex count, got `{s}`")))?,
        None => next_usize(&mut t, WHAT, "vertex count")?,
    };
    let nf = next_usize(&mut t, WHAT, "face count")?;
    let _ne = next_usize(&mut t, WHAT, "edge count")?;

    let mut positions = Vec::with_capacity(nv.min(MAX_PREALLOC));
    for _ in 0..nv {
        let x = next_f64(&mut t, WHAT, "x coordinate")?;
        let y = next_f64(&mut t, WHAT, "y coordinate")?;
        let z = next_f64(&mut t, WHAT, "z coordinate")?;
        positions.push(Point3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf.min(MAX_PREALLOC));
    for _ in 0..nf {
        let k = next_usize(&mut t, WHAT, "face valence")?;
        if k != 3 {
            return Err(parse_err(
                WHAT,
                t.line,
                format!("non-triangular face with {k} corners"),
            ));
        }
        let mut f = [0u32; 3];
        for c in &mut f {
            let idx = next_usize(&mut t, WHAT, "face corner index")?;
            *c = u32::try_from(idx)
                .map_err(|_| parse_err(WHAT, t.line, format!("corner index {idx} out of range")))?;
        }
        faces.push(f);
    }
    TriMesh::new(positions, faces)
}

/// Property layout of the `vertex` element in a PLY header.
struct VertexLayout {
    /// Token offsets of x, y, z within a vertex line.
    xyz: [usize; 3],
    /// Total scalar properties per vertex.
    count: usize,
}

/// Parses an ASCII PLY mesh (positions + triangular faces; other vertex
/// properties are skipped).
pub fn read_ply_bytes(bytes: &[u8]) -> Result<TriMesh> {
    const WHAT: &str = "PLY mesh";
    let text = String::from_utf8_lossy(bytes);

    // --- Header: line-oriented. ---
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(WHAT, 1, "empty file"))?;
    if first.trim() != "ply" {
        return Err(parse_err(WHAT, 1, "missing `ply` magic"));
    }

    let mut nv: Option<usize> = None;
    let mut nf: Option<usize> = None;
    let mut layout: Option<VertexLayout> = None;
    let mut cur_element: Option<String> = None;
    let mut vprops: Vec<String> = Vec::new();
    let mut header_end = 0usize;
    let mut order: Vec<(String, usize)> = Vec::new(); // element order with counts

    for (i, raw) in &mut lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("comment") || line.starts_with("obj_info") {
            continue;
        }
        if line == "end_header" {
            header_end = line_no;
            break;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("format") => {
                let kind = parts.next().unwrap_or("");
                if kind != "ascii" {
                    return Err(parse_err(
                        WHAT,
                        line_no,
                        format!("unsupported format `{kind}` (only ascii)"),
                    ));
                }
            }
            Some("element") => {
                // Close out the previous vertex element's layout.
                if cur_element.as_deref() == Some("vertex") {
                    layout = Some(vertex_layout(&vprops, line_no)?);
                }
                let name = parts
                    .next()
                    .ok_or_else(|| parse_err(WHAT, line_no, "element without a name"))?;
                let count: usize = parts
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(WHAT, line_no, "element without a count"))?;
                match name {
                    "vertex" => nv = Some(count),
                    "face" => nf = Some(count),
                    _ => {}
                }
                order.push((name.to_string(), count));
                cur_element = Some(name.to_string());
                vprops.clear();
            }
            Some("property") => {
                let toks: Vec<&str> = parts.collect();
                match cur_element.as_deref() {
                    Some("vertex") => {
                        if toks.first() == Some(&"list") {
                            return Err(parse_err(WHAT, line_no, "list property on vertex element"));
                        }
                        let name = toks
                            .last()
                            .ok_or_else(|| parse_err(WHAT, line_no, "property without a name"))?;
                        vprops.push((*name).to_string());
                    }
                    Some(_) => {}
                    None => return Err(parse_err(WHAT, line_no, "property before any element")),
                }
            }
            Some(other) => {
                return Err(parse_err(WHAT, line_no, format!("unknown header line `{other}`")));
            }
            None => {}
        }
    }
    if header_end == 0 {
        return Err(parse_err(WHAT, 1, "missing end_header"));
    }
    if cur_element.as_deref() == Some("vertex") && layout.is_none() {
        layout = Some(vertex_layout(&vprops, header_end)?);
    }
    let nv = nv.ok_or_else(|| parse_err(WHAT, header_end, "missing vertex element"))?;
    let nf = nf.ok_or_else(|| parse_err(WHAT, header_end, "missing face element"))?;
    let layout = layout.ok_or_else(|| parse_err(WHAT, header_end, "vertex element lacks x/y/z"))?;

    // --- Body: whitespace tokens, elements in declared order. ---
    let body_start = text
        .match_indices('\n')
        .nth(header_end - 1)
        .map(|(i, _)| i + 1)
        .unwrap_or(text.len());
    let mut t = Tokens::new(&text[body_start..]);

    let mut positions = Vec::with_capacity(nv.min(MAX_PREALLOC));
    let mut faces = Vec::with_capacity(nf.min(MAX_PREALLOC));
    for (name, count) in &order {
        match name.as_str() {
            "vertex" => {
                for _ in 0..*count {
                    let mut vals = [0.0f64; 3];
                    let mut seen = [false; 3];
                    for slot in 0..layout.count {
                        let v = next_f64(&mut t, WHAT, "vertex property")?;
                        for k in 0..3 {
                            if layout.xyz[k] == slot {
                                vals[k] = v;
                                seen[k] = true;
                            }
                        }
                    }
                    debug_assert!(seen.iter().all(|&s| s));
                    positions.push(Point3::new(vals[0], vals[1], vals[2]));
                }
            }
            "face" => {
                for _ in 0..*count {
                    let k = next_usize(&mut t, WHAT, "face valence")?;
                    if k != 3 {
                        return Err(parse_err(
                            WHAT,
                            t.line,
                            format!("non-triangular face with {k} corners"),
                        ));
                    }
                    let mut f = [0u32; 3];
                    for c in &mut f {
                        let idx = next_usize(&mut t, WHAT, "face corner index")?;
                        *c = u32::try_from(idx).map_err(|_| {
                            parse_err(WHAT, t.line, format!("corner index {idx} out of range"))
                        })?;
                    }
                    faces.push(f);
                }
            }
            _ => {
                // Unknown element: cannot know its token width reliably;
                // only trailing unknown elements are tolerated (ignored).
                break;
            }
        }
    }
    if positions.len() != nv || faces.len() != nf {
        return Err(parse_err(WHAT, t.line, "body shorter than declared element counts"));
    }
    TriMesh::new(positions, faces)
}

fn vertex_layout(props: &[String], line: usize) -> Result<VertexLayout> {
    let find = |n: &str| props.iter().position(|p| p == n);
    match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => Ok(VertexLayout {
            xyz: [x, y, z],
            count: props.len(),
        }),
        _ => Err(parse_err(
            "PLY mesh",
            line,
            "vertex element lacks x/y/z properties",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA_OFF: &str = "OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn off_round_trip_is_byte_exact() {
        let m = read_off_bytes(TETRA_OFF.as_bytes()).unwrap();
        assert_eq!(m.nv(), 4);
        assert_eq!(m.nf(), 4);
        let mut once = Vec::new();
        write_off_bytes(&mut once, &m);
        let reread = read_off_bytes(&once).unwrap();
        let mut twice = Vec::new();
        write_off_bytes(&mut twice, &reread);
        assert_eq!(once, twice);
        // Positions survive the 9-significant-digit round trip here exactly
        // because the inputs are short decimals.
        for (a, b) in m.positions().iter().zip(reread.positions()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn off_with_comments_and_inline_counts() {
        let text = "# a comment\nOFF 4 4 0 # trailing\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
        // `OFF 4 4 0` on one line is the compact header variant.
        let m = read_off_bytes(text.as_bytes()).unwrap();
        assert_eq!(m.nv(), 4);
    }

    #[test]
    fn off_rejects_garbage() {
        assert!(read_off_bytes(b"").is_err());
        assert!(read_off_bytes(b"OFX\n1 1 1\n").is_err());
        assert!(read_off_bytes(b"OFF\n4 4 0\n1 2\n").is_err());
        // Non-triangular face.
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(read_off_bytes(quad.as_bytes()).is_err());
        // Out-of-range corner.
        let oob = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n";
        assert!(read_off_bytes(oob.as_bytes()).is_err());
        // Huge forged counts must error out, not OOM.
        assert!(read_off_bytes(b"OFF\n99999999999 1 0\n").is_err());
    }

    #[test]
    fn ply_reads_vertices_with_extra_properties() {
        let text = "ply\nformat ascii 1.0\ncomment made up\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0 255\n1 0 0 255\n0 1 0 255\n3 0 1 2\n";
        let m = read_ply_bytes(text.as_bytes()).unwrap();
        assert_eq!(m.nv(), 3);
        assert_eq!(m.nf(), 1);
        assert_eq!(m.position(1), Point3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn ply_rejects_binary_and_quads() {
        let bin = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(read_ply_bytes(bin.as_bytes()).is_err());
        let quad = "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(read_ply_bytes(quad.as_bytes()).is_err());
    }

    #[test]
    fn load_mesh_dispatches_on_content() {
        let dir = tempfile::tempdir().unwrap();
        let off_path = dir.path().join("shape.off");
        std::fs::write(&off_path, TETRA_OFF).unwrap();
        assert_eq!(load_mesh(&off_path).unwrap().nv(), 4);
        let missing = dir.path().join("nope.off");
        assert!(load_mesh(&missing).is_err());
    }
}
