//! Synthetic test shapes: icospheres, bumpy spheres, planar grids.
//!
//! These are used by the test suites (they have known analytic curvature,
//! spectra, and geodesics) and by the `synth` CLI subcommand so the pipeline
//! can be exercised without external data.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::{Result, TriMesh};

/// Regular tetrahedron on alternating cube corners (edge length `2√2·scale`).
pub fn tetrahedron(scale: f64) -> TriMesh {
    let s = scale;
    let p = vec![
        Point3::new(s, s, s),
        Point3::new(s, -s, -s),
        Point3::new(-s, s, -s),
        Point3::new(-s, -s, s),
    ];
    let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    TriMesh::new(p, f).expect("tetrahedron is a valid mesh")
}

/// Icosphere: subdivided icosahedron projected onto a sphere.
///
/// `subdivisions = s` gives `10·4^s + 2` vertices (0 → 12, 3 → 642,
/// 4 → 2562, 5 → 10242). Faces wind counter-clockwise seen from outside.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let mut positions: Vec<Point3<f64>> = raw
        .iter()
        .map(|&(x, y, z)| {
            let v = Vector3::new(x, y, z).normalize() * radius;
            Point3::from(v)
        })
        .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0u32; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (positions[a as usize].coords + positions[b as usize].coords) / 2.0;
                    positions.push(Point3::from(m.normalize() * radius));
                    (positions.len() - 1) as u32
                });
            }
            next_faces.push([f[0], mid[0], mid[2]]);
            next_faces.push([f[1], mid[1], mid[0]]);
            next_faces.push([f[2], mid[2], mid[1]]);
            next_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = next_faces;
    }
    TriMesh::new(positions, faces).expect("icosphere is a valid mesh")
}

/// Icosphere with a smooth deterministic radial perturbation; a sphere is a
/// degenerate detector input (constant curvature), this is not.
///
/// The displacement is `amplitude · radius · g(unit position)` along the
/// radial direction with a fixed band-limited `g`, so the shape is identical
/// across runs and stays star-shaped for `amplitude ≲ 0.3`.
pub fn bumpy_sphere(radius: f64, subdivisions: u32, amplitude: f64) -> TriMesh {
    let base = icosphere(radius, subdivisions);
    let positions = base
        .positions()
        .iter()
        .map(|p| {
            let u = p.coords / radius;
            let g = (3.0 * u.x + 0.9).sin() * (2.0 * u.y - 0.4).sin() + 0.6 * (2.6 * u.z).cos();
            let r = radius * (1.0 + amplitude * 0.5 * g);
            Point3::from(u * r)
        })
        .collect();
    base.with_positions(positions)
        .expect("bumpy sphere is a valid mesh")
}

/// Planar grid of `nx × ny` vertices in the z=0 plane with the given
/// spacing.
///
/// Cells are split along the anti-diagonal (`(i+1,j)–(i,j+1)`), so the main
/// corner-to-corner direction is *not* an edge path; this is the interesting
/// case for geodesic shortcuts. Normals point to +z.
pub fn plane_grid(nx: usize, ny: usize, spacing: f64) -> TriMesh {
    assert!(nx >= 2 && ny >= 2, "grid needs at least 2x2 vertices");
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            positions.push(Point3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let at = |i: usize, j: usize| (j * nx + i) as u32;
    let mut faces = Vec::with_capacity((nx - 1) * (ny - 1) * 2);
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            faces.push([at(i, j), at(i + 1, j), at(i, j + 1)]);
            faces.push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    TriMesh::new(positions, faces).expect("grid is a valid mesh")
}

/// Planar grid with a smooth height field, for descriptor tests.
///
/// `height(x, y)` is sampled at each grid vertex.
pub fn height_field(
    nx: usize,
    ny: usize,
    spacing: f64,
    height: impl Fn(f64, f64) -> f64,
) -> Result<TriMesh> {
    let flat = plane_grid(nx, ny, spacing);
    let positions = flat
        .positions()
        .iter()
        .map(|p| Point3::new(p.x, p.y, height(p.x, p.y)))
        .collect();
    flat.with_positions(positions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_radius() {
        for (s, nv) in [(0u32, 12usize), (1, 42), (2, 162), (3, 642)] {
            let m = icosphere(2.0, s);
            assert_eq!(m.nv(), nv);
            assert_eq!(m.nf(), 20 * 4usize.pow(s));
            for p in m.positions() {
                assert!((p.coords.norm() - 2.0).abs() < 1e-12);
            }
            assert!(m.is_connected());
            assert_eq!(m.nonmanifold_edges(), 0);
        }
    }

    #[test]
    fn icosphere_is_closed_and_outward() {
        let m = icosphere(1.0, 2);
        for e in 0..m.edges().len() {
            assert!(m.edge_faces(e).iter().all(|&f| f != u32::MAX));
        }
        for v in 0..m.nv() as u32 {
            assert!(m.vertex_normal(v).dot(&m.position(v).coords) > 0.9);
        }
        // Surface area approaches 4*pi from below.
        assert!(m.total_area() < 4.0 * std::f64::consts::PI);
        assert!(m.total_area() > 4.0 * std::f64::consts::PI * 0.97);
    }

    #[test]
    fn grid_structure() {
        let m = plane_grid(10, 10, 1.0);
        assert_eq!(m.nv(), 100);
        assert_eq!(m.nf(), 162);
        assert!((m.diam() - (81.0f64 + 81.0).sqrt()).abs() < 1e-12);
        assert!((m.total_area() - 81.0).abs() < 1e-9);
        for f in 0..m.nf() as u32 {
            assert!(m.face_normal(f).z > 0.99);
        }
    }

    #[test]
    fn bumpy_sphere_is_valid() {
        let m = bumpy_sphere(1.0, 3, 0.12);
        assert_eq!(m.nv(), 642);
        assert!(m.is_connected());
        // Perturbation is genuinely non-spherical.
        let radii: Vec<f64> = m.positions().iter().map(|p| p.coords.norm()).collect();
        let min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = radii.iter().cloned().fold(0.0, f64::max);
        assert!(max - min > 0.05);
    }
}
