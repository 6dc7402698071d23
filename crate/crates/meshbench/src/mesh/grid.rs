//! Uniform-grid acceleration for Euclidean ball queries over mesh vertices.

use std::collections::HashMap;

use nalgebra::Point3;

use crate::TriMesh;

/// Hash grid over the bounding box. Queries with radius ≤ cell size touch
/// only the 27 surrounding cells; larger radii widen the scan accordingly.
pub(crate) struct SpatialGrid {
    cell: f64,
    origin: Point3<f64>,
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl SpatialGrid {
    pub(crate) fn new(mesh: &TriMesh, cell: f64) -> SpatialGrid {
        let (origin, _) = mesh.bbox();
        let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for v in 0..mesh.nv() as u32 {
            let k = Self::key(&origin, cell, &mesh.position(v));
            buckets.entry(k).or_default().push(v);
        }
        SpatialGrid { cell, origin, buckets }
    }

    fn key(origin: &Point3<f64>, cell: f64, p: &Point3<f64>) -> (i64, i64, i64) {
        (
            ((p.x - origin.x) / cell).floor() as i64,
            ((p.y - origin.y) / cell).floor() as i64,
            ((p.z - origin.z) / cell).floor() as i64,
        )
    }

    /// All vertices within `radius` of vertex `center` (inclusive),
    /// appended to `out` in bucket order — callers needing a canonical
    /// order must sort.
    pub(crate) fn within(&self, mesh: &TriMesh, center: u32, radius: f64, out: &mut Vec<u32>) {
        out.clear();
        let p = mesh.position(center);
        let (cx, cy, cz) = Self::key(&self.origin, self.cell, &p);
        let reach = (radius / self.cell).ceil().max(1.0) as i64;
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy, cz + dz)) else {
                        continue;
                    };
                    for &u in bucket {
                        if (mesh.position(u) - p).norm() <= radius {
                            out.push(u);
                        }
                    }
                }
            }
        }
    }
}
