use std::collections::HashMap;

use super::{Surface, TriMesh};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Scalar;

/// Largest subdivision level accepted by [`generate_icosphere`].
pub const MAX_ICOSPHERE_LEVEL: usize = 7;

/// Icosahedron subdivided `level` times (1 -> 4 splits) with vertices
/// projected onto the sphere of the given radius.
///
/// The base icosahedron has vertices at cyclic permutations of
/// `(0, ±1, ±φ)`, so the mesh is symmetric under each coordinate reflection.
pub fn generate_icosphere<T: Scalar>(level: usize, radius: T) -> Result<TriMesh<T>> {
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(Error::Size {
            what: "icosphere level",
            value: level,
            limit: MAX_ICOSPHERE_LEVEL,
        });
    }
    if !(radius > T::zero()) {
        return Err(Error::Precondition("sphere radius must be positive".into()));
    }
    let phi = (T::one() + T::lit(5.0).sqrt()) / T::lit(2.0);
    let (o, l) = (T::zero(), T::one());
    let raw = [
        (-l, phi, o),
        (l, phi, o),
        (-l, -phi, o),
        (l, -phi, o),
        (o, -l, phi),
        (o, l, phi),
        (o, -l, -phi),
        (o, l, -phi),
        (phi, o, -l),
        (phi, o, l),
        (-phi, o, -l),
        (-phi, o, l),
    ];
    let mut vertices: Vec<Vec3<T>> = raw
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalized().scale(radius))
        .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
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
    // Orient every face outward (the icosahedron is convex and centred).
    for t in &mut triangles {
        let [a, b, c] = t.map(|k| vertices[k]);
        if (b - a).cross(c - a).dot(a + b + c) < T::zero() {
            t.swap(1, 2);
        }
    }
    let surface = Surface::Sphere { radius };
    for _ in 0..level {
        triangles = subdivide_uniform(&mut vertices, &triangles, &surface);
    }
    TriMesh::new(vertices, triangles, surface)
}

fn subdivide_uniform<T: Scalar>(
    vertices: &mut Vec<Vec3<T>>,
    triangles: &[[usize; 3]],
    surface: &Surface<T>,
) -> Vec<[usize; 3]> {
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 3 / 2);
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3<T>>| {
        *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let m = (vertices[a] + vertices[b]).scale(T::lit(0.5));
            vertices.push(surface.project(m));
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(triangles.len() * 4);
    for &[a, b, c] in triangles {
        let ab = mid(a, b, vertices);
        let bc = mid(b, c, vertices);
        let ca = mid(c, a, vertices);
        out.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    out
}
