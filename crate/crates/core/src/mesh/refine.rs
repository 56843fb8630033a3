use std::collections::{HashMap, HashSet};

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Scalar;

pub const MAX_REFINE_ROUNDS: usize = 6;

/// Locally refines the triangles whose centroid satisfies `predicate`.
///
/// Each round splits marked triangles 1 -> 4. Closure: a triangle with two
/// or more split edges is itself split 1 -> 4 (repeated until stable); a
/// triangle with exactly one split edge is bisected through that edge's
/// midpoint. New vertices are projected onto the mesh's analytic surface.
pub fn refine_region<T, F>(mesh: &TriMesh<T>, predicate: F, rounds: usize) -> Result<TriMesh<T>>
where
    T: Scalar,
    F: Fn(Vec3<T>) -> bool,
{
    if rounds > MAX_REFINE_ROUNDS {
        return Err(Error::Size {
            what: "refinement rounds",
            value: rounds,
            limit: MAX_REFINE_ROUNDS,
        });
    }
    mesh.check_closed()?;
    let mut vertices = mesh.vertices.clone();
    let mut triangles = mesh.triangles.clone();
    for _ in 0..rounds {
        triangles = refine_once(&mut vertices, &triangles, &predicate, &mesh.surface);
    }
    TriMesh::new(vertices, triangles, mesh.surface)
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn refine_once<T, F>(
    vertices: &mut Vec<Vec3<T>>,
    triangles: &[[usize; 3]],
    predicate: &F,
    surface: &super::Surface<T>,
) -> Vec<[usize; 3]>
where
    T: Scalar,
    F: Fn(Vec3<T>) -> bool,
{
    let third = T::one() / T::lit(3.0);
    let mut red: Vec<bool> = triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|k| vertices[k]);
            predicate((a + b + c).scale(third))
        })
        .collect();
    if !red.iter().any(|&r| r) {
        return triangles.to_vec();
    }

    let mut split: HashSet<(usize, usize)> = HashSet::new();
    loop {
        for (t, _) in triangles.iter().zip(&red).filter(|(_, &r)| r) {
            for k in 0..3 {
                split.insert(edge_key(t[k], t[(k + 1) % 3]));
            }
        }
        let mut changed = false;
        for (t, r) in triangles.iter().zip(red.iter_mut()) {
            if *r {
                continue;
            }
            let n_split = (0..3)
                .filter(|&k| split.contains(&edge_key(t[k], t[(k + 1) % 3])))
                .count();
            if n_split >= 2 {
                *r = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::with_capacity(split.len());
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3<T>>| {
        *midpoints.entry(edge_key(a, b)).or_insert_with(|| {
            let m = (vertices[a] + vertices[b]).scale(T::lit(0.5));
            vertices.push(surface.project(m));
            vertices.len() - 1
        })
    };

    let mut out = Vec::with_capacity(triangles.len() * 2);
    for (&[a, b, c], &is_red) in triangles.iter().zip(&red) {
        if is_red {
            let ab = mid(a, b, vertices);
            let bc = mid(b, c, vertices);
            let ca = mid(c, a, vertices);
            out.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            continue;
        }
        let tri = [a, b, c];
        match (0..3).find(|&k| split.contains(&edge_key(tri[k], tri[(k + 1) % 3]))) {
            Some(k) => {
                let (p, q, r) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let m = mid(p, q, vertices);
                out.push([p, m, r]);
                out.push([m, q, r]);
            }
            None => out.push(tri),
        }
    }
    out
}
