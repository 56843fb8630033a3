//! Closed triangulated surfaces used as piecewise-constant Galerkin panels.

mod icosphere;
mod off;
mod refine;

use std::collections::HashMap;

pub use icosphere::{generate_icosphere, MAX_ICOSPHERE_LEVEL};
pub use off::{load_off, read_off, save_off, write_off};
pub use refine::{refine_region, MAX_REFINE_ROUNDS};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Vec3};
use crate::scalar::Scalar;

/// Analytic surface a mesh approximates; refinement projects new vertices
/// back onto it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface<T> {
    /// No analytic surface: new vertices stay on the flat panels.
    Polyhedral,
    Sphere { radius: T },
    Ellipsoid { semiaxes: Vec3<T> },
}

impl<T: Scalar> Surface<T> {
    pub fn project(&self, p: Vec3<T>) -> Vec3<T> {
        match *self {
            Surface::Polyhedral => p,
            Surface::Sphere { radius } => p.normalized().scale(radius),
            Surface::Ellipsoid { semiaxes } => {
                let unit = Vec3::new(p.x / semiaxes.x, p.y / semiaxes.y, p.z / semiaxes.z);
                unit.normalized().component_mul(semiaxes)
            }
        }
    }
}

/// Triangulated closed surface. Triangles are oriented counter-clockwise
/// when seen from outside, so `(b - a) x (c - a)` is an outward normal.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh<T> {
    vertices: Vec<Vec3<T>>,
    triangles: Vec<[usize; 3]>,
    surface: Surface<T>,
}

/// Per-edge local frame of a flat panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFrame<T> {
    pub start: Vec3<T>,
    pub end: Vec3<T>,
    /// Unit tangent from `start` to `end`.
    pub tangent: Vec3<T>,
    /// Unit in-plane normal pointing away from the panel.
    pub outward: Vec3<T>,
    pub length: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PanelGeometry<T> {
    pub vertices: [Vec3<T>; 3],
    pub area: T,
    pub centroid: Vec3<T>,
    pub unit_normal: Vec3<T>,
    /// Longest edge length.
    pub diameter: T,
    pub edge_frames: [EdgeFrame<T>; 3],
}

impl<T: Scalar> PanelGeometry<T> {
    pub fn from_vertices(v: [Vec3<T>; 3]) -> Result<Self> {
        let cross = (v[1] - v[0]).cross(v[2] - v[0]);
        let twice_area = cross.norm();
        let scale = (v[1] - v[0]).norm().max((v[2] - v[0]).norm());
        if !(twice_area > T::epsilon() * scale * scale) {
            return Err(Error::Geometry(format!(
                "triangle with vertices {:?} has zero area",
                v.map(|p| p.to_f64())
            )));
        }
        let unit_normal = cross.scale(T::one() / twice_area);
        let third = T::one() / T::lit(3.0);
        let centroid = (v[0] + v[1] + v[2]).scale(third);
        let frame = |a: Vec3<T>, b: Vec3<T>| {
            let d = b - a;
            let length = d.norm();
            let tangent = d.scale(T::one() / length);
            EdgeFrame {
                start: a,
                end: b,
                tangent,
                outward: tangent.cross(unit_normal),
                length,
            }
        };
        let edge_frames = [frame(v[0], v[1]), frame(v[1], v[2]), frame(v[2], v[0])];
        let diameter = edge_frames
            .iter()
            .fold(T::zero(), |m, e| m.max(e.length));
        Ok(Self {
            vertices: v,
            area: twice_area / T::lit(2.0),
            centroid,
            unit_normal,
            diameter,
            edge_frames,
        })
    }

    /// Physical point at barycentric coordinates `b`.
    pub fn point(&self, b: &[T; 3]) -> Vec3<T> {
        self.vertices[0].scale(b[0]) + self.vertices[1].scale(b[1]) + self.vertices[2].scale(b[2])
    }

    /// Splits the panel into four congruent children (1 -> 4).
    pub fn subdivide(&self) -> [PanelGeometry<T>; 4] {
        let [a, b, c] = self.vertices;
        let half = T::lit(0.5);
        let ab = (a + b).scale(half);
        let bc = (b + c).scale(half);
        let ca = (c + a).scale(half);
        // Children of a non-degenerate triangle are non-degenerate.
        let mk = |v| Self::from_vertices(v).expect("child of a valid panel");
        [mk([a, ab, ca]), mk([ab, b, bc]), mk([ca, bc, c]), mk([ab, bc, ca])]
    }
}

impl<T: Scalar> TriMesh<T> {
    /// Builds a mesh and validates indices and panel areas.
    pub fn new(vertices: Vec<Vec3<T>>, triangles: Vec<[usize; 3]>, surface: Surface<T>) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
            surface,
        };
        let nv = mesh.vertices.len();
        for (i, t) in mesh.triangles.iter().enumerate() {
            if let Some(&bad) = t.iter().find(|&&k| k >= nv) {
                return Err(Error::Precondition(format!(
                    "triangle {i} references vertex {bad} but only {nv} vertices exist"
                )));
            }
            mesh.panel_geometry(i)?;
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn surface(&self) -> Surface<T> {
        self.surface
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of panels `N`.
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn panel_geometry(&self, i: usize) -> Result<PanelGeometry<T>> {
        let t = self.triangles.get(i).ok_or_else(|| {
            Error::Precondition(format!("panel {i} out of range (N = {})", self.triangles.len()))
        })?;
        PanelGeometry::from_vertices(t.map(|k| self.vertices[k]))
    }

    /// Geometry of every panel, in panel order.
    pub fn panel_geometries(&self) -> Result<Vec<PanelGeometry<T>>> {
        (0..self.num_triangles()).map(|i| self.panel_geometry(i)).collect()
    }

    pub fn bounding_box(&self) -> BoundingBox<T> {
        let mut b = BoundingBox::empty();
        for &v in &self.vertices {
            b.include(v);
        }
        b
    }

    pub fn total_area(&self) -> T {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|k| self.vertices[k]);
                (b - a).cross(c - a).norm() / T::lit(2.0)
            })
            .sum()
    }

    /// Signed volume enclosed by the surface; positive for outward normals.
    pub fn signed_volume(&self) -> T {
        let sixth = T::one() / T::lit(6.0);
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|k| self.vertices[k]);
                a.dot(b.cross(c)) * sixth
            })
            .sum()
    }

    /// Verifies that every edge is shared by exactly two triangles that
    /// traverse it in opposite directions.
    pub fn check_closed(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                if let Some(prev) = directed.insert(e, i) {
                    return Err(Error::Geometry(format!(
                        "directed edge {e:?} used by triangles {prev} and {i}"
                    )));
                }
            }
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(Error::Geometry(format!("edge ({a}, {b}) is a boundary edge")));
            }
        }
        Ok(())
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        let mut edges = std::collections::HashSet::with_capacity(3 * self.triangles.len() / 2);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// Scales a mesh whose vertices lie on the unit sphere onto the ellipsoid
    /// with the given semi-axes.
    pub fn map_to_ellipsoid(&self, semiaxes: [T; 3]) -> Result<Self> {
        let tol = T::lit(1e-9);
        if let Some((k, v)) = self
            .vertices
            .iter()
            .enumerate()
            .find(|(_, v)| (v.norm() - T::one()).abs() > tol)
        {
            return Err(Error::Precondition(format!(
                "vertex {k} at radius {} is not on the unit sphere",
                v.norm()
            )));
        }
        if semiaxes.iter().any(|&a| !(a > T::zero())) {
            return Err(Error::Precondition("semi-axes must be positive".into()));
        }
        let axes = Vec3::new(semiaxes[0], semiaxes[1], semiaxes[2]);
        Ok(Self {
            vertices: self.vertices.iter().map(|v| v.component_mul(axes)).collect(),
            triangles: self.triangles.clone(),
            surface: Surface::Ellipsoid { semiaxes: axes },
        })
    }

    /// Same connectivity and coordinates, with a different surface tag.
    pub fn with_surface(mut self, surface: Surface<T>) -> Self {
        self.surface = surface;
        self
    }
}

/// Convenience wrapper matching the free-function style of the other
/// mesh operations.
pub fn map_to_ellipsoid<T: Scalar>(mesh: &TriMesh<T>, semiaxes: [T; 3]) -> Result<TriMesh<T>> {
    mesh.map_to_ellipsoid(semiaxes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_geometry() {
        let v = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let g = PanelGeometry::<f64>::from_vertices(v).unwrap();
        assert_eq!(g.area, 0.5);
        assert_eq!(g.unit_normal, Vec3::new(0.0, 0.0, 1.0));
        let flipped = PanelGeometry::<f64>::from_vertices([v[0], v[2], v[1]]).unwrap();
        assert_eq!(flipped.unit_normal, Vec3::new(0.0, 0.0, -1.0));
        // outward edge normal of the bottom edge points to -y
        assert_eq!(g.edge_frames[0].outward, Vec3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn equilateral_centroid_is_vertex_average() {
        let h = 3f64.sqrt() / 2.0;
        let v = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(0.5, h, 1.0),
        ];
        let g = PanelGeometry::from_vertices(v).unwrap();
        let avg = (v[0] + v[1] + v[2]).scale(1.0 / 3.0);
        assert!((g.centroid - avg).norm() < 1e-15);
        assert!((g.unit_normal.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let v = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        assert!(matches!(
            PanelGeometry::<f64>::from_vertices(v),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn panel_index_out_of_range() {
        let m = generate_icosphere::<f64>(0, 1.0).unwrap();
        assert!(m.panel_geometry(20).is_err());
    }

    #[test]
    fn ellipsoid_identity_and_surface_equation() {
        let s = generate_icosphere::<f64>(3, 1.0).unwrap();
        let same = s.map_to_ellipsoid([1.0, 1.0, 1.0]).unwrap();
        assert_eq!(same.vertices(), s.vertices());
        assert_eq!(same.triangles(), s.triangles());

        let e = s.map_to_ellipsoid([1.0, 1.0, 3.0]).unwrap();
        for v in e.vertices() {
            let f = v.x * v.x + v.y * v.y + v.z * v.z / 9.0;
            assert!((f - 1.0).abs() < 1e-9);
        }
        e.check_closed().unwrap();
        assert!(e.signed_volume() > 0.0);
    }

    #[test]
    fn ellipsoid_stretch_doubles_volume() {
        let s = generate_icosphere::<f64>(2, 1.0).unwrap();
        let v1 = s.signed_volume();
        let v2 = s.map_to_ellipsoid([2.0, 1.0, 1.0]).unwrap().signed_volume();
        assert!((v2 / v1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_requires_unit_sphere() {
        let s = generate_icosphere::<f64>(1, 2.0).unwrap();
        assert!(matches!(
            s.map_to_ellipsoid([1.0, 1.0, 3.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ellipsoid_projection_lands_on_surface() {
        let surf = Surface::Ellipsoid {
            semiaxes: Vec3::<f64>::new(1.0, 2.0, 3.0),
        };
        let p = surf.project(Vec3::new(0.3, -0.7, 2.0));
        let f = p.x * p.x + p.y * p.y / 4.0 + p.z * p.z / 9.0;
        assert!((f - 1.0).abs() < 1e-14);
    }
}
