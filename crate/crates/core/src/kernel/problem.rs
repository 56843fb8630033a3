use rayon::prelude::*;

use super::{fundamental_solution, QuadratureOrders};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::{PanelGeometry, TriMesh};
use crate::quadrature::TriangleRule;
use crate::scalar::Scalar;

/// Interior Dirichlet problem with boundary data `g(x) = S(x - p)` for a
/// source point `p` outside the surface; `u(x) = S(x - p)` is then the
/// exact harmonic solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletProblem<T> {
    source: Vec3<T>,
}

impl<T: Scalar> DirichletProblem<T> {
    /// Fails unless `source` lies strictly outside the closed `mesh`.
    pub fn new(mesh: &TriMesh<T>, source: Vec3<T>) -> Result<Self> {
        let w = winding_number(mesh, source);
        if w.abs() > T::lit(0.5) {
            return Err(Error::Precondition(format!(
                "source point {:?} is not outside the surface (winding number {w})",
                source.to_f64()
            )));
        }
        let on_surface = mesh.panel_geometries()?.iter().any(|p| {
            let d = source - p.centroid;
            d.dot(p.unit_normal).abs() < T::epsilon() && d.norm() < p.diameter
        });
        if on_surface {
            return Err(Error::Precondition("source point lies on the surface".into()));
        }
        Ok(Self { source })
    }

    pub fn source(&self) -> Vec3<T> {
        self.source
    }

    /// Dirichlet data `g(x)`.
    pub fn dirichlet(&self, x: Vec3<T>) -> T {
        fundamental_solution(x - self.source)
    }

    pub fn neumann(&self, x: Vec3<T>, n: Vec3<T>) -> T {
        exact_neumann(self, x, n)
    }
}

/// Normal derivative of `u(x) = S(x - p)`: `-n·(x - p) / (4π |x - p|³)`.
pub fn exact_neumann<T: Scalar>(prob: &DirichletProblem<T>, x: Vec3<T>, n: Vec3<T>) -> T {
    let d = x - prob.source;
    let r = d.norm();
    -n.dot(d) / (T::lit(4.0) * T::PI() * r * r * r)
}

/// Winding number of the closed surface around `p` (1 inside, 0 outside),
/// from the sum of signed solid angles.
pub fn winding_number<T: Scalar>(mesh: &TriMesh<T>, p: Vec3<T>) -> T {
    let total: T = mesh
        .triangles()
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|k| mesh.vertices()[k] - p);
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(b.cross(c));
            let den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
            T::lit(2.0) * num.atan2(den)
        })
        .sum();
    total / (T::lit(4.0) * T::PI())
}

/// Precomputed quadrature data of one double-layer source panel.
struct DlpSource<T> {
    centroid: Vec3<T>,
    diameter: T,
    normal: Vec3<T>,
    /// (node, weight · area · g(node) / 4π)
    nodes: Vec<(Vec3<T>, T)>,
}

/// `b_i = ∫_τi (½ g + K g) ds` with `(Kg)(x) = ∫ g(y) ∂_n(y) S(x - y) ds_y`.
///
/// Near source panels (centroid distance below twice their diameter) are
/// subdivided 1 -> 4 recursively up to `orders.dlp_near_depth` levels. The
/// panel containing `x` contributes nothing because the kernel vanishes on
/// its own flat panel.
pub fn assemble_rhs<T: Scalar>(
    mesh: &TriMesh<T>,
    prob: &DirichletProblem<T>,
    orders: QuadratureOrders,
) -> Result<Vec<T>> {
    let panels = mesh.panel_geometries()?;
    let outer = TriangleRule::of_degree(orders.slp_outer);
    let rule = TriangleRule::of_degree(orders.dlp);
    let four_pi = T::lit(4.0) * T::PI();
    let sources: Vec<DlpSource<T>> = panels
        .iter()
        .map(|p| DlpSource {
            centroid: p.centroid,
            diameter: p.diameter,
            normal: p.unit_normal,
            nodes: rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(b, &w)| {
                    let y = p.point(b);
                    (y, w * p.area * prob.dirichlet(y) / four_pi)
                })
                .collect(),
        })
        .collect();
    let half = T::lit(0.5);
    let b = (0..panels.len())
        .into_par_iter()
        .map(|i| {
            let p = &panels[i];
            outer
                .points
                .iter()
                .zip(&outer.weights)
                .map(|(bary, &w)| {
                    let x = p.point(bary);
                    let mut kg = T::zero();
                    for (j, src) in sources.iter().enumerate() {
                        if j == i {
                            continue;
                        }
                        kg = kg + dlp_panel(x, src, &panels[j], &rule, prob, orders.dlp_near_depth);
                    }
                    w * p.area * (half * prob.dirichlet(x) + kg)
                })
                .sum()
        })
        .collect();
    Ok(b)
}

fn dlp_panel<T: Scalar>(
    x: Vec3<T>,
    src: &DlpSource<T>,
    panel: &PanelGeometry<T>,
    rule: &TriangleRule<T>,
    prob: &DirichletProblem<T>,
    depth: usize,
) -> T {
    let near = (x - src.centroid).norm() < T::lit(2.0) * src.diameter;
    if near && depth > 0 {
        return panel
            .subdivide()
            .iter()
            .map(|child| {
                let four_pi = T::lit(4.0) * T::PI();
                let child_src = DlpSource {
                    centroid: child.centroid,
                    diameter: child.diameter,
                    normal: child.unit_normal,
                    nodes: rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(b, &w)| {
                            let y = child.point(b);
                            (y, w * child.area * prob.dirichlet(y) / four_pi)
                        })
                        .collect(),
                };
                dlp_panel(x, &child_src, child, rule, prob, depth - 1)
            })
            .sum();
    }
    src.nodes.iter().fold(T::zero(), |acc, &(y, wg)| {
        let d = x - y;
        let r2 = d.norm_squared();
        acc + wg * d.dot(src.normal) / (r2 * r2.sqrt())
    })
}

/// Relative L2 error `‖ψ_h - ψ‖ / ‖ψ‖` of piecewise-constant Neumann data
/// against the exact normal derivative, integrated panel-wise.
pub fn relative_l2_error<T: Scalar>(
    psi_h: &[T],
    mesh: &TriMesh<T>,
    prob: &DirichletProblem<T>,
    orders: QuadratureOrders,
) -> Result<T> {
    if psi_h.len() != mesh.num_triangles() {
        return Err(Error::Dimension {
            expected: mesh.num_triangles(),
            actual: psi_h.len(),
        });
    }
    let rule = TriangleRule::of_degree(orders.error);
    let mut num = T::zero();
    let mut den = T::zero();
    for (p, &c) in mesh.panel_geometries()?.iter().zip(psi_h) {
        for (b, &w) in rule.points.iter().zip(&rule.weights) {
            let psi = exact_neumann(prob, p.point(b), p.unit_normal);
            num = num + w * p.area * (c - psi) * (c - psi);
            den = den + w * p.area * psi * psi;
        }
    }
    Ok((num / den).sqrt())
}

/// Panel means of the exact Neumann data: the L2-best piecewise-constant
/// approximation.
pub fn panel_means_of_exact<T: Scalar>(
    mesh: &TriMesh<T>,
    prob: &DirichletProblem<T>,
    orders: QuadratureOrders,
) -> Result<Vec<T>> {
    let rule = TriangleRule::of_degree(orders.error);
    Ok(mesh
        .panel_geometries()?
        .iter()
        .map(|p| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(b, &w)| w * exact_neumann(prob, p.point(b), p.unit_normal))
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_icosphere;

    fn p(x: f64) -> Vec3<f64> {
        Vec3::new(x, 0.0, 0.0)
    }

    #[test]
    fn neumann_plug_in() {
        let m = generate_icosphere::<f64>(0, 1.0).unwrap();
        let prob = DirichletProblem::new(&m, p(10.0)).unwrap();
        let v = exact_neumann(&prob, p(1.0), p(1.0));
        assert!((v - 9.0 / (4.0 * std::f64::consts::PI * 729.0)).abs() < 1e-18);
        assert!((v - 9.823e-4).abs() < 1e-6);
        let ortho = exact_neumann(&prob, p(1.0), Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(ortho, 0.0);
    }

    #[test]
    fn source_must_be_outside() {
        let m = generate_icosphere::<f64>(2, 1.0).unwrap();
        assert!(DirichletProblem::new(&m, p(0.5)).is_err());
        assert!(DirichletProblem::new(&m, p(1.05)).is_ok());
        assert!((winding_number(&m, Vec3::zero()) - 1.0).abs() < 1e-12);
        assert!(winding_number(&m, p(3.0)).abs() < 1e-12);
    }

    #[test]
    fn neumann_flux_vanishes() {
        let m = generate_icosphere::<f64>(4, 1.0).unwrap();
        let prob = DirichletProblem::new(&m, p(1.5)).unwrap();
        let rule = TriangleRule::<f64>::collapsed_gauss(8);
        let flux: f64 = m
            .panel_geometries()
            .unwrap()
            .iter()
            .map(|pg| {
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(b, w)| w * pg.area * exact_neumann(&prob, pg.point(b), pg.unit_normal))
                    .sum::<f64>()
            })
            .sum();
        assert!(flux.abs() < 1e-6, "flux {flux}");
    }

    #[test]
    fn zero_solution_has_unit_error() {
        let m = generate_icosphere::<f64>(2, 1.0).unwrap();
        let prob = DirichletProblem::new(&m, p(10.0)).unwrap();
        let e = relative_l2_error(&vec![0.0; 320], &m, &prob, QuadratureOrders::default()).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
        assert!(relative_l2_error(&[0.0; 3], &m, &prob, QuadratureOrders::default()).is_err());
    }

    #[test]
    fn panel_means_are_best_approximation() {
        let m = generate_icosphere::<f64>(2, 1.0).unwrap();
        let prob = DirichletProblem::new(&m, p(1.5)).unwrap();
        let o = QuadratureOrders::default();
        let means = panel_means_of_exact(&m, &prob, o).unwrap();
        let best = relative_l2_error(&means, &m, &prob, o).unwrap();
        for k in [0usize, 17, 200] {
            for delta in [1e-3, -1e-3] {
                let mut other = means.clone();
                other[k] += delta;
                assert!(relative_l2_error(&other, &m, &prob, o).unwrap() > best);
            }
        }
    }

    #[test]
    fn constant_data_gives_vanishing_rhs() {
        // (½ + K)1 = 0 on a closed surface with outward normals, so for
        // g ≡ const the load vector vanishes up to quadrature error.
        let m = generate_icosphere::<f64>(3, 1.0).unwrap();
        // A very distant source makes g nearly constant on the sphere.
        let prob = DirichletProblem::new(&m, p(1e6)).unwrap();
        let b = assemble_rhs(&m, &prob, QuadratureOrders::default()).unwrap();
        let g0 = prob.dirichlet(Vec3::zero());
        for (bi, pg) in b.iter().zip(m.panel_geometries().unwrap()) {
            assert!(bi.abs() < 1e-2 * g0 * pg.area, "{bi} vs {}", g0 * pg.area);
        }
    }

    #[test]
    fn rhs_depends_on_source() {
        let m = generate_icosphere::<f64>(2, 1.0).unwrap();
        let o = QuadratureOrders::default();
        let b1 = assemble_rhs(&m, &DirichletProblem::new(&m, p(10.0)).unwrap(), o).unwrap();
        let b4 = assemble_rhs(&m, &DirichletProblem::new(&m, p(1.05)).unwrap(), o).unwrap();
        let diff: f64 = b1.iter().zip(&b4).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff > 1e-3);
    }

    #[test]
    fn reflected_source_permutes_rhs() {
        let m = generate_icosphere::<f64>(2, 1.0).unwrap();
        let o = QuadratureOrders::default();
        let panels = m.panel_geometries().unwrap();
        // Map each panel to its mirror image under x ↦ -x.
        let mirror: Vec<usize> = panels
            .iter()
            .map(|pg| {
                let c = Vec3::new(-pg.centroid.x, pg.centroid.y, pg.centroid.z);
                panels
                    .iter()
                    .position(|q| (q.centroid - c).norm() < 1e-12)
                    .expect("mesh is mirror symmetric")
            })
            .collect();
        let b = assemble_rhs(&m, &DirichletProblem::new(&m, p(1.5)).unwrap(), o).unwrap();
        let br = assemble_rhs(&m, &DirichletProblem::new(&m, p(-1.5)).unwrap(), o).unwrap();
        for (i, &j) in mirror.iter().enumerate() {
            assert!((b[i] - br[j]).abs() < 1e-10 * b[i].abs().max(1e-8), "{i}->{j}");
        }
    }
}
