use super::potential::triangle_potential;
use crate::error::Result;
use crate::geometry::Vec3;
use crate::mesh::{PanelGeometry, TriMesh};
use crate::oracle::EntryOracle;
use crate::quadrature::TriangleRule;
use crate::scalar::Scalar;

/// Polynomial degrees of the triangle rules used in assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureOrders {
    /// Outer rule of the single-layer entries.
    pub slp_outer: usize,
    /// Per-panel rule for the double-layer potential in the right-hand side.
    pub dlp: usize,
    /// Maximum recursive 1 -> 4 subdivision depth of near double-layer panels.
    pub dlp_near_depth: usize,
    /// Rule of the L2 error measure.
    pub error: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        Self {
            slp_outer: 5,
            dlp: 5,
            dlp_near_depth: 3,
            error: 6,
        }
    }
}

/// Entry oracle for `a_ij = ∫_τi ∫_τj S(x - y) ds_y ds_x`.
///
/// The inner integral is evaluated in closed form, the outer one with a
/// fixed Gauss rule on the panel with the smaller index, so `a_ij == a_ji`
/// bit for bit.
#[derive(Clone, Debug)]
pub struct LaplaceSlp<T> {
    panels: Vec<PanelGeometry<T>>,
    /// Outer quadrature nodes per panel and their weights (area included).
    nodes: Vec<Vec<(Vec3<T>, T)>>,
}

impl<T: Scalar> LaplaceSlp<T> {
    pub fn new(mesh: &TriMesh<T>, orders: QuadratureOrders) -> Result<Self> {
        Ok(Self::from_panels(mesh.panel_geometries()?, orders.slp_outer))
    }

    pub fn from_panels(panels: Vec<PanelGeometry<T>>, outer_degree: usize) -> Self {
        let rule = TriangleRule::of_degree(outer_degree);
        let scale = T::one() / (T::lit(4.0) * T::PI());
        let nodes = panels
            .iter()
            .map(|p| {
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(b, &w)| (p.point(b), w * p.area * scale))
                    .collect()
            })
            .collect();
        Self { panels, nodes }
    }

    pub fn panels(&self) -> &[PanelGeometry<T>] {
        &self.panels
    }
}

impl<T: Scalar> EntryOracle<T> for LaplaceSlp<T> {
    fn size(&self) -> usize {
        self.panels.len()
    }

    fn entry(&self, i: usize, j: usize) -> T {
        let (outer, inner) = if i <= j { (i, j) } else { (j, i) };
        let target = &self.panels[inner];
        self.nodes[outer]
            .iter()
            .fold(T::zero(), |acc, &(x, w)| acc + w * triangle_potential(x, target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_icosphere;
    use rand::{Rng, SeedableRng};

    #[test]
    fn symmetric_and_positive() {
        let m = generate_icosphere::<f64>(2, 1.0).unwrap();
        let op = LaplaceSlp::new(&m, QuadratureOrders::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (i, j) = (rng.gen_range(0..320), rng.gen_range(0..320));
            let (a, b) = (op.entry(i, j), op.entry(j, i));
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        for i in 0..320 {
            assert!(op.entry(i, i) > 0.0);
        }
    }

    #[test]
    fn far_pair_matches_multipole_leading_term() {
        let near = PanelGeometry::from_vertices(
            [[0.0, 0.0, 0.0], [0.1, 0.0, 0.0], [0.03, 0.09, 0.0]].map(Vec3::from_f64),
        )
        .unwrap();
        let shift = Vec3::<f64>::new(8.0, 1.0, -2.0);
        let far = PanelGeometry::from_vertices(
            [[0.0, 0.0, 0.0], [0.0, 0.1, 0.02], [0.08, 0.0, 0.05]]
                .map(|v| Vec3::from_f64(v) + shift),
        )
        .unwrap();
        let r = (near.centroid - far.centroid).norm();
        assert!(r / near.diameter.max(far.diameter) >= 50.0);
        let op = LaplaceSlp::from_panels(vec![near.clone(), far.clone()], 5);
        let leading = near.area * far.area / (4.0 * std::f64::consts::PI * r);
        assert!((op.entry(0, 1) / leading - 1.0).abs() < 1e-4);
    }

    #[test]
    fn outer_order_convergence_on_disjoint_pairs() {
        let m = generate_icosphere::<f64>(3, 1.0).unwrap();
        let lo = LaplaceSlp::new(&m, QuadratureOrders::default()).unwrap();
        let hi = LaplaceSlp::from_panels(m.panel_geometries().unwrap(), 10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 50 {
            let (i, j) = (rng.gen_range(0..1280), rng.gen_range(0..1280));
            let (pi, pj) = (&lo.panels()[i], &lo.panels()[j]);
            if (pi.centroid - pj.centroid).norm() < 2.0 * pi.diameter {
                continue;
            }
            let (a, b) = (lo.entry(i, j), hi.entry(i, j));
            assert!((a - b).abs() < 1e-6 * b.abs(), "pair ({i},{j}): {a} vs {b}");
            checked += 1;
        }
    }
}
