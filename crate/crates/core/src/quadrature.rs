//! Quadrature rules on the reference triangle and the unit interval.
//!
//! Triangle rules are stored in barycentric coordinates with weights that sum
//! to one, so integrating over a physical triangle multiplies by its area.

use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct TriangleRule<T> {
    /// Barycentric coordinates of each node.
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Scalar> TriangleRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid() -> Self {
        let third = T::one() / T::lit(3.0);
        Self {
            points: vec![[third; 3]],
            weights: vec![T::one()],
        }
    }

    /// 7-point rule exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s15 = T::lit(15.0).sqrt();
        let c = |x: f64| T::lit(x);
        let a1 = (c(9.0) - c(2.0) * s15) / c(21.0);
        let b1 = (c(6.0) + s15) / c(21.0);
        let w1 = (c(155.0) + s15) / c(1200.0);
        let a2 = (c(9.0) + c(2.0) * s15) / c(21.0);
        let b2 = (c(6.0) - s15) / c(21.0);
        let w2 = (c(155.0) - s15) / c(1200.0);
        let third = T::one() / c(3.0);
        let mut rule = Self {
            points: vec![[third; 3]],
            weights: vec![c(9.0) / c(40.0)],
        };
        rule.push_orbit3(a1, b1, w1);
        rule.push_orbit3(a2, b2, w2);
        rule
    }

    /// 12-point rule exact for polynomials of degree 6.
    pub fn degree6() -> Self {
        let c = |x: f64| T::lit(x);
        let mut rule = Self {
            points: Vec::with_capacity(12),
            weights: Vec::with_capacity(12),
        };
        rule.push_orbit3(c(0.501426509658179), c(0.249286745170910), c(0.116786275726379));
        rule.push_orbit3(c(0.873821971016996), c(0.063089014491502), c(0.050844906370207));
        let (a, b, d) = (c(0.053145049844817), c(0.310352451033784), c(0.636502499121399));
        let w = c(0.082851075618374);
        for p in [[a, b, d], [a, d, b], [b, a, d], [b, d, a], [d, a, b], [d, b, a]] {
            rule.points.push(p);
            rule.weights.push(w);
        }
        rule
    }

    /// Collapsed (Duffy) tensor Gauss-Legendre rule with `n * n` nodes,
    /// exact for polynomials of degree `2n - 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        let two = T::lit(2.0);
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                let xi = u;
                let eta = v * (T::one() - u);
                points.push([T::one() - xi - eta, xi, eta]);
                weights.push(two * wu * wv * (T::one() - u));
            }
        }
        Self { points, weights }
    }

    /// Rule selected by polynomial degree; degrees above 6 use a collapsed
    /// Gauss rule of sufficient order.
    pub fn of_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::centroid(),
            2..=5 => Self::degree5(),
            6 => Self::degree6(),
            d => Self::collapsed_gauss(d / 2 + 1),
        }
    }

    fn push_orbit3(&mut self, a: T, b: T, w: T) {
        for p in [[a, b, b], [b, a, b], [b, b, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, 0.0f64);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (
        nodes.into_iter().map(T::lit).collect(),
        weights.into_iter().map(T::lit).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of x^a y^b over the reference triangle, normalised by
    /// its area 1/2: 2 * a! b! / (a+b+2)!.
    fn monomial_mean(a: u32, b: u32) -> f64 {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        2.0 * fact(a) * fact(b) / fact(a + b + 2)
    }

    fn check_rule(rule: &TriangleRule<f64>, degree: u32) {
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-13);
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                    .sum();
                let exact = monomial_mean(a, b);
                assert!(
                    (q - exact).abs() < 1e-12,
                    "degree ({a},{b}): {q} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn rules_integrate_polynomials_exactly() {
        check_rule(&TriangleRule::centroid(), 1);
        check_rule(&TriangleRule::degree5(), 5);
        check_rule(&TriangleRule::degree6(), 6);
        check_rule(&TriangleRule::collapsed_gauss(6), 10);
    }

    #[test]
    fn gauss_legendre_matches_moments() {
        let (x, w) = gauss_legendre::<f64>(5);
        for k in 0..10 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_precision_rule_is_normalised() {
        let r = TriangleRule::<f32>::degree6();
        let s: f32 = r.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-6);
    }
}
