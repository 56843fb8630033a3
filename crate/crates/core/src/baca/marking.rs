//! Dörfler marking.

use crate::scalar::Scalar;

/// Smallest set `M` with `Σ_{b∈M} c_b² ≥ θ² Σ_b c_b²`, taking the largest
/// contributions first (ties go to the smaller index). Zero contributions are
/// never marked; an all-zero input gives an empty set.
pub fn mark_doerfler<T: Scalar>(contributions: &[T], theta: T) -> Vec<usize> {
    let mut order: Vec<usize> = (0..contributions.len())
        .filter(|&i| contributions[i] > T::zero())
        .collect();
    let sq = |i: usize| contributions[i] * contributions[i];
    order.sort_by(|&a, &b| {
        sq(b)
            .partial_cmp(&sq(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let total: T = order.iter().map(|&i| sq(i)).sum();
    let threshold = theta * theta * total;
    let mut acc = T::zero();
    for (len, &i) in order.iter().enumerate() {
        acc = acc + sq(i);
        if acc >= threshold {
            order.truncate(len + 1);
            return order;
        }
    }
    order
}
