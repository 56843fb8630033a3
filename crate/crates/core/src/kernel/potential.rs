//! Closed-form potential of a constant unit density on a flat triangle.

use crate::geometry::Vec3;
use crate::mesh::PanelGeometry;
use crate::scalar::Scalar;

/// `∫_T 1/|x - y| ds_y` for any observation point `x`, by the edge
/// decomposition formula
///
/// `Σ_e t0 ln((R⁺ + s⁺)/(R⁻ + s⁻)) - |h| [atan(t0 s⁺ / (R0² + |h| R⁺)) - atan(t0 s⁻ / (R0² + |h| R⁻))]`
///
/// where `h` is the signed height of `x` over the panel plane, and for each
/// edge `t0` is the signed in-plane distance of the projected point to the
/// edge line, `s±` the edge endpoints' tangential coordinates and `R±` their
/// distances to `x`.
pub fn triangle_potential<T: Scalar>(x: Vec3<T>, panel: &PanelGeometry<T>) -> T {
    let n = panel.unit_normal;
    let h = (x - panel.vertices[0]).dot(n);
    let abs_h = h.abs();
    let rho = x - n.scale(h);
    let mut sum = T::zero();
    for e in &panel.edge_frames {
        let d = e.start - rho;
        let t0 = d.dot(e.outward);
        let r0_sq = t0 * t0 + h * h;
        if t0 == T::zero() || r0_sq == T::zero() {
            continue;
        }
        let s_minus = d.dot(e.tangent);
        let s_plus = s_minus + e.length;
        let r_minus = (e.start - x).norm();
        let r_plus = (e.end - x).norm();
        // R + s without cancellation: (R + s)(R - s) = R0².
        let stable = |r: T, s: T| {
            if s >= T::zero() {
                r + s
            } else {
                r0_sq / (r - s)
            }
        };
        let log_term = (stable(r_plus, s_plus) / stable(r_minus, s_minus)).ln();
        let mut term = t0 * log_term;
        if abs_h > T::zero() {
            let a_plus = (t0 * s_plus / (r0_sq + abs_h * r_plus)).atan();
            let a_minus = (t0 * s_minus / (r0_sq + abs_h * r_minus)).atan();
            term = term - abs_h * (a_plus - a_minus);
        }
        sum = sum + term;
    }
    sum
}
