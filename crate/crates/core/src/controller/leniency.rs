//! Leniency: actors may move inside an ellipse around their required point
//! without moving the camera.
//!
//! Each tracked point `p^T` is smoothed into an augmented point `p^A` by a
//! scalar Kalman filter per axis whose process variance `h` grows with the
//! distance between `p^A` (previous tick) and `p^T`. Inside the ellipse `h`
//! is tiny and `p^A` barely moves; outside it saturates at `eta`.

use serde::Serialize;

use crate::filter::ScalarKalman;
use crate::geometry::ScreenPoint;
use crate::script::R_MIN;

/// Default process-variance caps `(eta_x, eta_y)`.
pub const DEFAULT_ETA: [f64; 2] = [0.05, 0.01];

/// Curve parameters for one screen axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AxisCurve {
    /// Agnostic gap: distance at which the exponential reaches 1.
    pub a: f64,
    /// Zero-error lift.
    pub v: f64,
    /// Curve profile (steepness).
    pub q: f64,
}

impl AxisCurve {
    pub fn from_radius(r: f64) -> Self {
        let r = r.max(R_MIN);
        AxisCurve { a: 1.2 * r - 0.005, v: 42.0 * (r - 0.5).powi(8), q: 20.0 / (r + 0.01) }
    }

    /// Fraction of `eta` used at discrepancy `d`.
    pub fn level(&self, d: f64) -> f64 {
        ((self.q * (d - self.a)).exp() + self.v).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeniencyCurve {
    pub x: AxisCurve,
    pub y: AxisCurve,
    pub eta: [f64; 2],
}

/// Curve for ellipse radii `(r_x, r_y)` with the default caps.
pub fn curve_from_radii(r: [f64; 2]) -> LeniencyCurve {
    curve_with_eta(r, DEFAULT_ETA)
}

pub fn curve_with_eta(r: [f64; 2], eta: [f64; 2]) -> LeniencyCurve {
    LeniencyCurve { x: AxisCurve::from_radius(r[0]), y: AxisCurve::from_radius(r[1]), eta }
}

/// `h = eta · clamp(0, 1, exp(q (d − a)) + v)` per axis. The result is kept
/// strictly positive so the filter never freezes completely.
pub fn process_variance(curve: &LeniencyCurve, d_le: [f64; 2]) -> [f64; 2] {
    [
        (curve.eta[0] * curve.x.level(d_le[0])).max(f64::MIN_POSITIVE),
        (curve.eta[1] * curve.y.level(d_le[1])).max(f64::MIN_POSITIVE),
    ]
}

/// Augmented point `p^A` with its per-axis filter state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AugmentedPoint {
    pub filters: [ScalarKalman; 2],
    pub h: [f64; 2],
}

impl AugmentedPoint {
    pub fn new(p: ScreenPoint) -> Self {
        AugmentedPoint { filters: [ScalarKalman::new(p.x), ScalarKalman::new(p.y)], h: [0.0; 2] }
    }

    pub fn point(&self) -> ScreenPoint {
        ScreenPoint::new(self.filters[0].mean, self.filters[1].mean)
    }

    /// Discrepancy between the previous augmented point and `p_t`.
    pub fn discrepancy(&self, p_t: ScreenPoint) -> [f64; 2] {
        [(self.filters[0].mean - p_t.x).abs(), (self.filters[1].mean - p_t.y).abs()]
    }
}

/// Advance the augmented point by one tracked observation. `measurement_var`
/// is the filter's measurement variance; only its ratio to `h` matters.
pub fn augment(state: &AugmentedPoint, p_t: ScreenPoint, curve: &LeniencyCurve, measurement_var: f64) -> AugmentedPoint {
    let h = process_variance(curve, state.discrepancy(p_t));
    let mut next = *state;
    next.filters[0].step(p_t.x, h[0], measurement_var);
    next.filters[1].step(p_t.y, h[1], measurement_var);
    next.h = h;
    next
}
