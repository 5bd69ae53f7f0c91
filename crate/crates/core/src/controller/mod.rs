//! Framing controller: turns augmented and required actor positions into
//! yaw/pitch/roll rate commands.

mod leniency;
mod pid;

pub use leniency::{
    augment, curve_from_radii, curve_with_eta, process_variance, AugmentedPoint, AxisCurve, LeniencyCurve,
    DEFAULT_ETA,
};
pub use pid::{pid_step, tune_ziegler_nichols, PidConfig, PidGains, PidState, TuneError};

use serde::{Deserialize, Serialize};

use crate::geometry::ScreenPoint;

/// Per-actor input to the framing error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FramedActor {
    pub augmented: ScreenPoint,
    pub required: ScreenPoint,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FramingError {
    /// `T^c` in normalized screen units.
    pub t: [f64; 2],
    /// Set when every weight is zero; the camera should hold still.
    pub hold: bool,
}

/// Translation part of a weighted Procrustes alignment: weighted mean of the
/// augmented points minus weighted mean of the required points. Positive x
/// means content sits right of where it is required.
pub fn procrustes_error(frame: &[FramedActor]) -> FramingError {
    let total: f64 = frame.iter().map(|a| a.weight).sum();
    if total <= 0.0 {
        return FramingError { t: [0.0, 0.0], hold: true };
    }
    let mut t = [0.0; 2];
    for a in frame {
        t[0] += a.weight * (a.augmented.x - a.required.x);
        t[1] += a.weight * (a.augmented.y - a.required.y);
    }
    FramingError { t: [t[0] / total, t[1] / total], hold: false }
}

/// Roll-rate generator for banking: an exponential moving average of the
/// lateral acceleration times a gain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BankingFilter {
    pub ema: f64,
}

impl BankingFilter {
    /// Returns the roll rate (deg/s) for this tick.
    pub fn step(&mut self, lateral_accel: f64, dt: f64, smoothing: f64, gain: f64, rate_limit: f64) -> f64 {
        let alpha = if smoothing > 0.0 { 1.0 - (-dt / smoothing).exp() } else { 1.0 };
        self.ema += alpha * (lateral_accel - self.ema);
        (gain * self.ema).clamp(-rate_limit, rate_limit)
    }
}

/// Convenience wrapper for a one-off banking evaluation over a stream.
pub fn banking_roll(accels: &[f64], dt: f64, smoothing: f64, gain: f64, rate_limit: f64) -> Vec<f64> {
    let mut f = BankingFilter::default();
    accels.iter().map(|a| f.step(*a, dt, smoothing, gain, rate_limit)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Field of view per axis (deg) used to convert screen error to angle.
    pub fov: [f64; 2],
    pub pid: PidConfig,
    /// Measurement variance of the augmented-point filters. Only its ratio
    /// to `eta` matters. The default is the smallest round value for which a
    /// walk of 0.8·r at r = 0.2 leaves the yaw command under 0.05 deg/s; at
    /// 1.0 the zero-error lift alone moves the camera.
    pub leniency_measurement_variance: f64,
    pub eta: [f64; 2],
    /// Process variance of the required-point filters.
    pub required_point_variance: f64,
    /// deg/s
    pub roll_rate_limit: f64,
}

/// Horizontal FoV of the guide camera and the matching vertical FoV for a
/// 740×416 frame.
pub const DEFAULT_FOV: [f64; 2] = [90.0, 90.0 * 416.0 / 740.0];

pub const LENIENCY_MEASUREMENT_VARIANCE: f64 = 2500.0;

/// Default rate-loop gains: relay-tuned against the default plant with
/// relaxation 0.6 (see `eval::relay_tune`). Ku ≈ 35.7, Tu = 16 ticks.
pub const DEFAULT_GAINS: PidGains = PidGains { kp: 12.847308488376822, ki: 96.3548139844127, kd: 0.4282436148499539 };

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            fov: DEFAULT_FOV,
            pid: PidConfig {
                gains: DEFAULT_GAINS,
                output_limit: 180.0,
                integral_limit: 2.0,
            },
            leniency_measurement_variance: LENIENCY_MEASUREMENT_VARIANCE,
            eta: DEFAULT_ETA,
            required_point_variance: 0.002,
            roll_rate_limit: 90.0,
        }
    }
}
