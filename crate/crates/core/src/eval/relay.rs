//! Relay (bang-bang) experiment for estimating the ultimate gain and period
//! of a loop, as input to Ziegler-Nichols tuning.

use serde::Serialize;
use thiserror::Error;

use crate::sim::GimbalPlant;

/// A single-input single-output plant driven by the relay.
pub trait RelayPlant {
    fn output(&self) -> f64;
    fn step(&mut self, u: f64, dt: f64);
}

/// One axis of the gimbal, input rate command, output angle.
pub struct GimbalAxis {
    pub plant: GimbalPlant,
    pub axis: usize,
}

impl RelayPlant for GimbalAxis {
    fn output(&self) -> f64 {
        self.plant.state().orientation[self.axis]
    }

    fn step(&mut self, u: f64, dt: f64) {
        let mut cmd = [0.0; 3];
        cmd[self.axis] = u;
        self.plant.step(cmd, dt);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelayConfig {
    /// Relay output magnitude `d`.
    pub amplitude: f64,
    pub dt: f64,
    /// Give up after this many seconds.
    pub max_time: f64,
    /// Cycles discarded as transient.
    pub settle_cycles: usize,
    /// Cycles averaged for the estimate.
    pub measure_cycles: usize,
}

impl Default for RelayConfig {
    fn default() -> Self {
        RelayConfig { amplitude: 10.0, dt: 1.0 / 60.0, max_time: 60.0, settle_cycles: 3, measure_cycles: 6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelayResult {
    /// Ultimate gain `4d / (π a)`.
    pub ku: f64,
    /// Ultimate period, seconds.
    pub tu: f64,
    /// Half peak-to-peak of the output oscillation.
    pub output_amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RelayError {
    #[error("no sustained oscillation within {0} s")]
    NoOscillation(f64),
    #[error("relay amplitude and dt must be positive")]
    BadConfig,
}

/// Run the relay around setpoint 0 and read off the limit cycle. Periods are
/// measured between upward zero crossings (linearly interpolated), amplitude
/// from the extremes inside each measured cycle.
pub fn relay_tune<P: RelayPlant>(plant: &mut P, cfg: &RelayConfig) -> Result<RelayResult, RelayError> {
    if !(cfg.amplitude > 0.0 && cfg.dt > 0.0) {
        return Err(RelayError::BadConfig);
    }
    let needed = cfg.settle_cycles + cfg.measure_cycles + 1;
    let mut crossings: Vec<f64> = Vec::new();
    let mut extremes: Vec<(f64, f64)> = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut prev = plant.output();
    let steps = (cfg.max_time / cfg.dt).ceil() as usize;
    for k in 0..steps {
        let u = if prev <= 0.0 { cfg.amplitude } else { -cfg.amplitude };
        plant.step(u, cfg.dt);
        let y = plant.output();
        lo = lo.min(y);
        hi = hi.max(y);
        if prev <= 0.0 && y > 0.0 {
            let frac = -prev / (y - prev);
            crossings.push((k as f64 + frac) * cfg.dt);
            extremes.push((lo, hi));
            lo = f64::INFINITY;
            hi = f64::NEG_INFINITY;
            if crossings.len() == needed {
                let tail = &crossings[cfg.settle_cycles..];
                let tu = (tail[tail.len() - 1] - tail[0]) / cfg.measure_cycles as f64;
                let amps = &extremes[cfg.settle_cycles + 1..];
                let a = amps.iter().map(|(l, h)| (h - l) / 2.0).sum::<f64>() / amps.len() as f64;
                if !(a > 0.0 && tu > 0.0) {
                    break;
                }
                let ku = 4.0 * cfg.amplitude / (std::f64::consts::PI * a);
                return Ok(RelayResult { ku, tu, output_amplitude: a });
            }
        }
        prev = y;
    }
    Err(RelayError::NoOscillation(cfg.max_time))
}
