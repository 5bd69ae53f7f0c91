//! Gimbal stand-in: command latency, a first-order rate loop, and joint stops.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantConfig {
    /// Rate-loop time constant, seconds.
    pub tau: f64,
    /// Ticks between a command and its effect.
    pub latency_ticks: usize,
    /// deg/s per axis (yaw, pitch, roll).
    pub rate_limit: [f64; 3],
    /// `[min, max]` deg per axis.
    pub joint_limits: [[f64; 2]; 3],
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig {
            tau: 0.05,
            latency_ticks: 2,
            rate_limit: [180.0; 3],
            joint_limits: [[-170.0, 170.0], [-85.0, 85.0], [-45.0, 45.0]],
        }
    }
}

/// Orientation and rates, deg and deg/s, ordered yaw, pitch, roll.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GimbalState {
    pub orientation: [f64; 3],
    pub rates: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct GimbalPlant {
    cfg: PlantConfig,
    state: GimbalState,
    pending: VecDeque<[f64; 3]>,
}

impl GimbalPlant {
    pub fn new(cfg: PlantConfig) -> Self {
        Self::with_orientation(cfg, [0.0; 3])
    }

    pub fn with_orientation(cfg: PlantConfig, orientation: [f64; 3]) -> Self {
        let pending = std::iter::repeat_n([0.0; 3], cfg.latency_ticks).collect();
        GimbalPlant { cfg, state: GimbalState { orientation, rates: [0.0; 3] }, pending }
    }

    pub fn state(&self) -> GimbalState {
        self.state
    }

    pub fn config(&self) -> &PlantConfig {
        &self.cfg
    }

    /// Advance by `dt` with commanded rates `cmd` (deg/s).
    pub fn step(&mut self, cmd: [f64; 3], dt: f64) -> GimbalState {
        self.pending.push_back(cmd);
        let applied = self.pending.pop_front().unwrap_or(cmd);
        let alpha = 1.0 - (-dt / self.cfg.tau).exp();
        for axis in 0..3 {
            let limit = self.cfg.rate_limit[axis];
            let rate = &mut self.state.rates[axis];
            *rate = (*rate + (applied[axis] - *rate) * alpha).clamp(-limit, limit);
            let [lo, hi] = self.cfg.joint_limits[axis];
            let angle = &mut self.state.orientation[axis];
            *angle += *rate * dt;
            if *angle < lo || *angle > hi {
                *angle = angle.clamp(lo, hi);
                *rate = 0.0;
            }
        }
        self.state
    }
}
