use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub fn scaled(self, s: f64) -> Self {
        PidGains { kp: self.kp * s, ki: self.ki * s, kd: self.kd * s }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PidConfig {
    pub gains: PidGains,
    /// Largest |output|.
    pub output_limit: f64,
    /// Largest |∫e dt|.
    pub integral_limit: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: Option<f64>,
    /// Smoothed derivative of the error.
    pub derivative: f64,
}

impl PidState {
    pub fn reset(&mut self) {
        *self = PidState::default();
    }
}

/// One PID update. The derivative acts on the error and is low-passed with
/// time constant `2·dt`; the first call after a reset has no derivative.
pub fn pid_step(state: &mut PidState, cfg: &PidConfig, e: f64, dt: f64) -> f64 {
    state.integral = (state.integral + e * dt).clamp(-cfg.integral_limit, cfg.integral_limit);
    let raw = state.prev_error.map_or(0.0, |p| (e - p) / dt);
    let tau = 2.0 * dt;
    state.derivative += (raw - state.derivative) * dt / (tau + dt);
    state.prev_error = Some(e);
    let g = cfg.gains;
    let u = g.kp * e + g.ki * state.integral + g.kd * state.derivative;
    u.clamp(-cfg.output_limit, cfg.output_limit)
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TuneError {
    #[error("ultimate gain and period must be positive (Ku={ku}, Tu={tu})")]
    NonPositive { ku: f64, tu: f64 },
    #[error("relaxation must be in (0, 1], got {0}")]
    Relaxation(f64),
}

/// Classic Ziegler-Nichols PID gains scaled by `relaxation`.
pub fn tune_ziegler_nichols(ku: f64, tu: f64, relaxation: f64) -> Result<PidGains, TuneError> {
    if !(ku > 0.0 && tu > 0.0) {
        return Err(TuneError::NonPositive { ku, tu });
    }
    if !(relaxation > 0.0 && relaxation <= 1.0) {
        return Err(TuneError::Relaxation(relaxation));
    }
    Ok(PidGains { kp: 0.6 * ku, ki: 1.2 * ku / tu, kd: 0.075 * ku * tu }.scaled(relaxation))
}
