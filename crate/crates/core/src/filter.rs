//! Small Kalman filters used by the tracker and the controller.

use serde::Serialize;

/// Random-walk scalar Kalman filter: `x_k = x_{k-1} + w`, `z_k = x_k + v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarKalman {
    pub mean: f64,
    pub variance: f64,
}

impl ScalarKalman {
    pub fn new(mean: f64) -> Self {
        ScalarKalman { mean, variance: 0.0 }
    }

    /// One predict/update cycle with process variance `q` and measurement
    /// variance `r`. Returns the gain used.
    pub fn step(&mut self, z: f64, q: f64, r: f64) -> f64 {
        let prior = self.variance + q;
        let gain = if prior + r > 0.0 { prior / (prior + r) } else { 0.0 };
        self.mean += gain * (z - self.mean);
        self.variance = (1.0 - gain) * prior;
        gain
    }
}

/// Constant-velocity Kalman filter on one axis, measuring position only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantVelocity {
    pub pos: f64,
    pub vel: f64,
    /// Covariance `[[pp, pv], [pv, vv]]`.
    p: [f64; 3],
}

impl ConstantVelocity {
    pub fn new(pos: f64, pos_var: f64, vel_var: f64) -> Self {
        ConstantVelocity { pos, vel: 0.0, p: [pos_var, 0.0, vel_var] }
    }

    /// Time update with white acceleration noise of spectral density `q`.
    pub fn predict(&mut self, dt: f64, q: f64) {
        let [pp, pv, vv] = self.p;
        self.pos += self.vel * dt;
        let (dt2, dt3, dt4) = (dt * dt, dt * dt * dt, dt * dt * dt * dt);
        self.p = [
            pp + 2.0 * dt * pv + dt2 * vv + q * dt4 / 4.0,
            pv + dt * vv + q * dt3 / 2.0,
            vv + q * dt2,
        ];
    }

    /// Measurement update with position `z` of variance `r`.
    pub fn update(&mut self, z: f64, r: f64) {
        let [pp, pv, vv] = self.p;
        let s = pp + r;
        let (kp, kv) = (pp / s, pv / s);
        let innov = z - self.pos;
        self.pos += kp * innov;
        self.vel += kv * innov;
        self.p = [(1.0 - kp) * pp, (1.0 - kp) * pv, vv - kv * pv];
    }

    pub fn position_variance(&self) -> f64 {
        self.p[0]
    }
}
