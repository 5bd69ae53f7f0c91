use longtake::controller::{tune_ziegler_nichols, ControllerConfig, DEFAULT_GAINS};
use longtake::eval::{relay_tune, GimbalAxis, RelayConfig, RelayError, RelayPlant};
use longtake::sim::{GimbalPlant, PlantConfig};

/// y' = u(t − L), simulated with its own fine step and delay line.
struct DelayedIntegrator {
    y: f64,
    line: std::collections::VecDeque<f64>,
}

impl DelayedIntegrator {
    fn new(delay: f64, dt: f64) -> Self {
        let n = (delay / dt).round() as usize;
        DelayedIntegrator { y: 0.0, line: std::iter::repeat_n(0.0, n).collect() }
    }
}

impl RelayPlant for DelayedIntegrator {
    fn output(&self) -> f64 {
        self.y
    }
    fn step(&mut self, u: f64, dt: f64) {
        self.line.push_back(u);
        self.y += self.line.pop_front().unwrap() * dt;
    }
}

fn fine(amplitude: f64) -> RelayConfig {
    RelayConfig { amplitude, dt: 1e-4, max_time: 10.0, settle_cycles: 3, measure_cycles: 5 }
}

#[test]
fn integrator_with_delay_matches_analytic_limit_cycle() {
    // Relay d on K/s·e^{-Ls}: period 4L, output amplitude d·L (triangle wave).
    let delay = 0.05;
    let r = relay_tune(&mut DelayedIntegrator::new(delay, 1e-4), &fine(1.0)).unwrap();
    let tu = 4.0 * delay;
    assert!((r.tu / tu - 1.0).abs() < 0.05, "Tu {} vs {}", r.tu, tu);
    assert!((r.output_amplitude / delay - 1.0).abs() < 0.05);
    let ku = 4.0 / (std::f64::consts::PI * delay);
    assert!((r.ku / ku - 1.0).abs() < 0.05);
}

#[test]
fn relay_amplitude_does_not_change_period() {
    let a = relay_tune(&mut DelayedIntegrator::new(0.05, 1e-4), &fine(1.0)).unwrap();
    let b = relay_tune(&mut DelayedIntegrator::new(0.05, 1e-4), &fine(2.0)).unwrap();
    assert!((a.tu - b.tu).abs() / a.tu < 0.01);
    assert!((b.output_amplitude / a.output_amplitude - 2.0).abs() < 0.02);
    assert!((a.ku - b.ku).abs() / a.ku < 0.02);

    let plant = |d| {
        let cfg = RelayConfig { amplitude: d, ..RelayConfig::default() };
        relay_tune(&mut GimbalAxis { plant: GimbalPlant::new(PlantConfig::default()), axis: 0 }, &cfg).unwrap()
    };
    let (p, q) = (plant(10.0), plant(20.0));
    assert!((p.tu - q.tu).abs() / p.tu < 0.01);
    assert!(p.ku > 0.0 && q.ku > 0.0);
}

#[test]
fn default_gains_come_from_relay_on_default_plant() {
    let mut axis = GimbalAxis { plant: GimbalPlant::new(PlantConfig::default()), axis: 0 };
    let r = relay_tune(&mut axis, &RelayConfig::default()).unwrap();
    let g = tune_ziegler_nichols(r.ku, r.tu, 0.6).unwrap();
    for (got, want) in [(g.kp, DEFAULT_GAINS.kp), (g.ki, DEFAULT_GAINS.ki), (g.kd, DEFAULT_GAINS.kd)] {
        assert!((got / want - 1.0).abs() < 1e-9, "{got} vs {want}");
    }
    assert_eq!(ControllerConfig::default().pid.gains, DEFAULT_GAINS);
}

#[test]
fn static_plant_never_oscillates() {
    struct Dead;
    impl RelayPlant for Dead {
        fn output(&self) -> f64 {
            -1.0
        }
        fn step(&mut self, _: f64, _: f64) {}
    }
    let cfg = RelayConfig { max_time: 1.0, ..RelayConfig::default() };
    assert_eq!(relay_tune(&mut Dead, &cfg), Err(RelayError::NoOscillation(1.0)));
}
