use longtake::controller::{
    augment, curve_from_radii, process_variance, AugmentedPoint, LeniencyCurve, LENIENCY_MEASUREMENT_VARIANCE,
};
use longtake::geometry::ScreenPoint;
use proptest::prelude::*;

fn settle(p: ScreenPoint, curve: &LeniencyCurve, var: f64, ticks: usize) -> AugmentedPoint {
    let mut a = AugmentedPoint::new(p);
    for _ in 0..ticks {
        a = augment(&a, p, curve, var);
    }
    a
}

/// Ticks until p^A is within 0.01 of a tracked point stepped by 3a.
fn ticks_to_follow_step(r: f64, var: f64) -> usize {
    let curve = curve_from_radii([r, r]);
    let mut a = settle(ScreenPoint::CENTER, &curve, var, 120);
    let target = ScreenPoint::new(0.5 + 3.0 * curve.x.a, 0.5);
    for tick in 1..=10_000 {
        a = augment(&a, target, &curve, var);
        if (a.point().x - target.x).abs() < 0.01 {
            return tick;
        }
    }
    usize::MAX
}

#[test]
fn unit_variance_follows_a_3a_step_within_60_ticks() {
    for r in [0.05, 0.1] {
        let n = ticks_to_follow_step(r, 1.0);
        assert!(n <= 60, "r={r}: {n} ticks");
    }
}

#[test]
fn default_variance_still_follows_a_step() {
    // Slower than at unit variance, but it gets there.
    let n = ticks_to_follow_step(0.1, LENIENCY_MEASUREMENT_VARIANCE);
    assert!(n > 60 && n < 3000, "{n} ticks");
}

#[test]
fn oscillation_inside_ellipse_barely_moves_augmented_point() {
    let r = 0.2;
    let curve = curve_from_radii([r, r]);
    let start = settle(ScreenPoint::CENTER, &curve, LENIENCY_MEASUREMENT_VARIANCE, 120);
    let mut a = start;
    let mut worst: f64 = 0.0;
    for tick in 0..300 {
        let phase = tick as f64 / 60.0 * std::f64::consts::TAU / 2.0;
        let p = ScreenPoint::new(0.5 + 0.9 * curve.x.a * phase.sin(), 0.5);
        a = augment(&a, p, &curve, LENIENCY_MEASUREMENT_VARIANCE);
        worst = worst.max(a.point().distance(&start.point()));
    }
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn zero_innovation_keeps_point() {
    let curve = curve_from_radii([0.1, 0.1]);
    let p = ScreenPoint::new(0.3, 0.6);
    let a = settle(p, &curve, 1.0, 500);
    assert_eq!(a.point(), p);
}

proptest! {
    #[test]
    fn h_is_monotone_and_bounded(r in 0.005f64..0.5, d1 in 0.0f64..1.0, d2 in 0.0f64..1.0) {
        let c = curve_from_radii([r, r]);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let h_lo = process_variance(&c, [lo, lo]);
        let h_hi = process_variance(&c, [hi, hi]);
        for k in 0..2 {
            prop_assert!(h_lo[k] <= h_hi[k]);
            prop_assert!(h_lo[k] > 0.0 && h_hi[k] <= c.eta[k]);
        }
    }

    #[test]
    fn augmented_point_moves_toward_track(x in 0.0f64..1.0, y in 0.0f64..1.0, r in 0.01f64..0.5) {
        let curve = curve_from_radii([r, r]);
        let a = AugmentedPoint::new(ScreenPoint::CENTER);
        let p = ScreenPoint::new(x, y);
        let next = augment(&a, p, &curve, 1.0);
        prop_assert!(next.point().distance(&p) <= a.point().distance(&p) + 1e-15);
    }
}
