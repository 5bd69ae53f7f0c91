use longtake::geometry::{BBox, Embedding};
use longtake::tracker::{
    assign, build_cost_matrix, downsample_trigger, CostMatrix, Detection, Phase, Tracker, TrackerConfig,
    TrackerMode,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Best `(matched pairs, total cost)` by exhaustive search: more admissible
/// pairs first, then lower cost.
fn brute_force(m: &[Vec<Option<f64>>]) -> (usize, f64) {
    fn go(m: &[Vec<Option<f64>>], row: usize, used: &mut Vec<bool>, count: usize, cost: f64, best: &mut (usize, f64)) {
        if row == m.len() {
            if count > best.0 || (count == best.0 && cost < best.1) {
                *best = (count, cost);
            }
            return;
        }
        go(m, row + 1, used, count, cost, best);
        for c in 0..m[row].len() {
            if let (false, Some(v)) = (used[c], m[row][c]) {
                used[c] = true;
                go(m, row + 1, used, count + 1, cost + v, best);
                used[c] = false;
            }
        }
    }
    let cols = m.first().map_or(0, Vec::len);
    let mut best = (0, f64::INFINITY);
    go(m, 0, &mut vec![false; cols], 0, 0.0, &mut best);
    if best.0 == 0 {
        best.1 = 0.0;
    }
    best
}

fn matrix_strategy(forbidden: bool) -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    (1usize..=6, 1usize..=6).prop_flat_map(move |(r, c)| {
        let cell = if forbidden {
            prop_oneof![4 => (0u8..10).prop_map(|v| Some(v as f64)), 1 => Just(None)].boxed()
        } else {
            (0u8..10).prop_map(|v| Some(v as f64)).boxed()
        };
        prop::collection::vec(prop::collection::vec(cell, c), r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn assignment_matches_exhaustive_oracle(m in matrix_strategy(false)) {
        let a = assign(&CostMatrix::from_rows(&m));
        let (count, cost) = brute_force(&m);
        prop_assert_eq!(a.matches.len(), count);
        prop_assert_eq!(a.total_cost(&CostMatrix::from_rows(&m)), cost);
    }

    #[test]
    fn assignment_with_forbidden_matches_oracle(m in matrix_strategy(true)) {
        let cm = CostMatrix::from_rows(&m);
        let a = assign(&cm);
        let (count, cost) = brute_force(&m);
        prop_assert_eq!(a.matches.len(), count);
        prop_assert!((a.total_cost(&cm) - cost).abs() < 1e-9);
        for &(r, c) in &a.matches {
            prop_assert!(m[r][c].is_some());
        }
    }

    #[test]
    fn assignment_is_one_to_one(m in matrix_strategy(true)) {
        let a = assign(&CostMatrix::from_rows(&m));
        let mut rows: Vec<_> = a.matches.iter().map(|x| x.0).collect();
        let mut cols: Vec<_> = a.matches.iter().map(|x| x.1).collect();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(rows.len(), a.matches.len());
        prop_assert_eq!(cols.len(), a.matches.len());
        prop_assert_eq!(a.unmatched_rows.len() + a.matches.len(), m.len());
    }

    #[test]
    fn recovery_needs_exactly_r_consecutive(pattern in prop::collection::vec(any::<bool>(), 1..40)) {
        let cfg = TrackerConfig::default();
        let mut t = Tracker::new(cfg.clone()).unwrap();
        let d = Detection::new(BBox::new(0.5, 0.5, 0.1, 0.3), Embedding::basis(8, 0));
        t.enroll(&d, "red").unwrap();
        for _ in 0..cfg.lost_after {
            t.step(&[]);
        }
        let mut run = 0;
        for hit in pattern {
            let r = t.step(if hit { std::slice::from_ref(&d) } else { &[] });
            if r[0].phase == Phase::Normal {
                break;
            }
            run = if hit { run + 1 } else { 0 };
            prop_assert!(run < cfg.recovery_len);
            let expect = if run == 0 { "lost" } else { "recovering" };
            prop_assert_eq!(r[0].phase.name(), expect);
        }
    }
}

fn shifted(track: &BBox, target_iou: f64) -> BBox {
    // horizontal shift dx gives IOU (w - dx) / (w + dx)
    let dx = track.w * (1.0 - target_iou) / (1.0 + target_iou);
    BBox::new(track.cx + dx, track.cy, track.w, track.h)
}

fn at_distance(base: usize, other: usize, dim: usize, dist: f64) -> Embedding {
    let c = 1.0 - dist;
    let mut v = vec![0.0; dim];
    v[base] = c;
    v[other] = (1.0 - c * c).sqrt();
    Embedding::normalized(v).unwrap()
}

#[test]
fn crowded_branch_hand_example() {
    let cfg = TrackerConfig::default();
    let mut t = Tracker::new(cfg.clone()).unwrap();
    let track_box = BBox::new(0.5, 0.5, 0.2, 0.2);
    t.enroll(&Detection::new(track_box, Embedding::basis(8, 0)), "red").unwrap();
    let dets = [
        Detection::new(shifted(&track_box, 0.7), at_distance(0, 1, 8, 0.1)),
        Detection::new(shifted(&track_box, 0.6), at_distance(0, 2, 8, 0.5)),
    ];
    let table = build_cost_matrix(t.tracks(), &dets, &cfg);
    assert_eq!(table.competitors[0], 2);
    assert!((table.matrix.get(0, 0).unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(table.matrix.get(0, 1), None);
}

#[test]
fn single_competitor_uses_iou_only() {
    let cfg = TrackerConfig::default();
    let mut t = Tracker::new(cfg.clone()).unwrap();
    let b = BBox::new(0.5, 0.5, 0.2, 0.2);
    t.enroll(&Detection::new(b, Embedding::basis(8, 0)), "red").unwrap();
    // appearance is orthogonal but only one detection competes
    let table = build_cost_matrix(t.tracks(), &[Detection::new(b, Embedding::basis(8, 5))], &cfg);
    assert!(table.matrix.get(0, 0).unwrap().abs() < 1e-12);
}

#[test]
fn lost_track_uses_appearance_only() {
    let cfg = TrackerConfig::default();
    let mut t = Tracker::new(cfg.clone()).unwrap();
    let e = Embedding::basis(8, 0);
    t.enroll(&Detection::new(BBox::new(0.5, 0.5, 0.2, 0.2), e.clone()), "red").unwrap();
    for _ in 0..cfg.lost_after {
        t.step(&[]);
    }
    let far = Detection::new(BBox::new(0.1, 0.1, 0.05, 0.05), e);
    let table = build_cost_matrix(t.tracks(), &[far], &cfg);
    assert_eq!(table.matrix.get(0, 0), Some(0.0));
}

#[test]
fn stationary_noise_is_smoothed() {
    let cfg = TrackerConfig::default();
    let mut t = Tracker::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let e = Embedding::basis(8, 0);
    t.enroll(&Detection::new(BBox::new(0.5, 0.5, 0.1, 0.3), e.clone()), "red").unwrap();
    let mut xs = Vec::new();
    for k in 0..6000 {
        let b = BBox::new(0.5 + noise.sample(&mut rng), 0.5 + noise.sample(&mut rng), 0.1, 0.3);
        let r = t.step(&[Detection::new(b, e.clone())]);
        if k >= 600 {
            xs.push(r[0].bbox.unwrap().cx);
        }
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    eprintln!("stationary output std {std:.5}");
    assert!(std <= 0.004, "output std {std}");
}

#[test]
fn gallery_never_exceeds_bound() {
    for mode in TrackerMode::ALL {
        let cfg = TrackerConfig::default().with_mode(mode);
        let bound = downsample_trigger(cfg.gallery_budget);
        let mut t = Tracker::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let random = |rng: &mut ChaCha8Rng| {
            Embedding::normalized((0..16).map(|_| rng.random::<f64>() - 0.5).collect()).unwrap()
        };
        let b = BBox::new(0.5, 0.5, 0.1, 0.3);
        t.enroll(&Detection::new(b, random(&mut rng)), "red").unwrap();
        for _ in 0..1000 {
            t.step(&[Detection::new(b, random(&mut rng))]);
            assert!(t.tracks()[0].gallery.len() <= bound, "{mode:?}");
        }
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let run = || {
        let mut t = Tracker::new(TrackerConfig { seed: 3, ..TrackerConfig::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = BBox::new(0.5, 0.5, 0.1, 0.3);
        t.enroll(&Detection::new(b, Embedding::basis(16, 0)), "red").unwrap();
        let mut out = Vec::new();
        for _ in 0..300 {
            let e = Embedding::normalized((0..16).map(|_| rng.random::<f64>()).collect()).unwrap();
            out.push(t.step(&[Detection::new(b, e)]));
        }
        out
    };
    assert_eq!(run(), run());
}
