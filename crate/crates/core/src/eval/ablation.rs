use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{judge_frame, RunAccumulator, RunSummary, DEFAULT_IOU_THRESHOLD};
use crate::session::best_overlap;
use crate::sim::{SceneError, SceneSpec, World};
use crate::tracker::{Tracker, TrackerConfig, TrackerMode};

/// Run the tracker alone against a scene seen from its fixed camera. Actors
/// are enrolled from the detection that best overlaps their true box the
/// first time they are visible; frames before enrollment are not judged.
pub fn run_tracker_on_scene(
    scene: &SceneSpec,
    cfg: &TrackerConfig,
    seed: u64,
) -> Result<RunSummary, SceneError> {
    let mut world = World::new(scene.clone(), cfg.dt, Some(seed))?;
    let mut tracker = Tracker::new(TrackerConfig { seed, ..cfg.clone() }).expect("validated tracker config");
    let camera = scene.camera;
    let mut acc = RunAccumulator::default();
    for tick in 0..world.ticks() {
        let frame = world.render(tick, camera);
        let mut taken = Vec::new();
        for truth in &frame.truth {
            let Some(b) = truth.bbox else { continue };
            if tracker.is_enrolled(&truth.actor) {
                continue;
            }
            if let Some(i) = best_overlap(&frame.detections, &b, &taken) {
                tracker.enroll(&frame.detections[i], truth.actor.clone()).expect("fresh actor");
                taken.push(i);
            }
        }
        let start = Instant::now();
        let reports = tracker.step(&frame.detections);
        acc.time_step(start.elapsed().as_secs_f64());
        for truth in &frame.truth {
            let Some(r) = reports.iter().find(|r| r.actor == truth.actor) else { continue };
            acc.judge(judge_frame(r.bbox.as_ref(), truth.bbox.as_ref(), DEFAULT_IOU_THRESHOLD));
            acc.observe_identity(r);
        }
    }
    Ok(acc.summary())
}

/// Mean and standard error of the mean over seeds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat::default();
        }
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Stat { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Stat { mean, se: (var / n).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    pub mode: TrackerMode,
    pub seeds: usize,
    pub tp: Stat,
    pub fp: Stat,
    pub mt: Stat,
    pub distance_px: Stat,
    pub id_switches: Stat,
    pub step_ms: Stat,
    pub runs: Vec<RunSummary>,
}

impl AblationRow {
    fn from_runs(mode: TrackerMode, runs: Vec<RunSummary>) -> Self {
        let col = |f: fn(&RunSummary) -> f64| Stat::of(&runs.iter().map(f).collect::<Vec<_>>());
        AblationRow {
            mode,
            seeds: runs.len(),
            tp: col(|r| r.tp),
            fp: col(|r| r.fp),
            mt: col(|r| r.mt),
            distance_px: col(|r| r.mean_distance_px),
            id_switches: col(|r| r.id_switches as f64),
            step_ms: col(|r| r.step_ms),
            runs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationTable {
    pub scene: String,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, mode: TrackerMode) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.mode == mode)
    }

    /// One line per mode. Wall time is left out unless `timing` is set so
    /// the file is reproducible byte for byte.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut s = String::from("mode,seeds,tp,tp_se,fp,fp_se,mt,mt_se,d_px,d_px_se,id_switches");
        s.push_str(if timing { ",step_ms\n" } else { "\n" });
        for r in &self.rows {
            write!(
                s,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3},{:.3}",
                r.mode.name(),
                r.seeds,
                r.tp.mean,
                r.tp.se,
                r.fp.mean,
                r.fp.se,
                r.mt.mean,
                r.mt.se,
                r.distance_px.mean,
                r.distance_px.se,
                r.id_switches.mean
            )
            .unwrap();
            if timing {
                write!(s, ",{:.4}", r.step_ms.mean).unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Human-readable table for the terminal.
    pub fn render(&self) -> String {
        let mut s = format!("scene {}\n", self.scene);
        writeln!(s, "{:<18} {:>14} {:>14} {:>14} {:>14} {:>8} {:>8}", "mode", "TP", "MT", "FP", "D (px)", "IDsw", "T (ms)")
            .unwrap();
        for r in &self.rows {
            let cell = |st: Stat, p: usize| format!("{:.p$}±{:.p$}", st.mean, st.se, p = p);
            writeln!(
                s,
                "{:<18} {:>14} {:>14} {:>14} {:>14} {:>8.2} {:>8.3}",
                r.mode.name(),
                cell(r.tp, 3),
                cell(r.mt, 3),
                cell(r.fp, 3),
                cell(r.distance_px, 1),
                r.id_switches.mean,
                r.step_ms.mean
            )
            .unwrap();
        }
        s
    }
}

/// Every tracker mode over `seeds`, runs in parallel. Results are collected
/// in seed order so the table does not depend on scheduling.
pub fn run_ablation_suite(
    scene: &SceneSpec,
    base: &TrackerConfig,
    seeds: &[u64],
) -> Result<AblationTable, SceneError> {
    scene.validate()?;
    let mut rows = Vec::new();
    for mode in TrackerMode::ALL {
        let cfg = base.clone().with_mode(mode);
        let runs = seeds
            .par_iter()
            .map(|&seed| run_tracker_on_scene(scene, &cfg, seed))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(AblationRow::from_runs(mode, runs));
    }
    Ok(AblationTable { scene: scene.name.clone(), rows })
}
