//! Scoring and experiment harness: frame judgements, run summaries, tracker
//! ablations, control metrics, and relay tuning.

mod ablation;
mod metrics;
mod relay;

pub use ablation::{run_ablation_suite, run_tracker_on_scene, AblationRow, AblationTable, Stat};
pub use metrics::{
    judge_frame, max_rate_jump, rms_rate_change, FrameJudgement, Label, RunAccumulator, RunSummary,
    DEFAULT_IOU_THRESHOLD,
};
pub use relay::{relay_tune, GimbalAxis, RelayConfig, RelayError, RelayPlant, RelayResult};
