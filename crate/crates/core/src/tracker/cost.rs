use super::assignment::CostMatrix;
use super::{Detection, Phase, Track, TrackerConfig};
use crate::geometry::iou;

/// Cost matrix plus, per track, the number of detections competing for it
/// spatially (IOU cost below `tau_overlap`).
#[derive(Clone, Debug)]
pub struct CostTable {
    pub matrix: CostMatrix,
    pub competitors: Vec<usize>,
}

/// Association costs for every track/detection pair.
///
/// Normal tracks with fewer than two competing detections are associated on
/// IOU cost alone; otherwise the appearance cost joins in and the appearance
/// gates apply. Lost and recovering tracks use appearance only.
pub fn build_cost_matrix(tracks: &[Track], detections: &[Detection], cfg: &TrackerConfig) -> CostTable {
    let mut matrix = CostMatrix::new(tracks.len(), detections.len());
    let mut competitors = vec![0; tracks.len()];
    let feature_ok = |min: f64, avg: f64| min <= cfg.tau_feature_max && avg <= cfg.tau_avg_max;

    for (i, track) in tracks.iter().enumerate() {
        match track.phase {
            Phase::Normal => {
                let iou_cost: Vec<f64> = detections.iter().map(|d| 1.0 - iou(&track.bbox, &d.bbox)).collect();
                let count = iou_cost.iter().filter(|c| **c < cfg.tau_overlap).count();
                competitors[i] = count;
                for (j, d) in detections.iter().enumerate() {
                    let c_iou = iou_cost[j];
                    if c_iou > cfg.tau_iou_max {
                        continue;
                    }
                    if count < 2 {
                        matrix.set(i, j, Some(c_iou));
                    } else {
                        let f = track.gallery.feature_cost(&d.embedding, cfg.n_lowest);
                        if feature_ok(f.min, f.avg_lowest) {
                            matrix.set(i, j, Some(f.min + c_iou));
                        }
                    }
                }
            }
            Phase::Lost(_) | Phase::Recovering(_) => {
                for (j, d) in detections.iter().enumerate() {
                    let f = track.gallery.feature_cost(&d.embedding, cfg.n_lowest);
                    if feature_ok(f.min, f.avg_lowest) {
                        matrix.set(i, j, Some(f.min));
                    }
                }
            }
        }
    }
    CostTable { matrix, competitors }
}
