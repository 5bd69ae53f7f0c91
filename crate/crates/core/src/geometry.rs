//! Screen-space primitives shared by the tracker, controller and simulator.
//!
//! Coordinates are normalized to `[0,1]²` with the origin at the top-left of
//! the frame. Pixel inputs are converted with [`BBox::from_pixels`].

use serde::{Deserialize, Serialize};

/// Stable actor identifier taken from the script or from enrollment.
pub type ActorId = String;

/// Reference detector frame used for pixel conversions and distance reports.
pub const FRAME_WIDTH_PX: f64 = 740.0;
pub const FRAME_HEIGHT_PX: f64 = 416.0;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ScreenPoint {
    pub x: f64,
    pub y: f64,
}

impl ScreenPoint {
    pub const CENTER: ScreenPoint = ScreenPoint { x: 0.5, y: 0.5 };

    pub const fn new(x: f64, y: f64) -> Self {
        ScreenPoint { x, y }
    }

    pub fn distance(&self, other: &ScreenPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// True when the point lies inside the visible frame.
    pub fn in_frame(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    /// Clamp into the frame; only used for display.
    pub fn clamped(&self) -> ScreenPoint {
        ScreenPoint::new(self.x.clamp(0.0, 1.0), self.y.clamp(0.0, 1.0))
    }
}

impl From<[f64; 2]> for ScreenPoint {
    fn from(v: [f64; 2]) -> Self {
        ScreenPoint::new(v[0], v[1])
    }
}

impl From<ScreenPoint> for [f64; 2] {
    fn from(p: ScreenPoint) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned box given by its center and size, all normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        BBox { cx, cy, w, h }
    }

    /// Build from pixel corners `[x0, y0, x1, y1]` in a frame of the given size.
    pub fn from_pixels(corners: [f64; 4], frame_w: f64, frame_h: f64) -> Self {
        let [x0, y0, x1, y1] = corners;
        BBox::new(
            (x0 + x1) / (2.0 * frame_w),
            (y0 + y1) / (2.0 * frame_h),
            (x1 - x0) / frame_w,
            (y1 - y0) / frame_h,
        )
    }

    pub fn center(&self) -> ScreenPoint {
        ScreenPoint::new(self.cx, self.cy)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_valid(&self) -> bool {
        self.cx.is_finite()
            && self.cy.is_finite()
            && self.w > 0.0
            && self.h > 0.0
            && self.w.is_finite()
            && self.h.is_finite()
    }

    pub fn left(&self) -> f64 {
        self.cx - 0.5 * self.w
    }
    pub fn right(&self) -> f64 {
        self.cx + 0.5 * self.w
    }
    pub fn top(&self) -> f64 {
        self.cy - 0.5 * self.h
    }
    pub fn bottom(&self) -> f64 {
        self.cy + 0.5 * self.h
    }
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.cx, b.cy, b.w, b.h]
    }
}

/// Intersection over union (Jaccard index) of two boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.right().min(b.right()) - a.left().max(b.left())).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.top().max(b.top())).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Unit-norm appearance vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Embedding(Vec<f64>);

impl TryFrom<Vec<f64>> for Embedding {
    type Error = String;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Embedding::from_unit(values).ok_or_else(|| "embedding must have unit norm".to_string())
    }
}

impl From<Embedding> for Vec<f64> {
    fn from(e: Embedding) -> Self {
        e.0
    }
}

impl Embedding {
    /// Normalize `values`; returns `None` for an empty, zero or non-finite vector.
    pub fn normalized(values: Vec<f64>) -> Option<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if values.is_empty() || !norm.is_finite() || norm == 0.0 {
            return None;
        }
        Some(Embedding(values.into_iter().map(|v| v / norm).collect()))
    }

    /// Wrap values that are already unit norm (checked to 1e-6).
    pub fn from_unit(values: Vec<f64>) -> Option<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        ((norm - 1.0).abs() <= 1e-6).then_some(Embedding(values))
    }

    /// Standard basis vector `e_i` of length `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Embedding(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Embedding) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// `1 − a·b` for unit vectors, clamped to `[0, 2]` against rounding.
pub fn cosine_distance(a: &Embedding, b: &Embedding) -> f64 {
    (1.0 - a.dot(b)).clamp(0.0, 2.0)
}

/// Discrete time stamp of the tick loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub index: u64,
    pub dt: f64,
}

impl Tick {
    pub fn new(index: u64, dt: f64) -> Self {
        Tick { index, dt }
    }

    pub fn seconds(&self) -> f64 {
        self.index as f64 * self.dt
    }

    pub fn next(&self) -> Tick {
        Tick::new(self.index + 1, self.dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_pixel_example() {
        let a = BBox::from_pixels([0.0, 0.0, 10.0, 10.0], FRAME_WIDTH_PX, FRAME_HEIGHT_PX);
        let b = BBox::from_pixels([5.0, 0.0, 15.0, 10.0], FRAME_WIDTH_PX, FRAME_HEIGHT_PX);
        // intersection 5x10, union 15x10
        assert!((iou(&a, &b) - 50.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn iou_identity_and_disjoint() {
        let a = BBox::new(0.3, 0.3, 0.1, 0.2);
        assert!((iou(&a, &a) - 1.0).abs() < 1e-15);
        let b = BBox::new(0.8, 0.3, 0.1, 0.2);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn cosine_distance_cases() {
        let a = Embedding::basis(4, 0);
        let b = Embedding::basis(4, 1);
        let neg = Embedding::normalized(vec![-1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(cosine_distance(&a, &a), 0.0);
        assert_eq!(cosine_distance(&a, &b), 1.0);
        assert_eq!(cosine_distance(&a, &neg), 2.0);
    }

    #[test]
    fn normalized_rejects_zero() {
        assert!(Embedding::normalized(vec![0.0; 3]).is_none());
        assert!(Embedding::normalized(vec![]).is_none());
        let e = Embedding::normalized(vec![3.0, 4.0]).unwrap();
        assert!((e.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serde_shapes() {
        let p: ScreenPoint = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(p, ScreenPoint::new(0.25, 0.75));
        let b = BBox::new(0.5, 0.5, 0.1, 0.2);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0.5,0.5,0.1,0.2]");
    }
}
