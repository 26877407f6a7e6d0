//! Per-frame segmentation of the enhanced image.
//!
//! threshold → cross closing → outer border following → largest interior
//! contour → region (Hough circle or filled contour) → masked frame.

mod contour;
mod hough;
mod morphology;

pub use contour::{find_contours, select_target_contour, Contour};
pub use hough::{fit_circle_hough, midpoint_circle, CircleFit};
pub use morphology::{close_cross3, dilate_cross, erode_cross, threshold, CROSS};

use crate::{Frame, Mask, Result};

/// Intensity threshold applied to the CLAHE output.
pub const DEFAULT_THRESHOLD: u8 = 49;
pub const DEFAULT_R_MIN: usize = 5;

/// How the region of interest is derived from the target contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SegmentMode {
    /// Best Hough circle through the contour (tube cross-sections).
    #[default]
    Circle,
    /// The filled contour itself (irregular structures such as bone).
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentParams {
    pub mode: SegmentMode,
    pub threshold: u8,
    pub r_min: usize,
    /// `None` means `floor(min(width, height) / 2)`.
    pub r_max: Option<usize>,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            mode: SegmentMode::Circle,
            threshold: DEFAULT_THRESHOLD,
            r_min: DEFAULT_R_MIN,
            r_max: None,
        }
    }
}

impl SegmentParams {
    pub fn r_max_for(&self, width: usize, height: usize) -> usize {
        self.r_max.unwrap_or(width.min(height) / 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub mode: SegmentMode,
    pub target: Contour,
    pub circle: Option<CircleFit>,
    pub mask: Mask,
    pub segmented: Frame,
}

/// Every intermediate image of [`segment_frame`], for step inspection.
#[derive(Debug, Clone)]
pub struct SegmentTrace {
    pub thresholded: Mask,
    pub closed: Mask,
    pub contours: alloc::vec::Vec<Contour>,
    pub result: Option<SegmentationResult>,
}

/// Keeps `enhanced` where `region` is set, zero elsewhere.
pub fn apply_mask(enhanced: &Frame, region: &Mask) -> Result<Frame> {
    enhanced.check_same_dims(region.dims())?;
    let data = enhanced
        .data()
        .iter()
        .zip(region.as_frame().data())
        .map(|(&v, &m)| if m != 0 { v } else { 0 })
        .collect();
    Frame::new(enhanced.width(), enhanced.height(), data)
}

pub fn segment_trace(enhanced: &Frame, p: &SegmentParams) -> Result<SegmentTrace> {
    let (w, h) = enhanced.dims();
    let thresholded = threshold(enhanced, p.threshold);
    let closed = close_cross3(&thresholded);
    let contours = find_contours(&closed);
    let result = match select_target_contour(&contours, w, h) {
        None => None,
        Some(target) => {
            let (circle, mask) = match p.mode {
                SegmentMode::Circle => {
                    let fit = fit_circle_hough(target, w, h, p.r_min, p.r_max_for(w, h))?;
                    (Some(fit), fit.fill(w, h))
                }
                SegmentMode::Contour => (None, target.fill(w, h)),
            };
            let segmented = apply_mask(enhanced, &mask)?;
            Some(SegmentationResult {
                mode: p.mode,
                target: target.clone(),
                circle,
                mask,
                segmented,
            })
        }
    };
    Ok(SegmentTrace {
        thresholded,
        closed,
        contours,
        result,
    })
}

/// Segments one enhanced frame. `Ok(None)` when no contour clears the border.
pub fn segment_frame(enhanced: &Frame, p: &SegmentParams) -> Result<Option<SegmentationResult>> {
    Ok(segment_trace(enhanced, p)?.result)
}
