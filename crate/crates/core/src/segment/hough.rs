//! Circle Hough transform over contour points.

use alloc::vec;
use alloc::vec::Vec;

use super::Contour;
use crate::{Error, Mask, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CircleFit {
    pub cx: usize,
    pub cy: usize,
    pub r: usize,
    pub votes: u32,
}

impl CircleFit {
    /// Pixels with `(x - cx)² + (y - cy)² <= r²`, clipped to the frame.
    pub fn fill(&self, width: usize, height: usize) -> Mask {
        let (cx, cy, r2) = (self.cx as i64, self.cy as i64, (self.r * self.r) as i64);
        Mask::from_fn(width, height, |x, y| {
            let (dx, dy) = (x as i64 - cx, y as i64 - cy);
            dx * dx + dy * dy <= r2
        })
    }

    /// Midpoint-rasterized outline, clipped to the frame.
    pub fn outline(&self, width: usize, height: usize) -> Mask {
        let mut m = Mask::empty(width, height);
        for (dx, dy) in midpoint_circle(self.r) {
            let (x, y) = (self.cx as isize + dx, self.cy as isize + dy);
            if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                m.set(x as usize, y as usize, true);
            }
        }
        m
    }
}

/// Distinct offsets of the midpoint (Bresenham) circle of radius `r`, sorted.
///
/// The set is symmetric under negation, so "point p votes for centre c" and
/// "c's circle passes through p" are the same relation.
pub fn midpoint_circle(r: usize) -> Vec<(isize, isize)> {
    let r = r as isize;
    let mut pts = Vec::with_capacity(8 * r as usize + 8);
    let (mut x, mut y, mut err) = (r, 0isize, 1 - r);
    while x >= y {
        for (a, b) in [(x, y), (y, x)] {
            pts.extend_from_slice(&[(a, b), (-a, b), (a, -b), (-a, -b)]);
        }
        y += 1;
        if err < 0 {
            err += 2 * y + 1;
        } else {
            x -= 1;
            err += 2 * (y - x) + 1;
        }
    }
    pts.sort_unstable();
    pts.dedup();
    pts
}

/// Best circle through the contour's pixels over the integer grid
/// `cx ∈ [0, width)`, `cy ∈ [0, height)`, `r ∈ [r_min, r_max]`.
///
/// Repeated chain pixels vote once. The global maximum wins; ties go to the
/// smaller radius, then smaller `cy`, then smaller `cx`.
pub fn fit_circle_hough(
    c: &Contour,
    width: usize,
    height: usize,
    r_min: usize,
    r_max: usize,
) -> Result<CircleFit> {
    if c.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            found: c.len(),
        });
    }
    if r_min < 1 || r_min > r_max {
        return Err(Error::InvalidParameter(
            "Hough radius range must satisfy 1 <= r_min <= r_max",
        ));
    }
    let mut points = c.points.clone();
    points.sort_unstable();
    points.dedup();

    let mut acc = vec![0u32; width * height];
    let mut best: Option<CircleFit> = None;
    for r in r_min..=r_max {
        acc.iter_mut().for_each(|v| *v = 0);
        let offsets = midpoint_circle(r);
        for &(px, py) in &points {
            let (px, py) = (px as isize, py as isize);
            for &(dx, dy) in &offsets {
                let (x, y) = (px + dx, py + dy);
                if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                    acc[y as usize * width + x as usize] += 1;
                }
            }
        }
        let current = best.map_or(0, |b| b.votes);
        // First strict maximum in (cy, cx) raster order.
        let mut top = current;
        let mut at = None;
        for (i, &v) in acc.iter().enumerate() {
            if v > top {
                top = v;
                at = Some(i);
            }
        }
        if let Some(i) = at {
            best = Some(CircleFit {
                cx: i % width,
                cy: i / width,
                r,
                votes: top,
            });
        }
    }
    best.ok_or(Error::InvalidParameter(
        "no circle centre inside the frame received a vote",
    ))
}
