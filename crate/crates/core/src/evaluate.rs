//! Overlap scores against reference masks and straightness of fitted centres.

use alloc::vec::Vec;

use crate::segment::CircleFit;
use crate::{Error, Mask, Result};

/// Intersection over union. Two empty masks agree perfectly (1.0).
pub fn iou(a: &Mask, b: &Mask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            found: b.dims(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.as_frame().data().iter().zip(b.as_frame().data()) {
        let (x, y) = (x != 0, y != 0);
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoUReport {
    /// `(frame_index, iou)` in sample order.
    pub per_frame: Vec<(usize, f64)>,
    pub mean_iou: f64,
    pub sampled_indices: Vec<usize>,
}

/// IoU on each sampled frame and their arithmetic mean.
pub fn mean_iou(auto: &[Mask], reference: &[Mask], sample: &[usize]) -> Result<IoUReport> {
    if auto.len() != reference.len() {
        return Err(Error::InvalidParameter(
            "automatic and reference stacks differ in length",
        ));
    }
    if sample.is_empty() {
        return Err(Error::InvalidParameter("no frames sampled"));
    }
    let mut per_frame = Vec::with_capacity(sample.len());
    for &i in sample {
        if i >= auto.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: auto.len(),
            });
        }
        per_frame.push((i, iou(&auto[i], &reference[i])?));
    }
    let mean_iou = per_frame.iter().map(|&(_, v)| v).sum::<f64>() / per_frame.len() as f64;
    Ok(IoUReport {
        per_frame,
        mean_iou,
        sampled_indices: sample.to_vec(),
    })
}

/// `0, step, 2·step, …` below `len`.
pub fn sample_every(len: usize, step: usize) -> Vec<usize> {
    (0..len).step_by(step.max(1)).collect()
}

/// `count` indices spread evenly over `0..len`, first and last included.
pub fn sample_evenly(len: usize, count: usize) -> Vec<usize> {
    match (len, count) {
        (0, _) | (_, 0) => Vec::new(),
        (_, 1) => alloc::vec![0],
        _ if count >= len => (0..len).collect(),
        _ => (0..count).map(|i| i * (len - 1) / (count - 1)).collect(),
    }
}

/// Least-squares line of circle centres against frame index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterlineFit {
    /// Pixels per frame along (x, y).
    pub slope: [f64; 2],
    /// Centre at frame index 0, pixels.
    pub intercept: [f64; 2],
    /// Root mean squared Euclidean distance of the centres from the line.
    pub rms_residual: f64,
}

/// Independent per-axis least-squares fits of `cx` and `cy` against frame
/// index.
pub fn centerline_fit(circles: &[(usize, CircleFit)]) -> Result<CenterlineFit> {
    if circles.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: circles.len(),
        });
    }
    let n = circles.len() as f64;
    let mean_t = circles.iter().map(|&(k, _)| k as f64).sum::<f64>() / n;
    let mean_x = circles.iter().map(|(_, c)| c.cx as f64).sum::<f64>() / n;
    let mean_y = circles.iter().map(|(_, c)| c.cy as f64).sum::<f64>() / n;
    let (mut stt, mut stx, mut sty) = (0.0, 0.0, 0.0);
    for &(k, c) in circles {
        let dt = k as f64 - mean_t;
        stt += dt * dt;
        stx += dt * (c.cx as f64 - mean_x);
        sty += dt * (c.cy as f64 - mean_y);
    }
    if stt == 0.0 {
        return Err(Error::InvalidParameter(
            "centerline needs at least two distinct frame indices",
        ));
    }
    let slope = [stx / stt, sty / stt];
    let intercept = [mean_x - slope[0] * mean_t, mean_y - slope[1] * mean_t];
    let mut sq = 0.0;
    for &(k, c) in circles {
        let t = k as f64;
        let rx = c.cx as f64 - (intercept[0] + slope[0] * t);
        let ry = c.cy as f64 - (intercept[1] + slope[1] * t);
        sq += rx * rx + ry * ry;
    }
    Ok(CenterlineFit {
        slope,
        intercept,
        rms_residual: libm::sqrt(sq / n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::slice;
    use proptest::prelude::*;

    fn rect(w: usize, h: usize, x0: usize, y0: usize, s: usize) -> Mask {
        Mask::from_fn(w, h, |x, y| x >= x0 && x < x0 + s && y >= y0 && y < y0 + s)
    }

    fn circle(cx: usize, cy: usize) -> CircleFit {
        CircleFit {
            cx,
            cy,
            r: 5,
            votes: 1,
        }
    }

    #[test]
    fn iou_examples() {
        let a = rect(30, 20, 2, 2, 10);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &rect(30, 20, 15, 5, 5)).unwrap(), 0.0);
        let shifted = rect(30, 20, 7, 2, 10);
        assert!((iou(&a, &shifted).unwrap() - 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(iou(&Mask::empty(4, 4), &Mask::empty(4, 4)).unwrap(), 1.0);
        assert!(iou(&a, &Mask::empty(20, 30)).is_err());
    }

    #[test]
    fn mean_iou_examples() {
        let a = rect(10, 10, 1, 1, 4);
        let b = rect(10, 10, 6, 6, 3);
        let rep = mean_iou(&[a.clone(), a.clone()], &[a.clone(), b], &[0, 1]).unwrap();
        assert_eq!(rep.mean_iou, 0.5);
        assert_eq!(rep.per_frame, vec![(0, 1.0), (1, 0.0)]);
        let one = slice::from_ref(&a);
        assert!(mean_iou(one, one, &[1]).is_err());
        assert!(mean_iou(one, &[], &[0]).is_err());
        assert!(mean_iou(one, one, &[]).is_err());
    }

    #[test]
    fn sampling() {
        let every8 = sample_every(150, 8);
        assert_eq!(every8.len(), 19);
        assert_eq!(*every8.last().unwrap(), 144);
        let even = sample_evenly(150, 20);
        assert_eq!(even.len(), 20);
        assert_eq!(even[0], 0);
        assert_eq!(even[19], 149);
        assert!(even.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_evenly(5, 10), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn centerline_examples() {
        let line: Vec<_> = (0..10).map(|k| (k, circle(3 * k + 4, 60 - k))).collect();
        let fit = centerline_fit(&line).unwrap();
        assert!(fit.rms_residual < 1e-12);
        assert!((fit.slope[0] - 3.0).abs() < 1e-12 && (fit.slope[1] + 1.0).abs() < 1e-12);

        let flat: Vec<_> = (5..9).map(|k| (k, circle(20, 30))).collect();
        let fit = centerline_fit(&flat).unwrap();
        assert_eq!(fit.slope, [0.0, 0.0]);
        assert_eq!(fit.intercept, [20.0, 30.0]);

        // (k, 2k + 1) with the outlier at k = 4 dropped before fitting.
        let pts: Vec<_> = (0..10)
            .filter(|&k| k != 4)
            .map(|k| (k, circle(k, 2 * k + 1)))
            .collect();
        let fit = centerline_fit(&pts).unwrap();
        assert!((fit.slope[1] - 2.0).abs() < 1e-12);
        assert!((fit.intercept[1] - 1.0).abs() < 1e-12);

        assert!(centerline_fit(&line[..1]).is_err());
        assert!(centerline_fit(&[(3, circle(1, 1)), (3, circle(2, 2))]).is_err());
    }

    fn arb_mask() -> impl Strategy<Value = Mask> {
        proptest::collection::vec(any::<bool>(), 64)
            .prop_map(|b| Mask::from_fn(8, 8, |x, y| b[y * 8 + x]))
    }

    proptest! {
        #[test]
        fn iou_axioms(a in arb_mask(), b in arb_mask()) {
            let ab = iou(&a, &b).unwrap();
            prop_assert_eq!(ab, iou(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(iou(&a, &a).unwrap(), 1.0);
            let single = mean_iou(slice::from_ref(&a), slice::from_ref(&b), &[0]).unwrap();
            prop_assert_eq!(single.mean_iou, ab);
        }

        #[test]
        fn iou_grows_with_intersection(a in arb_mask(), b in arb_mask(), pick in arb_mask()) {
            // Adding pixels of b to a keeps a ∪ b fixed and grows a ∩ b.
            let grown = Mask::from_fn(8, 8, |x, y| a.is_on(x, y) || (b.is_on(x, y) && pick.is_on(x, y)));
            prop_assert!(iou(&grown, &b).unwrap() >= iou(&a, &b).unwrap());
        }

        #[test]
        fn centerline_residual_translation_invariant(
            cs in proptest::collection::vec((0usize..100, 0usize..100), 3..12),
            shift in 0usize..500,
        ) {
            let pts: Vec<_> = cs.iter().enumerate().map(|(k, &(x, y))| (k, circle(x, y))).collect();
            let moved: Vec<_> = pts.iter().map(|&(k, c)| (k + shift, c)).collect();
            let a = centerline_fit(&pts).unwrap().rms_residual;
            let b = centerline_fit(&moved).unwrap().rms_residual;
            prop_assert!((a - b).abs() < 1e-6);
        }
    }
}
