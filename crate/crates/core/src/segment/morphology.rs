//! Binary thresholding and closing with the 3×3 cross.

use crate::{Frame, Mask};

/// Offsets of the 5-pixel cross structuring element.
pub const CROSS: [(isize, isize); 5] = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)];

/// Foreground where the pixel is strictly greater than `t`.
pub fn threshold(f: &Frame, t: u8) -> Mask {
    Mask::from_fn(f.width(), f.height(), |x, y| f.get(x, y) > t)
}

pub fn dilate_cross(m: &Mask) -> Mask {
    let (w, h) = m.dims();
    Mask::from_fn(w, h, |x, y| {
        CROSS
            .iter()
            .any(|&(dx, dy)| m.is_on_signed(x as isize + dx, y as isize + dy))
    })
}

/// Erosion; pixels outside the frame count as background.
pub fn erode_cross(m: &Mask) -> Mask {
    let (w, h) = m.dims();
    Mask::from_fn(w, h, |x, y| {
        CROSS
            .iter()
            .all(|&(dx, dy)| m.is_on_signed(x as isize + dx, y as isize + dy))
    })
}

/// Dilation followed by erosion with [`CROSS`].
///
/// The input is zero-extended. The intermediate dilation is kept on a grid
/// padded by one pixel, so foreground touching the frame edge survives and
/// the result equals closing on the unbounded plane, clipped to the frame.
pub fn close_cross3(m: &Mask) -> Mask {
    let (w, h) = m.dims();
    let (pw, ph) = (w + 2, h + 2);
    let mut dilated = alloc::vec![false; pw * ph];
    for py in 0..ph {
        for px in 0..pw {
            let (x, y) = (px as isize - 1, py as isize - 1);
            dilated[py * pw + px] = CROSS.iter().any(|&(dx, dy)| m.is_on_signed(x + dx, y + dy));
        }
    }
    Mask::from_fn(w, h, |x, y| {
        CROSS.iter().all(|&(dx, dy)| {
            let px = (x as isize + 1 + dx) as usize;
            let py = (y as isize + 1 + dy) as usize;
            dilated[py * pw + px]
        })
    })
}
