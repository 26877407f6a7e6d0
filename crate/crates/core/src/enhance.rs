//! B-mode frame enhancement: log compression, squaring, 3×3 median and CLAHE.
//!
//! All stages map 8-bit frames to 8-bit frames of the same size and are
//! bit-deterministic. Pointwise stages round half up; CLAHE blends tile
//! mappings in exact integer arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Frame, Result};

/// Tile grid and clip limit for [`clahe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaheParams {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Clip limit as a multiple of the mean histogram bin height.
    pub clip_limit_rel: f64,
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            tiles_x: 8,
            tiles_y: 8,
            clip_limit_rel: 2.0,
        }
    }
}

impl ClaheParams {
    pub fn validate(&self) -> Result<()> {
        if self.tiles_x == 0 || self.tiles_y == 0 {
            return Err(Error::InvalidParameter(
                "CLAHE tile counts must be at least 1",
            ));
        }
        if !self.clip_limit_rel.is_finite() || self.clip_limit_rel < 1.0 {
            return Err(Error::InvalidParameter("CLAHE clip limit must be >= 1"));
        }
        Ok(())
    }
}

#[inline]
fn round_half_up(v: f64) -> u8 {
    libm::floor(v + 0.5).clamp(0.0, 255.0) as u8
}

/// `round(255 · ln(1 + x) / ln 256)` for every intensity.
pub fn log_compress_lut() -> [u8; 256] {
    let mut lut = [0u8; 256];
    for (x, out) in lut.iter_mut().enumerate() {
        // log2 keeps ln(1+x)/ln(256) exact at powers of two (x = 15 -> 127.5).
        *out = round_half_up(255.0 * libm::log2(1.0 + x as f64) / 8.0);
    }
    lut
}

/// `round(x² / 255)` for every intensity, in integers.
pub fn square_lut() -> [u8; 256] {
    let mut lut = [0u8; 256];
    for (x, out) in lut.iter_mut().enumerate() {
        *out = ((2 * x * x + 255) / 510) as u8;
    }
    lut
}

pub fn log_compress(f: &Frame) -> Frame {
    f.map_lut(&log_compress_lut())
}

pub fn square(f: &Frame) -> Frame {
    f.map_lut(&square_lut())
}

/// 3×3 median with edge replication at the borders.
pub fn median3(f: &Frame) -> Frame {
    let (w, h) = f.dims();
    let src = f.data();
    let mut out = Vec::with_capacity(w * h);
    let mut win = [0u8; 9];
    for y in 0..h {
        let rows = [y.saturating_sub(1), y, (y + 1).min(h - 1)];
        for x in 0..w {
            let cols = [x.saturating_sub(1), x, (x + 1).min(w - 1)];
            let mut i = 0;
            for &ry in &rows {
                let row = &src[ry * w..ry * w + w];
                for &cx in &cols {
                    win[i] = row[cx];
                    i += 1;
                }
            }
            win.sort_unstable();
            out.push(win[4]);
        }
    }
    Frame::new(w, h, out).expect("same geometry as input")
}

/// Clipped, redistributed histogram mapping for a single tile.
///
/// `hist` must sum to `n`. Counts above `ceil(clip · n / 256)` are removed and
/// spread evenly over all bins; the remainder goes one count each to the
/// lowest bins. The resulting CDF is scaled to `[0, 255]`.
pub fn clipped_tile_lut(hist: &[u32; 256], n: u32, clip_limit_rel: f64) -> [u8; 256] {
    let limit = (libm::ceil(clip_limit_rel * n as f64 / 256.0) as u32).max(1);
    let mut clipped = *hist;
    let mut excess = 0u32;
    for c in clipped.iter_mut() {
        if *c > limit {
            excess += *c - limit;
            *c = limit;
        }
    }
    let share = excess / 256;
    let rem = (excess % 256) as usize;
    for (i, c) in clipped.iter_mut().enumerate() {
        *c += share + u32::from(i < rem);
    }

    let mut lut = [0u8; 256];
    let mut cdf = 0u64;
    let n = n as u64;
    for (out, &c) in lut.iter_mut().zip(clipped.iter()) {
        cdf += c as u64;
        *out = ((2 * cdf * 255 + n) / (2 * n)).min(255) as u8;
    }
    lut
}

/// Contrast limited adaptive histogram equalization.
///
/// Tiles are `ceil(w / tiles_x) × ceil(h / tiles_y)` pixels; tiles that run
/// past the right or bottom edge read replicated edge pixels, so every tile
/// has the same pixel count. Each output pixel blends the mappings of its four
/// nearest tile centres bilinearly (edge tiles replicated).
pub fn clahe(f: &Frame, p: &ClaheParams) -> Result<Frame> {
    p.validate()?;
    let (w, h) = f.dims();
    if w < p.tiles_x || h < p.tiles_y {
        return Err(Error::InvalidParameter(
            "CLAHE tiles must be at least 1 pixel",
        ));
    }
    let tw = w.div_ceil(p.tiles_x);
    let th = h.div_ceil(p.tiles_y);
    let n = (tw * th) as u32;
    let src = f.data();

    let mut luts = vec![[0u8; 256]; p.tiles_x * p.tiles_y];
    for ty in 0..p.tiles_y {
        for tx in 0..p.tiles_x {
            let mut hist = [0u32; 256];
            for y in ty * th..ty * th + th {
                let row = y.min(h - 1) * w;
                for x in tx * tw..tx * tw + tw {
                    hist[src[row + x.min(w - 1)] as usize] += 1;
                }
            }
            luts[ty * p.tiles_x + tx] = clipped_tile_lut(&hist, n, p.clip_limit_rel);
        }
    }

    // Pixel centre x + 0.5 sits at tile coordinate (2x + 1 - tw) / (2 tw)
    // relative to the first tile centre; everything below is exact integers.
    let blend = |coord: usize, tile: usize, tiles: usize| -> (usize, usize, u64) {
        let den = 2 * tile as i64;
        let num = 2 * coord as i64 + 1 - tile as i64;
        let t0 = num.div_euclid(den);
        let frac = num.rem_euclid(den) as u64;
        let last = tiles as i64 - 1;
        (
            t0.clamp(0, last) as usize,
            (t0 + 1).clamp(0, last) as usize,
            frac,
        )
    };
    let den_x = 2 * tw as u64;
    let den_y = 2 * th as u64;
    let den = den_x * den_y;

    let x_weights: Vec<(usize, usize, u64)> = (0..w).map(|x| blend(x, tw, p.tiles_x)).collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let (ty0, ty1, fy) = blend(y, th, p.tiles_y);
        let row0 = &luts[ty0 * p.tiles_x..ty0 * p.tiles_x + p.tiles_x];
        let row1 = &luts[ty1 * p.tiles_x..ty1 * p.tiles_x + p.tiles_x];
        for (x, &(tx0, tx1, fx)) in x_weights.iter().enumerate() {
            let v = src[y * w + x] as usize;
            let top = (den_x - fx) * row0[tx0][v] as u64 + fx * row0[tx1][v] as u64;
            let bottom = (den_x - fx) * row1[tx0][v] as u64 + fx * row1[tx1][v] as u64;
            let num = (den_y - fy) * top + fy * bottom;
            out.push(((2 * num + den) / (2 * den)).min(255) as u8);
        }
    }
    Frame::new(w, h, out)
}

/// `clahe(median3(square(log_compress(f))))`.
pub fn enhance_pipeline(f: &Frame, p: &ClaheParams) -> Result<Frame> {
    let stages = enhance_stages(f, p)?;
    Ok(stages.clahe)
}

/// Intermediate images of the enhancement chain, kept for step dumps.
#[derive(Debug, Clone)]
pub struct EnhanceStages {
    pub log_squared: Frame,
    pub median: Frame,
    pub clahe: Frame,
}

pub fn enhance_stages(f: &Frame, p: &ClaheParams) -> Result<EnhanceStages> {
    let log_squared = square(&log_compress(f));
    let median = median3(&log_squared);
    let clahe = clahe(&median, p)?;
    Ok(EnhanceStages {
        log_squared,
        median,
        clahe,
    })
}
