//! Synthetic slanted-tube sweeps with exact ground-truth masks.
//!
//! The tube is an infinite cylinder of radius `tube_radius_mm` whose axis is
//! tilted by `slant_deg` from Z inside the Y–Z plane. Frame `k` is the plane
//! `z = k · frame_spacing`, cutting the cylinder in an ellipse with semi-axes
//! `r` (along X) and `r / cos(slant)` (along Y) whose centre moves
//! `tan(slant) · frame_spacing / pixel_spacing_y` pixels per frame along Y.
//!
//! Speckle is multiplicative: `mean · (1 + scale · (R − 1))`, with `R`
//! Rayleigh distributed and normalised to unit mean. Frame `k` draws from
//! ChaCha8 seeded with `seed` on stream `k`, one sample per pixel in raster
//! order, so every frame can be regenerated on its own.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{AcquisitionMeta, Error, Frame, FrameStack, Mask, Result};

/// Minimum clearance between the tube cross-section and the frame edge.
pub const EDGE_MARGIN_PX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubePhantomParams {
    pub meta: AcquisitionMeta,
    pub tube_radius_mm: f64,
    /// Tilt of the tube axis away from Z, degrees, in the Y–Z plane.
    pub slant_deg: f64,
    /// Ellipse centre `(x, y)` in pixels at frame 0.
    pub center0: (f64, f64),
    pub interior_mean: f64,
    pub background_mean: f64,
    pub speckle_scale: f64,
    pub seed: u64,
}

impl Default for TubePhantomParams {
    /// 150 frames of 100×128 px at 0.3 mm pitch, 0.15 mm apart; a 4 mm tube
    /// at 20° on a near-anechoic background.
    fn default() -> Self {
        let meta = AcquisitionMeta {
            width: 100,
            height: 128,
            frame_count: 150,
            pixel_spacing_x: 0.3,
            pixel_spacing_y: 0.3,
            frame_spacing_z: 0.15,
        };
        TubePhantomParams {
            meta,
            tube_radius_mm: 4.0,
            slant_deg: 20.0,
            center0: (0.0, 0.0),
            interior_mean: 110.0,
            background_mean: 2.0,
            speckle_scale: 0.5,
            seed: 42,
        }
        .centered()
    }
}

impl TubePhantomParams {
    /// Ellipse centre drift along Y, pixels per frame.
    pub fn drift_px_per_frame(&self) -> f64 {
        libm::tan(self.slant_deg.to_radians()) * self.meta.frame_spacing_z
            / self.meta.pixel_spacing_y
    }

    /// Semi-axes of the cross-section in pixels, `(along X, along Y)`.
    pub fn semi_axes_px(&self) -> (f64, f64) {
        let cos = libm::cos(self.slant_deg.to_radians());
        (
            self.tube_radius_mm / self.meta.pixel_spacing_x,
            self.tube_radius_mm / (self.meta.pixel_spacing_y * cos),
        )
    }

    pub fn ellipse_center(&self, k: usize) -> (f64, f64) {
        (
            self.center0.0,
            self.center0.1 + k as f64 * self.drift_px_per_frame(),
        )
    }

    /// Places the sweep so the tube path is centred in the frame.
    pub fn centered(mut self) -> Self {
        let total = (self.meta.frame_count.saturating_sub(1)) as f64 * self.drift_px_per_frame();
        self.center0 = (
            (self.meta.width as f64 - 1.0) / 2.0,
            (self.meta.height as f64 - 1.0) / 2.0 - total / 2.0,
        );
        self
    }

    /// Pixel-centre inclusion test for frame `k`.
    pub fn region_contains(&self, k: usize, x: usize, y: usize) -> bool {
        let (cx, cy) = self.ellipse_center(k);
        let cos = libm::cos(self.slant_deg.to_radians());
        let dx = (x as f64 - cx) * self.meta.pixel_spacing_x;
        let dy = (y as f64 - cy) * self.meta.pixel_spacing_y * cos;
        dx * dx + dy * dy <= self.tube_radius_mm * self.tube_radius_mm
    }

    pub fn validate(&self) -> Result<()> {
        self.meta.validate()?;
        if !(0.0..90.0).contains(&self.slant_deg) {
            return Err(Error::InvalidParameter("slant must lie in [0, 90) degrees"));
        }
        for m in [self.interior_mean, self.background_mean] {
            if !(0.0..=255.0).contains(&m) {
                return Err(Error::InvalidParameter(
                    "intensity means must lie in [0, 255]",
                ));
            }
        }
        if !self.speckle_scale.is_finite() || self.speckle_scale < 0.0 {
            return Err(Error::InvalidParameter(
                "speckle scale must be non-negative",
            ));
        }
        let (ax, ay) = self.semi_axes_px();
        if !(ax >= 1.0 && ay >= 1.0) || !ay.is_finite() {
            return Err(Error::InvalidParameter(
                "tube radius must span at least one pixel",
            ));
        }
        let (w, h) = (self.meta.width as f64, self.meta.height as f64);
        // Drift is linear, so the first and last frames bound the path.
        for k in [0, self.meta.frame_count - 1] {
            let (cx, cy) = self.ellipse_center(k);
            let inside = cx - ax >= EDGE_MARGIN_PX
                && cx + ax <= w - 1.0 - EDGE_MARGIN_PX
                && cy - ay >= EDGE_MARGIN_PX
                && cy + ay <= h - 1.0 - EDGE_MARGIN_PX;
            if !inside {
                return Err(Error::TubeOutOfBounds { frame: k });
            }
        }
        Ok(())
    }
}

fn frame_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Rayleigh sample with unit mean.
fn rayleigh_unit_mean(rng: &mut ChaCha8Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let r = libm::sqrt(-2.0 * libm::log(1.0 - u));
    r / libm::sqrt(core::f64::consts::FRAC_PI_2)
}

#[inline]
fn speckle_value(mean: f64, scale: f64, rng: &mut ChaCha8Rng) -> u8 {
    let r = rayleigh_unit_mean(rng);
    let v = mean * (1.0 + scale * (r - 1.0));
    libm::floor(v + 0.5).clamp(0.0, 255.0) as u8
}

/// Homogeneous speckle frame; a pure function of `(seed, k)`.
pub fn synth_noise_frame(
    width: usize,
    height: usize,
    mean: f64,
    speckle_scale: f64,
    seed: u64,
    k: usize,
) -> Frame {
    let mut rng = frame_rng(seed, k);
    Frame::from_fn(width, height, |_, _| {
        speckle_value(mean, speckle_scale, &mut rng)
    })
}

/// Frame `k` of the sweep and its ground-truth mask.
pub fn synth_tube_frame(p: &TubePhantomParams, k: usize) -> (Frame, Mask) {
    let (w, h) = (p.meta.width, p.meta.height);
    let mask = Mask::from_fn(w, h, |x, y| p.region_contains(k, x, y));
    let mut rng = frame_rng(p.seed, k);
    let frame = Frame::from_fn(w, h, |x, y| {
        let mean = if mask.is_on(x, y) {
            p.interior_mean
        } else {
            p.background_mean
        };
        speckle_value(mean, p.speckle_scale, &mut rng)
    });
    (frame, mask)
}

/// Full sweep: `(frames, ground-truth masks)`.
pub fn synth_tube_stack(p: &TubePhantomParams) -> Result<(FrameStack, FrameStack)> {
    p.validate()?;
    let (frames, masks): (Vec<Frame>, Vec<Mask>) = (0..p.meta.frame_count)
        .map(|k| synth_tube_frame(p, k))
        .unzip();
    Ok((
        FrameStack::new(p.meta, frames)?,
        FrameStack::from_masks(p.meta, masks)?,
    ))
}
