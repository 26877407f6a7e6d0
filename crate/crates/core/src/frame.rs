//! Frames, binary masks and acquisition geometry.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Lateral and axial pixel pitch used when a manifest does not declare one.
pub const DEFAULT_PIXEL_SPACING_MM: f64 = 0.3;
/// Elevational step between frames: a 120 mm track swept in 150 frames.
pub const DEFAULT_FRAME_SPACING_MM: f64 = 120.0 / 150.0;

/// One 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(
                "frame dimensions must be at least 1",
            ));
        }
        if data.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Frame {
            width,
            height,
            data,
        })
    }

    /// Frame with every pixel set to `value`.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(
            width > 0 && height > 0,
            "frame dimensions must be at least 1"
        );
        Frame {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds a frame by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(
            width > 0 && height > 0,
            "frame dimensions must be at least 1"
        );
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Frame {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Applies a per-intensity lookup table.
    pub fn map_lut(&self, lut: &[u8; 256]) -> Frame {
        Frame {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| lut[v as usize]).collect(),
        }
    }

    pub(crate) fn check_same_dims(&self, other: (usize, usize)) -> Result<()> {
        if self.dims() != other {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other,
            });
        }
        Ok(())
    }
}

/// Binary image whose pixels are exactly 0 (background) or 255 (foreground).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask(Frame);

impl Mask {
    pub const ON: u8 = 255;

    pub fn empty(width: usize, height: usize) -> Self {
        Mask(Frame::filled(width, height, 0))
    }

    pub fn full(width: usize, height: usize) -> Self {
        Mask(Frame::filled(width, height, Self::ON))
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        Mask(Frame::from_fn(width, height, |x, y| {
            if f(x, y) {
                Self::ON
            } else {
                0
            }
        }))
    }

    /// Validates that `frame` holds only 0 and 255.
    pub fn from_frame(frame: Frame) -> Result<Self> {
        if let Some(i) = frame.data.iter().position(|&v| v != 0 && v != Self::ON) {
            return Err(Error::NotBinary {
                x: i % frame.width,
                y: i / frame.width,
                value: frame.data[i],
            });
        }
        Ok(Mask(frame))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn is_on(&self, x: usize, y: usize) -> bool {
        self.0.get(x, y) != 0
    }

    /// Like [`Mask::is_on`], treating out-of-bounds coordinates as background.
    #[inline]
    pub fn is_on_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.0.width
            && (y as usize) < self.0.height
            && self.is_on(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.0.set(x, y, if on { Self::ON } else { 0 });
    }

    pub fn count(&self) -> usize {
        self.0.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn as_frame(&self) -> &Frame {
        &self.0
    }

    pub fn into_frame(self) -> Frame {
        self.0
    }

    /// True when every foreground pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.dims() == other.dims()
            && self
                .0
                .data
                .iter()
                .zip(&other.0.data)
                .all(|(&a, &b)| a == 0 || b != 0)
    }
}

/// Physical geometry of an acquisition along the track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionMeta {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    /// Lateral pitch, mm per pixel.
    pub pixel_spacing_x: f64,
    /// Axial pitch, mm per pixel.
    pub pixel_spacing_y: f64,
    /// Elevational step between consecutive frames, mm.
    pub frame_spacing_z: f64,
}

impl AcquisitionMeta {
    /// Geometry with the default spacings.
    pub fn with_defaults(width: usize, height: usize, frame_count: usize) -> Self {
        AcquisitionMeta {
            width,
            height,
            frame_count,
            pixel_spacing_x: DEFAULT_PIXEL_SPACING_MM,
            pixel_spacing_y: DEFAULT_PIXEL_SPACING_MM,
            frame_spacing_z: DEFAULT_FRAME_SPACING_MM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.frame_count == 0 {
            return Err(Error::InvalidParameter(
                "width, height and frame_count must be at least 1",
            ));
        }
        let spacings = [
            self.pixel_spacing_x,
            self.pixel_spacing_y,
            self.frame_spacing_z,
        ];
        if spacings.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidParameter(
                "spacings must be positive and finite",
            ));
        }
        Ok(())
    }
}

/// Ordered frames of one sweep together with their geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    meta: AcquisitionMeta,
    frames: Vec<Frame>,
    binary: bool,
}

impl FrameStack {
    pub fn new(meta: AcquisitionMeta, frames: Vec<Frame>) -> Result<Self> {
        meta.validate()?;
        if frames.len() != meta.frame_count {
            return Err(Error::InvalidParameter(
                "frame count does not match the declared frame_count",
            ));
        }
        for f in &frames {
            f.check_same_dims((meta.width, meta.height))
                .map_err(|_| Error::DimensionMismatch {
                    expected: (meta.width, meta.height),
                    found: f.dims(),
                })?;
        }
        Ok(FrameStack {
            meta,
            frames,
            binary: false,
        })
    }

    /// Builds a stack of masks; the binary flag is set.
    pub fn from_masks(meta: AcquisitionMeta, masks: Vec<Mask>) -> Result<Self> {
        let mut stack = Self::new(meta, masks.into_iter().map(Mask::into_frame).collect())?;
        stack.binary = true;
        Ok(stack)
    }

    /// Re-checks every frame for binary content and sets the flag.
    pub fn into_binary(mut self) -> Result<Self> {
        for f in &self.frames {
            Mask::from_frame(f.clone())?;
        }
        self.binary = true;
        Ok(self)
    }

    pub fn meta(&self) -> &AcquisitionMeta {
        &self.meta
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    /// Frames as masks. Fails on the first non-binary pixel.
    pub fn masks(&self) -> Result<Vec<Mask>> {
        self.frames.iter().cloned().map(Mask::from_frame).collect()
    }
}
