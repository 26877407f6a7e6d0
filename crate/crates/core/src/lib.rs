//! Image processing and volume reconstruction for track-guided freehand 3D
//! ultrasound.
//!
//! Every stage is a pure function over 8-bit frames:
//!
//! 1. [`enhance`] – log compression, squaring, 3×3 median, CLAHE.
//! 2. [`segment`] – global threshold, cross closing, border following,
//!    target contour selection, Hough circle fit, masking.
//! 3. [`reconstruct`] – Z-axis trilinear upsampling into a voxel grid,
//!    orthogonal slices, MIP and front-to-back compositing.
//! 4. [`evaluate`] – IoU against reference masks and centerline fits.
//! 5. [`phantom`] – seeded slanted-tube stacks with exact ground truth.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! stack-level parallelism live in the `usvol` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod enhance;
pub mod error;
pub mod evaluate;
pub mod frame;
pub mod phantom;
pub mod reconstruct;
pub mod segment;

pub use error::{Error, Result};
pub use frame::{AcquisitionMeta, Frame, FrameStack, Mask};
