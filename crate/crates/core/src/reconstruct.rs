//! Voxel volume assembly, trilinear sampling, slicing and axis-aligned
//! rendering.
//!
//! Axis convention: X lateral, Y depth, Z elevation (probe motion along the
//! track). Voxel data is X-fastest, Z-slowest.

use alloc::vec::Vec;

use crate::{AcquisitionMeta, Error, Frame, FrameStack, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    nx: usize,
    ny: usize,
    nz: usize,
    spacing: [f64; 3],
    data: Vec<u8>,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<u8>) -> Result<Self> {
        let [nx, ny, nz] = dims;
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidParameter(
                "volume dimensions must be at least 1",
            ));
        }
        if spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidParameter(
                "voxel spacing must be positive and finite",
            ));
        }
        if data.len() != nx * ny * nz {
            return Err(Error::BufferLength {
                expected: nx * ny * nz,
                found: data.len(),
            });
        }
        Ok(Volume {
            nx,
            ny,
            nz,
            spacing,
            data,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// mm per voxel along X, Y, Z.
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u8 {
        self.data[self.index(i, j, k)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RenderMode {
    #[default]
    Mip,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub axis: Axis,
    pub mode: RenderMode,
    /// Opacity multiplier in (0, 1].
    pub alpha_scale: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            axis: Axis::Z,
            mode: RenderMode::Mip,
            alpha_scale: 0.5,
        }
    }
}

/// Upsampling factor giving roughly isotropic voxels, at least 1.
pub fn default_z_upsample(meta: &AcquisitionMeta) -> usize {
    let pitch = meta.pixel_spacing_x.min(meta.pixel_spacing_y);
    (libm::round(meta.frame_spacing_z / pitch) as usize).max(1)
}

/// Number of Z planes produced from `frame_count` frames.
pub fn upsampled_depth(frame_count: usize, z_upsample: usize) -> usize {
    (frame_count - 1) * z_upsample + 1
}

/// Fills plane `k` of the upsampled volume.
///
/// In-plane coordinates map 1:1 onto frame pixels, so the trilinear weights
/// collapse to linear interpolation between the two bracketing frames:
/// `round_half_up(((u - r)·a + r·b) / u)` with `k = q·u + r`.
pub fn interpolate_plane(frames: &[Frame], z_upsample: usize, k: usize, out: &mut [u8]) {
    let q = k / z_upsample;
    let r = k % z_upsample;
    let lower = frames[q].data();
    if r == 0 {
        out.copy_from_slice(lower);
        return;
    }
    let upper = frames[q + 1].data();
    let u = z_upsample as u32;
    let r = r as u32;
    for ((o, &a), &b) in out.iter_mut().zip(lower).zip(upper) {
        let num = (u - r) * a as u32 + r * b as u32;
        *o = ((2 * num + u) / (2 * u)) as u8;
    }
}

fn check_build(stack: &FrameStack, z_upsample: usize) -> Result<()> {
    if stack.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: stack.len(),
        });
    }
    if z_upsample < 1 {
        return Err(Error::InvalidParameter("z_upsample must be at least 1"));
    }
    Ok(())
}

/// Allocates an empty volume for `stack` with the output geometry of
/// [`build_volume`]. Planes are filled with [`interpolate_plane`].
pub fn volume_shell(stack: &FrameStack, z_upsample: usize) -> Result<Volume> {
    check_build(stack, z_upsample)?;
    let m = stack.meta();
    let nz = upsampled_depth(stack.len(), z_upsample);
    Volume::new(
        [m.width, m.height, nz],
        [
            m.pixel_spacing_x,
            m.pixel_spacing_y,
            m.frame_spacing_z / z_upsample as f64,
        ],
        alloc::vec![0; m.width * m.height * nz],
    )
}

/// Stacks frames along Z, inserting `z_upsample - 1` interpolated planes
/// between neighbours.
pub fn build_volume(stack: &FrameStack, z_upsample: usize) -> Result<Volume> {
    let mut vol = volume_shell(stack, z_upsample)?;
    let plane = vol.nx * vol.ny;
    for (k, out) in vol.data.chunks_exact_mut(plane).enumerate() {
        interpolate_plane(stack.frames(), z_upsample, k, out);
    }
    Ok(vol)
}

/// Trilinear interpolation at real voxel coordinates.
pub fn trilinear_sample(v: &Volume, x: f64, y: f64, z: f64) -> Result<f64> {
    let axis = |c: f64, n: usize| -> Result<(usize, usize, f64)> {
        if !(c >= 0.0 && c <= (n - 1) as f64) {
            return Err(Error::OutOfDomain);
        }
        if n == 1 {
            return Ok((0, 0, 0.0));
        }
        let i0 = (libm::floor(c) as usize).min(n - 2);
        Ok((i0, i0 + 1, c - i0 as f64))
    };
    let (x0, x1, dx) = axis(x, v.nx)?;
    let (y0, y1, dy) = axis(y, v.ny)?;
    let (z0, z1, dz) = axis(z, v.nz)?;
    let lerp = |a: f64, b: f64, t: f64| a * (1.0 - t) + b * t;
    let g = |i, j, k| v.get(i, j, k) as f64;
    let c00 = lerp(g(x0, y0, z0), g(x1, y0, z0), dx);
    let c10 = lerp(g(x0, y1, z0), g(x1, y1, z0), dx);
    let c01 = lerp(g(x0, y0, z1), g(x1, y0, z1), dx);
    let c11 = lerp(g(x0, y1, z1), g(x1, y1, z1), dx);
    Ok(lerp(lerp(c00, c10, dy), lerp(c01, c11, dy), dz))
}

/// Output image size and ray length for rays cast along `axis`.
///
/// Layout: Z → XY image (X horizontal), X → YZ image (Y horizontal),
/// Y → XZ image (X horizontal).
fn projection_geometry(v: &Volume, axis: Axis) -> (usize, usize, usize) {
    match axis {
        Axis::Z => (v.nx, v.ny, v.nz),
        Axis::X => (v.ny, v.nz, v.nx),
        Axis::Y => (v.nx, v.nz, v.ny),
    }
}

#[inline]
fn ray_voxel(v: &Volume, axis: Axis, u: usize, w: usize, t: usize) -> u8 {
    match axis {
        Axis::Z => v.get(u, w, t),
        Axis::X => v.get(t, u, w),
        Axis::Y => v.get(u, t, w),
    }
}

fn project(
    v: &Volume,
    axis: Axis,
    mut ray: impl FnMut(&mut dyn Iterator<Item = u8>) -> u8,
) -> Frame {
    let (w, h, depth) = projection_geometry(v, axis);
    Frame::from_fn(w, h, |u, row| {
        let mut it = (0..depth).map(|t| ray_voxel(v, axis, u, row, t));
        ray(&mut it)
    })
}

/// Orthogonal slice perpendicular to `axis` at `index`.
pub fn extract_slice(v: &Volume, axis: Axis, index: usize) -> Result<Frame> {
    let (w, h, depth) = projection_geometry(v, axis);
    if index >= depth {
        return Err(Error::IndexOutOfRange { index, len: depth });
    }
    Ok(Frame::from_fn(w, h, |u, row| {
        ray_voxel(v, axis, u, row, index)
    }))
}

/// Maximum intensity projection along `axis`.
pub fn render_mip(v: &Volume, axis: Axis) -> Frame {
    project(v, axis, |ray| ray.max().unwrap_or(0))
}

/// Accumulated (colour, opacity) of front-to-back compositing along one ray.
///
/// Each voxel contributes opacity `(value / 255) · alpha_scale` and emission
/// equal to its value; the ray stops once opacity reaches 0.999.
pub fn composite_ray(ray: impl IntoIterator<Item = u8>, alpha_scale: f64) -> (f64, f64) {
    let mut color = 0.0;
    let mut opacity = 0.0;
    for value in ray {
        let alpha = value as f64 / 255.0 * alpha_scale;
        color += (1.0 - opacity) * alpha * value as f64;
        opacity += (1.0 - opacity) * alpha;
        if opacity >= 0.999 {
            break;
        }
    }
    (color, opacity)
}

pub fn render_composite(v: &Volume, p: &RenderParams) -> Result<Frame> {
    if !(p.alpha_scale > 0.0 && p.alpha_scale <= 1.0) {
        return Err(Error::InvalidParameter("alpha_scale must lie in (0, 1]"));
    }
    Ok(project(v, p.axis, |ray| {
        let (color, _) = composite_ray(ray, p.alpha_scale);
        libm::floor(color + 0.5).clamp(0.0, 255.0) as u8
    }))
}

pub fn render(v: &Volume, p: &RenderParams) -> Result<Frame> {
    match p.mode {
        RenderMode::Mip => Ok(render_mip(v, p.axis)),
        RenderMode::Composite => render_composite(v, p),
    }
}
