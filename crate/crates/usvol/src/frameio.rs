//! Frame stacks, masks and volumes on disk.
//!
//! * Frames: 8-bit grayscale PGM (binary `P5`) or PNG.
//! * Stacks: a JSON manifest listing the frames, or a manifest without a
//!   `frames` list sitting next to the images (lexicographic order).
//! * Volumes: raw `u8` payload, X fastest then Y then Z, plus a JSON sidecar
//!   `{"dims": [X, Y, Z], "spacing_mm": [sx, sy, sz]}` with the same stem.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};
use usvol_core::frame::{DEFAULT_FRAME_SPACING_MM, DEFAULT_PIXEL_SPACING_MM};
use usvol_core::reconstruct::Volume;
use usvol_core::{AcquisitionMeta, Frame, FrameStack, Mask};

use crate::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel_spacing_x_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel_spacing_y_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_spacing_z_mm: Option<f64>,
    /// Paths relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<String>>,
}

impl Manifest {
    pub fn from_meta(meta: &AcquisitionMeta, frames: Option<Vec<String>>) -> Self {
        Manifest {
            width: meta.width,
            height: meta.height,
            frame_count: meta.frame_count,
            pixel_spacing_x_mm: Some(meta.pixel_spacing_x),
            pixel_spacing_y_mm: Some(meta.pixel_spacing_y),
            frame_spacing_z_mm: Some(meta.frame_spacing_z),
            frames,
        }
    }

    /// Geometry with defaults filled in for absent spacings.
    pub fn meta(&self) -> AcquisitionMeta {
        AcquisitionMeta {
            width: self.width,
            height: self.height,
            frame_count: self.frame_count,
            pixel_spacing_x: self.pixel_spacing_x_mm.unwrap_or(DEFAULT_PIXEL_SPACING_MM),
            pixel_spacing_y: self.pixel_spacing_y_mm.unwrap_or(DEFAULT_PIXEL_SPACING_MM),
            frame_spacing_z: self.frame_spacing_z_mm.unwrap_or(DEFAULT_FRAME_SPACING_MM),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(Error::json(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::json(path))?;
    text.push('\n');
    fs::write(path, text).map_err(Error::io(path))
}

fn is_frame_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("pgm" | "png")
    )
}

/// Decodes one 8-bit grayscale PGM or PNG.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let reader = ImageReader::open(path)
        .map_err(Error::io(path))?
        .with_guessed_format()
        .map_err(Error::io(path))?;
    let img = reader.decode().map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })?;
    if img.color() != ColorType::L8 {
        return Err(Error::NotGrayscale {
            path: path.to_owned(),
            color: format!("{:?}", img.color()),
        });
    }
    let gray = img.into_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    Ok(Frame::new(w, h, gray.into_raw())?)
}

/// Encodes by extension: `.pgm` as binary P5, `.png` as 8-bit grayscale.
pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    let image_err = |source| Error::Image {
        path: path.to_owned(),
        source,
    };
    let format = ImageFormat::from_path(path).map_err(image_err)?;
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    if format != ImageFormat::Pnm {
        return image::save_buffer_with_format(
            path,
            frame.data(),
            w,
            h,
            ExtendedColorType::L8,
            format,
        )
        .map_err(image_err);
    }
    // The generic PNM path would write PAM (P7).
    let file = fs::File::create(path).map_err(Error::io(path))?;
    let mut out = BufWriter::new(file);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(frame.data(), w, h, ExtendedColorType::L8)
        .map_err(image_err)?;
    out.flush().map_err(Error::io(path))
}

/// Accepts either a manifest file or a directory holding `manifest.json`.
fn resolve_manifest(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_owned()
    }
}

fn frame_paths(manifest_path: &Path, manifest: &Manifest) -> Result<Vec<PathBuf>> {
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    if let Some(list) = &manifest.frames {
        return Ok(list.iter().map(|rel| dir.join(rel)).collect());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::io(dir))?
        .map(|e| e.map(|e| e.path()).map_err(Error::io(dir)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && is_frame_file(p))
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(paths)
}

/// Loads a stack in manifest order (or lexicographic order in directory mode).
pub fn load_stack(manifest_path: &Path) -> Result<FrameStack> {
    let manifest_path = resolve_manifest(manifest_path);
    let manifest: Manifest = read_json(&manifest_path)?;
    let meta = manifest.meta();
    meta.validate()?;
    let paths = frame_paths(&manifest_path, &manifest)?;
    if paths.len() != meta.frame_count {
        return Err(Error::FrameCount {
            declared: meta.frame_count,
            found: paths.len(),
        });
    }
    let mut frames = Vec::with_capacity(paths.len());
    for (index, path) in paths.iter().enumerate() {
        let frame = read_frame(path)?;
        if frame.dims() != (meta.width, meta.height) {
            return Err(Error::FrameDims {
                index,
                path: path.clone(),
                expected: (meta.width, meta.height),
                found: frame.dims(),
            });
        }
        frames.push(frame);
    }
    Ok(FrameStack::new(meta, frames)?)
}

/// Loads a stack whose frames hold only 0 and 255; the binary flag is set.
pub fn load_masks(manifest_path: &Path) -> Result<FrameStack> {
    let stack = load_stack(manifest_path)?;
    for (index, f) in stack.frames().iter().enumerate() {
        if let Err(usvol_core::Error::NotBinary { x, y, value }) = Mask::from_frame(f.clone()) {
            return Err(Error::NotBinary { index, x, y, value });
        }
    }
    Ok(stack.into_binary()?)
}

fn frame_name(index: usize, count: usize, ext: &str) -> String {
    let digits = count.saturating_sub(1).to_string().len().max(4);
    format!("frame_{index:0digits$}.{ext}")
}

/// Writes `frame_NNNN.pgm` files plus a manifest listing them. Returns the
/// manifest path.
pub fn save_stack(stack: &FrameStack, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let names: Vec<String> = (0..stack.len())
        .map(|i| frame_name(i, stack.len(), "pgm"))
        .collect();
    for (name, frame) in names.iter().zip(stack.frames()) {
        write_frame(&dir.join(name), frame)?;
    }
    let manifest_path = dir.join(MANIFEST_NAME);
    write_json(
        &manifest_path,
        &Manifest::from_meta(stack.meta(), Some(names)),
    )?;
    Ok(manifest_path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSidecar {
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
}

/// `(payload, sidecar)` paths for a volume given either of them.
pub fn volume_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("raw"), path.with_extension("json"))
}

/// Writes the raw payload and its sidecar next to it.
pub fn save_volume(v: &Volume, out_path: &Path) -> Result<()> {
    let (raw, json) = volume_paths(out_path);
    if let Some(dir) = raw.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    fs::write(&raw, v.data()).map_err(Error::io(&raw))?;
    write_json(
        &json,
        &VolumeSidecar {
            dims: v.dims(),
            spacing_mm: v.spacing(),
        },
    )
}

pub fn load_volume(path: &Path) -> Result<Volume> {
    let (raw, json) = volume_paths(path);
    let sidecar: VolumeSidecar = read_json(&json)?;
    let data = fs::read(&raw).map_err(Error::io(&raw))?;
    Ok(Volume::new(sidecar.dims, sidecar.spacing_mm, data)?)
}
