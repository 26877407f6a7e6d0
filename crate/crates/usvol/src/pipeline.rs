//! End-to-end run: enhance → segment → reconstruct → render, with optional
//! per-frame dumps of every intermediate image.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use usvol_core::enhance::{enhance_stages, ClaheParams};
use usvol_core::reconstruct::{default_z_upsample, extract_slice, render_mip, Axis, Volume};
use usvol_core::segment::{segment_trace, Contour, SegmentMode, SegmentParams, SegmentationResult};
use usvol_core::{Frame, FrameStack, Mask};

use crate::frameio::{read_json, save_stack, save_volume, write_frame};
use crate::report::{write_circles, CircleRecord};
use crate::stack::{build_volume_par, enhance_stack, result_frames, result_masks, segment_stack};
use crate::{Error, Result};

/// Names of the dumped step images, in pipeline order.
pub const STEP_NAMES: [&str; 8] = [
    "b_log_squared",
    "c_median",
    "d_clahe",
    "e_threshold",
    "f_closed",
    "g_contour",
    "h_region",
    "i_segmented",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Circle,
    Contour,
}

impl From<ModeName> for SegmentMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Circle => SegmentMode::Circle,
            ModeName::Contour => SegmentMode::Contour,
        }
    }
}

/// Partially specified settings, as read from a JSON config file or
/// collected from command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ConfigLayer {
    pub threshold: Option<u8>,
    pub tiles_x: Option<usize>,
    pub tiles_y: Option<usize>,
    pub clip_limit: Option<f64>,
    pub mode: Option<ModeName>,
    pub r_min: Option<usize>,
    pub r_max: Option<usize>,
    pub z_upsample: Option<usize>,
    pub dump_steps: Option<bool>,
}

impl ConfigLayer {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            threshold: self.threshold.or(lower.threshold),
            tiles_x: self.tiles_x.or(lower.tiles_x),
            tiles_y: self.tiles_y.or(lower.tiles_y),
            clip_limit: self.clip_limit.or(lower.clip_limit),
            mode: self.mode.or(lower.mode),
            r_min: self.r_min.or(lower.r_min),
            r_max: self.r_max.or(lower.r_max),
            z_upsample: self.z_upsample.or(lower.z_upsample),
            dump_steps: self.dump_steps.or(lower.dump_steps),
        }
    }

    /// Fills the remaining gaps with built-in defaults.
    pub fn resolve(self) -> Result<PipelineConfig> {
        let d = PipelineConfig::default();
        let c = PipelineConfig {
            clahe: ClaheParams {
                tiles_x: self.tiles_x.unwrap_or(d.clahe.tiles_x),
                tiles_y: self.tiles_y.unwrap_or(d.clahe.tiles_y),
                clip_limit_rel: self.clip_limit.unwrap_or(d.clahe.clip_limit_rel),
            },
            segment: SegmentParams {
                mode: self.mode.map_or(d.segment.mode, Into::into),
                threshold: self.threshold.unwrap_or(d.segment.threshold),
                r_min: self.r_min.unwrap_or(d.segment.r_min),
                r_max: self.r_max.or(d.segment.r_max),
            },
            z_upsample: self.z_upsample.or(d.z_upsample),
            dump_steps: self.dump_steps.unwrap_or(d.dump_steps),
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineConfig {
    pub clahe: ClaheParams,
    pub segment: SegmentParams,
    /// `None` picks the factor giving roughly isotropic voxels.
    pub z_upsample: Option<usize>,
    pub dump_steps: bool,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.clahe.validate()?;
        if self.segment.r_min < 1 || self.segment.r_max.is_some_and(|r| r < self.segment.r_min) {
            return Err(Error::Config(
                "radius range must satisfy 1 <= r_min <= r_max".into(),
            ));
        }
        if self.z_upsample == Some(0) {
            return Err(Error::Config("z_upsample must be at least 1".into()));
        }
        Ok(())
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub frames_total: usize,
    pub frames_segmented: usize,
    pub circles: Vec<CircleRecord>,
    pub masks: Vec<Mask>,
    /// `None` when too few frames were segmented to build a volume.
    pub volume: Option<Volume>,
    pub z_upsample: usize,
}

/// Segmentation over an already enhanced stack.
#[derive(Debug, Clone)]
pub struct SegmentOutcome {
    pub results: Vec<Option<SegmentationResult>>,
    pub segmented: FrameStack,
    pub masks: FrameStack,
    pub circles: Vec<CircleRecord>,
}

impl SegmentOutcome {
    pub fn frames_segmented(&self) -> usize {
        self.results.iter().filter(|r| r.is_some()).count()
    }
}

pub fn segment_enhanced(enhanced: &FrameStack, p: &SegmentParams) -> Result<SegmentOutcome> {
    let results = segment_stack(enhanced, p)?;
    let meta = *enhanced.meta();
    let segmented = FrameStack::new(meta, result_frames(&results, meta.width, meta.height))?;
    let masks = FrameStack::from_masks(meta, result_masks(&results, meta.width, meta.height))?;
    let circles = results
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.as_ref()?.circle.map(|c| CircleRecord::new(k, &c)))
        .collect();
    Ok(SegmentOutcome {
        results,
        segmented,
        masks,
        circles,
    })
}

/// Writes `segmented/`, `masks/` and `circles.json` (circle mode) into `out`.
pub fn save_segmentation(out: &Path, s: &SegmentOutcome, mode: SegmentMode) -> Result<()> {
    save_stack(&s.segmented, &out.join("segmented"))?;
    save_stack(&s.masks, &out.join("masks"))?;
    if mode == SegmentMode::Circle {
        write_circles(&out.join("circles.json"), &s.circles)?;
    }
    Ok(())
}

/// Orthogonal slices through the volume centre plus the Z projection.
pub fn standard_renders(v: &Volume) -> Result<Vec<(&'static str, Frame)>> {
    let [nx, ny, nz] = v.dims();
    Ok(vec![
        ("slice_xy", extract_slice(v, Axis::Z, nz / 2)?),
        ("slice_yz", extract_slice(v, Axis::X, nx / 2)?),
        ("slice_xz", extract_slice(v, Axis::Y, ny / 2)?),
        ("mip_z", render_mip(v, Axis::Z)),
    ])
}

pub fn run_pipeline(
    stack: &FrameStack,
    cfg: &PipelineConfig,
    out: &Path,
) -> Result<PipelineOutcome> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(Error::io(out))?;
    let enhanced = enhance_stack(stack, &cfg.clahe)?;
    let seg = segment_enhanced(&enhanced, &cfg.segment)?;
    save_segmentation(out, &seg, cfg.segment.mode)?;
    if cfg.dump_steps {
        dump_steps(stack, cfg, &out.join("steps"))?;
    }

    let z_upsample = cfg
        .z_upsample
        .unwrap_or_else(|| default_z_upsample(stack.meta()));
    let frames_segmented = seg.frames_segmented();
    let volume = if frames_segmented == 0 || stack.len() < 2 {
        None
    } else {
        let v = build_volume_par(&seg.segmented, z_upsample)?;
        save_volume(&v, &out.join("volume.raw"))?;
        let renders = out.join("renders");
        fs::create_dir_all(&renders).map_err(Error::io(&renders))?;
        for (name, img) in standard_renders(&v)? {
            write_frame(&renders.join(format!("{name}.png")), &img)?;
        }
        Some(v)
    };
    Ok(PipelineOutcome {
        frames_total: stack.len(),
        frames_segmented,
        masks: seg.masks.masks()?,
        circles: seg.circles,
        volume,
        z_upsample,
    })
}

fn contour_image(w: usize, h: usize, contours: &[Contour], target: Option<&Contour>) -> Frame {
    let mut f = Frame::filled(w, h, 0);
    for c in contours {
        for &(x, y) in &c.points {
            f.set(x, y, 128);
        }
    }
    for &(x, y) in target.map(|t| t.points.as_slice()).unwrap_or(&[]) {
        f.set(x, y, 255);
    }
    f
}

/// The eight intermediate images of one frame, named as in [`STEP_NAMES`].
pub fn frame_steps(frame: &Frame, cfg: &PipelineConfig) -> Result<Vec<Frame>> {
    let (w, h) = frame.dims();
    let e = enhance_stages(frame, &cfg.clahe)?;
    let t = segment_trace(&e.clahe, &cfg.segment)?;
    let target = t.result.as_ref().map(|r| &r.target);
    let region = match &t.result {
        None => Frame::filled(w, h, 0),
        Some(r) => match r.circle {
            // Fitted circle drawn over the enhanced frame.
            Some(c) => {
                let outline = c.outline(w, h);
                let mut f = e.clahe.clone();
                for y in 0..h {
                    for x in 0..w {
                        if outline.is_on(x, y) {
                            f.set(x, y, 255);
                        }
                    }
                }
                f
            }
            None => r.mask.clone().into_frame(),
        },
    };
    let segmented = t
        .result
        .as_ref()
        .map_or_else(|| Frame::filled(w, h, 0), |r| r.segmented.clone());
    Ok(vec![
        e.log_squared,
        e.median,
        e.clahe,
        t.thresholded.into_frame(),
        t.closed.into_frame(),
        contour_image(w, h, &t.contours, target),
        region,
        segmented,
    ])
}

/// Writes `dir/frame_NNNN/<step>.png` for every frame.
pub fn dump_steps(stack: &FrameStack, cfg: &PipelineConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let per_frame: Vec<Vec<PathBuf>> = stack
        .frames()
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let images = frame_steps(f, cfg).map_err(|e| match e {
                Error::Core(source) => Error::Stage {
                    frame: k,
                    stage: "step dump",
                    source,
                },
                other => other,
            })?;
            let fdir = dir.join(format!("frame_{k:04}"));
            fs::create_dir_all(&fdir).map_err(Error::io(&fdir))?;
            STEP_NAMES
                .iter()
                .zip(&images)
                .map(|(name, img)| {
                    let p = fdir.join(format!("{name}.png"));
                    write_frame(&p, img).map(|_| p)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_frame.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use usvol_core::phantom::{synth_tube_frame, TubePhantomParams};

    #[test]
    fn precedence_flag_over_file_over_default() {
        let file = ConfigLayer {
            threshold: Some(60),
            tiles_x: Some(4),
            mode: Some(ModeName::Contour),
            ..ConfigLayer::default()
        };
        let flags = ConfigLayer {
            threshold: Some(70),
            ..ConfigLayer::default()
        };
        let c = flags.over(file).resolve().unwrap();
        assert_eq!(c.segment.threshold, 70);
        assert_eq!(c.clahe.tiles_x, 4);
        assert_eq!(c.clahe.tiles_y, 8);
        assert_eq!(c.segment.mode, SegmentMode::Contour);
        assert_eq!(c.segment.r_min, 5);

        let d = ConfigLayer::default().resolve().unwrap();
        assert_eq!(d.segment.threshold, 49);
        assert_eq!(d.clahe.clip_limit_rel, 2.0);
        assert!(!d.dump_steps);
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(serde_json::from_str::<ConfigLayer>(r#"{"treshold": 3}"#).is_err());
        let c: ConfigLayer =
            serde_json::from_str(r#"{"mode": "contour", "clip_limit": 3.0}"#).unwrap();
        assert_eq!(c.mode, Some(ModeName::Contour));
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for bad in [
            ConfigLayer {
                clip_limit: Some(0.5),
                ..Default::default()
            },
            ConfigLayer {
                r_min: Some(10),
                r_max: Some(5),
                ..Default::default()
            },
            ConfigLayer {
                z_upsample: Some(0),
                ..Default::default()
            },
            ConfigLayer {
                tiles_y: Some(0),
                ..Default::default()
            },
        ] {
            assert!(bad.resolve().is_err());
        }
    }

    #[test]
    fn eight_steps_per_frame() {
        // A flat background would equalize to white, so use a speckled frame.
        let p = TubePhantomParams::default();
        let (f, _) = synth_tube_frame(&p, 40);
        let steps = frame_steps(&f, &PipelineConfig::default()).unwrap();
        assert_eq!(steps.len(), STEP_NAMES.len());
        assert!(steps.iter().all(|s| s.dims() == f.dims()));
        assert!(steps[7].data().iter().any(|&v| v > 0));
    }
}
