//! Per-frame stages mapped over whole stacks with rayon.
//!
//! Every stage is a pure function of one frame (or one output plane), and
//! results are collected in index order, so output bytes do not depend on the
//! number of worker threads.

use rayon::prelude::*;
use usvol_core::enhance::{enhance_pipeline, ClaheParams};
use usvol_core::phantom::{synth_tube_frame, TubePhantomParams};
use usvol_core::reconstruct::{interpolate_plane, volume_shell, Volume};
use usvol_core::segment::{segment_frame, SegmentParams, SegmentationResult};
use usvol_core::{Frame, FrameStack, Mask};

use crate::{Error, Result};

pub fn enhance_stack(stack: &FrameStack, p: &ClaheParams) -> Result<FrameStack> {
    p.validate()?;
    let frames = stack
        .frames()
        .par_iter()
        .enumerate()
        .map(|(frame, f)| {
            enhance_pipeline(f, p).map_err(|source| Error::Stage {
                frame,
                stage: "enhance",
                source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameStack::new(*stack.meta(), frames)?)
}

/// One entry per frame; `None` where no target contour was found.
pub fn segment_stack(
    enhanced: &FrameStack,
    p: &SegmentParams,
) -> Result<Vec<Option<SegmentationResult>>> {
    enhanced
        .frames()
        .par_iter()
        .enumerate()
        .map(|(frame, f)| {
            segment_frame(f, p).map_err(|source| Error::Stage {
                frame,
                stage: "segment",
                source,
            })
        })
        .collect()
}

/// Region masks of a segmentation run, empty where nothing was found.
pub fn result_masks(
    results: &[Option<SegmentationResult>],
    width: usize,
    height: usize,
) -> Vec<Mask> {
    results
        .iter()
        .map(|r| {
            r.as_ref()
                .map_or_else(|| Mask::empty(width, height), |r| r.mask.clone())
        })
        .collect()
}

/// Segmented frames of a run, black where nothing was found.
pub fn result_frames(
    results: &[Option<SegmentationResult>],
    width: usize,
    height: usize,
) -> Vec<Frame> {
    results
        .iter()
        .map(|r| {
            r.as_ref()
                .map_or_else(|| Frame::filled(width, height, 0), |r| r.segmented.clone())
        })
        .collect()
}

/// Same result as [`usvol_core::reconstruct::build_volume`], one Z plane per
/// task.
pub fn build_volume_par(stack: &FrameStack, z_upsample: usize) -> Result<Volume> {
    let shell = volume_shell(stack, z_upsample)?;
    let [nx, ny, _] = shell.dims();
    let spacing = shell.spacing();
    let dims = shell.dims();
    let mut data = shell.into_data();
    data.par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, plane)| interpolate_plane(stack.frames(), z_upsample, k, plane));
    Ok(Volume::new(dims, spacing, data)?)
}

/// Phantom sweep generated frame-parallel: `(frames, ground-truth masks)`.
pub fn synth_stack_par(p: &TubePhantomParams) -> Result<(FrameStack, FrameStack)> {
    p.validate()?;
    let (frames, masks): (Vec<Frame>, Vec<Mask>) = (0..p.meta.frame_count)
        .into_par_iter()
        .map(|k| synth_tube_frame(p, k))
        .unzip();
    Ok((
        FrameStack::new(p.meta, frames)?,
        FrameStack::from_masks(p.meta, masks)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use usvol_core::phantom::synth_tube_stack;
    use usvol_core::reconstruct::build_volume;
    use usvol_core::AcquisitionMeta;

    fn small_phantom() -> TubePhantomParams {
        TubePhantomParams {
            meta: AcquisitionMeta {
                width: 64,
                height: 80,
                frame_count: 12,
                pixel_spacing_x: 0.3,
                pixel_spacing_y: 0.3,
                frame_spacing_z: 0.3,
            },
            tube_radius_mm: 3.0,
            ..TubePhantomParams::default()
        }
        .centered()
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = small_phantom();
        let (frames, masks) = synth_stack_par(&p).unwrap();
        let (seq_frames, seq_masks) = synth_tube_stack(&p).unwrap();
        assert_eq!(frames, seq_frames);
        assert_eq!(masks, seq_masks);
        for u in 1..=3 {
            assert_eq!(
                build_volume_par(&frames, u).unwrap(),
                build_volume(&frames, u).unwrap()
            );
        }
    }

    #[test]
    fn segment_stack_keeps_order() {
        let p = small_phantom();
        let (frames, _) = synth_stack_par(&p).unwrap();
        let enhanced = enhance_stack(&frames, &ClaheParams::default()).unwrap();
        let results = segment_stack(&enhanced, &SegmentParams::default()).unwrap();
        assert_eq!(results.len(), frames.len());
        for (k, r) in results.iter().enumerate() {
            let expect = segment_frame(&enhanced.frames()[k], &SegmentParams::default()).unwrap();
            assert_eq!(r, &expect);
        }
    }

    #[test]
    fn stage_errors_name_the_frame() {
        let p = small_phantom();
        let (frames, _) = synth_stack_par(&p).unwrap();
        let bad = SegmentParams {
            r_min: 40,
            r_max: Some(10),
            ..SegmentParams::default()
        };
        let enhanced = enhance_stack(&frames, &ClaheParams::default()).unwrap();
        match segment_stack(&enhanced, &bad) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "segment"),
            other => panic!("expected a stage error, got {other:?}"),
        }
    }
}
