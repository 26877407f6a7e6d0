use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use usvol::core::evaluate::{centerline_fit, mean_iou};
use usvol::core::phantom::TubePhantomParams;
use usvol::core::reconstruct::{
    default_z_upsample, extract_slice, render, Axis, RenderMode, RenderParams,
};
use usvol::core::AcquisitionMeta;
use usvol::frameio::{
    load_masks, load_stack, load_volume, read_json, save_stack, save_volume, write_frame,
};
use usvol::pipeline::{
    run_pipeline, save_segmentation, segment_enhanced, ConfigLayer, ModeName, PipelineConfig,
};
use usvol::report::{write_centerline, write_iou_csv, CenterlineRecord, CircleRecord, SampleSpec};
use usvol::stack::{build_volume_par, enhance_stack, synth_stack_par};

#[derive(Parser)]
#[command(
    name = "usvol",
    version,
    about = "3D ultrasound volume reconstruction from swept B-mode frames"
)]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with pipeline settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a slanted-tube phantom sweep with ground-truth masks.
    Synth(SynthArgs),
    /// Log compression, squaring, median filter and CLAHE on every frame.
    Enhance(StageArgs),
    /// Segment an enhanced stack.
    Segment(StageArgs),
    /// Interpolate a stack into a volume.
    Reconstruct(ReconstructArgs),
    /// Slice or project a volume.
    Render(RenderArgs),
    /// Score automatic masks against reference masks.
    Evaluate(EvaluateArgs),
    /// enhance → segment → reconstruct → render in one go.
    Pipeline(StageArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 150)]
    frames: usize,
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, default_value = "100x128", value_parser = parse_size)]
    size: (usize, usize),
    /// Tube tilt from the sweep axis, degrees.
    #[arg(long, default_value_t = 20.0)]
    slant: f64,
    #[arg(long, default_value_t = 4.0)]
    radius_mm: f64,
    #[arg(long, default_value_t = 0.3)]
    pixel_spacing: f64,
    #[arg(long, default_value_t = 0.15)]
    frame_spacing: f64,
    #[arg(long, default_value_t = 110.0)]
    interior_mean: f64,
    #[arg(long, default_value_t = 2.0)]
    background_mean: f64,
    #[arg(long, default_value_t = 0.5)]
    speckle: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tube centre at frame 0 as X,Y pixels (default: path centred in frame).
    #[arg(long, value_parser = parse_point)]
    center: Option<(f64, f64)>,
}

#[derive(Args)]
struct SettingArgs {
    #[arg(long)]
    threshold: Option<u8>,
    #[arg(long)]
    tiles_x: Option<usize>,
    #[arg(long)]
    tiles_y: Option<usize>,
    /// CLAHE clip limit as a multiple of the mean bin height.
    #[arg(long)]
    clip_limit: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    r_min: Option<usize>,
    #[arg(long)]
    r_max: Option<usize>,
    #[arg(long)]
    z_upsample: Option<usize>,
    /// Write the eight intermediate images of every frame under steps/.
    #[arg(long)]
    dump_steps: bool,
}

#[derive(Args)]
struct StageArgs {
    /// Stack manifest, or a directory holding manifest.json.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    settings: SettingArgs,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    /// Raw volume path; the JSON sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    z_upsample: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    volume: PathBuf,
    /// PNG or PGM image.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = AxisArg::Z)]
    axis: AxisArg,
    #[arg(long, value_enum, default_value_t = RenderArg::Mip)]
    mode: RenderArg,
    /// Slice index along the axis (slice mode; default: centre).
    #[arg(long)]
    index: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    alpha_scale: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    auto: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    /// all, every:N, even:K or a comma-separated index list.
    #[arg(long, default_value = "even:20")]
    sample: String,
    /// IoU CSV output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// circles.json from a circle-mode run, for the centerline fit.
    #[arg(long)]
    circles: Option<PathBuf>,
    /// Centerline JSON output (needs --circles).
    #[arg(long)]
    centerline: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Circle,
    Contour,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderArg {
    Mip,
    Composite,
    Slice,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    Ok((w, h))
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or("expected X,Y")?;
    let x = x.trim().parse().map_err(|_| format!("bad x {x:?}"))?;
    let y = y.trim().parse().map_err(|_| format!("bad y {y:?}"))?;
    Ok((x, y))
}

impl SettingArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            threshold: self.threshold,
            tiles_x: self.tiles_x,
            tiles_y: self.tiles_y,
            clip_limit: self.clip_limit,
            mode: self.mode.map(|m| match m {
                ModeArg::Circle => ModeName::Circle,
                ModeArg::Contour => ModeName::Contour,
            }),
            r_min: self.r_min,
            r_max: self.r_max,
            z_upsample: self.z_upsample,
            dump_steps: self.dump_steps.then_some(true),
        }
    }
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

fn file_layer(config: Option<&Path>) -> anyhow::Result<ConfigLayer> {
    Ok(match config {
        Some(p) => ConfigLayer::load(p)?,
        None => ConfigLayer::default(),
    })
}

fn settings(cli_config: Option<&Path>, flags: &SettingArgs) -> anyhow::Result<PipelineConfig> {
    Ok(flags.layer().over(file_layer(cli_config)?).resolve()?)
}

fn cmd_synth(a: &SynthArgs) -> anyhow::Result<()> {
    let meta = AcquisitionMeta {
        width: a.size.0,
        height: a.size.1,
        frame_count: a.frames,
        pixel_spacing_x: a.pixel_spacing,
        pixel_spacing_y: a.pixel_spacing,
        frame_spacing_z: a.frame_spacing,
    };
    let mut p = TubePhantomParams {
        meta,
        tube_radius_mm: a.radius_mm,
        slant_deg: a.slant,
        interior_mean: a.interior_mean,
        background_mean: a.background_mean,
        speckle_scale: a.speckle,
        seed: a.seed,
        ..TubePhantomParams::default()
    }
    .centered();
    if let Some(c) = a.center {
        p.center0 = c;
    }
    let (frames, masks) = synth_stack_par(&p)?;
    save_stack(&frames, &a.out.join("frames"))?;
    save_stack(&masks, &a.out.join("masks"))?;
    eprintln!(
        "wrote {} frames of {}x{} to {}",
        frames.len(),
        meta.width,
        meta.height,
        a.out.display()
    );
    Ok(())
}

fn cmd_enhance(a: &StageArgs, cfg: &PipelineConfig) -> anyhow::Result<()> {
    let stack = load_stack(&a.input)?;
    let enhanced = enhance_stack(&stack, &cfg.clahe)?;
    save_stack(&enhanced, &a.out)?;
    eprintln!("enhanced {} frames", enhanced.len());
    Ok(())
}

fn cmd_segment(a: &StageArgs, cfg: &PipelineConfig) -> anyhow::Result<()> {
    let enhanced = load_stack(&a.input)?;
    let seg = segment_enhanced(&enhanced, &cfg.segment)?;
    save_segmentation(&a.out, &seg, cfg.segment.mode)?;
    report_segmented(seg.frames_segmented(), enhanced.len());
    Ok(())
}

fn report_segmented(done: usize, total: usize) {
    if done == 0 {
        eprintln!("warning: 0 frames segmented");
    } else {
        eprintln!("{done} of {total} frames segmented");
    }
}

fn cmd_reconstruct(a: &ReconstructArgs, cfg: &PipelineConfig) -> anyhow::Result<()> {
    let stack = load_stack(&a.input)?;
    let u = a
        .z_upsample
        .or(cfg.z_upsample)
        .unwrap_or_else(|| default_z_upsample(stack.meta()));
    let v = build_volume_par(&stack, u)?;
    save_volume(&v, &a.out)?;
    let [nx, ny, nz] = v.dims();
    eprintln!("volume {nx}x{ny}x{nz} (z_upsample {u})");
    Ok(())
}

fn cmd_render(a: &RenderArgs) -> anyhow::Result<()> {
    let v = load_volume(&a.volume)?;
    let axis = Axis::from(a.axis);
    let img = match a.mode {
        RenderArg::Slice => {
            let [nx, ny, nz] = v.dims();
            let depth = match axis {
                Axis::X => nx,
                Axis::Y => ny,
                Axis::Z => nz,
            };
            extract_slice(&v, axis, a.index.unwrap_or(depth / 2))?
        }
        RenderArg::Mip | RenderArg::Composite => {
            let mode = match a.mode {
                RenderArg::Composite => RenderMode::Composite,
                _ => RenderMode::Mip,
            };
            render(
                &v,
                &RenderParams {
                    axis,
                    mode,
                    alpha_scale: a.alpha_scale,
                },
            )?
        }
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_frame(&a.out, &img)?;
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs) -> anyhow::Result<()> {
    let auto = load_masks(&a.auto)?;
    let reference = load_masks(&a.reference)?;
    if auto.len() != reference.len()
        || auto.meta().width != reference.meta().width
        || auto.meta().height != reference.meta().height
    {
        bail!(
            "stacks are not aligned: {} frames of {}x{} vs {} frames of {}x{}",
            auto.len(),
            auto.meta().width,
            auto.meta().height,
            reference.len(),
            reference.meta().width,
            reference.meta().height
        );
    }
    let sample = a.sample.parse::<SampleSpec>()?.indices(auto.len());
    let report = mean_iou(&auto.masks()?, &reference.masks()?, &sample)?;
    if let Some(csv) = &a.csv {
        write_iou_csv(csv, &report)?;
    }
    match (&a.circles, &a.centerline) {
        (Some(circles), Some(out)) => {
            let records: Vec<CircleRecord> = read_json(circles)?;
            let pts: Vec<_> = records.iter().map(|c| (c.frame, c.fit())).collect();
            let fit = centerline_fit(&pts)?;
            write_centerline(out, &CenterlineRecord::new(&fit, pts.len()))?;
            eprintln!(
                "centerline slope ({:.4}, {:.4}) px/frame, rms {:.4} px",
                fit.slope[0], fit.slope[1], fit.rms_residual
            );
        }
        (None, Some(_)) => bail!("--centerline needs --circles"),
        _ => {}
    }
    eprintln!("{} frames evaluated", report.per_frame.len());
    println!("{:.4}", report.mean_iou);
    Ok(())
}

fn cmd_pipeline(a: &StageArgs, cfg: &PipelineConfig) -> anyhow::Result<()> {
    let stack = load_stack(&a.input)?;
    let outcome = run_pipeline(&stack, cfg, &a.out)?;
    report_segmented(outcome.frames_segmented, outcome.frames_total);
    match &outcome.volume {
        Some(v) => {
            let [nx, ny, nz] = v.dims();
            eprintln!("volume {nx}x{ny}x{nz} (z_upsample {})", outcome.z_upsample);
        }
        None if outcome.frames_segmented == 0 => {
            eprintln!("refusing to build an empty volume: no frame was segmented")
        }
        None => eprintln!("refusing to build a volume from a single frame"),
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let config = cli.config.as_deref();
    match &cli.cmd {
        Command::Synth(a) => cmd_synth(a),
        Command::Enhance(a) => cmd_enhance(a, &settings(config, &a.settings)?),
        Command::Segment(a) => cmd_segment(a, &settings(config, &a.settings)?),
        Command::Reconstruct(a) => cmd_reconstruct(a, &file_layer(config)?.resolve()?),
        Command::Render(a) => cmd_render(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pipeline(a) => cmd_pipeline(a, &settings(config, &a.settings)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = usvol::with_threads(cli.threads, || run(&cli)).map_err(anyhow::Error::from);
    match result.and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
