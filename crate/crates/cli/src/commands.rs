//! Command implementations and the error-to-exit-code mapping.

use std::fmt;
use std::path::{Path, PathBuf};

use fxmv_core::camera::{
    load_depth_map, load_trajectory, read_pose_records, retarget, CameraPose, CameraTrajectory,
    WorldPointCloud,
};
use fxmv_core::edit::{
    apply_rigid_schedule, build_edit_mask, i2v_regions, make_appearance_condition,
    read_schedule_keyframes, save_appearance_condition, select_points, subset_centroid, EditMask,
    RegionMask, RigidSchedule,
};
use fxmv_core::encoding::SpectralColormap;
use fxmv_core::error::Error;
use fxmv_core::metrics::{rot_err, trans_err, PoseSequence};
use fxmv_core::raster::{
    export_motion_video, render_motion_video, save_motion_video, MotionVideo, SplatConfig,
    FXMV_FILENAME,
};
use fxmv_core::trajectory::{
    compute_norm_stats, downsample, load_trajectories, save_trajectories, DownsampleSpec,
    NormStats, PointTrajectorySet,
};

use crate::config::RunConfig;
use crate::{Command, SharedArgs};

pub const EXIT_IO: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_EMPTY_SELECTION: u8 = 3;
pub const EXIT_USAGE: u8 = 4;

/// A pipeline failure annotated with the stage it happened in.
#[derive(Debug)]
pub enum CliError {
    Core { stage: &'static str, source: Error },
    Validation(String),
    Usage(String),
}

impl CliError {
    pub fn core(stage: &'static str, source: Error) -> Self {
        CliError::Core { stage, source }
    }

    pub fn validation(msg: String) -> Self {
        CliError::Validation(msg)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core { source, .. } => match source {
                Error::Io { .. } => EXIT_IO,
                Error::EmptySelection(_) => EXIT_EMPTY_SELECTION,
                _ => EXIT_VALIDATION,
            },
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core { stage, source } => write!(f, "{stage}: {source}"),
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
        }
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for Result<T, Error> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::core(stage, e))
    }
}

pub fn run(command: Command, shared: SharedArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&shared)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(command, &cfg))
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Render { trajectories, poses, region, out } => {
            cmd_render(cfg, &trajectories, &poses, region.as_deref(), &out)
        }
        Command::Retarget { mode, new_poses, depth, trajectories, src_poses, out } => {
            cmd_retarget(
                cfg,
                &mode,
                &new_poses,
                depth.as_deref(),
                trajectories.as_deref(),
                src_poses.as_deref(),
                &out,
            )
        }
        Command::Manipulate { trajectories, poses, region, schedule, pivot, image, out } => {
            cmd_manipulate(cfg, &trajectories, &poses, &region, &schedule, pivot, image.as_deref(), &out)
        }
        Command::Evaluate { gen, gt, out } => cmd_evaluate(&gen, &gt, out.as_deref()),
        Command::Downsample { trajectories, out } => cmd_downsample(cfg, &trajectories, &out),
    }
}

fn load_and_thin(cfg: &RunConfig, path: &Path) -> Result<PointTrajectorySet, CliError> {
    let set = load_trajectories(path).stage("loading trajectories")?;
    if cfg.stride > 1 {
        let spec = DownsampleSpec::new(cfg.stride).stage("downsampling")?;
        downsample(&set, spec).stage("downsampling")
    } else {
        Ok(set)
    }
}

fn stats_for(set: &PointTrajectorySet, cfg: &RunConfig) -> Result<NormStats, CliError> {
    compute_norm_stats(set, 0, cfg.epsilon).stage("computing normalization statistics")
}

fn splat_config(cfg: &RunConfig) -> Result<SplatConfig, CliError> {
    SplatConfig::new(cfg.pointsize, cfg.canvas_height, cfg.canvas_width)
        .stage("configuring the rasterizer")
}

fn render_and_export(
    cfg: &RunConfig,
    set: &PointTrajectorySet,
    cams: &CameraTrajectory,
    edit_mask: Option<&EditMask>,
    out: &Path,
) -> Result<MotionVideo, CliError> {
    let stats = stats_for(set, cfg)?;
    let splat = splat_config(cfg)?;
    let mv = render_motion_video(set, &stats, cams, edit_mask, &splat, &SpectralColormap::new())
        .stage("rendering")?;
    if cfg.previews {
        export_motion_video(&mv, out).stage("writing outputs")?;
    } else {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::core("writing outputs", Error::io(out, e)))?;
        save_motion_video(&mv, out.join(FXMV_FILENAME)).stage("writing outputs")?;
    }
    println!(
        "wrote {} (frames={} canvas={}x{} channels=19 density={})",
        out.join(FXMV_FILENAME).display(),
        mv.frame_count(),
        mv.width(),
        mv.height(),
        mv.density()
    );
    Ok(mv)
}

fn cmd_render(
    cfg: &RunConfig,
    trajectories: &Path,
    poses: &Path,
    region: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let set = load_and_thin(cfg, trajectories)?;
    let cams = load_trajectory(poses, cfg.canvas_width, cfg.canvas_height)
        .stage("loading poses")?;
    if set.frame_count() != cams.frame_count() {
        return Err(CliError::validation(format!(
            "frame count mismatch: trajectories have {} frames, poses have {}",
            set.frame_count(),
            cams.frame_count()
        )));
    }

    let edit_mask = match region {
        Some(path) => {
            let mask = RegionMask::from_png(path).stage("loading region mask")?;
            let subset = select_points(&set, &mask, 0, cams.intrinsics(0))
                .stage("selecting points")?;
            if subset.is_empty() {
                eprintln!("fxmv: note: region selected no points; mask channel stays zero");
            }
            Some(build_edit_mask(&set, &subset).stage("building edit mask")?)
        }
        None => None,
    };

    render_and_export(cfg, &set, &cams, edit_mask.as_ref(), out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_retarget(
    cfg: &RunConfig,
    mode: &str,
    new_poses: &Path,
    depth: Option<&Path>,
    trajectories: Option<&Path>,
    src_poses: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let new_cams = load_trajectory(new_poses, cfg.canvas_width, cfg.canvas_height)
        .stage("loading new poses")?;

    let world = match mode {
        "i2v" => {
            let depth_path = depth.ok_or_else(|| {
                CliError::Usage("retarget --mode i2v requires --depth <FXDM>".into())
            })?;
            if trajectories.is_some() || src_poses.is_some() {
                return Err(CliError::Usage(
                    "retarget --mode i2v takes --depth only (not --trajectories/--src-poses)"
                        .into(),
                ));
            }
            let depth_map = load_depth_map(depth_path).stage("loading depth map")?;
            let lifted =
                fxmv_core::camera::lift_depth_map(&depth_map, new_cams.intrinsics(0), cfg.stride)
                    .stage("lifting depth map")?;
            WorldPointCloud::from_static_frame(&lifted, new_cams.frame_count())
                .stage("building world point cloud")?
        }
        "v2v" => {
            let (fxtr, src) = match (trajectories, src_poses) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(CliError::Usage(
                        "retarget --mode v2v requires --trajectories <FXTR> and --src-poses <FXPO>"
                            .into(),
                    ))
                }
            };
            if depth.is_some() {
                return Err(CliError::Usage(
                    "retarget --mode v2v does not take --depth".into(),
                ));
            }
            let set = load_and_thin(cfg, fxtr)?;
            let src_cams = load_trajectory(src, cfg.canvas_width, cfg.canvas_height)
                .stage("loading source poses")?;
            fxmv_core::camera::lift_to_world(&set, &src_cams).stage("lifting to world")?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown retarget mode {other:?} (expected i2v or v2v)"
            )))
        }
    };

    let moved = retarget(&world, &new_cams).stage("retargeting")?;
    render_and_export(cfg, &moved, &new_cams, None, out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_manipulate(
    cfg: &RunConfig,
    trajectories: &Path,
    poses: &Path,
    region: &Path,
    schedule: &Path,
    pivot: Option<[f64; 3]>,
    image: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let set = load_and_thin(cfg, trajectories)?;
    let cams = load_trajectory(poses, cfg.canvas_width, cfg.canvas_height)
        .stage("loading poses")?;
    if set.frame_count() != cams.frame_count() {
        return Err(CliError::validation(format!(
            "frame count mismatch: trajectories have {} frames, poses have {}",
            set.frame_count(),
            cams.frame_count()
        )));
    }

    let mask = RegionMask::from_png(region).stage("loading region mask")?;
    let subset =
        select_points(&set, &mask, 0, cams.intrinsics(0)).stage("selecting points")?;
    if subset.is_empty() {
        return Err(CliError::core(
            "selecting points",
            Error::EmptySelection("region mask selected no visible points at frame 0".into()),
        ));
    }

    let keyframes = read_schedule_keyframes(schedule).stage("loading schedule")?;
    let sched = RigidSchedule::from_keyframes(&keyframes, set.frame_count())
        .stage("expanding schedule")?;
    let pivot = match pivot {
        Some(p) => p,
        None => subset_centroid(&set, &subset, 0).stage("computing pivot")?,
    };
    let edited =
        apply_rigid_schedule(&set, &subset, &sched, pivot).stage("applying schedule")?;
    let edit_mask = build_edit_mask(&edited, &subset).stage("building edit mask")?;

    render_and_export(cfg, &edited, &cams, Some(&edit_mask), out)?;
    println!("selected {} points, pivot ({}, {}, {})", subset.len(), pivot[0], pivot[1], pivot[2]);

    if let Some(img_path) = image {
        let img = image::open(img_path)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => CliError::core(
                    "loading appearance image",
                    Error::io(img_path, io),
                ),
                other => CliError::validation(format!("loading appearance image: {other}")),
            })?
            .to_rgb8();
        let frames = vec![img.clone(); set.frame_count()];
        // Frame 0 keeps the full source image; later frames are regenerated.
        let keep_frame0 = RegionMask::filled(img.width(), img.height(), false);
        let regions = i2v_regions(keep_frame0, set.frame_count());
        let cond = make_appearance_condition(&frames, &regions, cfg.dilation)
            .stage("building appearance condition")?;
        save_appearance_condition(&cond, out).stage("writing appearance condition")?;
        println!("wrote {} appearance frames to {}", cond.frames.len(), out.display());
    } else {
        eprintln!("fxmv: note: no --image given; skipping appearance condition frames");
    }
    Ok(())
}

fn cmd_evaluate(gen: &Path, gt: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let sequence = |path: &Path, stage: &'static str| -> Result<PoseSequence, CliError> {
        let records = read_pose_records(path).stage(stage)?;
        let poses = records
            .iter()
            .map(|r| CameraPose::new(r.rotation, r.translation))
            .collect::<Result<Vec<_>, _>>()
            .stage(stage)?;
        PoseSequence::from_poses(&poses).stage(stage)
    };
    let gen_seq = sequence(gen, "loading generated poses")?;
    let gt_seq = sequence(gt, "loading ground-truth poses")?;

    let rot = rot_err(&gen_seq, &gt_seq).stage("evaluating rotation error")?;
    let trans = trans_err(&gen_seq, &gt_seq).stage("evaluating translation error")?;

    let mut report = format!(
        "rot_err_deg={rot} trans_err_deg={} frames={}\n",
        trans.degrees,
        gen_seq.len()
    );
    report.push_str(&format!("trans_err_used_frames={}\n", trans.used_frames));
    if trans.all_zero {
        report.push_str("trans_err_all_zero=true\n");
        eprintln!("fxmv: warning: all translations are zero length; trans_err is 0 by convention");
    }
    print!("{report}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::core("writing report", Error::io(dir, e)))?;
        let path = dir.join("pose_report.txt");
        std::fs::write(&path, &report)
            .map_err(|e| CliError::core("writing report", Error::io(&path, e)))?;
    }
    Ok(())
}

fn cmd_downsample(cfg: &RunConfig, trajectories: &Path, out: &Path) -> Result<(), CliError> {
    let set = load_trajectories(trajectories).stage("loading trajectories")?;
    let spec = DownsampleSpec::new(cfg.stride).stage("downsampling")?;
    let thinned = downsample(&set, spec).stage("downsampling")?;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::core("writing outputs", Error::io(out, e)))?;
    let path: PathBuf = out.join("downsampled.fxtr");
    save_trajectories(&thinned, &path).stage("writing outputs")?;
    println!(
        "wrote {} ({} -> {} points, density={})",
        path.display(),
        set.point_count(),
        thinned.point_count(),
        thinned.density()
    );
    Ok(())
}
