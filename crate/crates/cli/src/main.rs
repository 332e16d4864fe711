//! `fxmv`: render, retarget, manipulate, evaluate, and downsample motion
//! video control signals.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 empty
//! selection, 4 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::{parse_canvas, parse_pivot};

#[derive(Parser, Debug)]
#[command(
    name = "fxmv",
    version,
    about = "Motion-video control signals from dynamic 3D point trajectories",
    long_about = "Turns tracked 3D point trajectories into 19-channel motion-video rasters, \
retargets point clouds onto new camera trajectories, applies rigid object edits, builds \
gray-filled appearance conditions, and scores pose fidelity.\n\n\
File formats: FXTR (binary point trajectories), FXPO (text camera poses), FXDM (binary \
depth map), FXSC (text rigid schedule), FXMV (binary raster). See the README for the \
byte-level layouts."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    shared: SharedArgs,
}

/// Flags shared by every subcommand. Precedence: command line, then the
/// `--config` file (key=value lines), then built-in defaults.
#[derive(Args, Debug, Clone)]
struct SharedArgs {
    /// Canvas as WxH in pixels [default: 768x512]
    #[arg(long, global = true, value_name = "WxH", value_parser = parse_canvas)]
    canvas: Option<(u32, u32)>,

    /// Splat side length in pixels; must be odd [default: 3]
    #[arg(long, global = true, value_name = "K")]
    pointsize: Option<u32>,

    /// Point-density downsampling stride; 1 keeps everything [default: 1]
    #[arg(long, global = true, value_name = "S")]
    stride: Option<u32>,

    /// Inverse-depth guard constant in scene depth units [default: 1e-6]
    #[arg(long, global = true, value_name = "E")]
    epsilon: Option<f64>,

    /// Worker threads for frame-parallel rendering [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Appearance-region dilation radius in pixels [default: 4]
    #[arg(long, global = true, value_name = "D")]
    dilation: Option<u32>,

    /// key=value config file consulted for any flag not given on the line
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Skip the per-stream PNG previews, writing only the FXMV tensor
    #[arg(long, global = true)]
    no_previews: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render an FXTR trajectory file into a motion video (FXMV + previews)
    #[command(long_about = "Render an FXTR trajectory file into the 19-channel motion video. \
Writes <out>/motion_video.fxmv plus per-stream PNG previews \
(identity/freq0..freq3/depth/mask). An optional region mask PNG (nonzero = inside, sized \
like the canvas) selects points at frame 0 whose footprint sets the mask channel.")]
    Render {
        /// Input FXTR point-trajectory file
        #[arg(long, value_name = "FXTR")]
        trajectories: PathBuf,
        /// Per-frame camera intrinsics and poses (FXPO text)
        #[arg(long, value_name = "FXPO")]
        poses: PathBuf,
        /// Optional 8-bit PNG region mask marking edited points
        #[arg(long, value_name = "PNG")]
        region: Option<PathBuf>,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },

    /// Reproject geometry onto a new camera trajectory and render it
    #[command(long_about = "Reproject geometry onto a new camera trajectory and render the \
resulting motion video.\n\nMode i2v lifts an FXDM depth map (one input image) into a static \
point cloud with the new trajectory's frame-0 intrinsics; mode v2v lifts tracked FXTR points \
through their source FXPO trajectory into world space. Either way the world-space points are \
reprojected onto --new-poses and rendered.")]
    Retarget {
        /// i2v (depth map input) or v2v (tracked trajectories input)
        #[arg(long, value_name = "MODE")]
        mode: String,
        /// Target camera trajectory (FXPO text)
        #[arg(long, value_name = "FXPO")]
        new_poses: PathBuf,
        /// FXDM depth map (i2v mode)
        #[arg(long, value_name = "FXDM")]
        depth: Option<PathBuf>,
        /// Input FXTR point-trajectory file (v2v mode)
        #[arg(long, value_name = "FXTR")]
        trajectories: Option<PathBuf>,
        /// Source camera trajectory of the tracked points (v2v mode)
        #[arg(long, value_name = "FXPO")]
        src_poses: Option<PathBuf>,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },

    /// Apply a rigid schedule to region-selected points and render
    #[command(long_about = "Select the points projecting into a region mask at frame 0, move \
them with the FXSC rigid schedule (background points stay fixed), set the edit-mask channel \
on their footprint, and render the motion video. With --image, also writes the gray-filled \
appearance condition frames (frame 0 keeps the image, later frames are fully gray 127).")]
    Manipulate {
        /// Input FXTR point-trajectory file
        #[arg(long, value_name = "FXTR")]
        trajectories: PathBuf,
        /// Per-frame camera intrinsics and poses (FXPO text)
        #[arg(long, value_name = "FXPO")]
        poses: PathBuf,
        /// 8-bit PNG region mask selecting the object at frame 0
        #[arg(long, value_name = "PNG")]
        region: PathBuf,
        /// Rigid schedule keyframes (FXSC text)
        #[arg(long, value_name = "FXSC")]
        schedule: PathBuf,
        /// Rotation pivot "x,y,z" [default: centroid of the selection]
        #[arg(long, value_name = "X,Y,Z", value_parser = parse_pivot)]
        pivot: Option<[f64; 3]>,
        /// Source image for the appearance condition frames
        #[arg(long, value_name = "PNG")]
        image: Option<PathBuf>,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },

    /// Compare two FXPO pose files with rotation/translation error metrics
    #[command(long_about = "Reconstruct both pose sequences relative to their first frames \
and print rot_err_deg / trans_err_deg: arccos of the mean per-frame cosine similarity \
between quaternions (sign-canonicalized) and unit translations, frames 2..T, in degrees.")]
    Evaluate {
        /// Generated / estimated poses (FXPO text)
        #[arg(long, value_name = "FXPO")]
        gen: PathBuf,
        /// Ground-truth poses (FXPO text)
        #[arg(long, value_name = "FXPO")]
        gt: PathBuf,
        /// Optional directory for a pose_report.txt copy of the report
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },

    /// Reduce an FXTR file's point density by grid striding
    #[command(long_about = "Keep points at grid rows/columns divisible by --stride (gridded \
input) or every stride^2-th point (ungridded input) and write \
<out>/downsampled.fxtr. The retained density 1/stride^2 is recorded and carried into any \
FXMV rendered from the result.")]
    Downsample {
        /// Input FXTR point-trajectory file
        #[arg(long, value_name = "FXTR")]
        trajectories: PathBuf,
        /// Output directory
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => commands::EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match commands::run(cli.command, cli.shared) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("fxmv: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
