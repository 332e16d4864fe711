//! End-to-end behavior of the `fxmv` binary: exit codes, file outputs, and
//! the cross-command consistency contracts.

use std::path::{Path, PathBuf};
use std::process::Command;

use fxmv_core::camera::{
    generate_trajectory, save_depth_map, save_trajectory, CameraIntrinsics, CameraPose,
    CameraTrajectory, DepthMap, TrajectoryKind,
};
use fxmv_core::raster::load_motion_video;
use fxmv_core::trajectory::{save_trajectories, PointTrajectorySet};
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fxmv")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fxmv(args: &[&str]) -> Run {
    let out = Command::new(bin()).args(args).output().expect("spawn fxmv");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn test_intr() -> CameraIntrinsics {
    CameraIntrinsics::new(50.0, 50.0, 32.0, 32.0, 64, 64).unwrap()
}

/// Two points at distinct depths drifting slowly right.
fn two_point_set(frames: usize) -> PointTrajectorySet {
    let mut positions = Vec::new();
    for t in 0..frames {
        let dx = t as f64 * 0.01;
        positions.push([dx, 0.0, 2.0]);
        positions.push([0.25 + dx, 0.125, 3.0]);
    }
    PointTrajectorySet::new(frames, 2, positions, vec![true; frames * 2], None).unwrap()
}

fn write_static_poses(dir: &Path, frames: usize) -> PathBuf {
    let path = dir.join("static.fxpo");
    let cams = generate_trajectory(TrajectoryKind::Static, frames, test_intr()).unwrap();
    save_trajectory(&cams, &path).unwrap();
    path
}

fn nonzero_pixels(mv: &fxmv_core::raster::MotionVideo, frame: usize) -> usize {
    mv.frame_data(frame).chunks(19).filter(|px| px.iter().any(|&v| v != 0.0)).count()
}

#[test]
fn render_two_points_respects_footprint_bound() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("two.fxtr");
    save_trajectories(&two_point_set(3), &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 3);
    let out = dir.path().join("out");

    let run = fxmv(&[
        "render",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
        "--canvas", "64x64",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let mv = load_motion_video(out.join("motion_video.fxmv")).unwrap();
    assert_eq!(mv.frame_count(), 3);
    assert_eq!((mv.width(), mv.height()), (64, 64));
    for t in 0..3 {
        let painted = nonzero_pixels(&mv, t);
        assert!(painted > 0 && painted <= 2 * 9, "frame {t}: {painted} pixels");
    }
    // Previews for every stream and frame.
    for stream in ["identity", "freq0", "freq1", "freq2", "freq3", "depth", "mask"] {
        for t in 0..3 {
            assert!(out.join(format!("{stream}_{t:04}.png")).exists(), "{stream} {t}");
        }
    }
}

#[test]
fn render_frame_count_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("two.fxtr");
    save_trajectories(&two_point_set(3), &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 5);
    let run = fxmv(&[
        "render",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--out", dir.path().join("out").to_str().unwrap(),
        "--canvas", "64x64",
    ]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("frame count mismatch"), "stderr: {}", run.stderr);
}

#[test]
fn render_stride_records_density_in_header() {
    let dir = tempfile::tempdir().unwrap();
    // A 20x15 grid so stride 5 keeps 4x3 points.
    let (gw, gh) = (20u32, 15u32);
    let n = (gw * gh) as usize;
    let mut positions = Vec::with_capacity(n);
    for r in 0..gh {
        for c in 0..gw {
            positions.push([
                (c as f64 - 10.0) * 0.05,
                (r as f64 - 7.0) * 0.05,
                2.0 + 0.01 * (r + c) as f64,
            ]);
        }
    }
    let set = PointTrajectorySet::new(1, n, positions, vec![true; n], Some((gw, gh))).unwrap();
    let fxtr = dir.path().join("grid.fxtr");
    save_trajectories(&set, &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 1);
    let out = dir.path().join("out");

    let run = fxmv(&[
        "render",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
        "--canvas", "64x64",
        "--stride", "5",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let mv = load_motion_video(out.join("motion_video.fxmv")).unwrap();
    assert_eq!(mv.density(), 0.04);
}

#[test]
fn retarget_v2v_identity_matches_render() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("pts.fxtr");
    save_trajectories(&two_point_set(4), &fxtr).unwrap();

    // A gentle orbit as the source trajectory.
    let cams = generate_trajectory(
        TrajectoryKind::Orbit { radius: 5.0, sweep_deg: 20.0 },
        4,
        test_intr(),
    )
    .unwrap();
    let fxpo = dir.path().join("orbit.fxpo");
    save_trajectory(&cams, &fxpo).unwrap();

    let render_out = dir.path().join("render");
    let run = fxmv(&[
        "render",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--out", render_out.to_str().unwrap(),
        "--canvas", "64x64",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let retarget_out = dir.path().join("retarget");
    let run = fxmv(&[
        "retarget",
        "--mode", "v2v",
        "--trajectories", fxtr.to_str().unwrap(),
        "--src-poses", fxpo.to_str().unwrap(),
        "--new-poses", fxpo.to_str().unwrap(),
        "--out", retarget_out.to_str().unwrap(),
        "--canvas", "64x64",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let a = load_motion_video(render_out.join("motion_video.fxmv")).unwrap();
    let b = load_motion_video(retarget_out.join("motion_video.fxmv")).unwrap();
    assert_eq!(a.frame_count(), b.frame_count());
    let max_diff = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f32, f32::max);
    assert!(max_diff <= 1e-5, "max difference {max_diff}");
}

#[test]
fn retarget_i2v_dolly_in_grows_point_spread() {
    let dir = tempfile::tempdir().unwrap();
    let frames = 5;

    // Constant-depth plane.
    let depth = DepthMap::new(64, 64, vec![4.0; 64 * 64]).unwrap();
    let fxdm = dir.path().join("plane.fxdm");
    save_depth_map(&depth, &fxdm).unwrap();

    // Camera starts pulled back and dollies in to the identity framing.
    let frames_vec: Vec<(CameraIntrinsics, CameraPose)> = (0..frames)
        .map(|t| {
            let back = 1.5 * (1.0 - t as f64 / (frames - 1) as f64);
            (
                test_intr(),
                CameraPose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, back)).unwrap(),
            )
        })
        .collect();
    let cams = CameraTrajectory::new(frames_vec).unwrap();
    let fxpo = dir.path().join("dolly.fxpo");
    save_trajectory(&cams, &fxpo).unwrap();

    let out = dir.path().join("out");
    let run = fxmv(&[
        "retarget",
        "--mode", "i2v",
        "--depth", fxdm.to_str().unwrap(),
        "--new-poses", fxpo.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
        "--canvas", "64x64",
        "--stride", "4",
        "--pointsize", "1",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let mv = load_motion_video(out.join("motion_video.fxmv")).unwrap();
    let mut last = 0.0f64;
    for t in 0..frames {
        let mut min = (u32::MAX, u32::MAX);
        let mut max = (0u32, 0u32);
        for r in 0..64u32 {
            for c in 0..64u32 {
                if (0..19).any(|ch| mv.value(t, r, c, ch) != 0.0) {
                    min = (min.0.min(r), min.1.min(c));
                    max = (max.0.max(r), max.1.max(c));
                }
            }
        }
        let dr = (max.0 - min.0) as f64;
        let dc = (max.1 - min.1) as f64;
        let diagonal = (dr * dr + dc * dc).sqrt();
        assert!(
            diagonal > last,
            "frame {t}: diagonal {diagonal} did not grow past {last}"
        );
        last = diagonal;
    }
}

#[test]
fn retarget_usage_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let fxpo = write_static_poses(dir.path(), 2);
    let out = dir.path().join("out");
    let run = fxmv(&[
        "retarget",
        "--mode", "i2v",
        "--new-poses", fxpo.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("--depth"), "stderr: {}", run.stderr);

    let run = fxmv(&[
        "retarget",
        "--mode", "sideways",
        "--new-poses", fxpo.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 4);
}

fn write_region_png(path: &Path, w: u32, h: u32, predicate: impl Fn(u32, u32) -> bool) {
    let img = image::GrayImage::from_fn(w, h, |x, y| {
        image::Luma([if predicate(x, y) { 255 } else { 0 }])
    });
    img.save(path).unwrap();
}

fn write_identity_schedule(path: &Path) {
    std::fs::write(path, "# identity\n0 1 0 0 0 1 0 0 0 1 0 0 0\n").unwrap();
}

#[test]
fn manipulate_identity_schedule_only_adds_mask_channel() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("pts.fxtr");
    save_trajectories(&two_point_set(3), &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 3);
    let region = dir.path().join("all.png");
    write_region_png(&region, 64, 64, |_, _| true);
    let fxsc = dir.path().join("ident.fxsc");
    write_identity_schedule(&fxsc);

    let render_out = dir.path().join("render");
    assert_eq!(
        fxmv(&[
            "render",
            "--trajectories", fxtr.to_str().unwrap(),
            "--poses", fxpo.to_str().unwrap(),
            "--out", render_out.to_str().unwrap(),
            "--canvas", "64x64",
            "--no-previews",
        ])
        .code,
        0
    );
    let man_out = dir.path().join("man");
    let run = fxmv(&[
        "manipulate",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--region", region.to_str().unwrap(),
        "--schedule", fxsc.to_str().unwrap(),
        "--out", man_out.to_str().unwrap(),
        "--canvas", "64x64",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let plain = load_motion_video(render_out.join("motion_video.fxmv")).unwrap();
    let edited = load_motion_video(man_out.join("motion_video.fxmv")).unwrap();
    for (i, (a, b)) in plain.data().iter().zip(edited.data()).enumerate() {
        if i % 19 == 18 {
            // Mask channel: set exactly where the pixel is painted.
            let painted = plain.data()[i - 18..i].iter().any(|&v| v != 0.0);
            assert_eq!(*a, 0.0);
            assert_eq!(*b != 0.0, painted, "flat index {i}");
        } else {
            assert_eq!(a.to_bits(), b.to_bits(), "flat index {i}");
        }
    }
}

#[test]
fn manipulate_translation_displaces_mask_footprint() {
    let dir = tempfile::tempdir().unwrap();
    // A tight cluster at depth 2; fx = 50, so +0.4 in x is +10 px in u.
    let mut positions = Vec::new();
    for t in 0..3 {
        let _ = t;
        positions.push([0.0, 0.0, 2.0]);
        positions.push([0.04, 0.0, 2.0]);
        positions.push([0.0, 0.04, 2.0]);
    }
    let set = PointTrajectorySet::new(3, 3, positions, vec![true; 9], None).unwrap();
    let fxtr = dir.path().join("cluster.fxtr");
    save_trajectories(&set, &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 3);
    let region = dir.path().join("all.png");
    write_region_png(&region, 64, 64, |_, _| true);
    let fxsc = dir.path().join("slide.fxsc");
    std::fs::write(
        &fxsc,
        "0 1 0 0 0 1 0 0 0 1 0 0 0\n2 1 0 0 0 1 0 0 0 1 0.4 0 0\n",
    )
    .unwrap();

    let out = dir.path().join("out");
    let run = fxmv(&[
        "manipulate",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--region", region.to_str().unwrap(),
        "--schedule", fxsc.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
        "--canvas", "64x64",
        "--pointsize", "1",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    let mv = load_motion_video(out.join("motion_video.fxmv")).unwrap();
    let centroid_u = |t: usize| -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for r in 0..64u32 {
            for c in 0..64u32 {
                if mv.value(t, r, c, 18) != 0.0 {
                    sum += c as f64;
                    n += 1;
                }
            }
        }
        sum / n as f64
    };
    let shift = centroid_u(2) - centroid_u(0);
    // Projected displacement: fx * 0.4 / z = 50 * 0.4 / 2 = 10 px.
    assert!((shift - 10.0).abs() <= 1.0, "footprint shifted by {shift} px");
}

#[test]
fn manipulate_empty_region_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("pts.fxtr");
    save_trajectories(&two_point_set(2), &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 2);
    let region = dir.path().join("none.png");
    write_region_png(&region, 64, 64, |_, _| false);
    let fxsc = dir.path().join("ident.fxsc");
    write_identity_schedule(&fxsc);

    let run = fxmv(&[
        "manipulate",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--region", region.to_str().unwrap(),
        "--schedule", fxsc.to_str().unwrap(),
        "--out", dir.path().join("out").to_str().unwrap(),
        "--canvas", "64x64",
    ]);
    assert_eq!(run.code, 3, "stderr: {}", run.stderr);
}

#[test]
fn manipulate_writes_appearance_condition_when_given_an_image() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("pts.fxtr");
    save_trajectories(&two_point_set(3), &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 3);
    let region = dir.path().join("all.png");
    write_region_png(&region, 64, 64, |_, _| true);
    let fxsc = dir.path().join("ident.fxsc");
    write_identity_schedule(&fxsc);
    let img_path = dir.path().join("source.png");
    let img = image::RgbImage::from_fn(64, 64, |x, y| {
        image::Rgb([x as u8, y as u8, (x ^ y) as u8])
    });
    img.save(&img_path).unwrap();

    let out = dir.path().join("out");
    let run = fxmv(&[
        "manipulate",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--region", region.to_str().unwrap(),
        "--schedule", fxsc.to_str().unwrap(),
        "--image", img_path.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
        "--canvas", "64x64",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);

    // Frame 0 keeps the source image; later frames are fully gray.
    let f0 = image::open(out.join("appearance_0000.png")).unwrap().to_rgb8();
    assert_eq!(f0, img);
    for t in 1..3 {
        let f = image::open(out.join(format!("appearance_{t:04}.png"))).unwrap().to_rgb8();
        assert!(f.pixels().all(|p| p.0 == [127, 127, 127]), "frame {t} not gray");
    }
}

fn offset_pose_files(dir: &Path, offset_deg: f64) -> (PathBuf, PathBuf) {
    // Ground truth: varied rotations starting at identity, zero first
    // translation. Generated: the same rotations composed with a constant
    // offset about y on every frame after the first, so the offset survives
    // the relative-to-first-frame reconstruction.
    let axis = Unit::new_normalize(Vector3::new(0.4, 1.0, -0.2));
    let offset =
        Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::y()), offset_deg.to_radians())
            .into_inner();
    let frames = 6;
    let mut gt = Vec::new();
    let mut gen = Vec::new();
    for t in 0..frames {
        let angle = 0.15 * t as f64;
        let r = Rotation3::from_axis_angle(&axis, angle).into_inner();
        let translation = Vector3::new(0.2 * t as f64, -0.1 * t as f64, 0.05 * t as f64);
        gt.push((test_intr(), CameraPose::new(r, translation).unwrap()));
        let gen_r = if t == 0 { r } else { r * offset };
        gen.push((test_intr(), CameraPose::new(gen_r, translation).unwrap()));
    }
    let gt_path = dir.join("gt.fxpo");
    let gen_path = dir.join("gen.fxpo");
    save_trajectory(&CameraTrajectory::new(gt).unwrap(), &gt_path).unwrap();
    save_trajectory(&CameraTrajectory::new(gen).unwrap(), &gen_path).unwrap();
    (gen_path, gt_path)
}

fn parse_metric(stdout: &str, key: &str) -> f64 {
    for token in stdout.split_whitespace() {
        if let Some(v) = token.strip_prefix(&format!("{key}=")) {
            return v.parse().unwrap();
        }
    }
    panic!("{key} not found in {stdout:?}");
}

#[test]
fn evaluate_identical_files_reports_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (_, gt) = offset_pose_files(dir.path(), 0.0);
    let run = fxmv(&["evaluate", "--gen", gt.to_str().unwrap(), "--gt", gt.to_str().unwrap()]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(parse_metric(&run.stdout, "rot_err_deg") < 1e-6);
    assert!(parse_metric(&run.stdout, "trans_err_deg") < 1e-6);
    assert_eq!(parse_metric(&run.stdout, "frames"), 6.0);
}

#[test]
fn evaluate_constant_offset_reports_half_angle() {
    let dir = tempfile::tempdir().unwrap();
    let (gen, gt) = offset_pose_files(dir.path(), 30.0);
    let run = fxmv(&["evaluate", "--gen", gen.to_str().unwrap(), "--gt", gt.to_str().unwrap()]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let rot = parse_metric(&run.stdout, "rot_err_deg");
    assert!((rot - 15.0).abs() <= 1e-6, "rot_err_deg = {rot}");
}

#[test]
fn evaluate_frame_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (_, gt6) = offset_pose_files(dir.path(), 0.0);
    let short = dir.path().join("short.fxpo");
    let cams = generate_trajectory(TrajectoryKind::Static, 3, test_intr()).unwrap();
    save_trajectory(&cams, &short).unwrap();
    let run = fxmv(&["evaluate", "--gen", short.to_str().unwrap(), "--gt", gt6.to_str().unwrap()]);
    assert_eq!(run.code, 2, "stderr: {}", run.stderr);
}

#[test]
fn downsample_subcommand_writes_thinned_file() {
    let dir = tempfile::tempdir().unwrap();
    let (gw, gh) = (12u32, 9u32);
    let n = (gw * gh) as usize;
    let positions: Vec<[f64; 3]> = (0..n)
        .map(|i| [(i % 12) as f64 * 0.1, (i / 12) as f64 * 0.1, 1.0 + i as f64 * 0.01])
        .collect();
    let set = PointTrajectorySet::new(1, n, positions, vec![true; n], Some((gw, gh))).unwrap();
    let fxtr = dir.path().join("grid.fxtr");
    save_trajectories(&set, &fxtr).unwrap();

    let out = dir.path().join("out");
    let run = fxmv(&[
        "downsample",
        "--trajectories", fxtr.to_str().unwrap(),
        "--stride", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let thinned =
        fxmv_core::trajectory::load_trajectories(out.join("downsampled.fxtr")).unwrap();
    assert_eq!(thinned.point_count(), 4 * 3);
    assert_eq!(thinned.source_grid(), Some((4, 3)));
}

#[test]
fn small_renders_are_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("pts.fxtr");
    save_trajectories(&two_point_set(4), &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 4);

    let mut bytes = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}"));
        let run = fxmv(&[
            "render",
            "--trajectories", fxtr.to_str().unwrap(),
            "--poses", fxpo.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
            "--canvas", "64x64",
            "--threads", threads,
            "--no-previews",
        ]);
        assert_eq!(run.code, 0, "stderr: {}", run.stderr);
        bytes.push(std::fs::read(out.join("motion_video.fxmv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn config_file_fills_in_missing_flags_but_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let fxtr = dir.path().join("one.fxtr");
    let set = PointTrajectorySet::new(1, 1, vec![[0.0, 0.0, 2.0]], vec![true], None).unwrap();
    save_trajectories(&set, &fxtr).unwrap();
    let fxpo = write_static_poses(dir.path(), 1);
    let conf = dir.path().join("fxmv.conf");
    std::fs::write(&conf, "pointsize=5\ncanvas=64x64\n").unwrap();

    // Config pointsize 5 applies: one point paints 25 pixels.
    let out_a = dir.path().join("a");
    let run = fxmv(&[
        "render",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--out", out_a.to_str().unwrap(),
        "--config", conf.to_str().unwrap(),
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let mv = load_motion_video(out_a.join("motion_video.fxmv")).unwrap();
    assert_eq!(nonzero_pixels(&mv, 0), 25);

    // An explicit flag overrides the config file.
    let out_b = dir.path().join("b");
    let run = fxmv(&[
        "render",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--out", out_b.to_str().unwrap(),
        "--config", conf.to_str().unwrap(),
        "--pointsize", "1",
        "--no-previews",
    ]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let mv = load_motion_video(out_b.join("motion_video.fxmv")).unwrap();
    assert_eq!(nonzero_pixels(&mv, 0), 1);

    // Unknown config keys are rejected.
    std::fs::write(&conf, "pointsizes=5\n").unwrap();
    let run = fxmv(&[
        "render",
        "--trajectories", fxtr.to_str().unwrap(),
        "--poses", fxpo.to_str().unwrap(),
        "--out", dir.path().join("c").to_str().unwrap(),
        "--config", conf.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 2, "stderr: {}", run.stderr);
}

#[test]
fn missing_input_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let run = fxmv(&[
        "render",
        "--trajectories", dir.path().join("absent.fxtr").to_str().unwrap(),
        "--poses", dir.path().join("absent.fxpo").to_str().unwrap(),
        "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(run.code, 1, "stderr: {}", run.stderr);
    assert!(run.stderr.contains("loading trajectories"), "stderr: {}", run.stderr);
}

#[test]
fn unknown_flag_exits_4() {
    let run = fxmv(&["render", "--bogus"]);
    assert_eq!(run.code, 4);
}
