//! Camera intrinsics and world-to-camera poses, depth-map lifting, and
//! retargeting of dynamic point clouds onto new camera trajectories.
//!
//! Convention used throughout: `p_cam = R * p_world + t` with `+z` forward,
//! `+x` right, `+y` down (image-aligned). The camera center in world
//! coordinates is `-R^T * t`.
//!
//! # FXPO pose text format
//!
//! One line per frame, whitespace separated:
//!
//! ```text
//! frame_index fx fy cx cy r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz
//! ```
//!
//! Lines starting with `#` are comments. Frame indices must run 0..T-1
//! contiguously.
//!
//! # FXDM depth-map format (little-endian)
//!
//! magic `"FXDM"`, version u32 = 1, H u32, W u32, then H*W f32 depths in
//! row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::trajectory::PointTrajectorySet;

/// Pinhole intrinsics plus the canvas they address.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(Error::Parameter(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return Err(Error::Parameter(format!(
                "principal point ({cx}, {cy}) outside canvas {width}x{height}"
            )));
        }
        Ok(Self { fx, fy, cx, cy, width, height })
    }
}

/// Orthonormality tolerance for rotation matrices taken from user inputs.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

pub(crate) fn check_rotation(r: &Matrix3<f64>, tol: f64) -> Result<()> {
    let rtr = r.transpose() * r;
    let dev = (rtr - Matrix3::identity()).abs().max();
    if dev > tol {
        return Err(Error::Validation(format!(
            "rotation is not orthonormal (max |R^T R - I| = {dev:.3e})"
        )));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > tol {
        return Err(Error::Validation(format!(
            "rotation determinant {det} is not +1"
        )));
    }
    Ok(())
}

/// World-to-camera rigid pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl CameraPose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        check_rotation(&rotation, ROTATION_TOLERANCE)?;
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// World point into this camera's coordinates.
    #[inline]
    pub fn to_camera(&self, p_world: Vector3<f64>) -> Vector3<f64> {
        self.rotation * p_world + self.translation
    }

    /// Camera-space point back to world coordinates.
    #[inline]
    pub fn to_world(&self, p_cam: Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (p_cam - self.translation)
    }

    /// Camera center in world coordinates, `-R^T t`.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    /// Pose of this camera expressed relative to `reference`: maps
    /// `reference`'s camera coordinates into this camera's.
    pub fn relative_to(&self, reference: &CameraPose) -> CameraPose {
        let rotation = self.rotation * reference.rotation.transpose();
        let translation = self.translation - rotation * reference.translation;
        CameraPose { rotation, translation }
    }
}

/// Per-frame intrinsics and pose.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraTrajectory {
    frames: Vec<(CameraIntrinsics, CameraPose)>,
}

impl CameraTrajectory {
    pub fn new(frames: Vec<(CameraIntrinsics, CameraPose)>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Validation("camera trajectory must have T >= 1".into()));
        }
        let canvas = (frames[0].0.width, frames[0].0.height);
        if frames.iter().any(|(i, _)| (i.width, i.height) != canvas) {
            return Err(Error::Validation(
                "all frames of a trajectory must share the canvas size".into(),
            ));
        }
        Ok(Self { frames })
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn intrinsics(&self, frame: usize) -> &CameraIntrinsics {
        &self.frames[frame].0
    }

    pub fn pose(&self, frame: usize) -> &CameraPose {
        &self.frames[frame].1
    }

    pub fn frames(&self) -> &[(CameraIntrinsics, CameraPose)] {
        &self.frames
    }
}

/// Per-frame world-space positions and visibility of tracked points; the
/// camera-independent form of a [`PointTrajectorySet`].
#[derive(Debug, Clone, PartialEq)]
pub struct WorldPointCloud {
    frame_count: usize,
    point_count: usize,
    positions: Vec<[f64; 3]>,
    visibility: Vec<bool>,
    source_grid: Option<(u32, u32)>,
    density: f32,
}

impl WorldPointCloud {
    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    #[inline]
    pub fn position(&self, frame: usize, point: usize) -> [f64; 3] {
        self.positions[frame * self.point_count + point]
    }

    #[inline]
    pub fn visible(&self, frame: usize, point: usize) -> bool {
        self.visibility[frame * self.point_count + point]
    }

    /// A static world cloud: one frame of geometry repeated `frame_count`
    /// times. Used for single-image inputs whose world frame is the source
    /// camera frame.
    pub fn from_static_frame(set: &PointTrajectorySet, frame_count: usize) -> Result<Self> {
        if frame_count == 0 {
            return Err(Error::Parameter("frame count must be >= 1".into()));
        }
        let n = set.point_count();
        let mut positions = Vec::with_capacity(frame_count * n);
        let mut visibility = Vec::with_capacity(frame_count * n);
        for _ in 0..frame_count {
            positions.extend_from_slice(set.frame_positions(0));
            visibility.extend_from_slice(set.frame_visibility(0));
        }
        Ok(Self {
            frame_count,
            point_count: n,
            positions,
            visibility,
            source_grid: set.source_grid(),
            density: set.density(),
        })
    }
}

/// Dense depth map addressed as `depth[row * width + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Validation(format!(
                "depth data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f32 {
        self.data[v * self.width as usize + u]
    }
}

/// Back-projects a depth map into a single-frame camera-space point set,
/// sampling every `stride`-th pixel in both directions.
///
/// Pixel `(u, v)` with depth `z` lifts to
/// `((u - cx) * z / fx, (v - cy) * z / fy, z)`. The sampled grid is recorded
/// as the set's source grid and the retained density as `1/stride^2`.
pub fn lift_depth_map(
    depth: &DepthMap,
    intr: &CameraIntrinsics,
    stride: u32,
) -> Result<PointTrajectorySet> {
    if stride == 0 {
        return Err(Error::Parameter("lift stride must be >= 1".into()));
    }
    if depth.width != intr.width || depth.height != intr.height {
        return Err(Error::InputMismatch(format!(
            "depth map {}x{} does not match intrinsics canvas {}x{}",
            depth.width, depth.height, intr.width, intr.height
        )));
    }
    let step = stride as usize;
    let grid_w = (depth.width as usize).div_ceil(step) as u32;
    let grid_h = (depth.height as usize).div_ceil(step) as u32;
    let n = grid_w as usize * grid_h as usize;
    let mut positions = Vec::with_capacity(n);
    for v in (0..depth.height as usize).step_by(step) {
        for u in (0..depth.width as usize).step_by(step) {
            let z = depth.at(u, v) as f64;
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::Lift { u, v, depth: z });
            }
            positions.push([
                (u as f64 - intr.cx) * z / intr.fx,
                (v as f64 - intr.cy) * z / intr.fy,
                z,
            ]);
        }
    }
    let set = PointTrajectorySet::new(1, n, positions, vec![true; n], Some((grid_w, grid_h)))?;
    let density = (1.0 / (stride as f64 * stride as f64)) as f32;
    Ok(set.with_density(density))
}

/// Lifts per-frame camera-space points to world space: `w = R^T (p - t)`.
pub fn lift_to_world(set: &PointTrajectorySet, cams: &CameraTrajectory) -> Result<WorldPointCloud> {
    if set.frame_count() != cams.frame_count() {
        return Err(Error::InputMismatch(format!(
            "trajectory set has {} frames but camera trajectory has {}",
            set.frame_count(),
            cams.frame_count()
        )));
    }
    let n = set.point_count();
    let mut positions = Vec::with_capacity(set.frame_count() * n);
    for t in 0..set.frame_count() {
        let pose = cams.pose(t);
        for i in 0..n {
            let p = set.position(t, i);
            let w = pose.to_world(Vector3::new(p[0], p[1], p[2]));
            positions.push([w.x, w.y, w.z]);
        }
    }
    Ok(WorldPointCloud {
        frame_count: set.frame_count(),
        point_count: n,
        positions,
        visibility: set.visibility().to_vec(),
        source_grid: set.source_grid(),
        density: set.density(),
    })
}

/// Reprojects a world-space dynamic point cloud into the camera coordinates
/// of a new trajectory: `p = R w + t` per frame.
///
/// Points that land at `z <= 0` (behind the new camera) have their
/// visibility cleared for that frame. The result feeds the rasterizer
/// directly.
pub fn retarget(world: &WorldPointCloud, new_cams: &CameraTrajectory) -> Result<PointTrajectorySet> {
    if world.frame_count() != new_cams.frame_count() {
        return Err(Error::InputMismatch(format!(
            "world cloud has {} frames but camera trajectory has {}",
            world.frame_count(),
            new_cams.frame_count()
        )));
    }
    let n = world.point_count();
    let mut positions = Vec::with_capacity(world.frame_count * n);
    let mut visibility = Vec::with_capacity(world.frame_count * n);
    for t in 0..world.frame_count {
        let pose = new_cams.pose(t);
        for i in 0..n {
            let w = world.position(t, i);
            let p = pose.to_camera(Vector3::new(w[0], w[1], w[2]));
            positions.push([p.x, p.y, p.z]);
            visibility.push(world.visible(t, i) && p.z > 0.0);
        }
    }
    let set = PointTrajectorySet::new(
        world.frame_count,
        n,
        positions,
        visibility,
        world.source_grid,
    )?;
    Ok(set.with_density(world.density))
}

/// Built-in demo/test trajectory shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryKind {
    /// Identity pose repeated every frame.
    Static,
    /// Extrinsic translation interpolated linearly from zero to
    /// `displacement`; rotation stays identity.
    Pan { displacement: [f64; 3] },
    /// Cameras on a circle of `radius` in the y=0 plane, looking at the
    /// origin, sweeping `sweep_deg` degrees over the sequence.
    Orbit { radius: f64, sweep_deg: f64 },
    /// Translation along the optical axis from zero to `depth` (negative
    /// moves the camera forward).
    Dolly { depth: f64 },
}

/// Generates a `frame_count`-frame trajectory with constant intrinsics.
pub fn generate_trajectory(
    kind: TrajectoryKind,
    frame_count: usize,
    intr: CameraIntrinsics,
) -> Result<CameraTrajectory> {
    if frame_count == 0 {
        return Err(Error::Parameter("trajectory must have T >= 1".into()));
    }
    let blend = |t: usize| -> f64 {
        if frame_count == 1 {
            0.0
        } else {
            t as f64 / (frame_count - 1) as f64
        }
    };
    let mut frames = Vec::with_capacity(frame_count);
    match kind {
        TrajectoryKind::Static => {
            for _ in 0..frame_count {
                frames.push((intr, CameraPose::identity()));
            }
        }
        TrajectoryKind::Pan { displacement } => {
            let d = Vector3::from(displacement);
            for t in 0..frame_count {
                frames.push((
                    intr,
                    CameraPose { rotation: Matrix3::identity(), translation: d * blend(t) },
                ));
            }
        }
        TrajectoryKind::Dolly { depth } => {
            for t in 0..frame_count {
                frames.push((
                    intr,
                    CameraPose {
                        rotation: Matrix3::identity(),
                        translation: Vector3::new(0.0, 0.0, depth * blend(t)),
                    },
                ));
            }
        }
        TrajectoryKind::Orbit { radius, sweep_deg } => {
            if radius.is_nan() || radius <= 0.0 {
                return Err(Error::Parameter(format!(
                    "orbit radius must be > 0, got {radius}"
                )));
            }
            for t in 0..frame_count {
                let theta = sweep_deg.to_radians() * blend(t);
                let center = Vector3::new(radius * theta.sin(), 0.0, -radius * theta.cos());
                // Look at the origin with image +y pointing down.
                let forward = (-center).normalize();
                let down_hint = Vector3::new(0.0, 1.0, 0.0);
                let right = down_hint.cross(&forward).normalize();
                let down = forward.cross(&right);
                let rotation = Matrix3::from_rows(&[
                    right.transpose(),
                    down.transpose(),
                    forward.transpose(),
                ]);
                let translation = -(rotation * center);
                frames.push((intr, CameraPose { rotation, translation }));
            }
        }
    }
    CameraTrajectory::new(frames)
}

/// One parsed FXPO line: intrinsics and pose numbers without canvas binding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRecord {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

/// Reads the records of an FXPO file in frame order.
pub fn read_pose_records(path: impl AsRef<Path>) -> Result<Vec<PoseRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Format {
                    path: path.into(),
                    expected: "FXPO",
                    detail: format!("line {}: non-numeric field {tok:?}", lineno + 1),
                })
            })
            .collect::<Result<_>>()?;
        if fields.len() != 17 {
            return Err(Error::Format {
                path: path.into(),
                expected: "FXPO",
                detail: format!("line {}: expected 17 fields, got {}", lineno + 1, fields.len()),
            });
        }
        let frame_index = fields[0];
        if frame_index != records.len() as f64 {
            return Err(Error::Format {
                path: path.into(),
                expected: "FXPO",
                detail: format!(
                    "line {}: frame index {} breaks the contiguous 0..T-1 sequence (expected {})",
                    lineno + 1,
                    frame_index,
                    records.len()
                ),
            });
        }
        let rotation = Matrix3::new(
            fields[5], fields[6], fields[7],
            fields[8], fields[9], fields[10],
            fields[11], fields[12], fields[13],
        );
        records.push(PoseRecord {
            fx: fields[1],
            fy: fields[2],
            cx: fields[3],
            cy: fields[4],
            rotation,
            translation: Vector3::new(fields[14], fields[15], fields[16]),
        });
    }
    if records.is_empty() {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXPO",
            detail: "file contains no pose lines".into(),
        });
    }
    Ok(records)
}

/// Binds FXPO records to a canvas, validating intrinsics and rotations.
pub fn trajectory_from_records(
    records: &[PoseRecord],
    canvas_width: u32,
    canvas_height: u32,
) -> Result<CameraTrajectory> {
    let mut frames = Vec::with_capacity(records.len());
    for rec in records {
        let intr =
            CameraIntrinsics::new(rec.fx, rec.fy, rec.cx, rec.cy, canvas_width, canvas_height)?;
        let pose = CameraPose::new(rec.rotation, rec.translation)?;
        frames.push((intr, pose));
    }
    CameraTrajectory::new(frames)
}

/// Convenience: read an FXPO file and bind it to a canvas in one step.
pub fn load_trajectory(
    path: impl AsRef<Path>,
    canvas_width: u32,
    canvas_height: u32,
) -> Result<CameraTrajectory> {
    let records = read_pose_records(path)?;
    trajectory_from_records(&records, canvas_width, canvas_height)
}

/// Writes a trajectory as FXPO text.
pub fn save_trajectory(cams: &CameraTrajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "# frame fx fy cx cy r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz")?;
        for (t, (intr, pose)) in cams.frames().iter().enumerate() {
            let r = pose.rotation();
            let tr = pose.translation();
            writeln!(
                w,
                "{t} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
                intr.fx, intr.fy, intr.cx, intr.cy,
                r[(0, 0)], r[(0, 1)], r[(0, 2)],
                r[(1, 0)], r[(1, 1)], r[(1, 2)],
                r[(2, 0)], r[(2, 1)], r[(2, 2)],
                tr.x, tr.y, tr.z,
            )?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

const FXDM_MAGIC: &[u8; 4] = b"FXDM";
const FXDM_VERSION: u32 = 1;

/// Reads an FXDM depth map.
pub fn load_depth_map(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format {
        path: path.into(),
        expected: "FXDM",
        detail: "file too short for magic".into(),
    })?;
    if &magic != FXDM_MAGIC {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXDM",
            detail: format!("bad magic {magic:?}"),
        });
    }
    let mut u32buf = [0u8; 4];
    let mut next_u32 = |what: &str| -> Result<u32> {
        r.read_exact(&mut u32buf).map_err(|_| Error::CorruptFile {
            path: path.into(),
            detail: format!("unexpected end of file while reading {what}"),
        })?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = next_u32("version")?;
    if version != FXDM_VERSION {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXDM",
            detail: format!("unsupported version {version}"),
        });
    }
    let h = next_u32("height")? as usize;
    let w = next_u32("width")? as usize;
    let mut buf = vec![0u8; h * w * 4];
    let mut rr = r;
    rr.read_exact(&mut buf).map_err(|_| Error::CorruptFile {
        path: path.into(),
        detail: format!("depth payload shorter than H*W = {} floats", h * w),
    })?;
    let data: Vec<f32> = buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut probe = [0u8; 1];
    if rr.read(&mut probe).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::CorruptFile {
            path: path.into(),
            detail: "trailing bytes after depth payload".into(),
        });
    }
    DepthMap::new(w as u32, h as u32, data)
}

/// Writes an FXDM depth map.
pub fn save_depth_map(depth: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        w.write_all(FXDM_MAGIC)?;
        w.write_all(&FXDM_VERSION.to_le_bytes())?;
        w.write_all(&depth.height.to_le_bytes())?;
        w.write_all(&depth.width.to_le_bytes())?;
        let mut buf = Vec::with_capacity(depth.data.len() * 4);
        for d in &depth.data {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}
