//! Object editing: select tracked points through a region mask, drive them
//! with per-frame rigid transforms while the background stays fixed, build
//! the per-point edit mask, and construct the gray-filled appearance
//! condition video.
//!
//! # FXSC schedule text format
//!
//! One keyframe per line, whitespace separated:
//!
//! ```text
//! frame r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz
//! ```
//!
//! `#` lines are comments. Frame 0 must be the identity transform (it is
//! implied when absent); frames between keyframes are interpolated with
//! spherical-linear rotation and linear translation, and frames after the
//! last keyframe hold it.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use image::RgbImage;
use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};

use crate::camera::{check_rotation, CameraIntrinsics, ROTATION_TOLERANCE};
use crate::error::{Error, Result};
use crate::raster::project_2d;
use crate::trajectory::PointTrajectorySet;

/// Gray value painted into regions targeted for generation or editing.
pub const GRAY_FILL: u8 = 127;

/// A binary image-space region; `true` means inside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl RegionMask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Validation(format!(
                "region data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self { width, height, data: vec![value; width as usize * height as usize] }
    }

    /// Loads an 8-bit grayscale PNG; nonzero pixels are inside the region.
    pub fn from_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::Format {
                    path: path.into(),
                    expected: "PNG region mask",
                    detail: other.to_string(),
                },
            })?
            .to_luma8();
        let data = img.pixels().map(|p| p.0[0] != 0).collect();
        Ok(Self { width: img.width(), height: img.height(), data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn at(&self, u: u32, v: u32) -> bool {
        self.data[v as usize * self.width as usize + u as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, value: bool) {
        self.data[v as usize * self.width as usize + u as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Morphological dilation with a square structuring element of the given
    /// radius (side `2*radius + 1`), run separably.
    pub fn dilate(&self, radius: u32) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width as usize, self.height as usize);
        let r = radius as usize;
        let mut rows = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                if self.data[y * w + x] {
                    let x0 = x.saturating_sub(r);
                    let x1 = (x + r).min(w - 1);
                    for out in &mut rows[y * w + x0..=y * w + x1] {
                        *out = true;
                    }
                }
            }
        }
        let mut full = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                if rows[y * w + x] {
                    let y0 = y.saturating_sub(r);
                    let y1 = (y + r).min(h - 1);
                    for yy in y0..=y1 {
                        full[yy * w + x] = true;
                    }
                }
            }
        }
        Self { width: self.width, height: self.height, data: full }
    }
}

/// Per-point, per-frame edit flags, frame-major like the trajectory set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditMask {
    frame_count: usize,
    point_count: usize,
    data: Vec<bool>,
}

impl EditMask {
    pub fn zeros(frame_count: usize, point_count: usize) -> Self {
        Self { frame_count, point_count, data: vec![false; frame_count * point_count] }
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    #[inline]
    pub fn get(&self, frame: usize, point: usize) -> bool {
        self.data[frame * self.point_count + point]
    }

    pub fn set(&mut self, frame: usize, point: usize, value: bool) {
        self.data[frame * self.point_count + point] = value;
    }
}

/// Ids of points visible at `frame` whose projection lands inside `region`.
///
/// The region must match the intrinsics canvas; points projecting off canvas
/// are never selected.
pub fn select_points(
    set: &PointTrajectorySet,
    region: &RegionMask,
    frame: usize,
    intr: &CameraIntrinsics,
) -> Result<Vec<usize>> {
    if region.width != intr.width || region.height != intr.height {
        return Err(Error::InputMismatch(format!(
            "region mask {}x{} does not match canvas {}x{}",
            region.width, region.height, intr.width, intr.height
        )));
    }
    if frame >= set.frame_count() {
        return Err(Error::Parameter(format!(
            "selection frame {frame} out of range for T = {}",
            set.frame_count()
        )));
    }
    let mut ids = Vec::new();
    for i in 0..set.point_count() {
        if !set.visible(frame, i) {
            continue;
        }
        if let Some(hit) = project_2d(intr, set.position(frame, i), intr.height, intr.width) {
            if region.at(hit.u, hit.v) {
                ids.push(i);
            }
        }
    }
    Ok(ids)
}

/// One rigid transform of object working space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
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

    fn is_identity(&self, tol: f64) -> bool {
        (self.rotation - Matrix3::identity()).abs().max() <= tol
            && self.translation.abs().max() <= tol
    }

    /// `R * (p - pivot) + pivot + t`.
    #[inline]
    pub fn apply_about(&self, p: Vector3<f64>, pivot: Vector3<f64>) -> Vector3<f64> {
        self.rotation * (p - pivot) + pivot + self.translation
    }

    /// The transform equivalent to `self` after `first`, both taken about
    /// the same pivot.
    pub fn compose_after(&self, first: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }
}

/// Per-frame rigid transforms applied to the selected points; frame 0 is
/// always the identity, so edits are relative to the source configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidSchedule {
    transforms: Vec<RigidTransform>,
}

impl RigidSchedule {
    pub fn new(transforms: Vec<RigidTransform>) -> Result<Self> {
        if transforms.is_empty() {
            return Err(Error::Validation("schedule must cover T >= 1 frames".into()));
        }
        if !transforms[0].is_identity(ROTATION_TOLERANCE) {
            return Err(Error::Validation(
                "schedule frame 0 must be the identity transform".into(),
            ));
        }
        Ok(Self { transforms })
    }

    pub fn identity(frame_count: usize) -> Result<Self> {
        if frame_count == 0 {
            return Err(Error::Validation("schedule must cover T >= 1 frames".into()));
        }
        Ok(Self { transforms: vec![RigidTransform::identity(); frame_count] })
    }

    /// Expands sparse keyframes to a dense `frame_count`-frame schedule.
    ///
    /// Rotation interpolates along the shortest arc (slerp), translation
    /// linearly. A missing frame 0 is taken as identity; frames past the
    /// last keyframe hold it.
    pub fn from_keyframes(
        keyframes: &[(usize, RigidTransform)],
        frame_count: usize,
    ) -> Result<Self> {
        if frame_count == 0 {
            return Err(Error::Validation("schedule must cover T >= 1 frames".into()));
        }
        let mut keys: Vec<(usize, RigidTransform)> = keyframes.to_vec();
        keys.sort_by_key(|(f, _)| *f);
        if keys.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation("duplicate keyframe frame index".into()));
        }
        if let Some(&(last, _)) = keys.last() {
            if last >= frame_count {
                return Err(Error::Validation(format!(
                    "keyframe at frame {last} is beyond T = {frame_count}"
                )));
            }
        }
        match keys.first() {
            Some(&(0, ref t)) => {
                if !t.is_identity(ROTATION_TOLERANCE) {
                    return Err(Error::Validation(
                        "schedule frame 0 must be the identity transform".into(),
                    ));
                }
            }
            _ => keys.insert(0, (0, RigidTransform::identity())),
        }

        let mut transforms = Vec::with_capacity(frame_count);
        let mut seg = 0usize;
        for t in 0..frame_count {
            while seg + 1 < keys.len() && keys[seg + 1].0 <= t {
                seg += 1;
            }
            if keys[seg].0 == t || seg + 1 == keys.len() {
                transforms.push(keys[seg].1);
            } else {
                let (f0, a) = keys[seg];
                let (f1, b) = keys[seg + 1];
                let alpha = (t - f0) as f64 / (f1 - f0) as f64;
                transforms.push(interpolate_rigid(&a, &b, alpha));
            }
        }
        Self::new(transforms)
    }

    pub fn frame_count(&self) -> usize {
        self.transforms.len()
    }

    pub fn transform(&self, frame: usize) -> &RigidTransform {
        &self.transforms[frame]
    }

    pub fn transforms(&self) -> &[RigidTransform] {
        &self.transforms
    }

    /// Per-frame composition `second(t) . first(t)` about a shared pivot.
    pub fn compose_after(&self, first: &RigidSchedule) -> Result<RigidSchedule> {
        if self.frame_count() != first.frame_count() {
            return Err(Error::InputMismatch(format!(
                "schedule lengths differ: {} vs {}",
                self.frame_count(),
                first.frame_count()
            )));
        }
        let transforms = self
            .transforms
            .iter()
            .zip(&first.transforms)
            .map(|(s, f)| s.compose_after(f))
            .collect();
        Ok(RigidSchedule { transforms })
    }
}

fn slerp_shortest(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>, t: f64) -> UnitQuaternion<f64> {
    let mut dot = a.coords.dot(&b.coords);
    let mut bc = b.coords;
    if dot < 0.0 {
        bc = -bc;
        dot = -dot;
    }
    let coords = if dot > 1.0 - 1e-10 {
        a.coords.lerp(&bc, t)
    } else {
        let theta = dot.clamp(-1.0, 1.0).acos();
        let sin_theta = theta.sin();
        (a.coords * (((1.0 - t) * theta).sin() / sin_theta)) + (bc * ((t * theta).sin() / sin_theta))
    };
    UnitQuaternion::new_normalize(Quaternion::from(coords))
}

fn interpolate_rigid(a: &RigidTransform, b: &RigidTransform, alpha: f64) -> RigidTransform {
    let qa = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(a.rotation));
    let qb = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(b.rotation));
    let rotation = slerp_shortest(&qa, &qb, alpha).to_rotation_matrix().into_inner();
    let translation = a.translation.lerp(&b.translation, alpha);
    RigidTransform { rotation, translation }
}

/// Applies a rigid schedule to the selected points about `pivot`; everything
/// outside the subset is untouched and visibility is preserved.
pub fn apply_rigid_schedule(
    set: &PointTrajectorySet,
    subset: &[usize],
    sched: &RigidSchedule,
    pivot: [f64; 3],
) -> Result<PointTrajectorySet> {
    if subset.is_empty() {
        return Err(Error::EmptySelection("rigid schedule applied to no points".into()));
    }
    if sched.frame_count() != set.frame_count() {
        return Err(Error::InputMismatch(format!(
            "schedule covers {} frames but trajectory set has {}",
            sched.frame_count(),
            set.frame_count()
        )));
    }
    let mut selected = vec![false; set.point_count()];
    for &i in subset {
        if i >= set.point_count() {
            return Err(Error::Parameter(format!(
                "subset id {i} out of range for N = {}",
                set.point_count()
            )));
        }
        selected[i] = true;
    }

    let pivot = Vector3::from(pivot);
    let mut out = set.clone();
    for t in 0..set.frame_count() {
        let tf = sched.transform(t);
        for (i, &sel) in selected.iter().enumerate() {
            if !sel {
                continue;
            }
            let p = set.position(t, i);
            let moved = tf.apply_about(Vector3::new(p[0], p[1], p[2]), pivot);
            out.set_position(t, i, [moved.x, moved.y, moved.z]);
        }
    }
    Ok(out)
}

/// Centroid of the subset's positions visible at `frame`; the default
/// manipulation pivot.
pub fn subset_centroid(
    set: &PointTrajectorySet,
    subset: &[usize],
    frame: usize,
) -> Result<[f64; 3]> {
    let mut sum = Vector3::zeros();
    let mut n = 0usize;
    for &i in subset {
        if i >= set.point_count() {
            return Err(Error::Parameter(format!(
                "subset id {i} out of range for N = {}",
                set.point_count()
            )));
        }
        if set.visible(frame, i) {
            let p = set.position(frame, i);
            sum += Vector3::new(p[0], p[1], p[2]);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptySelection(format!(
            "no subset point visible at frame {frame} to take a pivot from"
        )));
    }
    let c = sum / n as f64;
    Ok([c.x, c.y, c.z])
}

/// Edit-mask bits: 1 for subset points wherever they are visible, else 0.
pub fn build_edit_mask(set: &PointTrajectorySet, subset: &[usize]) -> Result<EditMask> {
    let mut mask = EditMask::zeros(set.frame_count(), set.point_count());
    for &i in subset {
        if i >= set.point_count() {
            return Err(Error::Parameter(format!(
                "subset id {i} out of range for N = {}",
                set.point_count()
            )));
        }
        for t in 0..set.frame_count() {
            if set.visible(t, i) {
                mask.set(t, i, true);
            }
        }
    }
    Ok(mask)
}

/// The partially masked appearance condition: edited regions hold the gray
/// fill, everything else is the source video verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceCondition {
    /// Output frames.
    pub frames: Vec<RgbImage>,
    /// The (dilated) region actually filled in each frame.
    pub regions: Vec<RegionMask>,
}

/// Builds the appearance condition: each frame's region is dilated by
/// `dilation` pixels and filled with gray 127; pixels outside the region are
/// copied bit-exactly.
///
/// `regions` holds either one mask per frame or a single mask broadcast to
/// all frames. Image-to-video conditions are expressed by passing an
/// all-true region for every frame after the first (see [`i2v_regions`]).
pub fn make_appearance_condition(
    video: &[RgbImage],
    regions: &[RegionMask],
    dilation: u32,
) -> Result<AppearanceCondition> {
    if video.is_empty() {
        return Err(Error::InputMismatch("appearance video has no frames".into()));
    }
    if regions.len() != 1 && regions.len() != video.len() {
        return Err(Error::InputMismatch(format!(
            "expected 1 or {} region masks, got {}",
            video.len(),
            regions.len()
        )));
    }
    let (w, h) = (video[0].width(), video[0].height());
    if video.iter().any(|f| f.width() != w || f.height() != h) {
        return Err(Error::InputMismatch("video frames differ in size".into()));
    }
    if regions.iter().any(|r| r.width != w || r.height != h) {
        return Err(Error::InputMismatch(format!(
            "region mask size does not match video frames ({w}x{h})"
        )));
    }

    let mut frames = Vec::with_capacity(video.len());
    let mut out_regions = Vec::with_capacity(video.len());
    for (t, src) in video.iter().enumerate() {
        let region = if regions.len() == 1 { &regions[0] } else { &regions[t] };
        let dilated = region.dilate(dilation);
        let mut frame = src.clone();
        for v in 0..h {
            for u in 0..w {
                if dilated.at(u, v) {
                    frame.put_pixel(u, v, image::Rgb([GRAY_FILL; 3]));
                }
            }
        }
        frames.push(frame);
        out_regions.push(dilated);
    }
    Ok(AppearanceCondition { frames, regions: out_regions })
}

/// Region stack for image-to-video conditioning: the given region for frame
/// 0, then every later frame fully regenerated.
pub fn i2v_regions(frame0: RegionMask, frame_count: usize) -> Vec<RegionMask> {
    let mut regions = Vec::with_capacity(frame_count);
    let all = RegionMask::filled(frame0.width, frame0.height, true);
    regions.push(frame0);
    for _ in 1..frame_count {
        regions.push(all.clone());
    }
    regions
}

/// Writes the condition frames as `appearance_<frame:04>.png`.
pub fn save_appearance_condition(cond: &AppearanceCondition, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (t, frame) in cond.frames.iter().enumerate() {
        let path = dir.join(format!("appearance_{t:04}.png"));
        frame.save(&path).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(&path, io),
            other => Error::Validation(format!("png encode failed: {other}")),
        })?;
    }
    Ok(())
}

/// Reads FXSC keyframes in file order.
pub fn read_schedule_keyframes(path: impl AsRef<Path>) -> Result<Vec<(usize, RigidTransform)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut keys = Vec::new();
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
                    expected: "FXSC",
                    detail: format!("line {}: non-numeric field {tok:?}", lineno + 1),
                })
            })
            .collect::<Result<_>>()?;
        if fields.len() != 13 {
            return Err(Error::Format {
                path: path.into(),
                expected: "FXSC",
                detail: format!("line {}: expected 13 fields, got {}", lineno + 1, fields.len()),
            });
        }
        if fields[0] < 0.0 || fields[0].fract() != 0.0 {
            return Err(Error::Format {
                path: path.into(),
                expected: "FXSC",
                detail: format!("line {}: frame index must be a non-negative integer", lineno + 1),
            });
        }
        let rotation = Matrix3::new(
            fields[1], fields[2], fields[3],
            fields[4], fields[5], fields[6],
            fields[7], fields[8], fields[9],
        );
        let tf = RigidTransform::new(rotation, Vector3::new(fields[10], fields[11], fields[12]))?;
        keys.push((fields[0] as usize, tf));
    }
    if keys.is_empty() {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXSC",
            detail: "file contains no keyframe lines".into(),
        });
    }
    Ok(keys)
}
