//! Camera-pose fidelity metrics: rotation and translation error between a
//! generated and a ground-truth pose sequence.
//!
//! Both metrics average per-frame cosine similarities over frames 2..T (the
//! first frame is the identity reference), clamp the mean into `[-1, 1]`,
//! and report `arccos` of it in degrees. Quaternions are sign-canonicalized
//! per frame so the double cover cannot flip a perfect match to 180 degrees;
//! translations are normalized to unit length, making the translation metric
//! direction-only.

use nalgebra::Matrix3;

use crate::camera::{check_rotation, CameraPose, CameraTrajectory};
use crate::error::{Error, Result};

/// Unit quaternion as `(w, x, y, z)`.
pub type Quat = [f64; 4];

/// Converts an orthonormal rotation matrix to the unit quaternion with
/// non-negative `w`, using Shepperd-style branch selection on the largest
/// diagonal term for numerical stability.
pub fn rotmat_to_quat(r: &Matrix3<f64>) -> Result<Quat> {
    check_rotation(r, 1e-6)?;
    let (m00, m01, m02) = (r[(0, 0)], r[(0, 1)], r[(0, 2)]);
    let (m10, m11, m12) = (r[(1, 0)], r[(1, 1)], r[(1, 2)]);
    let (m20, m21, m22) = (r[(2, 0)], r[(2, 1)], r[(2, 2)]);
    let trace = m00 + m11 + m22;

    let mut q = if trace > 0.0 {
        let s = (trace + 1.0).sqrt() * 2.0;
        [0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s]
    } else if m00 > m11 && m00 > m22 {
        let s = (1.0 + m00 - m11 - m22).sqrt() * 2.0;
        [(m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s]
    } else if m11 > m22 {
        let s = (1.0 + m11 - m00 - m22).sqrt() * 2.0;
        [(m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s]
    } else {
        let s = (1.0 + m22 - m00 - m11).sqrt() * 2.0;
        [(m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s]
    };

    let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    for c in &mut q {
        *c /= norm;
    }
    if q[0] < 0.0 {
        for c in &mut q {
            *c = -*c;
        }
    }
    Ok(q)
}

fn quat_dot(a: &Quat, b: &Quat) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// A camera path expressed relative to its first frame: per frame a unit
/// quaternion and a translation vector, with frame 0 the exact identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    rotations: Vec<Quat>,
    translations: Vec<[f64; 3]>,
}

impl PoseSequence {
    pub fn new(rotations: Vec<Quat>, translations: Vec<[f64; 3]>) -> Result<Self> {
        if rotations.is_empty() || rotations.len() != translations.len() {
            return Err(Error::Validation(format!(
                "pose sequence needs equal, nonzero rotation/translation counts, got {}/{}",
                rotations.len(),
                translations.len()
            )));
        }
        for (i, q) in rotations.iter().enumerate() {
            let norm2 = quat_dot(q, q);
            if (norm2 - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!(
                    "quaternion {i} has non-unit norm^2 = {norm2}"
                )));
            }
        }
        let q0 = rotations[0];
        let identity0 = (q0[0].abs() - 1.0).abs() <= 1e-9
            && q0[1].abs() <= 1e-9
            && q0[2].abs() <= 1e-9
            && q0[3].abs() <= 1e-9
            && translations[0].iter().all(|c| c.abs() <= 1e-9);
        if !identity0 {
            return Err(Error::Validation(
                "frame 0 must be the identity rotation with zero translation".into(),
            ));
        }
        Ok(Self { rotations, translations })
    }

    /// Re-expresses a pose list relative to its first entry. The first
    /// output is snapped to the exact identity.
    pub fn from_poses(poses: &[CameraPose]) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::Validation("pose sequence needs at least one pose".into()));
        }
        let first = &poses[0];
        let mut rotations = Vec::with_capacity(poses.len());
        let mut translations = Vec::with_capacity(poses.len());
        rotations.push([1.0, 0.0, 0.0, 0.0]);
        translations.push([0.0, 0.0, 0.0]);
        for pose in &poses[1..] {
            let rel = pose.relative_to(first);
            rotations.push(rotmat_to_quat(rel.rotation())?);
            let tr = rel.translation();
            translations.push([tr.x, tr.y, tr.z]);
        }
        Self::new(rotations, translations)
    }

    /// Re-expresses a camera trajectory relative to its first frame.
    pub fn from_trajectory(cams: &CameraTrajectory) -> Result<Self> {
        let poses: Vec<CameraPose> = cams.frames().iter().map(|(_, p)| *p).collect();
        Self::from_poses(&poses)
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn rotation(&self, frame: usize) -> &Quat {
        &self.rotations[frame]
    }

    pub fn translation(&self, frame: usize) -> &[f64; 3] {
        &self.translations[frame]
    }
}

fn check_pair(gen: &PoseSequence, gt: &PoseSequence) -> Result<usize> {
    if gen.len() != gt.len() {
        return Err(Error::InputMismatch(format!(
            "pose sequences differ in length: {} vs {}",
            gen.len(),
            gt.len()
        )));
    }
    if gen.len() < 2 {
        return Err(Error::InputMismatch(
            "pose error needs at least 2 frames".into(),
        ));
    }
    Ok(gen.len())
}

/// Rotation error in degrees: `arccos` of the mean per-frame quaternion
/// inner product over frames 2..T, with per-frame sign canonicalization.
pub fn rot_err(gen: &PoseSequence, gt: &PoseSequence) -> Result<f64> {
    let t = check_pair(gen, gt)?;
    let mut sum = 0.0;
    for i in 1..t {
        let mut d = quat_dot(gen.rotation(i), gt.rotation(i));
        if d < 0.0 {
            d = -d;
        }
        sum += d;
    }
    let mean = (sum / (t - 1) as f64).clamp(-1.0, 1.0);
    Ok(mean.acos().to_degrees())
}

/// Translation error result. Frames where either sequence has a zero-length
/// translation are skipped; if no frame survives, the error is 0 by
/// convention and `all_zero` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransErr {
    pub degrees: f64,
    /// Frames that entered the average.
    pub used_frames: usize,
    /// True when every frame was skipped for zero-length translations.
    pub all_zero: bool,
}

/// Translation error in degrees: `arccos` of the mean per-frame cosine
/// between unit-normalized translation vectors over frames 2..T.
pub fn trans_err(gen: &PoseSequence, gt: &PoseSequence) -> Result<TransErr> {
    let t = check_pair(gen, gt)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for i in 1..t {
        let a = gen.translation(i);
        let b = gt.translation(i);
        let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        sum += (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb);
        used += 1;
    }
    if used == 0 {
        return Ok(TransErr { degrees: 0.0, used_frames: 0, all_zero: true });
    }
    let mean = (sum / used as f64).clamp(-1.0, 1.0);
    Ok(TransErr { degrees: mean.acos().to_degrees(), used_frames: used, all_zero: false })
}
