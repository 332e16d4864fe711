//! Reference implementations for tests.
//!
//! [`oracle_render`] re-derives the motion video from raw inputs with a
//! per-pixel nearest-covering-point search instead of splatting, and with
//! its own normalization, encoding, and colormap arithmetic. It shares no
//! code with the production renderer; equality between the two is asserted
//! by the test suites. It is quadratic in points times pixels and only
//! meant for small instances.

use crate::camera::{CameraIntrinsics, CameraPose, CameraTrajectory};
use crate::edit::EditMask;
use crate::encoding::SpectralColormap;
use crate::error::Result;
use crate::raster::{render_motion_video, SplatConfig};
use crate::trajectory::{compute_norm_stats, PointTrajectorySet};

/// Raw inputs for the oracle; all slices are frame-major `T*N`.
#[derive(Debug, Clone)]
pub struct OracleScene<'a> {
    pub frame_count: usize,
    pub point_count: usize,
    pub positions: &'a [[f64; 3]],
    pub visibility: &'a [bool],
    /// Per frame `(fx, fy, cx, cy)`.
    pub intrinsics: &'a [(f64, f64, f64, f64)],
    /// `T*N` edit bits; `None` means all zero.
    pub edit_mask: Option<&'a [bool]>,
    pub epsilon: f64,
    pub pointsize: u32,
    pub height: u32,
    pub width: u32,
}

const ORACLE_SPECTRAL: [[f64; 3]; 11] = [
    [158.0, 1.0, 66.0],
    [213.0, 62.0, 79.0],
    [244.0, 109.0, 67.0],
    [253.0, 174.0, 97.0],
    [254.0, 224.0, 139.0],
    [255.0, 255.0, 191.0],
    [230.0, 245.0, 152.0],
    [171.0, 221.0, 164.0],
    [102.0, 194.0, 165.0],
    [50.0, 136.0, 189.0],
    [94.0, 79.0, 162.0],
];

fn oracle_colormap(p: f64) -> [f64; 3] {
    let p = p.clamp(0.0, 1.0);
    let positions: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let anchors: Vec<[f64; 3]> = ORACLE_SPECTRAL
        .iter()
        .map(|c| [c[0] / 255.0, c[1] / 255.0, c[2] / 255.0])
        .collect();
    let mut i = 0;
    while i + 1 < positions.len() && p >= positions[i + 1] {
        i += 1;
    }
    if i == positions.len() - 1 || p == positions[i] {
        return anchors[i];
    }
    let t = (p - positions[i]) / (positions[i + 1] - positions[i]);
    let (a, b) = (anchors[i], anchors[i + 1]);
    [
        (1.0 - t) * a[0] + t * b[0],
        (1.0 - t) * a[1] + t * b[1],
        (1.0 - t) * a[2] + t * b[2],
    ]
}

fn oracle_norm(v: f64, min: f64, max: f64) -> f64 {
    if min == max {
        0.5
    } else {
        ((v - min) / (max - min)).clamp(0.0, 1.0)
    }
}

/// Renders the scene per pixel: for every pixel of every frame, find the
/// nearest visible point whose `k x k` block covers it (larger index wins
/// depth ties) and evaluate that point's 19 stream channels directly.
pub fn oracle_render(scene: &OracleScene) -> Vec<f32> {
    let (t_count, n) = (scene.frame_count, scene.point_count);
    let (h, w) = (scene.height as usize, scene.width as usize);
    assert_eq!(scene.positions.len(), t_count * n);
    assert_eq!(scene.visibility.len(), t_count * n);
    assert_eq!(scene.intrinsics.len(), t_count);
    let rad = (scene.pointsize / 2) as i64;

    // Reference-frame bounds over (x, y, 1/(z+eps)) of frame-0 visible
    // points; global raw-depth bounds over all visible points.
    let mut xb = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yb = xb;
    let mut wb = xb;
    let mut zb = xb;
    for t in 0..t_count {
        for i in 0..n {
            if !scene.visibility[t * n + i] {
                continue;
            }
            let p = scene.positions[t * n + i];
            zb.0 = zb.0.min(p[2]);
            zb.1 = zb.1.max(p[2]);
            if t == 0 {
                xb.0 = xb.0.min(p[0]);
                xb.1 = xb.1.max(p[0]);
                yb.0 = yb.0.min(p[1]);
                yb.1 = yb.1.max(p[1]);
                let inv = 1.0 / (p[2] + scene.epsilon);
                wb.0 = wb.0.min(inv);
                wb.1 = wb.1.max(inv);
            }
        }
    }

    // Static per-point channels from frame-0 positions.
    let pi = std::f64::consts::PI;
    let mut statics = vec![[0f64; 15]; n];
    for (s, p0) in statics.iter_mut().zip(&scene.positions[..n]) {
        let nx = oracle_norm(p0[0], xb.0, xb.1);
        let ny = oracle_norm(p0[1], yb.0, yb.1);
        let nz = oracle_norm(1.0 / (p0[2] + scene.epsilon), wb.0, wb.1);
        s[0] = nx;
        s[1] = ny;
        s[2] = nz;
        // Stream order groups the cosine features by level.
        for (level, &factor) in [1.0, 2.0, 4.0, 8.0].iter().enumerate() {
            for (coord, &v) in [nx, ny, nz].iter().enumerate() {
                let raw = (factor * pi * v).cos();
                s[3 + level * 3 + coord] = (raw + 1.0) / 2.0;
            }
        }
    }

    let mut out = vec![0f32; t_count * h * w * 19];
    for t in 0..t_count {
        let (fx, fy, cx, cy) = scene.intrinsics[t];
        // Projected pixel of every visible, in-front, on-canvas point.
        let mut hits: Vec<Option<(i64, i64, f64)>> = vec![None; n];
        for (i, hit) in hits.iter_mut().enumerate() {
            if !scene.visibility[t * n + i] {
                continue;
            }
            let p = scene.positions[t * n + i];
            if p[2] <= 0.0 {
                continue;
            }
            let u = (fx * p[0] / p[2] + cx).round();
            let v = (fy * p[1] / p[2] + cy).round();
            if u >= 0.0 && u < w as f64 && v >= 0.0 && v < h as f64 {
                *hit = Some((u as i64, v as i64, p[2]));
            }
        }
        for row in 0..h {
            for col in 0..w {
                let mut winner: Option<(f64, usize)> = None;
                for (i, hit) in hits.iter().enumerate() {
                    let Some((u, v, z)) = *hit else { continue };
                    if (col as i64 - u).abs() <= rad && (row as i64 - v).abs() <= rad {
                        let better = match winner {
                            None => true,
                            Some((bz, bi)) => z < bz || (z == bz && i > bi),
                        };
                        if better {
                            winner = Some((z, i));
                        }
                    }
                }
                let Some((z, i)) = winner else { continue };
                let base = ((t * h + row) * w + col) * 19;
                for c in 0..15 {
                    out[base + c] = statics[i][c] as f32;
                }
                let znorm = oracle_norm(z, zb.0, zb.1);
                let rgb = oracle_colormap(znorm);
                out[base + 15] = rgb[0] as f32;
                out[base + 16] = rgb[1] as f32;
                out[base + 17] = rgb[2] as f32;
                let m = scene.edit_mask.map(|m| m[t * n + i]).unwrap_or(false);
                out[base + 18] = if m { 1.0 } else { 0.0 };
            }
        }
    }
    out
}

/// SplitMix64: a tiny deterministic generator so synthetic scenes are
/// reproducible across platforms without pulling a dependency into the lib.
#[derive(Debug, Clone)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

/// An owned randomized rendering instance.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub frame_count: usize,
    pub point_count: usize,
    pub positions: Vec<[f64; 3]>,
    pub visibility: Vec<bool>,
    pub intrinsics: Vec<(f64, f64, f64, f64)>,
    pub edit_mask: Vec<bool>,
    pub epsilon: f64,
    pub pointsize: u32,
    pub height: u32,
    pub width: u32,
}

impl SyntheticScene {
    pub fn as_oracle_scene(&self) -> OracleScene<'_> {
        OracleScene {
            frame_count: self.frame_count,
            point_count: self.point_count,
            positions: &self.positions,
            visibility: &self.visibility,
            intrinsics: &self.intrinsics,
            edit_mask: Some(&self.edit_mask),
            epsilon: self.epsilon,
            pointsize: self.pointsize,
            height: self.height,
            width: self.width,
        }
    }
}

/// Draws a small randomized scene: canvas up to 32x32, up to 64 points over
/// up to 5 frames, pointsize 1 or 3. Roughly a third of the instances
/// quantize depths and pixel positions to force same-pixel depth contests
/// and exact ties; off-canvas and behind-camera points occur naturally.
pub fn random_scene(seed: u64) -> SyntheticScene {
    let mut rng = SplitMix64(seed);
    let width = 4 + rng.below(29) as u32;
    let height = 4 + rng.below(29) as u32;
    let frame_count = 1 + rng.below(5) as usize;
    let point_count = 1 + rng.below(64) as usize;
    let pointsize = if rng.chance(0.5) { 1 } else { 3 };
    let contested = rng.chance(0.35);

    let mut intrinsics = Vec::with_capacity(frame_count);
    for _ in 0..frame_count {
        let fx = rng.range(2.0, 40.0);
        let fy = rng.range(2.0, 40.0);
        let cx = rng.range(0.0, (width - 1) as f64);
        let cy = rng.range(0.0, (height - 1) as f64);
        intrinsics.push((fx, fy, cx, cy));
    }

    let total = frame_count * point_count;
    let mut positions = Vec::with_capacity(total);
    let mut visibility = Vec::with_capacity(total);
    let mut edit_mask = Vec::with_capacity(total);
    let depth_levels = [0.5, 1.0, 2.0, 4.0];
    for frame_intr in &intrinsics {
        for _ in 0..point_count {
            let z = if contested {
                depth_levels[rng.below(4) as usize]
            } else if rng.chance(0.05) {
                // Marginally behind the camera but above -epsilon: legal to
                // store, never projects.
                -rng.range(0.0, 5.0e-7)
            } else {
                rng.range(0.2, 8.0)
            };
            let (x, y) = if contested {
                // Snap to pixel centers so several points share a pixel.
                let (fx, fy, cx, cy) = *frame_intr;
                let u = rng.below(width as u64) as f64;
                let v = rng.below(height as u64) as f64;
                ((u - cx) * z / fx, (v - cy) * z / fy)
            } else {
                (rng.range(-2.0, 2.0), rng.range(-2.0, 2.0))
            };
            positions.push([x, y, z]);
            visibility.push(rng.chance(0.85));
            edit_mask.push(rng.chance(0.25));
        }
    }
    // The reference frame must see at least one point.
    visibility[0] = true;

    SyntheticScene {
        frame_count,
        point_count,
        positions,
        visibility,
        intrinsics,
        edit_mask,
        epsilon: 1e-6,
        pointsize,
        height,
        width,
    }
}

/// Runs the production pipeline on a synthetic scene (identity poses, the
/// scene's per-frame intrinsics) and returns the raw raster values. This is
/// the path under test; compare it against [`oracle_render`].
pub fn pipeline_render(scene: &SyntheticScene) -> Result<Vec<f32>> {
    let set = PointTrajectorySet::new(
        scene.frame_count,
        scene.point_count,
        scene.positions.clone(),
        scene.visibility.clone(),
        None,
    )?;
    let frames = scene
        .intrinsics
        .iter()
        .map(|&(fx, fy, cx, cy)| {
            Ok((
                CameraIntrinsics::new(fx, fy, cx, cy, scene.width, scene.height)?,
                CameraPose::identity(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let cams = CameraTrajectory::new(frames)?;
    let stats = compute_norm_stats(&set, 0, scene.epsilon)?;
    let mut mask = EditMask::zeros(scene.frame_count, scene.point_count);
    for t in 0..scene.frame_count {
        for i in 0..scene.point_count {
            mask.set(t, i, scene.edit_mask[t * scene.point_count + i]);
        }
    }
    let cfg = SplatConfig::new(scene.pointsize, scene.height, scene.width)?;
    let mv = render_motion_video(&set, &stats, &cams, Some(&mask), &cfg, &SpectralColormap::new())?;
    Ok(mv.data().to_vec())
}
