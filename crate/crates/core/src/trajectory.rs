//! Dynamic point-trajectory storage, FXTR file I/O, density downsampling, and
//! the normalization statistics behind the positional encodings.
//!
//! A [`PointTrajectorySet`] holds per-frame camera-space positions and
//! visibility of `N` tracked points over `T` frames. Positions are kept as
//! `f64` in memory; the on-disk payload is `f32`.
//!
//! # FXTR file format (little-endian)
//!
//! ```text
//! magic   4 bytes  "FXTR"
//! version u32      1
//! T       u32      frame count
//! N       u32      point count
//! grid    u8       0 or 1
//! grid_w  u32      present iff grid == 1
//! grid_h  u32      present iff grid == 1
//! pos     T*N*3 f32  frame-major, point-minor, xyz innermost
//! vis     T*N   u8   0 = invisible, nonzero = visible
//! ```
//!
//! Trailing bytes after the visibility block are an error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Per-frame 3D positions and visibility of `N` tracked points over `T`
/// frames, in the camera coordinates of each frame (`z > 0` is in front of
/// the camera).
///
/// When the points originate from a regular image grid, `source_grid` records
/// `(grid_width, grid_height)`; point `i` then sits at grid row
/// `i / grid_width`, column `i % grid_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTrajectorySet {
    frame_count: usize,
    point_count: usize,
    /// `T*N` positions, frame-major.
    positions: Vec<[f64; 3]>,
    /// `T*N` visibility flags, frame-major.
    visibility: Vec<bool>,
    source_grid: Option<(u32, u32)>,
    /// Fraction of full-density points retained, in `(0, 1]`.
    density: f32,
}

impl PointTrajectorySet {
    /// Builds a set, validating shapes and that every visible position is
    /// finite.
    pub fn new(
        frame_count: usize,
        point_count: usize,
        positions: Vec<[f64; 3]>,
        visibility: Vec<bool>,
        source_grid: Option<(u32, u32)>,
    ) -> Result<Self> {
        if frame_count == 0 || point_count == 0 {
            return Err(Error::Validation(format!(
                "trajectory set must have T >= 1 and N >= 1, got T={frame_count}, N={point_count}"
            )));
        }
        let expected = frame_count * point_count;
        if positions.len() != expected || visibility.len() != expected {
            return Err(Error::Validation(format!(
                "positions ({}) and visibility ({}) must both have T*N = {} entries",
                positions.len(),
                visibility.len(),
                expected
            )));
        }
        if let Some((gw, gh)) = source_grid {
            if gw as usize * gh as usize != point_count {
                return Err(Error::Validation(format!(
                    "source grid {gw}x{gh} does not cover N = {point_count} points"
                )));
            }
        }
        let set = Self {
            frame_count,
            point_count,
            positions,
            visibility,
            source_grid,
            density: 1.0,
        };
        set.check_visible_finite()?;
        Ok(set)
    }

    fn check_visible_finite(&self) -> Result<()> {
        for t in 0..self.frame_count {
            for i in 0..self.point_count {
                if self.visible(t, i) {
                    let p = self.position(t, i);
                    if !p.iter().all(|c| c.is_finite()) {
                        return Err(Error::Validation(format!(
                            "non-finite position for visible point {i} at frame {t}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn source_grid(&self) -> Option<(u32, u32)> {
        self.source_grid
    }

    pub fn density(&self) -> f32 {
        self.density
    }

    pub fn with_density(mut self, density: f32) -> Self {
        self.density = density;
        self
    }

    #[inline]
    pub fn position(&self, frame: usize, point: usize) -> [f64; 3] {
        self.positions[frame * self.point_count + point]
    }

    #[inline]
    pub fn visible(&self, frame: usize, point: usize) -> bool {
        self.visibility[frame * self.point_count + point]
    }

    /// All positions of one frame, point order.
    pub fn frame_positions(&self, frame: usize) -> &[[f64; 3]] {
        let start = frame * self.point_count;
        &self.positions[start..start + self.point_count]
    }

    /// All visibility flags of one frame, point order.
    pub fn frame_visibility(&self, frame: usize) -> &[bool] {
        let start = frame * self.point_count;
        &self.visibility[start..start + self.point_count]
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn visibility(&self) -> &[bool] {
        &self.visibility
    }

    /// Replaces the position of one (frame, point) entry. Shape is preserved;
    /// the caller is responsible for keeping visible positions finite.
    pub(crate) fn set_position(&mut self, frame: usize, point: usize, p: [f64; 3]) {
        self.positions[frame * self.point_count + point] = p;
    }

    #[cfg(test)]
    pub(crate) fn set_visible(&mut self, frame: usize, point: usize, v: bool) {
        self.visibility[frame * self.point_count + point] = v;
    }
}

/// Density downsampling request: keep roughly one point per `stride x stride`
/// cell, for a retained fraction `d = 1/stride^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DownsampleSpec {
    stride: u32,
}

impl DownsampleSpec {
    pub fn new(stride: u32) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Parameter("downsample stride must be >= 1".into()));
        }
        Ok(Self { stride })
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    /// Retained point-density fraction `d = 1/stride^2`.
    pub fn density(&self) -> f32 {
        (1.0 / (self.stride as f64 * self.stride as f64)) as f32
    }
}

/// Reduces point density.
///
/// Gridded sets keep the points at grid indices `(row, col)` with
/// `row % stride == 0 && col % stride == 0`; ungridded sets keep every
/// `stride^2`-th point by index. Trajectories of kept points are copied
/// verbatim, and the output density is the input density scaled by
/// `1/stride^2`.
pub fn downsample(set: &PointTrajectorySet, spec: DownsampleSpec) -> Result<PointTrajectorySet> {
    let stride = spec.stride as usize;
    let kept: Vec<usize>;
    let new_grid: Option<(u32, u32)>;

    match set.source_grid {
        Some((gw, gh)) => {
            if spec.stride > gw && spec.stride > gh {
                return Err(Error::EmptySelection(format!(
                    "stride {} exceeds both grid dimensions {}x{}",
                    spec.stride, gw, gh
                )));
            }
            let (gw, gh) = (gw as usize, gh as usize);
            kept = (0..set.point_count)
                .filter(|i| (i / gw) % stride == 0 && (i % gw) % stride == 0)
                .collect();
            new_grid = Some((gw.div_ceil(stride) as u32, gh.div_ceil(stride) as u32));
        }
        None => {
            if stride >= set.point_count {
                return Err(Error::EmptySelection(format!(
                    "stride {} >= point count {}",
                    spec.stride, set.point_count
                )));
            }
            let step = stride * stride;
            kept = (0..set.point_count).step_by(step).collect();
            new_grid = None;
        }
    }

    let n_new = kept.len();
    let mut positions = Vec::with_capacity(set.frame_count * n_new);
    let mut visibility = Vec::with_capacity(set.frame_count * n_new);
    for t in 0..set.frame_count {
        let base = t * set.point_count;
        for &i in &kept {
            positions.push(set.positions[base + i]);
            visibility.push(set.visibility[base + i]);
        }
    }

    Ok(PointTrajectorySet {
        frame_count: set.frame_count,
        point_count: n_new,
        positions,
        visibility,
        source_grid: new_grid,
        density: set.density * spec.density(),
    })
}

/// Inclusive bounds of one normalization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBounds {
    pub min: f64,
    pub max: f64,
}

impl AxisBounds {
    /// An axis whose min and max coincide carries no positional information.
    pub fn is_degenerate(&self) -> bool {
        self.min == self.max
    }

    /// Maps `v` into `[0, 1]`, clamping values outside the bounds. Degenerate
    /// axes map everything to 0.5.
    #[inline]
    pub fn normalize(&self, v: f64) -> f64 {
        if self.is_degenerate() {
            0.5
        } else {
            ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        }
    }
}

/// Normalization statistics for the positional encodings.
///
/// `x`, `y`, `inv_depth` bound the reference frame's visible points in
/// `(x, y, 1/(z+epsilon))`; `depth` bounds the raw `z` of every visible point
/// across all frames, so the depth colormap stays comparable over time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    pub x: AxisBounds,
    pub y: AxisBounds,
    pub inv_depth: AxisBounds,
    pub depth: AxisBounds,
    pub epsilon: f64,
}

/// Default guard constant for the inverse-depth term, in scene depth units.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Computes normalization bounds from the reference frame (for `x`, `y`,
/// inverse depth) and from all frames (for raw depth).
pub fn compute_norm_stats(
    set: &PointTrajectorySet,
    reference_frame: usize,
    epsilon: f64,
) -> Result<NormStats> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Parameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    if reference_frame >= set.frame_count() {
        return Err(Error::Parameter(format!(
            "reference frame {reference_frame} out of range for T = {}",
            set.frame_count()
        )));
    }

    let mut x = AxisBounds { min: f64::INFINITY, max: f64::NEG_INFINITY };
    let mut y = x;
    let mut w = x;
    let mut z = x;
    let mut any_ref = false;
    let mut any = false;

    for t in 0..set.frame_count() {
        for i in 0..set.point_count() {
            if !set.visible(t, i) {
                continue;
            }
            let p = set.position(t, i);
            if p[2] <= -epsilon {
                return Err(Error::InverseDepthSingularity { frame: t, point: i, z: p[2] });
            }
            any = true;
            z.min = z.min.min(p[2]);
            z.max = z.max.max(p[2]);
            if t == reference_frame {
                any_ref = true;
                x.min = x.min.min(p[0]);
                x.max = x.max.max(p[0]);
                y.min = y.min.min(p[1]);
                y.max = y.max.max(p[1]);
                let inv = 1.0 / (p[2] + epsilon);
                w.min = w.min.min(inv);
                w.max = w.max.max(inv);
            }
        }
    }

    if !any_ref {
        return Err(Error::EmptyReference { frame: reference_frame });
    }
    debug_assert!(any);
    Ok(NormStats { x, y, inv_depth: w, depth: z, epsilon })
}

/// Maps a reference-frame position to its normalized `[0, 1]^3` triple
/// `(x', y', z')`, where `z'` is normalized inverse depth `1/(z+epsilon)`.
///
/// Components outside the reference bounds clamp to the interval endpoints.
/// Requires `z > -epsilon`; non-finite inputs propagate NaN.
#[inline]
pub fn normalize_initial(point: [f64; 3], stats: &NormStats) -> [f64; 3] {
    let inv = 1.0 / (point[2] + stats.epsilon);
    [
        stats.x.normalize(point[0]),
        stats.y.normalize(point[1]),
        stats.inv_depth.normalize(inv),
    ]
}

const FXTR_MAGIC: &[u8; 4] = b"FXTR";
const FXTR_VERSION: u32 = 1;

/// Loads a trajectory set from an FXTR file.
pub fn load_trajectories(path: impl AsRef<Path>) -> Result<PointTrajectorySet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path, "magic")?;
    if &magic != FXTR_MAGIC {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXTR",
            detail: format!("bad magic {magic:?}"),
        });
    }
    let version = read_u32(&mut r, path, "version")?;
    if version != FXTR_VERSION {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXTR",
            detail: format!("unsupported version {version}"),
        });
    }
    let t = read_u32(&mut r, path, "frame count")? as usize;
    let n = read_u32(&mut r, path, "point count")? as usize;
    if t == 0 || n == 0 {
        return Err(Error::CorruptFile {
            path: path.into(),
            detail: format!("header declares T={t}, N={n}; both must be >= 1"),
        });
    }
    let mut flag = [0u8; 1];
    read_exact(&mut r, &mut flag, path, "grid flag")?;
    let source_grid = match flag[0] {
        0 => None,
        1 => {
            let gw = read_u32(&mut r, path, "grid width")?;
            let gh = read_u32(&mut r, path, "grid height")?;
            Some((gw, gh))
        }
        other => {
            return Err(Error::CorruptFile {
                path: path.into(),
                detail: format!("grid flag must be 0 or 1, got {other}"),
            });
        }
    };

    let mut positions = vec![[0f64; 3]; t * n];
    let mut buf = vec![0u8; t * n * 12];
    r.read_exact(&mut buf).map_err(|_| Error::CorruptFile {
        path: path.into(),
        detail: format!("position payload shorter than T*N*3 = {} floats", t * n * 3),
    })?;
    for (p, c) in positions.iter_mut().zip(buf.chunks_exact(12)) {
        *p = [
            f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64,
            f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64,
            f32::from_le_bytes(c[8..12].try_into().unwrap()) as f64,
        ];
    }

    let mut vis_bytes = vec![0u8; t * n];
    r.read_exact(&mut vis_bytes).map_err(|_| Error::CorruptFile {
        path: path.into(),
        detail: format!("visibility payload shorter than T*N = {} bytes", t * n),
    })?;
    let visibility: Vec<bool> = vis_bytes.iter().map(|&b| b != 0).collect();

    let mut probe = [0u8; 1];
    if r.read(&mut probe).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::CorruptFile {
            path: path.into(),
            detail: "trailing bytes after visibility block".into(),
        });
    }

    let grid_ok = match source_grid {
        Some((gw, gh)) => gw as usize * gh as usize == n,
        None => true,
    };
    if !grid_ok {
        let (gw, gh) = source_grid.unwrap();
        return Err(Error::CorruptFile {
            path: path.into(),
            detail: format!("grid {gw}x{gh} does not cover N = {n} points"),
        });
    }

    PointTrajectorySet::new(t, n, positions, visibility, source_grid)
}

/// Writes a trajectory set as FXTR. Positions are stored as `f32`.
pub fn save_trajectories(set: &PointTrajectorySet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        w.write_all(FXTR_MAGIC)?;
        w.write_all(&FXTR_VERSION.to_le_bytes())?;
        w.write_all(&(set.frame_count as u32).to_le_bytes())?;
        w.write_all(&(set.point_count as u32).to_le_bytes())?;
        match set.source_grid {
            Some((gw, gh)) => {
                w.write_all(&[1u8])?;
                w.write_all(&gw.to_le_bytes())?;
                w.write_all(&gh.to_le_bytes())?;
            }
            None => w.write_all(&[0u8])?,
        }
        let mut buf = Vec::with_capacity(set.positions.len() * 12);
        for p in &set.positions {
            for c in p {
                buf.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        let vis: Vec<u8> = set.visibility.iter().map(|&v| v as u8).collect();
        w.write_all(&vis)?;
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|_| Error::CorruptFile {
        path: path.into(),
        detail: format!("unexpected end of file while reading {what}"),
    })
}

fn read_u32(r: &mut impl Read, path: &Path, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, path, what)?;
    Ok(u32::from_le_bytes(buf))
}
