//! Depth-sorted splatting of attributed points into the 19-channel motion
//! video.
//!
//! Rendering follows the painter's algorithm: per frame, visible points are
//! projected through the pinhole model, sorted far-to-near, and each paints
//! its attribute vector over a `k x k` pixel block, so nearer points
//! overwrite farther ones. Depth ties at a pixel are broken by the larger
//! point index. Pixels no point reaches stay exactly zero in all channels.
//!
//! Frames are independent and render in parallel; the output is bitwise
//! deterministic for any thread count.
//!
//! # FXMV raster format (little-endian)
//!
//! magic `"FXMV"`, version u32 = 1, T u32, H u32, W u32, C u32 = 19,
//! density f32, then `T*H*W*19` f32 values in (frame, row, col, channel)
//! order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::camera::{CameraIntrinsics, CameraTrajectory};
use crate::edit::EditMask;
use crate::encoding::{
    encode_depth, encode_freq, AttributeVector, SpectralColormap, ATTRIBUTE_DIM, STREAM_NAMES,
};
use crate::error::{Error, Result};
use crate::trajectory::{normalize_initial, NormStats, PointTrajectorySet};

/// Splat size and canvas for rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplatConfig {
    pointsize: u32,
    height: u32,
    width: u32,
}

/// Default splat side length in pixels.
pub const DEFAULT_POINTSIZE: u32 = 3;
/// Default canvas, width x height.
pub const DEFAULT_CANVAS: (u32, u32) = (768, 512);

impl SplatConfig {
    /// `pointsize` must be odd so blocks center on the projected pixel.
    pub fn new(pointsize: u32, height: u32, width: u32) -> Result<Self> {
        if pointsize == 0 || pointsize.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "pointsize must be a positive odd integer, got {pointsize}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::Parameter(format!("canvas must be nonzero, got {width}x{height}")));
        }
        Ok(Self { pointsize, height, width })
    }

    pub fn pointsize(&self) -> u32 {
        self.pointsize
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }
}

/// A point projected onto the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    /// Pixel column.
    pub u: u32,
    /// Pixel row.
    pub v: u32,
    /// Camera-space depth.
    pub z: f64,
}

/// Pinhole projection to integer pixel coordinates,
/// `u = fx*x/z + cx`, `v = fy*y/z + cy`, rounded half away from zero.
///
/// Returns `None` for points behind the camera (`z <= 0`) or outside the
/// `(height, width)` canvas; off-screen is a value, not an error.
#[inline]
pub fn project_2d(
    intr: &CameraIntrinsics,
    point: [f64; 3],
    canvas_height: u32,
    canvas_width: u32,
) -> Option<ProjectedPoint> {
    let z = point[2];
    if z <= 0.0 {
        return None;
    }
    let u = (intr.fx * point[0] / z + intr.cx).round();
    let v = (intr.fy * point[1] / z + intr.cy).round();
    if u >= 0.0 && u < canvas_width as f64 && v >= 0.0 && v < canvas_height as f64 {
        Some(ProjectedPoint { u: u as u32, v: v as u32, z })
    } else {
        None
    }
}

/// The T x H x W x 19 motion-video raster.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionVideo {
    frame_count: usize,
    height: u32,
    width: u32,
    density: f32,
    /// `T*H*W*19` values in `[0, 1]`, channel innermost.
    data: Vec<f32>,
}

impl MotionVideo {
    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn density(&self) -> f32 {
        self.density
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    fn frame_len(&self) -> usize {
        self.height as usize * self.width as usize * ATTRIBUTE_DIM
    }

    pub fn frame_data(&self, frame: usize) -> &[f32] {
        let len = self.frame_len();
        &self.data[frame * len..(frame + 1) * len]
    }

    #[inline]
    pub fn value(&self, frame: usize, row: u32, col: u32, channel: usize) -> f32 {
        let w = self.width as usize;
        let idx = ((frame * self.height as usize + row as usize) * w + col as usize)
            * ATTRIBUTE_DIM
            + channel;
        self.data[idx]
    }
}

struct Splat {
    u: u32,
    v: u32,
    z: f64,
    idx: usize,
}

fn paint_frame(
    buf: &mut [f32],
    points: &[[f64; 3]],
    attrs: &[AttributeVector],
    vis: &[bool],
    intr: &CameraIntrinsics,
    cfg: &SplatConfig,
) {
    let mut splats: Vec<Splat> = Vec::with_capacity(points.len());
    for (idx, (p, &visible)) in points.iter().zip(vis).enumerate() {
        if !visible {
            continue;
        }
        if let Some(hit) = project_2d(intr, *p, cfg.height, cfg.width) {
            splats.push(Splat { u: hit.u, v: hit.v, z: hit.z, idx });
        }
    }
    // Far to near; equal depths paint in index order so the larger index wins.
    splats.sort_unstable_by(|a, b| b.z.total_cmp(&a.z).then(a.idx.cmp(&b.idx)));

    let rad = (cfg.pointsize / 2) as i64;
    let (h, w) = (cfg.height as i64, cfg.width as i64);
    for s in &splats {
        let chan = attrs[s.idx].stream_channels().map(|c| c as f32);
        let r0 = (s.v as i64 - rad).max(0);
        let r1 = (s.v as i64 + rad).min(h - 1);
        let c0 = (s.u as i64 - rad).max(0);
        let c1 = (s.u as i64 + rad).min(w - 1);
        for r in r0..=r1 {
            let row = (r * w) as usize * ATTRIBUTE_DIM;
            for c in c0..=c1 {
                let at = row + c as usize * ATTRIBUTE_DIM;
                buf[at..at + ATTRIBUTE_DIM].copy_from_slice(&chan);
            }
        }
    }
}

/// Renders one frame into a fresh `H*W*19` buffer in raster stream order.
///
/// `points`, `attrs`, and `vis` must be aligned per point.
pub fn render_frame(
    points: &[[f64; 3]],
    attrs: &[AttributeVector],
    vis: &[bool],
    intr: &CameraIntrinsics,
    cfg: &SplatConfig,
) -> Result<Vec<f32>> {
    if points.len() != attrs.len() || points.len() != vis.len() {
        return Err(Error::InputMismatch(format!(
            "points/attrs/visibility lengths differ: {}/{}/{}",
            points.len(),
            attrs.len(),
            vis.len()
        )));
    }
    let mut buf = vec![0f32; cfg.height as usize * cfg.width as usize * ATTRIBUTE_DIM];
    paint_frame(&mut buf, points, attrs, vis, intr, cfg);
    Ok(buf)
}

/// Renders the full motion video for a trajectory set.
///
/// Per frame, each point is encoded as identity and frequency features of
/// its normalized frame-0 position, the Spectral color of its current depth,
/// and its edit-mask bit, then splatted with [`render_frame`] semantics.
/// Positions are taken to be in each frame's camera coordinates already;
/// `cams` contributes the per-frame intrinsics. `edit_mask = None` renders a
/// zero mask channel.
///
/// A point whose frame-0 position is non-finite (possible when it is
/// invisible at frame 0) has no well-defined encoding and is skipped in
/// every frame.
pub fn render_motion_video(
    set: &PointTrajectorySet,
    stats: &NormStats,
    cams: &CameraTrajectory,
    edit_mask: Option<&EditMask>,
    cfg: &SplatConfig,
    cmap: &SpectralColormap,
) -> Result<MotionVideo> {
    if set.frame_count() != cams.frame_count() {
        return Err(Error::InputMismatch(format!(
            "frame count mismatch: trajectory set has {} frames, camera trajectory has {}",
            set.frame_count(),
            cams.frame_count()
        )));
    }
    if let Some(mask) = edit_mask {
        if mask.frame_count() != set.frame_count() || mask.point_count() != set.point_count() {
            return Err(Error::InputMismatch(format!(
                "edit mask shape {}x{} does not match trajectory set {}x{}",
                mask.frame_count(),
                mask.point_count(),
                set.frame_count(),
                set.point_count()
            )));
        }
    }

    let n = set.point_count();
    // Identity and frequency features depend only on frame-0 coordinates.
    let mut static_identity = vec![[0f64; 3]; n];
    let mut static_freq = vec![[0f64; 12]; n];
    let mut renderable = vec![true; n];
    for i in 0..n {
        let p0 = set.position(0, i);
        let norm = normalize_initial(p0, stats);
        if norm.iter().any(|c| !c.is_finite()) {
            renderable[i] = false;
            continue;
        }
        static_identity[i] = norm;
        static_freq[i] = encode_freq(norm);
    }

    let frame_len = cfg.height as usize * cfg.width as usize * ATTRIBUTE_DIM;
    let mut data = vec![0f32; set.frame_count() * frame_len];
    let zero_attr = AttributeVector::assemble(&[0.0; 3], &[0.0; 12], &[0.0; 3], 0.0)?;

    data.par_chunks_mut(frame_len).enumerate().try_for_each(|(t, buf)| -> Result<()> {
        let points = set.frame_positions(t);
        let vis_in = set.frame_visibility(t);
        let mut attrs = vec![zero_attr; n];
        let mut vis = vec![false; n];
        for i in 0..n {
            if !vis_in[i] || !renderable[i] {
                continue;
            }
            let depth_rgb = encode_depth(points[i][2], stats, cmap);
            let m = match edit_mask {
                Some(mask) if mask.get(t, i) => 1.0,
                _ => 0.0,
            };
            attrs[i] =
                AttributeVector::assemble(&static_identity[i], &static_freq[i], &depth_rgb, m)?;
            vis[i] = true;
        }
        paint_frame(buf, points, &attrs, &vis, cams.intrinsics(t), cfg);
        Ok(())
    })?;

    Ok(MotionVideo {
        frame_count: set.frame_count(),
        height: cfg.height,
        width: cfg.width,
        density: set.density(),
        data,
    })
}

const FXMV_MAGIC: &[u8; 4] = b"FXMV";
const FXMV_VERSION: u32 = 1;
const CHUNK_FLOATS: usize = 1 << 18;

/// Writes the raster as a single FXMV file.
pub fn save_motion_video(mv: &MotionVideo, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        w.write_all(FXMV_MAGIC)?;
        w.write_all(&FXMV_VERSION.to_le_bytes())?;
        w.write_all(&(mv.frame_count as u32).to_le_bytes())?;
        w.write_all(&mv.height.to_le_bytes())?;
        w.write_all(&mv.width.to_le_bytes())?;
        w.write_all(&(ATTRIBUTE_DIM as u32).to_le_bytes())?;
        w.write_all(&mv.density.to_le_bytes())?;
        let mut buf = Vec::with_capacity(CHUNK_FLOATS * 4);
        for chunk in mv.data.chunks(CHUNK_FLOATS) {
            buf.clear();
            for v in chunk {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Reads an FXMV file.
pub fn load_motion_video(path: impl AsRef<Path>) -> Result<MotionVideo> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format {
        path: path.into(),
        expected: "FXMV",
        detail: "file too short for magic".into(),
    })?;
    if &magic != FXMV_MAGIC {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXMV",
            detail: format!("bad magic {magic:?}"),
        });
    }
    let mut u32buf = [0u8; 4];
    let mut next_u32 = |r: &mut BufReader<File>, what: &str| -> Result<u32> {
        r.read_exact(&mut u32buf).map_err(|_| Error::CorruptFile {
            path: path.into(),
            detail: format!("unexpected end of file while reading {what}"),
        })?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = next_u32(&mut r, "version")?;
    if version != FXMV_VERSION {
        return Err(Error::Format {
            path: path.into(),
            expected: "FXMV",
            detail: format!("unsupported version {version}"),
        });
    }
    let t = next_u32(&mut r, "frame count")? as usize;
    let h = next_u32(&mut r, "height")?;
    let w = next_u32(&mut r, "width")?;
    let c = next_u32(&mut r, "channel count")? as usize;
    if c != ATTRIBUTE_DIM {
        return Err(Error::CorruptFile {
            path: path.into(),
            detail: format!("channel count {c} != {ATTRIBUTE_DIM}"),
        });
    }
    let mut f32buf = [0u8; 4];
    r.read_exact(&mut f32buf).map_err(|_| Error::CorruptFile {
        path: path.into(),
        detail: "unexpected end of file while reading density".into(),
    })?;
    let density = f32::from_le_bytes(f32buf);

    let total = t * h as usize * w as usize * ATTRIBUTE_DIM;
    let mut data = vec![0f32; total];
    let mut bytes = vec![0u8; CHUNK_FLOATS * 4];
    let mut filled = 0usize;
    while filled < total {
        let want = (total - filled).min(CHUNK_FLOATS);
        r.read_exact(&mut bytes[..want * 4]).map_err(|_| Error::CorruptFile {
            path: path.into(),
            detail: format!("payload shorter than T*H*W*C = {total} floats"),
        })?;
        for (dst, src) in data[filled..filled + want].iter_mut().zip(bytes.chunks_exact(4)) {
            *dst = f32::from_le_bytes(src.try_into().unwrap());
        }
        filled += want;
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::CorruptFile {
            path: path.into(),
            detail: "trailing bytes after raster payload".into(),
        });
    }
    Ok(MotionVideo { frame_count: t, height: h, width: w, density, data })
}

/// Byte value of one raster sample in an 8-bit preview: `v * 255`, rounded
/// half up.
#[inline]
fn preview_byte(v: f32) -> u8 {
    (v * 255.0).round() as u8
}

/// Writes per-stream 8-bit PNG previews, one image per (stream, frame):
/// RGB for the six 3-channel streams, grayscale for the mask, named
/// `<stream>_<frame:04>.png`.
pub fn write_previews(mv: &MotionVideo, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (h, w) = (mv.height, mv.width);
    let px = h as usize * w as usize;
    (0..mv.frame_count).into_par_iter().try_for_each(|t| -> Result<()> {
        let frame = mv.frame_data(t);
        for (s, name) in STREAM_NAMES.iter().enumerate() {
            let path = dir.join(format!("{name}_{t:04}.png"));
            if s < 6 {
                let mut rgb = vec![0u8; px * 3];
                for p in 0..px {
                    for c in 0..3 {
                        rgb[p * 3 + c] = preview_byte(frame[p * ATTRIBUTE_DIM + s * 3 + c]);
                    }
                }
                let img = image::RgbImage::from_raw(w, h, rgb).expect("sized buffer");
                img.save(&path).map_err(|e| match e {
                    image::ImageError::IoError(io) => Error::io(&path, io),
                    other => Error::Validation(format!("png encode failed: {other}")),
                })?;
            } else {
                let mut gray = vec![0u8; px];
                for p in 0..px {
                    gray[p] = preview_byte(frame[p * ATTRIBUTE_DIM + 18]);
                }
                let img = image::GrayImage::from_raw(w, h, gray).expect("sized buffer");
                img.save(&path).map_err(|e| match e {
                    image::ImageError::IoError(io) => Error::io(&path, io),
                    other => Error::Validation(format!("png encode failed: {other}")),
                })?;
            }
        }
        Ok(())
    })
}

/// Default FXMV filename used by [`export_motion_video`].
pub const FXMV_FILENAME: &str = "motion_video.fxmv";

/// Exports the raster into a directory: the FXMV tensor plus per-stream PNG
/// previews for every frame.
pub fn export_motion_video(mv: &MotionVideo, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_motion_video(mv, dir.join(FXMV_FILENAME))?;
    write_previews(mv, dir)
}
