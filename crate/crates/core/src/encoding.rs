//! Per-point control attributes: identity encoding, multi-frequency cosine
//! encoding, depth colormap encoding, and the edit-mask bit, concatenated
//! into a 19-dimensional attribute vector.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::trajectory::NormStats;

/// Total attribute dimension: 3 identity + 12 frequency + 3 depth + 1 mask.
pub const ATTRIBUTE_DIM: usize = 19;

/// Offsets of the components inside the attribute vector.
pub const IDENTITY_OFFSET: usize = 0;
pub const FREQ_OFFSET: usize = 3;
pub const DEPTH_OFFSET: usize = 15;
pub const MASK_OFFSET: usize = 18;

/// 4-level cosine features `cos(2^l * pi * v)` for `l = 0..4`, raw in `[-1, 1]`.
#[inline]
pub fn gamma(v: f64) -> [f64; 4] {
    [
        (1.0 * PI * v).cos(),
        (2.0 * PI * v).cos(),
        (4.0 * PI * v).cos(),
        (8.0 * PI * v).cos(),
    ]
}

/// Remaps a raw cosine from `[-1, 1]` to `[0, 1]`.
#[inline]
pub fn remap_unit(c: f64) -> f64 {
    (c + 1.0) / 2.0
}

/// Identity encoding: the normalized initial coordinates pass through.
#[inline]
pub fn encode_identity(p0_norm: [f64; 3]) -> [f64; 3] {
    p0_norm
}

/// Multi-frequency encoding: `gamma` over x', y', z' in coordinate-major
/// order, each component remapped to `[0, 1]`.
pub fn encode_freq(p0_norm: [f64; 3]) -> [f64; 12] {
    let mut out = [0.0; 12];
    for (c, &v) in p0_norm.iter().enumerate() {
        let g = gamma(v);
        for (l, &raw) in g.iter().enumerate() {
            out[c * 4 + l] = remap_unit(raw);
        }
    }
    out
}

/// Depth encoding: the current raw depth is normalized against the global
/// depth bounds, clamped to `[0, 1]`, and mapped through the colormap. A
/// degenerate depth range maps everything to the colormap midpoint.
pub fn encode_depth(z_raw: f64, stats: &NormStats, cmap: &SpectralColormap) -> [f64; 3] {
    let z = if stats.depth.is_degenerate() {
        0.5
    } else {
        ((z_raw - stats.depth.min) / (stats.depth.max - stats.depth.min)).clamp(0.0, 1.0)
    };
    cmap.eval(z)
}

/// The 19-dimensional per-point attribute vector, in fixed concatenation
/// order identity (3) | freq (12) | depth (3) | mask (1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeVector([f64; ATTRIBUTE_DIM]);

impl AttributeVector {
    /// Concatenates the four components, validating their dimensions.
    pub fn assemble(identity: &[f64], freq: &[f64], depth_rgb: &[f64], mask: f64) -> Result<Self> {
        if identity.len() != 3 || freq.len() != 12 || depth_rgb.len() != 3 {
            return Err(Error::Assembly(format!(
                "component dimensions must be 3/12/3, got {}/{}/{}",
                identity.len(),
                freq.len(),
                depth_rgb.len()
            )));
        }
        if mask != 0.0 && mask != 1.0 {
            return Err(Error::Assembly(format!("mask must be 0 or 1, got {mask}")));
        }
        let mut v = [0.0; ATTRIBUTE_DIM];
        v[IDENTITY_OFFSET..FREQ_OFFSET].copy_from_slice(identity);
        v[FREQ_OFFSET..DEPTH_OFFSET].copy_from_slice(freq);
        v[DEPTH_OFFSET..MASK_OFFSET].copy_from_slice(depth_rgb);
        v[MASK_OFFSET] = mask;
        Ok(Self(v))
    }

    pub fn as_array(&self) -> &[f64; ATTRIBUTE_DIM] {
        &self.0
    }

    pub fn identity(&self) -> &[f64] {
        &self.0[IDENTITY_OFFSET..FREQ_OFFSET]
    }

    pub fn freq(&self) -> &[f64] {
        &self.0[FREQ_OFFSET..DEPTH_OFFSET]
    }

    pub fn depth_rgb(&self) -> &[f64] {
        &self.0[DEPTH_OFFSET..MASK_OFFSET]
    }

    pub fn mask(&self) -> f64 {
        self.0[MASK_OFFSET]
    }

    /// Reorders the vector into raster stream order.
    ///
    /// The raster groups the 19 channels as six RGB-like streams plus the
    /// mask: identity, one stream per frequency level (x, y, z of that
    /// level), depth, mask. The attribute vector itself keeps frequency
    /// coordinate-major; this reshuffle happens only here.
    pub fn stream_channels(&self) -> [f64; ATTRIBUTE_DIM] {
        let mut out = [0.0; ATTRIBUTE_DIM];
        out[..3].copy_from_slice(self.identity());
        for level in 0..4 {
            for coord in 0..3 {
                out[3 + level * 3 + coord] = self.0[FREQ_OFFSET + coord * 4 + level];
            }
        }
        out[15..18].copy_from_slice(self.depth_rgb());
        out[18] = self.0[MASK_OFFSET];
        out
    }
}

/// Stream names in raster channel order; each covers 3 channels except the
/// final single-channel mask.
pub const STREAM_NAMES: [&str; 7] =
    ["identity", "freq0", "freq1", "freq2", "freq3", "depth", "mask"];

/// The 11-anchor Spectral colormap with uniformly spaced anchors on `[0, 1]`
/// and linear interpolation between neighbors.
///
/// Anchors are the ColorBrewer 11-class Spectral colors divided by 255;
/// evaluation at an anchor position returns that anchor exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralColormap {
    anchors: [[f64; 3]; 11],
    positions: [f64; 11],
}

const SPECTRAL_RGB8: [[u8; 3]; 11] = [
    [158, 1, 66],
    [213, 62, 79],
    [244, 109, 67],
    [253, 174, 97],
    [254, 224, 139],
    [255, 255, 191],
    [230, 245, 152],
    [171, 221, 164],
    [102, 194, 165],
    [50, 136, 189],
    [94, 79, 162],
];

impl SpectralColormap {
    pub fn new() -> Self {
        let mut anchors = [[0.0; 3]; 11];
        let mut positions = [0.0; 11];
        for (i, rgb) in SPECTRAL_RGB8.iter().enumerate() {
            anchors[i] = [rgb[0] as f64 / 255.0, rgb[1] as f64 / 255.0, rgb[2] as f64 / 255.0];
            positions[i] = i as f64 / 10.0;
        }
        Self { anchors, positions }
    }

    pub fn anchors(&self) -> &[[f64; 3]; 11] {
        &self.anchors
    }

    pub fn positions(&self) -> &[f64; 11] {
        &self.positions
    }

    /// Evaluates the colormap at `p`, clamped to `[0, 1]`.
    ///
    /// Interpolation is `(1-t)*a + t*b` on the enclosing anchor pair, which
    /// makes evaluation at an anchor position exact and the segment midpoint
    /// the arithmetic mean of its anchors.
    pub fn eval(&self, p: f64) -> [f64; 3] {
        let p = p.clamp(0.0, 1.0);
        // Largest anchor index at or below p.
        let mut i = 0;
        while i + 1 < self.positions.len() && p >= self.positions[i + 1] {
            i += 1;
        }
        if i == self.positions.len() - 1 || p == self.positions[i] {
            return self.anchors[i];
        }
        let t = (p - self.positions[i]) / (self.positions[i + 1] - self.positions[i]);
        let a = self.anchors[i];
        let b = self.anchors[i + 1];
        [
            (1.0 - t) * a[0] + t * b[0],
            (1.0 - t) * a[1] + t * b[1],
            (1.0 - t) * a[2] + t * b[2],
        ]
    }
}

impl Default for SpectralColormap {
    fn default() -> Self {
        Self::new()
    }
}
