//! Crate-wide error type.
//!
//! Variants map one-to-one onto the failure classes of the pipeline contracts
//! so callers (in particular the CLI) can translate them into exit codes
//! without string matching.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the motion-video pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure while reading or writing a file.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file does not start with the expected magic/version.
    #[error("{path}: not a {expected} file ({detail})")]
    Format {
        path: PathBuf,
        expected: &'static str,
        detail: String,
    },

    /// Header and payload disagree (truncated payload, trailing bytes, ...).
    #[error("{path}: corrupt file: {detail}")]
    CorruptFile { path: PathBuf, detail: String },

    /// Data violates a declared invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Two inputs that must agree in shape do not.
    #[error("input mismatch: {0}")]
    InputMismatch(String),

    /// A parameter is outside its declared range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A selection or downsampling step kept zero points.
    #[error("empty selection: {0}")]
    EmptySelection(String),

    /// The reference frame has no visible point to normalize against.
    #[error("empty reference: no visible point in reference frame {frame}")]
    EmptyReference { frame: usize },

    /// A visible depth is at or below -epsilon, so 1/(z+eps) is singular.
    #[error(
        "inverse-depth singularity: visible point {point} at frame {frame} has z = {z} <= -epsilon"
    )]
    InverseDepthSingularity { frame: usize, point: usize, z: f64 },

    /// A sampled depth-map value cannot be lifted to a 3D point.
    #[error("depth lift error at pixel (u={u}, v={v}): depth {depth} is not finite and positive")]
    Lift { u: usize, v: usize, depth: f64 },

    /// Attribute components with the wrong dimensions were assembled.
    #[error("assembly error: {0}")]
    Assembly(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
