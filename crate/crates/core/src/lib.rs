//! Motion-video control signals from dynamic 3D point trajectories.
//!
//! The pipeline turns per-frame camera-space point trajectories into a
//! 19-channel raster video: every visible point is projected through a
//! pinhole camera and splats an attribute vector built from its normalized
//! frame-0 position (identity and multi-frequency cosine features), the
//! Spectral color of its current depth, and an edit-mask bit. Around that
//! core sit camera utilities (depth-map lifting, world-space lifting,
//! retargeting onto new trajectories), rigid object-manipulation schedules
//! with the gray-filled appearance condition, and rotation/translation pose
//! error metrics.
//!
//! Modules map onto pipeline stages:
//!
//! - [`trajectory`]: point-trajectory storage, FXTR I/O, downsampling,
//!   normalization statistics
//! - [`encoding`]: the per-point attribute vector and the Spectral colormap
//! - [`raster`]: projection, depth-sorted splatting, FXMV I/O, previews
//! - [`camera`]: intrinsics/poses, FXPO/FXDM I/O, lifting and retargeting
//! - [`edit`]: point selection, rigid schedules (FXSC), appearance condition
//! - [`metrics`]: rotation/translation error between pose sequences
//!
//! Everything is a pure function over immutable inputs; rendering
//! parallelizes over frames with bitwise-deterministic output.

pub mod camera;
pub mod edit;
pub mod encoding;
pub mod error;
pub mod metrics;
pub mod raster;
pub mod test_utils;
pub mod trajectory;

pub use error::{Error, Result};
