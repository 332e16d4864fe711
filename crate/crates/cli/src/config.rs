//! Flag resolution: command line over config file over defaults.
//!
//! The config file is plain `key=value` text with `#` comments; recognized
//! keys are `canvas`, `pointsize`, `stride`, `epsilon`, `threads`, and
//! `dilation`.

use std::collections::HashMap;
use std::path::Path;

use fxmv_core::raster::{DEFAULT_CANVAS, DEFAULT_POINTSIZE};
use fxmv_core::trajectory::DEFAULT_EPSILON;

use crate::commands::CliError;

/// Default appearance-region dilation radius in pixels.
pub const DEFAULT_DILATION: u32 = 4;

pub fn parse_canvas(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad canvas width {w:?}"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad canvas height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("canvas dimensions must be nonzero".into());
    }
    Ok((w, h))
}

pub fn parse_pivot(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (dst, part) in out.iter_mut().zip(&parts) {
        *dst = part.trim().parse().map_err(|_| format!("bad pivot component {part:?}"))?;
    }
    Ok(out)
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub pointsize: u32,
    pub stride: u32,
    pub epsilon: f64,
    pub threads: usize,
    pub dilation: u32,
    pub previews: bool,
}

fn read_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::core("reading config file", fxmv_core::Error::io(path, e)))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(CliError::validation(format!(
                "{}: line {}: expected key=value, got {body:?}",
                path.display(),
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        if !matches!(
            key.as_str(),
            "canvas" | "pointsize" | "stride" | "epsilon" | "threads" | "dilation"
        ) {
            return Err(CliError::validation(format!(
                "{}: line {}: unknown config key {key:?}",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn config_value<T>(
    map: &HashMap<String, String>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => parse(raw)
            .map(Some)
            .map_err(|e| CliError::validation(format!("config key {key}: {e}"))),
    }
}

impl RunConfig {
    pub fn resolve(args: &crate::SharedArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_config_file(path)?,
            None => HashMap::new(),
        };

        let canvas = match args.canvas {
            Some(c) => c,
            None => config_value(&file, "canvas", parse_canvas)?.unwrap_or(DEFAULT_CANVAS),
        };
        let parse_u32 = |s: &str| s.parse::<u32>().map_err(|e| e.to_string());
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| e.to_string());
        let parse_f64 = |s: &str| s.parse::<f64>().map_err(|e| e.to_string());

        let pointsize = match args.pointsize {
            Some(v) => v,
            None => config_value(&file, "pointsize", parse_u32)?.unwrap_or(DEFAULT_POINTSIZE),
        };
        let stride = match args.stride {
            Some(v) => v,
            None => config_value(&file, "stride", parse_u32)?.unwrap_or(1),
        };
        let epsilon = match args.epsilon {
            Some(v) => v,
            None => config_value(&file, "epsilon", parse_f64)?.unwrap_or(DEFAULT_EPSILON),
        };
        let threads = match args.threads {
            Some(v) => v,
            None => config_value(&file, "threads", parse_usize)?.unwrap_or_else(|| {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            }),
        };
        let dilation = match args.dilation {
            Some(v) => v,
            None => config_value(&file, "dilation", parse_u32)?.unwrap_or(DEFAULT_DILATION),
        };

        if threads == 0 {
            return Err(CliError::validation("threads must be >= 1".into()));
        }

        Ok(RunConfig {
            canvas_width: canvas.0,
            canvas_height: canvas.1,
            pointsize,
            stride,
            epsilon,
            threads,
            dilation,
            previews: !args.no_previews,
        })
    }
}
