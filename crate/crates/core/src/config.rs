//! Study configuration: JSON documents layered over the desk presets.

use crate::error::{Error, Result};
use crate::norms::Method;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const SPECTRAL_DESK: &str = include_str!("../presets/spectral_desk.json");
pub const SPECTRAL_PAPER: &str = include_str!("../presets/spectral_paper.json");
pub const FEM_DESK: &str = include_str!("../presets/fem_desk.json");
pub const FEM_PAPER: &str = include_str!("../presets/fem_paper.json");

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "FRACSIM_SEED";

/// A validated convergence study.
///
/// `dims` are mode counts for the spectral method and cell counts 1/h for
/// finite elements; `ref_dim` is the same quantity for the reference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub method: Method,
    pub alpha: f64,
    pub gammas: Vec<f64>,
    pub p: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub dims: Vec<usize>,
    pub ref_dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub measurement_stride: usize,
    pub memory_budget_mb: usize,
    pub output_path: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    method: Method,
    alpha: Option<f64>,
    gammas: Option<Vec<f64>>,
    p: Option<f64>,
    #[serde(rename = "T")]
    horizon: Option<f64>,
    dt: Option<f64>,
    dims: Option<Vec<usize>>,
    ref_dim: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
    measurement_stride: Option<usize>,
    memory_budget_mb: Option<usize>,
    output_path: Option<String>,
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::Config(inner.to_string())
        } else {
            Error::Config(format!("{path}: {inner}"))
        }
    })
}

/// Built-in preset by name: `spectral_desk`, `spectral_paper`, `fem_desk`, `fem_paper`.
pub fn preset(name: &str) -> Result<StudyConfig> {
    let text = match name {
        "spectral_desk" => SPECTRAL_DESK,
        "spectral_paper" => SPECTRAL_PAPER,
        "fem_desk" => FEM_DESK,
        "fem_paper" => FEM_PAPER,
        _ => return Err(Error::Config(format!("unknown preset `{name}`"))),
    };
    let config: StudyConfig = from_json(text)?;
    config.validate()?;
    Ok(config)
}

/// Desk preset of `method`, the source of all defaults.
pub fn desk_defaults(method: Method) -> StudyConfig {
    let name = match method {
        Method::Spectral => "spectral_desk",
        Method::Fem => "fem_desk",
    };
    preset(name).expect("built-in presets are valid")
}

/// Parses a JSON study description, filling absent keys from the desk preset.
pub fn parse_config(text: &str) -> Result<StudyConfig> {
    let partial: PartialConfig = from_json(text)?;
    let mut c = desk_defaults(partial.method);
    c.method = partial.method;
    macro_rules! overlay {
        ($($field:ident),*) => { $( if let Some(v) = partial.$field { c.$field = v; } )* };
    }
    overlay!(
        alpha,
        gammas,
        p,
        horizon,
        dt,
        dims,
        ref_dim,
        samples,
        seed,
        measurement_stride,
        memory_budget_mb,
        output_path
    );
    c.validate()?;
    Ok(c)
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(bad("alpha", format!("{} is outside (0, 1)", self.alpha)));
        }
        if self.gammas.is_empty() {
            return Err(bad("gammas", "at least one exponent is required"));
        }
        for (i, g) in self.gammas.iter().enumerate() {
            if !(0.0..0.5).contains(g) {
                return Err(bad(&format!("gammas[{i}]"), format!("{g} is outside [0, 1/2)")));
            }
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(bad("p", format!("{} must be positive", self.p)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(bad("T", format!("{} must be positive", self.horizon)));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(bad("dt", format!("{} must lie in (0, T]", self.dt)));
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-12 * self.horizon.max(1.0) {
            return Err(bad("dt", format!("{} does not divide T = {}", self.dt, self.horizon)));
        }
        if self.dims.len() < 2 {
            return Err(bad("dims", "at least two dimensions are required"));
        }
        if self.dims.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("dims", "must be strictly increasing"));
        }
        let min_dim = match self.method {
            Method::Spectral => 1,
            Method::Fem => 2,
        };
        if self.dims[0] < min_dim {
            return Err(bad("dims[0]", format!("must be at least {min_dim}")));
        }
        let max_dim = *self.dims.last().unwrap();
        if self.ref_dim <= max_dim {
            return Err(bad("ref_dim", format!("{} must exceed max(dims) = {max_dim}", self.ref_dim)));
        }
        if self.method == Method::Fem {
            for (i, d) in self.dims.iter().enumerate() {
                if !self.ref_dim.is_multiple_of(*d) {
                    return Err(bad(
                        &format!("dims[{i}]"),
                        format!("{d} cells do not nest in the reference mesh of {} cells", self.ref_dim),
                    ));
                }
            }
        }
        if self.samples == 0 {
            return Err(bad("samples", "must be at least 1"));
        }
        if self.measurement_stride == 0 {
            return Err(bad("measurement_stride", "must be at least 1"));
        }
        if self.memory_budget_mb == 0 {
            return Err(bad("memory_budget_mb", "must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Base name of the result files.
    pub fn stem(&self) -> String {
        format!("{}_alpha{}", self.method, self.alpha)
    }

    pub fn csv_path(&self) -> PathBuf {
        PathBuf::from(&self.output_path).join(format!("{}.csv", self.stem()))
    }

    pub fn json_path(&self) -> PathBuf {
        PathBuf::from(&self.output_path).join(format!("{}.json", self.stem()))
    }
}

/// Seed precedence: command line, then environment, then configuration.
pub fn resolve_seed(configured: u64, env: Option<&str>, cli: Option<u64>) -> Result<u64> {
    if let Some(s) = cli {
        return Ok(s);
    }
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}: `{text}` is not a 64-bit unsigned integer"))),
        None => Ok(configured),
    }
}
