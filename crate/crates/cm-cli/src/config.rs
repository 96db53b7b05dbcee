//! Run configuration read from a sectioned `key = value` file.
//!
//! ```text
//! [params]            # required
//! d1 = 0.05
//! d2 = 5.0
//! alpha = 8.0
//! beta = 0.45
//! c = 80.0
//! d = 1.0
//! domain_length = 3.141592653589793
//!
//! [grid]
//! n = 257
//!
//! [initial]           # simulate / sweep starting field
//! kind = "equilibrium"      # "equilibrium" | "constant" | "random"
//! equilibrium_index = 0
//! u = 0.5                   # for kind = "constant"
//! v = 1.0
//! modes = [1]
//! amplitude = 0.001
//!
//! [run]
//! steady_tol = 1e-8
//! t_max = 10000.0
//! check_every = 10
//! monitor_every = 100
//!
//! [newton]
//! tol = 1e-10
//! max_iter = 100
//! max_halvings = 30
//! box_scale = 1.5
//! starts = "both"           # "modes" | "seeded" | "both"
//! seeded_count = 20
//!
//! [dispersion]
//! j_max = 40                # omitted: per-equilibrium default
//!
//! [regimes]
//! samples = 400
//!
//! [sweep]
//! x_axis = "c"
//! x_values = [10.0, 20.0, 40.0]
//! y_axis = "d2"
//! y_values = [1.0, 10.0]
//! simulate = true
//! ```
//!
//! Every section except `[params]` is optional; unknown sections and keys are rejected.

use std::path::Path;

use crowley_martin::sim::RunOptions;
use crowley_martin::steady::NewtonOptions;
use crowley_martin::ModelParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub run: RunConfigSection,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub dispersion: DispersionConfig,
    #[serde(default)]
    pub regimes: RegimesConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Seed for random initial data and seeded Newton starts.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 257 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Equilibrium,
    Constant,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub equilibrium_index: usize,
    pub u: f64,
    pub v: f64,
    pub modes: Vec<usize>,
    pub amplitude: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::Equilibrium,
            equilibrium_index: 0,
            u: 0.5,
            v: 1.0,
            modes: vec![1],
            amplitude: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigSection {
    pub steady_tol: f64,
    pub t_max: f64,
    pub dt: Option<f64>,
    pub check_every: usize,
    pub monitor_every: usize,
}

impl Default for RunConfigSection {
    fn default() -> Self {
        let d = RunOptions::default();
        Self {
            steady_tol: d.steady_tol,
            t_max: d.t_max,
            dt: None,
            check_every: d.check_every,
            monitor_every: d.monitor_every,
        }
    }
}

impl RunConfigSection {
    pub fn options(&self) -> RunOptions {
        RunOptions {
            steady_tol: self.steady_tol,
            t_max: self.t_max,
            dt: self.dt,
            check_every: self.check_every,
            monitor_every: self.monitor_every,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Modes,
    Seeded,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub box_scale: f64,
    pub starts: StartKind,
    pub seeded_count: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let d = NewtonOptions::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            max_halvings: d.max_halvings,
            box_scale: d.box_scale,
            starts: StartKind::Both,
            seeded_count: 20,
        }
    }
}

impl NewtonConfig {
    pub fn options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            max_halvings: self.max_halvings,
            box_scale: self.box_scale,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub j_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimesConfig {
    pub samples: usize,
}

impl Default for RegimesConfig {
    fn default() -> Self {
        Self { samples: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub x_axis: String,
    pub x_values: Vec<f64>,
    pub y_axis: String,
    pub y_values: Vec<f64>,
    pub simulate: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            x_axis: "c".into(),
            x_values: Vec::new(),
            y_axis: "d2".into(),
            y_values: vec![],
            simulate: true,
        }
    }
}

pub const SWEEP_AXES: [&str; 7] = ["d1", "d2", "alpha", "beta", "c", "d", "domain_length"];

/// Copy of `p` with the named field replaced.
pub fn set_axis(p: &ModelParams, axis: &str, value: f64) -> Option<ModelParams> {
    let mut q = *p;
    let slot = match axis {
        "d1" => &mut q.d1,
        "d2" => &mut q.d2,
        "alpha" => &mut q.alpha,
        "beta" => &mut q.beta,
        "c" => &mut q.c,
        "d" => &mut q.d,
        "domain_length" => &mut q.domain_length,
        _ => return None,
    };
    *slot = value;
    Some(q)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates a configuration; `origin` labels error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            ConfigError::Parse {
                path: origin.to_string(),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate().map_err(|message| ConfigError::Invalid {
            path: origin.to_string(),
            message,
        })?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        self.params.validate().map_err(|e| e.to_string())?;
        if self.grid.n < crowley_martin::Grid::MIN_NODES {
            return Err(format!(
                "grid.n must be at least {}",
                crowley_martin::Grid::MIN_NODES
            ));
        }
        let positive = [
            ("run.steady_tol", self.run.steady_tol),
            ("run.t_max", self.run.t_max),
            ("newton.tol", self.newton.tol),
            ("newton.box_scale", self.newton.box_scale),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(dt) = self.run.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(format!("run.dt must be positive, got {dt}"));
            }
        }
        if !(self.initial.amplitude.is_finite() && self.initial.amplitude >= 0.0) {
            return Err("initial.amplitude must be nonnegative".into());
        }
        for axis in [&self.sweep.x_axis, &self.sweep.y_axis] {
            if !SWEEP_AXES.contains(&axis.as_str()) {
                return Err(format!(
                    "unknown sweep axis {axis:?}; expected one of {SWEEP_AXES:?}"
                ));
            }
        }
        Ok(())
    }
}
