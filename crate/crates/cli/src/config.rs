//! Run configuration, read from and written to TOML.

use std::path::{Path, PathBuf};

use eplab_core::integrator::DEFAULT_CFL;
use eplab_core::{Branch, EMode, Grid, InitSpec, Params, RhsOptions, Scheme, StepControl};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Spatial dimension, 2 or 3.
    pub dimension: usize,
    /// Points per axis.
    pub points: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    pub gamma: f64,
    pub tau: f64,
    pub nbar: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    pub sample_interval: f64,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub e_mode: EMode,
    /// Linear test mode: advection and quadratic terms off.
    #[serde(default)]
    pub linear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: ParamsConfig,
    #[serde(default)]
    pub model: ModelConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub init: InitSpec,
}

impl RunConfig {
    /// Reference parameters on a 128^2 box with the given initial data.
    pub fn reference(init: InitSpec) -> Self {
        let p = Params::reference();
        Self {
            grid: GridConfig {
                dimension: 2,
                points: 128,
                length: two_pi(),
            },
            params: ParamsConfig {
                a: p.a,
                gamma: p.gamma,
                tau: p.tau,
                nbar: p.nbar,
                branch: p.branch(),
            },
            model: ModelConfig::default(),
            time: TimeConfig {
                scheme: Scheme::Rk4,
                dt: None,
                cfl: DEFAULT_CFL,
                t_end: 10.0,
                sample_interval: 0.05,
            },
            output: OutputConfig::default(),
            init,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        Ok((config, text))
    }

    /// Panics only for seeds above `i64::MAX`, which [`validate`](Self::validate) rejects.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        let p = self.params()?;
        if p.branch() != self.params.branch {
            return Err(field(
                "params.branch",
                format!(
                    "{:?} does not match gamma = {} (isothermal requires gamma = 1)",
                    self.params.branch, self.params.gamma
                ),
            ));
        }
        match &self.init {
            InitSpec::Modes(modes) => {
                for (i, m) in modes.iter().enumerate() {
                    if !m.amplitude.is_finite() {
                        return Err(field(&format!("init.modes[{i}].amplitude"), "must be finite"));
                    }
                    if m.wavevector.len() != self.grid.dimension {
                        return Err(field(
                            &format!("init.modes[{i}].wavevector"),
                            format!("needs {} entries", self.grid.dimension),
                        ));
                    }
                }
            }
            InitSpec::Random(r) => {
                if !r.amplitude.is_finite() {
                    return Err(field("init.random.amplitude", "must be finite"));
                }
                if r.seed > i64::MAX as u64 {
                    return Err(field("init.random.seed", "must not exceed 2^63 - 1"));
                }
                if !(r.band[0] >= 0.0 && r.band[0] <= r.band[1] && r.band[1].is_finite()) {
                    return Err(field("init.random.band", "must satisfy 0 <= lo <= hi"));
                }
            }
        }
        self.control()
            .validate()
            .map_err(|e| field("time", e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.dimension, self.grid.points, self.grid.length)
            .map_err(|e| field("grid", e.to_string()))
    }

    pub fn params(&self) -> Result<Params, CliError> {
        let p = &self.params;
        Params::new(p.a, p.gamma, p.tau, p.nbar).map_err(|e| field("params", e.to_string()))
    }

    pub fn control(&self) -> StepControl {
        StepControl {
            dt: self.time.dt,
            cfl: self.time.cfl,
            scheme: self.time.scheme,
            t_end: self.time.t_end,
            sample_interval: self.time.sample_interval,
        }
    }

    pub fn rhs_options(&self) -> RhsOptions {
        RhsOptions {
            nonlinear: !self.model.linear,
            e_mode: self.model.e_mode,
            ..RhsOptions::default()
        }
    }

    /// Replaces the seed of a random initial spectrum. Mode lists are unaffected.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let (Some(s), InitSpec::Random(r)) = (seed, &mut self.init) {
            r.seed = s;
        }
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.params.tau = tau;
        self
    }
}

fn field(name: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {message}"))
}
