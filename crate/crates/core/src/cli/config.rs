use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{InitialCondition, ModelParams};
use crate::error::{Error, Result};
use crate::feynman_kac::{Monitoring, MonteCarloParams};
use crate::front_lab::{FrontModel, ScaleKind};
use crate::kernels::{SpaceCovariance, TimeCovariance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontSection {
    pub delta: f64,
    pub rho_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub scale: ScaleKind,
    /// Relative slack for the bound comparison.
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default)]
    pub refine_steps: usize,
}

fn default_slack() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentSection {
    pub t: f64,
    /// Distance of the evaluation point from the origin, along the first axis.
    pub x: f64,
}

impl Default for MomentSection {
    fn default() -> Self {
        Self { t: 1.0, x: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallBallSection {
    pub d: usize,
    pub eps: f64,
    pub n_steps: usize,
    pub n_rep: u64,
    #[serde(default)]
    pub monitoring: Monitoring,
}

impl Default for SmallBallSection {
    fn default() -> Self {
        Self {
            d: 1,
            eps: 1.0,
            n_steps: 1024,
            n_rep: 100_000,
            monitoring: Monitoring::Grid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("ifl-out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Everything a run depends on. All randomness derives from `mc.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub gamma: TimeCovariance,
    #[serde(rename = "lambda")]
    pub lambda_kernel: SpaceCovariance,
    pub mc: MonteCarloParams,
    pub front: FrontSection,
    #[serde(default)]
    pub moment: MomentSection,
    #[serde(default)]
    pub small_ball: SmallBallSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    /// Riesz kernel `|x|^{-1/2}` in `d = 1`, `gamma = 1`, `lambda = 1`, `p = 2`.
    fn default() -> Self {
        Self {
            model: ModelParams {
                d: 1,
                lambda: 1.0,
                p: 2,
                u0: InitialCondition::indicator(1.0, 1.0),
            },
            gamma: TimeCovariance::Constant { c: 1.0 },
            lambda_kernel: SpaceCovariance::Riesz { beta: 0.5 },
            mc: MonteCarloParams::new(20_000, 32, 1),
            front: FrontSection {
                delta: 0.5,
                rho_grid: vec![0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
                t_grid: vec![2.0, 4.0, 8.0],
                scale: ScaleKind::Vartheta,
                slack: default_slack(),
                refine_steps: 0,
            },
            moment: MomentSection::default(),
            small_ball: SmallBallSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Re-keys a domain error raised while checking one config section.
fn under(key: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(key, other.to_string()),
    })
}

fn check_grid(key: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::config(key, "must not be empty"));
    }
    if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::config(key, "entries must be positive and finite"));
    }
    if g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config(key, "must be strictly increasing"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        under("gamma", self.gamma.validate())?;
        under("lambda", self.lambda_kernel.validate(self.model.d))?;
        self.mc.validate()?;

        let f = &self.front;
        if !(f.delta > 0.0 && f.delta < 1.0) {
            return Err(Error::config("front.delta", format!("must lie in (0, 1), got {}", f.delta)));
        }
        check_grid("front.rho_grid", &f.rho_grid)?;
        check_grid("front.t_grid", &f.t_grid)?;
        if !(f.slack >= 0.0 && f.slack.is_finite()) {
            return Err(Error::config("front.slack", format!("must be >= 0, got {}", f.slack)));
        }

        if !(self.moment.t > 0.0 && self.moment.t.is_finite()) {
            return Err(Error::config("moment.t", format!("must be positive, got {}", self.moment.t)));
        }
        if !self.moment.x.is_finite() {
            return Err(Error::config("moment.x", "must be finite"));
        }

        let sb = &self.small_ball;
        if sb.d == 0 {
            return Err(Error::config("small_ball.d", "must be >= 1"));
        }
        if !(sb.eps > 0.0 && sb.eps.is_finite()) {
            return Err(Error::config("small_ball.eps", format!("must be positive, got {}", sb.eps)));
        }
        if sb.n_steps < 1 {
            return Err(Error::config("small_ball.n_steps", "must be >= 1"));
        }
        if sb.n_rep < 2 {
            return Err(Error::config("small_ball.n_rep", "must be >= 2"));
        }

        if self.output.formats.is_empty() {
            return Err(Error::config("output.formats", "must list at least one of csv, json"));
        }
        if self.output.directory.as_os_str().is_empty() {
            return Err(Error::config("output.directory", "must not be empty"));
        }
        Ok(())
    }

    /// Extra constraints for subcommands that simulate the moment formula.
    pub fn validate_for_moments(&self) -> Result<()> {
        if matches!(self.lambda_kernel, SpaceCovariance::White1D) {
            return Err(Error::config(
                "lambda.family",
                "white1d has no pointwise value; use mollified_white for moment and front runs",
            ));
        }
        Ok(())
    }

    pub fn front_model(&self) -> FrontModel {
        FrontModel {
            model: self.model.clone(),
            gamma: self.gamma.clone(),
            lambda: self.lambda_kernel.clone(),
            delta: self.front.delta,
        }
    }
}
