use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use evosys::models::ForcingTerm;
use evosys::{MetricKind, ModelKind, ModelSpec, OmegaParams, EPS_LADDER};
use serde::{Deserialize, Serialize};

fn default_period() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_lambda() -> f64 {
    2.0
}

fn default_stride() -> usize {
    1
}

fn default_ladder() -> Vec<f64> {
    EPS_LADDER.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub nu: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    pub truncation: u32,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Radius of the sampled ball `X`; defaults to the absorbing radius.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub forcing: Vec<ForcingTerm>,
}

fn one() -> f64 {
    1.0
}

impl ModelSection {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            kind: self.kind,
            nu: self.nu,
            period: self.period,
            truncation: self.truncation,
            lambda: self.lambda,
            forcing: self.forcing.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSection {
    pub t_transient: f64,
    pub t_max: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default = "default_cluster_tol")]
    pub cluster_tol: f64,
    #[serde(default)]
    pub attract_eps: Option<f64>,
}

fn default_cluster_tol() -> f64 {
    1e-3
}

impl OmegaSection {
    pub fn params(&self) -> OmegaParams {
        let mut p = OmegaParams::new(self.t_transient, self.t_max, self.sample_stride, self.cluster_tol);
        if let Some(e) = self.attract_eps {
            p.attract_eps = e;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibrarySection {
    #[serde(default = "default_library_size")]
    pub size: usize,
    #[serde(default = "default_t_back")]
    pub t_back: f64,
}

fn default_library_size() -> usize {
    32
}

fn default_t_back() -> f64 {
    50.0
}

impl Default for LibrarySection {
    fn default() -> Self {
        Self {
            size: default_library_size(),
            t_back: default_t_back(),
        }
    }
}

pub const CHECK_NAMES: [&str; 10] = [
    "energy",
    "absorbing",
    "quasi_invariance",
    "maximal_invariant",
    "tracking",
    "strong_convergence",
    "uniform_strong_convergence",
    "left_continuity",
    "compactness",
    "trajectory_attraction",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub name: String,
    #[serde(default = "default_ladder")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub metric: Option<MetricKind>,
    /// Number of centres for the compactness defect.
    #[serde(default)]
    pub k: Option<usize>,
}

impl CheckSection {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            eps: default_ladder(),
            metric: None,
            k: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub seed: u64,
    pub ensemble_size: usize,
    pub horizon: f64,
    pub dt: f64,
    /// Store every n-th integrator step.
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    pub omega: Option<OmegaSection>,
    #[serde(default)]
    pub library: LibrarySection,
    #[serde(default)]
    pub checks: Vec<CheckSection>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.model
            .spec()
            .validate()
            .map_err(|e| anyhow::anyhow!("model: {e}"))?;
        if let Some(r) = self.model.radius {
            ensure!(r > 0.0 && r.is_finite(), "model.radius must be positive, got {r}");
        }
        ensure!(self.ensemble_size > 0, "ensemble_size must be positive");
        ensure!(
            self.horizon > 0.0 && self.horizon.is_finite(),
            "horizon must be positive, got {}",
            self.horizon
        );
        ensure!(
            self.dt > 0.0 && self.dt.is_finite(),
            "dt must be positive, got {}",
            self.dt
        );
        ensure!(self.output_stride > 0, "output_stride must be positive");
        if let Some(o) = &self.omega {
            o.params().validate().map_err(|e| anyhow::anyhow!("omega: {e}"))?;
            ensure!(
                o.t_max <= self.horizon,
                "omega.t_max = {} exceeds horizon = {}",
                o.t_max,
                self.horizon
            );
        }
        ensure!(self.library.size > 0, "library.size must be positive");
        ensure!(self.library.t_back > 0.0, "library.t_back must be positive");
        for c in &self.checks {
            if !CHECK_NAMES.contains(&c.name.as_str()) {
                bail!(
                    "checks.name: unknown check {:?}; expected one of {:?}",
                    c.name,
                    CHECK_NAMES
                );
            }
            ensure!(
                !c.eps.is_empty() && c.eps.iter().all(|e| *e > 0.0),
                "checks.eps for {:?} must be a nonempty list of positive numbers",
                c.name
            );
        }
        Ok(())
    }

    pub fn omega(&self) -> anyhow::Result<OmegaParams> {
        match &self.omega {
            Some(o) => Ok(o.params()),
            None => bail!("omega: section required by this subcommand"),
        }
    }

    /// Grid step of the stored trajectories.
    pub fn grid_dt(&self) -> f64 {
        self.dt * self.output_stride as f64
    }
}
