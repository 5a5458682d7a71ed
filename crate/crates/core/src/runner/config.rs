//! Sweep configuration, read from TOML.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Result, RunnerError};
use crate::heom::{IntegratorConfig, SteadyMethod};
use crate::model::{ground_state, BathSpec, ModelSpec, SystemSpec};
use crate::qstate::{ComplexMatrix, DensityMatrix};

/// Per-bath settings; the coupling comes from the sweep grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathTemplate {
    pub gamma: f64,
    pub temperature: f64,
}

impl Default for BathTemplate {
    fn default() -> Self {
        Self { gamma: 0.15, temperature: 1.5 }
    }
}

/// Coupling-strength grid: an explicit list or log-spaced points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    List { values: Vec<f64> },
    Log { log_start: f64, log_stop: f64, points: usize },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Log { log_start: 0.01, log_stop: 4.0, points: 40 }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::List { values } => values.clone(),
            GridSpec::Log { log_start, log_stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*log_start],
                n => {
                    let (a, b) = (log_start.ln(), log_stop.ln());
                    (0..*n)
                        .map(|k| {
                            if k == 0 {
                                *log_start
                            } else if k + 1 == *n {
                                *log_stop
                            } else {
                                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                            }
                        })
                        .collect()
                }
            },
        }
    }
}

/// Initial density matrix for propagation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Ground,
    MaximallyMixed,
    RandomPure { seed: u64 },
    /// Row-major real and imaginary parts in the product basis.
    Explicit { re: Vec<f64>, im: Vec<f64> },
}

impl InitialState {
    pub fn density(&self, system: &SystemSpec) -> Result<DensityMatrix> {
        Ok(match self {
            InitialState::Ground => ground_state(system)?,
            InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(4)?,
            InitialState::RandomPure { seed } => random_pure_state(*seed)?,
            InitialState::Explicit { re, im } => {
                if re.len() != 16 || im.len() != 16 {
                    return Err(RunnerError::Config("explicit initial state needs 16 re and 16 im entries".into()));
                }
                let m = ComplexMatrix::from_vec(4, re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect())?;
                DensityMatrix::new(m)?
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            InitialState::Ground => "ground".into(),
            InitialState::MaximallyMixed => "maximally_mixed".into(),
            InitialState::RandomPure { seed } => format!("random_pure({seed})"),
            InitialState::Explicit { .. } => "explicit".into(),
        }
    }
}

/// Haar-random pure state from a seeded ChaCha8 stream.
pub fn random_pure_state(seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi: Vec<C64> = (0..4)
        .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok(DensityMatrix::pure(&psi)?)
}

/// Bath temperatures of a non-equilibrium sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NessTemperatures {
    pub t1: f64,
    pub t2: f64,
}

impl Default for NessTemperatures {
    fn default() -> Self {
        Self { t1: 2.0, t2: 1.0 }
    }
}

/// Settings for a single relaxation trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxSettings {
    pub lambda_b: f64,
}

impl Default for RelaxSettings {
    fn default() -> Self {
        Self { lambda_b: 1.0 }
    }
}

fn default_system() -> SystemSpec {
    SystemSpec::new(1.0, 1.55)
}

fn default_initial_states() -> Vec<InitialState> {
    vec![InitialState::Ground]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_parallelism() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_system")]
    pub system: SystemSpec,
    #[serde(default)]
    pub bath1: BathTemplate,
    #[serde(default)]
    pub bath2: BathTemplate,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_initial_states")]
    pub initial_states: Vec<InitialState>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub method: SteadyMethod,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub ness: NessTemperatures,
    #[serde(default)]
    pub relax: RelaxSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RunnerError::Config(m));
        self.system.validate().map_err(|e| RunnerError::Config(e.to_string()))?;
        for (name, b) in [("bath1", &self.bath1), ("bath2", &self.bath2)] {
            BathSpec::new(0.0, b.gamma, b.temperature)
                .validate()
                .map_err(|e| RunnerError::Config(format!("{name}: {e}")))?;
        }
        if let GridSpec::Log { log_start, log_stop, .. } = self.grid {
            if !(log_start > 0.0 && log_stop > 0.0) {
                return bad("log grid bounds must be positive".into());
            }
        }
        let grid = self.grid.values();
        if grid.is_empty() {
            return bad("lambda_b grid is empty".into());
        }
        if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("lambda_b grid values must be finite and non-negative".into());
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("lambda_b grid must be strictly increasing".into());
        }
        if self.initial_states.is_empty() {
            return bad("at least one initial state is required".into());
        }
        for s in &self.initial_states {
            s.density(&self.system).map_err(|e| RunnerError::Config(format!("initial state {}: {e}", s.label())))?;
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        self.integrator.validate().map_err(|e| RunnerError::Config(e.to_string()))?;
        Ok(())
    }

    /// Model at one grid point, both baths at coupling `lambda_b`.
    pub fn model(&self, lambda_b: f64) -> ModelSpec {
        ModelSpec::new(
            self.system.clone(),
            BathSpec::new(lambda_b, self.bath1.gamma, self.bath1.temperature),
            BathSpec::new(lambda_b, self.bath2.gamma, self.bath2.temperature),
        )
    }

    pub fn with_temperatures(&self, t1: f64, t2: f64) -> Self {
        let mut c = self.clone();
        c.bath1.temperature = t1;
        c.bath2.temperature = t2;
        c
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.initial_states
            .iter()
            .filter_map(|s| match s {
                InitialState::RandomPure { seed } => Some(*seed),
                _ => None,
            })
            .collect()
    }
}
