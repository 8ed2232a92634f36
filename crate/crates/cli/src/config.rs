//! Experiment configuration files (TOML).

use crate::CliError;
use roughhedge::hedging::{HedgeMode, MarketSignal};
use roughhedge::paths::{
    brownian_trace, gbm_from_brownian, gen_crossing_conditioned, gen_smooth_vol, rng_for, GeneratorKind, GeneratorSpec,
    SmoothVolParams,
};
use roughhedge::{InstrumentSpec, TracePath};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: Option<GeneratorSpec>,
    pub market: Option<MarketConfig>,
    /// Named instruments, `[instruments.<name>]`.
    #[serde(default)]
    pub instruments: BTreeMap<String, InstrumentSpec>,
    /// Extra instrument file in the same `[instruments.<name>]` layout,
    /// relative to the config file.
    pub catalog: Option<PathBuf>,
    pub plan: Option<PlanConfig>,
    pub study: Option<StudyConfig>,
    pub output: Option<PathBuf>,
    #[serde(default, rename = "assert")]
    pub assertions: Vec<Assertion>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    BlackScholes,
    Bachelier,
}

/// How the volatility coordinate evolves. Without one σ stays at `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolConfig {
    Smooth { sigma0: f64, amplitude: f64, frequency: f64 },
    /// σ₀ exp(η B) with B a Brownian motion independent of the spot.
    Brownian { sigma0: f64, eta: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub model: Model,
    #[serde(default = "default_s0")]
    pub s0: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Grid intervals for a single hedge run.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    pub vol: Option<VolConfig>,
    /// Keep only seeds whose spot path rises above this level (Bachelier).
    pub crossing: Option<f64>,
}

fn default_s0() -> f64 {
    100.0
}

fn default_sigma() -> f64 {
    0.2
}

fn default_horizon() -> f64 {
    1.0
}

fn default_steps() -> usize {
    1024
}

fn default_tol() -> f64 {
    1e-9
}

fn default_cap() -> f64 {
    1e6
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub mode: HedgeMode,
    pub target: String,
    pub hedgers: Vec<String>,
    pub horizon: Option<f64>,
    /// Leading signal coordinates matched by delta and classical modes.
    #[serde(default)]
    pub traded: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cap")]
    pub weight_cap: f64,
    /// Further modes run on the same seeds by `converge`.
    #[serde(default)]
    pub compare: Vec<HedgeMode>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub meshes: Vec<usize>,
    pub seeds: Option<Vec<u64>>,
    pub seed_count: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Fitted convergence slope of a study.
    Slope,
    /// Median final error at the finest mesh.
    FinalMedian,
    /// 1 if the medians strictly decrease, else 0.
    Decreasing,
    /// Final error of a single hedge run.
    FinalError,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub name: String,
    pub metric: Metric,
    pub mode: Option<HedgeMode>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    instruments: BTreeMap<String, InstrumentSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssertFile {
    #[serde(default, rename = "assert")]
    assertions: Vec<Assertion>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut cfg: Self = parse(&read(path)?, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(c) = cfg.catalog.clone() {
            let full = base.join(c);
            cfg.merge_catalog(&full)?;
        }
        if let Some(o) = &cfg.output {
            cfg.output = Some(base.join(o));
        }
        Ok(cfg)
    }

    pub fn merge_catalog(&mut self, path: &Path) -> Result<(), CliError> {
        let file: CatalogFile = parse(&read(path)?, path)?;
        for (name, spec) in file.instruments {
            if self.instruments.insert(name.clone(), spec).is_some() {
                return Err(CliError::Usage(format!("instrument `{name}` defined twice")));
            }
        }
        Ok(())
    }

    pub fn merge_assertions(&mut self, path: &Path) -> Result<(), CliError> {
        let file: AssertFile = parse(&read(path)?, path)?;
        self.assertions.extend(file.assertions);
        Ok(())
    }

    /// Looks up a named instrument; `stock` is always available.
    pub fn instrument(&self, name: &str) -> Result<InstrumentSpec, CliError> {
        match self.instruments.get(name) {
            Some(s) => Ok(s.clone()),
            None if name == "stock" => Ok(InstrumentSpec::Stock),
            None => Err(CliError::Usage(format!("unknown instrument `{name}`"))),
        }
    }

    pub fn market(&self) -> Result<&MarketConfig, CliError> {
        self.market.as_ref().ok_or_else(|| CliError::Usage("config has no [market] section".into()))
    }

    pub fn plan(&self) -> Result<&PlanConfig, CliError> {
        self.plan.as_ref().ok_or_else(|| CliError::Usage("config has no [plan] section".into()))
    }
}

impl StudyConfig {
    /// Validated mesh schedule: at least four strictly increasing levels,
    /// each dividing the finest one so coarse paths nest in fine ones.
    pub fn meshes(&self) -> Result<Vec<usize>, CliError> {
        let m = self.meshes.clone();
        if m.len() < 4 {
            return Err(CliError::Usage(format!("convergence study needs at least 4 mesh levels, got {}", m.len())));
        }
        if m.windows(2).any(|w| w[1] <= w[0]) || m[0] == 0 {
            return Err(CliError::Usage("mesh schedule must be positive and strictly increasing".into()));
        }
        let top = m[m.len() - 1];
        if m.iter().any(|n| top % n != 0) {
            return Err(CliError::Usage("every mesh must divide the finest mesh".into()));
        }
        Ok(m)
    }

    pub fn seeds(&self, base: Option<u64>) -> Vec<u64> {
        let list = self.seeds.clone().unwrap_or_else(|| (0..self.seed_count.unwrap_or(10) as u64).collect());
        match base {
            Some(b) => (0..list.len() as u64).map(|i| b + i).collect(),
            None => list,
        }
    }
}

impl MarketConfig {
    /// Market observables for one seed on `n` intervals, cut from a path
    /// sampled on `top` intervals so that meshes share the same path.
    pub fn signal(&self, seed: u64, n: usize, top: usize) -> roughhedge::Result<Arc<MarketSignal>> {
        if n == 0 || top % n != 0 {
            return Err(roughhedge::Error::Config(format!("mesh {n} does not divide {top}")));
        }
        let w = match self.crossing {
            None => brownian_trace(1, self.horizon, top, 1.0, &mut rng_for(seed, 0))?,
            Some(b) => {
                if self.model != Model::Bachelier {
                    return Err(roughhedge::Error::Config("`crossing` needs the bachelier model".into()));
                }
                let mut spec = GeneratorSpec::new(GeneratorKind::CrossingConditioned, 1, self.horizon, top, seed);
                spec.barrier = Some((b - self.s0) / self.sigma);
                gen_crossing_conditioned(&spec)?.path.trace().clone()
            }
        }
        .coarsen(top / n)?;
        let grid = w.grid().clone();
        let signal = match self.model {
            Model::Bachelier => {
                let s = TracePath::from_scalar(grid, w.values().iter().map(|x| self.s0 + self.sigma * x).collect())?;
                MarketSignal::scalar(&s, self.sigma)?
            }
            Model::BlackScholes => match self.vol {
                None => {
                    let s = gbm_from_brownian(&w, self.s0, &vec![self.sigma; w.len()])?;
                    MarketSignal::scalar(&s, self.sigma)?
                }
                Some(v) => {
                    let vol = match v {
                        VolConfig::Smooth { sigma0, amplitude, frequency } => {
                            gen_smooth_vol(&grid, SmoothVolParams { sigma0, amplitude, frequency })?
                        }
                        VolConfig::Brownian { sigma0, eta } => {
                            let b = brownian_trace(1, self.horizon, top, 1.0, &mut rng_for(seed, 1))?.coarsen(top / n)?;
                            TracePath::from_scalar(grid, b.values().iter().map(|x| sigma0 * (eta * x).exp()).collect())?
                        }
                    };
                    let s = gbm_from_brownian(&w, self.s0, &vol.component(0))?;
                    MarketSignal::with_vol(&s, &vol)?
                }
            },
        };
        Ok(Arc::new(signal))
    }
}
