//! Signal generators.
//!
//! Randomness comes from ChaCha8 seeded with `seed` and switched to stream
//! `stream`, so runs that differ only in stream never share draws. Normal
//! variates are `rand_distr::StandardNormal` on that generator.

use crate::error::{Error, Result};
use crate::roughpath::{
    brownian_lift, ito_lift_brownian, reduced_lift_from_bracket, BracketPath, RoughPath, Tensor2, TimeGrid,
    TracePath,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SUBGRID: usize = 16;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    BrownianIto,
    PiecewiseLinearBrownianLift,
    DeterministicWithBracket,
    SmoothVol,
    CrossingConditioned,
}

fn one() -> f64 {
    1.0
}
fn default_subgrid() -> usize {
    DEFAULT_SUBGRID
}
fn default_attempts() -> usize {
    100_000
}

/// `steps` is the number of grid intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default = "usize_one")]
    pub dim: usize,
    #[serde(default = "one")]
    pub horizon: f64,
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default = "default_subgrid")]
    pub subgrid_factor: usize,
    /// Multiplies the Brownian increments.
    #[serde(default = "one")]
    pub vol_scale: f64,
    #[serde(default)]
    pub barrier: Option<f64>,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    #[serde(default)]
    pub vol: Option<SmoothVolParams>,
}

fn usize_one() -> usize {
    1
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, dim: usize, horizon: f64, steps: usize, seed: u64) -> Self {
        Self {
            kind,
            dim,
            horizon,
            steps,
            seed,
            stream: 0,
            subgrid_factor: DEFAULT_SUBGRID,
            vol_scale: 1.0,
            barrier: None,
            max_attempts: default_attempts(),
            vol: None,
        }
    }

    fn grid(&self) -> Result<TimeGrid> {
        if self.steps < 1 || self.dim < 1 {
            return Err(Error::config(format!("generator needs steps >= 1 and dim >= 1 (steps={}, dim={})", self.steps, self.dim)));
        }
        TimeGrid::uniform(self.horizon, self.steps)
    }
}

/// Brownian trace with `steps` intervals, scaled by `scale`.
pub fn brownian_trace(dim: usize, horizon: f64, steps: usize, scale: f64, rng: &mut impl Rng) -> Result<TracePath> {
    let grid = TimeGrid::uniform(horizon, steps)?;
    let sd = scale * (horizon / steps as f64).sqrt();
    let mut values = vec![0.0; (steps + 1) * dim];
    for k in 0..steps {
        for i in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            values[(k + 1) * dim + i] = values[k * dim + i] + sd * z;
        }
    }
    TracePath::new(grid, dim, values)
}

/// A Brownian sample drawn once at its finest resolution, from which
/// consistent Itô-lifted paths on coarser dyadic grids are cut.
#[derive(Clone, Debug)]
pub struct BrownianSample {
    fine: TracePath,
    steps: usize,
    subgrid_factor: usize,
}

impl BrownianSample {
    pub fn draw(spec: &GeneratorSpec) -> Result<Self> {
        spec.grid()?;
        let sub = if spec.dim == 1 { 1 } else { spec.subgrid_factor.max(1) };
        let mut rng = rng_for(spec.seed, spec.stream);
        let fine = brownian_trace(spec.dim, spec.horizon, spec.steps * sub, spec.vol_scale, &mut rng)?;
        Ok(Self { fine, steps: spec.steps, subgrid_factor: sub })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn subgrid_factor(&self) -> usize {
        self.subgrid_factor
    }

    /// Trace on `steps` intervals, which must divide the drawn resolution.
    pub fn trace(&self, steps: usize) -> Result<TracePath> {
        if steps == 0 || self.steps % steps != 0 {
            return Err(Error::config(format!("{steps} steps do not divide the drawn {}", self.steps)));
        }
        self.fine.coarsen(self.steps / steps * self.subgrid_factor)
    }

    /// Itô-lifted path on `steps` intervals; in d ≥ 2 the lift uses the
    /// sample `subgrid_factor` times finer than the returned grid.
    pub fn ito(&self, steps: usize) -> Result<RoughPath> {
        let trace = self.trace(steps)?;
        if self.fine.dim() == 1 {
            return ito_lift_brownian(&trace, None, 1);
        }
        let refined = self.fine.coarsen(self.steps / steps)?;
        ito_lift_brownian(&trace, Some(&refined), self.subgrid_factor)
    }
}

pub fn gen_brownian_ito(spec: &GeneratorSpec) -> Result<RoughPath> {
    BrownianSample::draw(spec)?.ito(spec.steps)
}

/// Brownian lift of a piecewise-linear trace.
pub fn gen_piecewise_linear_pseudo_brownian(base: &TracePath) -> RoughPath {
    brownian_lift(base)
}

/// Samples `trace` on the grid and attaches the reduced lift whose bracket is
/// the trapezoid integral of `rate(t, x)`, a symmetric PSD matrix.
pub fn gen_deterministic_with_bracket(
    grid: TimeGrid,
    dim: usize,
    trace: impl Fn(f64) -> Vec<f64>,
    rate: impl Fn(f64, &[f64]) -> Tensor2,
) -> Result<RoughPath> {
    let path = TracePath::from_fn(grid.clone(), dim, trace)?;
    let times = grid.times();
    let rates: Vec<Tensor2> = (0..path.len()).map(|k| rate(times[k], path.value(k))).collect();
    let mut values = vec![Tensor2::zeros(dim)];
    for k in 0..path.len() - 1 {
        let mut inc = &rates[k] + &rates[k + 1];
        inc = &inc * (0.5 * grid.dt(k));
        check_psd(&inc, times[k])?;
        let next = &values[k] + &inc;
        values.push(next);
    }
    reduced_lift_from_bracket(&path, &BracketPath::new(grid, values)?)
}

fn check_psd(m: &Tensor2, t: f64) -> Result<()> {
    let d = m.dim();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    if !m.is_symmetric(1e-12 * scale) {
        return Err(Error::domain(format!("bracket increment at t={t} is not symmetric")));
    }
    let mat = DMatrix::from_row_slice(d, d, m.as_slice());
    let low = mat.symmetric_eigenvalues().min();
    if low < -1e-12 * scale {
        return Err(Error::domain(format!("bracket increment at t={t} has eigenvalue {low:e} < 0")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothVolParams {
    pub sigma0: f64,
    pub amplitude: f64,
    /// Angular frequency ω.
    pub frequency: f64,
}

/// σ_t = σ₀ + a·sin(ωt) on the grid.
pub fn gen_smooth_vol(grid: &TimeGrid, p: SmoothVolParams) -> Result<TracePath> {
    if !(p.sigma0 - p.amplitude.abs() > 0.0) {
        return Err(Error::domain(format!(
            "volatility path can reach {} <= 0",
            p.sigma0 - p.amplitude.abs()
        )));
    }
    TracePath::from_fn(grid.clone(), 1, |t| vec![p.sigma0 + p.amplitude * (p.frequency * t).sin()])
}

/// A path conditioned on its grid maximum exceeding the barrier.
#[derive(Clone, Debug)]
pub struct CrossingPath {
    pub path: RoughPath,
    /// First grid index with W > B.
    pub crossing_index: usize,
    pub attempts: usize,
}

/// Rejection sampling over streams `stream, stream + 1, …`.
pub fn gen_crossing_conditioned(spec: &GeneratorSpec) -> Result<CrossingPath> {
    if spec.dim != 1 {
        return Err(Error::config("crossing-conditioned generator is one-dimensional"));
    }
    let barrier = spec.barrier.ok_or_else(|| Error::config("crossing-conditioned generator needs a barrier"))?;
    for attempt in 0..spec.max_attempts {
        let mut rng = rng_for(spec.seed, spec.stream + attempt as u64);
        let trace = brownian_trace(1, spec.horizon, spec.steps, spec.vol_scale, &mut rng)?;
        if let Some(k) = trace.values().iter().position(|&w| w > barrier) {
            return Ok(CrossingPath { path: ito_lift_brownian(&trace, None, 1)?, crossing_index: k, attempts: attempt + 1 });
        }
    }
    Err(Error::SamplingExhausted { attempts: spec.max_attempts as u64, accepted: 0 })
}

/// Dispatch on `spec.kind` for the kinds that need no callables.
pub fn generate(spec: &GeneratorSpec) -> Result<RoughPath> {
    match spec.kind {
        GeneratorKind::BrownianIto => gen_brownian_ito(spec),
        GeneratorKind::PiecewiseLinearBrownianLift => {
            let mut rng = rng_for(spec.seed, spec.stream);
            let base = brownian_trace(spec.dim, spec.horizon, spec.steps, spec.vol_scale, &mut rng)?;
            Ok(gen_piecewise_linear_pseudo_brownian(&base))
        }
        GeneratorKind::CrossingConditioned => gen_crossing_conditioned(spec).map(|c| c.path),
        GeneratorKind::SmoothVol => {
            let p = spec.vol.ok_or_else(|| Error::config("smooth_vol generator needs [vol] parameters"))?;
            let trace = gen_smooth_vol(&spec.grid()?, p)?;
            Ok(crate::roughpath::geometric_lift(&trace))
        }
        GeneratorKind::DeterministicWithBracket => {
            // constant-volatility sine signal, the adversarial default
            let p = spec.vol.unwrap_or(SmoothVolParams { sigma0: 0.2, amplitude: 0.0, frequency: 0.0 });
            let s2 = p.sigma0 * p.sigma0;
            gen_deterministic_with_bracket(spec.grid()?, 1, |t| vec![t.sin()], move |_, _| Tensor2::scalar(s2))
        }
    }
}

/// S = S₀ exp(∫σ dW − ½∫σ² dt) with left-point sums, from a scalar Brownian
/// trace and a volatility path on the same grid.
pub fn gbm_from_brownian(w: &TracePath, s0: f64, sigma: &[f64]) -> Result<TracePath> {
    if w.dim() != 1 || sigma.len() != w.len() {
        return Err(Error::domain("gbm_from_brownian needs a scalar trace and one volatility per grid point"));
    }
    let grid = w.grid();
    let mut values = Vec::with_capacity(w.len());
    let mut log_s = s0.ln();
    values.push(s0);
    for k in 0..w.len() - 1 {
        log_s += sigma[k] * (w.value(k + 1)[0] - w.value(k)[0]) - 0.5 * sigma[k] * sigma[k] * grid.dt(k);
        values.push(log_s.exp());
    }
    TracePath::from_scalar(grid.clone(), values)
}

/// The (S, σ) signal as a two-dimensional trace.
pub fn stack_signal(s: &TracePath, sigma: &TracePath) -> Result<TracePath> {
    if s.grid() != sigma.grid() || s.dim() != 1 || sigma.dim() != 1 {
        return Err(Error::domain("stack_signal needs two scalar traces on one grid"));
    }
    let values = s.values().iter().zip(sigma.values()).flat_map(|(&a, &b)| [a, b]).collect();
    TracePath::new(s.grid().clone(), 2, values)
}

/// Reduced lift of a Black–Scholes price path with bracket Σ σ²S² Δt (left point).
pub fn bs_reduced_lift(s: &TracePath, sigma: &[f64]) -> Result<RoughPath> {
    if s.dim() != 1 || sigma.len() != s.len() {
        return Err(Error::domain("bs_reduced_lift needs a scalar trace and one volatility per grid point"));
    }
    let grid = s.grid();
    let mut acc = 0.0;
    let mut values = vec![Tensor2::scalar(0.0)];
    for k in 0..s.len() - 1 {
        let x = s.value(k)[0];
        acc += sigma[k] * sigma[k] * x * x * grid.dt(k);
        values.push(Tensor2::scalar(acc));
    }
    reduced_lift_from_bracket(s, &BracketPath::new(grid.clone(), values)?)
}
