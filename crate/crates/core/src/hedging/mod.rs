//! Discrete-time delta and gamma hedging along a sampled signal.
//!
//! Instruments enter the engine as [`Quote`]s: pricers already bound to one
//! signal path, returning price, delta and gamma with respect to the signal
//! coordinates at each grid index.

mod engine;
mod solve;
mod study;

pub use engine::{
    clark_ocone_check, clark_ocone_path, run_classical_gamma_hedge, run_full_gamma_hedge, run_hedge, HedgeOutcome, HedgePlan,
    WealthLedger,
};
pub use solve::{solve_weights, ConstraintRows, Solution};
pub use study::{convergence_study, fit_log2_slope, median, ConvergenceReport, ConvergenceRow, LevelSummary};

use crate::error::{Error, Result};
use crate::models::{Instrument, MarketState};
use crate::roughpath::{Tensor2, TimeGrid, TracePath};
use crate::signature::{signature_delta, signature_gamma, MultiIndex, SignatureTable};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HedgeMode {
    /// Match first derivatives in the traded coordinates.
    Delta,
    /// Match first and second derivatives in the traded coordinates.
    ClassicalGamma,
    /// Match first and second derivatives in every signal coordinate.
    FullGamma,
}

impl std::fmt::Display for HedgeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HedgeMode::Delta => "delta",
            HedgeMode::ClassicalGamma => "classical_gamma",
            HedgeMode::FullGamma => "full_gamma",
        })
    }
}

/// Price and first two derivatives in the signal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Exposure {
    pub price: f64,
    pub delta: Vec<f64>,
    /// Entry (j, k) is ∂Δ^k/∂X^j.
    pub gamma: Tensor2,
}

/// An instrument evaluated along one signal path.
pub trait Quote: Send + Sync {
    fn name(&self) -> String;

    fn grid(&self) -> &TimeGrid;

    fn dim(&self) -> usize;

    fn at(&self, k: usize) -> Result<Exposure>;
}

/// Observables of a market signal at every grid index: the spot path, the
/// volatility (a coordinate of the signal or a constant), and the running
/// maximum and integral of the spot.
#[derive(Clone, Debug)]
pub struct MarketSignal {
    grid: TimeGrid,
    spot: Vec<f64>,
    sigma: Vec<f64>,
    sigma_is_coordinate: bool,
    running_max: Vec<f64>,
    running_integral: Vec<f64>,
}

impl MarketSignal {
    /// One-dimensional signal with volatility held at `sigma`.
    pub fn scalar(trace: &TracePath, sigma: f64) -> Result<Self> {
        if trace.dim() != 1 {
            return Err(Error::domain("scalar market signal needs a one-dimensional trace"));
        }
        Ok(Self::build(trace.grid().clone(), trace.component(0), vec![sigma; trace.len()], false))
    }

    /// Two-dimensional signal (S, σ).
    pub fn with_vol(spot: &TracePath, vol: &TracePath) -> Result<Self> {
        if spot.dim() != 1 || vol.dim() != 1 || spot.grid() != vol.grid() {
            return Err(Error::domain("(S, sigma) signal needs two scalar traces on one grid"));
        }
        Ok(Self::build(spot.grid().clone(), spot.component(0), vol.component(0), true))
    }

    fn build(grid: TimeGrid, spot: Vec<f64>, sigma: Vec<f64>, sigma_is_coordinate: bool) -> Self {
        let mut running_max = Vec::with_capacity(spot.len());
        let mut running_integral = Vec::with_capacity(spot.len());
        let (mut m, mut acc) = (f64::NEG_INFINITY, 0.0);
        for k in 0..spot.len() {
            m = m.max(spot[k]);
            if k > 0 {
                acc += 0.5 * grid.dt(k - 1) * (spot[k - 1] + spot[k]);
            }
            running_max.push(m);
            running_integral.push(acc);
        }
        Self { grid, spot, sigma, sigma_is_coordinate, running_max, running_integral }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        if self.sigma_is_coordinate {
            2
        } else {
            1
        }
    }

    pub fn state(&self, k: usize) -> MarketState {
        MarketState {
            t: self.grid.times()[k],
            spot: self.spot[k],
            sigma: self.sigma[k],
            running_max: self.running_max[k],
            running_integral: self.running_integral[k],
        }
    }
}

/// A model instrument marked along a [`MarketSignal`].
#[derive(Clone, Debug)]
pub struct MarketQuote {
    instrument: Arc<dyn Instrument>,
    signal: Arc<MarketSignal>,
}

impl MarketQuote {
    pub fn new(instrument: Arc<dyn Instrument>, signal: Arc<MarketSignal>) -> Self {
        Self { instrument, signal }
    }

    pub fn instrument(&self) -> &dyn Instrument {
        self.instrument.as_ref()
    }
}

impl Quote for MarketQuote {
    fn name(&self) -> String {
        self.instrument.name()
    }

    fn grid(&self) -> &TimeGrid {
        self.signal.grid()
    }

    fn dim(&self) -> usize {
        self.signal.dim()
    }

    fn at(&self, k: usize) -> Result<Exposure> {
        let state = self.signal.state(k);
        let g = self.instrument.greeks(&state).map_err(|e| match e {
            Error::Domain(m) => Error::Domain(format!("{} at t={}: {m}", self.name(), state.t)),
            other => other,
        })?;
        Ok(if self.signal.sigma_is_coordinate {
            Exposure {
                price: g.price,
                delta: vec![g.delta_s, g.delta_sigma],
                gamma: Tensor2::from_row_major(
                    2,
                    vec![g.gamma_ss, g.gamma_s_sigma, g.gamma_s_sigma, g.gamma_sigma_sigma],
                ),
            }
        } else {
            Exposure { price: g.price, delta: vec![g.delta_s], gamma: Tensor2::scalar(g.gamma_ss) }
        })
    }
}

/// The signature payoff I_{α;T} priced by its conditional expectation.
#[derive(Clone, Debug)]
pub struct SignatureQuote {
    alpha: MultiIndex,
    table: Arc<SignatureTable>,
}

impl SignatureQuote {
    /// Fails with `MissingDependency` if the table lacks the indices α needs.
    pub fn new(alpha: MultiIndex, table: Arc<SignatureTable>) -> Result<Self> {
        for dep in SignatureTable::dependencies(&alpha) {
            if table.get(&dep).is_none() {
                return Err(Error::MissingDependency(format!("{dep} (needed by {alpha})")));
            }
        }
        Ok(Self { alpha, table })
    }
}

impl Quote for SignatureQuote {
    fn name(&self) -> String {
        format!("signature{}", self.alpha)
    }

    fn grid(&self) -> &TimeGrid {
        self.table.grid()
    }

    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn at(&self, k: usize) -> Result<Exposure> {
        Ok(Exposure {
            price: self.table.conditional_price(&self.alpha, k)?,
            delta: signature_delta(&self.alpha, k, &self.table)?,
            gamma: signature_gamma(&self.alpha, k, &self.table)?,
        })
    }
}
