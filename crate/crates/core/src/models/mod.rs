//! Pricers with full Greek sets, plus the identity, rank and PDE checks.

pub mod bachelier;
pub mod barrier;
pub mod black_scholes;
pub mod instrument;
pub mod normal;
pub mod payoff;
pub mod quadrature;

pub use bachelier::{asian_greeks, asian_greeks_from_state, bachelier_greeks, running_integral};
pub use barrier::{no_touch_greeks, smoothed_no_touch_greeks, BumpMollifier, Mollifier};
pub use black_scholes::{bs_call_greeks, bs_generic_greeks, bs_put_greeks};
pub use instrument::{Instrument, InstrumentSpec};
pub use payoff::{FnPayoff, Payoff, PayoffSpec};
pub use quadrature::Quadrature;

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreekFlags {
    /// Set at τ = 0, where the second derivative does not exist in general.
    pub gamma_undefined: bool,
    /// Some derivative came from finite differences.
    pub approximate: bool,
    pub knocked_out: bool,
}

/// Price and derivatives in (S, σ) and t. Instruments on a Bachelier signal
/// fill only the S-block and theta.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GreekSet {
    pub price: f64,
    pub delta_s: f64,
    pub delta_sigma: f64,
    pub gamma_ss: f64,
    pub gamma_s_sigma: f64,
    pub gamma_sigma_sigma: f64,
    pub theta: f64,
    pub flags: GreekFlags,
}

impl GreekSet {
    /// `[price, ∂S, ∂σ, ∂SS, ∂Sσ, ∂σσ, ∂t]`
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.price,
            self.delta_s,
            self.delta_sigma,
            self.gamma_ss,
            self.gamma_s_sigma,
            self.gamma_sigma_sigma,
            self.theta,
        ]
    }

    /// The row `(∂S, ∂σ, ∂SS, ∂Sσ, ∂σσ)`.
    pub fn sensitivities(&self) -> [f64; 5] {
        [self.delta_s, self.delta_sigma, self.gamma_ss, self.gamma_s_sigma, self.gamma_sigma_sigma]
    }
}

/// Observables at time t. For Bachelier instruments `spot` is the level of W.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub t: f64,
    pub spot: f64,
    pub sigma: f64,
    /// Running maximum of the signal, used by barrier instruments.
    pub running_max: f64,
    /// ∫_0^t signal ds, used by Asian instruments.
    pub running_integral: f64,
}

impl MarketState {
    /// State at time t with no history: running max equal to spot, zero integral.
    pub fn new(t: f64, spot: f64, sigma: f64) -> Self {
        Self { t, spot, sigma, running_max: spot, running_integral: 0.0 }
    }
}

/// σ τ S² ∂²V/∂S² − ∂V/∂σ, which vanishes for Black–Scholes Europeans.
pub fn vega_gamma_identity_defect(g: &GreekSet, s: f64, sigma: f64, tau: f64) -> f64 {
    sigma * tau * s * s * g.gamma_ss - g.delta_sigma
}

/// Numerical rank of the n×5 sensitivity matrix: singular values above
/// `tol` times the largest.
pub fn greeks_matrix_rank(instruments: &[&dyn Instrument], state: &MarketState, tol: f64) -> Result<usize> {
    let rows = instruments
        .iter()
        .map(|i| i.greeks(state).map(|g| g.sensitivities()))
        .collect::<Result<Vec<_>>>()?;
    Ok(sensitivity_rank(&rows, tol))
}

pub(crate) fn sensitivity_rank<const K: usize>(rows: &[[f64; K]], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), K, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// |∂V/∂t + ½σ²S²∂²V/∂S²| with ∂t from a central difference of step `h`
/// and gamma from the instrument.
pub fn bs_pde_residual(instrument: &dyn Instrument, state: &MarketState, h: f64) -> Result<f64> {
    if !(h > 0.0) || state.t - h < 0.0 || state.t + h >= instrument.maturity() {
        return Err(Error::domain(format!("time bump {h} leaves [0, T) around t={}", state.t)));
    }
    let g = instrument.greeks(state)?;
    let up = instrument.greeks(&MarketState { t: state.t + h, ..*state })?.price;
    let dn = instrument.greeks(&MarketState { t: state.t - h, ..*state })?.price;
    let dt = (up - dn) / (2.0 * h);
    Ok((dt + 0.5 * state.sigma * state.sigma * state.spot * state.spot * g.gamma_ss).abs())
}
