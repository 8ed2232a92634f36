//! Instruments as (kind, parameters, maturity) evaluated on a [`MarketState`].

use super::bachelier::{asian_greeks_from_state, bachelier_greeks};
use super::barrier::{no_touch_greeks, smoothed_no_touch_greeks, BumpMollifier};
use super::black_scholes::{bs_call_greeks, bs_generic_greeks, bs_put_greeks};
use super::payoff::PayoffSpec;
use super::quadrature::Quadrature;
use super::{GreekSet, MarketState};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Debug;

pub trait Instrument: Send + Sync + Debug {
    fn name(&self) -> String;

    /// `f64::INFINITY` for instruments that never expire.
    fn maturity(&self) -> f64;

    fn greeks(&self, state: &MarketState) -> Result<GreekSet>;

    /// Whether the price depends on the volatility coordinate.
    fn uses_sigma(&self) -> bool {
        false
    }
}

fn default_nodes() -> usize {
    Quadrature::default().nodes
}

/// Instrument kinds that can be declared in a catalog file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstrumentSpec {
    /// The traded signal itself.
    Stock,
    BsCall { strike: f64, maturity: f64 },
    BsPut { strike: f64, maturity: f64 },
    BsGeneric {
        payoff: PayoffSpec,
        maturity: f64,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    /// Terminal payoff of the Bachelier signal.
    Bachelier { payoff: PayoffSpec, maturity: f64 },
    /// Payoff of the time average of the Bachelier signal over [0, T].
    Asian { payoff: PayoffSpec, maturity: f64 },
    NoTouch { barrier: f64, maturity: f64 },
    SmoothedNoTouch { barrier: f64, width: f64, maturity: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Catalog {
    #[serde(default)]
    instrument: Vec<InstrumentSpec>,
}

/// Reads `[[instrument]]` tables from TOML text.
pub fn parse_catalog(text: &str) -> Result<Vec<InstrumentSpec>> {
    let c: Catalog = toml::from_str(text).map_err(|e| Error::Config(format!("instrument catalog: {e}")))?;
    if c.instrument.is_empty() {
        return Err(Error::Config("instrument catalog declares no instruments".into()));
    }
    Ok(c.instrument)
}

impl InstrumentSpec {
    fn tau(&self, state: &MarketState) -> Result<f64> {
        let tau = self.maturity() - state.t;
        if !(state.t >= 0.0) || tau < -1e-12 * self.maturity().max(1.0) {
            return Err(Error::domain(format!("{} evaluated at t={} past maturity {}", self.name(), state.t, self.maturity())));
        }
        Ok(tau.max(0.0))
    }
}

impl Instrument for InstrumentSpec {
    fn name(&self) -> String {
        match self {
            InstrumentSpec::Stock => "stock".into(),
            InstrumentSpec::BsCall { strike, maturity } => format!("bs_call(K={strike},T={maturity})"),
            InstrumentSpec::BsPut { strike, maturity } => format!("bs_put(K={strike},T={maturity})"),
            InstrumentSpec::BsGeneric { payoff, maturity, .. } => format!("bs_generic({payoff:?},T={maturity})"),
            InstrumentSpec::Bachelier { payoff, maturity } => format!("bachelier({payoff:?},T={maturity})"),
            InstrumentSpec::Asian { payoff, maturity } => format!("asian({payoff:?},T={maturity})"),
            InstrumentSpec::NoTouch { barrier, maturity } => format!("no_touch(B={barrier},T={maturity})"),
            InstrumentSpec::SmoothedNoTouch { barrier, width, maturity } => {
                format!("smoothed_no_touch(B={barrier},b={width},T={maturity})")
            }
        }
    }

    fn maturity(&self) -> f64 {
        match *self {
            InstrumentSpec::Stock => f64::INFINITY,
            InstrumentSpec::BsCall { maturity, .. }
            | InstrumentSpec::BsPut { maturity, .. }
            | InstrumentSpec::BsGeneric { maturity, .. }
            | InstrumentSpec::Bachelier { maturity, .. }
            | InstrumentSpec::Asian { maturity, .. }
            | InstrumentSpec::NoTouch { maturity, .. }
            | InstrumentSpec::SmoothedNoTouch { maturity, .. } => maturity,
        }
    }

    fn uses_sigma(&self) -> bool {
        matches!(self, InstrumentSpec::BsCall { .. } | InstrumentSpec::BsPut { .. } | InstrumentSpec::BsGeneric { .. })
    }

    fn greeks(&self, state: &MarketState) -> Result<GreekSet> {
        let q = Quadrature::default();
        let s = state.spot;
        match self {
            InstrumentSpec::Stock => Ok(GreekSet { price: s, delta_s: 1.0, ..GreekSet::default() }),
            InstrumentSpec::BsCall { strike, .. } => bs_call_greeks(s, *strike, state.sigma, self.tau(state)?),
            InstrumentSpec::BsPut { strike, .. } => bs_put_greeks(s, *strike, state.sigma, self.tau(state)?),
            InstrumentSpec::BsGeneric { payoff, nodes, .. } => {
                bs_generic_greeks(payoff, s, state.sigma, self.tau(state)?, Quadrature::with_nodes(*nodes))
            }
            InstrumentSpec::Bachelier { payoff, .. } => bachelier_greeks(payoff, s, self.tau(state)?, q),
            InstrumentSpec::Asian { payoff, maturity } => {
                let tau = self.tau(state)?;
                if tau == 0.0 {
                    let avg = state.running_integral / maturity;
                    return bachelier_greeks(payoff, avg, 0.0, q).map(|mut g| {
                        g.delta_s = 0.0;
                        g
                    });
                }
                asian_greeks_from_state(payoff, state.running_integral, s, state.t, *maturity, q)
            }
            InstrumentSpec::NoTouch { barrier, .. } => {
                no_touch_greeks(*barrier, s, state.running_max.max(s), self.tau(state)?)
            }
            InstrumentSpec::SmoothedNoTouch { barrier, width, .. } => smoothed_no_touch_greeks(
                *barrier,
                *width,
                &BumpMollifier,
                s,
                state.running_max.max(s),
                self.tau(state)?,
                q,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_round_trip() {
        let text = r#"
            [[instrument]]
            kind = "stock"

            [[instrument]]
            kind = "bs_call"
            strike = 100.0
            maturity = 1.0

            [[instrument]]
            kind = "bachelier"
            maturity = 2.0
            payoff = { kind = "call", strike = 0.5 }
        "#;
        let c = parse_catalog(text).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[2], InstrumentSpec::Bachelier { payoff: PayoffSpec::Call { strike: 0.5 }, maturity: 2.0 });
        assert!(c[0].maturity().is_infinite());
        assert!(parse_catalog("[[instrument]]\nkind = \"bogus\"").is_err());
        assert!(parse_catalog("").is_err());
    }

    #[test]
    fn past_maturity_is_rejected() {
        let i = InstrumentSpec::BsCall { strike: 1.0, maturity: 1.0 };
        assert!(i.greeks(&MarketState::new(1.5, 1.0, 0.2)).is_err());
        let g = i.greeks(&MarketState::new(1.0, 1.2, 0.2)).unwrap();
        assert!((g.price - 0.2).abs() < 1e-15 && g.flags.gamma_undefined);
    }
}
