//! Terminal payoffs with the derivative information the pricers need.

use serde::{Deserialize, Serialize};
use std::fmt::Debug;

/// A payoff f on the terminal level.
///
/// `first` and `second` give f′ and the absolutely continuous part of f″
/// where they exist. Points where f′ jumps are listed by `kinks` as
/// `(location, jump of f′)`, so that E f″ can include the singular part.
pub trait Payoff: Send + Sync + Debug {
    fn value(&self, x: f64) -> f64;

    fn first(&self, _x: f64) -> Option<f64> {
        None
    }

    fn second(&self, _x: f64) -> Option<f64> {
        None
    }

    fn kinks(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    /// `(location, width)` of regions where f varies sharply, so quadrature
    /// can refine there. Kinks are reported with width 0.
    fn features(&self) -> Vec<(f64, f64)> {
        self.kinks().into_iter().map(|(k, _)| (k, 0.0)).collect()
    }
}

/// Payoffs that can be declared in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayoffSpec {
    Linear,
    Quadratic,
    Call { strike: f64 },
    Put { strike: f64 },
    /// w log(1 + e^{(x-K)/w}), a smooth convex call.
    SoftCall { strike: f64, width: f64 },
    /// Logistic step centred at `center`.
    SmoothStep { center: f64, width: f64 },
    Log,
}

impl Payoff for PayoffSpec {
    fn value(&self, x: f64) -> f64 {
        match *self {
            PayoffSpec::Linear => x,
            PayoffSpec::Quadratic => x * x,
            PayoffSpec::Call { strike } => (x - strike).max(0.0),
            PayoffSpec::Put { strike } => (strike - x).max(0.0),
            PayoffSpec::SoftCall { strike, width } => {
                let u = (x - strike) / width;
                width * (u.max(0.0) + (-u.abs()).exp().ln_1p())
            }
            PayoffSpec::SmoothStep { center, width } => logistic((x - center) / width),
            PayoffSpec::Log => x.ln(),
        }
    }

    fn first(&self, x: f64) -> Option<f64> {
        Some(match *self {
            PayoffSpec::Linear => 1.0,
            PayoffSpec::Quadratic => 2.0 * x,
            PayoffSpec::Call { strike } => f64::from(x > strike),
            PayoffSpec::Put { strike } => -f64::from(x < strike),
            PayoffSpec::SoftCall { strike, width } => logistic((x - strike) / width),
            PayoffSpec::SmoothStep { center, width } => {
                let l = logistic((x - center) / width);
                l * (1.0 - l) / width
            }
            PayoffSpec::Log => 1.0 / x,
        })
    }

    fn second(&self, x: f64) -> Option<f64> {
        Some(match *self {
            PayoffSpec::Linear | PayoffSpec::Call { .. } | PayoffSpec::Put { .. } => 0.0,
            PayoffSpec::Quadratic => 2.0,
            PayoffSpec::SoftCall { strike, width } => {
                let l = logistic((x - strike) / width);
                l * (1.0 - l) / width
            }
            PayoffSpec::SmoothStep { center, width } => {
                let l = logistic((x - center) / width);
                l * (1.0 - l) * (1.0 - 2.0 * l) / (width * width)
            }
            PayoffSpec::Log => -1.0 / (x * x),
        })
    }

    fn kinks(&self) -> Vec<(f64, f64)> {
        match *self {
            PayoffSpec::Call { strike } | PayoffSpec::Put { strike } => vec![(strike, 1.0)],
            _ => Vec::new(),
        }
    }

    fn features(&self) -> Vec<(f64, f64)> {
        match *self {
            PayoffSpec::Call { strike } | PayoffSpec::Put { strike } => vec![(strike, 0.0)],
            PayoffSpec::SoftCall { strike: c, width } | PayoffSpec::SmoothStep { center: c, width } => vec![(c, width)],
            _ => Vec::new(),
        }
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Wraps a closure that only knows f; derivative-based Greeks fall back to
/// finite differences and are flagged approximate.
pub struct FnPayoff<F>(pub F);

impl<F> Debug for FnPayoff<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FnPayoff")
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Payoff for FnPayoff<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}
