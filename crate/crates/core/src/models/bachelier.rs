//! Gaussian (Bachelier) pricers where the signal is the Brownian path itself.

use super::normal::pdf;
use super::payoff::Payoff;
use super::quadrature::{normal_expectation_graded, Quadrature};
use super::{GreekFlags, GreekSet};
use crate::error::{Error, Result};
use crate::roughpath::TracePath;

/// E f(X), E f′(X), E f″(X) for X ~ N(mean, sd²), the last including the
/// singular part at kinks. Missing derivatives come from central differences
/// in the mean and set the boolean.
fn gaussian_moments(f: &dyn Payoff, mean: f64, sd: f64, q: Quadrature) -> Result<(f64, f64, f64, bool)> {
    let kinks = f.kinks();
    let features = f.features();
    let in_z = |m: f64| -> Vec<(f64, f64)> { features.iter().map(|&(k, wd)| ((k - m) / sd, wd / sd)).collect() };
    let has_first = f.first(mean).is_some();
    let has_second = f.second(mean).is_some();
    let price_at = |m: f64| -> Result<f64> {
        Ok(normal_expectation_graded("gaussian price", q, &in_z(m), |z| [f.value(m + sd * z)])?[0])
    };
    let [p, e1, e2] = normal_expectation_graded("gaussian greeks", q, &in_z(mean), |z| {
        let x = mean + sd * z;
        [f.value(x), f.first(x).unwrap_or(0.0), f.second(x).unwrap_or(0.0)]
    })?;
    let h = 1e-4 * mean.abs().max(sd).max(1e-3);
    let e1 = if has_first {
        e1
    } else {
        (price_at(mean + h)? - price_at(mean - h)?) / (2.0 * h)
    };
    let e2 = if has_second {
        e2 + kinks.iter().map(|&(k, jump)| jump * pdf((k - mean) / sd) / sd).sum::<f64>()
    } else {
        (price_at(mean + h)? - 2.0 * p + price_at(mean - h)?) / (h * h)
    };
    Ok((p, e1, e2, !(has_first && has_second)))
}

/// Price E f(w + √τ Z) with delta E f′ and gamma E f″.
pub fn bachelier_greeks(f: &dyn Payoff, w: f64, tau: f64, q: Quadrature) -> Result<GreekSet> {
    if !(tau >= 0.0) || !w.is_finite() {
        return Err(Error::domain(format!("bachelier_greeks needs tau >= 0 and finite w (tau={tau}, w={w})")));
    }
    if tau == 0.0 {
        return Ok(GreekSet {
            price: f.value(w),
            delta_s: f.first(w).unwrap_or(f64::NAN),
            flags: GreekFlags { gamma_undefined: true, approximate: f.first(w).is_none(), ..GreekFlags::default() },
            ..GreekSet::default()
        });
    }
    let (p, e1, e2, approximate) = gaussian_moments(f, w, tau.sqrt(), q)?;
    Ok(GreekSet {
        price: p,
        delta_s: e1,
        gamma_ss: e2,
        theta: -0.5 * e2,
        flags: GreekFlags { approximate, ..GreekFlags::default() },
        ..GreekSet::default()
    })
}

/// Trapezoid rule for ∫_0^u W ds along the observed prefix.
pub fn running_integral(path: &TracePath) -> f64 {
    let times = path.grid().times();
    (0..path.len() - 1)
        .map(|k| 0.5 * (times[k + 1] - times[k]) * (path.value(k)[0] + path.value(k + 1)[0]))
        .sum()
}

/// Asian payoff f(A_T), A_T = (1/T)∫_0^T W ds, from the observed prefix.
pub fn asian_greeks(f: &dyn Payoff, path_to_date: &TracePath, maturity: f64, q: Quadrature) -> Result<GreekSet> {
    let u = path_to_date.grid().horizon();
    let w = path_to_date.value(path_to_date.len() - 1)[0];
    asian_greeks_from_state(f, running_integral(path_to_date), w, u, maturity, q)
}

/// Asian Greeks given I = ∫_0^u W ds and the current level w.
///
/// Theta is the derivative in u with W frozen at w, so that I also grows at
/// rate w. This is the dt coefficient in the expansion of the price along a path.
pub fn asian_greeks_from_state(
    f: &dyn Payoff,
    integral: f64,
    w: f64,
    u: f64,
    maturity: f64,
    q: Quadrature,
) -> Result<GreekSet> {
    if !(u < maturity) || !(u >= 0.0) {
        return Err(Error::domain(format!("asian_greeks needs 0 <= u < T (u={u}, T={maturity})")));
    }
    let rem = maturity - u;
    let mean = (integral + w * rem) / maturity;
    let var = rem.powi(3) / (3.0 * maturity * maturity);
    let (p, e1, e2, approximate) = gaussian_moments(f, mean, var.sqrt(), q)?;
    let h = rem / maturity;
    Ok(GreekSet {
        price: p,
        delta_s: h * e1,
        gamma_ss: h * h * e2,
        theta: -0.5 * h * h * e2,
        flags: GreekFlags { approximate, ..GreekFlags::default() },
        ..GreekSet::default()
    })
}
