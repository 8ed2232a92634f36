//! No-touch options on a constant upper barrier in the Bachelier model, raw
//! and mollified over the barrier level.

use super::normal::{cdf, pdf};
use super::quadrature::{composite_legendre, Quadrature};
use super::{GreekFlags, GreekSet};
use crate::error::{Error, Result};
use std::fmt::Debug;
use std::sync::OnceLock;

fn check_state(w: f64, m: f64, tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !w.is_finite() || !m.is_finite() {
        return Err(Error::domain(format!("barrier pricer needs tau >= 0 and finite state (tau={tau})")));
    }
    if m < w - 1e-12 * w.abs().max(1.0) {
        return Err(Error::domain(format!("running max {m} below current level {w}")));
    }
    Ok(())
}

fn knocked_out() -> GreekSet {
    GreekSet { flags: GreekFlags { knocked_out: true, ..GreekFlags::default() }, ..GreekSet::default() }
}

/// Pays 1 at T if the path stays strictly below `barrier`.
///
/// Delta and gamma are the derivatives of the price in the current level, so
/// delta is negative and tends to −2φ(0)/√τ as the level approaches the barrier.
pub fn no_touch_greeks(barrier: f64, w: f64, m: f64, tau: f64) -> Result<GreekSet> {
    check_state(w, m, tau)?;
    if m >= barrier {
        return Ok(knocked_out());
    }
    if tau == 0.0 {
        return Ok(GreekSet {
            price: 1.0,
            flags: GreekFlags { gamma_undefined: true, ..GreekFlags::default() },
            ..GreekSet::default()
        });
    }
    let st = tau.sqrt();
    let d = barrier - w;
    let phi = pdf(d / st);
    let gamma = -2.0 * d * phi / (tau * st);
    Ok(GreekSet {
        price: 2.0 * cdf(d / st) - 1.0,
        delta_s: -2.0 * phi / st,
        gamma_ss: gamma,
        theta: -0.5 * gamma,
        ..GreekSet::default()
    })
}

/// A smooth probability density supported on [-1, 1].
pub trait Mollifier: Send + Sync + Debug {
    fn density(&self, y: f64) -> f64;

    /// ∫_{-1}^{y} density.
    fn cdf(&self, y: f64) -> f64 {
        let y = y.clamp(-1.0, 1.0);
        let breaks = panel_breaks(-1.0, y, 0.125);
        composite_legendre(&breaks, 32, |x| [self.density(x)])[0]
    }
}

/// c·exp(−1/(1−y²)) on (−1, 1).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BumpMollifier;

impl BumpMollifier {
    fn raw(y: f64) -> f64 {
        if y.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - y * y)).exp()
        }
    }

    fn normalizer() -> f64 {
        static C: OnceLock<f64> = OnceLock::new();
        *C.get_or_init(|| {
            let breaks = panel_breaks(-1.0, 1.0, 0.0625);
            1.0 / composite_legendre(&breaks, 40, |y| [Self::raw(y)])[0]
        })
    }
}

impl Mollifier for BumpMollifier {
    fn density(&self, y: f64) -> f64 {
        Self::normalizer() * Self::raw(y)
    }
}

fn panel_breaks(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = (((b - a) / width).ceil() as usize).max(1);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// No-touch payoff averaged over barrier levels B − b·y, y distributed by the
/// mollifier. Each shifted barrier is knocked out against the running max.
pub fn smoothed_no_touch_greeks(
    barrier: f64,
    b: f64,
    mollifier: &dyn Mollifier,
    w: f64,
    m: f64,
    tau: f64,
    q: Quadrature,
) -> Result<GreekSet> {
    if !(b > 0.0) {
        return Err(Error::domain(format!("mollifier scale must be positive, got {b}")));
    }
    check_state(w, m, tau)?;
    // shifted barrier B - b y is alive iff y < (B - m)/b
    let upper = ((barrier - m) / b).min(1.0);
    if upper <= -1.0 {
        return Ok(knocked_out());
    }
    if tau == 0.0 {
        return Ok(GreekSet {
            price: mollifier.cdf(upper),
            flags: GreekFlags { gamma_undefined: true, ..GreekFlags::default() },
            ..GreekSet::default()
        });
    }
    let st = tau.sqrt();
    let centre = (barrier - w) / b;
    let mut breaks = panel_breaks(-1.0, upper, 0.25);
    // the integrand varies on the scale √τ/b just below y = (B − w)/b
    let mut step = 0.25 * st / b;
    while centre - step > -1.0 && step < 2.0 {
        if centre - step < upper {
            breaks.push(centre - step);
        }
        step *= 2.0;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let [p, d, g] = q.run("smoothed_no_touch_greeks", |n| {
        composite_legendre(&breaks, (n / 8).max(8), |y| {
            let rho = mollifier.density(y);
            let dist = b * (centre - y);
            let phi = pdf(dist / st);
            [
                rho * (2.0 * cdf(dist / st) - 1.0),
                -rho * 2.0 * phi / st,
                -rho * 2.0 * dist * phi / (tau * st),
            ]
        })
    })?;
    Ok(GreekSet { price: p, delta_s: d, gamma_ss: g, theta: -0.5 * g, ..GreekSet::default() })
}
