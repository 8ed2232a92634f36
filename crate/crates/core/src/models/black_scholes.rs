//! Black–Scholes prices and Greeks at zero interest rate.

use super::normal::{cdf, pdf};
use super::payoff::Payoff;
use super::quadrature::{normal_expectation_graded, Quadrature};
use super::{GreekFlags, GreekSet};
use crate::error::{Error, Result};

fn check_inputs(s: f64, sigma: f64, tau: f64) -> Result<()> {
    if !(s > 0.0) || !(sigma > 0.0) || !(tau >= 0.0) || !s.is_finite() || !tau.is_finite() {
        return Err(Error::domain(format!(
            "Black-Scholes needs S > 0, sigma > 0, tau >= 0 (got S={s}, sigma={sigma}, tau={tau})"
        )));
    }
    Ok(())
}

/// European call with closed-form Greeks. At τ = 0 the intrinsic value is
/// returned and gamma is flagged undefined.
pub fn bs_call_greeks(s: f64, k: f64, sigma: f64, tau: f64) -> Result<GreekSet> {
    check_inputs(s, sigma, tau)?;
    if !(k > 0.0) {
        return Err(Error::domain(format!("strike must be positive, got {k}")));
    }
    if tau == 0.0 {
        return Ok(GreekSet {
            price: (s - k).max(0.0),
            delta_s: f64::from(s > k),
            flags: GreekFlags { gamma_undefined: true, ..GreekFlags::default() },
            ..GreekSet::default()
        });
    }
    let sd = sigma * tau.sqrt();
    let d1 = ((s / k).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    let n1 = pdf(d1);
    let vega = s * n1 * tau.sqrt();
    Ok(GreekSet {
        price: s * cdf(d1) - k * cdf(d2),
        delta_s: cdf(d1),
        delta_sigma: vega,
        gamma_ss: n1 / (s * sd),
        gamma_s_sigma: -n1 * d2 / sigma,
        gamma_sigma_sigma: vega * d1 * d2 / sigma,
        theta: -s * n1 * sigma / (2.0 * tau.sqrt()),
        flags: GreekFlags::default(),
    })
}

/// European put via put-call parity.
pub fn bs_put_greeks(s: f64, k: f64, sigma: f64, tau: f64) -> Result<GreekSet> {
    let mut g = bs_call_greeks(s, k, sigma, tau)?;
    g.price += k - s;
    g.delta_s -= 1.0;
    Ok(g)
}

/// Greeks of an arbitrary payoff under the lognormal law, from Gaussian
/// quadrature with the kernel differentiated in (log-mean, log-variance).
pub fn bs_generic_greeks(f: &dyn Payoff, s: f64, sigma: f64, tau: f64, q: Quadrature) -> Result<GreekSet> {
    check_inputs(s, sigma, tau)?;
    if tau == 0.0 {
        let (delta, approximate) = match f.first(s) {
            Some(d) => (d, false),
            None => {
                let h = 1e-6 * s;
                ((f.value(s + h) - f.value(s - h)) / (2.0 * h), true)
            }
        };
        return Ok(GreekSet {
            price: f.value(s),
            delta_s: delta,
            flags: GreekFlags { gamma_undefined: true, approximate, ..GreekFlags::default() },
            ..GreekSet::default()
        });
    }
    let sd = sigma * tau.sqrt();
    let v = sd * sd;
    let features: Vec<(f64, f64)> = f
        .features()
        .into_iter()
        .filter(|&(k, _)| k > 0.0)
        .map(|(k, width)| (((k / s).ln() + 0.5 * v) / sd, width / (k * sd)))
        .collect();
    // Likelihood-ratio weights in m = log S - v/2 and v = σ²τ.
    let [p, pm, pv, pmm, pmv, pvv] = normal_expectation_graded("bs_generic_greeks", q, &features, |z| {
        let fx = f.value(s * (sd * z - 0.5 * v).exp());
        let z2 = z * z;
        [
            fx,
            fx * z / sd,
            fx * (z2 - 1.0) / (2.0 * v),
            fx * (z2 - 1.0) / v,
            fx * z * (z2 - 3.0) / (2.0 * sd * v),
            fx * (z2 * z2 - 6.0 * z2 + 3.0) / (4.0 * v * v),
        ]
    })?;
    let (m_sig, v_sig) = (-sigma * tau, 2.0 * sigma * tau);
    Ok(GreekSet {
        price: p,
        delta_s: pm / s,
        delta_sigma: m_sig * pm + v_sig * pv,
        gamma_ss: (pmm - pm) / (s * s),
        gamma_s_sigma: (m_sig * pmm + v_sig * pmv) / s,
        gamma_sigma_sigma: m_sig * m_sig * pmm
            + 2.0 * m_sig * v_sig * pmv
            + v_sig * v_sig * pvv
            - tau * pm
            + 2.0 * tau * pv,
        theta: 0.5 * sigma * sigma * pm - sigma * sigma * pv,
        flags: GreekFlags::default(),
    })
}
