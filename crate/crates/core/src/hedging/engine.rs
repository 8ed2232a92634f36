use super::solve::{solve_weights, ConstraintRows};
use super::{Exposure, HedgeMode, Quote};
use crate::error::{Error, Result};
use crate::models::sensitivity_rank;
use crate::roughpath::RoughPath;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgePlan {
    pub mode: HedgeMode,
    /// Leading signal coordinates that are traded. `None` means all of them.
    #[serde(default)]
    pub traded: Option<usize>,
    /// Relative residual tolerance for the matched block.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Weights above this magnitude are reported as a warning.
    #[serde(default = "default_cap")]
    pub weight_cap: f64,
    /// Stop hedging at this time. `None` runs to the end of the grid.
    #[serde(default)]
    pub horizon: Option<f64>,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_cap() -> f64 {
    1e6
}

impl HedgePlan {
    pub fn new(mode: HedgeMode) -> Self {
        Self { mode, traded: None, tol: default_tol(), weight_cap: default_cap(), horizon: None }
    }

    pub fn traded(mut self, m: usize) -> Self {
        self.traded = Some(m);
        self
    }

    pub fn horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }
}

/// Everything the engine did, index by index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WealthLedger {
    pub times: Vec<f64>,
    pub wealth: Vec<f64>,
    pub target: Vec<f64>,
    /// Hedger prices at each index.
    pub prices: Vec<Vec<f64>>,
    /// Holdings chosen at each index (the last entry repeats the final position).
    pub holdings: Vec<Vec<f64>>,
    pub cash: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl WealthLedger {
    fn value(q: &[f64], p: &[f64]) -> f64 {
        q.iter().zip(p).map(|(a, b)| a * b).sum()
    }

    /// Largest change in portfolio value caused by rebalancing itself.
    pub fn self_financing_defect(&self) -> f64 {
        (1..self.holdings.len())
            .map(|k| {
                let before = Self::value(&self.holdings[k - 1], &self.prices[k]) + self.cash[k - 1];
                let after = Self::value(&self.holdings[k], &self.prices[k]) + self.cash[k];
                (before - after).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Hedging error Π − V at every index.
    pub fn errors(&self) -> Vec<f64> {
        self.wealth.iter().zip(&self.target).map(|(w, v)| w - v).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HedgeOutcome {
    pub mode: HedgeMode,
    pub ledger: WealthLedger,
    /// |Π − V| at the last hedged index.
    pub final_error: f64,
    pub max_residual: f64,
    pub warnings: Vec<String>,
}

type StepCheck<'a> = dyn Fn(f64, &[Exposure]) -> Result<()> + 'a;

fn run_with(plan: &HedgePlan, target: &dyn Quote, hedgers: &[&dyn Quote], check: &StepCheck) -> Result<HedgeOutcome> {
    if hedgers.is_empty() {
        return Err(Error::config("no hedging instruments"));
    }
    let grid = target.grid();
    for h in hedgers {
        if h.grid() != grid || h.dim() != target.dim() {
            return Err(Error::config(format!("hedger {} lives on a different signal", h.name())));
        }
    }
    let end = match plan.horizon {
        Some(t) => grid.index_of(t)?,
        None => grid.len() - 1,
    };
    if end == 0 {
        return Err(Error::config("hedging horizon must be after the start"));
    }
    let traded = plan.traded.unwrap_or(target.dim());
    let shortcut = hedgers.iter().position(|h| h.name() == target.name());

    let mut ledger = WealthLedger::default();
    let mut warnings = Vec::new();
    let mut max_residual = 0.0_f64;
    let mut q: Vec<f64> = Vec::new();
    let mut cash = 0.0;
    for k in 0..=end {
        let t = grid.times()[k];
        let tgt = target.at(k)?;
        let hx: Vec<Exposure> = hedgers.iter().map(|h| h.at(k)).collect::<Result<_>>()?;
        let prices: Vec<f64> = hx.iter().map(|e| e.price).collect();
        let wealth = if k == 0 { tgt.price } else { cash + WealthLedger::value(&q, &prices) };
        if k < end {
            let (weights, residual) = match shortcut {
                Some(j) => {
                    let mut w = vec![0.0; hx.len()];
                    w[j] = 1.0;
                    (w, 0.0)
                }
                None => {
                    check(t, &hx)?;
                    let mut all: Vec<&Exposure> = hx.iter().collect();
                    all.push(&tgt);
                    let rows = ConstraintRows::for_exposures(plan.mode, traded, &all);
                    let s = solve_weights(&hx, &tgt, &rows, plan.tol, t)?;
                    (s.weights, s.residual)
                }
            };
            if let Some(w) = weights.iter().find(|w| w.abs() > plan.weight_cap) {
                warnings.push(format!("weight {w:.3e} at t={t} exceeds cap {:.1e}", plan.weight_cap));
            }
            max_residual = max_residual.max(residual);
            q = weights;
            cash = wealth - WealthLedger::value(&q, &prices);
            ledger.residuals.push(residual);
        }
        ledger.times.push(t);
        ledger.wealth.push(wealth);
        ledger.target.push(tgt.price);
        ledger.prices.push(prices);
        ledger.holdings.push(q.clone());
        ledger.cash.push(cash);
    }
    let final_error = (ledger.wealth[end] - ledger.target[end]).abs();
    Ok(HedgeOutcome { mode: plan.mode, ledger, final_error, max_residual, warnings })
}

/// Self-financing hedge of `target` with `hedgers`, rebalanced at every grid
/// index before the horizon and marked to model in between.
pub fn run_hedge(plan: &HedgePlan, target: &dyn Quote, hedgers: &[&dyn Quote]) -> Result<HedgeOutcome> {
    run_with(plan, target, hedgers, &|_, _| Ok(()))
}

/// Classical gamma hedge with the stock and one convex option. Fails with
/// `ConvexityViolated` if the option's gamma is not positive at a rebalance.
pub fn run_classical_gamma_hedge(
    plan: &HedgePlan,
    target: &dyn Quote,
    stock: &dyn Quote,
    option: &dyn Quote,
) -> Result<HedgeOutcome> {
    let plan = HedgePlan { mode: HedgeMode::ClassicalGamma, traded: Some(plan.traded.unwrap_or(1)), ..plan.clone() };
    let name = option.name();
    run_with(&plan, target, &[stock, option], &|t, hx| {
        let g = hx[1].gamma[(0, 0)];
        if g > 0.0 {
            Ok(())
        } else {
            Err(Error::ConvexityViolated { name: name.clone(), time: t, gamma: g })
        }
    })
}

/// Full gamma hedge on an (S, σ) signal. The hedgers' sensitivity matrix
/// must have rank at least 4 at every rebalance.
pub fn run_full_gamma_hedge(plan: &HedgePlan, target: &dyn Quote, hedgers: &[&dyn Quote]) -> Result<HedgeOutcome> {
    if target.dim() != 2 {
        return Err(Error::config("full gamma hedging needs an (S, sigma) signal"));
    }
    let plan = HedgePlan { mode: HedgeMode::FullGamma, ..plan.clone() };
    run_with(&plan, target, hedgers, &|t, hx| {
        let rows: Vec<[f64; 5]> = hx
            .iter()
            .map(|e| [e.delta[0], e.delta[1], e.gamma[(0, 0)], e.gamma[(0, 1)], e.gamma[(1, 1)]])
            .collect();
        let rank = sensitivity_rank(&rows, 1e-8);
        if rank < 4 {
            Err(Error::RankDeficient { rank, required: 4, time: t })
        } else {
            Ok(())
        }
    })
}

/// Running defect price_k − price_0 − Σ (Δ·δX + Γ:𝕏) along `rp` up to index `upto`.
pub fn clark_ocone_path(quote: &dyn Quote, rp: &RoughPath, upto: usize) -> Result<Vec<f64>> {
    if rp.grid() != quote.grid() || rp.dim() != quote.dim() {
        return Err(Error::config("quote and rough path live on different grids"));
    }
    if upto >= rp.len() {
        return Err(Error::domain(format!("index {upto} beyond the grid")));
    }
    let first = quote.at(0)?;
    let mut acc = 0.0;
    let mut out = vec![0.0];
    let mut cur = first.clone();
    for k in 0..upto {
        let x = rp.trace().increment(k, k + 1);
        acc += cur.delta.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + cur.gamma.contract(&rp.step_lift_tensor(k));
        cur = quote.at(k + 1)?;
        out.push(cur.price - first.price - acc);
    }
    Ok(out)
}

/// Sup-norm of [`clark_ocone_path`].
pub fn clark_ocone_check(quote: &dyn Quote, rp: &RoughPath, upto: usize) -> Result<f64> {
    Ok(clark_ocone_path(quote, rp, upto)?.iter().fold(0.0, |m, v| m.max(v.abs())))
}
