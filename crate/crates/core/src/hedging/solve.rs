use super::{Exposure, HedgeMode};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Row {
    Delta(usize),
    Gamma(usize, usize),
}

/// The derivative entries a hedge must match, one row per entry.
///
/// Symmetric gamma blocks contribute only their upper triangle; if any
/// exposure has an asymmetric gamma the full block is used.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRows {
    rows: Vec<Row>,
}

impl ConstraintRows {
    /// `traded` is the number of leading signal coordinates matched by the
    /// delta and classical modes; full gamma matches all `dim`.
    pub fn new(mode: HedgeMode, dim: usize, traded: usize, symmetric: bool) -> Self {
        let m = if mode == HedgeMode::FullGamma { dim } else { traded.min(dim) };
        let mut rows: Vec<Row> = (0..m).map(Row::Delta).collect();
        if mode != HedgeMode::Delta {
            for j in 0..m {
                for k in 0..m {
                    if !symmetric || j <= k {
                        rows.push(Row::Gamma(j, k));
                    }
                }
            }
        }
        Self { rows }
    }

    /// Picks the symmetric layout when every exposure allows it.
    pub fn for_exposures(mode: HedgeMode, traded: usize, all: &[&Exposure]) -> Self {
        let dim = all.first().map_or(1, |e| e.delta.len());
        let symmetric = all.iter().all(|e| e.gamma.is_symmetric(1e-12 * e.gamma.norm().max(1.0)));
        Self::new(mode, dim, traded, symmetric)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label(&self, r: usize) -> String {
        match self.rows[r] {
            Row::Delta(i) => format!("delta[{i}]"),
            Row::Gamma(j, k) => format!("gamma[{j},{k}]"),
        }
    }

    fn extract(&self, e: &Exposure) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match *r {
                Row::Delta(i) => e.delta[i],
                Row::Gamma(j, k) => e.gamma[(j, k)],
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub weights: Vec<f64>,
    /// ∞-norm of the matched-block residual.
    pub residual: f64,
}

/// Minimum-norm least-squares weights q with Σ q_i (row of hedger i) = target row.
///
/// Fails with `NotSpanned` naming the worst row if the residual exceeds
/// `tol` times the scale of the system.
pub fn solve_weights(
    hedgers: &[Exposure],
    target: &Exposure,
    rows: &ConstraintRows,
    tol: f64,
    time: f64,
) -> Result<Solution> {
    if hedgers.is_empty() {
        return Err(Error::config("no hedging instruments"));
    }
    if rows.is_empty() {
        return Ok(Solution { weights: vec![0.0; hedgers.len()], residual: 0.0 });
    }
    let cols: Vec<Vec<f64>> = hedgers.iter().map(|h| rows.extract(h)).collect();
    let b = DVector::from_vec(rows.extract(target));
    let a = DMatrix::from_fn(rows.len(), hedgers.len(), |r, c| cols[c][r]);
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let q = if top == 0.0 {
        DVector::zeros(hedgers.len())
    } else {
        svd.solve(&b, 1e-10 * top).map_err(|e| Error::Numeric(format!("SVD solve failed: {e}")))?
    };
    let res = &a * &q - &b;
    let (worst, residual) = res.iter().enumerate().fold((0, 0.0_f64), |acc, (i, v)| {
        if v.abs() > acc.1 {
            (i, v.abs())
        } else {
            acc
        }
    });
    let scale = b.amax().max(a.amax()).max(1.0);
    if residual > tol * scale {
        return Err(Error::NotSpanned { row: rows.label(worst), time, residual });
    }
    Ok(Solution { weights: q.iter().copied().collect(), residual })
}
