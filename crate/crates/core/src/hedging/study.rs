use super::engine::HedgeOutcome;
use super::HedgeMode;
use crate::error::{Error, Result};
use crate::io::fmt_num;
use rayon::prelude::*;

/// One (mesh, seed) run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub mode: HedgeMode,
    pub n: usize,
    pub seed: u64,
    /// NaN when the run failed with an unspanned or rank-deficient system.
    pub final_error: f64,
    pub max_residual: f64,
    /// `ok`, `weight_cap`, `not_spanned` or `rank_deficient`.
    pub flags: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSummary {
    pub n: usize,
    pub median: f64,
    pub valid_runs: usize,
    /// Every run at this level failed to span the constraints.
    pub invalid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub mode: HedgeMode,
    pub rows: Vec<ConvergenceRow>,
    pub levels: Vec<LevelSummary>,
    /// Minus the least-squares slope of log₂(median) against log₂(N);
    /// `None` when every median is at machine precision or fewer than two
    /// valid levels remain.
    pub slope: Option<f64>,
}

impl ConvergenceReport {
    pub fn medians(&self) -> Vec<f64> {
        self.levels.iter().filter(|l| !l.invalid).map(|l| l.median).collect()
    }

    /// Valid medians strictly decrease from level to level.
    pub fn strictly_decreasing(&self) -> bool {
        self.medians().windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,N,seed,final_error,max_residual,flags\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.mode,
                r.n,
                r.seed,
                fmt_num(r.final_error),
                fmt_num(r.max_residual),
                r.flags
            ));
        }
        out
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Least-squares slope of log₂ y against log₂ x.
pub fn fit_log2_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::config("slope fit needs at least two matching points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Numeric("slope fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// Runs `run(seed, n)` for every mesh and seed in parallel and summarizes
/// the final errors per mesh.
pub fn convergence_study<F>(mode: HedgeMode, meshes: &[usize], seeds: &[u64], run: F) -> Result<ConvergenceReport>
where
    F: Fn(u64, usize) -> Result<HedgeOutcome> + Sync,
{
    if meshes.len() < 4 {
        return Err(Error::config(format!("convergence study needs at least 4 mesh levels, got {}", meshes.len())));
    }
    if meshes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("mesh schedule must be strictly increasing"));
    }
    if seeds.is_empty() {
        return Err(Error::config("convergence study needs at least one seed"));
    }
    let jobs: Vec<(usize, u64)> = meshes.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let row = |e: f64, r: f64, f: &str| ConvergenceRow {
                mode,
                n,
                seed,
                final_error: e,
                max_residual: r,
                flags: f.to_string(),
            };
            match run(seed, n) {
                Ok(o) => Ok(row(o.final_error, o.max_residual, if o.warnings.is_empty() { "ok" } else { "weight_cap" })),
                Err(Error::NotSpanned { residual, .. }) => Ok(row(f64::NAN, residual, "not_spanned")),
                Err(Error::RankDeficient { .. }) => Ok(row(f64::NAN, f64::NAN, "rank_deficient")),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let levels: Vec<LevelSummary> = meshes
        .iter()
        .map(|&n| {
            let errs: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.final_error).collect();
            let valid_runs = errs.iter().filter(|e| !e.is_nan()).count();
            LevelSummary { n, median: median(&errs), valid_runs, invalid: valid_runs == 0 }
        })
        .collect();
    let valid: Vec<&LevelSummary> = levels.iter().filter(|l| !l.invalid).collect();
    let slope = if valid.len() < 2 || valid.iter().all(|l| l.median <= 1e-12) {
        None
    } else {
        let x: Vec<f64> = valid.iter().map(|l| l.n as f64).collect();
        let y: Vec<f64> = valid.iter().map(|l| l.median.max(f64::MIN_POSITIVE)).collect();
        Some(-fit_log2_slope(&x, &y)?)
    };
    Ok(ConvergenceReport { mode, rows, levels, slope })
}
