//! Grid p-variation: the supremum over partitions built from sample points.
//!
//! Both the one- and two-parameter versions reduce to the same longest-path
//! recursion V(j) = max_{i<j} V(i) + c(i, j)^p, which is exact over grid
//! partitions in O(n²) evaluations of c.

use super::tensor::max_abs;
use super::{RoughPath, Tensor2};
use crate::error::{Error, Result};

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("p-variation needs p >= 1, got {p}")));
    }
    Ok(())
}

/// sup over chains 0 = i_0 < ... < i_m = n-1 of Σ cost(i_k, i_{k+1})^p.
fn chain_sup(n: usize, p: f64, mut cost: impl FnMut(usize, usize) -> f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![f64::NEG_INFINITY; n];
    best[0] = 0.0;
    for j in 1..n {
        let mut v = f64::NEG_INFINITY;
        for (i, &b) in best.iter().enumerate().take(j) {
            v = v.max(b + cost(i, j).powf(p));
        }
        best[j] = v;
    }
    best[n - 1]
}

/// Grid p-variation of a sequence of vectors under the max-abs norm.
pub fn p_variation<V: AsRef<[f64]>>(values: &[V], p: f64) -> Result<f64> {
    check_p(p)?;
    if values.len() < 2 {
        return Err(Error::domain("p-variation needs at least 2 points"));
    }
    let dist = |i: usize, j: usize| {
        values[i]
            .as_ref()
            .iter()
            .zip(values[j].as_ref())
            .fold(0.0_f64, |m, (a, b)| m.max((b - a).abs()))
    };
    Ok(chain_sup(values.len(), p, dist).powf(1.0 / p))
}

pub fn p_variation_scalar(values: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if values.len() < 2 {
        return Err(Error::domain("p-variation needs at least 2 points"));
    }
    Ok(chain_sup(values.len(), p, |i, j| (values[j] - values[i]).abs()).powf(1.0 / p))
}

/// Two-parameter grid p-variation of R on an n-point grid; `norm_r(i, j)`
/// returns |R_{t_i,t_j}|.
pub fn two_param_p_variation(n: usize, p: f64, norm_r: impl FnMut(usize, usize) -> f64) -> Result<f64> {
    check_p(p)?;
    if n < 2 {
        return Err(Error::domain("two-parameter p-variation needs at least 2 points"));
    }
    Ok(chain_sup(n, p, norm_r).powf(1.0 / p))
}

/// 𝕏_{i,j} from lifts anchored at the origin: 𝕏_{0,j} − 𝕏_{0,i} − X_{0,i} ⊗ X_{i,j}.
fn lift_between(rp: &RoughPath, origin: &[Tensor2], i: usize, j: usize) -> Tensor2 {
    let xi = rp.trace().increment(0, i);
    let xij = rp.trace().increment(i, j);
    let cross = rp.cross(&xi, &xij);
    let mut out = &origin[j] - &origin[i];
    out -= &cross;
    out
}

/// ‖𝕏‖_{p-var} restricted to grid indices [s, t].
pub fn lift_p_variation(rp: &RoughPath, p: f64, s: usize, t: usize) -> Result<f64> {
    if s > t || t >= rp.len() {
        return Err(Error::domain(format!("invalid index range [{s}, {t}]")));
    }
    if s == t {
        check_p(p)?;
        return Ok(0.0);
    }
    let origin = rp.lift_from_origin();
    two_param_p_variation(t - s + 1, p, |i, j| lift_between(rp, &origin, s + i, s + j).norm())
}

fn trace_p_variation(rp: &RoughPath, p: f64) -> Result<f64> {
    let pts: Vec<&[f64]> = (0..rp.len()).map(|k| rp.trace().value(k)).collect();
    p_variation(&pts, p)
}

/// ‖X‖_{p-var} + √‖𝕏‖_{p/2-var}.
pub fn homogeneous_norm(rp: &RoughPath, p: f64) -> Result<f64> {
    let x = trace_p_variation(rp, p)?;
    let xx = lift_p_variation(rp, p / 2.0, 0, rp.len() - 1)?;
    Ok(x + xx.sqrt())
}

/// ‖X − Y‖_{p-var} + ‖𝕏 − 𝕐‖_{p/2-var} on a common grid.
pub fn rough_distance(a: &RoughPath, b: &RoughPath, p: f64) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::domain("rough_distance needs both paths on the same grid"));
    }
    if a.dim() != b.dim() {
        return Err(Error::domain("rough_distance needs equal dimensions"));
    }
    let diff: Vec<Vec<f64>> = (0..a.len())
        .map(|k| a.trace().value(k).iter().zip(b.trace().value(k)).map(|(x, y)| x - y).collect())
        .collect();
    let x = p_variation(&diff, p)?;
    let (oa, ob) = (a.lift_from_origin(), b.lift_from_origin());
    let xx = two_param_p_variation(a.len(), p / 2.0, |i, j| {
        let la = lift_between(a, &oa, i, j);
        let lb = lift_between(b, &ob, i, j);
        max_abs((&la - &lb).as_slice())
    })?;
    Ok(x + xx)
}
