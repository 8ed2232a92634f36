//! Sampled paths, second-order lifts and their algebra.
//!
//! A [`RoughPath`] stores the trace on a [`TimeGrid`] together with the lift on
//! each adjacent interval. Every other lift value is rebuilt with Chen's
//! relation, so storage is linear in the grid size.
//!
//! Operations take grid *indices* rather than raw times; use
//! [`TimeGrid::index_of`] to resolve a time, which rejects off-grid values.

mod pvar;
mod tensor;

pub use pvar::{
    homogeneous_norm, lift_p_variation, p_variation, p_variation_scalar, rough_distance,
    two_param_p_variation,
};
pub use tensor::Tensor2;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default absolute tolerance for algebraic identities.
pub const MACHINE_TOL: f64 = 1e-12;

/// Tolerance scaled to the size of the data it is applied to.
pub fn scaled_tol(magnitude: f64) -> f64 {
    MACHINE_TOL * magnitude.max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::domain("time grid needs at least 2 points"));
        }
        if times[0] != 0.0 {
            return Err(Error::domain(format!("time grid must start at 0, got {}", times[0])));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!(
                "time grid not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self { times })
    }

    /// Uniform grid on [0, horizon] with `intervals` steps.
    pub fn uniform(horizon: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 || !(horizon > 0.0) {
            return Err(Error::domain("uniform grid needs horizon > 0 and at least one interval"));
        }
        let h = horizon / intervals as f64;
        let mut times: Vec<f64> = (0..=intervals).map(|k| k as f64 * h).collect();
        times[intervals] = horizon;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn mesh(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }

    /// Index of a grid time. Times further than `1e-12 * horizon` from every
    /// grid point are rejected.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = scaled_tol(self.horizon());
        let pos = self.times.partition_point(|&s| s < t - tol);
        match self.times.get(pos) {
            Some(&s) if (s - t).abs() <= tol => Ok(pos),
            _ => Err(Error::domain(format!("t = {t} is not a grid time"))),
        }
    }

    /// Keep every `factor`-th point. The number of intervals must be divisible.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let n = self.len() - 1;
        if factor == 0 || n % factor != 0 {
            return Err(Error::domain(format!("cannot coarsen {n} intervals by {factor}")));
        }
        Self::new(self.times.iter().step_by(factor).copied().collect())
    }
}

/// A d-dimensional signal sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePath {
    grid: TimeGrid,
    dim: usize,
    /// Row-major, `dim` values per grid point.
    values: Vec<f64>,
}

impl TracePath {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("trace dimension must be positive"));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::domain(format!(
                "trace has {} values, expected {} x {}",
                values.len(),
                grid.len(),
                dim
            )));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn from_scalar(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    /// Sample `f` at every grid time.
    pub fn from_fn(grid: TimeGrid, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * dim);
        for &t in grid.times() {
            let v = f(t);
            if v.len() != dim {
                return Err(Error::domain("sampling function returned wrong dimension"));
            }
            values.extend(v);
        }
        Self::new(grid, dim, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Component `i` at every grid point.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.iter().skip(i).step_by(self.dim).copied().collect()
    }

    /// X_{s,t} = X_t - X_s.
    pub fn increment(&self, s: usize, t: usize) -> Vec<f64> {
        self.value(t).iter().zip(self.value(s)).map(|(b, a)| b - a).collect()
    }

    pub fn magnitude(&self) -> f64 {
        tensor::max_abs(&self.values)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * lambda).collect(), ..self.clone() }
    }

    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let values = (0..self.len())
            .step_by(factor)
            .flat_map(|k| self.value(k).to_vec())
            .collect();
        Self::new(grid, self.dim, values)
    }

    /// Piecewise-linear interpolation onto a finer grid covering the same horizon.
    pub fn interpolate_onto(&self, grid: &TimeGrid) -> Result<Self> {
        if (grid.horizon() - self.grid.horizon()).abs() > scaled_tol(grid.horizon()) {
            return Err(Error::domain("interpolation grid has a different horizon"));
        }
        let times = self.grid.times();
        let mut values = Vec::with_capacity(grid.len() * self.dim);
        let mut seg = 0;
        for &t in grid.times() {
            while seg + 2 < times.len() && times[seg + 1] <= t {
                seg += 1;
            }
            let (t0, t1) = (times[seg], times[seg + 1]);
            let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            let (a, b) = (self.value(seg), self.value(seg + 1));
            values.extend(a.iter().zip(b).map(|(x, y)| x + w * (y - x)));
        }
        Self::new(grid.clone(), self.dim, values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftKind {
    Geometric,
    Brownian,
    Ito,
    Reduced,
    Custom,
}

/// Rough bracket [S]_{0,t} at every grid time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketPath {
    grid: TimeGrid,
    values: Vec<Tensor2>,
}

impl BracketPath {
    pub fn new(grid: TimeGrid, values: Vec<Tensor2>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain("bracket length differs from grid length"));
        }
        let dim = values[0].dim();
        if values.iter().any(|v| v.dim() != dim) {
            return Err(Error::domain("bracket tensors have mixed dimensions"));
        }
        Ok(Self { grid, values })
    }

    /// t * I on every grid point.
    pub fn brownian(grid: TimeGrid, dim: usize) -> Self {
        let values = grid.times().iter().map(|&t| Tensor2::identity(dim).scale(t)).collect();
        Self { grid, values }
    }

    pub fn zero(grid: TimeGrid, dim: usize) -> Self {
        let values = vec![Tensor2::zeros(dim); grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn values(&self) -> &[Tensor2] {
        &self.values
    }

    pub fn at(&self, k: usize) -> &Tensor2 {
        &self.values[k]
    }

    /// γ_{s,t} = [S]_{0,t} - [S]_{0,s}.
    pub fn increment(&self, s: usize, t: usize) -> Tensor2 {
        &self.values[t] - &self.values[s]
    }
}

/// Trace plus second-order lift on each adjacent interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughPath {
    trace: TracePath,
    kind: LiftKind,
    /// Row-major d x d blocks, one per adjacent interval.
    lift: Vec<f64>,
}

impl RoughPath {
    pub fn new(trace: TracePath, lift: Vec<Tensor2>, kind: LiftKind) -> Result<Self> {
        let d = trace.dim();
        if lift.len() + 1 != trace.len() {
            return Err(Error::domain(format!(
                "{} lift increments for {} grid points",
                lift.len(),
                trace.len()
            )));
        }
        if lift.iter().any(|l| l.dim() != d) {
            return Err(Error::domain("lift tensor dimension differs from trace dimension"));
        }
        let flat = lift.into_iter().flat_map(Tensor2::into_vec).collect();
        Ok(Self { trace, kind, lift: flat })
    }

    pub fn trace(&self) -> &TracePath {
        &self.trace
    }

    pub fn grid(&self) -> &TimeGrid {
        self.trace.grid()
    }

    pub fn dim(&self) -> usize {
        self.trace.dim()
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kind(&self) -> LiftKind {
        self.kind
    }

    /// Stored lift on [t_k, t_{k+1}].
    pub fn step_lift(&self, k: usize) -> &[f64] {
        let dd = self.dim() * self.dim();
        &self.lift[k * dd..(k + 1) * dd]
    }

    pub fn step_lift_tensor(&self, k: usize) -> Tensor2 {
        Tensor2::from_row_major(self.dim(), self.step_lift(k).to_vec())
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            return Err(Error::domain(format!("grid index {k} out of range (len {})", self.len())));
        }
        Ok(())
    }

    /// Chen product term for this kind: a ⊗ b, symmetrized for reduced paths.
    fn cross_term(&self, acc: &mut Tensor2, a: &[f64], b: &[f64]) {
        if self.kind == LiftKind::Reduced {
            let d = self.dim();
            for i in 0..d {
                for j in 0..d {
                    acc[(i, j)] += 0.5 * (a[i] * b[j] + a[j] * b[i]);
                }
            }
        } else {
            acc.add_outer(a, b);
        }
    }

    /// 𝕏_{s,t}, folding the stored increments left to right with Chen's relation.
    pub fn lift_eval(&self, s: usize, t: usize) -> Result<Tensor2> {
        self.check_index(t)?;
        if s > t {
            return Err(Error::domain(format!("lift_eval needs s <= t, got {s} > {t}")));
        }
        let d = self.dim();
        let mut acc = Tensor2::zeros(d);
        let mut x = vec![0.0; d];
        for k in s..t {
            let step = self.trace.increment(k, k + 1);
            self.cross_term(&mut acc, &x, &step);
            for (a, l) in acc.as_mut_slice().iter_mut().zip(self.step_lift(k)) {
                *a += l;
            }
            for (xi, di) in x.iter_mut().zip(&step) {
                *xi += di;
            }
        }
        Ok(acc)
    }

    /// 𝕏_{0,t} for every grid index in one pass.
    pub fn lift_from_origin(&self) -> Vec<Tensor2> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.len());
        let mut acc = Tensor2::zeros(d);
        out.push(acc.clone());
        for k in 0..self.len() - 1 {
            let x = self.trace.increment(0, k);
            let step = self.trace.increment(k, k + 1);
            self.cross_term(&mut acc, &x, &step);
            for (a, l) in acc.as_mut_slice().iter_mut().zip(self.step_lift(k)) {
                *a += l;
            }
            out.push(acc.clone());
        }
        out
    }

    /// The Chen cross term alone.
    pub(crate) fn cross(&self, a: &[f64], b: &[f64]) -> Tensor2 {
        let mut out = Tensor2::zeros(self.dim());
        self.cross_term(&mut out, a, b);
        out
    }

    /// Combine 𝕏_{a,b} and 𝕏_{b,c} into 𝕏_{a,c}.
    pub fn chen_combine(&self, left: &Tensor2, right: &Tensor2, x_left: &[f64], x_right: &[f64]) -> Tensor2 {
        let mut out = left + right;
        self.cross_term(&mut out, x_left, x_right);
        out
    }

    /// Same trace, lift replaced per interval by `f(k, lift_k)`.
    pub fn map_lift(&self, kind: LiftKind, f: impl Fn(usize, Tensor2) -> Tensor2) -> Result<Self> {
        let lift = (0..self.len() - 1).map(|k| f(k, self.step_lift_tensor(k))).collect();
        Self::new(self.trace.clone(), lift, kind)
    }

    /// Trace scaled by λ and lift by λ².
    pub fn dilate(&self, lambda: f64) -> Self {
        Self {
            trace: self.trace.scaled(lambda),
            kind: self.kind,
            lift: self.lift.iter().map(|v| v * lambda * lambda).collect(),
        }
    }
}

/// ‖𝕏_{s,t} − 𝕏_{s,u} − 𝕏_{u,t} − X_{s,u}⊗X_{u,t}‖ (symmetrized product for reduced paths).
pub fn chen_defect(rp: &RoughPath, s: usize, u: usize, t: usize) -> Result<f64> {
    if !(s <= u && u <= t) {
        return Err(Error::domain(format!("chen_defect needs s <= u <= t, got ({s}, {u}, {t})")));
    }
    let whole = rp.lift_eval(s, t)?;
    let left = rp.lift_eval(s, u)?;
    let right = rp.lift_eval(u, t)?;
    let recombined = rp.chen_combine(
        &left,
        &right,
        &rp.trace().increment(s, u),
        &rp.trace().increment(u, t),
    );
    Ok((&whole - &recombined).norm())
}

/// 𝕏_{t_k,t_{k+1}} = ½ ΔX ⊗ ΔX: the exact lift of a piecewise-linear path.
pub fn geometric_lift(trace: &TracePath) -> RoughPath {
    let lift = (0..trace.len() - 1)
        .map(|k| {
            let dx = trace.increment(k, k + 1);
            Tensor2::outer(&dx, &dx).scale(0.5)
        })
        .collect();
    RoughPath::new(trace.clone(), lift, LiftKind::Geometric).expect("shapes match by construction")
}

/// Geometric lift minus ½(t−s)I, the pseudo-Brownian enhancement.
pub fn brownian_lift(trace: &TracePath) -> RoughPath {
    let d = trace.dim();
    let grid = trace.grid();
    let lift = (0..trace.len() - 1)
        .map(|k| {
            let dx = trace.increment(k, k + 1);
            let mut l = Tensor2::outer(&dx, &dx).scale(0.5);
            for i in 0..d {
                l[(i, i)] -= 0.5 * grid.dt(k);
            }
            l
        })
        .collect();
    RoughPath::new(trace.clone(), lift, LiftKind::Brownian).expect("shapes match by construction")
}

/// Itô enhancement of a sampled Brownian path.
///
/// For d = 1 the lift ½(ΔW² − Δt) is exact. For d ≥ 2 the diagonal is exact and
/// off-diagonal entries are left-point sums on `refined`, which must be the same
/// path sampled `subgrid_factor` times finer.
pub fn ito_lift_brownian(
    trace: &TracePath,
    refined: Option<&TracePath>,
    subgrid_factor: usize,
) -> Result<RoughPath> {
    let d = trace.dim();
    let grid = trace.grid();
    let n = trace.len() - 1;
    let fine = match (d, refined) {
        (1, _) => None,
        (_, None) => {
            return Err(Error::config(
                "Itô lift in dimension >= 2 needs the refined trace from the generator",
            ))
        }
        (_, Some(r)) => {
            if subgrid_factor == 0 || r.len() != n * subgrid_factor + 1 || r.dim() != d {
                return Err(Error::config(format!(
                    "refined trace has {} points, expected {} for subgrid factor {}",
                    r.len(),
                    n * subgrid_factor + 1,
                    subgrid_factor
                )));
            }
            Some(r)
        }
    };
    let mut lift = Vec::with_capacity(n);
    for k in 0..n {
        let dw = trace.increment(k, k + 1);
        let mut l = Tensor2::zeros(d);
        if let Some(r) = fine {
            let base = k * subgrid_factor;
            for j in 0..subgrid_factor {
                let from_start = r.increment(base, base + j);
                let step = r.increment(base + j, base + j + 1);
                l.add_outer(&from_start, &step);
            }
        }
        for i in 0..d {
            l[(i, i)] = 0.5 * (dw[i] * dw[i] - grid.dt(k));
        }
        lift.push(l);
    }
    RoughPath::new(trace.clone(), lift, LiftKind::Ito)
}

/// Reduced lift with prescribed bracket: 𝕊_{s,t} = ½(S_{s,t} ⊗ S_{s,t} − γ_{s,t}).
///
/// The sign is chosen so that [`rough_bracket`] returns γ.
pub fn reduced_lift_from_bracket(trace: &TracePath, bracket: &BracketPath) -> Result<RoughPath> {
    if bracket.grid() != trace.grid() {
        return Err(Error::domain("bracket and trace live on different grids"));
    }
    if bracket.dim() != trace.dim() {
        return Err(Error::domain("bracket and trace dimensions differ"));
    }
    for (k, g) in bracket.values().iter().enumerate() {
        if !g.is_symmetric(scaled_tol(g.norm())) {
            return Err(Error::domain(format!("bracket value at index {k} is not symmetric")));
        }
    }
    let lift = (0..trace.len() - 1)
        .map(|k| {
            let ds = trace.increment(k, k + 1);
            let mut l = Tensor2::outer(&ds, &ds);
            l -= &bracket.increment(k, k + 1);
            l.scale(0.5)
        })
        .collect();
    RoughPath::new(trace.clone(), lift, LiftKind::Reduced)
}

/// [S]_{0,t} = S_{0,t} ⊗ S_{0,t} − 2 sym(𝕊_{0,t}) at every grid time.
pub fn rough_bracket(rp: &RoughPath) -> BracketPath {
    let values = rp
        .lift_from_origin()
        .into_iter()
        .enumerate()
        .map(|(k, l)| {
            let x = rp.trace().increment(0, k);
            let mut b = Tensor2::outer(&x, &x);
            b -= &l.sym().scale(2.0);
            b
        })
        .collect();
    BracketPath::new(rp.grid().clone(), values).expect("one value per grid point")
}
