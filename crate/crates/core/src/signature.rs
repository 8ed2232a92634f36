//! Iterated integrals of time-augmented paths X_t = (t, W_t) and the
//! delta and gamma of the payoffs I_{α;T}.
//!
//! Letter 0 is time; letter i ≥ 1 is component i−1 of the rough path.

use crate::error::{Error, Result};
use crate::integrate::{rough_integral, ControlledPath};
use crate::roughpath::{RoughPath, Tensor2, TimeGrid};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_MAX_LENGTH: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(letters: Vec<usize>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|&&j| j == 0).count()
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    /// α− : the index with its last letter removed.
    pub fn parent(&self) -> Option<MultiIndex> {
        self.0.split_last().map(|(_, rest)| MultiIndex(rest.to_vec()))
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    fn zeros(k: usize) -> MultiIndex {
        MultiIndex(vec![0; k])
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Comma-separated letters, e.g. `1,0,2`. The empty string is the empty index.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.is_empty() {
            return Ok(Self::empty());
        }
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::domain(format!("bad letter {p:?} in multi-index: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }
}

/// α = β⋆(i)⋆(0)^k with i ≥ 1.
pub fn decompose(alpha: &MultiIndex) -> Result<(MultiIndex, usize, usize)> {
    let letters = alpha.letters();
    let k = letters.iter().rev().take_while(|&&j| j == 0).count();
    if k == letters.len() {
        return Err(Error::NoStochasticPart(alpha.to_string()));
    }
    let pos = letters.len() - k - 1;
    Ok((MultiIndex(letters[..pos].to_vec()), letters[pos], k))
}

/// Running I_{α;t} on the grid of the path it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct IteratedIntegralPath {
    pub alpha: MultiIndex,
    pub values: Vec<f64>,
}

/// Memoized iterated integrals for every prefix of the requested indices.
///
/// dt-levels are left-point sums; dW-levels are compensated sums with
/// Gubinelli derivative I_{α−−} in the direction of the last letter of α−.
#[derive(Clone, Debug)]
pub struct SignatureTable {
    rp: RoughPath,
    max_length: usize,
    levels: HashMap<MultiIndex, Vec<f64>>,
}

impl SignatureTable {
    pub fn new(rp: &RoughPath) -> Self {
        let mut levels = HashMap::new();
        levels.insert(MultiIndex::empty(), vec![1.0; rp.len()]);
        Self { rp: rp.clone(), max_length: DEFAULT_MAX_LENGTH, levels }
    }

    pub fn with_max_length(mut self, max_length: usize) -> Self {
        self.max_length = max_length;
        self
    }

    pub fn build(rp: &RoughPath, alphas: &[MultiIndex]) -> Result<Self> {
        let mut t = Self::new(rp);
        for a in alphas {
            t.ensure(a)?;
        }
        Ok(t)
    }

    pub fn grid(&self) -> &TimeGrid {
        self.rp.grid()
    }

    pub fn dim(&self) -> usize {
        self.rp.dim()
    }

    /// The payoff time T, taken to be the end of the grid.
    pub fn maturity(&self) -> f64 {
        self.grid().horizon()
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<&[f64]> {
        self.levels.get(alpha).map(Vec::as_slice)
    }

    fn require(&self, alpha: &MultiIndex) -> Result<&[f64]> {
        self.get(alpha).ok_or_else(|| Error::MissingDependency(format!("iterated integral {alpha} not in table")))
    }

    /// Computes I_α and all its prefixes if missing.
    pub fn ensure(&mut self, alpha: &MultiIndex) -> Result<&[f64]> {
        if alpha.len() > self.max_length {
            return Err(Error::domain(format!("{alpha} longer than the maximum length {}", self.max_length)));
        }
        if alpha.max_letter() > self.dim() {
            return Err(Error::domain(format!("{alpha} uses a letter above dimension {}", self.dim())));
        }
        if !self.levels.contains_key(alpha) {
            let parent = alpha.parent().expect("empty index is always present");
            self.ensure(&parent)?;
            let values = self.next_level(&parent, alpha.last().unwrap_or(0))?;
            self.levels.insert(alpha.clone(), values);
        }
        Ok(&self.levels[alpha])
    }

    fn next_level(&self, parent: &MultiIndex, letter: usize) -> Result<Vec<f64>> {
        let y = &self.levels[parent];
        let n = self.rp.len();
        if letter == 0 {
            let times = self.grid().times();
            let mut out = Vec::with_capacity(n);
            let mut acc = 0.0;
            out.push(acc);
            for k in 0..n - 1 {
                acc += y[k] * (times[k + 1] - times[k]);
                out.push(acc);
            }
            return Ok(out);
        }
        let d = self.dim();
        let i = letter - 1;
        let mut flat_y = vec![0.0; n * d];
        let mut flat_yp = vec![0.0; n * d * d];
        for k in 0..n {
            flat_y[k * d + i] = y[k];
        }
        if let Some(j) = parent.last().filter(|&j| j > 0) {
            let grand = &self.levels[&parent.parent().expect("parent has a last letter")];
            for k in 0..n {
                flat_yp[k * d * d + (j - 1) * d + i] = grand[k];
            }
        }
        let cp = ControlledPath::new(self.grid().clone(), d, 1, flat_y, flat_yp)?;
        Ok(rough_integral(&cp, &self.rp, 0, n - 1)?.scalar_partials())
    }

    /// E_t[I_{α;T}] = Σ_{j=0}^{k} (T−t)^j/j! · I_{β⋆(i)⋆(0)^{k−j};t}, or the
    /// deterministic value when α has no stochastic letter.
    pub fn conditional_price(&self, alpha: &MultiIndex, k: usize) -> Result<f64> {
        let tau = self.maturity() - self.grid().times()[k];
        match decompose(alpha) {
            Err(Error::NoStochasticPart(_)) => Ok(self.require(alpha)?[self.grid().len() - 1]),
            Err(e) => Err(e),
            Ok((beta, i, zeros)) => {
                let head = beta.concat(&MultiIndex(vec![i]));
                let mut acc = 0.0;
                let mut coef = 1.0;
                for j in 0..=zeros {
                    if j > 0 {
                        coef *= tau / j as f64;
                    }
                    acc += coef * self.require(&head.concat(&MultiIndex::zeros(zeros - j)))?[k];
                }
                Ok(acc)
            }
        }
    }

    /// Every index the delta, gamma and price of I_α read.
    pub fn dependencies(alpha: &MultiIndex) -> Vec<MultiIndex> {
        let mut out = vec![alpha.clone()];
        if let Ok((beta, i, zeros)) = decompose(alpha) {
            let head = beta.concat(&MultiIndex(vec![i]));
            out.extend((0..=zeros).map(|j| head.concat(&MultiIndex::zeros(j))));
            out.push(beta);
        }
        out
    }
}

fn falling(tau: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * tau / j as f64)
}

/// Δ_t = (T−t)^k/k! · I_{β;t} in the direction of the stochastic letter i of
/// α = β⋆(i)⋆(0)^k; zero when α has no stochastic letter.
pub fn signature_delta(alpha: &MultiIndex, k: usize, table: &SignatureTable) -> Result<Vec<f64>> {
    let mut delta = vec![0.0; table.dim()];
    match decompose(alpha) {
        Err(Error::NoStochasticPart(_)) => Ok(delta),
        Err(e) => Err(e),
        Ok((beta, i, zeros)) => {
            let tau = table.maturity() - table.grid().times()[k];
            delta[i - 1] = falling(tau, zeros) * table.require(&beta)?[k];
            Ok(delta)
        }
    }
}

/// Γ_t with entry (i₁, i₂) = (T−t)^k/k! · I_{γ;t} when α = γ⋆(i₁,i₂)⋆(0)^k,
/// zero otherwise. Not symmetric in general.
pub fn signature_gamma(alpha: &MultiIndex, k: usize, table: &SignatureTable) -> Result<Tensor2> {
    let d = table.dim();
    let mut gamma = Tensor2::zeros(d);
    let (beta, i2, zeros) = match decompose(alpha) {
        Err(Error::NoStochasticPart(_)) => return Ok(gamma),
        Err(e) => return Err(e),
        Ok(parts) => parts,
    };
    if let Some(i1) = beta.last().filter(|&j| j > 0) {
        let gam = beta.parent().expect("non-empty");
        let tau = table.maturity() - table.grid().times()[k];
        gamma.as_mut_slice()[(i1 - 1) * d + (i2 - 1)] = falling(tau, zeros) * table.require(&gam)?[k];
    }
    Ok(gamma)
}

/// Running I_{α;t} computed from scratch on `rp`.
pub fn iterated_integral(alpha: &MultiIndex, rp: &RoughPath) -> Result<IteratedIntegralPath> {
    let mut t = SignatureTable::new(rp).with_max_length(alpha.len().max(DEFAULT_MAX_LENGTH));
    let values = t.ensure(alpha)?.to_vec();
    Ok(IteratedIntegralPath { alpha: alpha.clone(), values })
}

/// |I_{α;T} − ∫_0^T (T−t)^k/k! I_{β;t} dW^i_t| with the right side a
/// compensated sum whose Gubinelli derivative comes from the same recursion.
pub fn lemma_check(alpha: &MultiIndex, rp: &RoughPath) -> Result<f64> {
    let (beta, i, zeros) = decompose(alpha)?;
    let mut table = SignatureTable::new(rp).with_max_length(alpha.len().max(DEFAULT_MAX_LENGTH));
    let lhs = *table.ensure(alpha)?.last().expect("non-empty grid");
    let iv = table.ensure(&beta)?.to_vec();
    let n = rp.len();
    let d = rp.dim();
    let big_t = rp.grid().horizon();
    let times = rp.grid().times();
    let mut y = vec![0.0; n * d];
    let mut yp = vec![0.0; n * d * d];
    let grand = match beta.last().filter(|&j| j > 0) {
        Some(j) => Some((j, table.ensure(&beta.parent().expect("non-empty"))?.to_vec())),
        None => None,
    };
    for k in 0..n {
        let c = falling(big_t - times[k], zeros);
        y[k * d + i - 1] = c * iv[k];
        if let Some((j, g)) = &grand {
            yp[k * d * d + (j - 1) * d + i - 1] = c * g[k];
        }
    }
    let cp = ControlledPath::new(rp.grid().clone(), d, 1, y, yp)?;
    let rhs = rough_integral(&cp, rp, 0, n - 1)?.value()[0];
    Ok((lhs - rhs).abs())
}
