//! DR-submodular objectives.
//!
//! Every objective is the multilinear extension `F(x) = E[g(R(x))]` of a set
//! function `g`, where `R(x)` keeps element `i` independently with probability
//! `x_i`. Coverage, directed cut and linear objectives have closed forms for
//! both value and gradient; [`Sampled`] wraps an arbitrary [`SetFunction`] and
//! estimates both by Monte-Carlo with a fixed seed.
//!
//! Points are extended to `R^n_+` by clamping: `F(x) = F(x ∧ 1)`. Gradients
//! follow the same extension, so a coordinate strictly above one has a zero
//! partial derivative.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, check_nonnegative, Error, Result};

/// A set function over the ground set `{0, .., n-1}`, queried by indicator.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;
    fn value(&self, set: &[bool]) -> f64;
}

/// Adapter turning a closure into a [`SetFunction`].
pub struct FnSetFunction<F> {
    n: usize,
    f: F,
}

impl<F> FnSetFunction<F>
where
    F: Fn(&[bool]) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> SetFunction for FnSetFunction<F>
where
    F: Fn(&[bool]) -> f64 + Send + Sync,
{
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &[bool]) -> f64 {
        (self.f)(set)
    }
}

/// Weighted coverage: item `u` with weight `w_u` is covered when any element
/// listed for it is chosen.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    n: usize,
    weights: Vec<f64>,
    item_elements: Vec<Vec<usize>>,
    element_items: Vec<Vec<usize>>,
}

impl Coverage {
    /// Builds a coverage function from `(weight, covering elements)` pairs.
    pub fn new(n: usize, items: Vec<(f64, Vec<usize>)>) -> Result<Self> {
        let mut weights = Vec::with_capacity(items.len());
        let mut item_elements = Vec::with_capacity(items.len());
        let mut element_items = vec![Vec::new(); n];
        for (u, (w, mut elems)) in items.into_iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite { index: u });
            }
            if w < 0.0 {
                return Err(Error::NegativeEntry { index: u, value: w });
            }
            elems.sort_unstable();
            elems.dedup();
            for &e in &elems {
                if e >= n {
                    return Err(Error::IndexOutOfRange { index: e, n });
                }
                element_items[e].push(u);
            }
            weights.push(w);
            item_elements.push(elems);
        }
        Ok(Self {
            n,
            weights,
            item_elements,
            element_items,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(weight, covering elements)` for every item, in insertion order.
    pub fn items(&self) -> impl Iterator<Item = (f64, &[usize])> + '_ {
        self.weights
            .iter()
            .zip(&self.item_elements)
            .map(|(&w, e)| (w, e.as_slice()))
    }

    fn eval_clamped(&self, y: &[f64]) -> f64 {
        let mut total = 0.0;
        for (w, elems) in self.weights.iter().zip(&self.item_elements) {
            let miss: f64 = elems.iter().map(|&i| 1.0 - y[i]).product();
            total += w * (1.0 - miss);
        }
        total
    }

    fn grad_clamped(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (i, gi) in g.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &u in &self.element_items[i] {
                let miss: f64 = self.item_elements[u]
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| 1.0 - y[j])
                    .product();
                acc += self.weights[u] * miss;
            }
            *gi = acc;
        }
        g
    }
}

impl SetFunction for Coverage {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(&self.item_elements)
            .filter(|(_, elems)| elems.iter().any(|&i| set[i]))
            .map(|(w, _)| w)
            .sum()
    }
}

/// One weighted arc of a directed graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedArc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Directed cut: `g(S) = Σ w_uv [u ∈ S, v ∉ S]`. Non-monotone.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectedCut {
    n: usize,
    arcs: Vec<WeightedArc>,
}

impl DirectedCut {
    pub fn new(n: usize, arcs: Vec<WeightedArc>) -> Result<Self> {
        for (k, a) in arcs.iter().enumerate() {
            for idx in [a.from, a.to] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            if !a.weight.is_finite() {
                return Err(Error::NonFinite { index: k });
            }
            if a.weight < 0.0 {
                return Err(Error::NegativeEntry {
                    index: k,
                    value: a.weight,
                });
            }
        }
        Ok(Self { n, arcs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[WeightedArc] {
        &self.arcs
    }
}

impl SetFunction for DirectedCut {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &[bool]) -> f64 {
        self.arcs
            .iter()
            .filter(|a| set[a.from] && !set[a.to])
            .map(|a| a.weight)
            .sum()
    }
}

/// Non-negative linear objective `⟨c, x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    weights: Vec<f64>,
}

impl Linear {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_nonnegative(&weights)?;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Linear {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(set)
            .filter(|(_, &s)| s)
            .map(|(w, _)| w)
            .sum()
    }
}

/// Monte-Carlo multilinear extension of a black-box set function.
#[derive(Clone)]
pub struct Sampled {
    base: Arc<dyn SetFunction>,
    samples: usize,
    seed: u64,
    monotone: bool,
}

impl fmt::Debug for Sampled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sampled")
            .field("n", &self.base.ground_size())
            .field("samples", &self.samples)
            .field("seed", &self.seed)
            .field("monotone", &self.monotone)
            .finish()
    }
}

pub const DEFAULT_SAMPLES: usize = 10_000;

impl Sampled {
    pub fn new(
        base: Arc<dyn SetFunction>,
        samples: usize,
        seed: u64,
        monotone: bool,
    ) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "at least one sample is required".into(),
            });
        }
        Ok(Self {
            base,
            samples,
            seed,
            monotone,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn base(&self) -> &Arc<dyn SetFunction> {
        &self.base
    }

    /// Sample mean of `g(R(y))` and its standard error.
    fn estimate(&self, y: &[f64]) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut set = vec![false; y.len()];
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..self.samples {
            for (s, &p) in set.iter_mut().zip(y) {
                *s = rng.gen::<f64>() < p;
            }
            let v = self.base.value(&set);
            sum += v;
            sum_sq += v * v;
        }
        let k = self.samples as f64;
        let mean = sum / k;
        let var = if self.samples > 1 {
            ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, (var / k).sqrt())
    }

    /// Shared-sample gradient estimate: every coordinate is differenced on
    /// the same random sets.
    fn grad_estimate(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut set = vec![false; n];
        let mut acc = vec![0.0; n];
        for _ in 0..self.samples {
            for (s, &p) in set.iter_mut().zip(y) {
                *s = rng.gen::<f64>() < p;
            }
            let base = self.base.value(&set);
            for i in 0..n {
                let had = set[i];
                set[i] = !had;
                let flipped = self.base.value(&set);
                set[i] = had;
                acc[i] += if had { base - flipped } else { flipped - base };
            }
        }
        let k = self.samples as f64;
        acc.iter().map(|a| a / k).collect()
    }
}

/// A DR-submodular objective with value and gradient oracles.
#[derive(Clone, Debug)]
pub enum Objective {
    Coverage(Coverage),
    DirectedCut(DirectedCut),
    Linear(Linear),
    Sampled(Sampled),
}

impl From<Coverage> for Objective {
    fn from(c: Coverage) -> Self {
        Objective::Coverage(c)
    }
}

impl From<DirectedCut> for Objective {
    fn from(c: DirectedCut) -> Self {
        Objective::DirectedCut(c)
    }
}

impl From<Linear> for Objective {
    fn from(c: Linear) -> Self {
        Objective::Linear(c)
    }
}

impl From<Sampled> for Objective {
    fn from(c: Sampled) -> Self {
        Objective::Sampled(c)
    }
}

fn clamp_checked(n: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(n, x.len())?;
    check_nonnegative(x)?;
    Ok(x.iter().map(|&v| v.min(1.0)).collect())
}

impl Objective {
    pub fn dim(&self) -> usize {
        match self {
            Objective::Coverage(c) => c.n,
            Objective::DirectedCut(c) => c.n,
            Objective::Linear(c) => c.weights.len(),
            Objective::Sampled(s) => s.base.ground_size(),
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            Objective::Coverage(_) | Objective::Linear(_) => true,
            Objective::DirectedCut(_) => false,
            Objective::Sampled(s) => s.monotone,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Objective::Coverage(_) => "coverage",
            Objective::DirectedCut(_) => "directed-cut",
            Objective::Linear(_) => "linear",
            Objective::Sampled(_) => "sampled",
        }
    }

    /// Whether value and gradient are exact rather than estimated.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Objective::Sampled(_))
    }

    /// `F(x)`, with entries above one clamped. Negative entries are rejected.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let y = clamp_checked(self.dim(), x)?;
        Ok(match self {
            Objective::Coverage(c) => c.eval_clamped(&y),
            Objective::DirectedCut(c) => c
                .arcs
                .iter()
                .map(|a| a.weight * y[a.from] * (1.0 - y[a.to]))
                .sum(),
            Objective::Linear(c) => c.weights.iter().zip(&y).map(|(w, v)| w * v).sum(),
            Objective::Sampled(s) => s.estimate(&y).0,
        })
    }

    /// Monte-Carlo value with its standard error; exact kinds report zero error.
    pub fn eval_with_stderr(&self, x: &[f64]) -> Result<(f64, f64)> {
        match self {
            Objective::Sampled(s) => {
                let y = clamp_checked(self.dim(), x)?;
                Ok(s.estimate(&y))
            }
            _ => Ok((self.eval(x)?, 0.0)),
        }
    }

    /// `∇F(x)`. Arguments above one are clamped and their partials are zero.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = clamp_checked(self.dim(), x)?;
        let mut g = match self {
            Objective::Coverage(c) => c.grad_clamped(&y),
            Objective::DirectedCut(c) => {
                let mut g = vec![0.0; c.n];
                for a in &c.arcs {
                    g[a.from] += a.weight * (1.0 - y[a.to]);
                    g[a.to] -= a.weight * y[a.from];
                }
                g
            }
            Objective::Linear(c) => c.weights.clone(),
            Objective::Sampled(s) => s.grad_estimate(&y),
        };
        for (gi, &xi) in g.iter_mut().zip(x) {
            if xi > 1.0 {
                *gi = 0.0;
            }
        }
        Ok(g)
    }

    /// `(F(1_1), .., F(1_n))`.
    pub fn singleton_values(&self) -> Vec<f64> {
        self.scaled_singleton_values(&vec![1.0; self.dim()])
    }

    /// `F(u_i 1_i)` for every coordinate, where `u` gives the largest feasible
    /// extent of each singleton direction.
    pub fn scaled_singleton_values(&self, extents: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        (0..n)
            .map(|i| {
                x[i] = extents[i].clamp(0.0, 1.0);
                let v = self.eval(&x).unwrap_or(0.0);
                x[i] = 0.0;
                v
            })
            .collect()
    }

    /// Value of the underlying set function at an indicator vector.
    pub fn set_value(&self, set: &[bool]) -> f64 {
        self.set_function().value(set)
    }

    pub fn set_function(&self) -> &dyn SetFunction {
        match self {
            Objective::Coverage(c) => c,
            Objective::DirectedCut(c) => c,
            Objective::Linear(c) => c,
            Objective::Sampled(s) => s.base.as_ref(),
        }
    }

    /// An upper bound on `|∇_i F(x)|` over the unit cube.
    pub fn gradient_bound(&self) -> f64 {
        match self {
            Objective::Coverage(c) => c
                .element_items
                .iter()
                .map(|items| items.iter().map(|&u| c.weights[u]).sum::<f64>())
                .fold(0.0, f64::max),
            Objective::DirectedCut(c) => {
                let mut deg = vec![0.0; c.n];
                for a in &c.arcs {
                    deg[a.from] += a.weight;
                    deg[a.to] += a.weight;
                }
                deg.into_iter().fold(0.0, f64::max)
            }
            Objective::Linear(c) => c.weights.iter().copied().fold(0.0, f64::max),
            Objective::Sampled(s) => {
                // Marginals of a submodular g are bounded by singleton gains;
                // for arbitrary g this is only a heuristic scale.
                let n = s.base.ground_size();
                let empty = vec![false; n];
                let g0 = s.base.value(&empty);
                let mut set = empty;
                (0..n)
                    .map(|i| {
                        set[i] = true;
                        let v = (s.base.value(&set) - g0).abs();
                        set[i] = false;
                        v
                    })
                    .fold(0.0, f64::max)
            }
        }
    }
}
