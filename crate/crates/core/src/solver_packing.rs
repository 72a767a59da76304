//! Softmax-potential solvers for `max f(x)` subject to `Ax ≤ (1 − ε)1`.
//!
//! The monotone solver grows `x` multiplicatively along coordinates whose
//! gradient at the future point `(1+η)x` beats the price `λ Aᵀ∇smax(Ax)`.
//! The non-monotone solver damps each step by `1 − x` and prices against an
//! undamped companion `z`, whose potential `t = smax(Az)` plays the role of
//! time.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_eps, Error, Result};
use crate::matrix::{inf_norm, SparseMatrix};
use crate::objective::Objective;
use crate::report::{SolveReport, Termination};
use crate::softmax::{smax, smax_grad, SoftmaxParams};

/// Gradients below this multiple of `M` are treated as zero.
const GRAD_FLOOR: f64 = 1e-15;
/// Relative slack on the `max m_i ≥ ε` test.
const REJECT_SLACK: f64 = 1e-6;
const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum NormalizationEvent {
    /// An entry below `ε/n` was raised to `ε/n`.
    RaisedEntry {
        row: usize,
        col: usize,
        from: f64,
        to: f64,
    },
    /// A column with an entry above `n/ε` was fixed to zero.
    FixedColumn { col: usize, max_entry: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingInstance {
    a: SparseMatrix,
    eps: f64,
    includes_box: bool,
    original_rows: usize,
    fixed_zero: Vec<bool>,
    transcript: Vec<NormalizationEvent>,
}

impl PackingInstance {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn includes_box(&self) -> bool {
        self.includes_box
    }

    /// Row count before box rows were appended.
    pub fn original_rows(&self) -> usize {
        self.original_rows
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn fixed_zero(&self) -> &[bool] {
        &self.fixed_zero
    }

    pub fn transcript(&self) -> &[NormalizationEvent] {
        &self.transcript
    }

    /// `‖Ax‖∞` against the normalized matrix.
    pub fn max_load(&self, x: &[f64]) -> f64 {
        inf_norm(&self.a.mul(x))
    }

    /// Whether `Ax ≤ bound · 1` and fixed coordinates are zero.
    pub fn is_feasible(&self, x: &[f64], bound: f64) -> bool {
        x.len() == self.cols()
            && x.iter().all(|&v| v >= 0.0)
            && x.iter()
                .zip(&self.fixed_zero)
                .all(|(&v, &f)| !f || v == 0.0)
            && self.max_load(x) <= bound + CHECK_TOL
    }

    /// The largest `u ≤ 1` with `u · 1_i` feasible for `Ax ≤ (1−ε)1`.
    pub fn singleton_extents(&self) -> Vec<f64> {
        self.a
            .col_max()
            .iter()
            .zip(&self.fixed_zero)
            .map(|(&c, &f)| {
                if f || c <= 0.0 {
                    0.0
                } else {
                    ((1.0 - self.eps) / c).min(1.0)
                }
            })
            .collect()
    }
}

/// Brings `A` into the range the solvers assume: every nonzero entry in
/// `[ε/n, n/ε]`. Small entries are raised (this only tightens the
/// constraints); columns with a huge entry are fixed to zero. With
/// `include_box`, identity rows enforcing `x ≤ (1−ε)1` are appended first.
pub fn normalize_packing(a: &SparseMatrix, eps: f64, include_box: bool) -> Result<PackingInstance> {
    check_eps(eps)?;
    let n = a.cols();
    if n == 0 {
        return Err(Error::Empty("packing matrix has no columns"));
    }
    let original_rows = a.rows();
    let mut full = if include_box {
        a.vstack(&SparseMatrix::identity(n))?
    } else {
        a.clone()
    };
    if full.rows() == 0 {
        return Err(Error::Empty("packing matrix has no rows"));
    }
    let colmax = full.col_max();
    if let Some(column) = colmax.iter().position(|&c| c == 0.0) {
        return Err(Error::ZeroColumn { column });
    }

    let lo = eps / n as f64;
    let hi = n as f64 / eps;
    let mut transcript = Vec::new();
    let mut fixed_zero = vec![false; n];
    for (col, &c) in colmax.iter().enumerate() {
        if c > hi {
            fixed_zero[col] = true;
            transcript.push(NormalizationEvent::FixedColumn { col, max_entry: c });
        }
    }
    full.map_entries(|row, col, v| {
        if fixed_zero[col] {
            0.0
        } else if v < lo {
            transcript.push(NormalizationEvent::RaisedEntry {
                row,
                col,
                from: v,
                to: lo,
            });
            lo
        } else {
            v
        }
    });
    Ok(PackingInstance {
        a: full,
        eps,
        includes_box: include_box,
        original_rows,
        fixed_zero,
        transcript,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingSolverConfig {
    /// The guess `M` for the optimum value.
    pub guess: f64,
    /// Defaults to the iteration bound of the algorithm.
    pub max_iterations: Option<usize>,
    pub record_trajectory: bool,
}

impl PackingSolverConfig {
    pub fn new(guess: f64) -> Self {
        Self {
            guess,
            max_iterations: None,
            record_trajectory: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.guess > 0.0 && self.guess.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "guess",
                reason: format!("{} must be positive and finite", self.guess),
            });
        }
        Ok(())
    }
}

pub fn monotone_eta(eps: f64, m: usize) -> f64 {
    eps / (2.0 * (2.0 + (m as f64).ln()))
}

pub fn nonmonotone_eta(eps: f64, m: usize) -> f64 {
    eps / (2.0 * (m.max(2) as f64).ln())
}

fn log_m(m: usize) -> f64 {
    (m as f64).ln().max(1.0)
}

/// `64 ln(n/ε) ln m / ε²`.
pub fn monotone_iteration_bound(n: usize, m: usize, eps: f64) -> f64 {
    64.0 * (n as f64 / eps).ln() * log_m(m) / (eps * eps)
}

/// `64 ln(n/ε) ln(1/ε) ln m / ε²`.
pub fn nonmonotone_iteration_bound(n: usize, m: usize, eps: f64) -> f64 {
    64.0 * (n as f64 / eps).ln() * (1.0 / eps).ln() * log_m(m) / (eps * eps)
}

/// `16 ln(n/ε) / η`, the per-coordinate cap on `Σ_j m_i`.
pub fn coordinate_budget(n: usize, eps: f64, eta: f64) -> f64 {
    16.0 * (n as f64 / eps).ln() / eta
}

fn initial_point(inst: &PackingInstance) -> Vec<f64> {
    let n = inst.cols() as f64;
    inst.a
        .col_max()
        .iter()
        .zip(&inst.fixed_zero)
        .map(|(&c, &f)| if f { 0.0 } else { inst.eps / (n * c) })
        .collect()
}

fn prepare(obj: &Objective, inst: &PackingInstance, cfg: &PackingSolverConfig) -> Result<()> {
    cfg.validate()?;
    check_dim(inst.cols(), obj.dim())
}

fn multipliers(c: &[f64], w: &[f64], lambda: f64) -> Vec<f64> {
    c.iter()
        .zip(w)
        .map(|(&ci, &wi)| {
            if ci > 0.0 {
                (1.0 - lambda * wi / ci).max(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn finish(
    report: &mut SolveReport,
    obj: &Objective,
    inst: &PackingInstance,
    x: Vec<f64>,
    p: &SoftmaxParams,
) -> Result<()> {
    let eps = inst.eps;
    let ax = inst.a.mul(&x);
    let load = inf_norm(&ax);
    let s = smax(&ax, p)?;
    report.diagnostics.check(
        "final_potential",
        load <= s + CHECK_TOL && s <= 1.0 - 2.0 * eps + CHECK_TOL,
        || format!("‖Ax‖∞ = {load}, smax = {s}, bound {}", 1.0 - 2.0 * eps),
    );
    report.diagnostics.metric("final_smax", s);
    report.diagnostics.metric("eta", p.eta());
    report.value = obj.eval(&x)?;
    report.slack = 1.0 - 2.0 * eps - load;
    report.feasible = inst.is_feasible(&x, 1.0 - 2.0 * eps);
    report.solution = x;
    Ok(())
}

/// Monotone objectives. Returns `x` with `‖Ax‖∞ ≤ 1 − 2ε` and, for a valid
/// guess, `f(x) ≥ (1 − e^{−1+10ε}) M`.
pub fn solve_packing_monotone(
    obj: &Objective,
    inst: &PackingInstance,
    cfg: &PackingSolverConfig,
) -> Result<SolveReport> {
    prepare(obj, inst, cfg)?;
    if !obj.is_monotone() {
        return Err(Error::Precondition(
            "the monotone packing solver needs a monotone objective".into(),
        ));
    }
    let (n, m, eps, big_m) = (inst.cols(), inst.rows(), inst.eps, cfg.guess);
    let eta = monotone_eta(eps, m);
    let p = SoftmaxParams::new(eta, m)?;
    let bound = monotone_iteration_bound(n, m, eps);
    let cap = cfg.max_iterations.unwrap_or(bound.ceil() as usize);
    let threshold = (1.0 - (-1.0 + 10.0 * eps).exp()) * big_m;
    let floor = big_m * ((10.0 * eps - 1.0).exp() - eta);

    let mut report = SolveReport::new("packing-monotone", n, big_m);
    let mut trajectory = Vec::new();
    let mut x = initial_point(inst);
    let mut fx = obj.eval(&x)?;
    let mut msum = vec![0.0; n];
    let mut iterations = 0usize;
    let mut clamps = Vec::new();
    if cfg.record_trajectory {
        trajectory.push(x.clone());
    }

    while fx <= threshold {
        if iterations >= cap {
            report.termination = Termination::IterationCap;
            break;
        }
        let mut lambda = big_m - (1.0 + eta) * fx;
        if lambda < floor {
            lambda = floor;
            clamps.push(iterations);
        }
        let future: Vec<f64> = x.iter().map(|&v| (1.0 + eta) * v).collect();
        let mut c = obj.grad(&future)?;
        for ci in &mut c {
            if *ci < GRAD_FLOOR * big_m {
                *ci = 0.0;
            }
        }
        let ax = inst.a.mul(&x);
        let s0 = smax(&ax, &p)?;
        let w = inst.a.mul_t(&smax_grad(&ax, &p)?);
        let mi = multipliers(&c, &w, lambda);
        let top = mi.iter().copied().fold(0.0, f64::max);
        if top < eps * (1.0 - REJECT_SLACK) {
            report.termination = Termination::GuessRejected;
            report.diagnostics.metric("rejected_max_multiplier", top);
            break;
        }
        let next: Vec<f64> = (0..n).map(|i| x[i] + (eta * x[i]) * mi[i]).collect();
        let f_next = obj.eval(&next)?;
        let s1 = smax(&inst.a.mul(&next), &p)?;
        let rise = s1 - s0;
        if rise > 0.0 {
            report.diagnostics.check(
                "increase_rate",
                f_next - fx >= lambda * rise - CHECK_TOL * big_m,
                || {
                    format!(
                        "iteration {iterations}: Δf = {}, λ·Δsmax = {}",
                        f_next - fx,
                        lambda * rise
                    )
                },
            );
        }
        if f_next <= threshold {
            report
                .diagnostics
                .check("potential_invariant", s1 <= 1.0 - eps + CHECK_TOL, || {
                    format!("iteration {iterations}: smax = {s1}")
                });
        }
        for (acc, v) in msum.iter_mut().zip(&mi) {
            *acc += v;
        }
        x = next;
        fx = f_next;
        iterations += 1;
        if cfg.record_trajectory {
            trajectory.push(x.clone());
        }
    }

    let budget = coordinate_budget(n, eps, eta);
    let hi = n as f64 / eps;
    for i in 0..n {
        if x[i] <= hi {
            report
                .diagnostics
                .check("coordinate_budget", msum[i] <= budget, || {
                    format!("coordinate {i}: Σm = {}, budget {budget}", msum[i])
                });
        }
    }
    report.diagnostics.metric(
        "max_multiplier_sum",
        msum.iter().copied().fold(0.0, f64::max),
    );
    report
        .diagnostics
        .metric("lambda_clamps", clamps.len() as f64);
    let early = clamps.iter().filter(|&&k| k + 1 < iterations).count();
    report.diagnostics.check("lambda_floor", early == 0, || {
        format!("λ floor applied before the final iteration at {clamps:?}")
    });
    report
        .diagnostics
        .check("iteration_bound", iterations as f64 <= bound, || {
            format!("{iterations} iterations, bound {bound}")
        });
    report.diagnostics.metric("iteration_bound", bound);
    report.inner_iterations = iterations;
    report.adaptive_rounds = iterations + 1;
    if cfg.record_trajectory {
        report.trajectory = Some(trajectory);
    }
    finish(&mut report, obj, inst, x, &p)?;
    Ok(report)
}

/// Arbitrary non-negative DR-submodular objectives; `inst` must carry the box
/// rows. Returns `x` with `‖Ax‖∞ ≤ 1 − 2ε` and, for a valid guess,
/// `f(x) ≥ e^{−1−10ε} M`.
pub fn solve_packing_nonmonotone(
    obj: &Objective,
    inst: &PackingInstance,
    cfg: &PackingSolverConfig,
) -> Result<SolveReport> {
    prepare(obj, inst, cfg)?;
    if !inst.includes_box {
        return Err(Error::Precondition(
            "the non-monotone packing solver needs the box rows x ≤ (1−ε)1".into(),
        ));
    }
    let (n, m, eps, big_m) = (inst.cols(), inst.rows(), inst.eps, cfg.guess);
    let eta = nonmonotone_eta(eps, m);
    let p = SoftmaxParams::new(eta, m)?;
    let bound = nonmonotone_iteration_bound(n, m, eps);
    let cap = cfg.max_iterations.unwrap_or(bound.ceil() as usize);
    let threshold = (-1.0 - 10.0 * eps).exp() * big_m;
    let decay = 1.0 - 2.0 * std::f64::consts::E * eps;

    let mut report = SolveReport::new("packing-nonmonotone", n, big_m);
    let mut trajectory = Vec::new();
    let mut x = initial_point(inst);
    let mut z = x.clone();
    let mut t = smax(&inst.a.mul(&z), &p)?;
    let mut fx = obj.eval(&x)?;
    let mut msum = vec![0.0; n];
    let mut iterations = 0usize;
    if cfg.record_trajectory {
        trajectory.push(x.clone());
    }

    while fx <= threshold {
        if iterations >= cap {
            report.termination = Termination::IterationCap;
            break;
        }
        let lambda = big_m * ((-t).exp() - 2.0 * eps) - fx;
        if lambda <= 0.0 {
            report.termination = Termination::GuessRejected;
            report.diagnostics.metric("rejected_lambda", lambda);
            break;
        }
        let future: Vec<f64> = x.iter().map(|&v| (1.0 + eta) * v).collect();
        let g = obj.grad(&future)?;
        let c: Vec<f64> = (0..n)
            .map(|i| {
                let ci = ((1.0 - x[i]) * g[i]).max(0.0);
                if ci < GRAD_FLOOR * big_m {
                    0.0
                } else {
                    ci
                }
            })
            .collect();
        let w = inst.a.mul_t(&smax_grad(&inst.a.mul(&z), &p)?);
        let mi = multipliers(&c, &w, lambda);
        let top = mi.iter().copied().fold(0.0, f64::max);
        if top < eps * (1.0 - REJECT_SLACK) {
            report.termination = Termination::GuessRejected;
            report.diagnostics.metric("rejected_max_multiplier", top);
            break;
        }
        let d: Vec<f64> = (0..n).map(|i| (eta * x[i]) * mi[i]).collect();
        let next: Vec<f64> = (0..n).map(|i| x[i] + d[i] * (1.0 - x[i])).collect();
        let z_next: Vec<f64> = (0..n).map(|i| z[i] + d[i]).collect();
        let t_next = smax(&inst.a.mul(&z_next), &p)?;
        let f_next = obj.eval(&next)?;

        let rise = t_next - t;
        if rise > 0.0 {
            report.diagnostics.check(
                "increase_rate",
                f_next - fx >= lambda * rise - CHECK_TOL * big_m,
                || {
                    format!(
                        "iteration {iterations}: Δf = {}, λ·Δt = {}",
                        f_next - fx,
                        lambda * rise
                    )
                },
            );
        }
        let xmax = inf_norm(&next);
        let cap_x = (1.0 + eps) * (1.0 - (-t_next).exp());
        report
            .diagnostics
            .check("damping_invariant", xmax <= cap_x + CHECK_TOL, || {
                format!("iteration {iterations}: ‖x‖∞ = {xmax}, (1+ε)(1−e^-t) = {cap_x}")
            });
        if t_next <= 1.0 {
            let lhs = t_next.exp() * f_next;
            let rhs = decay * rise * big_m + t.exp() * fx;
            report
                .diagnostics
                .soft_check("phase_gain", lhs >= rhs - CHECK_TOL * big_m, || {
                    format!("iteration {iterations}: e^t'f(x') = {lhs}, bound {rhs}")
                });
        }
        for (acc, v) in msum.iter_mut().zip(&mi) {
            *acc += v;
        }
        x = next;
        z = z_next;
        t = t_next;
        fx = f_next;
        iterations += 1;
        if cfg.record_trajectory {
            trajectory.push(x.clone());
        }
    }

    report.diagnostics.metric(
        "max_multiplier_sum",
        msum.iter().copied().fold(0.0, f64::max),
    );
    report.diagnostics.metric("final_time", t);
    report
        .diagnostics
        .check("iteration_bound", iterations as f64 <= bound, || {
            format!("{iterations} iterations, bound {bound}")
        });
    report.diagnostics.metric("iteration_bound", bound);
    report.inner_iterations = iterations;
    report.adaptive_rounds = iterations + 1;
    if cfg.record_trajectory {
        report.trajectory = Some(trajectory);
    }
    finish(&mut report, obj, inst, x, &p)?;
    Ok(report)
}
