//! Epoch-based solvers for `max f(x)` over a polymatroid `P`.
//!
//! Each epoch starts from a tiny uniform point and repeatedly water-fills
//! the coordinates whose gradient at the future point `(1+ε)x` lies in the
//! top bucket (powers of `1+ε`) among coordinates outside the tight set.
//! The non-monotone variant evaluates through `g(x) = f((1−z)∘x + z)` and
//! merges epochs with the same damping.

use crate::error::{check_dim, check_eps, Error, Result};
use crate::objective::Objective;
use crate::polymatroid::{waterfill, PolymatroidOracle, TightSet};
use crate::report::{SolveReport, Termination};

const GAIN_TOL: f64 = 1e-12;
const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct MatroidSolverConfig {
    pub eps: f64,
    /// The guess `M` for the optimum value.
    pub guess: f64,
    /// Gradient scale `D`; defaults to `max(n/ε, max_i f(1_i)/M)`.
    pub d_scale: Option<f64>,
    /// Defaults to the iteration bound `64 ln²(n/ε)/ε³`.
    pub max_inner_iterations: Option<usize>,
    /// Record `z` after every epoch.
    pub record_trajectory: bool,
}

impl MatroidSolverConfig {
    pub fn new(eps: f64, guess: f64) -> Self {
        Self {
            eps,
            guess,
            d_scale: None,
            max_inner_iterations: None,
            record_trajectory: false,
        }
    }

    fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        if !(self.guess > 0.0 && self.guess.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "guess",
                reason: format!("{} must be positive and finite", self.guess),
            });
        }
        if let Some(d) = self.d_scale {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "d_scale",
                    reason: format!("{d} must be positive and finite"),
                });
            }
        }
        Ok(())
    }
}

/// Epoch count `J = ⌈1/ε⌉` and the effective `ε' = 1/J`.
pub fn epoch_schedule(eps: f64) -> (usize, f64) {
    let j = (1.0 / eps - 1e-9).ceil().max(1.0) as usize;
    (j, 1.0 / j as f64)
}

/// `64 ln²(n/ε) / ε³`.
pub fn matroid_iteration_bound(n: usize, eps: f64) -> f64 {
    let l = (n as f64 / eps).ln();
    64.0 * l * l / (eps * eps * eps)
}

/// Largest power of `1 + eps` not exceeding `v`, for `v > 0`.
pub fn bucket(v: f64, eps: f64) -> f64 {
    let base = 1.0 + eps;
    let k = (v.ln() / base.ln()).floor();
    let mut b = base.powf(k);
    while b > v {
        b /= base;
    }
    while b * base <= v {
        b *= base;
    }
    b
}

pub fn solve_matroid_monotone(
    obj: &Objective,
    pm: &dyn PolymatroidOracle,
    cfg: &MatroidSolverConfig,
) -> Result<SolveReport> {
    if !obj.is_monotone() {
        return Err(Error::Precondition(
            "the monotone matroid solver needs a monotone objective".into(),
        ));
    }
    run(obj, pm, cfg, false)
}

pub fn solve_matroid_nonmonotone(
    obj: &Objective,
    pm: &dyn PolymatroidOracle,
    cfg: &MatroidSolverConfig,
) -> Result<SolveReport> {
    run(obj, pm, cfg, true)
}

/// The point at which `g` (or its gradient) queries `f`.
fn lift(x: &[f64], z: &[f64], damped: bool) -> Vec<f64> {
    x.iter()
        .zip(z)
        .map(|(&xi, &zi)| {
            if damped {
                (1.0 - zi) * xi + zi
            } else {
                xi + zi
            }
        })
        .collect()
}

fn merge(z: &mut [f64], x: &[f64], damped: bool) {
    for (zi, &xi) in z.iter_mut().zip(x) {
        *zi = if damped {
            *zi + (1.0 - *zi) * xi
        } else {
            *zi + xi
        };
    }
}

fn initial_point(pm: &dyn PolymatroidOracle, n: usize, base: f64, scale: f64) -> Result<Vec<f64>> {
    let mut x = vec![0.0; n];
    for (i, xi) in x.iter_mut().enumerate() {
        if pm.rank(&[i])? > 0.0 {
            *xi = base;
        }
    }
    for _ in 0..1100 {
        if pm.contains(&x, scale)? {
            return Ok(x);
        }
        x.iter_mut().for_each(|v| *v *= 0.5);
    }
    Err(Error::Internal(
        "no positive starting point fits the polytope".into(),
    ))
}

fn run(
    obj: &Objective,
    pm: &dyn PolymatroidOracle,
    cfg: &MatroidSolverConfig,
    damped: bool,
) -> Result<SolveReport> {
    cfg.validate()?;
    let n = pm.dim();
    check_dim(n, obj.dim())?;
    let (epochs, e) = epoch_schedule(cfg.eps);
    let big_m = cfg.guess;
    let scale = e / (1.0 + e);
    let d_scale = cfg.d_scale.unwrap_or_else(|| {
        let top = obj.singleton_values().into_iter().fold(0.0, f64::max);
        (n as f64 / e).max(top / big_m)
    });
    let bound = matroid_iteration_bound(n, e);
    let cap = cfg.max_inner_iterations.unwrap_or(bound.ceil() as usize);
    let x0 = initial_point(pm, n, e * e / (n as f64 * d_scale), scale)?;

    let name = if damped {
        "matroid-nonmonotone"
    } else {
        "matroid-monotone"
    };
    let mut report = SolveReport::new(name, n, big_m);
    let mut z = vec![0.0; n];
    let mut trajectory = Vec::new();
    let mut iterations = 0usize;
    let mut epochs_run = 0usize;
    let mut stalled_epochs = 0usize;

    'epochs: for j in 0..epochs {
        let g = |x: &[f64]| obj.eval(&lift(x, &z, damped));
        let g0 = g(&x0)?;
        let target = if damped {
            e * (((1.0 - scale).powi(j as i32) - 10.0 * e) * big_m - g0)
        } else {
            e * ((1.0 - 10.0 * e) * big_m - g0)
        };
        let mut x = x0.clone();
        let mut gx = g0;
        let mut prev_v2 = f64::INFINITY;
        let mut prev_tight: Option<TightSet> = None;
        epochs_run += 1;

        while gx - g0 < target - GAIN_TOL * big_m {
            if iterations >= cap {
                report.termination = Termination::IterationCap;
                merge(&mut z, &x, damped);
                break 'epochs;
            }
            let future: Vec<f64> = x.iter().map(|&v| (1.0 + e) * v).collect();
            let mut c = obj.grad(&lift(&future, &z, damped))?;
            if damped {
                for (ci, &zi) in c.iter_mut().zip(&z) {
                    *ci *= 1.0 - zi;
                }
            }
            let tight = pm.tight_set(&x, scale)?;
            if tight.is_full() {
                report.termination = Termination::GuessRejected;
                merge(&mut z, &x, damped);
                break 'epochs;
            }
            let v1 = (0..n)
                .filter(|&i| !tight.contains(i))
                .map(|i| c[i])
                .fold(f64::NEG_INFINITY, f64::max);
            if v1 <= 0.0 {
                stalled_epochs += 1;
                break;
            }
            let v2 = bucket(v1, e);
            report
                .diagnostics
                .check("bucket_monotone", v2 <= prev_v2 * (1.0 + CHECK_TOL), || {
                    format!("epoch {j}, iteration {iterations}: v2 rose from {prev_v2} to {v2}")
                });
            if let Some(prev) = &prev_tight {
                report
                    .diagnostics
                    .check("tight_set_growth", prev.is_subset_of(&tight), || {
                        format!(
                            "epoch {j}, iteration {iterations}: {:?} ⊄ {:?}",
                            prev.members(),
                            tight.members()
                        )
                    });
            }
            let eligible: Vec<bool> = c.iter().map(|&ci| ci >= v2).collect();
            let y = waterfill(pm, &x, &eligible, e)?;
            if y.iter().all(|&v| v == 0.0) {
                report.termination = Termination::GuessRejected;
                merge(&mut z, &x, damped);
                break 'epochs;
            }
            let next: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let g_next = g(&next)?;
            report.diagnostics.check(
                "inner_gain",
                g_next >= gx - CHECK_TOL * big_m.max(gx.abs()),
                || format!("epoch {j}, iteration {iterations}: g fell from {gx} to {g_next}"),
            );
            x = next;
            gx = g_next;
            prev_v2 = v2;
            prev_tight = Some(tight);
            iterations += 1;
        }

        report
            .diagnostics
            .check("epoch_increment", pm.contains(&x, scale)?, || {
                format!("epoch {j}: increment leaves (ε/(1+ε))·P")
            });
        merge(&mut z, &x, damped);
        if damped {
            let zmax = z.iter().copied().fold(0.0, f64::max);
            let limit = 1.0 - (1.0 - scale).powi(j as i32 + 1);
            report
                .diagnostics
                .check("damping_invariant", zmax <= limit + CHECK_TOL, || {
                    format!("epoch {j}: ‖z‖∞ = {zmax}, bound {limit}")
                });
        }
        if cfg.record_trajectory {
            trajectory.push(z.clone());
        }
    }

    report
        .diagnostics
        .check("iteration_bound", iterations as f64 <= bound, || {
            format!("{iterations} iterations, bound {bound}")
        });
    report.diagnostics.metric("iteration_bound", bound);
    report.diagnostics.metric("d_scale", d_scale);
    report
        .diagnostics
        .metric("stalled_epochs", stalled_epochs as f64);
    report.epochs = epochs_run;
    report.inner_iterations = iterations;
    report.adaptive_rounds = iterations + epochs_run;
    report.value = obj.eval(&z)?;
    report.slack = pm.margin(&z, 1.0)?;
    report.feasible = pm.contains(&z, 1.0)?;
    report.solution = z;
    if cfg.record_trajectory {
        report.trajectory = Some(trajectory);
    }
    Ok(report)
}
