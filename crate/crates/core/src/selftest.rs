//! Seeded property suite behind `drsub selftest`: every check compares a
//! library routine with an independent oracle on random desk-scale draws.

use rand::Rng;
use serde::Serialize;

use crate::generators::{self, rng};
use crate::guess::{constraint_ladder, solve_with_ladder, Constraint, GuessConfig};
use crate::oracle::{
    brute_force_matroid_opt, exact_multilinear, exhaustive_membership, exhaustive_tight_set,
    finite_diff_grad, grid_fractional_opt,
};
use crate::polymatroid::{PolymatroidInstance, PolymatroidOracle};
use crate::report::REPORT_SCHEMA;
use crate::softmax::{increment_bound, multiplier_bound, multiplier_vector, smax, SoftmaxParams};
use crate::solver_packing::normalize_packing;

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub schema: u32,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<PropertyResult>,
}

impl SelftestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

struct Tally {
    name: &'static str,
    trials: usize,
    violations: usize,
    first: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            violations: 0,
            first: None,
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
            self.first.get_or_insert_with(detail);
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            name: self.name.to_string(),
            trials: self.trials,
            violations: self.violations,
            first_violation: self.first,
        }
    }
}

fn random_polymatroid<R: Rng>(r: &mut R, n: usize, k: usize) -> PolymatroidInstance {
    match k % 4 {
        0 => generators::uniform_matroid(r, n),
        1 => generators::partition_matroid(r, n),
        2 => generators::laminar(r, n, true),
        _ => generators::laminar(r, n, false),
    }
}

fn objectives(seed: u64) -> Vec<PropertyResult> {
    let mut r = rng(seed);
    let mut grad = Tally::new("gradient_vs_finite_differences");
    let mut closed = Tally::new("closed_form_vs_enumeration");
    let mut dr = Tally::new("diminishing_returns");
    for k in 0..150 {
        let n = r.gen_range(1..=7);
        let obj = match k % 3 {
            0 => generators::coverage(&mut r, n, n + 3),
            1 => generators::directed_cut(&mut r, n, 0.4),
            _ => generators::linear(&mut r, n),
        };
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..0.99)).collect();
        let g = obj.grad(&x).unwrap();
        let fd = finite_diff_grad(&obj, &x, 1e-6).unwrap();
        let scale = g.iter().fold(1e-12f64, |s, v| s.max(v.abs()));
        let err = g
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        grad.record(err <= 1e-5, || {
            format!("{} n={n}: relative error {err:e}", obj.kind_name())
        });

        let exact = exact_multilinear(&obj, &x).unwrap();
        let value = obj.eval(&x).unwrap();
        closed.record((exact - value).abs() <= TOL * exact.abs().max(1.0), || {
            format!("{}: {value} vs {exact}", obj.kind_name())
        });

        let y: Vec<f64> = x
            .iter()
            .map(|&v| v + (1.0 - v) * r.gen_range(0.0..1.0))
            .collect();
        let gy = obj.grad(&y).unwrap();
        dr.record(g.iter().zip(&gy).all(|(a, b)| *b <= a + TOL), || {
            format!("{}: x={x:?} y={y:?}", obj.kind_name())
        });
    }
    vec![grad.finish(), closed.finish(), dr.finish()]
}

fn softmax_checks(seed: u64) -> Vec<PropertyResult> {
    let mut r = rng(seed ^ 0x5f);
    let mut incr = Tally::new("softmax_increment_bound");
    let mut mult = Tally::new("softmax_multiplier_bound");
    while incr.trials < 300 {
        let (m, n) = (r.gen_range(1..=4), r.gen_range(1..=5));
        let a = generators::packing_matrix(&mut r, m, n);
        let eta = r.gen_range(0.01..0.4);
        let p = SoftmaxParams::new(eta, m).unwrap();
        let mut x: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let load = a.mul(&x).into_iter().fold(0.0, f64::max);
        let target = r.gen_range(0.05..1.0);
        x.iter_mut().for_each(|v| *v *= target / load);
        let c: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..2.0)).collect();
        let lambda = r.gen_range(0.01..3.0);
        let md = multiplier_vector(&x, &a, &c, lambda, &p).unwrap();
        let d: Vec<f64> = (0..n).map(|i| eta * md[i] * x[i]).collect();
        if a.mul(&d).into_iter().fold(0.0, f64::max) / eta > 0.5 {
            continue;
        }
        let xd: Vec<f64> = x.iter().zip(&d).map(|(u, v)| u + v).collect();
        let s1 = smax(&a.mul(&xd), &p).unwrap();
        let s0 = smax(&a.mul(&x), &p).unwrap();
        let rhs = increment_bound(&x, &d, &a, &p).unwrap();
        incr.record(s1 <= rhs + TOL, || format!("x={x:?} d={d:?} η={eta}"));
        let gain: f64 = c.iter().zip(&d).map(|(u, v)| u * v).sum();
        let bound = multiplier_bound(&x, &md, &a, &p).unwrap();
        mult.record(
            s1 <= bound + TOL && (gain <= 0.0 || s1 - s0 <= gain / lambda + TOL),
            || format!("x={x:?} c={c:?} λ={lambda} η={eta}"),
        );
    }
    vec![incr.finish(), mult.finish()]
}

fn polymatroid_checks(seed: u64) -> Vec<PropertyResult> {
    let mut r = rng(seed ^ 0xa7);
    let mut member = Tally::new("membership_vs_exhaustive");
    let mut tight = Tally::new("tight_set_vs_exhaustive");
    let mut water = Tally::new("waterfill_feasible_and_capped");
    let mut exchange = Tally::new("exchange_vector_postconditions");
    let mut rank = Tally::new("rank_submodular");
    for k in 0..200 {
        let n = r.gen_range(2..=6);
        let pm = random_polymatroid(&mut r, n, k);
        let scale = r.gen_range(0.05..1.0);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..scale)).collect();
        member.record(
            pm.contains(&x, scale).unwrap() == exhaustive_membership(&pm, &x, scale).unwrap(),
            || format!("{:?} x={x:?} scale={scale}", pm.kind()),
        );

        let mut t = generators::point_in(&mut r, &pm, scale);
        for i in 0..n {
            if r.gen_bool(0.4) {
                t[i] += pm.max_increase(&t, i, scale).unwrap();
            }
        }
        let ours = pm.tight_set(&t, scale).unwrap();
        tight.record(
            ours.indicator() == &exhaustive_tight_set(&pm, &t, scale).unwrap()[..],
            || format!("{:?} x={t:?}", pm.kind()),
        );

        let eps = 0.05;
        let inner = eps / (1.0 + eps);
        let base = generators::point_in(&mut r, &pm, inner);
        let y = pm.waterfill(&base, &vec![true; n], eps).unwrap();
        let sum: Vec<f64> = base.iter().zip(&y).map(|(u, v)| u + v).collect();
        water.record(
            exhaustive_membership(&pm, &sum, inner).unwrap()
                && y.iter()
                    .zip(&base)
                    .all(|(v, b)| *v >= 0.0 && *v <= eps * b + TOL),
            || format!("{:?} x={base:?}", pm.kind()),
        );

        let b = generators::point_in(&mut r, &pm, 1.0);
        let a: Vec<f64> = b.iter().map(|v| v * r.gen_range(0.0..1.0)).collect();
        let mut c = vec![0.0; n];
        let mut cur = a.clone();
        for i in 0..n {
            c[i] = r.gen_range(0.0..1.0) * pm.max_increase(&cur, i, 1.0).unwrap();
            cur[i] += c[i];
        }
        let ok = match pm.exchange_vector(&a, &b, &c) {
            Ok(d) => {
                let bd: Vec<f64> = b.iter().zip(&d).map(|(u, v)| u + v).collect();
                let lhs: f64 = c.iter().zip(&d).map(|(u, v)| (u - v).abs()).sum();
                let rhs: f64 = b.iter().zip(&a).map(|(u, v)| u - v).sum();
                d.iter()
                    .zip(&c)
                    .all(|(di, ci)| *di >= -TOL && *di <= ci + TOL)
                    && exhaustive_membership(&pm, &bd, 1.0).unwrap()
                    && lhs <= rhs + TOL
            }
            Err(_) => false,
        };
        exchange.record(ok, || format!("{:?} a={a:?} b={b:?} c={c:?}", pm.kind()));

        let s: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
        let t2: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
        let union: Vec<usize> = (0..n).filter(|i| s.contains(i) || t2.contains(i)).collect();
        let inter: Vec<usize> = (0..n).filter(|i| s.contains(i) && t2.contains(i)).collect();
        let lhs = pm.rank(&s).unwrap() + pm.rank(&t2).unwrap();
        let rhs = pm.rank(&union).unwrap() + pm.rank(&inter).unwrap();
        rank.record(
            lhs + TOL >= rhs && pm.rank(&inter).unwrap() <= pm.rank(&union).unwrap() + TOL,
            || format!("{:?} S={s:?} T={t2:?}", pm.kind()),
        );
    }
    vec![
        member.finish(),
        tight.finish(),
        water.finish(),
        exchange.finish(),
        rank.finish(),
    ]
}

fn solver_checks(seed: u64) -> Vec<PropertyResult> {
    let eps = 0.05;
    let mut r = rng(seed ^ 0x3c);
    let mut matroid = Tally::new("matroid_solver_vs_brute_force");
    let mut packing = Tally::new("packing_solver_vs_grid");
    for k in 0..6 {
        let monotone = k % 2 == 0;
        let n = r.gen_range(3..=7);
        let obj = if monotone {
            generators::coverage(&mut r, n, n + 3)
        } else {
            generators::directed_cut(&mut r, n, 0.4)
        };
        let pm = if k % 3 == 0 {
            generators::uniform_matroid(&mut r, n)
        } else {
            generators::partition_matroid(&mut r, n)
        };
        let opt = brute_force_matroid_opt(&obj, &pm).unwrap().value;
        let ladder = constraint_ladder(&obj, Constraint::Polymatroid(&pm), eps).unwrap();
        let factor = if monotone {
            1.0 - (-1.0f64).exp() - 15.0 * eps
        } else {
            (-1.0f64).exp() - 15.0 * eps
        };
        let ok = solve_with_ladder(
            &obj,
            Constraint::Polymatroid(&pm),
            &GuessConfig::new(eps, monotone),
            ladder.guesses(),
        )
        .map(|rep| {
            rep.diagnostics.hard_violations() == 0
                && exhaustive_membership(&pm, &rep.solution, 1.0).unwrap()
                && rep.value >= factor * opt - TOL
        })
        .unwrap_or(false);
        matroid.record(ok, || format!("{} n={n} opt={opt}", obj.kind_name()));

        let n = r.gen_range(2..=3);
        let m = r.gen_range(1..=3);
        let obj = if monotone {
            generators::coverage(&mut r, n, n + 2)
        } else {
            generators::directed_cut(&mut r, n, 0.5)
        };
        let inst =
            normalize_packing(&generators::packing_matrix(&mut r, m, n), eps, !monotone).unwrap();
        let grid = grid_fractional_opt(&obj, &inst, 0.02).unwrap();
        let ladder = constraint_ladder(&obj, Constraint::Packing(&inst), eps).unwrap();
        let factor = if monotone {
            1.0 - (-1.0 + 10.0 * eps).exp()
        } else {
            (-1.0 - 10.0 * eps).exp()
        };
        let ok = solve_with_ladder(
            &obj,
            Constraint::Packing(&inst),
            &GuessConfig::new(eps, monotone),
            ladder.guesses(),
        )
        .map(|rep| {
            rep.diagnostics.hard_violations() == 0
                && inst.max_load(&rep.solution) <= 1.0 - 2.0 * eps + TOL
                && rep.value >= factor * rep.guess_used - TOL
                && rep.value <= grid.value + grid.error_bound + TOL
        })
        .unwrap_or(false);
        packing.record(ok, || {
            format!("{} n={n} m={m} grid={}", obj.kind_name(), grid.value)
        });
    }
    vec![matroid.finish(), packing.finish()]
}

/// Runs every property group with the given seed.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let mut checks = objectives(seed);
    checks.extend(softmax_checks(seed));
    checks.extend(polymatroid_checks(seed));
    checks.extend(solver_checks(seed));
    SelftestReport {
        schema: REPORT_SCHEMA,
        seed,
        passed: checks.iter().all(|c| c.violations == 0),
        checks,
    }
}
