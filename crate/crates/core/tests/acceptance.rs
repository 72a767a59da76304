//! Acceptance suite. One PASS/FAIL line per criterion; exits non-zero if any
//! criterion fails.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use drsub::generators::{self, rng};
use drsub::guess::{constraint_ladder, solve_single, solve_with_ladder};
use drsub::oracle::{
    brute_force_matroid_opt, exact_multilinear, exhaustive_membership, finite_diff_grad,
    grid_fractional_opt,
};
use drsub::softmax::{increment_bound, multiplier_bound, multiplier_vector, smax};
use drsub::{
    normalize_packing, solve_packing_monotone, Constraint, GuessConfig, Objective, PackingInstance,
    PackingSolverConfig, PolymatroidInstance, PolymatroidOracle, Sampled, SetFunction,
    SoftmaxParams, SolveReport, SparseMatrix, Termination,
};

const EPS: f64 = 0.05;
const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Per-guess iteration counts gathered by criteria 1–4 for criterion 5.
#[derive(Default)]
struct IterationLog {
    /// (label, iterations, bound)
    runs: Vec<(String, usize, f64)>,
}

fn matroid_bound(n: usize) -> f64 {
    64.0 * (n as f64 / EPS).ln().powi(2) / EPS.powi(3)
}

fn packing_bound(n: usize, m: usize, monotone: bool) -> f64 {
    let base = 64.0 * (n as f64 / EPS).ln() * (m as f64).ln().max(1.0) / (EPS * EPS);
    if monotone {
        base
    } else {
        base * (1.0 / EPS).ln()
    }
}

fn log_trace(log: &mut IterationLog, label: &str, report: &SolveReport, bound: f64) {
    for g in &report.guess_trace {
        log.runs
            .push((format!("{label} M={:.4}", g.guess), g.iterations, bound));
    }
}

fn guess_cfg(monotone: bool) -> GuessConfig {
    let mut cfg = GuessConfig::new(EPS, monotone);
    cfg.parallel = true;
    cfg
}

fn solve_ladder(obj: &Objective, c: Constraint<'_>, monotone: bool) -> SolveReport {
    let ladder = constraint_ladder(obj, c, EPS).expect("non-trivial instance");
    solve_with_ladder(obj, c, &guess_cfg(monotone), ladder.guesses())
        .expect("some guess is accepted")
}

fn matroid_constraint(r: &mut impl Rng, n: usize, k: usize) -> PolymatroidInstance {
    if k.is_multiple_of(2) {
        generators::uniform_matroid(r, n)
    } else {
        generators::partition_matroid(r, n)
    }
}

fn matroid_criterion(monotone: bool, log: &mut IterationLog) -> Outcome {
    let start = Instant::now();
    let factor = if monotone {
        1.0 - (-1.0f64).exp() - 15.0 * EPS
    } else {
        (-1.0f64).exp() - 15.0 * EPS
    };
    let mut r = rng(if monotone { 101 } else { 202 });
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for k in 0..50 {
        let n = r.gen_range(4..=10);
        let obj = if monotone {
            generators::coverage(&mut r, n, n + 4)
        } else {
            generators::directed_cut(&mut r, n, 0.35)
        };
        let pm = matroid_constraint(&mut r, n, k);
        let opt = brute_force_matroid_opt(&obj, &pm)
            .expect("integral matroid")
            .value;
        let rep = solve_ladder(&obj, Constraint::Polymatroid(&pm), monotone);
        log_trace(log, &format!("matroid#{k}"), &rep, matroid_bound(n));
        let inside = exhaustive_membership(&pm, &rep.solution, 1.0).unwrap();
        let value = obj.eval(&rep.solution).unwrap();
        if opt > 0.0 {
            worst = worst.min(value / opt);
        }
        let hard = rep.diagnostics.hard_violations();
        if !(inside && rep.feasible && value >= factor * opt - TOL && hard == 0) {
            failures.push(format!(
                "#{k}: inside={inside} value={value} opt={opt} hard={hard}"
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let time_ok = secs < 60.0;
    outcome(
        failures.is_empty() && time_ok,
        format!(
            "50 instances, bound {factor:.4}·OPT, worst ratio {worst:.4}, {secs:.1}s (limit 60s){}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    )
}

struct PackingCase {
    obj: Objective,
    inst: PackingInstance,
    opt: f64,
    opt_upper: f64,
}

fn packing_cases(monotone: bool) -> Vec<PackingCase> {
    let mut r = rng(if monotone { 303 } else { 404 });
    (0..50)
        .map(|k| {
            let n = r.gen_range(2..=4);
            let m = r.gen_range(1..=3);
            let obj = if !monotone {
                generators::directed_cut(&mut r, n, 0.5)
            } else if k % 2 == 0 {
                generators::linear(&mut r, n)
            } else {
                generators::coverage(&mut r, n, n + 2)
            };
            let a = generators::packing_matrix(&mut r, m, n);
            let inst = normalize_packing(&a, EPS, !monotone).unwrap();
            let res = if monotone { 0.01 } else { 0.025 };
            let grid = grid_fractional_opt(&obj, &inst, res).unwrap();
            PackingCase {
                obj,
                inst,
                opt: grid.value,
                opt_upper: grid.value + grid.error_bound,
            }
        })
        .collect()
}

fn packing_criterion(cases: &[PackingCase], monotone: bool, log: &mut IterationLog) -> Outcome {
    let start = Instant::now();
    let (guess_factor, opt_factor) = if monotone {
        (
            1.0 - (-1.0 + 10.0 * EPS).exp(),
            1.0 - (-1.0f64).exp() - 15.0 * EPS,
        )
    } else {
        ((-1.0 - 10.0 * EPS).exp(), (-1.0f64).exp() - 15.0 * EPS)
    };
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    let mut damping_checked = 0;
    for (k, c) in cases.iter().enumerate() {
        let rep = solve_ladder(&c.obj, Constraint::Packing(&c.inst), monotone);
        log_trace(
            log,
            &format!("packing#{k}"),
            &rep,
            packing_bound(c.inst.cols(), c.inst.rows(), monotone),
        );
        let value = c.obj.eval(&rep.solution).unwrap();
        let load = c.inst.max_load(&rep.solution);
        worst = worst.min(value / c.opt_upper.max(f64::MIN_POSITIVE));
        let mut ok = rep.termination == Termination::Converged
            && value >= guess_factor * rep.guess_used - TOL
            && value >= opt_factor * c.opt_upper - TOL
            && load <= 1.0 - 2.0 * EPS + TOL
            && rep.diagnostics.hard_violations() == 0;
        if !monotone {
            damping_checked += rep.diagnostics.checked("damping_invariant");
            ok &= rep.diagnostics.violations("damping_invariant") == 0;
        }
        if !ok {
            failures.push(format!(
                "#{k}: {:?} value={value} M={} opt≈{} load={load} hard={}",
                rep.termination,
                rep.guess_used,
                c.opt,
                rep.diagnostics.hard_violations()
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let time_ok = !monotone || secs < 120.0;
    let mut detail = format!(
        "50 instances, winner ≥ {guess_factor:.4}·M and ≥ {opt_factor:.4}·OPT, worst value/OPT {worst:.4}, {secs:.1}s"
    );
    if monotone {
        detail.push_str(" (limit 120s)");
    } else {
        detail.push_str(&format!(
            ", damping invariant checked {damping_checked} times"
        ));
    }
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join(", ")));
    }
    outcome(
        failures.is_empty() && time_ok && (monotone || damping_checked > 0),
        detail,
    )
}

fn adaptivity_criterion(log: &IterationLog) -> Outcome {
    let over: Vec<_> = log
        .runs
        .iter()
        .filter(|(_, it, b)| *it as f64 > *b)
        .collect();
    let peak = log
        .runs
        .iter()
        .map(|(_, it, b)| *it as f64 / b)
        .fold(0.0, f64::max);
    outcome(
        over.is_empty() && !log.runs.is_empty(),
        format!(
            "{} guess runs, largest iterations/bound {peak:.4}{}",
            log.runs.len(),
            if over.is_empty() {
                String::new()
            } else {
                format!("; over: {:?}", &over[..over.len().min(5)])
            }
        ),
    )
}

fn random_matrix(r: &mut impl Rng, m: usize, n: usize) -> SparseMatrix {
    let dense: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if r.gen_bool(0.6) {
                        r.gen_range(0.0..3.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    SparseMatrix::from_dense(&dense).unwrap()
}

fn scale_to(v: &mut [f64], a: &SparseMatrix, target: f64) {
    let load = a.mul(v).into_iter().fold(0.0, f64::max);
    if load > 0.0 {
        for x in v.iter_mut() {
            *x *= target / load;
        }
    }
}

fn softmax_criterion() -> Outcome {
    let mut r = rng(606);
    let (mut incr, mut bound_ineq, mut ratio_ineq, mut ratio_tested) = (0, 0, 0, 0);
    let mut first = None;
    let mut draws = 0;
    while draws < 1000 {
        let n = r.gen_range(1..=6);
        let m = r.gen_range(1..=5);
        let a = random_matrix(&mut r, m, n);
        let eta = r.gen_range(0.01..0.5);
        let p = SoftmaxParams::new(eta, m).unwrap();
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                if r.gen_bool(0.85) {
                    r.gen_range(0.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        scale_to(&mut x, &a, r.gen_range(0.01..1.0));

        let mut d: Vec<f64> = x.iter().map(|&v| v * r.gen_range(0.0..1.0)).collect();
        scale_to(&mut d, &a, eta * r.gen_range(0.0..0.5));
        let c: Vec<f64> = (0..n)
            .map(|_| {
                if r.gen_bool(0.9) {
                    r.gen_range(0.01..3.0)
                } else {
                    0.0
                }
            })
            .collect();
        let lambda = r.gen_range(0.01..5.0);
        let mdiag = multiplier_vector(&x, &a, &c, lambda, &p).unwrap();
        let dm: Vec<f64> = (0..n).map(|i| eta * mdiag[i] * x[i]).collect();
        if a.mul(&dm).into_iter().fold(0.0, f64::max) / eta > 0.5 {
            continue;
        }
        draws += 1;

        let xd: Vec<f64> = x.iter().zip(&d).map(|(u, v)| u + v).collect();
        let lhs = smax(&a.mul(&xd), &p).unwrap();
        let rhs = increment_bound(&x, &d, &a, &p).unwrap();
        if lhs > rhs + TOL {
            incr += 1;
            first.get_or_insert(format!("increment: x={x:?} d={d:?} η={eta}"));
        }

        let s0 = smax(&a.mul(&x), &p).unwrap();
        let xm: Vec<f64> = x.iter().zip(&dm).map(|(u, v)| u + v).collect();
        let s1 = smax(&a.mul(&xm), &p).unwrap();
        if s1 > multiplier_bound(&x, &mdiag, &a, &p).unwrap() + TOL {
            bound_ineq += 1;
            first.get_or_insert(format!("multiplier bound: x={x:?} M={mdiag:?} η={eta}"));
        }
        let gain: f64 = c.iter().zip(&dm).map(|(u, v)| u * v).sum();
        if gain > 0.0 {
            ratio_tested += 1;
            if s1 - s0 > gain / lambda + TOL {
                ratio_ineq += 1;
                first.get_or_insert(format!(
                    "multiplier ratio: x={x:?} c={c:?} λ={lambda} η={eta}"
                ));
            }
        }
    }
    let total = incr + bound_ineq + ratio_ineq;
    outcome(
        total == 0,
        format!(
            "1000 draws: increment bound {incr} violations, multiplier bound {bound_ineq}, ratio {ratio_ineq} of {ratio_tested}{}",
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn largest_fit(pm: &PolymatroidInstance, base: &[f64], dir: &[f64]) -> f64 {
    let at = |s: f64| -> Vec<f64> { base.iter().zip(dir).map(|(b, d)| b + s * d).collect() };
    if pm.contains(&at(1.0), 1.0).unwrap() {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pm.contains(&at(mid), 1.0).unwrap() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn exchange_criterion() -> Outcome {
    let mut r = rng(707);
    let mut violations = 0;
    let mut first = None;
    for t in 0..1000 {
        let n = r.gen_range(2..=6);
        let pm = if t % 2 == 0 {
            generators::partition_matroid(&mut r, n)
        } else {
            generators::laminar(&mut r, n, false)
        };
        let b = generators::point_in(&mut r, &pm, 1.0);
        let a: Vec<f64> = b
            .iter()
            .map(|&v| {
                if r.gen_bool(0.2) {
                    v
                } else {
                    v * r.gen_range(0.0..1.0)
                }
            })
            .collect();
        let dir = generators::point_in(&mut r, &pm, 1.0);
        let s = largest_fit(&pm, &a, &dir) * r.gen_range(0.5..1.0);
        let c: Vec<f64> = dir.iter().map(|v| v * s).collect();
        let d = match pm.exchange_vector(&a, &b, &c) {
            Ok(d) => d,
            Err(e) => {
                violations += 1;
                first.get_or_insert(format!("error {e} on a={a:?} b={b:?} c={c:?}"));
                continue;
            }
        };
        let bounded = d
            .iter()
            .zip(&c)
            .all(|(&di, &ci)| di >= -TOL && di <= ci + TOL);
        let bd: Vec<f64> = b.iter().zip(&d).map(|(u, v)| u + v).collect();
        let inside = exhaustive_membership(&pm, &bd, 1.0).unwrap();
        let lhs: f64 = c.iter().zip(&d).map(|(u, v)| (u - v).abs()).sum();
        let rhs: f64 = b.iter().zip(&a).map(|(u, v)| (u - v).abs()).sum();
        if !(bounded && inside && lhs <= rhs + TOL) {
            violations += 1;
            first.get_or_insert(format!(
                "bounded={bounded} inside={inside} {lhs} > {rhs}; a={a:?} b={b:?} c={c:?}"
            ));
        }
    }
    outcome(
        violations == 0,
        format!(
            "1000 triples, {violations} violations{}",
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn gradient_criterion() -> Outcome {
    let mut r = rng(808);
    let mut worst = 0.0f64;
    let mut grad_fail = 0;
    for kind in 0..3 {
        for _ in 0..100 {
            let n = r.gen_range(2..=8);
            let obj = match kind {
                0 => generators::coverage(&mut r, n, n + 3),
                1 => generators::directed_cut(&mut r, n, 0.4),
                _ => generators::linear(&mut r, n),
            };
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..0.99)).collect();
            let g = obj.grad(&x).unwrap();
            let fd = finite_diff_grad(&obj, &x, 1e-6).unwrap();
            let scale = g
                .iter()
                .fold(0.0f64, |s, v| s.max(v.abs()))
                .max(f64::MIN_POSITIVE);
            let err = g
                .iter()
                .zip(&fd)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
                / scale;
            worst = worst.max(err);
            if err > 1e-5 {
                grad_fail += 1;
            }
        }
    }

    let mut mc_fail = 0;
    let mut worst_z = 0.0f64;
    for _ in 0..20 {
        let n = r.gen_range(4..=12);
        let Objective::Coverage(base) = generators::coverage(&mut r, n, n + 4) else {
            unreachable!()
        };
        let base: Arc<dyn SetFunction> = Arc::new(base);
        let sampled: Objective = Sampled::new(base, 10_000, r.gen(), true).unwrap().into();
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let (est, se) = sampled.eval_with_stderr(&x).unwrap();
        let exact = exact_multilinear(&sampled, &x).unwrap();
        let z = (est - exact).abs() / se.max(f64::MIN_POSITIVE);
        worst_z = worst_z.max(z);
        if (est - exact).abs() > 3.0 * se {
            mc_fail += 1;
        }
    }
    outcome(
        grad_fail == 0 && mc_fail == 0,
        format!(
            "300 gradient draws, worst relative error {worst:.2e} ({grad_fail} over 1e-5); 20 Monte-Carlo instances, worst |Δ|/se {worst_z:.2} ({mc_fail} over 3)"
        ),
    )
}

/// The linear packing loop coded directly on dense arrays, with the
/// submodular step size and λ.
fn linear_reference(weights: &[f64], a: &[Vec<f64>], eps: f64, big_m: f64) -> Vec<Vec<f64>> {
    let (m, n) = (a.len(), weights.len());
    let eta = eps / (2.0 * (2.0 + (m as f64).ln()));
    let f = |x: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            s += weights[i] * x[i];
        }
        s
    };
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let mut cm = 0.0f64;
            for row in a {
                cm = cm.max(row[i]);
            }
            eps / (n as f64 * cm)
        })
        .collect();
    let mut out = vec![x.clone()];
    let threshold = (1.0 - (-1.0 + 10.0 * eps).exp()) * big_m;
    while f(&x) <= threshold {
        let lambda = big_m - (1.0 + eta) * f(&x);
        let mut ax = vec![0.0; m];
        for (j, row) in a.iter().enumerate() {
            for i in 0..n {
                if row[i] != 0.0 {
                    ax[j] += row[i] * x[i];
                }
            }
        }
        let zmax = ax.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = ax.iter().map(|z| ((z - zmax) / eta).exp()).collect();
        let total: f64 = p.iter().sum();
        for v in &mut p {
            *v /= total;
        }
        let mut w = vec![0.0; n];
        for (j, row) in a.iter().enumerate() {
            for i in 0..n {
                if row[i] != 0.0 {
                    w[i] += row[i] * p[j];
                }
            }
        }
        for i in 0..n {
            let mi = (1.0 - lambda * w[i] / weights[i]).max(0.0);
            x[i] += eta * x[i] * mi;
        }
        out.push(x.clone());
        if out.len() > 1_000_000 {
            break;
        }
    }
    out
}

fn reference_criterion() -> Outcome {
    let mut r = rng(909);
    let mut mismatches = Vec::new();
    let mut total_iters = 0;
    for k in 0..10 {
        let n = r.gen_range(2..=4);
        let m = r.gen_range(1..=3);
        let weights: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..2.0)).collect();
        let obj: Objective = drsub::Linear::new(weights.clone()).unwrap().into();
        let a = generators::packing_matrix(&mut r, m, n);
        let inst = normalize_packing(&a, EPS, false).unwrap();
        let dense: Vec<Vec<f64>> = (0..m)
            .map(|j| (0..n).map(|i| a.get(j, i)).collect())
            .collect();
        let big_m = grid_fractional_opt(&obj, &inst, 0.01).unwrap().value;
        let mut cfg = PackingSolverConfig::new(big_m);
        cfg.record_trajectory = true;
        let rep = solve_packing_monotone(&obj, &inst, &cfg).unwrap();
        let ours = rep.trajectory.unwrap();
        let theirs = linear_reference(&weights, &dense, EPS, big_m);
        total_iters += ours.len() - 1;
        let same = ours.len() == theirs.len()
            && ours
                .iter()
                .zip(&theirs)
                .all(|(u, v)| u.iter().zip(v).all(|(p, q)| p.to_bits() == q.to_bits()));
        if !same || rep.termination != Termination::Converged {
            mismatches.push(format!(
                "#{k}: {} vs {} iterates, {:?}",
                ours.len(),
                theirs.len(),
                rep.termination
            ));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "10 instances, {total_iters} iterates compared bitwise{}",
            if mismatches.is_empty() {
                String::new()
            } else {
                format!("; mismatches: {}", mismatches.join(", "))
            }
        ),
    )
}

fn rejection_criterion(cases: &[PackingCase]) -> Outcome {
    let cfg = GuessConfig::new(EPS, true);
    let mut not_rejected = Vec::new();
    let mut no_converged = Vec::new();
    for (k, c) in cases.iter().enumerate() {
        let rep = solve_single(
            &c.obj,
            Constraint::Packing(&c.inst),
            &cfg,
            100.0 * c.opt_upper,
        )
        .unwrap();
        if rep.termination != Termination::GuessRejected {
            not_rejected.push(format!(
                "#{k}: {:?} after {}",
                rep.termination, rep.inner_iterations
            ));
        }
        let ladder = constraint_ladder(&c.obj, Constraint::Packing(&c.inst), EPS).unwrap();
        let all = solve_with_ladder(
            &c.obj,
            Constraint::Packing(&c.inst),
            &guess_cfg(true),
            ladder.guesses(),
        )
        .unwrap();
        if !all
            .guess_trace
            .iter()
            .any(|g| g.termination == Termination::Converged)
        {
            no_converged.push(k);
        }
    }
    outcome(
        not_rejected.is_empty() && no_converged.is_empty(),
        format!(
            "{} instances at 100×OPT: {} rejected; ladders with a converged guess: {}/{}{}{}",
            cases.len(),
            cases.len() - not_rejected.len(),
            cases.len() - no_converged.len(),
            cases.len(),
            if not_rejected.is_empty() {
                String::new()
            } else {
                format!("; not rejected: {}", not_rejected.join(", "))
            },
            if no_converged.is_empty() {
                String::new()
            } else {
                format!("; no converged guess: {no_converged:?}")
            }
        ),
    )
}

fn main() {
    let start = Instant::now();
    let mut log = IterationLog::default();
    let mono_cases = packing_cases(true);
    let non_cases = packing_cases(false);
    let results = vec![
        (
            "1 monotone matroid guarantee",
            matroid_criterion(true, &mut log),
        ),
        (
            "2 non-monotone matroid guarantee",
            matroid_criterion(false, &mut log),
        ),
        (
            "3 monotone packing guarantee",
            packing_criterion(&mono_cases, true, &mut log),
        ),
        (
            "4 non-monotone packing guarantee",
            packing_criterion(&non_cases, false, &mut log),
        ),
    ];
    let mut results = results;
    results.push(("5 adaptivity bounds", adaptivity_criterion(&log)));
    results.push(("6 softmax bounds", softmax_criterion()));
    results.push(("7 exchange property", exchange_criterion()));
    results.push(("8 gradient and oracle cross-checks", gradient_criterion()));
    results.push(("9 linear-reference equivalence", reference_criterion()));
    results.push((
        "10 guess-rejection soundness",
        rejection_criterion(&mono_cases),
    ));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
