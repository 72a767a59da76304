//! Geometric ladders of optimum-value guesses and the driver that runs a
//! solver once per guess.
//!
//! Guesses are independent, so a combined run costs one round for the
//! singleton batch plus the worst per-guess round count.

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::polymatroid::PolymatroidOracle;
use crate::report::{GuessOutcome, SolveReport, Termination};
use crate::solver_matroid::{
    solve_matroid_monotone, solve_matroid_nonmonotone, MatroidSolverConfig,
};
use crate::solver_packing::{
    solve_packing_monotone, solve_packing_nonmonotone, PackingInstance, PackingSolverConfig,
};

#[derive(Clone, Debug, PartialEq)]
pub struct GuessLadder {
    m0: f64,
    eps: f64,
    guesses: Vec<f64>,
}

impl GuessLadder {
    /// `m0 (1+ε)^k` for `k = 0..=⌈2 ln n / ε⌉`.
    pub fn new(m0: f64, n: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("{eps} is outside (0, 1)"),
            });
        }
        if !m0.is_finite() || m0 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "m0",
                reason: format!("{m0} must be finite and non-negative"),
            });
        }
        if m0 == 0.0 {
            return Err(Error::TrivialInstance);
        }
        let top = (2.0 * (n.max(1) as f64).ln() / eps).ceil() as i32;
        let guesses = (0..=top).map(|k| m0 * (1.0 + eps).powi(k)).collect();
        Ok(Self { m0, eps, guesses })
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn guesses(&self) -> &[f64] {
        &self.guesses
    }

    pub fn len(&self) -> usize {
        self.guesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }

    /// A ladder entry `M` with `M ≤ opt ≤ (1+ε) M`, if one exists.
    pub fn bracket(&self, opt: f64) -> Option<f64> {
        self.guesses
            .iter()
            .copied()
            .find(|&g| g <= opt && opt <= g * (1.0 + self.eps) * (1.0 + 1e-12))
    }
}

/// Ladder seeded with `m0 = max_i f(1_i)`.
pub fn build_ladder(obj: &Objective, eps: f64) -> Result<GuessLadder> {
    let m0 = obj.singleton_values().into_iter().fold(0.0, f64::max);
    GuessLadder::new(m0, obj.dim(), eps)
}

/// Adaptive-round accounting: one round per synchronized batch of queries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundCounter {
    queries_per_round: Vec<usize>,
}

impl RoundCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn batch(&mut self, queries: usize) {
        self.queries_per_round.push(queries);
    }

    /// Independent runs executed side by side cost as many rounds as the
    /// longest of them.
    pub fn parallel(&mut self, rounds: &[usize], queries_per_round: usize) {
        let longest = rounds.iter().copied().max().unwrap_or(0);
        self.queries_per_round.extend(std::iter::repeat_n(
            queries_per_round * rounds.len(),
            longest,
        ));
    }

    pub fn rounds(&self) -> usize {
        self.queries_per_round.len()
    }

    pub fn queries_per_round(&self) -> &[usize] {
        &self.queries_per_round
    }
}

#[derive(Clone, Copy)]
pub enum Constraint<'a> {
    Polymatroid(&'a dyn PolymatroidOracle),
    Packing(&'a PackingInstance),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuessConfig {
    pub eps: f64,
    pub monotone: bool,
    pub max_iterations: Option<usize>,
    /// Run guesses on the thread pool; results are identical either way.
    pub parallel: bool,
    pub record_trajectory: bool,
}

impl GuessConfig {
    pub fn new(eps: f64, monotone: bool) -> Self {
        Self {
            eps,
            monotone,
            max_iterations: None,
            parallel: false,
            record_trajectory: false,
        }
    }
}

/// The ladder the driver uses: singleton values are taken at the largest
/// feasible extent of each coordinate, so that `m0 ≤ OPT`.
pub fn constraint_ladder(
    obj: &Objective,
    constraint: Constraint<'_>,
    eps: f64,
) -> Result<GuessLadder> {
    let extents = match constraint {
        Constraint::Polymatroid(pm) => (0..pm.dim())
            .map(|i| pm.rank(&[i]).map(|r| r.min(1.0)))
            .collect::<Result<Vec<_>>>()?,
        Constraint::Packing(inst) => inst.singleton_extents(),
    };
    let m0 = obj
        .scaled_singleton_values(&extents)
        .into_iter()
        .fold(0.0, f64::max);
    GuessLadder::new(m0, obj.dim(), eps)
}

/// Runs the solver for one guess.
pub fn solve_single(
    obj: &Objective,
    constraint: Constraint<'_>,
    cfg: &GuessConfig,
    guess: f64,
) -> Result<SolveReport> {
    match constraint {
        Constraint::Polymatroid(pm) => {
            let mut c = MatroidSolverConfig::new(cfg.eps, guess);
            c.max_inner_iterations = cfg.max_iterations;
            c.record_trajectory = cfg.record_trajectory;
            if cfg.monotone {
                solve_matroid_monotone(obj, pm, &c)
            } else {
                solve_matroid_nonmonotone(obj, pm, &c)
            }
        }
        Constraint::Packing(inst) => {
            if (inst.eps() - cfg.eps).abs() > 0.0 {
                return Err(Error::InvalidParameter {
                    name: "eps",
                    reason: format!(
                        "instance was normalized for ε = {}, solver asked for {}",
                        inst.eps(),
                        cfg.eps
                    ),
                });
            }
            let mut c = PackingSolverConfig::new(guess);
            c.max_iterations = cfg.max_iterations;
            c.record_trajectory = cfg.record_trajectory;
            if cfg.monotone {
                solve_packing_monotone(obj, inst, &c)
            } else {
                solve_packing_nonmonotone(obj, inst, &c)
            }
        }
    }
}

fn run_all(
    obj: &Objective,
    constraint: Constraint<'_>,
    cfg: &GuessConfig,
    guesses: &[f64],
) -> Vec<Result<SolveReport>> {
    #[cfg(feature = "parallel")]
    if cfg.parallel {
        use rayon::prelude::*;
        return guesses
            .par_iter()
            .map(|&g| solve_single(obj, constraint, cfg, g))
            .collect();
    }
    guesses
        .iter()
        .map(|&g| solve_single(obj, constraint, cfg, g))
        .collect()
}

/// Tries every ladder guess and keeps the best feasible solution, preferring
/// the smaller guess on ties. Check tallies of all guesses are merged into
/// the returned report.
pub fn solve_with_guessing(
    obj: &Objective,
    constraint: Constraint<'_>,
    cfg: &GuessConfig,
) -> Result<SolveReport> {
    let n = obj.dim();
    let ladder = match constraint_ladder(obj, constraint, cfg.eps) {
        Err(Error::TrivialInstance) => {
            let mut r = SolveReport::new("trivial", n, 0.0);
            r.value = obj.eval(&vec![0.0; n])?;
            r.adaptive_rounds = 1;
            return Ok(r);
        }
        other => other?,
    };
    solve_with_ladder(obj, constraint, cfg, ladder.guesses())
}

/// As [`solve_with_guessing`] over an explicit list of guesses.
pub fn solve_with_ladder(
    obj: &Objective,
    constraint: Constraint<'_>,
    cfg: &GuessConfig,
    guesses: &[f64],
) -> Result<SolveReport> {
    if guesses.is_empty() {
        return Err(Error::Empty("guess ladder"));
    }
    let reports = run_all(obj, constraint, cfg, guesses)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut rounds = RoundCounter::new();
    rounds.batch(obj.dim());
    let per_guess: Vec<usize> = reports.iter().map(|r| r.adaptive_rounds).collect();
    rounds.parallel(&per_guess, obj.dim());

    let trace: Vec<GuessOutcome> = reports
        .iter()
        .map(|r| GuessOutcome {
            guess: r.guess_used,
            value: r.value,
            termination: r.termination,
            iterations: r.inner_iterations,
            adaptive_rounds: r.adaptive_rounds,
        })
        .collect();
    if reports
        .iter()
        .all(|r| r.termination == Termination::GuessRejected)
    {
        return Err(Error::AllGuessesRejected);
    }
    let best = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.feasible)
        .max_by(|(_, a), (_, b)| {
            a.value
                .total_cmp(&b.value)
                .then(b.guess_used.total_cmp(&a.guess_used))
        })
        .map(|(k, _)| k)
        .ok_or(Error::AllGuessesRejected)?;

    let mut merged = reports[best].diagnostics.clone();
    for (k, r) in reports.iter().enumerate() {
        if k == best {
            continue;
        }
        for (name, t) in &r.diagnostics.checks {
            let e =
                merged
                    .checks
                    .entry(name.clone())
                    .or_insert_with(|| crate::report::CheckTally {
                        soft: t.soft,
                        ..Default::default()
                    });
            e.checked += t.checked;
            e.violated += t.violated;
            if e.first_violation.is_none() {
                e.first_violation.clone_from(&t.first_violation);
            }
        }
    }
    merged.metric("guesses", guesses.len() as f64);

    let mut out = reports.into_iter().nth(best).expect("index from enumerate");
    out.diagnostics = merged;
    out.adaptive_rounds = rounds.rounds();
    out.guess_trace = trace;
    Ok(out)
}
