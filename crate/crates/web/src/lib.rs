//! Browser bindings for the demo page. Every export takes plain numbers and
//! returns a JSON string; errors come back as `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use drsub::generators;
use drsub::oracle::{brute_force_matroid_opt, grid_fractional_opt};
use drsub::softmax::{smax, SoftmaxParams};
use drsub::{
    normalize_packing, solve_matroid_monotone, solve_packing_monotone, solve_with_guessing,
    Constraint, GuessConfig, Linear, MatroidSolverConfig, Objective, PackingSolverConfig,
    PolymatroidInstance, SparseMatrix, Termination,
};

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    }
    .expect("plain data")
}

/// Guess that produced the best answer over the whole ladder.
fn ladder_winner(obj: &Objective, constraint: Constraint<'_>, eps: f64) -> Result<f64, String> {
    let rep = solve_with_guessing(obj, constraint, &GuessConfig::new(eps, true))
        .map_err(|e| e.to_string())?;
    Ok(rep.guess_used)
}

#[derive(Debug, Serialize)]
pub struct PackingTrace {
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub value: f64,
    pub guess: f64,
    /// Grid optimum of the normalized program.
    pub optimum: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub max_load: f64,
}

/// Monotone packing on `max c1 x1 + c2 x2` subject to two rows
/// `a11 x1 + a12 x2 ≤ 1`, `a21 x1 + a22 x2 ≤ 1`, with guess `m`. A guess
/// `m ≤ 0` uses the guess that wins the full ladder.
#[allow(clippy::too_many_arguments)]
pub fn packing_trace(
    c1: f64,
    c2: f64,
    a11: f64,
    a12: f64,
    a21: f64,
    a22: f64,
    eps: f64,
    m: f64,
) -> Result<PackingTrace, String> {
    let obj: Objective = Linear::new(vec![c1, c2]).map_err(|e| e.to_string())?.into();
    let a =
        SparseMatrix::from_dense(&[vec![a11, a12], vec![a21, a22]]).map_err(|e| e.to_string())?;
    let inst = normalize_packing(&a, eps, false).map_err(|e| e.to_string())?;
    let optimum = grid_fractional_opt(&obj, &inst, 0.002)
        .map_err(|e| e.to_string())?
        .value;
    let m = if m > 0.0 {
        m
    } else {
        ladder_winner(&obj, Constraint::Packing(&inst), eps)?
    };
    let mut cfg = PackingSolverConfig::new(m);
    cfg.record_trajectory = true;
    cfg.max_iterations = Some(200_000);
    let rep = solve_packing_monotone(&obj, &inst, &cfg).map_err(|e| e.to_string())?;
    let traj = rep.trajectory.unwrap_or_default();
    let values = traj.iter().map(|x| c1 * x[0] + c2 * x[1]).collect();
    Ok(PackingTrace {
        points: traj.iter().map(|x| [x[0], x[1]]).collect(),
        values,
        value: rep.value,
        guess: m,
        optimum,
        iterations: rep.inner_iterations,
        termination: rep.termination,
        max_load: inst.max_load(&rep.solution),
    })
}

#[derive(Debug, Serialize)]
pub struct SoftmaxCurve {
    pub t: Vec<f64>,
    pub smax: Vec<f64>,
    pub max: Vec<f64>,
    pub upper: Vec<f64>,
}

/// `smax_η(t, z2, .., zm)` for `t` in `[0, 1]` with the remaining `m − 1`
/// coordinates held at `other`, next to `max` and `max + η ln m`.
pub fn softmax_curve(
    eta: f64,
    m: usize,
    other: f64,
    points: usize,
) -> Result<SoftmaxCurve, String> {
    let p = SoftmaxParams::new(eta, m).map_err(|e| e.to_string())?;
    let points = points.clamp(2, 2000);
    let mut out = SoftmaxCurve {
        t: vec![],
        smax: vec![],
        max: vec![],
        upper: vec![],
    };
    for k in 0..points {
        let t = k as f64 / (points - 1) as f64;
        let mut z = vec![other; m];
        z[0] = t;
        let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.t.push(t);
        out.smax.push(smax(&z, &p).map_err(|e| e.to_string())?);
        out.max.push(top);
        out.upper.push(top + eta * (m as f64).ln());
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct MatroidEpochs {
    pub n: usize,
    pub k: f64,
    pub epoch_values: Vec<f64>,
    pub solution: Vec<f64>,
    pub value: f64,
    pub best_set_value: f64,
    pub guess: f64,
    pub iterations: usize,
    pub termination: Termination,
}

/// Seeded coverage instance over a uniform matroid of rank `k`; reports the
/// objective after every epoch alongside the best `k`-subset. A guess
/// `m ≤ 0` uses the guess that wins the full ladder.
pub fn matroid_epochs(
    n: usize,
    k: usize,
    seed: u64,
    eps: f64,
    m: f64,
) -> Result<MatroidEpochs, String> {
    if !(2..=12).contains(&n) || k == 0 || k > n {
        return Err(format!(
            "need 2 ≤ n ≤ 12 and 1 ≤ k ≤ n, got n = {n}, k = {k}"
        ));
    }
    let mut r = generators::rng(seed);
    let obj = generators::coverage(&mut r, n, n + 4);
    let pm = PolymatroidInstance::uniform(n, k as f64).map_err(|e| e.to_string())?;
    let best = brute_force_matroid_opt(&obj, &pm)
        .map_err(|e| e.to_string())?
        .value;
    let m = if m > 0.0 {
        m
    } else {
        ladder_winner(&obj, Constraint::Polymatroid(&pm), eps)?
    };
    let mut cfg = MatroidSolverConfig::new(eps, m);
    cfg.record_trajectory = true;
    let rep = solve_matroid_monotone(&obj, &pm, &cfg).map_err(|e| e.to_string())?;
    let epoch_values = rep
        .trajectory
        .unwrap_or_default()
        .iter()
        .map(|z| obj.eval(z).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok(MatroidEpochs {
        n,
        k: k as f64,
        epoch_values,
        solution: rep.solution,
        value: rep.value,
        best_set_value: best,
        guess: m,
        iterations: rep.inner_iterations,
        termination: rep.termination,
    })
}

#[wasm_bindgen(js_name = packingTrace)]
#[allow(clippy::too_many_arguments)]
pub fn packing_trace_js(
    c1: f64,
    c2: f64,
    a11: f64,
    a12: f64,
    a21: f64,
    a22: f64,
    eps: f64,
    m: f64,
) -> String {
    to_json(packing_trace(c1, c2, a11, a12, a21, a22, eps, m))
}

#[wasm_bindgen(js_name = softmaxCurve)]
pub fn softmax_curve_js(eta: f64, m: usize, other: f64, points: usize) -> String {
    to_json(softmax_curve(eta, m, other, points))
}

#[wasm_bindgen(js_name = matroidEpochs)]
pub fn matroid_epochs_js(n: usize, k: usize, seed: u32, eps: f64, m: f64) -> String {
    to_json(matroid_epochs(n, k, seed.into(), eps, m))
}
