//! Exhaustive reference oracles for desk-scale instances.
//!
//! Nothing here shares code with the solvers beyond the objective and
//! constraint definitions themselves.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::objective::Objective;
use crate::polymatroid::{PolymatroidInstance, PolymatroidOracle, TIGHT_TOL};
use crate::solver_packing::PackingInstance;

pub const MAX_ENUM_N: usize = 20;
pub const MAX_GRID_N: usize = 4;
const MAX_GRID_POINTS: f64 = 2e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    SubsetEnum,
    Grid,
    FiniteDiff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub method: OracleMethod,
    /// Upper bound on `true optimum − value`; zero for exact methods.
    pub error_bound: f64,
}

fn mask_to_set(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

fn check_enum(method: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::TooLarge { method, n, limit });
    }
    Ok(())
}

/// `E[g(R(x))]` summed over all `2^n` subsets.
pub fn exact_multilinear(obj: &Objective, x: &[f64]) -> Result<f64> {
    let n = obj.dim();
    check_dim(n, x.len())?;
    check_enum("subset enumeration", n, MAX_ENUM_N)?;
    crate::error::check_nonnegative(x)?;
    let y: Vec<f64> = x.iter().map(|&v| v.min(1.0)).collect();
    let g = obj.set_function();
    let mut total = 0.0;
    for mask in 0..1u64 << n {
        let set = mask_to_set(mask, n);
        let p: f64 = (0..n)
            .map(|i| if set[i] { y[i] } else { 1.0 - y[i] })
            .product();
        if p != 0.0 {
            total += p * g.value(&set);
        }
    }
    Ok(total)
}

/// Best independent set of a matroid polytope by enumeration. Capacities
/// must be integers, so that the polytope's vertices are 0/1 vectors.
pub fn brute_force_matroid_opt(obj: &Objective, pm: &PolymatroidInstance) -> Result<OracleResult> {
    let n = pm.n();
    check_dim(n, obj.dim())?;
    check_enum("subset enumeration", n, MAX_ENUM_N)?;
    if !pm.is_integral() {
        return Err(Error::Precondition(
            "brute force needs integer capacities (a matroid polytope)".into(),
        ));
    }
    let g = obj.set_function();
    let mut best = f64::NEG_INFINITY;
    let mut arg = vec![0.0; n];
    for mask in 0..1u64 << n {
        let set = mask_to_set(mask, n);
        let x: Vec<f64> = set.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        if !pm.contains(&x, 1.0)? {
            continue;
        }
        let v = g.value(&set);
        if v > best {
            best = v;
            arg = x;
        }
    }
    Ok(OracleResult {
        value: best,
        argmax: arg,
        method: OracleMethod::SubsetEnum,
        error_bound: 0.0,
    })
}

/// Grid search over `[0,1]^n ∩ {Ax ≤ (1−ε)1}` with fixed columns held at
/// zero. For monotone objectives the last coordinate is pushed to its
/// largest feasible value instead of being gridded.
pub fn grid_fractional_opt(
    obj: &Objective,
    inst: &PackingInstance,
    resolution: f64,
) -> Result<OracleResult> {
    let n = inst.cols();
    check_dim(n, obj.dim())?;
    check_enum("grid search", n, MAX_GRID_N)?;
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "resolution",
            reason: format!("{resolution} is outside (0, 1]"),
        });
    }
    let steps = (1.0 / resolution).round() as usize;
    let free = if obj.is_monotone() { n - 1 } else { n };
    if ((steps + 1) as f64).powi(free as i32) > MAX_GRID_POINTS {
        return Err(Error::TooLarge {
            method: "grid search",
            n,
            limit: MAX_GRID_N,
        });
    }
    let a = inst.matrix();
    let bound = 1.0 - inst.eps();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(r, c, v) in a.entries() {
        cols[c].push((r, v));
    }

    struct Search<'a> {
        obj: &'a Objective,
        cols: &'a [Vec<(usize, f64)>],
        fixed: &'a [bool],
        bound: f64,
        steps: usize,
        free: usize,
        best: f64,
        arg: Vec<f64>,
    }

    impl Search<'_> {
        fn visit(&mut self, i: usize, x: &mut Vec<f64>, load: &mut Vec<f64>) -> Result<()> {
            let n = x.len();
            if i == n {
                let v = self.obj.eval(x)?;
                if v > self.best {
                    self.best = v;
                    self.arg = x.clone();
                }
                return Ok(());
            }
            if self.fixed[i] {
                x[i] = 0.0;
                return self.visit(i + 1, x, load);
            }
            if i >= self.free {
                let room = self.cols[i]
                    .iter()
                    .map(|&(r, v)| ((self.bound - load[r]) / v).max(0.0))
                    .fold(1.0f64, f64::min);
                x[i] = room;
                for &(r, v) in &self.cols[i] {
                    load[r] += v * room;
                }
                self.visit(i + 1, x, load)?;
                for &(r, v) in &self.cols[i] {
                    load[r] -= v * room;
                }
                x[i] = 0.0;
                return Ok(());
            }
            for k in 0..=self.steps {
                let t = k as f64 / self.steps as f64;
                if self.cols[i]
                    .iter()
                    .any(|&(r, v)| load[r] + v * t > self.bound + 1e-12)
                {
                    break;
                }
                x[i] = t;
                for &(r, v) in &self.cols[i] {
                    load[r] += v * t;
                }
                self.visit(i + 1, x, load)?;
                for &(r, v) in &self.cols[i] {
                    load[r] -= v * t;
                }
            }
            x[i] = 0.0;
            Ok(())
        }
    }

    let mut s = Search {
        obj,
        cols: &cols,
        fixed: inst.fixed_zero(),
        bound,
        steps,
        free,
        best: f64::NEG_INFINITY,
        arg: vec![0.0; n],
    };
    s.visit(0, &mut vec![0.0; n], &mut vec![0.0; a.rows()])?;
    Ok(OracleResult {
        value: s.best,
        argmax: s.arg,
        method: OracleMethod::Grid,
        error_bound: n as f64 * resolution * obj.gradient_bound(),
    })
}

/// Central differences `(F(x + h e_i) − F(x − h e_i)) / 2h`.
pub fn finite_diff_grad(obj: &Objective, x: &[f64], h: f64) -> Result<Vec<f64>> {
    check_dim(obj.dim(), x.len())?;
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("{h} is outside (0, 1/2)"),
        });
    }
    if let Some(i) = x.iter().position(|&v| !(v > h && v < 1.0 - h)) {
        return Err(Error::Precondition(format!(
            "x_{i} = {} is within {h} of the cube boundary",
            x[i]
        )));
    }
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = obj.eval(&y)?;
            y[i] = x[i] - h;
            let down = obj.eval(&y)?;
            y[i] = x[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

/// Membership in `scale · P` by checking `x(S) ≤ scale · r(S)` for every
/// subset.
pub fn exhaustive_membership(pm: &dyn PolymatroidOracle, x: &[f64], scale: f64) -> Result<bool> {
    let n = pm.dim();
    check_dim(n, x.len())?;
    check_enum("subset enumeration", n, MAX_ENUM_N)?;
    for mask in 1..1u64 << n {
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let bound = scale * pm.rank(&set)?;
        let load: f64 = set.iter().map(|&i| x[i]).sum();
        if load > bound + TIGHT_TOL * bound.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Union of all subsets `S` with `x(S) = scale · r(S)`.
pub fn exhaustive_tight_set(
    pm: &dyn PolymatroidOracle,
    x: &[f64],
    scale: f64,
) -> Result<Vec<bool>> {
    let n = pm.dim();
    check_dim(n, x.len())?;
    check_enum("subset enumeration", n, MAX_ENUM_N)?;
    let mut members = vec![false; n];
    for mask in 1..1u64 << n {
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let bound = scale * pm.rank(&set)?;
        let load: f64 = set.iter().map(|&i| x[i]).sum();
        if (bound - load).abs() <= TIGHT_TOL * bound.max(1.0) {
            for &i in &set {
                members[i] = true;
            }
        }
    }
    Ok(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseMatrix;
    use crate::objective::{Coverage, DirectedCut, Linear, WeightedArc};
    use crate::solver_packing::normalize_packing;

    fn toy_coverage() -> Objective {
        Coverage::new(2, vec![(1.0, vec![0, 1])]).unwrap().into()
    }

    #[test]
    fn multilinear_by_enumeration() {
        assert!((exact_multilinear(&toy_coverage(), &[0.5, 0.5]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn matroid_brute_force_examples() {
        let items = vec![(2.0, vec![0]), (1.5, vec![1, 2]), (1.0, vec![2])];
        let cov: Objective = Coverage::new(3, items).unwrap().into();
        let free = PolymatroidInstance::uniform(3, 3.0).unwrap();
        assert_eq!(brute_force_matroid_opt(&cov, &free).unwrap().value, 4.5);

        let lin: Objective = Linear::new(vec![2.0, 3.0]).unwrap().into();
        let one = PolymatroidInstance::uniform(2, 1.0).unwrap();
        let r = brute_force_matroid_opt(&lin, &one).unwrap();
        assert_eq!(r.value, 3.0);
        assert_eq!(r.argmax, vec![0.0, 1.0]);

        let frac = PolymatroidInstance::uniform(2, 1.5).unwrap();
        assert!(brute_force_matroid_opt(&lin, &frac).is_err());
    }

    #[test]
    fn grid_examples() {
        let lin: Objective = Linear::new(vec![1.0, 1.0]).unwrap().into();
        let inst = normalize_packing(
            &SparseMatrix::from_dense(&[vec![1.0, 1.0]]).unwrap(),
            0.05,
            false,
        )
        .unwrap();
        let r = grid_fractional_opt(&lin, &inst, 1e-3).unwrap();
        assert!((r.value - 0.95).abs() <= 0.002);

        let huge = normalize_packing(
            &SparseMatrix::from_dense(&[vec![1e4, 1e4]]).unwrap(),
            0.05,
            false,
        )
        .unwrap();
        let r = grid_fractional_opt(&lin, &huge, 1e-2).unwrap();
        assert_eq!(r.value, 0.0);

        let cut: Objective = DirectedCut::new(
            2,
            vec![WeightedArc {
                from: 0,
                to: 1,
                weight: 1.0,
            }],
        )
        .unwrap()
        .into();
        let boxed = normalize_packing(
            &SparseMatrix::from_triplets(0, 2, vec![]).unwrap(),
            0.05,
            true,
        )
        .unwrap();
        let r = grid_fractional_opt(&cut, &boxed, 1e-3).unwrap();
        assert!((r.value - 0.95).abs() < 1e-9);
        assert!((r.argmax[0] - 0.95).abs() < 1e-9 && r.argmax[1] == 0.0);
    }

    #[test]
    fn grid_refinement_never_hurts() {
        let cov: Objective = Coverage::new(3, vec![(1.0, vec![0, 1]), (0.7, vec![1, 2])])
            .unwrap()
            .into();
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.6, 0.3], vec![0.2, 0.9, 1.0]]).unwrap();
        let inst = normalize_packing(&a, 0.05, false).unwrap();
        let coarse = grid_fractional_opt(&cov, &inst, 0.1).unwrap();
        let fine = grid_fractional_opt(&cov, &inst, 0.05).unwrap();
        assert!(fine.value >= coarse.value);
    }

    #[test]
    fn finite_differences() {
        let lin: Objective = Linear::new(vec![2.0, 3.0]).unwrap().into();
        let g = finite_diff_grad(&lin, &[0.3, 0.6], 1e-5).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-9 && (g[1] - 3.0).abs() < 1e-9);
        let g = finite_diff_grad(&toy_coverage(), &[0.5, 0.5], 1e-5).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-9 && (g[1] - 0.5).abs() < 1e-9);
        assert!(finite_diff_grad(&lin, &[0.0, 0.5], 1e-5).is_err());
    }

    #[test]
    fn exhaustive_oracles_on_partition() {
        let p = PolymatroidInstance::partition(2, vec![vec![0], vec![1]], vec![1.0, 1.0]).unwrap();
        let s = 1.0 / 3.0;
        assert!(exhaustive_membership(&p, &[s, 0.1], s).unwrap());
        assert!(!exhaustive_membership(&p, &[0.5, 0.1], s).unwrap());
        assert_eq!(
            exhaustive_tight_set(&p, &[s, 0.1], s).unwrap(),
            vec![true, false]
        );
    }
}
