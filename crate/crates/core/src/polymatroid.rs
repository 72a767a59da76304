//! Polymatroids given by a laminar family of capacitated sets, with an
//! implicit capacity of one on every singleton.
//!
//! Uniform and partition matroids are the one-level special cases. For such
//! families every query below is exact and runs in `O(n · |family|)`.

use crate::error::{check_dim, check_nonnegative, Error, Result};

/// Tolerance used for tightness and membership.
pub const TIGHT_TOL: f64 = 1e-9;

fn slack(bound: f64) -> f64 {
    TIGHT_TOL * bound.abs().max(1.0)
}

/// The polytope queries a solver needs. Implementations outside this crate
/// must supply their own exact tight-set routine.
pub trait PolymatroidOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn rank(&self, set: &[usize]) -> Result<f64>;

    /// Whether `x ∈ scale · P`.
    fn contains(&self, x: &[f64], scale: f64) -> Result<bool>;

    /// The unique maximal `S` with `x(S) = scale · r(S)`, as an indicator.
    fn tight_set(&self, x: &[f64], scale: f64) -> Result<TightSet>;

    /// Largest `δ ≥ 0` with `x + δ e_i ∈ scale · P`.
    fn max_increase(&self, x: &[f64], i: usize, scale: f64) -> Result<f64>;

    /// `min_F (scale · r(F) − x(F))` over the defining constraints; negative
    /// exactly when `x ∉ scale · P`.
    fn margin(&self, x: &[f64], scale: f64) -> Result<f64>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightSet {
    members: Vec<bool>,
}

impl TightSet {
    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn indicator(&self) -> &[bool] {
        &self.members
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.members.len())
            .filter(|&i| self.members[i])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|&b| b)
    }

    pub fn is_subset_of(&self, other: &TightSet) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !a || b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolymatroidKind {
    Uniform {
        k: f64,
    },
    Partition {
        parts: Vec<Vec<usize>>,
        caps: Vec<f64>,
    },
    Laminar {
        sets: Vec<(Vec<usize>, f64)>,
    },
}

#[derive(Clone, Debug)]
struct Constraint {
    members: Vec<usize>,
    cap: f64,
    parent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PolymatroidInstance {
    n: usize,
    kind: PolymatroidKind,
    /// Singletons first, then family sets by increasing size.
    cons: Vec<Constraint>,
    /// For each element, the constraints containing it, smallest first.
    chains: Vec<Vec<usize>>,
}

fn check_cap(cap: f64) -> Result<()> {
    if !cap.is_finite() {
        return Err(Error::InvalidParameter {
            name: "capacity",
            reason: format!("{cap} is not finite"),
        });
    }
    if cap < 0.0 {
        return Err(Error::InvalidParameter {
            name: "capacity",
            reason: format!("{cap} is negative"),
        });
    }
    Ok(())
}

impl PolymatroidInstance {
    pub fn uniform(n: usize, k: f64) -> Result<Self> {
        check_cap(k)?;
        Self::build(
            n,
            PolymatroidKind::Uniform { k },
            vec![((0..n).collect(), k)],
        )
    }

    pub fn partition(n: usize, parts: Vec<Vec<usize>>, caps: Vec<f64>) -> Result<Self> {
        check_dim(parts.len(), caps.len())?;
        let mut seen = vec![false; n];
        for part in &parts {
            for &i in part {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, n });
                }
                if seen[i] {
                    return Err(Error::InvalidParameter {
                        name: "parts",
                        reason: format!("element {i} appears in more than one part"),
                    });
                }
                seen[i] = true;
            }
        }
        let family = parts.iter().cloned().zip(caps.iter().copied()).collect();
        Self::build(n, PolymatroidKind::Partition { parts, caps }, family)
    }

    pub fn laminar(n: usize, sets: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        Self::build(n, PolymatroidKind::Laminar { sets: sets.clone() }, sets)
    }

    fn build(n: usize, kind: PolymatroidKind, family: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("ground set"));
        }
        let mut sets = Vec::with_capacity(family.len());
        for (members, cap) in family {
            check_cap(cap)?;
            let mut ind = vec![false; n];
            for &i in &members {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, n });
                }
                if ind[i] {
                    return Err(Error::InvalidParameter {
                        name: "family",
                        reason: format!("element {i} repeated within one set"),
                    });
                }
                ind[i] = true;
            }
            sets.push((ind, cap));
        }
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let (x, y) = (&sets[a].0, &sets[b].0);
                let both = x.iter().zip(y).any(|(&p, &q)| p && q);
                let x_only = x.iter().zip(y).any(|(&p, &q)| p && !q);
                let y_only = x.iter().zip(y).any(|(&p, &q)| !p && q);
                if both && x_only && y_only {
                    return Err(Error::NotLaminar {
                        first: a,
                        second: b,
                    });
                }
            }
        }
        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by_key(|&k| (sets[k].0.iter().filter(|&&b| b).count(), k));

        let mut cons: Vec<Constraint> = (0..n)
            .map(|i| Constraint {
                members: vec![i],
                cap: 1.0,
                parent: None,
            })
            .collect();
        for &k in &order {
            let members: Vec<usize> = (0..n).filter(|&i| sets[k].0[i]).collect();
            if members.is_empty() {
                continue;
            }
            cons.push(Constraint {
                members,
                cap: sets[k].1,
                parent: None,
            });
        }
        for g in 0..cons.len() {
            let parent = (g + 1..cons.len())
                .find(|&h| cons[g].members.iter().all(|i| cons[h].members.contains(i)));
            cons[g].parent = parent;
        }
        let mut chains = vec![Vec::new(); n];
        for (g, c) in cons.iter().enumerate() {
            for &i in &c.members {
                chains[i].push(g);
            }
        }
        Ok(Self {
            n,
            kind,
            cons,
            chains,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &PolymatroidKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PolymatroidKind::Uniform { .. } => "uniform",
            PolymatroidKind::Partition { .. } => "partition",
            PolymatroidKind::Laminar { .. } => "laminar",
        }
    }

    /// Whether every capacity is an integer, so that `P` is a matroid polytope.
    pub fn is_integral(&self) -> bool {
        self.cons.iter().all(|c| c.cap.fract() == 0.0)
    }

    fn loads(&self, x: &[f64]) -> Vec<f64> {
        self.cons
            .iter()
            .map(|c| c.members.iter().map(|&i| x[i]).sum())
            .collect()
    }

    fn validate_point(&self, x: &[f64], scale: f64) -> Result<()> {
        check_dim(self.n, x.len())?;
        check_nonnegative(x)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("{scale} must be positive"),
            });
        }
        Ok(())
    }

    /// `min over F ∋ i of scale·cap(F) − x(F)`.
    fn residual(&self, loads: &[f64], i: usize, scale: f64) -> f64 {
        self.chains[i]
            .iter()
            .map(|&g| scale * self.cons[g].cap - loads[g])
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest feasible increase `y_i ≤ eps · x_i` of every eligible
    /// coordinate in index order, keeping `(1+eps)(x+y) ∈ eps · P`.
    pub fn waterfill(&self, x: &[f64], eligible: &[bool], eps: f64) -> Result<Vec<f64>> {
        waterfill(self, x, eligible, eps)
    }

    /// A vector `d` with `0 ≤ d ≤ c`, `b + d ∈ P` and `‖c − d‖₁ ≤ ‖b − a‖₁`,
    /// built by the mass-shifting procedure: raise `b̂` from `a` towards `b`
    /// and, when blocked, move mass out of `d̂` inside the smallest tight
    /// constraint.
    pub fn exchange_vector(&self, a: &[f64], b: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        for v in [a, b, c] {
            self.validate_point(v, 1.0)?;
        }
        let ac: Vec<f64> = a.iter().zip(c).map(|(p, q)| p + q).collect();
        if !self.contains(&ac, 1.0)? {
            return Err(Error::Precondition("a + c is not in P".into()));
        }
        if !self.contains(b, 1.0)? {
            return Err(Error::Precondition("b is not in P".into()));
        }
        if let Some(i) = (0..self.n).find(|&i| a[i] > b[i] + TIGHT_TOL) {
            return Err(Error::Precondition(format!("a_{i} > b_{i}")));
        }

        let n = self.n;
        let limit = 4 * n * n;
        let mut steps = 0;
        let mut bh = a.to_vec();
        let mut dh = c.to_vec();
        for i in 0..n {
            loop {
                let need = b[i] - bh[i];
                if need <= TIGHT_TOL * b[i].max(1.0) {
                    bh[i] = bh[i].max(b[i]);
                    break;
                }
                let s: Vec<f64> = bh.iter().zip(&dh).map(|(p, q)| p + q).collect();
                let loads = self.loads(&s);
                let free = self.residual(&loads, i, 1.0).max(0.0);
                if free > TIGHT_TOL {
                    let step = free.min(need);
                    bh[i] += step;
                    if step == need {
                        break;
                    }
                    continue;
                }
                steps += 1;
                if steps > limit {
                    return Err(Error::StepLimit { limit });
                }
                let chain = &self.chains[i];
                let f0 = *chain
                    .iter()
                    .find(|&&g| self.cons[g].cap - loads[g] <= slack(self.cons[g].cap))
                    .ok_or_else(|| Error::Internal(format!("no tight constraint contains {i}")))?;
                let j = self.cons[f0]
                    .members
                    .iter()
                    .copied()
                    .filter(|&j| dh[j] > 0.0)
                    .max_by(|&p, &q| dh[p].total_cmp(&dh[q]).then(q.cmp(&p)))
                    .ok_or_else(|| {
                        Error::Internal(format!(
                            "tight constraint around {i} carries no exchangeable mass"
                        ))
                    })?;
                let gamma = chain
                    .iter()
                    .filter(|&&g| !self.cons[g].members.contains(&j))
                    .map(|&g| self.cons[g].cap - loads[g])
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0);
                let delta = need.min(gamma).min(dh[j]);
                bh[i] += delta;
                dh[j] -= delta;
            }
        }
        Ok(dh)
    }
}

impl PolymatroidOracle for PolymatroidInstance {
    fn dim(&self) -> usize {
        self.n
    }

    fn rank(&self, set: &[usize]) -> Result<f64> {
        let mut value = vec![0.0f64; self.cons.len()];
        for &i in set {
            if i >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    n: self.n,
                });
            }
            value[i] = 1.0;
        }
        let mut total = 0.0;
        for g in 0..self.cons.len() {
            let v = value[g].min(self.cons[g].cap);
            match self.cons[g].parent {
                Some(h) => value[h] += v,
                None => total += v,
            }
        }
        Ok(total)
    }

    fn contains(&self, x: &[f64], scale: f64) -> Result<bool> {
        self.validate_point(x, scale)?;
        let loads = self.loads(x);
        Ok(self
            .cons
            .iter()
            .zip(&loads)
            .all(|(c, &l)| l <= scale * c.cap + slack(scale * c.cap)))
    }

    fn tight_set(&self, x: &[f64], scale: f64) -> Result<TightSet> {
        if !self.contains(x, scale)? {
            return Err(Error::Precondition(format!("x is not in {scale} · P")));
        }
        let loads = self.loads(x);
        let mut members = vec![false; self.n];
        for (c, &l) in self.cons.iter().zip(&loads) {
            if scale * c.cap - l <= slack(scale * c.cap) {
                for &i in &c.members {
                    members[i] = true;
                }
            }
        }
        Ok(TightSet { members })
    }

    fn max_increase(&self, x: &[f64], i: usize, scale: f64) -> Result<f64> {
        self.validate_point(x, scale)?;
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        Ok(self.residual(&self.loads(x), i, scale).max(0.0))
    }

    fn margin(&self, x: &[f64], scale: f64) -> Result<f64> {
        self.validate_point(x, scale)?;
        Ok(self
            .cons
            .iter()
            .zip(self.loads(x))
            .map(|(c, l)| scale * c.cap - l)
            .fold(f64::INFINITY, f64::min))
    }
}

/// Sequential water-filling against any oracle.
pub fn waterfill(
    pm: &dyn PolymatroidOracle,
    x: &[f64],
    eligible: &[bool],
    eps: f64,
) -> Result<Vec<f64>> {
    let n = pm.dim();
    check_dim(n, eligible.len())?;
    let scale = eps / (1.0 + eps);
    if !pm.contains(x, scale)? {
        return Err(Error::Precondition("(1+eps)·x is not in eps·P".into()));
    }
    let mut cur = x.to_vec();
    let mut y = vec![0.0; n];
    for i in 0..n {
        if !eligible[i] {
            continue;
        }
        let room = pm.max_increase(&cur, i, scale)?;
        y[i] = (eps * x[i]).min(room).max(0.0);
        cur[i] += y[i];
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let u = PolymatroidInstance::uniform(3, 2.0).unwrap();
        assert_eq!(u.rank(&[0, 1, 2]).unwrap(), 2.0);
        let p =
            PolymatroidInstance::partition(3, vec![vec![0, 1], vec![2]], vec![1.0, 1.0]).unwrap();
        assert_eq!(p.rank(&[0, 1]).unwrap(), 1.0);
        assert_eq!(u.rank(&[]).unwrap(), 0.0);
        assert_eq!(p.rank(&[]).unwrap(), 0.0);
        assert!(u.rank(&[3]).is_err());
    }

    #[test]
    fn laminar_rank_nests() {
        let l = PolymatroidInstance::laminar(
            4,
            vec![
                (vec![0, 1], 1.0),
                (vec![0, 1, 2], 1.5),
                (vec![0, 1, 2, 3], 2.0),
            ],
        )
        .unwrap();
        assert_eq!(l.rank(&[0, 1]).unwrap(), 1.0);
        assert_eq!(l.rank(&[0, 1, 2]).unwrap(), 1.5);
        assert_eq!(l.rank(&[0, 1, 2, 3]).unwrap(), 2.0);
        assert_eq!(l.rank(&[2, 3]).unwrap(), 2.0);
    }

    #[test]
    fn rejects_crossing_family() {
        let r = PolymatroidInstance::laminar(3, vec![(vec![0, 1], 1.0), (vec![1, 2], 1.0)]);
        assert!(matches!(r, Err(Error::NotLaminar { .. })));
    }

    #[test]
    fn membership_examples() {
        let u = PolymatroidInstance::uniform(2, 1.0).unwrap();
        assert!(u.contains(&[0.0, 0.0], 0.3).unwrap());
        assert!(!u.contains(&[0.6, 0.6], 1.0).unwrap());
        assert!(u.contains(&[0.5, 0.5], 1.0).unwrap());
        assert!(u.contains(&[-0.1, 0.5], 1.0).is_err());
    }

    #[test]
    fn tight_set_examples() {
        let p = PolymatroidInstance::partition(2, vec![vec![0], vec![1]], vec![1.0, 1.0]).unwrap();
        assert!(p.tight_set(&[0.0, 0.0], 1.0 / 3.0).unwrap().is_empty());
        let t = p.tight_set(&[1.0 / 3.0, 0.1], 1.0 / 3.0).unwrap();
        assert_eq!(t.members(), vec![0]);
        assert!(p.tight_set(&[0.5, 0.0], 1.0 / 3.0).is_err());
    }

    #[test]
    fn waterfill_examples() {
        let u = PolymatroidInstance::uniform(1, 1.0).unwrap();
        assert_eq!(u.waterfill(&[0.1], &[false], 0.5).unwrap(), vec![0.0]);
        let y = u.waterfill(&[0.1], &[true], 0.5).unwrap();
        assert!((y[0] - 0.05).abs() < 1e-15);
        let y = u.waterfill(&[0.3], &[true], 0.5).unwrap();
        assert!((y[0] - (1.0 / 3.0 - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn waterfill_is_order_dependent() {
        let u = PolymatroidInstance::uniform(2, 1.0).unwrap();
        let y = u.waterfill(&[0.15, 0.15], &[true, true], 0.5).unwrap();
        assert!((y[0] - 0.0333333333333).abs() < 1e-9);
        assert!(y[1].abs() < 1e-12);
    }

    #[test]
    fn exchange_trivial_cases() {
        let p =
            PolymatroidInstance::partition(3, vec![vec![0, 1], vec![2]], vec![1.0, 1.0]).unwrap();
        let a = [0.2, 0.1, 0.3];
        let c = [0.3, 0.2, 0.4];
        assert_eq!(p.exchange_vector(&a, &a, &c).unwrap(), c.to_vec());
        assert_eq!(
            p.exchange_vector(&a, &[0.5, 0.5, 1.0], &[0.0; 3]).unwrap(),
            vec![0.0; 3]
        );
    }

    #[test]
    fn exchange_moves_mass() {
        let u = PolymatroidInstance::uniform(2, 1.0).unwrap();
        let d = u
            .exchange_vector(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0])
            .unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }
}
