//! Seeded random instances at desk scale, small enough for the brute-force and
//! grid oracles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::SparseMatrix;
use crate::objective::{Coverage, DirectedCut, Linear, Objective, WeightedArc};
use crate::polymatroid::PolymatroidInstance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weighted coverage over a universe of `universe` items; every item is covered
/// by one to three of the `n` elements.
pub fn coverage<R: Rng>(rng: &mut R, n: usize, universe: usize) -> Objective {
    let items = (0..universe)
        .map(|_| {
            let k = rng.gen_range(1..=3.min(n));
            let mut by: Vec<usize> = (0..n).collect();
            by.shuffle(rng);
            by.truncate(k);
            by.sort_unstable();
            (rng.gen_range(0.5..2.0), by)
        })
        .collect();
    Coverage::new(n, items)
        .expect("generated coverage is valid")
        .into()
}

/// Directed cut on `n` nodes with about `density · n(n−1)` arcs.
pub fn directed_cut<R: Rng>(rng: &mut R, n: usize, density: f64) -> Objective {
    let mut arcs = Vec::new();
    for from in 0..n {
        for to in 0..n {
            if from != to && rng.gen_bool(density) {
                arcs.push(WeightedArc {
                    from,
                    to,
                    weight: rng.gen_range(0.5..2.0),
                });
            }
        }
    }
    if arcs.is_empty() && n > 1 {
        arcs.push(WeightedArc {
            from: 0,
            to: 1,
            weight: 1.0,
        });
    }
    DirectedCut::new(n, arcs)
        .expect("generated cut is valid")
        .into()
}

pub fn linear<R: Rng>(rng: &mut R, n: usize) -> Objective {
    Linear::new((0..n).map(|_| rng.gen_range(0.1..2.0)).collect())
        .expect("generated weights are valid")
        .into()
}

/// Uniform matroid of rank in `1..n`.
pub fn uniform_matroid<R: Rng>(rng: &mut R, n: usize) -> PolymatroidInstance {
    let k = rng.gen_range(1..n.max(2)) as f64;
    PolymatroidInstance::uniform(n, k).expect("valid rank")
}

/// Partition matroid with two to four parts and integer capacities.
pub fn partition_matroid<R: Rng>(rng: &mut R, n: usize) -> PolymatroidInstance {
    let parts_n = rng.gen_range(2..=4.min(n).max(2));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut parts = vec![Vec::new(); parts_n];
    for (k, &i) in order.iter().enumerate() {
        let p = if k < parts_n {
            k
        } else {
            rng.gen_range(0..parts_n)
        };
        parts[p].push(i);
    }
    parts.retain(|p| !p.is_empty());
    for p in &mut parts {
        p.sort_unstable();
    }
    let caps = parts
        .iter()
        .map(|p| rng.gen_range(1..=p.len().max(1)) as f64)
        .collect();
    PolymatroidInstance::partition(n, parts, caps).expect("parts are disjoint")
}

/// Laminar family: a few disjoint blocks, some with a nested sub-block, plus
/// optionally the whole ground set. Capacities are fractional when `integral`
/// is false.
pub fn laminar<R: Rng>(rng: &mut R, n: usize, integral: bool) -> PolymatroidInstance {
    let cap = |rng: &mut R, size: usize| -> f64 {
        if integral {
            rng.gen_range(1..=size) as f64
        } else {
            rng.gen_range(0.3..size as f64 + 0.2)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut sets = Vec::new();
    let mut start = 0;
    while start < n {
        let len = rng.gen_range(1..=(n - start).min(4));
        let mut block: Vec<usize> = order[start..start + len].to_vec();
        block.sort_unstable();
        if len >= 3 && rng.gen_bool(0.5) {
            let mut inner = block[..len - 1].to_vec();
            inner.sort_unstable();
            let c = cap(rng, inner.len());
            sets.push((inner, c));
        }
        if len >= 2 {
            let c = cap(rng, len);
            sets.push((block, c));
        }
        start += len;
    }
    if rng.gen_bool(0.5) {
        let c = cap(rng, n);
        sets.push(((0..n).collect(), c));
    }
    PolymatroidInstance::laminar(n, sets).expect("blocks are laminar by construction")
}

/// Non-negative `m × n` matrix in which every column has an entry of at least
/// one and at most two, so every feasible point lies in the unit box.
pub fn packing_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> SparseMatrix {
    let mut dense = vec![vec![0.0; n]; m];
    for col in 0..n {
        let anchor = rng.gen_range(0..m);
        for (row, r) in dense.iter_mut().enumerate() {
            r[col] = if row == anchor {
                rng.gen_range(1.0..2.0)
            } else if rng.gen_bool(0.5) {
                rng.gen_range(0.1..1.5)
            } else {
                0.0
            };
        }
    }
    SparseMatrix::from_dense(&dense).expect("generated entries are valid")
}

/// Uniform draw from the polytope `scale · P` by rejection, with each
/// coordinate scaled to keep acceptance reasonable.
pub fn point_in<R: Rng>(rng: &mut R, pm: &PolymatroidInstance, scale: f64) -> Vec<f64> {
    use crate::polymatroid::PolymatroidOracle;
    let n = pm.n();
    loop {
        let shrink = rng.gen_range(0.05..1.0);
        let x: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0.0..1.0) * shrink * scale)
            .collect();
        if pm.contains(&x, scale).expect("dimensions match") {
            return x;
        }
    }
}
