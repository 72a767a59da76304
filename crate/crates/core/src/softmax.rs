//! The softmax potential `smax_η(z) = η ln Σ_j exp(z_j / η)` and the
//! increment bounds used by the packing solvers.
//!
//! Evaluation is max-shifted, so `z / η` may be in the thousands without
//! overflow.

use crate::error::{check_dim, Error, Result};
use crate::matrix::{inf_norm, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftmaxParams {
    eta: f64,
    m: usize,
}

impl SoftmaxParams {
    pub fn new(eta: f64, m: usize) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("{eta} must be positive and finite"),
            });
        }
        if m == 0 {
            return Err(Error::Empty("softmax over zero rows"));
        }
        Ok(Self { eta, m })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

fn validate(z: &[f64], p: &SoftmaxParams) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::Empty("softmax input"));
    }
    check_dim(p.m, z.len())?;
    let mut zmax = f64::NEG_INFINITY;
    for (index, &v) in z.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index });
        }
        zmax = zmax.max(v);
    }
    Ok(zmax)
}

pub fn smax(z: &[f64], p: &SoftmaxParams) -> Result<f64> {
    let zmax = validate(z, p)?;
    let s: f64 = z.iter().map(|&v| ((v - zmax) / p.eta).exp()).sum();
    Ok(zmax + p.eta * s.ln())
}

/// The softmax distribution `∇ smax_η(z)`.
pub fn smax_grad(z: &[f64], p: &SoftmaxParams) -> Result<Vec<f64>> {
    let zmax = validate(z, p)?;
    let mut w: Vec<f64> = z.iter().map(|&v| ((v - zmax) / p.eta).exp()).collect();
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    Ok(w)
}

/// Right-hand side of the one-step softmax increment bound:
///
/// `smax(Ax) + ⟨Aᵀ ∇smax(Ax), d + ‖Ax‖∞ / η · D(x)† (d ∘ d)⟩`.
///
/// Requires `‖Ad‖∞ / η ≤ 1/2` and `d_i = 0` wherever `x_i = 0`.
pub fn increment_bound(x: &[f64], d: &[f64], a: &SparseMatrix, p: &SoftmaxParams) -> Result<f64> {
    check_dim(a.cols(), x.len())?;
    check_dim(a.cols(), d.len())?;
    check_dim(a.rows(), p.m)?;
    crate::error::check_nonnegative(x)?;
    crate::error::check_nonnegative(d)?;
    let ad = a.mul(d);
    let step = inf_norm(&ad) / p.eta;
    if step > 0.5 {
        return Err(Error::Precondition(format!("‖Ad‖∞/η = {step} exceeds 1/2")));
    }
    if let Some(i) = (0..x.len()).find(|&i| x[i] == 0.0 && d[i] > 0.0) {
        return Err(Error::Precondition(format!("d_{i} > 0 where x_{i} = 0")));
    }
    let ax = a.mul(x);
    let base = smax(&ax, p)?;
    let w = a.mul_t(&smax_grad(&ax, p)?);
    let scale = inf_norm(&ax) / p.eta;
    let inner: f64 = (0..x.len())
        .map(|i| {
            let pinv = if x[i] != 0.0 { 1.0 / x[i] } else { 0.0 };
            w[i] * (d[i] + scale * pinv * d[i] * d[i])
        })
        .sum();
    Ok(base + inner)
}

/// Diagonal multipliers `M_ii = (1 - λ (Aᵀ∇smax(Ax))_i / c_i) ∨ 0`, with
/// `M_ii = 0` where `c_i = 0`.
pub fn multiplier_vector(
    x: &[f64],
    a: &SparseMatrix,
    c: &[f64],
    lambda: f64,
    p: &SoftmaxParams,
) -> Result<Vec<f64>> {
    check_dim(a.cols(), x.len())?;
    check_dim(a.cols(), c.len())?;
    let w = a.mul_t(&smax_grad(&a.mul(x), p)?);
    Ok(c.iter()
        .zip(&w)
        .map(|(&ci, &wi)| {
            if ci > 0.0 {
                (1.0 - lambda * wi / ci).max(0.0)
            } else {
                0.0
            }
        })
        .collect())
}

/// `smax(Ax) + η ⟨Aᵀ∇smax(Ax), Mx + M²x⟩` for diagonal `0 ≤ M ≤ I`; bounds
/// `smax(A(x + ηMx))` whenever `‖Ax‖∞ ≤ 1` and the increment-bound step
/// condition holds.
pub fn multiplier_bound(
    x: &[f64],
    mdiag: &[f64],
    a: &SparseMatrix,
    p: &SoftmaxParams,
) -> Result<f64> {
    check_dim(a.cols(), x.len())?;
    check_dim(a.cols(), mdiag.len())?;
    let ax = a.mul(x);
    let w = a.mul_t(&smax_grad(&ax, p)?);
    let inner: f64 = (0..x.len())
        .map(|i| w[i] * (mdiag[i] * x[i] + mdiag[i] * mdiag[i] * x[i]))
        .sum();
    Ok(smax(&ax, p)? + p.eta * inner)
}
