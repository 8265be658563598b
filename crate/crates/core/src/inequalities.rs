//! Entropy, the family of logarithmic Sobolev upper bounds, the sharp
//! one-dimensional residual, and deviation bounds compared against exact
//! enumerated tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::malliavin::{gradient, gradient_all, nabla};
use crate::space::RandomVariable;

/// `psi(x) = x e^x - e^x + 1`, the convex integrand of the sharp bounds;
/// nonnegative, vanishing only at 0.
fn psi(x: f64) -> f64 {
    x * x.exp() - x.exp() + 1.0
}

fn require_positive(f: &RandomVariable) -> Result<()> {
    let m = f.min();
    if m <= 0.0 {
        return Err(Error::NonPositiveInput(m));
    }
    Ok(())
}

/// `Ent[F] = E[F log F] - E[F] log E[F]` for strictly positive `F`.
pub fn entropy(f: &RandomVariable) -> Result<f64> {
    require_positive(f)?;
    let mean = f.expectation();
    Ok(f.map(|v| v * v.ln()).expectation() - mean * mean.ln())
}

/// `E[(1/F) sum_k (D_k F)^2]`, an upper bound for the entropy.
pub fn lsi_modified_rhs(f: &RandomVariable) -> Result<f64> {
    require_positive(f)?;
    let g = gradient_all(f);
    let mut sq = RandomVariable::constant(f.space(), 0.0);
    for col in g.columns() {
        sq = sq.add(&col.mul(col)?)?;
    }
    Ok(sq.zip_with(f, |s, v| s / v)?.expectation())
}

/// `E[sum_k D_k F * D_k log F]`, an upper bound for the entropy.
pub fn lsi_l1_rhs(f: &RandomVariable) -> Result<f64> {
    require_positive(f)?;
    let logf = f.map(f64::ln);
    let mut acc = 0.0;
    for k in 0..=f.space().horizon() {
        acc += gradient(f, k)?.mul(&gradient(&logf, k)?)?.expectation();
    }
    Ok(acc)
}

/// Entropy bound for `F = e^G` with the absolute-difference integrand:
/// `E[e^G sum_k p_k q_k psi(|nabla_k G|)]`.
pub fn lsi_optimal_rhs(g: &RandomVariable) -> Result<f64> {
    let space = g.space();
    let ef = g.map(f64::exp);
    let mut acc = 0.0;
    for k in 0..=space.horizon() {
        let w = space.p(k) * space.q(k);
        let nk = nabla(g, k)?;
        acc += ef.zip_with(&nk, |e, n| e * w * psi(n.abs()))?.expectation();
    }
    Ok(acc)
}

/// Entropy bound for `F = e^G` with the signed integrand:
/// `E[e^G sum_k p_k q_k psi(nabla_k G)]`; never exceeds the
/// absolute-difference bound.
pub fn lsi_sharp_rhs(g: &RandomVariable) -> Result<f64> {
    let space = g.space();
    let ef = g.map(f64::exp);
    let mut acc = 0.0;
    for k in 0..=space.horizon() {
        let w = space.p(k) * space.q(k);
        let nk = nabla(g, k)?;
        acc += ef.zip_with(&nk, |e, n| e * w * psi(n))?.expectation();
    }
    Ok(acc)
}

/// Intermediate bound with random weights:
/// `E[e^G sum_k sqrt(p_k q_k) |Y_k| psi(nabla_k G)]`.
pub fn lsi_intermediate_weighted_rhs(g: &RandomVariable) -> Result<f64> {
    let space = g.space();
    let ef = g.map(f64::exp);
    let mut acc = 0.0;
    for k in 0..=space.horizon() {
        let s = space.sqrt_pq(k);
        let yk = crate::space::y_rv(space, k)?;
        let nk = nabla(g, k)?;
        let term = RandomVariable::from_fn(space, |w| {
            ef.value(w) * s * yk.value(w).abs() * psi(nk.value(w))
        });
        acc += term.expectation();
    }
    Ok(acc)
}

/// Intermediate bound with unit weights: `E[e^G sum_k psi(nabla_k G)]`.
pub fn lsi_intermediate_rhs(g: &RandomVariable) -> Result<f64> {
    let ef = g.map(f64::exp);
    let mut acc = 0.0;
    for k in 0..=g.space().horizon() {
        let nk = nabla(g, k)?;
        acc += ef.zip_with(&nk, |e, n| e * psi(n))?.expectation();
    }
    Ok(acc)
}

/// Entropy and the whole family of upper bounds for one positive `F`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsiReport {
    pub entropy: f64,
    pub rhs_modified: f64,
    pub rhs_l1: f64,
    pub rhs_optimal: f64,
    pub rhs_sharp: f64,
}

/// Evaluate the full report; the exponent form uses `G = log F`.
pub fn lsi_report(f: &RandomVariable) -> Result<LsiReport> {
    require_positive(f)?;
    let g = f.map(f64::ln);
    Ok(LsiReport {
        entropy: entropy(f)?,
        rhs_modified: lsi_modified_rhs(f)?,
        rhs_l1: lsi_l1_rhs(f)?,
        rhs_optimal: lsi_optimal_rhs(&g)?,
        rhs_sharp: lsi_sharp_rhs(&g)?,
    })
}

/// Residual (upper side minus lower side) of the scalar inequality
/// `p t e^t + q a e^a - (p e^t + q e^a) log(p e^t + q e^a)
///  <= pq (q e^a psi(t - a) + p e^t psi(a - t))`;
/// nonnegative everywhere, zero exactly at `t = a`.
pub fn one_dim_sharp_residual(p: f64, t: f64, a: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p, 0, 0.0, 1.0));
    }
    let q = 1.0 - p;
    let mix = p * t.exp() + q * a.exp();
    let lhs = p * t * t.exp() + q * a * a.exp() - mix * mix.ln();
    let rhs = p * q * (q * a.exp() * psi(t - a) + p * t.exp() * psi(a - t));
    Ok(rhs - lhs)
}

/// `g(u) = (1 + u) log(1 + u) - u`, the Poisson-type rate function.
fn poisson_rate(u: f64) -> f64 {
    (1.0 + u) * (1.0 + u).ln() - u
}

/// `P(F - E[F] >= x)` by full enumeration.
pub fn exact_tail(f: &RandomVariable, x: f64) -> f64 {
    let mean = f.expectation();
    let probs = f.space().probabilities();
    f.values()
        .iter()
        .zip(probs)
        .filter(|(v, _)| **v - mean >= x)
        .map(|(_, p)| p)
        .sum()
}

/// `max_{k,omega} |F_k^+ - F_k^-|`, the largest single-flip move.
fn max_flip(f: &RandomVariable) -> f64 {
    let mut best = 0.0f64;
    for k in 0..=f.space().horizon() {
        for i in 0..f.space().dim() {
            let w = crate::space::OutcomeIndex(i);
            let d = f.value(w.with_plus(k)) - f.value(w.with_minus(k));
            best = best.max(d.abs());
        }
    }
    best
}

/// `max_omega sum_k (D_k F)^2(omega)`.
fn grad_sup_sq(f: &RandomVariable) -> f64 {
    gradient_all(f).sup_sq_norm()
}

/// Tail bound `exp(-(|DF|^2 / K^2) g(x K / |DF|^2))` with
/// `K = max |F_k^+ - F_k^-|` and `|DF|^2` the sup of the squared gradient
/// norm; degenerates to the Gaussian form as `K -> 0`. Returns 1 for
/// `x <= 0`.
pub fn deviation_bound_poisson_type(f: &RandomVariable, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(1.0);
    }
    let d2 = grad_sup_sq(f);
    if d2 == 0.0 {
        return Err(Error::DegenerateGradient);
    }
    let k = max_flip(f);
    if k <= 1e-12 {
        return Ok((-x * x / (2.0 * d2)).exp());
    }
    Ok((-(d2 / (k * k)) * poisson_rate(x * k / d2)).exp())
}

/// Gaussian tail bound `exp(-x^2 / (2 K^2))` with
/// `K^2 = max_omega sum_k |D_k F(omega)| max_omega' |D_k F(omega')|
///        / (2 min(p_k, q_k))`. Returns 1 for `x <= 0`.
pub fn deviation_bound_gaussian(f: &RandomVariable, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(1.0);
    }
    let space = f.space();
    let cols = gradient_all(f);
    let sups: Vec<f64> = cols.columns().iter().map(RandomVariable::norm_inf).collect();
    let mut k2 = 0.0f64;
    for i in 0..space.dim() {
        let mut s = 0.0;
        for (k, col) in cols.columns().iter().enumerate() {
            let w = 1.0 / (2.0 * space.p(k).min(space.q(k)));
            s += w * col.values()[i].abs() * sups[k];
        }
        k2 = k2.max(s);
    }
    if k2 == 0.0 {
        return Err(Error::DegenerateGradient);
    }
    Ok((-x * x / (2.0 * k2)).exp())
}

/// Grid of deviations with both the bound and the exact tail at each point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationReport {
    pub xs: Vec<f64>,
    pub bounds: Vec<f64>,
    pub exact: Vec<f64>,
    /// Largest single-flip move (Poisson-type report only).
    pub flip_bound: Option<f64>,
    /// Sup of the squared gradient norm (Poisson-type report only).
    pub grad_sup_sq: Option<f64>,
    /// The squared scale of the Gaussian bound (Gaussian report only).
    pub k_sq: Option<f64>,
}

/// Poisson-type report over an `x` grid.
pub fn deviation_report_poisson_type(f: &RandomVariable, xs: &[f64]) -> Result<DeviationReport> {
    let bounds = xs
        .iter()
        .map(|&x| deviation_bound_poisson_type(f, x))
        .collect::<Result<Vec<_>>>()?;
    let exact = xs.iter().map(|&x| exact_tail(f, x)).collect();
    Ok(DeviationReport {
        xs: xs.to_vec(),
        bounds,
        exact,
        flip_bound: Some(max_flip(f)),
        grad_sup_sq: Some(grad_sup_sq(f)),
        k_sq: None,
    })
}

/// Gaussian report over an `x` grid.
pub fn deviation_report_gaussian(f: &RandomVariable, xs: &[f64]) -> Result<DeviationReport> {
    let bounds = xs
        .iter()
        .map(|&x| deviation_bound_gaussian(f, x))
        .collect::<Result<Vec<_>>>()?;
    let exact = xs.iter().map(|&x| exact_tail(f, x)).collect();
    // recover K^2 from any positive x
    let k_sq = {
        let b = deviation_bound_gaussian(f, 1.0)?;
        Some(-1.0 / (2.0 * b.ln()))
    };
    Ok(DeviationReport {
        xs: xs.to_vec(),
        bounds,
        exact,
        flip_bound: None,
        grad_sup_sq: None,
        k_sq,
    })
}
