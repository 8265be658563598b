//! Predictable representation (Clark decomposition), martingale
//! representation, the Poincare inequality, covariance identities along
//! four routes, the alternating variance sandwich, and FKG positivity.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::malliavin::{gradient, gradient_all, resolvent};
use crate::space::{
    integral_unchecked, Measurability, ProcessRV, RandomVariable,
};

/// `F = mean + sum_k u_k Y_k` with the unique predictable integrand
/// `u_k = E[D_k F | F_{k-1}]`.
#[derive(Debug, Clone)]
pub struct ClarkDecomposition {
    pub mean: f64,
    pub integrand: ProcessRV,
}

/// Predictable representation of `F`.
pub fn clark(f: &RandomVariable) -> ClarkDecomposition {
    let space = Arc::clone(f.space());
    let entries: Vec<RandomVariable> = (0..=space.horizon())
        .map(|k| {
            gradient(f, k)
                .expect("index within horizon")
                .conditional_expectation(k as i32 - 1)
                .expect("time index within range")
        })
        .collect();
    let integrand = ProcessRV::new(&space, entries, Measurability::Predictable)
        .expect("conditional expectations are predictable");
    ClarkDecomposition {
        mean: f.expectation(),
        integrand,
    }
}

impl ClarkDecomposition {
    /// Rebuild `mean + sum u_k Y_k`.
    pub fn reconstruct(&self) -> RandomVariable {
        integral_unchecked(&self.integrand)
            .expect("integrand entries live on the same space")
            .shift(self.mean)
    }
}

/// Representation started from time `a`:
/// `F = E[F|F_a] + sum_{k>a} E[D_k F | F_{k-1}] Y_k`.
/// Returns the head and the tail integrand (entries `<= a` zeroed).
pub fn clark_from(f: &RandomVariable, a: i32) -> Result<(RandomVariable, ProcessRV)> {
    let space = Arc::clone(f.space());
    if a < -1 || a > space.horizon() as i32 {
        return Err(Error::TimeIndexOutOfRange(a, space.horizon()));
    }
    let head = f.conditional_expectation(a)?;
    let entries: Vec<RandomVariable> = (0..=space.horizon())
        .map(|k| {
            if (k as i32) <= a {
                Ok(RandomVariable::constant(&space, 0.0))
            } else {
                gradient(f, k)?.conditional_expectation(k as i32 - 1)
            }
        })
        .collect::<Result<_>>()?;
    let tail = ProcessRV::new(&space, entries, Measurability::Predictable)?;
    Ok((head, tail))
}

/// Predictable process reproducing the increments of a martingale
/// `M_{-1}..M_N`: `u_k = E[D_k M_k | F_{k-1}]`,
/// `M_n = M_{-1} + sum_{k<=n} u_k Y_k`.
pub fn martingale_representation(m: &[RandomVariable]) -> Result<ProcessRV> {
    let space = Arc::clone(
        m.first()
            .ok_or(Error::LengthMismatch(0, 1))?
            .space(),
    );
    if m.len() != space.horizon() + 2 {
        return Err(Error::LengthMismatch(m.len(), space.horizon() + 2));
    }
    for (i, mi) in m.iter().enumerate() {
        if !(Arc::ptr_eq(mi.space(), &space) || **mi.space() == *space) {
            return Err(Error::SpaceMismatch);
        }
        // m[i] carries M_{i-1}; it must be F_{i-1}-measurable with
        // E[M_i | F_{i-1}] = M_{i-1}.
        if i + 1 < m.len() {
            let next = &m[i + 1];
            let proj = next.conditional_expectation(i as i32 - 1)?;
            let residual = proj.sub(mi)?.norm_inf();
            if residual > 1e-10 {
                return Err(Error::NotAMartingale(i, residual));
            }
        }
    }
    let entries: Vec<RandomVariable> = (0..=space.horizon())
        .map(|k| gradient(&m[k + 1], k)?.conditional_expectation(k as i32 - 1))
        .collect::<Result<_>>()?;
    ProcessRV::new(&space, entries, Measurability::Predictable)
}

/// `(Var(F), E[sum_k (D_k F)^2])`; the first never exceeds the second.
pub fn poincare_sides(f: &RandomVariable) -> (f64, f64) {
    let mean = f.expectation();
    let var = f.shift(-mean).map(|v| v * v).expectation();
    let energy = gradient_all(f)
        .columns()
        .iter()
        .map(|c| c.map(|v| v * v).expectation())
        .sum();
    (var, energy)
}

/// `E[(F - E[F])(G - E[G])]`.
pub fn covariance_direct(f: &RandomVariable, g: &RandomVariable) -> Result<f64> {
    let cf = f.shift(-f.expectation());
    let cg = g.shift(-g.expectation());
    Ok(cf.mul(&cg)?.expectation())
}

/// Covariance through the predictable representation:
/// `E[sum_k E[D_k G | F_{k-1}] D_k F]`.
pub fn covariance_clark(f: &RandomVariable, g: &RandomVariable) -> Result<f64> {
    if !f.same_space(g) {
        return Err(Error::SpaceMismatch);
    }
    let mut acc = 0.0;
    for k in 0..=f.space().horizon() {
        let dg = gradient(g, k)?.conditional_expectation(k as i32 - 1)?;
        acc += dg.mul(&gradient(f, k)?)?.expectation();
    }
    Ok(acc)
}

/// Covariance through the heat-flow identity, with the time integral
/// collapsed to a resolvent: `E[sum_k D_k F (I + L)^{-1} D_k G]`.
pub fn covariance_semigroup(f: &RandomVariable, g: &RandomVariable) -> Result<f64> {
    if !f.same_space(g) {
        return Err(Error::SpaceMismatch);
    }
    let mut acc = 0.0;
    for k in 0..=f.space().horizon() {
        let df = gradient(f, k)?;
        let rg = resolvent(&gradient(g, k)?);
        acc += df.mul(&rg)?.expectation();
    }
    Ok(acc)
}

/// Gradient columns iterated along a strictly increasing index tuple,
/// applied innermost-first.
fn iterated_gradient(f: &RandomVariable, tuple: &[usize]) -> RandomVariable {
    let mut acc = f.clone();
    for &k in tuple {
        acc = gradient(&acc, k).expect("index within horizon");
    }
    acc
}

fn increasing_tuples(n_coords: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d);
    fn rec(n: usize, d: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == d {
            out.push(current.clone());
            return;
        }
        for k in start..n {
            current.push(k);
            rec(n, d, k + 1, current, out);
            current.pop();
        }
    }
    rec(n_coords, d, 0, &mut current, &mut out);
    out
}

/// Covariance via alternating sums of iterated-gradient inner products up
/// to depth `n`, plus the conditioned depth-`n+1` remainder.
pub fn covariance_iterated(f: &RandomVariable, g: &RandomVariable, n: usize) -> Result<f64> {
    if !f.same_space(g) {
        return Err(Error::SpaceMismatch);
    }
    let coords = f.space().horizon() + 1;
    let mut acc = 0.0;
    for d in 1..=n {
        let sign = if d % 2 == 1 { 1.0 } else { -1.0 };
        let mut term = 0.0;
        for tuple in increasing_tuples(coords, d) {
            let df = iterated_gradient(f, &tuple);
            let dg = iterated_gradient(g, &tuple);
            term += df.mul(&dg)?.expectation();
        }
        acc += sign * term;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let mut rem = 0.0;
    for tuple in increasing_tuples(coords, n + 1) {
        let df = iterated_gradient(f, &tuple);
        let dg = iterated_gradient(g, &tuple)
            .conditional_expectation(*tuple.last().expect("tuple non-empty") as i32 - 1)?;
        rem += df.mul(&dg)?.expectation();
    }
    Ok(acc + sign * rem)
}

/// `E[sum over increasing d-tuples of (D_{k_d}..D_{k_1} F)^2]`.
fn gradient_energy(f: &RandomVariable, d: usize) -> f64 {
    let coords = f.space().horizon() + 1;
    let mut acc = 0.0;
    for tuple in increasing_tuples(coords, d) {
        let df = iterated_gradient(f, &tuple);
        acc += df.map(|v| v * v).expectation();
    }
    acc
}

/// Alternating partial sums of iterated gradient energies:
/// `(sum of 2n terms, sum of 2n-1 terms)`; the variance sits between them.
pub fn variance_sandwich(f: &RandomVariable, n: usize) -> (f64, f64) {
    assert!(n >= 1, "depth must be at least 1");
    let energies: Vec<f64> = (1..=2 * n).map(|d| gradient_energy(f, d)).collect();
    let partial = |terms: usize| -> f64 {
        energies[..terms]
            .iter()
            .enumerate()
            .map(|(i, e)| if i % 2 == 0 { *e } else { -*e })
            .sum()
    };
    (partial(2 * n), partial(2 * n - 1))
}

/// Result of the positive-association test.
#[derive(Debug, Clone, Copy)]
pub struct FkgResult {
    /// All gradient columns of `F` are nonnegative (sufficient for
    /// non-decreasing in every coordinate).
    pub is_monotone_f: bool,
    pub is_monotone_g: bool,
    pub cov: f64,
    /// Weaker sufficient condition: the products of predictable
    /// projections `E[D_k F|F_{k-1}] E[D_k G|F_{k-1}]` are all nonnegative.
    pub weak_condition: bool,
}

/// Checks coordinatewise monotonicity of both inputs via gradient signs
/// and reports the covariance; when both are monotone the covariance is
/// nonnegative.
pub fn fkg_check(f: &RandomVariable, g: &RandomVariable) -> Result<FkgResult> {
    if !f.same_space(g) {
        return Err(Error::SpaceMismatch);
    }
    let tol = -1e-12;
    let monotone = |h: &RandomVariable| -> bool {
        gradient_all(h).columns().iter().all(|c| c.min() >= tol)
    };
    let mut weak = true;
    for k in 0..=f.space().horizon() {
        let pf = gradient(f, k)?.conditional_expectation(k as i32 - 1)?;
        let pg = gradient(g, k)?.conditional_expectation(k as i32 - 1)?;
        if pf.mul(&pg)?.min() < tol {
            weak = false;
        }
    }
    Ok(FkgResult {
        is_monotone_f: monotone(f),
        is_monotone_g: monotone(g),
        cov: covariance_direct(f, g)?,
        weak_condition: weak,
    })
}

/// Helper shared by the audits: `Var(F)`.
pub fn variance(f: &RandomVariable) -> f64 {
    poincare_sides(f).0
}
