//! The finite-difference gradient `D`, the alternative gradient `nabla`,
//! the divergence `delta`, the Ornstein-Uhlenbeck operator `L` and its
//! semigroup `P_t` in spectral and kernel forms.

use std::sync::Arc;

use crate::chaos::{walsh_coefficients, walsh_inverse};
use crate::error::{Error, Result};
use crate::space::{BernoulliSpace, OutcomeIndex, ProcessRV, RandomVariable, y_rv};

/// Beyond this time every non-constant eigenvalue decays below binary64
/// resolution, so `P_t` collapses to the mean.
const SEMIGROUP_SATURATION_TIME: f64 = 40.0;

/// All gradient columns `D_0 F .. D_N F` of one functional.
#[derive(Debug, Clone)]
pub struct GradientField {
    space: Arc<BernoulliSpace>,
    columns: Vec<RandomVariable>,
}

impl GradientField {
    pub fn space(&self) -> &Arc<BernoulliSpace> {
        &self.space
    }

    pub fn columns(&self) -> &[RandomVariable] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &RandomVariable {
        &self.columns[k]
    }

    /// `max_omega sum_k (D_k F)^2(omega)`, the squared sup of the gradient.
    pub fn sup_sq_norm(&self) -> f64 {
        let dim = self.space.dim();
        let mut best = 0.0f64;
        for i in 0..dim {
            let mut s = 0.0;
            for col in &self.columns {
                let v = col.values()[i];
                s += v * v;
            }
            best = best.max(s);
        }
        best
    }
}

/// A time-indexed process without measurability restriction, the natural
/// domain of the divergence.
#[derive(Debug, Clone)]
pub struct SkorohodProcess {
    space: Arc<BernoulliSpace>,
    entries: Vec<RandomVariable>,
}

impl SkorohodProcess {
    pub fn new(space: &Arc<BernoulliSpace>, entries: Vec<RandomVariable>) -> Result<SkorohodProcess> {
        if entries.len() != space.horizon() + 1 {
            return Err(Error::LengthMismatch(entries.len(), space.horizon() + 1));
        }
        for u in &entries {
            if !(Arc::ptr_eq(u.space(), space) || **u.space() == **space) {
                return Err(Error::SpaceMismatch);
            }
        }
        Ok(SkorohodProcess {
            space: Arc::clone(space),
            entries,
        })
    }

    pub fn from_process(u: &ProcessRV) -> SkorohodProcess {
        SkorohodProcess {
            space: Arc::clone(u.space()),
            entries: u.entries().to_vec(),
        }
    }

    pub fn space(&self) -> &Arc<BernoulliSpace> {
        &self.space
    }

    pub fn entries(&self) -> &[RandomVariable] {
        &self.entries
    }

    pub fn entry(&self, k: usize) -> &RandomVariable {
        &self.entries[k]
    }
}

/// `D_k F(omega) = sqrt(p_k q_k) (F(omega with X_k=+1) - F(omega with X_k=-1))`.
pub fn gradient(f: &RandomVariable, k: usize) -> Result<RandomVariable> {
    let space = f.space();
    if k > space.horizon() {
        return Err(Error::IndexOutOfRange(k, space.horizon()));
    }
    let s = space.sqrt_pq(k);
    let space = Arc::clone(space);
    Ok(RandomVariable::from_fn(&space, |w| {
        s * (f.value(w.with_plus(k)) - f.value(w.with_minus(k)))
    }))
}

/// All gradient columns at once.
pub fn gradient_all(f: &RandomVariable) -> GradientField {
    let space = Arc::clone(f.space());
    let columns = (0..=space.horizon())
        .map(|k| gradient(f, k).expect("index within horizon"))
        .collect();
    GradientField { space, columns }
}

/// `nabla_k F = X_k (F_k^- - F_k^+)`, related to `D` by
/// `D_k = -X_k sqrt(p_k q_k) nabla_k`.
pub fn nabla(f: &RandomVariable, k: usize) -> Result<RandomVariable> {
    let space = f.space();
    if k > space.horizon() {
        return Err(Error::IndexOutOfRange(k, space.horizon()));
    }
    let space = Arc::clone(space);
    Ok(RandomVariable::from_fn(&space, |w| {
        w.x(k) as f64 * (f.value(w.with_minus(k)) - f.value(w.with_plus(k)))
    }))
}

/// Max pointwise residual of the product rule
/// `D_k(FG) = F D_k G + G D_k F - X_k / sqrt(p_k q_k) D_k F D_k G`.
pub fn product_rule_residual(f: &RandomVariable, g: &RandomVariable, k: usize) -> Result<f64> {
    let space = f.space();
    if k > space.horizon() {
        return Err(Error::IndexOutOfRange(k, space.horizon()));
    }
    let dfg = gradient(&f.mul(g)?, k)?;
    let df = gradient(f, k)?;
    let dg = gradient(g, k)?;
    let s = space.sqrt_pq(k);
    let mut worst = 0.0f64;
    for i in 0..space.dim() {
        let w = OutcomeIndex(i);
        let x = w.x(k) as f64;
        let r = dfg.value(w) - f.value(w) * dg.value(w) - g.value(w) * df.value(w)
            + x / s * df.value(w) * dg.value(w);
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Skorohod integral in the Walsh domain: with `u_k = sum_A u_{A,k} Y_A`,
/// the coefficient of `Y_C` in `delta(u)` is `sum_{k in C} u_{C\{k},k}`.
/// Diagonal components (`k in A`) contribute nothing.
pub fn divergence(u: &SkorohodProcess) -> Result<RandomVariable> {
    let space = u.space();
    let dim = space.dim();
    let mut out = vec![0.0; dim];
    for (k, uk) in u.entries().iter().enumerate() {
        let coeffs = walsh_coefficients(uk);
        let bit = 1usize << k;
        for (mask, &c) in coeffs.iter().enumerate() {
            if mask & bit == 0 && c != 0.0 {
                out[mask | bit] += c;
            }
        }
    }
    walsh_inverse(space, &out)
}

/// Pointwise evaluation of the divergence,
/// `delta(u) = sum u_k Y_k - sum D_k u_k - delta(phi Du)`.
/// The nested term is a process whose entries are flip-invariant in their
/// own index, so its own expansion has no third term.
pub fn divergence_pointwise(u: &SkorohodProcess) -> Result<RandomVariable> {
    let space = u.space();
    let mut acc = RandomVariable::constant(space, 0.0);
    let mut inner = Vec::with_capacity(space.horizon() + 1);
    for (k, uk) in u.entries().iter().enumerate() {
        let yk = y_rv(space, k)?;
        let dk = gradient(uk, k)?;
        acc = acc.add(&uk.mul(&yk)?)?.sub(&dk)?;
        inner.push(dk.scale(space.phi(k)));
    }
    // delta of (phi_k D_k u_k): entries independent of their own coordinate
    for (k, vk) in inner.iter().enumerate() {
        let yk = y_rv(space, k)?;
        let dk = gradient(vk, k)?;
        acc = acc.sub(&vk.mul(&yk)?)?.add(&dk)?;
    }
    Ok(acc)
}

/// Both sides of the Skorohod isometry:
/// `E[delta(u)^2]` versus
/// `E[||u||^2] + E[sum_{k!=l} D_k u_l D_l u_k - sum_k (D_k u_k)^2]`.
pub fn skorohod_isometry_sides(u: &SkorohodProcess) -> Result<(f64, f64)> {
    let space = u.space();
    let d = divergence(u)?;
    let lhs = d.mul(&d)?.expectation();
    let n = space.horizon() + 1;
    let grads: Vec<Vec<RandomVariable>> = (0..n)
        .map(|l| {
            (0..n)
                .map(|k| gradient(u.entry(l), k).expect("index within horizon"))
                .collect()
        })
        .collect();
    let mut rhs = 0.0;
    for k in 0..n {
        rhs += u.entry(k).mul(u.entry(k))?.expectation();
        rhs -= grads[k][k].mul(&grads[k][k])?.expectation();
        for l in 0..n {
            if l != k {
                rhs += grads[l][k].mul(&grads[k][l])?.expectation();
            }
        }
    }
    Ok((lhs, rhs))
}

/// `L F = delta(D F)`; multiplies the Walsh coefficient `a_A` by `|A|`.
pub fn ou_operator(f: &RandomVariable) -> RandomVariable {
    let space = f.space();
    let mut coeffs = walsh_coefficients(f);
    for (mask, c) in coeffs.iter_mut().enumerate() {
        *c *= mask.count_ones() as f64;
    }
    walsh_inverse(space, &coeffs).expect("dense table has the space dimension")
}

/// Spectral semigroup: multiplies `a_A` by `exp(-|A| t)`.
pub fn semigroup(f: &RandomVariable, t: f64) -> Result<RandomVariable> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let space = f.space();
    if t >= SEMIGROUP_SATURATION_TIME {
        return Ok(RandomVariable::constant(space, f.expectation()));
    }
    let mut coeffs = walsh_coefficients(f);
    for (mask, c) in coeffs.iter_mut().enumerate() {
        *c *= (-(mask.count_ones() as f64) * t).exp();
    }
    walsh_inverse(space, &coeffs)
}

/// Kernel form of the semigroup:
/// `(P_t F)(w~) = sum_w F(w) q_t^N(w~, w) P(w)` with
/// `q_t^N(w~, w) = prod_i (1 + e^{-t} Y_i(w) Y_i(w~))`.
pub fn semigroup_kernel(f: &RandomVariable, t: f64) -> Result<RandomVariable> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let space = f.space();
    let horizon = space.horizon();
    let decay = (-t).exp();
    let ys: Vec<RandomVariable> = (0..=horizon)
        .map(|k| y_rv(space, k).expect("index within horizon"))
        .collect();
    let probs = space.probabilities();
    let dim = space.dim();
    let mut out = vec![0.0; dim];
    for (wt, slot) in out.iter_mut().enumerate() {
        let wt = OutcomeIndex(wt);
        let mut acc = 0.0;
        for w in 0..dim {
            let wi = OutcomeIndex(w);
            let mut kernel = 1.0;
            for y in &ys {
                kernel *= 1.0 + decay * y.value(wi) * y.value(wt);
            }
            acc += f.value(wi) * kernel * probs[w];
        }
        *slot = acc;
    }
    RandomVariable::from_values(space, out)
}

/// `(I + L)^{-1} F`: multiplies `a_A` by `1/(1+|A|)`; the Laplace transform
/// of the semigroup at unit rate.
pub fn resolvent(f: &RandomVariable) -> RandomVariable {
    let space = f.space();
    let mut coeffs = walsh_coefficients(f);
    for (mask, c) in coeffs.iter_mut().enumerate() {
        *c /= 1.0 + mask.count_ones() as f64;
    }
    walsh_inverse(space, &coeffs).expect("dense table has the space dimension")
}

/// Sup-norm contraction of the semigroup acting entrywise on a process:
/// returns `(max_w ||(P_t u)(w)||_2, max_w ||u(w)||_2)`.
pub fn semigroup_process_contraction_check(u: &SkorohodProcess, t: f64) -> Result<(f64, f64)> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let space = u.space();
    let mapped: Vec<RandomVariable> = u
        .entries()
        .iter()
        .map(|uk| semigroup(uk, t))
        .collect::<Result<_>>()?;
    let sup_norm = |entries: &[RandomVariable]| -> f64 {
        let mut best = 0.0f64;
        for i in 0..space.dim() {
            let s: f64 = entries.iter().map(|e| e.values()[i] * e.values()[i]).sum();
            best = best.max(s);
        }
        best.sqrt()
    };
    Ok((sup_norm(&mapped), sup_norm(u.entries())))
}
