//! Finite Bernoulli sample space `{-1,1}^{N+1}` with product measure,
//! normalized noise `Y_k`, filtration operations and the elementary
//! stochastic integral.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported horizon; `2^{N+1}` value tables stop being desk-scale
/// beyond this.
pub const MAX_HORIZON: usize = 24;

/// Guard keeping `sqrt(q/p)` and `phi` finite.
pub const PROBABILITY_GUARD: f64 = 1e-9;

/// One element of `{-1,1}^{N+1}` encoded as a bit mask: bit `k` stores
/// `Z_k = (1+X_k)/2`, least significant bit is time 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomeIndex(pub usize);

impl OutcomeIndex {
    /// `Z_k` of this outcome, 0 or 1.
    pub fn z(self, k: usize) -> usize {
        (self.0 >> k) & 1
    }

    /// `X_k` of this outcome, -1 or +1.
    pub fn x(self, k: usize) -> i32 {
        2 * (self.z(k) as i32) - 1
    }

    /// The outcome with coordinate `k` forced to `X_k = +1`.
    pub fn with_plus(self, k: usize) -> OutcomeIndex {
        OutcomeIndex(self.0 | (1 << k))
    }

    /// The outcome with coordinate `k` forced to `X_k = -1`.
    pub fn with_minus(self, k: usize) -> OutcomeIndex {
        OutcomeIndex(self.0 & !(1 << k))
    }
}

/// JSON description of a space: `{"N": int, "p": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(rename = "N")]
    pub horizon: usize,
    pub p: Vec<f64>,
}

/// The product Bernoulli space with horizon `N` and success probabilities
/// `p_0..p_N`, together with the derived structure coefficients.
#[derive(Debug)]
pub struct BernoulliSpace {
    horizon: usize,
    p: Vec<f64>,
    q: Vec<f64>,
    phi: Vec<f64>,
    y_plus: Vec<f64>,
    y_minus: Vec<f64>,
    // p_k * y_plus_k = -q_k * y_minus_k, stored once so that conditional
    // centering is exact in floating point.
    y_weight: Vec<f64>,
    probs: Vec<f64>,
}

impl PartialEq for BernoulliSpace {
    fn eq(&self, other: &Self) -> bool {
        self.horizon == other.horizon && self.p == other.p
    }
}

impl BernoulliSpace {
    pub fn new(horizon: usize, p: &[f64]) -> Result<Arc<BernoulliSpace>> {
        if horizon > MAX_HORIZON {
            return Err(Error::HorizonTooLarge(horizon, MAX_HORIZON));
        }
        if p.len() != horizon + 1 {
            return Err(Error::LengthMismatch(p.len(), horizon + 1));
        }
        let lo = PROBABILITY_GUARD;
        let hi = 1.0 - PROBABILITY_GUARD;
        for (k, &pk) in p.iter().enumerate() {
            if !(pk >= lo && pk <= hi) {
                return Err(Error::ProbabilityOutOfRange(pk, k, lo, hi));
            }
        }
        let q: Vec<f64> = p.iter().map(|&pk| 1.0 - pk).collect();
        let mut phi = Vec::with_capacity(p.len());
        let mut y_plus = Vec::with_capacity(p.len());
        let mut y_minus = Vec::with_capacity(p.len());
        let mut y_weight = Vec::with_capacity(p.len());
        for k in 0..p.len() {
            let s = (p[k] * q[k]).sqrt();
            phi.push((q[k] - p[k]) / s);
            // sqrt(q/p) = q / sqrt(pq) and -sqrt(p/q) = -p / sqrt(pq)
            y_plus.push(q[k] / s);
            y_minus.push(-p[k] / s);
            y_weight.push(p[k] * q[k] / s);
        }
        let dim = 1usize << (horizon + 1);
        let mut probs = vec![1.0f64; dim];
        for k in 0..=horizon {
            let bit = 1usize << k;
            let block = bit << 1;
            for base in (0..dim).step_by(block) {
                for i in base..base + bit {
                    let hi_val = probs[i] * p[k];
                    probs[i] *= q[k];
                    probs[i + bit] = hi_val;
                }
            }
        }
        Ok(Arc::new(BernoulliSpace {
            horizon,
            p: p.to_vec(),
            q,
            phi,
            y_plus,
            y_minus,
            y_weight,
            probs,
        }))
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Arc<BernoulliSpace>> {
        BernoulliSpace::new(spec.horizon, &spec.p)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of outcomes, `2^{N+1}`.
    pub fn dim(&self) -> usize {
        1 << (self.horizon + 1)
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p[k]
    }

    pub fn q(&self, k: usize) -> f64 {
        self.q[k]
    }

    pub fn phi(&self, k: usize) -> f64 {
        self.phi[k]
    }

    pub fn y_plus(&self, k: usize) -> f64 {
        self.y_plus[k]
    }

    pub fn y_minus(&self, k: usize) -> f64 {
        self.y_minus[k]
    }

    /// `p_k * y_plus_k`, the (positive) weight of both halves of `E[Y_k g]`.
    pub fn y_weight(&self, k: usize) -> f64 {
        self.y_weight[k]
    }

    pub fn sqrt_pq(&self, k: usize) -> f64 {
        (self.p[k] * self.q[k]).sqrt()
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k > self.horizon {
            return Err(Error::IndexOutOfRange(k, self.horizon));
        }
        Ok(())
    }

    fn check_time(&self, n: i32) -> Result<()> {
        if n < -1 || n > self.horizon as i32 {
            return Err(Error::TimeIndexOutOfRange(n, self.horizon));
        }
        Ok(())
    }

    /// `P(omega)` as the product of coordinate marginals.
    pub fn outcome_probability(&self, omega: OutcomeIndex) -> Result<f64> {
        if omega.0 >= self.dim() {
            return Err(Error::IndexOutOfRange(omega.0, self.dim() - 1));
        }
        Ok(self.probs[omega.0])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

/// Build a space; thin wrapper matching the construction contract.
pub fn new_space(horizon: usize, p: &[f64]) -> Result<Arc<BernoulliSpace>> {
    BernoulliSpace::new(horizon, p)
}

/// A real-valued functional of the whole path, stored as a dense table of
/// `2^{N+1}` values indexed by [`OutcomeIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    space: Arc<BernoulliSpace>,
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn from_values(space: &Arc<BernoulliSpace>, values: Vec<f64>) -> Result<RandomVariable> {
        if values.len() != space.dim() {
            return Err(Error::LengthMismatch(values.len(), space.dim()));
        }
        Ok(RandomVariable {
            space: Arc::clone(space),
            values,
        })
    }

    pub fn constant(space: &Arc<BernoulliSpace>, c: f64) -> RandomVariable {
        RandomVariable {
            space: Arc::clone(space),
            values: vec![c; space.dim()],
        }
    }

    pub fn from_fn<F: FnMut(OutcomeIndex) -> f64>(
        space: &Arc<BernoulliSpace>,
        mut f: F,
    ) -> RandomVariable {
        let values = (0..space.dim()).map(|i| f(OutcomeIndex(i))).collect();
        RandomVariable {
            space: Arc::clone(space),
            values,
        }
    }

    pub fn space(&self) -> &Arc<BernoulliSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, omega: OutcomeIndex) -> f64 {
        self.values[omega.0]
    }

    pub fn same_space(&self, other: &RandomVariable) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    fn check_same_space(&self, other: &RandomVariable) -> Result<()> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// `E[F]`, summed in ascending outcome order.
    pub fn expectation(&self) -> f64 {
        let probs = self.space.probabilities();
        let mut acc = 0.0;
        for (v, p) in self.values.iter().zip(probs) {
            acc += v * p;
        }
        acc
    }

    /// `E[F | F_n]`; `n = -1` returns the constant `E[F]`.
    pub fn conditional_expectation(&self, n: i32) -> Result<RandomVariable> {
        self.space.check_time(n)?;
        let horizon = self.space.horizon();
        let mut v = self.values.clone();
        // Average out coordinates N down to n+1; after step k the first
        // 2^k entries carry the reduced table.
        let mut size = v.len();
        for k in ((n + 1) as usize..=horizon).rev() {
            let bit = 1usize << k;
            debug_assert_eq!(size, bit << 1);
            let (pk, qk) = (self.space.p(k), self.space.q(k));
            for i in 0..bit {
                v[i] = qk * v[i] + pk * v[i + bit];
            }
            size = bit;
        }
        let mask = size - 1;
        let values = (0..self.space.dim()).map(|i| v[i & mask]).collect();
        Ok(RandomVariable {
            space: Arc::clone(&self.space),
            values,
        })
    }

    /// True when the table does not depend on coordinates `> n`;
    /// `n = -1` means constant.
    pub fn is_measurable_up_to(&self, n: i32) -> bool {
        let horizon = self.space.horizon() as i32;
        for k in (n + 1)..=horizon {
            let bit = 1usize << k as usize;
            for i in 0..self.values.len() {
                if i & bit == 0 && self.values[i] != self.values[i | bit] {
                    return false;
                }
            }
        }
        true
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> RandomVariable {
        RandomVariable {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(
        &self,
        other: &RandomVariable,
        f: F,
    ) -> Result<RandomVariable> {
        self.check_same_space(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(RandomVariable {
            space: Arc::clone(&self.space),
            values,
        })
    }

    pub fn add(&self, other: &RandomVariable) -> Result<RandomVariable> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RandomVariable) -> Result<RandomVariable> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &RandomVariable) -> Result<RandomVariable> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> RandomVariable {
        self.map(|v| c * v)
    }

    pub fn shift(&self, c: f64) -> RandomVariable {
        self.map(|v| v + c)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// `sqrt(E[F^2])`.
    pub fn norm_l2(&self) -> f64 {
        self.map(|v| v * v).expectation().max(0.0).sqrt()
    }
}

/// `Y_k` as a random variable.
pub fn y_rv(space: &Arc<BernoulliSpace>, k: usize) -> Result<RandomVariable> {
    space.check_index(k)?;
    let (yp, ym) = (space.y_plus(k), space.y_minus(k));
    Ok(RandomVariable::from_fn(space, |w| {
        if w.z(k) == 1 {
            yp
        } else {
            ym
        }
    }))
}

/// `X_k` as a random variable (values in `{-1, 1}`).
pub fn x_rv(space: &Arc<BernoulliSpace>, k: usize) -> Result<RandomVariable> {
    space.check_index(k)?;
    Ok(RandomVariable::from_fn(space, |w| w.x(k) as f64))
}

/// `S_n = sum_{k<=n} Z_k`, the associated random walk.
pub fn s_rv(space: &Arc<BernoulliSpace>, n: usize) -> Result<RandomVariable> {
    space.check_index(n)?;
    let mask = (1usize << (n + 1)) - 1;
    Ok(RandomVariable::from_fn(space, |w| {
        (w.0 & mask).count_ones() as f64
    }))
}

/// Measurability tag of a time-indexed process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measurability {
    Unrestricted,
    /// `u_k` is `F_k`-measurable.
    Adapted,
    /// `u_k` is `F_{k-1}`-measurable.
    Predictable,
}

/// A sequence `u_0..u_N` of random variables with a measurability tag,
/// validated by bit-independence at construction.
#[derive(Debug, Clone)]
pub struct ProcessRV {
    space: Arc<BernoulliSpace>,
    entries: Vec<RandomVariable>,
    tag: Measurability,
}

impl ProcessRV {
    pub fn new(
        space: &Arc<BernoulliSpace>,
        entries: Vec<RandomVariable>,
        tag: Measurability,
    ) -> Result<ProcessRV> {
        if entries.len() != space.horizon() + 1 {
            return Err(Error::LengthMismatch(entries.len(), space.horizon() + 1));
        }
        for (k, u) in entries.iter().enumerate() {
            if !(Arc::ptr_eq(u.space(), space) || **u.space() == **space) {
                return Err(Error::SpaceMismatch);
            }
            match tag {
                Measurability::Unrestricted => {}
                Measurability::Adapted => {
                    if !u.is_measurable_up_to(k as i32) {
                        return Err(Error::NotAdapted(k));
                    }
                }
                Measurability::Predictable => {
                    if !u.is_measurable_up_to(k as i32 - 1) {
                        return Err(Error::NotPredictable(k));
                    }
                }
            }
        }
        Ok(ProcessRV {
            space: Arc::clone(space),
            entries,
            tag,
        })
    }

    /// Deterministic process from plain coefficients.
    pub fn deterministic(space: &Arc<BernoulliSpace>, coeffs: &[f64]) -> Result<ProcessRV> {
        let entries = coeffs
            .iter()
            .map(|&c| RandomVariable::constant(space, c))
            .collect();
        ProcessRV::new(space, entries, Measurability::Predictable)
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

    pub fn tag(&self) -> Measurability {
        self.tag
    }
}

/// `J(u) = sum_k u_k Y_k` for predictable `u`.
pub fn integral(u: &ProcessRV) -> Result<RandomVariable> {
    if u.tag() != Measurability::Predictable {
        return Err(Error::NotPredictable(0));
    }
    integral_unchecked(u)
}

pub(crate) fn integral_unchecked(u: &ProcessRV) -> Result<RandomVariable> {
    let space = u.space();
    let mut acc = RandomVariable::constant(space, 0.0);
    for (k, uk) in u.entries().iter().enumerate() {
        let yk = y_rv(space, k)?;
        acc = acc.add(&uk.mul(&yk)?)?;
    }
    Ok(acc)
}

/// `J(u 1_{[0,k]}) = E[J(u) | F_k]`; `k = -1` gives 0.
pub fn integral_partial(u: &ProcessRV, k: i32) -> Result<RandomVariable> {
    if u.tag() != Measurability::Predictable {
        return Err(Error::NotPredictable(0));
    }
    let space = u.space();
    space.check_time(k)?;
    let mut acc = RandomVariable::constant(space, 0.0);
    for j in 0..=k {
        let j = j as usize;
        let yj = y_rv(space, j)?;
        acc = acc.add(&u.entry(j).mul(&yj)?)?;
    }
    Ok(acc)
}
