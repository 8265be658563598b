//! Walsh/chaos algebra: multiple stochastic integrals, symmetric kernels,
//! orthogonal decomposition of random variables and the Krawtchouk
//! connection for constant success probability.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{BernoulliSpace, OutcomeIndex, RandomVariable};

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Dense Walsh coefficients of `F`: entry `A` is `E[F Y_A]`, where the
/// subset `A` is read off the bits of the index.
pub fn walsh_coefficients(f: &RandomVariable) -> Vec<f64> {
    let space = f.space();
    let mut v = f.values().to_vec();
    for k in 0..=space.horizon() {
        let bit = 1usize << k;
        let block = bit << 1;
        let (pk, qk, w) = (space.p(k), space.q(k), space.y_weight(k));
        for base in (0..v.len()).step_by(block) {
            for i in base..base + bit {
                let lo = v[i];
                let hi = v[i + bit];
                v[i] = qk * lo + pk * hi;
                v[i + bit] = w * (hi - lo);
            }
        }
    }
    v
}

/// Inverse of [`walsh_coefficients`]: rebuild the value table from dense
/// coefficients.
pub fn walsh_inverse(space: &Arc<BernoulliSpace>, coeffs: &[f64]) -> Result<RandomVariable> {
    if coeffs.len() != space.dim() {
        return Err(Error::LengthMismatch(coeffs.len(), space.dim()));
    }
    let mut v = coeffs.to_vec();
    for k in 0..=space.horizon() {
        let bit = 1usize << k;
        let block = bit << 1;
        let (yp, ym) = (space.y_plus(k), space.y_minus(k));
        for base in (0..v.len()).step_by(block) {
            for i in base..base + bit {
                let c0 = v[i];
                let c1 = v[i + bit];
                v[i] = c0 + ym * c1;
                v[i + bit] = c0 + yp * c1;
            }
        }
    }
    RandomVariable::from_values(space, v)
}

/// Sparse chaos expansion `F = sum_A a_A Y_A` over subset bit masks.
#[derive(Debug, Clone)]
pub struct ChaosExpansion {
    space: Arc<BernoulliSpace>,
    coeffs: BTreeMap<usize, f64>,
}

/// Serialized form: `{"coeffs": [{"subset": [ints], "value": real}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosExpansionDoc {
    pub coeffs: Vec<ChaosCoeffDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosCoeffDoc {
    pub subset: Vec<usize>,
    pub value: f64,
}

impl ChaosExpansion {
    pub fn new(space: &Arc<BernoulliSpace>, coeffs: BTreeMap<usize, f64>) -> Result<ChaosExpansion> {
        for &mask in coeffs.keys() {
            if mask >= space.dim() {
                return Err(Error::IndexOutOfRange(mask, space.dim() - 1));
            }
        }
        Ok(ChaosExpansion {
            space: Arc::clone(space),
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<BernoulliSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, f64> {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    /// Subsets sorted by size, then by mask; the canonical emission order.
    pub fn sorted_entries(&self) -> Vec<(Vec<usize>, f64)> {
        let mut entries: Vec<(usize, f64)> = self.coeffs.iter().map(|(&m, &v)| (m, v)).collect();
        entries.sort_by_key(|&(m, _)| (m.count_ones(), m));
        entries
            .into_iter()
            .map(|(m, v)| (mask_to_subset(m), v))
            .collect()
    }

    pub fn to_doc(&self) -> ChaosExpansionDoc {
        ChaosExpansionDoc {
            coeffs: self
                .sorted_entries()
                .into_iter()
                .map(|(subset, value)| ChaosCoeffDoc { subset, value })
                .collect(),
        }
    }

    pub fn from_doc(space: &Arc<BernoulliSpace>, doc: &ChaosExpansionDoc) -> Result<ChaosExpansion> {
        let mut coeffs = BTreeMap::new();
        for c in &doc.coeffs {
            let mask = subset_to_mask(&c.subset);
            coeffs.insert(mask, c.value);
        }
        ChaosExpansion::new(space, coeffs)
    }
}

pub fn mask_to_subset(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|&k| mask & (1 << k) != 0)
        .collect()
}

pub fn subset_to_mask(subset: &[usize]) -> usize {
    subset.iter().fold(0, |m, &k| m | (1 << k))
}

/// Project `F` on the orthonormal Walsh basis: `a_A = E[F Y_A]`.
/// Exact zeros are dropped from the sparse map.
pub fn walsh_decompose(f: &RandomVariable) -> ChaosExpansion {
    let dense = walsh_coefficients(f);
    let coeffs = dense
        .into_iter()
        .enumerate()
        .filter(|&(_, v)| v != 0.0)
        .collect();
    ChaosExpansion {
        space: Arc::clone(f.space()),
        coeffs,
    }
}

/// Evaluate `sum_A a_A Y_A` pointwise.
pub fn walsh_reconstruct(e: &ChaosExpansion) -> RandomVariable {
    let mut dense = vec![0.0; e.space.dim()];
    for (&mask, &v) in &e.coeffs {
        dense[mask] = v;
    }
    walsh_inverse(&e.space, &dense).expect("dense table has the space dimension")
}

/// Keep only subsets within `{0..n}`; equals decomposing `E[F | F_n]`.
pub fn chaos_truncate(e: &ChaosExpansion, n: i32) -> Result<ChaosExpansion> {
    if n < -1 || n > e.space.horizon() as i32 {
        return Err(Error::TimeIndexOutOfRange(n, e.space.horizon()));
    }
    let keep = if n < 0 { 0 } else { (1usize << (n + 1)) - 1 };
    let coeffs = e
        .coeffs
        .iter()
        .filter(|&(&m, _)| m & !keep == 0)
        .map(|(&m, &v)| (m, v))
        .collect();
    Ok(ChaosExpansion {
        space: Arc::clone(&e.space),
        coeffs,
    })
}

/// Symmetric kernel of fixed order, stored on strictly increasing tuples.
/// Order 0 holds a single scalar under the empty key.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricKernel {
    order: usize,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl SymmetricKernel {
    pub fn scalar(c: f64) -> SymmetricKernel {
        let mut entries = BTreeMap::new();
        entries.insert(Vec::new(), c);
        SymmetricKernel { order: 0, entries }
    }

    /// Build from entries on strictly increasing tuples. Keys with repeated
    /// or non-increasing indices are rejected.
    pub fn from_increasing(order: usize, entries: BTreeMap<Vec<usize>, f64>) -> Result<SymmetricKernel> {
        for key in entries.keys() {
            if key.len() != order {
                return Err(Error::OrderMismatch(key.len(), order));
            }
            if !key.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::OrderMismatch(order, order));
            }
        }
        Ok(SymmetricKernel { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.entries
    }

    pub fn get(&self, key: &[usize]) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }
}

/// Average an arbitrary kernel over permutations and collapse it onto
/// strictly increasing tuples. Diagonal entries (repeated indices) are
/// irrelevant to the multiple integral and are dropped.
pub fn symmetrize(raw: &[(Vec<usize>, f64)], n: usize) -> SymmetricKernel {
    let inv = 1.0 / factorial(n);
    let mut entries: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (key, value) in raw {
        if key.len() != n {
            continue;
        }
        let mut sorted = key.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        *entries.entry(sorted).or_insert(0.0) += value * inv;
    }
    SymmetricKernel { order: n, entries }
}

/// `J_n(f) = n! sum_{k_1<...<k_n} f(k_1..k_n) Y_{k_1}...Y_{k_n}`.
/// Orders above `N+1` yield the zero variable.
pub fn multiple_integral(space: &Arc<BernoulliSpace>, f: &SymmetricKernel) -> Result<RandomVariable> {
    let n = f.order();
    if n > space.horizon() + 1 {
        return Ok(RandomVariable::constant(space, 0.0));
    }
    let fact = factorial(n);
    let mut dense = vec![0.0; space.dim()];
    for (key, &v) in f.entries() {
        for &k in key {
            if k > space.horizon() {
                return Err(Error::IndexOutOfRange(k, space.horizon()));
            }
        }
        dense[subset_to_mask(key)] += fact * v;
    }
    walsh_inverse(space, &dense)
}

/// Extract the order-`n` kernel from an expansion: `f_n(A) = a_A / n!`.
pub fn kernel_of_order(e: &ChaosExpansion, n: usize) -> SymmetricKernel {
    let inv = 1.0 / factorial(n);
    let entries = e
        .coeffs
        .iter()
        .filter(|&(&m, _)| m.count_ones() as usize == n)
        .map(|(&m, &v)| (mask_to_subset(m), v * inv))
        .collect();
    SymmetricKernel { order: n, entries }
}

/// Assemble an expansion from kernels of pairwise distinct orders.
pub fn expansion_from_kernels(
    space: &Arc<BernoulliSpace>,
    kernels: &[SymmetricKernel],
) -> Result<ChaosExpansion> {
    let mut seen = vec![false; space.horizon() + 3];
    let mut coeffs = BTreeMap::new();
    for f in kernels {
        let n = f.order();
        if n < seen.len() {
            if seen[n] {
                return Err(Error::OrderMismatch(n, n));
            }
            seen[n] = true;
        }
        if n > space.horizon() + 1 {
            continue;
        }
        let fact = factorial(n);
        for (key, &v) in f.entries() {
            for &k in key {
                if k > space.horizon() {
                    return Err(Error::IndexOutOfRange(k, space.horizon()));
                }
            }
            coeffs.insert(subset_to_mask(key), fact * v);
        }
    }
    ChaosExpansion::new(space, coeffs)
}

/// `J_n` of the constant kernel on `[0,N]^n` for a constant-`p` space,
/// returned with the induced polynomial table `s -> K(s)`, `s = 0..N+1`.
///
/// The value is a symmetric function of the coordinates, hence measurable
/// with respect to `S_N`; the table is read off representative outcomes.
pub fn krawtchouk_check(
    space: &Arc<BernoulliSpace>,
    n: usize,
) -> Result<(RandomVariable, Vec<f64>)> {
    let horizon = space.horizon();
    let p0 = space.p(0);
    for k in 1..=horizon {
        if space.p(k) != p0 {
            return Err(Error::NonConstantP);
        }
    }
    let rv = if n > horizon + 1 {
        RandomVariable::constant(space, 0.0)
    } else {
        // constant kernel 1 on increasing tuples: a_A = n! / n! .. J_n picks
        // up every product of n distinct Y's with unit weight
        let mut dense = vec![0.0; space.dim()];
        for mask in 0..space.dim() {
            if mask.count_ones() as usize == n {
                dense[mask] = 1.0;
            }
        }
        walsh_inverse(space, &dense)?
    };
    let mut table = vec![0.0; horizon + 2];
    for s in 0..=horizon + 1 {
        // representative outcome with the s lowest coordinates at +1
        let omega = OutcomeIndex((1usize << s) - 1);
        table[s] = rv.value(omega);
    }
    Ok((rv, table))
}
