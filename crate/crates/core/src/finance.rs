//! Binomial (Cox-Ross-Rubinstein) market model: risk-neutral pricing,
//! replication/hedging driven by the predictable representation, and the
//! discrete change-of-variable check.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identities::martingale_representation;
use crate::malliavin::gradient;
use crate::space::{BernoulliSpace, Measurability, ProcessRV, RandomVariable};

/// JSON description of a model; `S0` and `A0` denote the time `-1`
/// (initial, deterministic) prices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(rename = "N")]
    pub horizon: usize,
    pub r: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "S0")]
    pub s_init: f64,
    #[serde(rename = "A0")]
    pub a_init: f64,
}

/// Arbitrage-free binomial market bound to the Bernoulli space built from
/// its risk-neutral probabilities `p*_k = (r_k - a_k)/(b_k - a_k)`.
#[derive(Debug)]
pub struct CrrModel {
    space: Arc<BernoulliSpace>,
    horizon: usize,
    r: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    s_init: f64,
    a_init: f64,
}

impl CrrModel {
    pub fn space(&self) -> &Arc<BernoulliSpace> {
        &self.space
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn rate(&self, k: usize) -> f64 {
        self.r[k]
    }

    pub fn down(&self, k: usize) -> f64 {
        self.a[k]
    }

    pub fn up(&self, k: usize) -> f64 {
        self.b[k]
    }

    pub fn initial_stock(&self) -> f64 {
        self.s_init
    }

    pub fn initial_bond(&self) -> f64 {
        self.a_init
    }

    /// Deterministic bond value `A_n`; `n = -1` gives the initial value.
    pub fn bond_price(&self, n: i32) -> Result<f64> {
        self.check_time(n)?;
        let mut v = self.a_init;
        for k in 0..=n {
            v *= 1.0 + self.r[k as usize];
        }
        Ok(v)
    }

    /// `prod_{k=n+1}^{N} (1 + r_k)^{-1}`.
    fn discount_from(&self, n: i32) -> f64 {
        let mut d = 1.0;
        for k in (n + 1)..=(self.horizon as i32) {
            d /= 1.0 + self.r[k as usize];
        }
        d
    }

    /// `prod_{k=0}^{n} (1 + r_k)^{-1}`.
    fn discount_to(&self, n: i32) -> f64 {
        let mut d = 1.0;
        for k in 0..=n {
            d /= 1.0 + self.r[k as usize];
        }
        d
    }

    fn check_time(&self, n: i32) -> Result<()> {
        if n < -1 || n > self.horizon as i32 {
            return Err(Error::TimeIndexOutOfRange(n, self.horizon));
        }
        Ok(())
    }
}

/// Validates `-1 < a_k < r_k < b_k` and positive initial prices, then
/// builds the model on the risk-neutral space.
pub fn build_model(spec: &ModelSpec) -> Result<CrrModel> {
    let n = spec.horizon;
    if spec.r.len() != n + 1 {
        return Err(Error::LengthMismatch(spec.r.len(), n + 1));
    }
    if spec.a.len() != n + 1 {
        return Err(Error::LengthMismatch(spec.a.len(), n + 1));
    }
    if spec.b.len() != n + 1 {
        return Err(Error::LengthMismatch(spec.b.len(), n + 1));
    }
    for k in 0..=n {
        if !(-1.0 < spec.a[k] && spec.a[k] < spec.r[k] && spec.r[k] < spec.b[k]) {
            return Err(Error::ArbitrageViolation(k));
        }
    }
    if !(spec.s_init > 0.0) {
        return Err(Error::InvalidPrice(spec.s_init));
    }
    if !(spec.a_init > 0.0) {
        return Err(Error::InvalidPrice(spec.a_init));
    }
    let p_star: Vec<f64> = (0..=n)
        .map(|k| (spec.r[k] - spec.a[k]) / (spec.b[k] - spec.a[k]))
        .collect();
    let space = BernoulliSpace::new(n, &p_star)?;
    Ok(CrrModel {
        space,
        horizon: n,
        r: spec.r.clone(),
        a: spec.a.clone(),
        b: spec.b.clone(),
        s_init: spec.s_init,
        a_init: spec.a_init,
    })
}

/// `S_n`: multiplies `(1 + b_k)` on up branches and `(1 + a_k)` on down
/// branches up to time `n`; `n = -1` gives the constant initial price.
pub fn stock_price(model: &CrrModel, n: i32) -> Result<RandomVariable> {
    model.check_time(n)?;
    let (a, b, s0) = (model.a.clone(), model.b.clone(), model.s_init);
    Ok(RandomVariable::from_fn(model.space(), move |w| {
        let mut s = s0;
        for k in 0..=n {
            let k = k as usize;
            s *= if w.z(k) == 1 { 1.0 + b[k] } else { 1.0 + a[k] };
        }
        s
    }))
}

/// `S_n prod_{k<=n} (1 + r_k)^{-1}`, a martingale on the model space.
pub fn discounted_price(model: &CrrModel, n: i32) -> Result<RandomVariable> {
    Ok(stock_price(model, n)?.scale(model.discount_to(n)))
}

/// Arbitrage-free price of the claim `F`:
/// `V_{-1} = E*[F] prod_{k=0}^N (1 + r_k)^{-1}`.
pub fn price_claim(model: &CrrModel, f: &RandomVariable) -> Result<f64> {
    if !(Arc::ptr_eq(f.space(), model.space()) || **f.space() == **model.space()) {
        return Err(Error::SpaceMismatch);
    }
    Ok(f.expectation() * model.discount_from(-1))
}

/// Replicating portfolio: predictable stock and bond positions, the value
/// path `V_{-1}..V_N`, and its discounted version.
#[derive(Debug, Clone)]
pub struct HedgingStrategy {
    pub eta: ProcessRV,
    pub zeta: ProcessRV,
    /// `V_{-1}..V_N`; entry `n + 1` carries time `n`.
    pub value: Vec<RandomVariable>,
    /// `V_n prod_{k<=n} (1 + r_k)^{-1}`, same indexing.
    pub discounted_value: Vec<RandomVariable>,
    /// `zeta_{-1} = V_{-1} / A_{-1}` (all cash before trading starts).
    pub zeta_init: f64,
}

/// Builds the replicating strategy for `F`:
/// `eta_n = E*[D_n F | F_{n-1}] prod_{k>n}(1+r_k)^{-1}
///          / (S_{n-1} sqrt(p_n q_n) (b_n - a_n))`,
/// and `zeta_n` by the self-financing recursion
/// `zeta_{n+1} = zeta_n - (eta_{n+1} - eta_n) S_n / A_n` from the all-cash
/// start `zeta_{-1} = V_{-1} / A_{-1}`, which reproduces
/// `zeta_n = (prod_{k>n}(1+r_k)^{-1} E*[F|F_n] - eta_n S_n) / A_n`.
pub fn hedge(model: &CrrModel, f: &RandomVariable) -> Result<HedgingStrategy> {
    if !(Arc::ptr_eq(f.space(), model.space()) || **f.space() == **model.space()) {
        return Err(Error::SpaceMismatch);
    }
    let space = model.space();
    let n = model.horizon;
    let mut eta_entries = Vec::with_capacity(n + 1);
    let mut zeta_entries: Vec<RandomVariable> = Vec::with_capacity(n + 1);
    let mut value = Vec::with_capacity(n + 2);

    let v_init = price_claim(model, f)?;
    let zeta_init = v_init / model.a_init;
    value.push(RandomVariable::constant(space, v_init));

    for t in 0..=n {
        let ti = t as i32;
        let disc = model.discount_from(ti);
        let s_prev = stock_price(model, ti - 1)?;
        let du = gradient(f, t)?.conditional_expectation(ti - 1)?;
        let coeff = space.sqrt_pq(t) * (model.b[t] - model.a[t]);
        let eta_t = du.zip_with(&s_prev, |d, s| disc * d / (s * coeff))?;
        let a_prev = model.bond_price(ti - 1)?;
        let eta_step = match eta_entries.last() {
            Some(prev) => eta_t.sub(prev)?,
            None => eta_t.clone(),
        };
        let rebalance = eta_step.mul(&s_prev)?.scale(1.0 / a_prev);
        let zeta_t = match zeta_entries.last() {
            Some(prev) => prev.sub(&rebalance)?,
            None => rebalance.scale(-1.0).shift(zeta_init),
        };
        value.push(f.conditional_expectation(ti)?.scale(disc));
        eta_entries.push(eta_t);
        zeta_entries.push(zeta_t);
    }
    let discounted = value
        .iter()
        .enumerate()
        .map(|(i, v)| v.scale(model.discount_to(i as i32 - 1)))
        .collect();
    let eta = ProcessRV::new(space, eta_entries, Measurability::Predictable)?;
    let zeta = ProcessRV::new(space, zeta_entries, Measurability::Predictable)?;
    Ok(HedgingStrategy {
        eta,
        zeta,
        value,
        discounted_value: discounted,
        zeta_init: v_init / model.a_init,
    })
}

impl HedgingStrategy {
    /// Largest self-financing residual
    /// `|A_n (zeta_{n+1} - zeta_n) + S_n (eta_{n+1} - eta_n)|` over all
    /// rebalancing times and outcomes.
    pub fn self_financing_residual(&self, model: &CrrModel) -> Result<f64> {
        let mut worst = 0.0f64;
        for t in 0..model.horizon() {
            let a_t = model.bond_price(t as i32)?;
            let s_t = stock_price(model, t as i32)?;
            let dz = self.zeta.entry(t + 1).sub(self.zeta.entry(t))?;
            let de = self.eta.entry(t + 1).sub(self.eta.entry(t))?;
            let res = dz.scale(a_t).add(&de.mul(&s_t)?)?;
            worst = worst.max(res.norm_inf());
        }
        // initial rebalance out of the all-cash position
        let a_init = model.bond_price(-1)?;
        let dz = self.zeta.entry(0).shift(-self.zeta_init);
        let de = self.eta.entry(0).clone();
        let res = dz.scale(a_init).add(&de.scale(model.initial_stock()))?;
        worst = worst.max(res.norm_inf());
        Ok(worst)
    }

    /// Largest residual of `V_n = zeta_n A_n + eta_n S_n`.
    pub fn value_consistency_residual(&self, model: &CrrModel) -> Result<f64> {
        let mut worst = 0.0f64;
        for t in 0..=model.horizon() {
            let a_t = model.bond_price(t as i32)?;
            let s_t = stock_price(model, t as i32)?;
            let lhs = self
                .zeta
                .entry(t)
                .scale(a_t)
                .add(&self.eta.entry(t).mul(&s_t)?)?;
            worst = worst.max(lhs.sub(&self.value[t + 1])?.norm_inf());
        }
        Ok(worst)
    }
}

/// Max residual of the pathwise decomposition of a function of a
/// martingale: for every `n`,
/// `f(M_n, n) = f(M_{-1}, -1) + sum_{k<=n} D_k f(M_k, k) Y_k
///              + sum_{k<=n} E[f(M_k,k) - f(M_{k-1},k-1) | F_{k-1}]`.
/// `m` holds `M_{-1}..M_N`; `f` maps `(value, time)` to a real and must be
/// finite on every reachable node.
pub fn change_of_variable_check(
    m: &[RandomVariable],
    f: impl Fn(f64, i32) -> f64,
) -> Result<f64> {
    // validates the martingale property as a side effect
    let _ = martingale_representation(m)?;
    let space = Arc::clone(m[0].space());
    let horizon = space.horizon();
    let eval = |rv: &RandomVariable, t: i32| -> Result<RandomVariable> {
        let mut out = Vec::with_capacity(space.dim());
        for &v in rv.values() {
            let y = f(v, t);
            if !y.is_finite() {
                return Err(Error::UndefinedFunctionValue(v, t));
            }
            out.push(y);
        }
        RandomVariable::from_values(&space, out)
    };
    let fm: Vec<RandomVariable> = (0..m.len())
        .map(|i| eval(&m[i], i as i32 - 1))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    let mut acc = fm[0].clone();
    for k in 0..=horizon {
        let ki = k as i32;
        let yk = crate::space::y_rv(&space, k)?;
        let dk = gradient(&fm[k + 1], k)?;
        let drift = fm[k + 1]
            .sub(&fm[k])?
            .conditional_expectation(ki - 1)?;
        acc = acc.add(&dk.mul(&yk)?)?.add(&drift)?;
        let scale = fm[k + 1].norm_inf().max(1.0);
        let res = acc.sub(&fm[k + 1])?.norm_inf() / scale;
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Payoff shapes supported by the builder.
#[derive(Debug, Clone)]
pub enum PayoffKind {
    Call,
    Put,
    Custom(Vec<f64>),
}

/// `(S_N - K)^+`, `(K - S_N)^+`, or a caller-provided value table.
pub fn payoff_builder(
    model: &CrrModel,
    kind: &PayoffKind,
    strike: f64,
) -> Result<RandomVariable> {
    match kind {
        PayoffKind::Custom(values) => RandomVariable::from_values(model.space(), values.clone()),
        PayoffKind::Call | PayoffKind::Put => {
            if !(strike >= 0.0) {
                return Err(Error::InvalidStrike(strike));
            }
            let s_n = stock_price(model, model.horizon() as i32)?;
            Ok(match kind {
                PayoffKind::Call => s_n.map(|s| (s - strike).max(0.0)),
                _ => s_n.map(|s| (strike - s).max(0.0)),
            })
        }
    }
}
