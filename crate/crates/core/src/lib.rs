//! Stochastic analysis on finite Bernoulli product spaces: discrete
//! chaos expansions, finite-difference Malliavin operators, predictable
//! representation, functional inequalities, and binomial-market hedging.

pub mod chaos;
pub mod error;
pub mod finance;
pub mod identities;
pub mod inequalities;
pub mod malliavin;
pub mod space;

pub use error::{Error, Result};
pub use space::{
    integral, integral_partial, new_space, s_rv, x_rv, y_rv, BernoulliSpace, Measurability,
    OutcomeIndex, ProcessRV, RandomVariable, SpaceSpec, MAX_HORIZON, PROBABILITY_GUARD,
};
