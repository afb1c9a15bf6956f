//! Responder classification from randomized experiments.
//!
//! Given features `x`, a ±1 treatment `t` with known assignment probability,
//! and a ±1 outcome `y`, the goal is to predict whether a unit is a
//! *responder*: someone whose outcome is +1 exactly when treated. Under the
//! monotonicity assumption `Y(+1) ≥ Y(-1)` this label is identifiable even
//! though it is never observed.
//!
//! The crate provides
//!
//! * [`data`]: observations, propensities, and synthetic ground truth;
//! * [`surrogate`]: the weighted corrupted-label transform and the `1/Q`
//!   pseudo-population;
//! * [`losses`]: hinge, logistic, generative likelihood, and weighted
//!   cross-entropy losses;
//! * [`learners`]: RespSVM, RespLR/RespNet (discriminative and generative),
//!   and a T-learner plug-in baseline, with cross-validation;
//! * [`synthetic`]: the linear and spherical benchmark scenarios;
//! * [`evaluation`]: unbiased loss and policy-value estimates, replicated
//!   benchmarks, and Studentized bootstrap intervals.

pub mod data;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod learners;
pub mod losses;
pub mod rng;
pub mod surrogate;
pub mod synthetic;

pub use data::{Dataset, GroundTruthUnit, Observation, Propensity, Sign, Theta};
pub use error::{Error, ErrorKind, Result};
pub use surrogate::{ThetaMode, WeightedExamples};
