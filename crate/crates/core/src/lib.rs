//! Ordinal risk-group classification.
//!
//! A linear score `beta^T x` is cut at breakpoints into `T` ordered groups,
//! each with a target event rate. The crate computes the actual interval
//! risks of a partition under a Gaussian model of the score, finds the
//! breakpoints that best match the targets, and fits coefficients that keep
//! the logistic-regression likelihood high while making the targets
//! attainable.

pub mod cli;
pub mod data;
pub mod empirical;
pub mod error;
pub mod logistic;
pub mod org;
pub mod risk;
pub mod special;

pub use data::{
    estimate_gaussian, estimate_gaussian_with, project, Breakpoints, CovarianceEstimator, Dataset, GaussianEstimates,
    Norm, ProjectedGaussian, RiskSpec,
};
pub use error::{BoundSide, Error, InfeasibleStep, Result};
pub use special::ToleranceConfig;
