//! Plurigaussian categorical fields: simulation by truncation of independent
//! Gaussian random fields, indicator variography, and per-lag
//! pairwise-likelihood estimation of the hidden fields' variograms.

pub mod coding;
pub mod error;
pub mod fitting;
pub mod forward;
pub mod gaussian;
pub mod golden;
pub mod io;
pub mod lags;
pub mod pairwise;
pub mod random_fields;
pub mod sites;
pub mod study;
pub mod variography;

pub use coding::{CodingFunction, ProportionSpec};
pub use error::{Error, Result};
pub use fitting::{fit_unit_sill_model, FittedModel};
pub use forward::averaged_indicator_variogram;
pub use gaussian::{BivariateNormal, Correlation, Interval};
pub use lags::{build_pair_groups, LagMode, LagSpec, PairGroups};
pub use pairwise::{empirical_underlying_variogram, PLLagResult, UnderlyingVariogram};
pub use random_fields::{CovarianceKind, CovarianceModel, GrfRealization};
pub use sites::{CategoricalField, SiteSet};
pub use study::{run_study, StudyConfig, StudyKind, StudySummary};
pub use variography::{empirical_indicator_variograms, EmpiricalVariogram, Track};
