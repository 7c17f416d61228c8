//! Weighted least-squares fit of a unit-sill covariance model to an
//! empirical variogram of a standardized field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::golden::GoldenSearch;
use crate::random_fields::{CovarianceKind, CovarianceModel};
use crate::variography::EmpiricalVariogram;

const MIN_LAGS: usize = 3;
/// Distance in log-range below which a fit counts as sitting on a bound.
const BOUND_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: CovarianceKind,
    pub range: f64,
    pub sill: f64,
    /// Weighted residual sum of squares at `range`.
    pub objective: f64,
    /// Set when the range hit the lower end of the search window, which
    /// signals no detectable spatial structure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub at_lower_bound: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub at_upper_bound: bool,
}

impl FittedModel {
    pub fn model(&self) -> Result<CovarianceModel> {
        CovarianceModel::new(self.kind, self.range, self.sill)
    }
}

/// Observations used by the fit: `(h, γ̂, weight)` with weight `N(h) / h`.
fn observations(v: &EmpiricalVariogram) -> Vec<(f64, f64, f64)> {
    v.lags
        .iter()
        .filter(|l| l.lag > 0.0 && l.n_pairs > 0)
        .filter_map(|l| l.estimate.map(|e| (l.lag, e, l.n_pairs as f64 / l.lag)))
        .collect()
}

/// `Σ w (γ̂(h) − 1 + C_range(h))²`.
pub fn weighted_objective(v: &EmpiricalVariogram, kind: CovarianceKind, range: f64) -> Result<f64> {
    let model = CovarianceModel::unit(kind, range)?;
    Ok(sum_squares(&observations(v), &model))
}

fn sum_squares(obs: &[(f64, f64, f64)], model: &CovarianceModel) -> f64 {
    obs.iter()
        .map(|&(h, g, w)| {
            let r = g - (1.0 - model.correlation_unchecked(h));
            w * r * r
        })
        .sum()
}

/// Range of a unit-sill model of `kind` fitted over `[h_1 / 10, 10 h_n]`,
/// where `h_1` and `h_n` are the smallest and largest usable lags.
pub fn fit_unit_sill_model(v: &EmpiricalVariogram, kind: CovarianceKind) -> Result<FittedModel> {
    let obs = observations(v);
    if obs.len() < MIN_LAGS {
        return Err(Error::InsufficientData {
            needed: MIN_LAGS,
            got: obs.len(),
        });
    }
    let h_min = obs.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
    let h_max = obs.iter().map(|o| o.0).fold(0.0, f64::max);
    let (lo, hi) = ((h_min / 10.0).ln(), (10.0 * h_max).ln());
    // The search runs on log-range: scan densely, then refine.
    let search = GoldenSearch {
        grid_points: 201,
        tolerance: 1e-9,
        max_iterations: 100,
    };
    let opt = search.minimize(lo, hi, |t| {
        CovarianceModel::unit(kind, t.exp()).map_or(f64::NAN, |m| sum_squares(&obs, &m))
    })?;
    Ok(FittedModel {
        kind,
        range: opt.x.exp(),
        sill: 1.0,
        objective: opt.value,
        at_lower_bound: opt.x - lo < BOUND_MARGIN,
        at_upper_bound: hi - opt.x < BOUND_MARGIN,
    })
}
