//! Grouping of site pairs into lag classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sites::SiteSet;

#[derive(Debug, Clone, PartialEq)]
pub enum LagMode {
    Omnidirectional,
    /// Keep pairs whose separation vector is within `angular_tolerance`
    /// radians of `±direction`.
    Directional {
        direction: Vec<f64>,
        angular_tolerance: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LagSpecJson", into = "LagSpecJson")]
pub struct LagSpec {
    mode: LagMode,
    centers: Vec<f64>,
    tolerance: f64,
}

impl LagSpec {
    /// Lag classes centred on `centers` (strictly increasing distances).
    /// Without an explicit tolerance, half the smallest spacing between
    /// consecutive centres is used.
    pub fn new(mode: LagMode, centers: Vec<f64>, tolerance: Option<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::config("centers", "at least one lag is required"));
        }
        if centers.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::config("centers", "lags must be finite and non-negative"));
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("centers", "lags must be strictly increasing"));
        }
        let min_gap = centers
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let tolerance = match tolerance {
            Some(t) => t,
            None if min_gap.is_finite() => min_gap / 2.0,
            None => {
                return Err(Error::config(
                    "tolerance",
                    "required when only one lag is given",
                ))
            }
        };
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        if 2.0 * tolerance > min_gap * (1.0 + 1e-12) {
            return Err(Error::config(
                "tolerance",
                format!("lag windows overlap: tolerance {tolerance} exceeds half the spacing {min_gap}"),
            ));
        }
        if let LagMode::Directional {
            direction,
            angular_tolerance,
        } = &mode
        {
            if direction.is_empty() || direction.iter().all(|v| *v == 0.0) || direction.iter().any(|v| !v.is_finite()) {
                return Err(Error::config("direction", "must be a finite non-zero vector"));
            }
            if !(*angular_tolerance > 0.0 && *angular_tolerance <= std::f64::consts::FRAC_PI_2) {
                return Err(Error::config("angular_tolerance", "must lie in (0, 90] degrees"));
            }
        }
        Ok(LagSpec {
            mode,
            centers,
            tolerance,
        })
    }

    /// Lags `w, 2w, …, n·w` with tolerance `w / 2` unless given.
    pub fn regular(n_lags: usize, lag_width: f64, tolerance: Option<f64>) -> Result<Self> {
        if n_lags == 0 {
            return Err(Error::config("n_lags", "must be at least 1"));
        }
        if !(lag_width > 0.0 && lag_width.is_finite()) {
            return Err(Error::config("lag_width", "must be positive"));
        }
        let centers = (1..=n_lags).map(|i| i as f64 * lag_width).collect();
        Self::new(
            LagMode::Omnidirectional,
            centers,
            Some(tolerance.unwrap_or(lag_width / 2.0)),
        )
    }

    pub fn with_mode(self, mode: LagMode) -> Result<Self> {
        Self::new(mode, self.centers, Some(self.tolerance))
    }

    pub fn mode(&self) -> &LagMode {
        &self.mode
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Index of the lag class a separation distance falls in, if any.
    pub fn classify(&self, distance: f64) -> Option<usize> {
        let c = &self.centers;
        let idx = c.partition_point(|&x| x < distance);
        let nearest = match (idx.checked_sub(1), (idx < c.len()).then_some(idx)) {
            (Some(lo), Some(hi)) => {
                if distance - c[lo] <= c[hi] - distance {
                    lo
                } else {
                    hi
                }
            }
            (Some(lo), None) => lo,
            (None, Some(hi)) => hi,
            (None, None) => return None,
        };
        ((distance - c[nearest]).abs() <= self.tolerance).then_some(nearest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModeName {
    Omnidirectional,
    Directional,
}

/// Serialized form. Lags are given either as explicit `centers` or as
/// `n_lags` and `lag_width`; `angular_tolerance` is in degrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LagSpecJson {
    #[serde(default = "omni")]
    mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_lags: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lag_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    direction: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angular_tolerance: Option<f64>,
}

fn omni() -> ModeName {
    ModeName::Omnidirectional
}

impl TryFrom<LagSpecJson> for LagSpec {
    type Error = Error;

    fn try_from(j: LagSpecJson) -> Result<Self> {
        let centers = match (j.centers, j.n_lags, j.lag_width) {
            (Some(c), None, None) => c,
            (None, Some(n), Some(w)) => LagSpec::regular(n, w, j.tolerance)?.centers,
            _ => {
                return Err(Error::config(
                    "centers",
                    "give either `centers` or both `n_lags` and `lag_width`",
                ))
            }
        };
        let mode = match j.mode {
            ModeName::Omnidirectional => {
                if j.direction.is_some() || j.angular_tolerance.is_some() {
                    return Err(Error::config("mode", "direction settings need mode `directional`"));
                }
                LagMode::Omnidirectional
            }
            ModeName::Directional => LagMode::Directional {
                direction: j
                    .direction
                    .ok_or_else(|| Error::config("direction", "required for directional lags"))?,
                angular_tolerance: j
                    .angular_tolerance
                    .ok_or_else(|| Error::config("angular_tolerance", "required for directional lags"))?
                    .to_radians(),
            },
        };
        LagSpec::new(mode, centers, j.tolerance)
    }
}

impl From<LagSpec> for LagSpecJson {
    fn from(s: LagSpec) -> Self {
        let (mode, direction, angular_tolerance) = match s.mode {
            LagMode::Omnidirectional => (ModeName::Omnidirectional, None, None),
            LagMode::Directional {
                direction,
                angular_tolerance,
            } => (ModeName::Directional, Some(direction), Some(angular_tolerance.to_degrees())),
        };
        LagSpecJson {
            mode,
            centers: Some(s.centers),
            n_lags: None,
            lag_width: None,
            tolerance: Some(s.tolerance),
            direction,
            angular_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagGroup {
    pub lag: f64,
    /// Site index pairs `(i, j)` with `i < j`.
    pub pairs: Vec<(u32, u32)>,
}

impl LagGroup {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }
}

/// Site pairs grouped by lag class, one group per lag centre.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGroups {
    groups: Vec<LagGroup>,
}

impl PairGroups {
    pub fn groups(&self) -> &[LagGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn lags(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.lag).collect()
    }

    pub fn total_pairs(&self) -> usize {
        self.groups.iter().map(LagGroup::n_pairs).sum()
    }
}

/// Assigns every site pair to the lag class of nearest centre when within
/// tolerance; other pairs are dropped.
pub fn build_pair_groups(sites: &SiteSet, spec: &LagSpec) -> Result<PairGroups> {
    let n = sites.len();
    if n > u32::MAX as usize {
        return Err(Error::config("sites", "too many sites"));
    }
    let direction = match &spec.mode {
        LagMode::Omnidirectional => None,
        LagMode::Directional {
            direction,
            angular_tolerance,
        } => {
            if direction.len() != sites.dim() {
                return Err(Error::config(
                    "direction",
                    format!("has {} components but sites are {}-dimensional", direction.len(), sites.dim()),
                ));
            }
            let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            let unit: Vec<f64> = direction.iter().map(|v| v / norm).collect();
            Some((unit, angular_tolerance.cos()))
        }
    };

    let mut groups: Vec<LagGroup> = spec
        .centers
        .iter()
        .map(|&lag| LagGroup { lag, pairs: Vec::new() })
        .collect();
    for i in 0..n {
        let xi = sites.point(i);
        for j in i + 1..n {
            let xj = sites.point(j);
            let d = sites.distance(i, j);
            if let Some((unit, cos_tol)) = &direction {
                if d == 0.0 {
                    continue;
                }
                let dot: f64 = xi.iter().zip(xj).zip(unit).map(|((a, b), u)| (b - a) * u).sum();
                if dot.abs() / d < *cos_tol {
                    continue;
                }
            }
            if let Some(alpha) = spec.classify(d) {
                groups[alpha].pairs.push((i as u32, j as u32));
            }
        }
    }
    Ok(PairGroups { groups })
}
