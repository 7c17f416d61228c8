//! Classical empirical variograms: simple and cross variograms of category
//! indicators, and the Matheron estimator for continuous values.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lags::PairGroups;
use crate::sites::CategoricalField;

/// What a variogram track describes. Indices are 0-based; labels are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Track {
    Indicator(usize, usize),
    /// Pairwise-likelihood estimate for a hidden field.
    Grf(usize),
    /// Classical estimate computed on Gaussian values.
    Gauss(usize),
    ModelIndicator(usize, usize),
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Track::Indicator(k, l) => write!(f, "ind_{}_{}", k + 1, l + 1),
            Track::Grf(r) => write!(f, "grf_{}", r + 1),
            Track::Gauss(r) => write!(f, "gauss_{}", r + 1),
            Track::ModelIndicator(k, l) => write!(f, "model_ind_{}_{}", k + 1, l + 1),
        }
    }
}

impl FromStr for Track {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("track", format!("unrecognized track label `{s}`"));
        let index = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(bad()),
            }
        };
        let pair = |rest: &str| -> Result<(usize, usize)> {
            let (a, b) = rest.split_once('_').ok_or_else(bad)?;
            Ok((index(a)?, index(b)?))
        };
        if let Some(rest) = s.strip_prefix("model_ind_") {
            let (k, l) = pair(rest)?;
            Ok(Track::ModelIndicator(k, l))
        } else if let Some(rest) = s.strip_prefix("ind_") {
            let (k, l) = pair(rest)?;
            Ok(Track::Indicator(k, l))
        } else if let Some(rest) = s.strip_prefix("grf_") {
            Ok(Track::Grf(index(rest)?))
        } else if let Some(rest) = s.strip_prefix("gauss_") {
            Ok(Track::Gauss(index(rest)?))
        } else {
            Err(bad())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagEstimate {
    pub lag: f64,
    /// `None` when the lag has no usable pairs.
    pub estimate: Option<f64>,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalVariogram {
    pub track: Track,
    pub lags: Vec<LagEstimate>,
}

impl EmpiricalVariogram {
    pub fn estimates(&self) -> Vec<Option<f64>> {
        self.lags.iter().map(|l| l.estimate).collect()
    }

    pub fn n_present(&self) -> usize {
        self.lags.iter().filter(|l| l.estimate.is_some()).count()
    }
}

/// `K × K` variogram tracks, row-major in `(k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorVariograms {
    n_categories: usize,
    tracks: Vec<EmpiricalVariogram>,
}

impl IndicatorVariograms {
    pub(crate) fn from_tracks(n_categories: usize, tracks: Vec<EmpiricalVariogram>) -> Self {
        debug_assert_eq!(tracks.len(), n_categories * n_categories);
        IndicatorVariograms { n_categories, tracks }
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn get(&self, k: usize, l: usize) -> &EmpiricalVariogram {
        &self.tracks[k * self.n_categories + l]
    }

    pub fn tracks(&self) -> &[EmpiricalVariogram] {
        &self.tracks
    }

    pub fn into_tracks(self) -> Vec<EmpiricalVariogram> {
        self.tracks
    }
}

/// `γ̂_kl(h) = 1/(2N(h)) Σ (1_k(x_j) − 1_k(x_i)) (1_l(x_j) − 1_l(x_i))`.
pub fn empirical_indicator_variograms(f: &CategoricalField, groups: &PairGroups) -> Result<IndicatorVariograms> {
    let k = f.n_categories();
    check_pairs(f.len(), groups)?;
    let mut per_lag = Vec::with_capacity(groups.len());
    for g in groups.groups() {
        let mut sums = vec![0i64; k * k];
        for &(i, j) in &g.pairs {
            let (a, b) = (f.category(i as usize), f.category(j as usize));
            if a != b {
                sums[a * k + a] += 1;
                sums[b * k + b] += 1;
                sums[a * k + b] -= 1;
                sums[b * k + a] -= 1;
            }
        }
        per_lag.push((g.lag, g.n_pairs(), sums));
    }
    let tracks = (0..k * k)
        .map(|c| EmpiricalVariogram {
            track: Track::Indicator(c / k, c % k),
            lags: per_lag
                .iter()
                .map(|(lag, n, sums)| LagEstimate {
                    lag: *lag,
                    estimate: (*n > 0).then(|| sums[c] as f64 / (2.0 * *n as f64)),
                    n_pairs: *n,
                })
                .collect(),
        })
        .collect();
    Ok(IndicatorVariograms::from_tracks(k, tracks))
}

/// Matheron estimator over pairs whose two sites are both kept by `mask`
/// (`true` keeps a site). Pair counts are those remaining after masking.
pub fn empirical_variogram_continuous(
    values: &[f64],
    mask: Option<&[bool]>,
    groups: &PairGroups,
    track: Track,
) -> Result<EmpiricalVariogram> {
    check_pairs(values.len(), groups)?;
    if let Some(m) = mask {
        if m.len() != values.len() {
            return Err(Error::config(
                "mask",
                format!("has {} entries for {} sites", m.len(), values.len()),
            ));
        }
    }
    let keep = |i: usize| mask.map_or(true, |m| m[i]);
    let lags = groups
        .groups()
        .iter()
        .map(|g| {
            let (mut sum, mut n) = (0.0, 0usize);
            for &(i, j) in &g.pairs {
                let (i, j) = (i as usize, j as usize);
                if keep(i) && keep(j) {
                    let d = values[j] - values[i];
                    sum += d * d;
                    n += 1;
                }
            }
            LagEstimate {
                lag: g.lag,
                estimate: (n > 0).then(|| sum / (2.0 * n as f64)),
                n_pairs: n,
            }
        })
        .collect();
    Ok(EmpiricalVariogram { track, lags })
}

fn check_pairs(n_sites: usize, groups: &PairGroups) -> Result<()> {
    let max = groups
        .groups()
        .iter()
        .flat_map(|g| g.pairs.iter().map(|p| p.1 as usize))
        .max();
    match max {
        Some(m) if m >= n_sites => Err(Error::config(
            "pairs",
            format!("pair references site {m} but only {n_sites} sites are given"),
        )),
        _ => Ok(()),
    }
}
