//! Monte-Carlo studies comparing the pairwise-likelihood variogram computed
//! from categories with the classical variogram computed on the hidden
//! Gaussian values.
//!
//! Every random quantity is seeded from the master seed through
//! [`derive_seed`], and simulations are reduced in index order, so a study
//! gives bit-identical summaries for any thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::{simulate_varying_thresholds, thresholds_from_proportions, truncate, CodingFunction, ProportionSpec};
use crate::error::{Error, Result};
use crate::lags::{build_pair_groups, LagSpec, PairGroups};
use crate::pairwise::empirical_underlying_variogram;
use crate::random_fields::{derive_seed, CovarianceModel, GrfRealization, GrfSimulator};
use crate::sites::SiteSet;
use crate::variography::{empirical_variogram_continuous, Track};

const SITES_STREAM: u64 = 0;
const CODING_STREAM: u64 = 1;
const SIMS_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    MonoC1Constant,
    MonoC1Varying,
    MonoC2Constant,
    MonoC2Varying,
    Bigaussian,
}

impl StudyKind {
    pub const ALL: [StudyKind; 5] = [
        StudyKind::MonoC1Constant,
        StudyKind::MonoC1Varying,
        StudyKind::MonoC2Constant,
        StudyKind::MonoC2Varying,
        StudyKind::Bigaussian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::MonoC1Constant => "mono-c1-constant",
            StudyKind::MonoC1Varying => "mono-c1-varying",
            StudyKind::MonoC2Constant => "mono-c2-constant",
            StudyKind::MonoC2Varying => "mono-c2-varying",
            StudyKind::Bigaussian => "bigaussian",
        }
    }

    pub fn is_mono(self) -> bool {
        self != StudyKind::Bigaussian
    }

    /// Covariance models of the hidden fields.
    pub fn models(self) -> Vec<CovarianceModel> {
        match self {
            StudyKind::MonoC1Constant | StudyKind::MonoC1Varying => vec![CovarianceModel::c1()],
            StudyKind::MonoC2Constant | StudyKind::MonoC2Varying => vec![CovarianceModel::c2()],
            StudyKind::Bigaussian => vec![CovarianceModel::c1(), CovarianceModel::c2()],
        }
    }

    fn varying(self) -> bool {
        matches!(self, StudyKind::MonoC1Varying | StudyKind::MonoC2Varying)
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StudyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = StudyKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::config("kind", format!("unknown study kind `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SiteLayout {
    /// `n` nodes with spacing `mesh` on a line.
    Grid1d { n: usize, mesh: f64 },
    /// `n` uniform sites on `[0, side]²`, drawn once per study.
    UniformSquare { n: usize, side: f64 },
}

impl SiteLayout {
    pub fn build(&self, seed: u64) -> Result<SiteSet> {
        match *self {
            SiteLayout::Grid1d { n, mesh } => SiteSet::regular_grid_1d(n, mesh),
            SiteLayout::UniformSquare { n, side } => SiteSet::uniform_square(n, side, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub n_sims: usize,
    pub layout: SiteLayout,
    pub lags: LagSpec,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Range of the smooth fields that drive varying thresholds.
    #[serde(default = "default_smoothness")]
    pub smoothness_range: f64,
}

fn default_smoothness() -> f64 {
    200.0
}

impl StudyConfig {
    /// Default scaled setup: 200 simulations; monogaussian studies on a
    /// 2000-node unit-mesh grid with lags 1..150, the bigaussian study on
    /// 800 uniform sites in a square of side 200 with 30 lags of width 5.
    ///
    /// The square is sized so that lags up to 150 and ranges 20 and 40 are
    /// meaningful; a unit square would put every distance below 1.5.
    pub fn new(kind: StudyKind) -> Self {
        let (layout, lags) = if kind.is_mono() {
            (
                SiteLayout::Grid1d { n: 2000, mesh: 1.0 },
                LagSpec::regular(150, 1.0, None),
            )
        } else {
            (
                SiteLayout::UniformSquare { n: 800, side: 200.0 },
                LagSpec::regular(30, 5.0, None),
            )
        };
        StudyConfig {
            kind,
            n_sims: 200,
            layout,
            lags: lags.expect("default lags are valid"),
            seed: 0,
            threads: None,
            smoothness_range: default_smoothness(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sims == 0 {
            return Err(Error::config("n_sims", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        match (self.kind.is_mono(), &self.layout) {
            (true, SiteLayout::Grid1d { .. }) | (false, SiteLayout::UniformSquare { .. }) => Ok(()),
            _ => Err(Error::config(
                "layout",
                format!("{} studies use a {} layout", self.kind, if self.kind.is_mono() { "grid_1d" } else { "uniform_square" }),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Pairwise likelihood on the categories.
    Pl,
    /// Classical estimator on the Gaussian values.
    Gauss,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Pl => "pl",
            Estimator::Gauss => "gauss",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Distribution of one estimator at one lag across simulations. Statistics
/// are NaN when every simulation is missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub lag: f64,
    /// 0-based field index.
    pub grf: usize,
    pub estimator: Estimator,
    pub mean: f64,
    pub p5: f64,
    pub p25: f64,
    pub p75: f64,
    pub p95: f64,
    /// `1 − C(h)`.
    pub truth: f64,
    pub n_missing: usize,
    /// Pairs used per simulation, averaged over the non-missing ones.
    pub mean_pairs: f64,
    /// Site pairs in the lag class before any masking.
    pub site_pairs: usize,
}

impl SummaryRow {
    pub fn band_5_95(&self) -> f64 {
        self.p95 - self.p5
    }

    pub fn band_25_75(&self) -> f64 {
        self.p75 - self.p25
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySummary {
    pub kind: StudyKind,
    pub n_sims: usize,
    /// Ordered by field, then estimator, then lag.
    pub rows: Vec<SummaryRow>,
}

impl StudySummary {
    pub fn track(&self, grf: usize, estimator: Estimator) -> Vec<&SummaryRow> {
        self.rows
            .iter()
            .filter(|r| r.grf == grf && r.estimator == estimator)
            .collect()
    }
}

/// One simulation's estimates, `[field][lag]`.
#[derive(Debug, Clone, Default)]
struct SimRecord {
    pl: Vec<Vec<Option<(f64, usize)>>>,
    gauss: Vec<Vec<Option<(f64, usize)>>>,
}

/// Nearest-rank percentile of sorted data.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (p / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudySummary> {
    if cfg.kind.is_mono() {
        run_mono_study(cfg)
    } else {
        run_bigaussian_study(cfg)
    }
}

/// One hidden field on a grid, truncated into three categories with a
/// constant (1/3 each) or varying rule fixed for the whole study.
pub fn run_mono_study(cfg: &StudyConfig) -> Result<StudySummary> {
    cfg.validate()?;
    if !cfg.kind.is_mono() {
        return Err(Error::config("kind", format!("{} is not a monogaussian study", cfg.kind)));
    }
    let sites = cfg.layout.build(derive_seed(cfg.seed, SITES_STREAM))?;
    let coding = if cfg.kind.varying() {
        simulate_varying_thresholds(&sites, derive_seed(cfg.seed, CODING_STREAM), cfg.smoothness_range)?
    } else {
        thresholds_from_proportions(&ProportionSpec::Constant(vec![1.0 / 3.0; 3]))?
    };
    run(cfg, &sites, &coding, |_, _| None)
}

/// Two independent fields (C1, C2) on uniform sites drawn once, truncated
/// with the flag rule `s_1 = t_1 = 0`. The classical track of the second
/// field only uses sites where the first field is positive.
pub fn run_bigaussian_study(cfg: &StudyConfig) -> Result<StudySummary> {
    cfg.validate()?;
    if cfg.kind != StudyKind::Bigaussian {
        return Err(Error::config("kind", format!("{} is not a bigaussian study", cfg.kind)));
    }
    let sites = cfg.layout.build(derive_seed(cfg.seed, SITES_STREAM))?;
    let coding = CodingFunction::flag2(0.0, 0.0)?;
    run(cfg, &sites, &coding, |r, y| {
        (r == 1).then(|| (0..y.n_sites()).map(|i| y.value(i, 0) > 0.0).collect())
    })
}

/// Seed of simulation `s`; `simulate_independent_grfs(sites, models, seed)`
/// reproduces its hidden fields.
pub fn simulation_seed(master: u64, s: usize) -> u64 {
    derive_seed(derive_seed(master, SIMS_STREAM), s as u64)
}

fn run<M>(cfg: &StudyConfig, sites: &SiteSet, coding: &CodingFunction, mask: M) -> Result<StudySummary>
where
    M: Fn(usize, &GrfRealization) -> Option<Vec<bool>> + Sync,
{
    let models = cfg.kind.models();
    let groups = build_pair_groups(sites, &cfg.lags)?;
    let simulators = models
        .iter()
        .map(|m| GrfSimulator::new(sites, m))
        .collect::<Result<Vec<_>>>()?;

    let one = |s: usize| -> Result<SimRecord> {
        let seed = simulation_seed(cfg.seed, s);
        let columns: Vec<Vec<f64>> = simulators
            .iter()
            .enumerate()
            .map(|(r, sim)| sim.sample(derive_seed(seed, r as u64)))
            .collect();
        let y = GrfRealization::from_columns(&columns)?;
        let f = truncate(&y, coding)?;
        let pl = empirical_underlying_variogram(&f, coding, &groups)?;
        let mut rec = SimRecord::default();
        for (r, values) in columns.iter().enumerate() {
            rec.pl.push(pl.track(r).lags.iter().map(|l| l.estimate.map(|e| (e, l.n_pairs))).collect());
            let m = mask(r, &y);
            let g = empirical_variogram_continuous(values, m.as_deref(), &groups, Track::Gauss(r))?;
            rec.gauss.push(g.lags.iter().map(|l| l.estimate.map(|e| (e, l.n_pairs))).collect());
        }
        Ok(rec)
    };
    let sims = |n: usize| (0..n).into_par_iter().map(one).collect::<Result<Vec<_>>>();
    let records = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(|| sims(cfg.n_sims))?,
        None => sims(cfg.n_sims)?,
    };
    Ok(summarize(cfg, &models, &groups, &records))
}

fn summarize(cfg: &StudyConfig, models: &[CovarianceModel], groups: &PairGroups, records: &[SimRecord]) -> StudySummary {
    let mut rows = Vec::new();
    for (r, model) in models.iter().enumerate() {
        for estimator in [Estimator::Pl, Estimator::Gauss] {
            for (a, g) in groups.groups().iter().enumerate() {
                let cells: Vec<(f64, usize)> = records
                    .iter()
                    .filter_map(|rec| match estimator {
                        Estimator::Pl => rec.pl[r][a],
                        Estimator::Gauss => rec.gauss[r][a],
                    })
                    .collect();
                let mut values: Vec<f64> = cells.iter().map(|c| c.0).collect();
                values.sort_by(f64::total_cmp);
                let n = values.len() as f64;
                let mean = if values.is_empty() { f64::NAN } else { cells.iter().map(|c| c.0).sum::<f64>() / n };
                let mean_pairs = if values.is_empty() { 0.0 } else { cells.iter().map(|c| c.1 as f64).sum::<f64>() / n };
                rows.push(SummaryRow {
                    lag: g.lag,
                    grf: r,
                    estimator,
                    mean,
                    p5: nearest_rank(&values, 5.0),
                    p25: nearest_rank(&values, 25.0),
                    p75: nearest_rank(&values, 75.0),
                    p95: nearest_rank(&values, 95.0),
                    truth: 1.0 - model.correlation_unchecked(g.lag),
                    n_missing: records.len() - values.len(),
                    mean_pairs,
                    site_pairs: g.n_pairs(),
                });
            }
        }
    }
    StudySummary {
        kind: cfg.kind,
        n_sims: cfg.n_sims,
        rows,
    }
}
