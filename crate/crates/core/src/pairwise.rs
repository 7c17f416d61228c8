//! Per-lag pairwise-likelihood estimation of the hidden fields' correlations
//! from categorical observations.
//!
//! With independent fields and a cartesian rule, the likelihood of a pair
//! factorizes over fields, so each field and each lag is a one-dimensional
//! problem in `ρ`. Pairs are collapsed into classes of identical interval
//! pairs before optimizing.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::coding::CodingFunction;
use crate::error::{Error, Result};
use crate::gaussian::{BivariateNormal, Correlation, Interval};
use crate::golden::GoldenSearch;
use crate::lags::{LagGroup, PairGroups};
use crate::sites::CategoricalField;
use crate::variography::{EmpiricalVariogram, LagEstimate, Track};

/// Estimates closer than this to a clamp are flagged.
pub const BOUNDARY_MARGIN: f64 = 1e-3;
const QUANTUM: f64 = 1e-9;

/// A pair of intervals observed `count` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPairClass {
    pub a: Interval,
    pub b: Interval,
    pub count: u64,
}

impl IntervalPairClass {
    /// Informative when the rectangle probability depends on `ρ`.
    pub fn is_informative(&self) -> bool {
        self.count > 0 && !self.a.is_whole() && !self.b.is_whole()
    }
}

/// `Σ count · log P(Y ∈ a, Y' ∈ b; ρ)`.
pub fn pl_objective(pairs: &[IntervalPairClass], rho: Correlation) -> f64 {
    let bvn = BivariateNormal::new(rho);
    pairs
        .iter()
        .map(|p| p.count as f64 * bvn.log_rect_prob(&p.a, &p.b))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagCorrelation {
    pub rho_hat: f64,
    pub logpl: f64,
    pub converged: bool,
}

/// Maximizes the pairwise log-likelihood over the admissible correlations.
///
/// Non-informative classes are ignored. The result is never worse than
/// independence (`ρ = 0`).
pub fn estimate_lag_correlation(pairs: &[IntervalPairClass], tolerance: f64) -> Result<LagCorrelation> {
    let informative: Vec<IntervalPairClass> = pairs.iter().copied().filter(|p| p.is_informative()).collect();
    if informative.is_empty() {
        return Err(Error::NoInformation { lag: f64::NAN });
    }
    let search = GoldenSearch {
        tolerance,
        ..GoldenSearch::default()
    };
    let objective = |rho: f64| pl_objective(&informative, Correlation(rho));
    let opt = search.maximize(Correlation::MIN, Correlation::MAX, objective)?;
    let at_zero = objective(0.0);
    if !at_zero.is_finite() {
        return Err(Error::Numerical(format!("objective is {at_zero} at rho = 0")));
    }
    Ok(if at_zero > opt.value {
        LagCorrelation {
            rho_hat: 0.0,
            logpl: at_zero,
            converged: opt.converged,
        }
    } else {
        LagCorrelation {
            rho_hat: opt.x,
            logpl: opt.value,
            converged: opt.converged,
        }
    })
}

/// Collapses interval pairs into classes keyed by quantized endpoints.
///
/// Each pair is stored in canonical order (the rectangle probability is
/// symmetric in its two intervals) and classes come out sorted by key, so the
/// result does not depend on input order or on category labels.
pub fn deduplicate<I>(pairs: I) -> Vec<IntervalPairClass>
where
    I: IntoIterator<Item = (Interval, Interval, u64)>,
{
    let mut classes: BTreeMap<[i64; 4], IntervalPairClass> = BTreeMap::new();
    for (a, b, count) in pairs {
        if count == 0 {
            continue;
        }
        let (ka, kb) = (key(&a), key(&b));
        let (a, b, k) = if ka <= kb { (a, b, [ka[0], ka[1], kb[0], kb[1]]) } else { (b, a, [kb[0], kb[1], ka[0], ka[1]]) };
        classes
            .entry(k)
            .and_modify(|c| c.count += count)
            .or_insert(IntervalPairClass { a, b, count });
    }
    classes.into_values().collect()
}

fn key(t: &Interval) -> [i64; 2] {
    let q = |x: f64| {
        if x == f64::NEG_INFINITY {
            i64::MIN
        } else if x == f64::INFINITY {
            i64::MAX
        } else {
            (x / QUANTUM).round() as i64
        }
    };
    [q(t.lower()), q(t.upper())]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrfLagEstimate {
    pub rho_hat: f64,
    /// `1 − ρ̂`.
    pub gamma_hat: f64,
    pub logpl: f64,
    /// Number of pairs whose likelihood factor depends on `ρ`.
    pub n_effective: u64,
    pub converged: bool,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PLLagResult {
    pub lag: f64,
    pub n_pairs: usize,
    /// One entry per field; `None` when the lag has no informative pair.
    pub grfs: Vec<Option<GrfLagEstimate>>,
}

/// Pairwise-likelihood variogram of every hidden field.
#[derive(Debug, Clone, PartialEq)]
pub struct UnderlyingVariogram {
    n_fields: usize,
    lags: Vec<PLLagResult>,
}

impl UnderlyingVariogram {
    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn lags(&self) -> &[PLLagResult] {
        &self.lags
    }

    /// Track of field `r`; pair counts are the effective counts.
    pub fn track(&self, r: usize) -> EmpiricalVariogram {
        EmpiricalVariogram {
            track: Track::Grf(r),
            lags: self
                .lags
                .iter()
                .map(|l| {
                    let e = l.grfs[r];
                    LagEstimate {
                        lag: l.lag,
                        estimate: e.map(|e| e.gamma_hat),
                        n_pairs: e.map_or(0, |e| e.n_effective as usize),
                    }
                })
                .collect(),
        }
    }

    pub fn tracks(&self) -> Vec<EmpiricalVariogram> {
        (0..self.n_fields).map(|r| self.track(r)).collect()
    }

    /// Estimated correlations per lag, `None` if any field is missing there.
    pub fn correlations(&self) -> Vec<Option<Vec<Correlation>>> {
        self.lags
            .iter()
            .map(|l| l.grfs.iter().map(|e| e.map(|e| Correlation(e.rho_hat))).collect())
            .collect()
    }
}

/// Interval-pair classes of field `r` over a lag's pairs.
pub fn lag_classes(f: &CategoricalField, coding: &CodingFunction, group: &LagGroup, r: usize) -> Vec<IntervalPairClass> {
    let kk = coding.n_categories();
    if coding.is_constant() {
        let mut counts = vec![0u64; kk * kk];
        for &(i, j) in &group.pairs {
            counts[f.category(i as usize) * kk + f.category(j as usize)] += 1;
        }
        deduplicate(
            counts
                .iter()
                .enumerate()
                .map(|(c, &n)| (coding.interval(0, c / kk, r), coding.interval(0, c % kk, r), n)),
        )
    } else {
        deduplicate(group.pairs.iter().map(|&(i, j)| {
            let (i, j) = (i as usize, j as usize);
            (coding.interval(i, f.category(i), r), coding.interval(j, f.category(j), r), 1)
        }))
    }
}

/// Per-lag, per-field estimates with the default search tolerance.
pub fn empirical_underlying_variogram(
    f: &CategoricalField,
    coding: &CodingFunction,
    groups: &PairGroups,
) -> Result<UnderlyingVariogram> {
    empirical_underlying_variogram_with(f, coding, groups, GoldenSearch::default().tolerance)
}

pub fn empirical_underlying_variogram_with(
    f: &CategoricalField,
    coding: &CodingFunction,
    groups: &PairGroups,
    tolerance: f64,
) -> Result<UnderlyingVariogram> {
    if f.n_categories() != coding.n_categories() {
        return Err(Error::config(
            "K",
            format!("data has {} categories but the rule has {}", f.n_categories(), coding.n_categories()),
        ));
    }
    coding.check_sites(f.len())?;
    if let Some(&(_, j)) = groups.groups().iter().flat_map(|g| g.pairs.iter()).find(|p| p.1 as usize >= f.len()) {
        return Err(Error::config(
            "pairs",
            format!("pair references site {j} but only {} sites are given", f.len()),
        ));
    }
    let q = coding.n_fields();
    let lags = groups
        .groups()
        .par_iter()
        .map(|g| {
            let grfs = (0..q)
                .map(|r| {
                    let classes = lag_classes(f, coding, g, r);
                    let n_effective = classes.iter().filter(|c| c.is_informative()).map(|c| c.count).sum();
                    match estimate_lag_correlation(&classes, tolerance) {
                        Ok(est) => Ok(Some(GrfLagEstimate {
                            rho_hat: est.rho_hat,
                            gamma_hat: 1.0 - est.rho_hat,
                            logpl: est.logpl,
                            n_effective,
                            converged: est.converged,
                            boundary: est.rho_hat >= Correlation::MAX - BOUNDARY_MARGIN
                                || est.rho_hat <= Correlation::MIN + BOUNDARY_MARGIN,
                        })),
                        Err(Error::NoInformation { .. }) => Ok(None),
                        Err(Error::Numerical(m)) => Err(Error::Numerical(format!("lag {}, field {}: {m}", g.lag, r + 1))),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PLLagResult {
                lag: g.lag,
                n_pairs: g.n_pairs(),
                grfs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnderlyingVariogram { n_fields: q, lags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{simulate_varying_thresholds, thresholds_from_proportions, truncate, ProportionSpec};
    use crate::gaussian::{bivariate_rect_prob, std_normal_cdf};
    use crate::lags::{build_pair_groups, LagSpec};
    use crate::random_fields::{simulate_independent_grfs, CovarianceKind, CovarianceModel, GrfRealization};
    use crate::sites::SiteSet;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn neg() -> Interval {
        Interval::below(0.0).unwrap()
    }

    fn pos() -> Interval {
        Interval::above(0.0).unwrap()
    }

    fn class(a: Interval, b: Interval, count: u64) -> IntervalPairClass {
        IntervalPairClass { a, b, count }
    }

    /// Counts of `(category_i, category_j)` over `n` bivariate normal draws.
    fn simulate_pairs(coding: &CodingFunction, rho: f64, n: usize, seed: u64) -> Vec<IntervalPairClass> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kk = coding.n_categories();
        let cat = |y: f64| (0..kk).find(|&k| coding.interval(0, k, 0).contains(y)).unwrap();
        let mut counts = vec![0u64; kk * kk];
        let s = (1.0 - rho * rho).sqrt();
        for _ in 0..n {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            counts[cat(z1) * kk + cat(rho * z1 + s * z2)] += 1;
        }
        deduplicate(
            counts
                .iter()
                .enumerate()
                .map(|(c, &n)| (coding.interval(0, c / kk, 0), coding.interval(0, c % kk, 0), n)),
        )
    }

    #[test]
    fn objective_examples() {
        let whole = [class(Interval::WHOLE, Interval::WHOLE, 5)];
        for r in [-0.9, 0.0, 0.9] {
            assert_eq!(pl_objective(&whole, Correlation(r)), 0.0);
        }
        let single = [class(neg(), neg(), 1)];
        assert!((pl_objective(&single, Correlation::ZERO) - 0.25f64.ln()).abs() < 1e-12);
        let twice = [class(neg(), neg(), 1), class(neg(), neg(), 1)];
        assert_eq!(
            pl_objective(&twice, Correlation(0.3)),
            pl_objective(&[class(neg(), neg(), 2)], Correlation(0.3))
        );
    }

    #[test]
    fn concordant_data_hits_upper_clamp() {
        let pairs = [class(neg(), neg(), 500), class(pos(), pos(), 500)];
        let est = estimate_lag_correlation(&pairs, 1e-4).unwrap();
        assert!(est.rho_hat >= Correlation::MAX - 1e-4, "{}", est.rho_hat);
    }

    #[test]
    fn no_information_is_reported() {
        let pairs = [class(Interval::WHOLE, neg(), 10), class(pos(), Interval::WHOLE, 3)];
        assert!(matches!(estimate_lag_correlation(&pairs, 1e-4), Err(Error::NoInformation { .. })));
        assert!(matches!(estimate_lag_correlation(&[], 1e-4), Err(Error::NoInformation { .. })));
    }

    #[test]
    fn independence_recovered() {
        let thirds = thresholds_from_proportions(&ProportionSpec::Constant(vec![1.0 / 3.0; 3])).unwrap();
        let est = estimate_lag_correlation(&simulate_pairs(&thirds, 0.0, 100_000, 11), 1e-4).unwrap();
        assert!(est.rho_hat.abs() < 0.02, "{}", est.rho_hat);
    }

    #[test]
    fn binary_orthant_inversion() {
        let binary = CodingFunction::sequential(&[0.0]).unwrap();
        let pairs = simulate_pairs(&binary, 0.5, 100_000, 12);
        let concordant: u64 = pairs.iter().filter(|c| c.a == c.b).map(|c| c.count).sum();
        let total: u64 = pairs.iter().map(|c| c.count).sum();
        // P(concordant) = 1/2 + asin(ρ)/π.
        let oracle = (std::f64::consts::PI * (concordant as f64 / total as f64 - 0.5)).sin();
        let est = estimate_lag_correlation(&pairs, 1e-4).unwrap();
        assert!((est.rho_hat - 0.5).abs() < 0.02, "{}", est.rho_hat);
        assert!((est.rho_hat - oracle).abs() < 1e-3, "{} vs {oracle}", est.rho_hat);
    }

    #[test]
    fn never_worse_than_independence() {
        let pairs = [class(neg(), pos(), 3), class(pos(), neg(), 4), class(neg(), neg(), 2)];
        let est = estimate_lag_correlation(&pairs, 1e-4).unwrap();
        assert!(est.logpl >= pl_objective(&pairs, Correlation::ZERO));
    }

    #[test]
    fn dedup_merges_symmetric_pairs() {
        let t = Interval::new(-0.2, 0.7).unwrap();
        let d = deduplicate([(neg(), t, 2), (t, neg(), 3), (neg(), t, 0), (pos(), pos(), 1)]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.iter().map(|c| c.count).sum::<u64>(), 6);
        let jitter = Interval::new(-0.2 + 1e-13, 0.7).unwrap();
        assert_eq!(deduplicate([(t, t, 1), (jitter, t, 1)]).len(), 1);
    }

    #[test]
    fn dedup_invariance() {
        let sites = SiteSet::regular_grid_1d(300, 1.0).unwrap();
        let coding = simulate_varying_thresholds(&sites, 2, 50.0).unwrap();
        let y = simulate_independent_grfs(&sites, &[CovarianceModel::c1()], 3).unwrap();
        let f = truncate(&y, &coding).unwrap();
        let groups = build_pair_groups(&sites, &LagSpec::regular(4, 1.0, None).unwrap()).unwrap();
        for g in groups.groups() {
            let classes = lag_classes(&f, &coding, g, 0);
            let raw: Vec<IntervalPairClass> = g
                .pairs
                .iter()
                .map(|&(i, j)| {
                    let (i, j) = (i as usize, j as usize);
                    class(coding.interval(i, f.category(i), 0), coding.interval(j, f.category(j), 0), 1)
                })
                .collect();
            let a = estimate_lag_correlation(&classes, 1e-4).unwrap();
            let b = estimate_lag_correlation(&raw, 1e-4).unwrap();
            assert!((a.rho_hat - b.rho_hat).abs() < 1e-8, "{} vs {}", a.rho_hat, b.rho_hat);
            assert!((a.logpl - b.logpl).abs() < 1e-8 * b.logpl.abs());
        }
    }

    #[test]
    fn flag_rule_uses_informative_pairs_for_second_field() {
        let sites = SiteSet::uniform_square(150, 100.0, 4).unwrap();
        let flag = CodingFunction::flag2(0.0, 0.0).unwrap();
        let y = simulate_independent_grfs(&sites, &[CovarianceModel::c1(), CovarianceModel::c2()], 5).unwrap();
        let f = truncate(&y, &flag).unwrap();
        let groups = build_pair_groups(&sites, &LagSpec::regular(10, 5.0, None).unwrap()).unwrap();
        let v = empirical_underlying_variogram(&f, &flag, &groups).unwrap();
        for (g, l) in groups.groups().iter().zip(v.lags()) {
            let informative = g
                .pairs
                .iter()
                .filter(|&&(i, j)| f.category(i as usize) != 0 && f.category(j as usize) != 0)
                .count() as u64;
            assert_eq!(l.grfs[0].map(|e| e.n_effective), (g.n_pairs() > 0).then_some(g.n_pairs() as u64));
            assert_eq!(l.grfs[1].map_or(0, |e| e.n_effective), informative);
        }
    }

    #[test]
    fn factorization_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let flag = CodingFunction::flag2(0.3, -0.4).unwrap();
        let rho = [Correlation(0.35), Correlation(-0.2)];
        let labels: Vec<(usize, usize)> = (0..40).map(|_| (rng.random_range(0..3), rng.random_range(0..3))).collect();
        let direct: f64 = labels
            .iter()
            .map(|&(k, l)| {
                (0..2)
                    .map(|r| bivariate_rect_prob(&flag.interval(0, k, r), &flag.interval(0, l, r), rho[r]))
                    .product::<f64>()
                    .ln()
            })
            .sum();
        let per_field: f64 = (0..2)
            .map(|r| {
                let classes = deduplicate(labels.iter().map(|&(k, l)| (flag.interval(0, k, r), flag.interval(0, l, r), 1)));
                pl_objective(&classes, rho[r])
            })
            .sum();
        assert!((direct - per_field).abs() < 1e-10 * direct.abs());
    }

    #[test]
    fn label_permutation_invariance() {
        let sites = SiteSet::regular_grid_1d(400, 1.0).unwrap();
        let coding = thresholds_from_proportions(&ProportionSpec::Constant(vec![0.2, 0.5, 0.3])).unwrap();
        let y = simulate_independent_grfs(&sites, &[CovarianceModel::c1()], 9).unwrap();
        let f = truncate(&y, &coding).unwrap();
        let groups = build_pair_groups(&sites, &LagSpec::regular(20, 1.0, None).unwrap()).unwrap();
        let base = empirical_underlying_variogram(&f, &coding, &groups).unwrap();
        let perm = [2, 0, 1];
        let permuted = CategoricalField::new(3, f.labels().iter().map(|&k| perm[k]).collect()).unwrap();
        let other = empirical_underlying_variogram(&permuted, &coding.permute_categories(&perm).unwrap(), &groups).unwrap();
        assert_eq!(base, other);
    }

    #[test]
    fn nugget_field_gives_unit_gamma() {
        let sites = SiteSet::regular_grid_1d(300, 1.0).unwrap();
        let coding = thresholds_from_proportions(&ProportionSpec::Constant(vec![1.0 / 3.0; 3])).unwrap();
        let groups = build_pair_groups(&sites, &LagSpec::regular(20, 1.0, None).unwrap()).unwrap();
        let nugget = CovarianceModel::unit(CovarianceKind::Nugget, 1.0).unwrap();
        let mut total = 0.0;
        let mut n = 0.0;
        for s in 0..100 {
            let y = simulate_independent_grfs(&sites, &[nugget], s).unwrap();
            let v = empirical_underlying_variogram(&truncate(&y, &coding).unwrap(), &coding, &groups).unwrap();
            for e in v.track(0).lags.iter().filter_map(|l| l.estimate) {
                total += e;
                n += 1.0;
            }
        }
        assert!((total / n - 1.0).abs() < 0.05, "{}", total / n);
    }

    #[test]
    fn single_simulation_first_lag() {
        let sites = SiteSet::regular_grid_1d(2000, 1.0).unwrap();
        let coding = thresholds_from_proportions(&ProportionSpec::Constant(vec![1.0 / 3.0; 3])).unwrap();
        let y = simulate_independent_grfs(&sites, &[CovarianceModel::c1()], 1).unwrap();
        let groups = build_pair_groups(&sites, &LagSpec::regular(1, 1.0, None).unwrap()).unwrap();
        let v = empirical_underlying_variogram(&truncate(&y, &coding).unwrap(), &coding, &groups).unwrap();
        let truth = 1.0 - (-1.0f64 / 20.0).exp();
        let g = v.lags()[0].grfs[0].unwrap();
        assert!((g.gamma_hat - truth).abs() < 0.1);
        assert!(!g.boundary && g.converged);
    }

    #[test]
    fn shape_errors() {
        let coding = CodingFunction::sequential(&[0.0]).unwrap();
        let f = CategoricalField::new(3, vec![0, 1, 2]).unwrap();
        let sites = SiteSet::regular_grid_1d(3, 1.0).unwrap();
        let groups = build_pair_groups(&sites, &LagSpec::regular(1, 1.0, None).unwrap()).unwrap();
        assert!(empirical_underlying_variogram(&f, &coding, &groups).is_err());
        let y = GrfRealization::new(1, 1, vec![0.0]).unwrap();
        let short = truncate(&y, &coding).unwrap();
        assert!(empirical_underlying_variogram(&short, &coding, &groups).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn gamma_within_bounds(counts in proptest::collection::vec(0u64..50, 9), s in -1.0f64..1.0) {
            let c = CodingFunction::sequential(&[s - 0.5, s + 0.5]).unwrap();
            let pairs = deduplicate(counts.iter().enumerate().map(|(i, &n)| {
                (c.interval(0, i / 3, 0), c.interval(0, i % 3, 0), n)
            }));
            if let Ok(est) = estimate_lag_correlation(&pairs, 1e-4) {
                let gamma = 1.0 - est.rho_hat;
                prop_assert!((0.0..=2.0).contains(&gamma));
                prop_assert!(est.logpl >= pl_objective(&pairs, Correlation::ZERO));
            }
        }

        #[test]
        fn dedup_is_order_independent(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cuts = [-1.0, 0.0, 0.8];
            let iv = |k: usize| match k {
                0 => Interval::below(cuts[0]).unwrap(),
                3 => Interval::above(cuts[2]).unwrap(),
                k => Interval::new(cuts[k - 1], cuts[k]).unwrap(),
            };
            let mut items: Vec<(Interval, Interval, u64)> =
                (0..30).map(|_| (iv(rng.random_range(0..4)), iv(rng.random_range(0..4)), 1)).collect();
            let a = deduplicate(items.clone());
            items.reverse();
            prop_assert_eq!(a, deduplicate(items));
        }
    }

    #[test]
    fn cdf_sanity_for_test_helper() {
        // Marginal frequencies of the helper match Φ.
        let binary = CodingFunction::sequential(&[0.5]).unwrap();
        let pairs = simulate_pairs(&binary, 0.0, 50_000, 13);
        let total: u64 = pairs.iter().map(|c| c.count).sum();
        let low: u64 = pairs
            .iter()
            .map(|c| c.count * ((c.a.upper() == 0.5) as u64 + (c.b.upper() == 0.5) as u64))
            .sum();
        assert!((low as f64 / (2 * total) as f64 - std_normal_cdf(0.5)).abs() < 0.01);
    }
}
