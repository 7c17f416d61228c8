//! Truncation rules in cartesian-product form.
//!
//! Category `k` at site `x` occupies the box `T_k^1(x) × … × T_k^q(x)`; for
//! each site the `K` boxes must tile `R^q`. Rules can be constant over the
//! domain or carry one table per site.

use crate::error::{Error, Result};
use crate::gaussian::{std_normal_cdf, std_normal_quantile, Interval};
use crate::random_fields::{simulate_independent_grfs, CovarianceKind, CovarianceModel, GrfRealization};
use crate::sites::{CategoricalField, SiteSet};

const PROPORTION_SUM_TOL: f64 = 1e-12;

/// Category proportions, either shared by all sites or given per site.
#[derive(Debug, Clone, PartialEq)]
pub enum ProportionSpec {
    Constant(Vec<f64>),
    PerSite(Vec<Vec<f64>>),
}

impl ProportionSpec {
    pub fn validate(&self) -> Result<()> {
        let rows: Vec<&Vec<f64>> = match self {
            ProportionSpec::Constant(p) => vec![p],
            ProportionSpec::PerSite(rows) => {
                if rows.is_empty() {
                    return Err(Error::config("proportions", "no sites given"));
                }
                rows.iter().collect()
            }
        };
        let k = rows[0].len();
        for (i, p) in rows.iter().enumerate() {
            if p.len() < 2 || p.len() != k {
                return Err(Error::config(
                    "proportions",
                    format!("row {i}: expected {k} >= 2 proportions, got {}", p.len()),
                ));
            }
            if p.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
                return Err(Error::config(
                    "proportions",
                    format!("row {i}: every proportion must lie in (0, 1)"),
                ));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > PROPORTION_SUM_TOL {
                return Err(Error::config(
                    "proportions",
                    format!("row {i}: proportions sum to {sum}, expected 1"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Table {
    /// `K × q` intervals, category-major.
    Constant(Vec<Interval>),
    /// `n × K × q` intervals, site-major.
    PerSite { n_sites: usize, cells: Vec<Interval> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodingFunction {
    n_categories: usize,
    n_fields: usize,
    table: Table,
}

impl CodingFunction {
    /// A rule shared by every site; `intervals[k * q + r]` is `T_k^r`.
    pub fn constant(n_categories: usize, n_fields: usize, intervals: Vec<Interval>) -> Result<Self> {
        check_shape(n_categories, n_fields, intervals.len(), 1)?;
        check_partition(n_categories, n_fields, &intervals)
            .map_err(|m| Error::config("intervals", m))?;
        Ok(CodingFunction {
            n_categories,
            n_fields,
            table: Table::Constant(intervals),
        })
    }

    /// One table per site; `cells[(i * K + k) * q + r]` is `T_k^r(x_i)`.
    pub fn per_site(
        n_categories: usize,
        n_fields: usize,
        n_sites: usize,
        cells: Vec<Interval>,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::config("sites", "per-site coding needs at least one site"));
        }
        check_shape(n_categories, n_fields, cells.len(), n_sites)?;
        for (i, site) in cells.chunks(n_categories * n_fields).enumerate() {
            check_partition(n_categories, n_fields, site)
                .map_err(|m| Error::config("intervals", format!("site {i}: {m}")))?;
        }
        Ok(CodingFunction {
            n_categories,
            n_fields,
            table: Table::PerSite { n_sites, cells },
        })
    }

    /// One field cut at increasing thresholds `s_1 < … < s_{K-1}`.
    pub fn sequential(thresholds: &[f64]) -> Result<Self> {
        let cells = sequential_cells(thresholds).map_err(|m| Error::config("thresholds", m))?;
        Self::constant(thresholds.len() + 1, 1, cells)
    }

    /// Sequential rule with site-specific thresholds.
    pub fn sequential_per_site(thresholds: &[Vec<f64>]) -> Result<Self> {
        let k = thresholds.first().map_or(0, |t| t.len() + 1);
        let mut cells = Vec::with_capacity(thresholds.len() * k);
        for (i, t) in thresholds.iter().enumerate() {
            if t.len() + 1 != k {
                return Err(Error::config(
                    "thresholds",
                    format!("site {i} has {} thresholds, expected {}", t.len(), k - 1),
                ));
            }
            cells.extend(
                sequential_cells(t).map_err(|m| Error::config("thresholds", format!("site {i}: {m}")))?,
            );
        }
        Self::per_site(k, 1, thresholds.len(), cells)
    }

    /// Two fields, three categories:
    /// `C_1 = (-∞, s1) × R`, `C_2 = [s1, ∞) × (-∞, t1)`, `C_3 = [s1, ∞) × [t1, ∞)`.
    pub fn flag2(s1: f64, t1: f64) -> Result<Self> {
        let bad = |f: &str| Error::config(f, "threshold must be finite");
        if !s1.is_finite() {
            return Err(bad("s1"));
        }
        if !t1.is_finite() {
            return Err(bad("t1"));
        }
        Self::constant(
            3,
            2,
            vec![
                Interval::below(s1)?,
                Interval::WHOLE,
                Interval::above(s1)?,
                Interval::below(t1)?,
                Interval::above(s1)?,
                Interval::above(t1)?,
            ],
        )
    }

    /// Flag rule with `P(C_k) = p[k]`.
    pub fn flag2_from_proportions(p: [f64; 3]) -> Result<Self> {
        ProportionSpec::Constant(p.to_vec()).validate()?;
        let s1 = std_normal_quantile(p[0])?;
        let t1 = std_normal_quantile(p[1] / (p[1] + p[2]))?;
        Self::flag2(s1, t1)
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.table, Table::Constant(_))
    }

    /// Number of sites for a per-site rule.
    pub fn n_sites(&self) -> Option<usize> {
        match &self.table {
            Table::Constant(_) => None,
            Table::PerSite { n_sites, .. } => Some(*n_sites),
        }
    }

    /// `T_k^r(x_site)`.
    #[inline]
    pub fn interval(&self, site: usize, category: usize, field: usize) -> Interval {
        let kq = self.n_categories * self.n_fields;
        match &self.table {
            Table::Constant(cells) => cells[category * self.n_fields + field],
            Table::PerSite { cells, .. } => cells[site * kq + category * self.n_fields + field],
        }
    }

    /// The box of category `k` at `site`, one interval per field.
    pub fn cell(&self, site: usize, category: usize) -> &[Interval] {
        let q = self.n_fields;
        let kq = self.n_categories * q;
        match &self.table {
            Table::Constant(cells) => &cells[category * q..(category + 1) * q],
            Table::PerSite { cells, .. } => {
                &cells[site * kq + category * q..site * kq + (category + 1) * q]
            }
        }
    }

    /// Rule with categories renamed: old category `k` becomes `perm[k]`.
    pub fn permute_categories(&self, perm: &[usize]) -> Result<Self> {
        let k = self.n_categories;
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::config("permutation", "not a permutation of the categories"));
        }
        let q = self.n_fields;
        let remap = |cells: &[Interval]| {
            let mut out = cells.to_vec();
            for (old, &new) in perm.iter().enumerate() {
                out[new * q..(new + 1) * q].copy_from_slice(&cells[old * q..(old + 1) * q]);
            }
            out
        };
        let table = match &self.table {
            Table::Constant(cells) => Table::Constant(remap(cells)),
            Table::PerSite { n_sites, cells } => Table::PerSite {
                n_sites: *n_sites,
                cells: cells.chunks(k * q).flat_map(remap).collect(),
            },
        };
        Ok(CodingFunction { table, ..self.clone() })
    }

    pub(crate) fn check_sites(&self, n_sites: usize) -> Result<()> {
        match self.n_sites() {
            Some(m) if m != n_sites => Err(Error::config(
                "coding",
                format!("rule is defined for {m} sites but the data has {n_sites}"),
            )),
            _ => Ok(()),
        }
    }
}

fn check_shape(k: usize, q: usize, len: usize, n_sites: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::config("K", "must be at least 1"));
    }
    if q == 0 {
        return Err(Error::config("q", "must be at least 1"));
    }
    if len != n_sites * k * q {
        return Err(Error::config(
            "intervals",
            format!("expected {} intervals for K = {k}, q = {q}, got {len}", n_sites * k * q),
        ));
    }
    Ok(())
}

fn sequential_cells(thresholds: &[f64]) -> std::result::Result<Vec<Interval>, String> {
    if thresholds.iter().any(|t| !t.is_finite()) {
        return Err("thresholds must be finite".into());
    }
    let mut edges = Vec::with_capacity(thresholds.len() + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend_from_slice(thresholds);
    edges.push(f64::INFINITY);
    edges
        .windows(2)
        .map(|w| Interval::new(w[0], w[1]).map_err(|_| "thresholds must be strictly increasing".to_string()))
        .collect()
}

/// Checks that `K` boxes (`cells[k * q + r]`) tile `R^q`.
///
/// Every box edge is a breakpoint of its axis, so each box is a union of
/// elementary cells of the breakpoint grid; the tiling holds iff every
/// elementary cell lies in exactly one box.
fn check_partition(k: usize, q: usize, cells: &[Interval]) -> std::result::Result<(), String> {
    let axes: Vec<Vec<f64>> = (0..q)
        .map(|r| {
            let mut pts: Vec<f64> = (0..k)
                .flat_map(|c| {
                    let i = cells[c * q + r];
                    [i.lower(), i.upper()]
                })
                .filter(|x| x.is_finite())
                .collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            // Representative point of each elementary interval.
            let mut reps = Vec::with_capacity(pts.len() + 1);
            match (pts.first(), pts.last()) {
                (Some(&lo), Some(&hi)) => {
                    reps.push(lo - 1.0);
                    reps.extend(pts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                    reps.push(hi + 1.0);
                }
                _ => reps.push(0.0),
            }
            reps
        })
        .collect();

    let total: usize = axes.iter().map(Vec::len).product();
    let mut point = vec![0.0; q];
    for flat in 0..total {
        let mut rem = flat;
        for (r, reps) in axes.iter().enumerate() {
            point[r] = reps[rem % reps.len()];
            rem /= reps.len();
        }
        let owners = (0..k)
            .filter(|&c| (0..q).all(|r| cells[c * q + r].contains(point[r])))
            .count();
        if owners != 1 {
            return Err(format!(
                "categories do not partition R^{q}: point {point:?} lies in {owners} categories"
            ));
        }
    }
    Ok(())
}

/// Thresholds `s_j = Φ⁻¹(p_1 + … + p_j)` of the sequential rule.
pub fn thresholds_from_proportions(p: &ProportionSpec) -> Result<CodingFunction> {
    p.validate()?;
    match p {
        ProportionSpec::Constant(p) => CodingFunction::sequential(&cumulative_thresholds(p)?),
        ProportionSpec::PerSite(rows) => CodingFunction::sequential_per_site(
            &rows
                .iter()
                .map(|p| cumulative_thresholds(p))
                .collect::<Result<Vec<_>>>()?,
        ),
    }
}

fn cumulative_thresholds(p: &[f64]) -> Result<Vec<f64>> {
    (1..p.len())
        .map(|j| {
            let below: f64 = p[..j].iter().sum();
            if below <= 0.5 {
                std_normal_quantile(below)
            } else {
                // Work from the upper tail so that small upper masses keep
                // their precision.
                let above: f64 = p[j..].iter().sum();
                std_normal_quantile(above).map(|x| -x)
            }
        })
        .collect()
}

/// Category of every site: `k` such that `y(x) ∈ C_k(x)`.
pub fn truncate(y: &GrfRealization, coding: &CodingFunction) -> Result<CategoricalField> {
    if y.n_fields() != coding.n_fields() {
        return Err(Error::config(
            "q",
            format!("realization has {} fields but the rule expects {}", y.n_fields(), coding.n_fields()),
        ));
    }
    coding.check_sites(y.n_sites())?;
    let labels = (0..y.n_sites())
        .map(|i| {
            let row = y.row(i);
            (0..coding.n_categories())
                .find(|&k| coding.cell(i, k).iter().zip(row).all(|(t, v)| t.contains(*v)))
                .ok_or_else(|| {
                    Error::Numerical(format!("site {i}: value {row:?} falls in no category"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    CategoricalField::new(coding.n_categories(), labels)
}

/// `t_r(x)`: the interval field `r` must lie in given the observed category.
pub fn interval_for_site(coding: &CodingFunction, site: usize, field: usize, category: usize) -> Interval {
    coding.interval(site, category, field)
}

/// Spatially varying three-category sequential rule.
///
/// Two independent smooth fields `Z_1`, `Z_2` (Gaussian covariance with range
/// `smoothness_range`) set the local proportions
/// `p_1 = 0.2 + 0.3 Φ(Z_1)` and `p_2 = (1 - p_1)(0.2 + 0.6 Φ(Z_2))`, so every
/// category keeps a probability of at least 0.1 and the thresholds stay
/// ordered. An infinite range draws a single `(Z_1, Z_2)` shared by all sites.
pub fn simulate_varying_thresholds(
    sites: &SiteSet,
    seed: u64,
    smoothness_range: f64,
) -> Result<CodingFunction> {
    if smoothness_range.is_nan() || smoothness_range <= 0.0 {
        return Err(Error::config("smoothness_range", "must be positive"));
    }
    let n = sites.len();
    let (z1, z2) = if smoothness_range.is_infinite() {
        let single = SiteSet::new(1, vec![0.0])?;
        let model = CovarianceModel::unit(CovarianceKind::Nugget, 1.0)?;
        let z = simulate_independent_grfs(&single, &[model, model], seed)?;
        (vec![z.value(0, 0); n], vec![z.value(0, 1); n])
    } else {
        let model = CovarianceModel::unit(CovarianceKind::Gaussian, smoothness_range)?;
        let z = simulate_independent_grfs(sites, &[model, model], seed)?;
        (z.column(0), z.column(1))
    };
    let thresholds = z1
        .iter()
        .zip(&z2)
        .map(|(&a, &b)| {
            let p1 = 0.2 + 0.3 * std_normal_cdf(a);
            let p2 = (1.0 - p1) * (0.2 + 0.6 * std_normal_cdf(b));
            cumulative_thresholds(&[p1, p2, 1.0 - p1 - p2])
        })
        .collect::<Result<Vec<_>>>()?;
    CodingFunction::sequential_per_site(&thresholds)
}
