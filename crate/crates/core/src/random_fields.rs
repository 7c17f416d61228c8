//! Stationary isotropic covariance models and unconditional simulation of
//! standardized Gaussian random fields by Cholesky factorization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sites::SiteSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    Exponential,
    Gaussian,
    Spherical,
    Nugget,
}

impl std::str::FromStr for CovarianceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(CovarianceKind::Exponential),
            "gaussian" | "gauss" => Ok(CovarianceKind::Gaussian),
            "spherical" | "sph" => Ok(CovarianceKind::Spherical),
            "nugget" => Ok(CovarianceKind::Nugget),
            other => Err(Error::config("kind", format!("unknown covariance kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    kind: CovarianceKind,
    range: f64,
    sill: f64,
}

impl CovarianceModel {
    pub fn new(kind: CovarianceKind, range: f64, sill: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::config("range", format!("must be positive, got {range}")));
        }
        if !(sill > 0.0 && sill.is_finite()) {
            return Err(Error::config("sill", format!("must be positive, got {sill}")));
        }
        Ok(CovarianceModel { kind, range, sill })
    }

    /// Unit-sill model.
    pub fn unit(kind: CovarianceKind, range: f64) -> Result<Self> {
        Self::new(kind, range, 1.0)
    }

    /// `exp(-h / 20)`.
    pub fn c1() -> Self {
        CovarianceModel {
            kind: CovarianceKind::Exponential,
            range: 20.0,
            sill: 1.0,
        }
    }

    /// `exp(-(h / 40)²)`.
    pub fn c2() -> Self {
        CovarianceModel {
            kind: CovarianceKind::Gaussian,
            range: 40.0,
            sill: 1.0,
        }
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn sill(&self) -> f64 {
        self.sill
    }

    pub fn eval(&self, h: f64) -> Result<f64> {
        if h.is_nan() || h < 0.0 {
            return Err(Error::Domain(format!("lag must be non-negative, got {h}")));
        }
        Ok(self.sill * self.correlation_unchecked(h))
    }

    /// Correlation `C(h) / C(0)` for `h ≥ 0`.
    pub(crate) fn correlation_unchecked(&self, h: f64) -> f64 {
        let s = h / self.range;
        match self.kind {
            CovarianceKind::Exponential => (-s).exp(),
            CovarianceKind::Gaussian => (-s * s).exp(),
            CovarianceKind::Spherical => {
                if s < 1.0 {
                    1.0 - 1.5 * s + 0.5 * s * s * s
                } else {
                    0.0
                }
            }
            CovarianceKind::Nugget => {
                if h == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Site values of `q` fields, stored row-major (`n × q`).
#[derive(Debug, Clone, PartialEq)]
pub struct GrfRealization {
    n_sites: usize,
    n_fields: usize,
    values: Vec<f64>,
}

impl GrfRealization {
    pub fn new(n_sites: usize, n_fields: usize, values: Vec<f64>) -> Result<Self> {
        if n_fields == 0 || values.len() != n_sites * n_fields {
            return Err(Error::config(
                "values",
                format!("expected {n_sites} x {n_fields} values, got {}", values.len()),
            ));
        }
        Ok(GrfRealization {
            n_sites,
            n_fields,
            values,
        })
    }

    /// Assembles a realization from one column per field.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let q = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::config("values", "columns have different lengths"));
        }
        let mut values = Vec::with_capacity(n * q);
        for i in 0..n {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(n, q, values)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    #[inline]
    pub fn value(&self, site: usize, field: usize) -> f64 {
        self.values[site * self.n_fields + field]
    }

    #[inline]
    pub fn row(&self, site: usize) -> &[f64] {
        &self.values[site * self.n_fields..(site + 1) * self.n_fields]
    }

    pub fn column(&self, field: usize) -> Vec<f64> {
        (0..self.n_sites).map(|i| self.value(i, field)).collect()
    }
}

/// Mixes a master seed with a stream index (SplitMix64 finalizer applied
/// twice), giving reproducible, decorrelated sub-seeds.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// Pivots below this fraction of the diagonal are treated as exact zeros
// (coincident sites, numerically rank-deficient smooth models).
const PIVOT_ZERO: f64 = 1e-12;
// Pivots more negative than this fraction fail the factorization.
const PIVOT_NEGATIVE: f64 = 1e-12;
// Relative diagonal jitter applied when the plain factorization fails.
const JITTER: f64 = 1e-10;

/// Packed lower Cholesky factor of the `n × n` matrix `cov(i, j)`, tolerating
/// semidefinite matrices.
fn factorize(n: usize, diag: f64, cov: impl Fn(usize, usize) -> f64) -> Result<Vec<f64>> {
    let row = |i: usize| i * (i + 1) / 2;
    let mut factor = vec![0.0; row(n)];
    for i in 0..n {
        let (done, current) = factor.split_at_mut(row(i));
        let li = &mut current[..=i];
        for j in 0..i {
            let lj = &done[row(j)..row(j) + j];
            let dot: f64 = li[..j].iter().zip(lj).map(|(a, b)| a * b).sum();
            let ljj = done[row(j) + j];
            li[j] = if ljj > 0.0 { (cov(i, j) - dot) / ljj } else { 0.0 };
        }
        let d = cov(i, i) - li[..i].iter().map(|a| a * a).sum::<f64>();
        if d > PIVOT_ZERO * diag {
            li[i] = d.sqrt();
        } else if d >= -PIVOT_NEGATIVE * diag {
            li[i] = 0.0;
        } else {
            return Err(Error::Numerical(format!(
                "covariance matrix is not positive semidefinite: pivot {i} = {d:e}"
            )));
        }
    }
    Ok(factor)
}

/// Lower Cholesky factor of a site covariance matrix, reusable across draws.
#[derive(Debug, Clone)]
pub struct GrfSimulator {
    n: usize,
    // Row i holds L[i][0..=i] starting at offset i(i+1)/2.
    factor: Vec<f64>,
}

impl GrfSimulator {
    pub fn new(sites: &SiteSet, model: &CovarianceModel) -> Result<Self> {
        let n = sites.len();
        let sill = model.sill();
        let cov = |jitter: f64| {
            move |i: usize, j: usize| {
                let c = sill * model.correlation_unchecked(sites.distance(i, j));
                if i == j {
                    c + jitter
                } else {
                    c
                }
            }
        };
        let factor = factorize(n, sill, cov(0.0))
            .or_else(|_| factorize(n, sill, cov(JITTER * sill)))
            .map_err(|e| match e {
                Error::Numerical(msg) => Error::Numerical(format!(
                    "{msg} after diagonal jitter {JITTER:e} ({:?} model, range {})",
                    model.kind(),
                    model.range()
                )),
                other => other,
            })?;
        Ok(GrfSimulator { n, factor })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// One draw, deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..self.n).map(|_| StandardNormal.sample(&mut rng)).collect();
        (0..self.n)
            .map(|i| {
                let start = i * (i + 1) / 2;
                self.factor[start..=start + i]
                    .iter()
                    .zip(&z)
                    .map(|(l, z)| l * z)
                    .sum()
            })
            .collect()
    }
}

/// One realization of a centered Gaussian field with covariance `model`.
pub fn simulate_grf(sites: &SiteSet, model: &CovarianceModel, seed: u64) -> Result<GrfRealization> {
    let values = GrfSimulator::new(sites, model)?.sample(seed);
    GrfRealization::new(sites.len(), 1, values)
}

/// Independent fields, column `r` drawn with seed `derive_seed(seed, r)`.
pub fn simulate_independent_grfs(
    sites: &SiteSet,
    models: &[CovarianceModel],
    seed: u64,
) -> Result<GrfRealization> {
    if models.is_empty() {
        return Err(Error::config("models", "at least one covariance model is required"));
    }
    let columns = models
        .iter()
        .enumerate()
        .map(|(r, m)| Ok(GrfSimulator::new(sites, m)?.sample(derive_seed(seed, r as u64))))
        .collect::<Result<Vec<_>>>()?;
    GrfRealization::from_columns(&columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn covariance_examples() {
        let c1 = CovarianceModel::c1();
        let c2 = CovarianceModel::c2();
        assert_eq!(c1.eval(0.0).unwrap(), 1.0);
        assert!(close(c1.eval(20.0).unwrap(), (-1.0f64).exp(), 1e-15));
        assert!(close(c2.eval(40.0).unwrap(), (-1.0f64).exp(), 1e-15));
        assert!(matches!(c1.eval(-1.0), Err(Error::Domain(_))));
        let sph = CovarianceModel::new(CovarianceKind::Spherical, 10.0, 2.0).unwrap();
        assert_eq!(sph.eval(0.0).unwrap(), 2.0);
        assert_eq!(sph.eval(10.0).unwrap(), 0.0);
        let nug = CovarianceModel::unit(CovarianceKind::Nugget, 1.0).unwrap();
        assert_eq!(nug.eval(0.0).unwrap(), 1.0);
        assert_eq!(nug.eval(1e-9).unwrap(), 0.0);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(CovarianceModel::new(CovarianceKind::Gaussian, 0.0, 1.0).is_err());
        assert!(CovarianceModel::new(CovarianceKind::Gaussian, 1.0, -1.0).is_err());
        assert!("matern".parse::<CovarianceKind>().is_err());
    }

    #[test]
    fn single_site_is_standard_normal() {
        let sites = SiteSet::new(1, vec![3.0]).unwrap();
        let sim = GrfSimulator::new(&sites, &CovarianceModel::c1()).unwrap();
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|s| sim.sample(s)[0]).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn coincident_sites_share_value() {
        let sites = SiteSet::new(2, vec![1.0, 1.0, 1.0, 1.0, 5.0, 1.0]).unwrap();
        for model in [CovarianceModel::c1(), CovarianceModel::c2()] {
            let y = simulate_grf(&sites, &model, 11).unwrap();
            assert_eq!(y.value(0, 0), y.value(1, 0));
            assert_ne!(y.value(0, 0), y.value(2, 0));
        }
    }

    #[test]
    fn nugget_field_is_uncorrelated() {
        let sites = SiteSet::regular_grid_1d(1000, 1.0).unwrap();
        let nug = CovarianceModel::unit(CovarianceKind::Nugget, 1.0).unwrap();
        let y = simulate_grf(&sites, &nug, 5).unwrap().column(0);
        let r: f64 = y.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / 999.0;
        assert!(r.abs() < 0.07, "lag-1 correlation {r}");
    }

    #[test]
    fn reproducible_given_seed() {
        let sites = SiteSet::regular_grid_1d(200, 1.0).unwrap();
        let a = simulate_grf(&sites, &CovarianceModel::c2(), 42).unwrap();
        let b = simulate_grf(&sites, &CovarianceModel::c2(), 42).unwrap();
        let c = simulate_grf(&sites, &CovarianceModel::c2(), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn independent_columns() {
        let sites = SiteSet::regular_grid_1d(2000, 1.0).unwrap();
        let m = CovarianceModel::unit(CovarianceKind::Nugget, 1.0).unwrap();
        let y = simulate_independent_grfs(&sites, &[m, m], 9).unwrap();
        let (a, b) = (y.column(0), y.column(1));
        assert_ne!(a, b);
        let cross = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / 2000.0;
        assert!(cross.abs() < 0.05);

        let one = simulate_independent_grfs(&sites, &[CovarianceModel::c1()], 9).unwrap();
        let direct = simulate_grf(&sites, &CovarianceModel::c1(), derive_seed(9, 0)).unwrap();
        assert_eq!(one, direct);
    }

    #[test]
    fn factorization_reports_indefinite_matrix() {
        let m = [[1.0, 2.0], [2.0, 1.0]];
        let err = factorize(2, 1.0, |i, j| m[i][j]).unwrap_err();
        assert!(matches!(err, Error::Numerical(ref s) if s.contains("pivot 1")));
    }

    #[test]
    fn factorization_reproduces_matrix() {
        let sites = SiteSet::uniform_square(30, 50.0, 3).unwrap();
        let m = CovarianceModel::c1();
        let l = factorize(30, 1.0, |i, j| m.eval(sites.distance(i, j)).unwrap()).unwrap();
        let at = |i: usize, j: usize| if j <= i { l[i * (i + 1) / 2 + j] } else { 0.0 };
        for i in 0..30 {
            for j in 0..30 {
                let llt: f64 = (0..30).map(|k| at(i, k) * at(j, k)).sum();
                assert!(close(llt, m.eval(sites.distance(i, j)).unwrap(), 1e-12));
            }
        }
    }
}
