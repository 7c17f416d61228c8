use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Sample locations in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    dim: usize,
    coords: Vec<f64>,
}

impl SiteSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dimension", "must be at least 1"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::config(
                "coordinates",
                format!("expected a non-empty multiple of {dim} values, got {}", coords.len()),
            ));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::config(
                "coordinates",
                format!("site {} has a non-finite coordinate", i / dim),
            ));
        }
        Ok(SiteSet { dim, coords })
    }

    /// `n` nodes at `0, mesh, 2·mesh, …` on a line.
    pub fn regular_grid_1d(n: usize, mesh: f64) -> Result<Self> {
        if mesh.is_nan() || mesh <= 0.0 {
            return Err(Error::config("mesh", "must be positive"));
        }
        Self::new(1, (0..n).map(|i| i as f64 * mesh).collect())
    }

    /// `n` sites drawn uniformly on `[0, side]²`.
    pub fn uniform_square(n: usize, side: f64, seed: u64) -> Result<Self> {
        if side.is_nan() || side <= 0.0 {
            return Err(Error::config("side", "must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..2 * n).map(|_| rng.random::<f64>() * side).collect();
        Self::new(2, coords)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

/// One category index (0-based) per site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalField {
    n_categories: usize,
    labels: Vec<usize>,
}

impl CategoricalField {
    pub fn new(n_categories: usize, labels: Vec<usize>) -> Result<Self> {
        if n_categories == 0 {
            return Err(Error::config("K", "must be at least 1"));
        }
        if let Some((i, &k)) = labels.iter().enumerate().find(|(_, &k)| k >= n_categories) {
            return Err(Error::config(
                "category",
                format!("site {i} has category {} but K = {n_categories}", k + 1),
            ));
        }
        Ok(CategoricalField { n_categories, labels })
    }

    #[inline]
    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    #[inline]
    pub fn category(&self, site: usize) -> usize {
        self.labels[site]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
