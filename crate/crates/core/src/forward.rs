//! Theoretical indicator variograms implied by a coding rule and the
//! correlations of independent hidden fields.

use crate::coding::CodingFunction;
use crate::error::{Error, Result};
use crate::gaussian::{BivariateNormal, Correlation};
use crate::lags::PairGroups;
use crate::variography::{EmpiricalVariogram, IndicatorVariograms, LagEstimate, Track};

/// `E[1_k(x)] = Π_r P(Y_r ∈ T_k^r(x))`.
pub fn indicator_expectation(coding: &CodingFunction, site: usize, k: usize) -> f64 {
    coding.cell(site, k).iter().map(|t| t.prob()).product()
}

/// `E[1_k(x) 1_l(x')]` with field `r` correlated at `rho[r]` between the two sites.
///
/// Panics if `rho` does not have one entry per field.
pub fn joint_indicator_expectation(
    coding: &CodingFunction,
    x: usize,
    x_prime: usize,
    k: usize,
    l: usize,
    rho: &[Correlation],
) -> f64 {
    let kernels = kernels(coding, rho);
    joint(coding, x, x_prime, k, l, &kernels)
}

/// Simple (`k = l`) or cross variogram of the indicators between two sites.
///
/// Panics if `rho` does not have one entry per field.
pub fn indicator_variogram_between_points(
    coding: &CodingFunction,
    x: usize,
    x_prime: usize,
    k: usize,
    l: usize,
    rho: &[Correlation],
) -> f64 {
    let kernels = kernels(coding, rho);
    point_value(coding, x, x_prime, k, l, &kernels)
}

/// Average of the point-pair model over each lag's pairs.
///
/// `rho[α]` holds one correlation per field for lag `α`; a `None` entry or a
/// lag without pairs yields a missing estimate.
pub fn averaged_indicator_variogram(
    coding: &CodingFunction,
    rho: &[Option<Vec<Correlation>>],
    groups: &PairGroups,
) -> Result<IndicatorVariograms> {
    if rho.len() != groups.len() {
        return Err(Error::config(
            "rho",
            format!("{} correlation sets for {} lags", rho.len(), groups.len()),
        ));
    }
    if let Some(r) = rho.iter().flatten().find(|r| r.len() != coding.n_fields()) {
        return Err(Error::config(
            "rho",
            format!("{} correlations given for {} fields", r.len(), coding.n_fields()),
        ));
    }
    if let Some(n) = coding.n_sites() {
        if let Some(&(_, j)) = groups
            .groups()
            .iter()
            .flat_map(|g| g.pairs.iter())
            .find(|p| p.1 as usize >= n)
        {
            return Err(Error::config(
                "coding",
                format!("rule covers {n} sites but a pair references site {j}"),
            ));
        }
    }

    let kk = coding.n_categories();
    let mut values: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(groups.len()); kk * kk];
    let mut buf = vec![0.0; kk * kk];
    for (g, r) in groups.groups().iter().zip(rho) {
        let mean = match r {
            Some(r) if g.n_pairs() > 0 => {
                let kernels = kernels(coding, r);
                if coding.is_constant() {
                    point_matrix(coding, 0, 0, &kernels, &mut buf);
                } else {
                    let mut acc = vec![0.0; kk * kk];
                    for &(i, j) in &g.pairs {
                        point_matrix(coding, i as usize, j as usize, &kernels, &mut buf);
                        acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                    }
                    let n = g.n_pairs() as f64;
                    buf.iter_mut().zip(&acc).for_each(|(b, a)| *b = a / n);
                }
                Some(&buf)
            }
            _ => None,
        };
        for (c, track) in values.iter_mut().enumerate() {
            track.push(mean.map(|m| m[c]));
        }
    }

    let tracks = values
        .into_iter()
        .enumerate()
        .map(|(c, track)| EmpiricalVariogram {
            track: Track::ModelIndicator(c / kk, c % kk),
            lags: groups
                .groups()
                .iter()
                .zip(track)
                .map(|(g, estimate)| LagEstimate {
                    lag: g.lag,
                    estimate,
                    n_pairs: g.n_pairs(),
                })
                .collect(),
        })
        .collect();
    Ok(IndicatorVariograms::from_tracks(kk, tracks))
}

fn kernels(coding: &CodingFunction, rho: &[Correlation]) -> Vec<BivariateNormal> {
    assert_eq!(rho.len(), coding.n_fields(), "one correlation per field is required");
    rho.iter().map(|&r| BivariateNormal::new(r)).collect()
}

fn joint(coding: &CodingFunction, x: usize, x_prime: usize, k: usize, l: usize, kernels: &[BivariateNormal]) -> f64 {
    coding
        .cell(x, k)
        .iter()
        .zip(coding.cell(x_prime, l))
        .zip(kernels)
        .map(|((a, b), bvn)| bvn.rect_prob(a, b))
        .product()
}

fn point_value(coding: &CodingFunction, x: usize, x_prime: usize, k: usize, l: usize, kernels: &[BivariateNormal]) -> f64 {
    if k == l {
        0.5 * (indicator_expectation(coding, x, k) + indicator_expectation(coding, x_prime, k))
            - joint(coding, x, x_prime, k, k, kernels)
    } else {
        -0.5 * (joint(coding, x_prime, x, k, l, kernels) + joint(coding, x_prime, x, l, k, kernels))
    }
}

/// All `K²` point-pair values, row-major in `(k, l)`.
fn point_matrix(coding: &CodingFunction, x: usize, x_prime: usize, kernels: &[BivariateNormal], out: &mut [f64]) {
    let kk = coding.n_categories();
    let mut joint_kl = vec![0.0; kk * kk];
    for k in 0..kk {
        for l in 0..kk {
            joint_kl[k * kk + l] = joint(coding, x, x_prime, k, l, kernels);
        }
    }
    for k in 0..kk {
        let ek = 0.5 * (indicator_expectation(coding, x, k) + indicator_expectation(coding, x_prime, k));
        for l in 0..kk {
            out[k * kk + l] = if k == l {
                ek - joint_kl[k * kk + k]
            } else {
                -0.5 * (joint_kl[l * kk + k] + joint_kl[k * kk + l])
            };
        }
    }
}
