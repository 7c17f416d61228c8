//! Bounded scalar maximization: a coarse uniform scan picks the bracketing
//! triple, golden-section search refines it, and a single parabolic step
//! polishes the result. The returned point is the best of all evaluations.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy)]
pub struct GoldenSearch {
    /// Number of uniformly spaced scan points, ends included. At least 3.
    pub grid_points: usize,
    /// Target width of the final bracket.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GoldenSearch {
    fn default() -> Self {
        GoldenSearch {
            grid_points: 21,
            tolerance: 1e-4,
            max_iterations: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptimum {
    pub x: f64,
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Tracker<F> {
    f: F,
    best: (f64, f64),
    evaluations: usize,
}

impl<F: FnMut(f64) -> f64> Tracker<F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        let v = (self.f)(x);
        self.evaluations += 1;
        if !v.is_finite() {
            return Err(Error::Numerical(format!("objective is {v} at x = {x}")));
        }
        if v > self.best.1 {
            self.best = (x, v);
        }
        Ok(v)
    }
}

impl GoldenSearch {
    /// Maximizes `f` over `[lo, hi]`.
    pub fn maximize<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> Result<ScalarOptimum> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Domain(format!("invalid search interval [{lo}, {hi}]")));
        }
        let m = self.grid_points.max(3);
        let mut t = Tracker {
            f,
            best: (f64::NAN, f64::NEG_INFINITY),
            evaluations: 0,
        };

        let grid: Vec<f64> = (0..m)
            .map(|i| {
                if i == m - 1 {
                    hi
                } else {
                    lo + (hi - lo) * (i as f64 / (m - 1) as f64)
                }
            })
            .collect();
        let mut values = Vec::with_capacity(m);
        for &x in &grid {
            values.push(t.eval(x)?);
        }
        // First maximum wins ties so the result does not depend on float noise
        // further along the grid.
        let mut i_best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[i_best] {
                i_best = i;
            }
        }
        let ia = i_best.saturating_sub(1);
        let ib = (i_best + 1).min(m - 1);
        let (mut a, mut b) = (grid[ia], grid[ib]);
        let (mut fa, mut fb) = (values[ia], values[ib]);

        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = t.eval(c)?;
        let mut fd = t.eval(d)?;
        let mut iterations = 0;
        while b - a > self.tolerance && iterations < self.max_iterations {
            if fc >= fd {
                b = d;
                fb = fd;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = t.eval(c)?;
            } else {
                a = c;
                fa = fc;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = t.eval(d)?;
            }
            iterations += 1;
        }
        let converged = b - a <= self.tolerance;

        let (x0, f0, x1, f1, x2, f2) = if fc >= fd {
            (a, fa, c, fc, d, fd)
        } else {
            (c, fc, d, fd, b, fb)
        };
        if let Some(xv) = parabola_vertex(x0, f0, x1, f1, x2, f2) {
            if xv > a && xv < b {
                t.eval(xv)?;
            }
        }

        Ok(ScalarOptimum {
            x: t.best.0,
            value: t.best.1,
            converged,
            evaluations: t.evaluations,
        })
    }

    /// Minimizes `f` over `[lo, hi]`.
    pub fn minimize<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> Result<ScalarOptimum> {
        let r = self.maximize(lo, hi, |x| -f(x))?;
        Ok(ScalarOptimum {
            value: -r.value,
            ..r
        })
    }
}

fn parabola_vertex(x0: f64, f0: f64, x1: f64, f1: f64, x2: f64, f2: f64) -> Option<f64> {
    let p = (x1 - x0) * (f1 - f2);
    let q = (x1 - x2) * (f1 - f0);
    let denom = 2.0 * (p - q);
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    let v = x1 - ((x1 - x0) * p - (x1 - x2) * q) / denom;
    v.is_finite().then_some(v)
}
