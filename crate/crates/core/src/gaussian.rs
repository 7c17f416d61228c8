//! Univariate and bivariate standard normal probabilities.
//!
//! The bivariate orthant routine follows Genz's `BVND` (Drezner–Wesolowsky
//! reduction with Gauss–Legendre quadrature, plus the asymptotic expansion
//! for |ρ| ≥ 0.925). Quadrature nodes depend only on ρ, so they are computed
//! once per [`BivariateNormal`] and reused for every rectangle evaluated at
//! that correlation.
#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Half-width of the excluded neighbourhoods of ±1 for correlations.
pub const RHO_EPS: f64 = 1e-6;

/// Value returned by log-probabilities when the probability underflows.
pub const LOG_PROB_FLOOR: f64 = -745.0;

const TWO_PI: f64 = 2.0 * PI;

/// A real interval `[lower, upper)` whose ends may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub const WHOLE: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::Domain("interval bound is NaN".into()));
        }
        if lower >= upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "interval bounds must satisfy lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(Interval { lower, upper })
    }

    /// `(-inf, upper)`.
    pub fn below(upper: f64) -> Result<Self> {
        Self::new(f64::NEG_INFINITY, upper)
    }

    /// `[lower, +inf)`.
    pub fn above(lower: f64) -> Result<Self> {
        Self::new(lower, f64::INFINITY)
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }

    #[inline]
    pub fn is_whole(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    /// Half-open membership: a value on a boundary belongs to the interval
    /// that starts there.
    #[inline]
    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y < self.upper
    }

    /// Standard normal mass of the interval, computed on the tail side that
    /// avoids cancellation.
    pub fn prob(&self) -> f64 {
        if self.lower >= 0.0 {
            std_normal_sf(self.lower) - std_normal_sf(self.upper)
        } else {
            std_normal_cdf(self.upper) - std_normal_cdf(self.lower)
        }
    }
}

/// A correlation coefficient restricted to `[-1 + RHO_EPS, 1 - RHO_EPS]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Correlation(pub(crate) f64);

impl Correlation {
    pub const MAX: f64 = 1.0 - RHO_EPS;
    pub const MIN: f64 = -1.0 + RHO_EPS;
    pub const ZERO: Correlation = Correlation(0.0);

    /// Clamps `value` into the admissible range. NaN is rejected.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::Domain("correlation is NaN".into()));
        }
        Ok(Correlation(value.clamp(Self::MIN, Self::MAX)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (TWO_PI).sqrt()
}

/// Φ(x).
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// 1 − Φ(x), accurate in the upper tail.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Φ⁻¹(p) by Wichura's AS 241 (PPND16) followed by one Newton step.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "quantile requires p in (0, 1), got {p}"
        )));
    }
    let x = ppnd16(p);
    // One Newton correction on whichever tail is better conditioned.
    let resid = if x <= 0.0 {
        std_normal_cdf(x) - p
    } else {
        (1.0 - p) - std_normal_sf(x)
    };
    let dens = std_normal_pdf(x);
    if dens > 0.0 {
        Ok(x - resid / dens)
    } else {
        Ok(x)
    }
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_545_925,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

// Gauss–Legendre (weight, abscissa) pairs on [-1, 0] from Genz's tvpack.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

fn gauss_legendre(rho_abs: f64) -> &'static [(f64, f64)] {
    if rho_abs < 0.3 {
        &GL6
    } else if rho_abs < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// Precomputed quadrature for upper-orthant probabilities at one correlation.
#[derive(Debug, Clone)]
enum Orthant {
    /// |ρ| < 0.925: `(weight, sin θ, 1 / cos² θ)` at each node.
    Moderate { scale: f64, nodes: Vec<(f64, f64, f64)> },
    /// |ρ| ≥ 0.925: `(weight, x², sqrt(1 - x²))` at each node.
    Strong {
        negative: bool,
        a_sq: f64,
        a: f64,
        half_a: f64,
        nodes: Vec<(f64, f64, f64)>,
    },
}

impl Orthant {
    fn new(r: f64) -> Self {
        let quad = gauss_legendre(r.abs());
        if r.abs() < 0.925 {
            let asr = r.asin();
            let mut nodes = Vec::with_capacity(2 * quad.len());
            for &(w, x) in quad {
                for t in [x, -x] {
                    let sn = (asr * (t + 1.0) / 2.0).sin();
                    nodes.push((w, sn, 1.0 / (1.0 - sn * sn)));
                }
            }
            Orthant::Moderate {
                scale: asr / (2.0 * TWO_PI),
                nodes,
            }
        } else {
            let a_sq = (1.0 - r) * (1.0 + r);
            let a = a_sq.sqrt();
            let half_a = a / 2.0;
            let mut nodes = Vec::with_capacity(2 * quad.len());
            for &(w, x) in quad {
                for t in [x, -x] {
                    let xs = (half_a * (t + 1.0)).powi(2);
                    nodes.push((w, xs, (1.0 - xs).sqrt()));
                }
            }
            Orthant::Strong {
                negative: r < 0.0,
                a_sq,
                a,
                half_a,
                nodes,
            }
        }
    }

    /// P(X > h, Y > k) for finite h, k.
    fn eval(&self, h: f64, k: f64) -> f64 {
        match self {
            Orthant::Moderate { scale, nodes } => {
                let hk = h * k;
                let hs = (h * h + k * k) / 2.0;
                let sum: f64 = nodes
                    .iter()
                    .map(|&(w, sn, inv)| w * ((sn * hk - hs) * inv).exp())
                    .sum();
                sum * scale + std_normal_sf(h) * std_normal_sf(k)
            }
            Orthant::Strong {
                negative,
                a_sq,
                a,
                half_a,
                nodes,
            } => {
                let k = if *negative { -k } else { k };
                let hk = h * k;
                let bs = (h - k) * (h - k);
                let c = (4.0 - hk) / 8.0;
                let d = (12.0 - hk) / 16.0;
                let mut bvn = a
                    * (-(bs / a_sq + hk) / 2.0).exp()
                    * (1.0 - c * (bs - a_sq) * (1.0 - d * bs / 5.0) / 3.0
                        + c * d * a_sq * a_sq / 5.0);
                if hk > -160.0 {
                    let b = bs.sqrt();
                    bvn -= (-hk / 2.0).exp()
                        * TWO_PI.sqrt()
                        * std_normal_cdf(-b / a)
                        * b
                        * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
                }
                for &(w, xs, rs) in nodes {
                    let asr = -(bs / xs + hk) / 2.0;
                    if asr > -100.0 {
                        bvn += half_a
                            * w
                            * asr.exp()
                            * ((-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs
                                - (1.0 + c * xs * (1.0 + d * xs)));
                    }
                }
                bvn = -bvn / TWO_PI;
                if !*negative {
                    bvn + std_normal_sf(h.max(k))
                } else {
                    let mut out = -bvn;
                    if k > h {
                        if h < 0.0 {
                            out += std_normal_cdf(k) - std_normal_cdf(h);
                        } else {
                            out += std_normal_sf(h) - std_normal_sf(k);
                        }
                    }
                    out
                }
            }
        }
    }
}

/// Standard bivariate normal at a fixed correlation, prepared for repeated
/// rectangle evaluations.
#[derive(Debug, Clone)]
pub struct BivariateNormal {
    rho: Correlation,
    same: Orthant,
    flipped: Orthant,
}

impl BivariateNormal {
    pub fn new(rho: Correlation) -> Self {
        BivariateNormal {
            rho,
            same: Orthant::new(rho.value()),
            flipped: Orthant::new(-rho.value()),
        }
    }

    pub fn rho(&self) -> Correlation {
        self.rho
    }

    /// P(U ≥ h, V ≥ k). Infinite arguments are handled exactly.
    pub fn upper_orthant(&self, h: f64, k: f64) -> f64 {
        upper_orthant(&self.same, h, k)
    }

    /// P(U ∈ i1, V ∈ i2).
    pub fn rect_prob(&self, i1: &Interval, i2: &Interval) -> f64 {
        if i1.is_whole() {
            return i2.prob();
        }
        if i2.is_whole() {
            return i1.prob();
        }
        // Reflect each axis so that its interval sits on the upper side; the
        // inclusion–exclusion then works with small upper-tail masses.
        let (a1, b1, f1) = orient(i1);
        let (a2, b2, f2) = orient(i2);
        let kernel = if f1 != f2 { &self.flipped } else { &self.same };
        let p = upper_orthant(kernel, a1, a2) - upper_orthant(kernel, b1, a2)
            - upper_orthant(kernel, a1, b2)
            + upper_orthant(kernel, b1, b2);
        p.clamp(0.0, 1.0)
    }

    /// `ln P(U ∈ i1, V ∈ i2)`, floored at [`LOG_PROB_FLOOR`].
    pub fn log_rect_prob(&self, i1: &Interval, i2: &Interval) -> f64 {
        let p = self.rect_prob(i1, i2);
        if p > 0.0 {
            p.ln().max(LOG_PROB_FLOOR)
        } else {
            LOG_PROB_FLOOR
        }
    }
}

fn upper_orthant(kernel: &Orthant, h: f64, k: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return std_normal_sf(k);
    }
    if k == f64::NEG_INFINITY {
        return std_normal_sf(h);
    }
    kernel.eval(h, k).clamp(0.0, 1.0)
}

/// Returns `(a, b, reflected)` with `a` finite and `[a, b)` the interval on
/// the chosen side of the axis. Whole-line intervals must be handled first.
fn orient(i: &Interval) -> (f64, f64, bool) {
    let (lo, hi) = (i.lower(), i.upper());
    if lo == f64::NEG_INFINITY {
        (-hi, f64::INFINITY, true)
    } else if hi == f64::INFINITY || lo + hi >= 0.0 {
        (lo, hi, false)
    } else {
        (-hi, -lo, true)
    }
}

/// P(U ∈ i1, V ∈ i2) for a standard bivariate normal with correlation `rho`.
pub fn bivariate_rect_prob(i1: &Interval, i2: &Interval, rho: Correlation) -> f64 {
    BivariateNormal::new(rho).rect_prob(i1, i2)
}

/// Logarithm of [`bivariate_rect_prob`], floored at [`LOG_PROB_FLOOR`].
pub fn log_bivariate_rect_prob(i1: &Interval, i2: &Interval, rho: Correlation) -> f64 {
    BivariateNormal::new(rho).log_rect_prob(i1, i2)
}
