//! Standard-normal distribution functions, the exact binomial tail, and
//! effectiveness priors.
//!
//! `std_normal_cdf` is evaluated through the complementary error function so
//! both tails keep full relative precision. The quantile starts from a
//! rational approximation with relative error around 1e-9 and is polished
//! with a single Halley step against the cdf.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(domain(format!("{value} is not a probability")))
        }
    }

    /// Clamps `value` into `[0, 1]`; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Self(0.0)
        } else {
            Self(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// Unchecked `Φ(z)`.
#[inline]
pub(crate) fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Unchecked upper tail `1 - Φ(z)`, accurate for large positive `z`.
#[inline]
pub(crate) fn phi_upper(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Standard normal cumulative distribution function `Φ(z)`.
pub fn std_normal_cdf(z: f64) -> Result<Probability> {
    if !z.is_finite() {
        return Err(domain(format!(
            "std_normal_cdf requires finite input, got {z}"
        )));
    }
    Ok(Probability(phi(z)))
}

/// Upper-tail rational approximation coefficients (Acklam).
const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const ACKLAM_P_LOW: f64 = 0.02425;

/// Initial guess for `Φ⁻¹(p)` with `0 < p <= 0.5`.
fn quantile_initial(p: f64) -> f64 {
    let (a, b, c, d) = (ACKLAM_A, ACKLAM_B, ACKLAM_C, ACKLAM_D);
    if p < ACKLAM_P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    }
}

/// Unchecked `Φ⁻¹(p)` for `0 < p < 1`.
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p > 0.5 {
        // 1 - p is exact for p >= 0.5.
        return -quantile_unchecked(1.0 - p);
    }
    let x = quantile_initial(p);
    // Halley refinement against the lower tail.
    let e = phi(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Standard normal quantile `Φ⁻¹(p)` for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!(
            "std_normal_quantile requires 0 < p < 1, got {p}"
        )));
    }
    Ok(quantile_unchecked(p))
}

/// `P[X >= k]` for `X ~ Binomial(n, p)`.
///
/// Summation runs over the shorter side of the distribution in log space, so
/// tails far from the mode do not underflow before they are accumulated.
pub fn binomial_tail(n: u64, k: u64, p: f64) -> Result<Probability> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!(
            "binomial_tail requires p in [0, 1], got {p}"
        )));
    }
    if k == 0 {
        return Ok(Probability(1.0));
    }
    if k > n {
        return Ok(Probability(0.0));
    }
    if p == 0.0 {
        return Ok(Probability(0.0));
    }
    if p == 1.0 {
        return Ok(Probability(1.0));
    }
    let mean = n as f64 * p;
    if k as f64 >= mean {
        Ok(Probability::saturating(log_pmf_sum(n, k, n, p).exp()))
    } else {
        let lower = log_pmf_sum(n, 0, k - 1, p).exp();
        Ok(Probability::saturating(1.0 - lower))
    }
}

fn ln_choose(n: u64, i: u64) -> f64 {
    let (n, i) = (n as f64, i as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(i + 1.0) - libm::lgamma(n - i + 1.0)
}

/// `ln Σ_{i=from}^{to} C(n,i) p^i (1-p)^(n-i)` via a streaming log-sum-exp.
fn log_pmf_sum(n: u64, from: u64, to: u64, p: f64) -> f64 {
    let log_p = p.ln();
    let log_q = (-p).ln_1p();
    let log_odds = log_p - log_q;
    let mut term = ln_choose(n, from) + from as f64 * log_p + (n - from) as f64 * log_q;
    let mut max = term;
    let mut scaled = 1.0;
    for i in from..to {
        term += ((n - i) as f64 / (i + 1) as f64).ln() + log_odds;
        if term > max {
            scaled = scaled * (max - term).exp() + 1.0;
            max = term;
        } else {
            scaled += (term - max).exp();
        }
    }
    max + scaled.ln()
}

/// A distribution over agent effectiveness with bounded support.
pub trait EffectivenessPrior: Sync {
    fn pdf(&self, mu: f64) -> f64;
    fn cdf(&self, mu: f64) -> f64;
    /// Closed support `(lo, hi)`.
    fn support(&self) -> (f64, f64);
}

/// A normal distribution truncated to `[lo, hi] ⊂ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TruncatedNormalSpec", into = "TruncatedNormalSpec")]
pub struct TruncatedNormalPrior {
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    /// `Φ((lo - mean) / sd)`
    cdf_lo: f64,
    /// Parent-normal mass on `[lo, hi]`.
    mass: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruncatedNormalSpec {
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
}

impl TryFrom<TruncatedNormalSpec> for TruncatedNormalPrior {
    type Error = crate::Error;
    fn try_from(s: TruncatedNormalSpec) -> Result<Self> {
        Self::new(s.mean, s.sd, s.lo, s.hi)
    }
}

impl From<TruncatedNormalPrior> for TruncatedNormalSpec {
    fn from(p: TruncatedNormalPrior) -> Self {
        Self {
            mean: p.mean,
            sd: p.sd,
            lo: p.lo,
            hi: p.hi,
        }
    }
}

impl TruncatedNormalPrior {
    pub fn new(mean: f64, sd: f64, lo: f64, hi: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(invalid("prior.mean", "must be finite"));
        }
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(invalid("prior.sd", format!("must be positive, got {sd}")));
        }
        if !(lo > 0.0 && lo < 1.0) {
            return Err(invalid("prior.lo", format!("must lie in (0, 1), got {lo}")));
        }
        if !(hi > lo && hi < 1.0) {
            return Err(invalid(
                "prior.hi",
                format!("must lie in (lo, 1), got {hi}"),
            ));
        }
        let a = (lo - mean) / sd;
        let b = (hi - mean) / sd;
        // Difference taken in whichever tail keeps precision.
        let mass = if a > 0.0 {
            phi_upper(a) - phi_upper(b)
        } else {
            phi(b) - phi(a)
        };
        if !(mass > 0.0) {
            return Err(invalid(
                "prior",
                "support carries no mass under the parent normal",
            ));
        }
        Ok(Self {
            mean,
            sd,
            lo,
            hi,
            cdf_lo: phi(a),
            mass,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    /// Normalising mass of the parent normal on the support.
    pub fn mass(&self) -> f64 {
        self.mass
    }
}

impl EffectivenessPrior for TruncatedNormalPrior {
    fn pdf(&self, mu: f64) -> f64 {
        if mu < self.lo || mu > self.hi || mu.is_nan() {
            return 0.0;
        }
        std_normal_pdf((mu - self.mean) / self.sd) / (self.sd * self.mass)
    }

    fn cdf(&self, mu: f64) -> f64 {
        if mu.is_nan() || mu <= self.lo {
            return 0.0;
        }
        if mu >= self.hi {
            return 1.0;
        }
        let z = (mu - self.mean) / self.sd;
        let lo_z = (self.lo - self.mean) / self.sd;
        let raw = if lo_z > 0.0 {
            phi_upper(lo_z) - phi_upper(z)
        } else {
            phi(z) - self.cdf_lo
        };
        (raw / self.mass).clamp(0.0, 1.0)
    }

    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}
