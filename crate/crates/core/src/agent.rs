//! The agent's side of the game: pass probability under the normal
//! approximation of the critical region, expected utility, the curvature
//! structure of utility in the sample count, and the best response.
//!
//! Throughout, with `σ0 = √(μ0(1-μ0))`, `σb = √(μb(1-μb))`, `Δμ = μ0 - μb`
//! and `d = Φ⁻¹(1-α)`, the pass probability of an `n`-sample trial is
//! `1 - Φ(v)` with `v = (d·σb - Δμ·√n) / σ0`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::special::{phi_upper, quantile_unchecked, std_normal_pdf};

/// Beliefs are kept this far from 0 and 1 so that `σ0 > 0`.
pub const BELIEF_CLAMP: f64 = 1e-6;
pub const DEFAULT_N_MIN: u64 = 1;
pub const DEFAULT_N_MAX: u64 = 100_000;
/// Largest range the exhaustive oracle will scan.
pub const BRUTEFORCE_MAX_RANGE: u64 = 1_000_000;

/// Revenue, trial costs, baseline effectiveness and admissible trial sizes.
///
/// Money is in whatever unit the caller chooses (the bundled drug presets use
/// millions of USD); only ratios matter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRaw", into = "InstanceRaw")]
pub struct EconomicInstance {
    revenue: f64,
    fixed_cost: f64,
    sample_cost: f64,
    baseline: f64,
    n_min: u64,
    n_max: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct InstanceRaw {
    #[serde(rename = "R")]
    pub revenue: f64,
    pub c0: f64,
    pub c: f64,
    pub mu_b: f64,
    #[serde(default = "default_n_min")]
    pub n_min: u64,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
}

fn default_n_min() -> u64 {
    DEFAULT_N_MIN
}

fn default_n_max() -> u64 {
    DEFAULT_N_MAX
}

impl InstanceRaw {
    /// Every invariant violation as `(field, reason)`.
    pub(crate) fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.revenue > 0.0 && self.revenue.is_finite()) {
            out.push((
                "R",
                format!("must be positive and finite, got {}", self.revenue),
            ));
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            out.push((
                "c0",
                format!("must be non-negative and finite, got {}", self.c0),
            ));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            out.push((
                "c",
                format!("must be non-negative and finite, got {}", self.c),
            ));
        }
        if !(self.mu_b > 0.0 && self.mu_b < 1.0) {
            out.push(("mu_b", format!("must lie in (0, 1), got {}", self.mu_b)));
        }
        if self.n_min < 1 {
            out.push(("n_min", "must be at least 1".to_string()));
        }
        if self.n_max < self.n_min {
            out.push((
                "n_max",
                format!("must be >= n_min ({}), got {}", self.n_min, self.n_max),
            ));
        }
        out
    }
}

impl TryFrom<InstanceRaw> for EconomicInstance {
    type Error = Error;
    fn try_from(raw: InstanceRaw) -> Result<Self> {
        if let Some((field, reason)) = raw.violations().into_iter().next() {
            return Err(invalid(field, reason));
        }
        Ok(Self {
            revenue: raw.revenue,
            fixed_cost: raw.c0,
            sample_cost: raw.c,
            baseline: raw.mu_b,
            n_min: raw.n_min,
            n_max: raw.n_max,
        })
    }
}

impl From<EconomicInstance> for InstanceRaw {
    fn from(i: EconomicInstance) -> Self {
        Self {
            revenue: i.revenue,
            c0: i.fixed_cost,
            c: i.sample_cost,
            mu_b: i.baseline,
            n_min: i.n_min,
            n_max: i.n_max,
        }
    }
}

impl EconomicInstance {
    /// An instance with the default sample bounds `[1, 100000]`.
    pub fn new(revenue: f64, fixed_cost: f64, sample_cost: f64, baseline: f64) -> Result<Self> {
        InstanceRaw {
            revenue,
            c0: fixed_cost,
            c: sample_cost,
            mu_b: baseline,
            n_min: DEFAULT_N_MIN,
            n_max: DEFAULT_N_MAX,
        }
        .try_into()
    }

    pub fn with_sample_bounds(self, n_min: u64, n_max: u64) -> Result<Self> {
        let mut raw = InstanceRaw::from(self);
        raw.n_min = n_min;
        raw.n_max = n_max;
        raw.try_into()
    }

    pub fn with_revenue(self, revenue: f64) -> Result<Self> {
        let mut raw = InstanceRaw::from(self);
        raw.revenue = revenue;
        raw.try_into()
    }

    pub fn with_fixed_cost(self, fixed_cost: f64) -> Result<Self> {
        let mut raw = InstanceRaw::from(self);
        raw.c0 = fixed_cost;
        raw.try_into()
    }

    pub fn revenue(&self) -> f64 {
        self.revenue
    }

    pub fn fixed_cost(&self) -> f64 {
        self.fixed_cost
    }

    pub fn sample_cost(&self) -> f64 {
        self.sample_cost
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn n_min(&self) -> u64 {
        self.n_min
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Cost of a trial with `n` samples; zero when abstaining.
    pub fn cost(&self, n: u64) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.fixed_cost + self.sample_cost * n as f64
        }
    }
}

/// An agent's private mean effectiveness `μ0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AgentBelief(f64);

impl AgentBelief {
    /// Rejects beliefs outside `[BELIEF_CLAMP, 1 - BELIEF_CLAMP]`.
    pub fn new(mu0: f64) -> Result<Self> {
        if (BELIEF_CLAMP..=1.0 - BELIEF_CLAMP).contains(&mu0) {
            Ok(Self(mu0))
        } else {
            Err(domain(format!(
                "belief {mu0} outside [{BELIEF_CLAMP}, {}]",
                1.0 - BELIEF_CLAMP
            )))
        }
    }

    /// Projects `mu0` into the admissible range.
    pub fn clamped(mu0: f64) -> Self {
        Self(mu0.clamp(BELIEF_CLAMP, 1.0 - BELIEF_CLAMP))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    fn sd(self) -> f64 {
        (self.0 * (1.0 - self.0)).sqrt()
    }
}

/// An agent's optimal decision for a released p-value threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    pub participates: bool,
    /// 0 when abstaining.
    pub n_star: u64,
    pub pass_prob: f64,
    pub utility: f64,
}

impl BestResponse {
    fn abstain() -> Self {
        Self {
            participates: false,
            n_star: 0,
            pass_prob: 0.0,
            utility: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Concave,
    Convex,
}

/// A real interval of sample counts on which utility has a fixed curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureRegion {
    pub start: f64,
    pub end: f64,
    pub curvature: Curvature,
}

/// Ordered, disjoint curvature regions covering `[n_min, n_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureRegions {
    pub regions: Vec<CurvatureRegion>,
    /// Inflection points in `n` before clamping (the squares of the positive
    /// roots in `t = √n`).
    pub inflections: Vec<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "p-value threshold must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Minimum success count `n·μb + Φ⁻¹(1-α)·√(n·μb(1-μb))` needed to reject
/// the null under the normal approximation.
pub fn critical_region(alpha: f64, n: u64, mu_b: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(domain("critical region needs at least one sample"));
    }
    if !(mu_b > 0.0 && mu_b < 1.0) {
        return Err(domain(format!("baseline must lie in (0, 1), got {mu_b}")));
    }
    let n = n as f64;
    let d = -quantile_unchecked(alpha);
    Ok(n * mu_b + d * (n * mu_b * (1.0 - mu_b)).sqrt())
}

/// Precomputed per-(α, μ0, instance) quantities for fast repeated
/// evaluation over `n`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AgentProblem {
    /// `d·σb/σ0`
    offset: f64,
    /// `Δμ/σ0`
    drift: f64,
    delta: f64,
    sigma0: f64,
    sigma_b: f64,
    d: f64,
    revenue: f64,
    fixed_cost: f64,
    sample_cost: f64,
    n_min: u64,
    n_max: u64,
}

impl AgentProblem {
    pub(crate) fn new(alpha: f64, mu0: AgentBelief, inst: &EconomicInstance) -> Self {
        let d = -quantile_unchecked(alpha);
        Self::with_quantile(d, mu0, inst)
    }

    pub(crate) fn with_quantile(d: f64, mu0: AgentBelief, inst: &EconomicInstance) -> Self {
        let sigma0 = mu0.sd();
        let sigma_b = (inst.baseline * (1.0 - inst.baseline)).sqrt();
        let delta = mu0.get() - inst.baseline;
        Self {
            offset: d * sigma_b / sigma0,
            drift: delta / sigma0,
            delta,
            sigma0,
            sigma_b,
            d,
            revenue: inst.revenue,
            fixed_cost: inst.fixed_cost,
            sample_cost: inst.sample_cost,
            n_min: inst.n_min,
            n_max: inst.n_max,
        }
    }

    #[inline]
    fn argument(&self, n: f64) -> f64 {
        self.offset - self.drift * n.sqrt()
    }

    #[inline]
    pub(crate) fn n_min(&self) -> u64 {
        self.n_min
    }

    pub(crate) fn n_max(&self) -> u64 {
        self.n_max
    }

    pub(crate) fn pass(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        phi_upper(self.argument(n as f64))
    }

    #[inline]
    pub(crate) fn utility(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.revenue * self.pass(n) - (self.fixed_cost + self.sample_cost * n as f64)
    }

    /// Pass probability at a real sample size.
    pub(crate) fn pass_real(&self, n: f64) -> f64 {
        phi_upper(self.argument(n))
    }

    /// Stationary point of the real relaxation within one step of the
    /// integer optimum `n`, if utility rises into it and falls after it.
    pub(crate) fn relaxed_optimum(&self, n: u64) -> Option<f64> {
        if n <= self.n_min || n >= self.n_max {
            return None;
        }
        let (mut lo, mut hi) = ((n - 1) as f64, (n + 1) as f64);
        if !(self.slope(lo) > 0.0 && self.slope(hi) < 0.0) {
            return None;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-9 * hi {
                break;
            }
            if self.slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    fn slope(&self, n: f64) -> f64 {
        let v = self.argument(n);
        self.revenue * self.delta / (2.0 * self.sigma0 * n.sqrt()) * std_normal_pdf(v)
            - self.sample_cost
    }

    /// Curvature regions of utility on the real relaxation, for `Δμ > 0`.
    fn curvature(&self) -> CurvatureRegions {
        // With w = (Δμ·t - dσb)/σ0 and t = √n, u'' has the sign of
        // -(w·Δμ·t/σ0 + 1), whose roots solve t² - (dσb/Δμ)t + σ0²/Δμ² = 0.
        let b = self.d * self.sigma_b / self.delta;
        let c = (self.sigma0 / self.delta).powi(2);
        let disc = b * b - 4.0 * c;
        let mut roots: Vec<f64> = Vec::new();
        if disc > 0.0 && c.is_finite() {
            let s = disc.sqrt();
            // Numerically stable pair.
            let q = -0.5 * (-b - b.signum() * s);
            let (r1, r2) = if q != 0.0 { (q, c / q) } else { (0.0, 0.0) };
            let (r1, r2) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            roots = [r1, r2].into_iter().filter(|t| *t > 0.0).collect();
        }
        let inflections: Vec<f64> = roots.iter().map(|t| t * t).collect();
        // Piecewise labels on [0, ∞): the quadratic is positive (convex)
        // strictly between its roots.
        let pieces: Vec<(f64, f64, Curvature)> = match inflections.as_slice() {
            [] => vec![(0.0, f64::INFINITY, Curvature::Concave)],
            [a] => vec![
                (0.0, *a, Curvature::Convex),
                (*a, f64::INFINITY, Curvature::Concave),
            ],
            [a, b, ..] => vec![
                (0.0, *a, Curvature::Concave),
                (*a, *b, Curvature::Convex),
                (*b, f64::INFINITY, Curvature::Concave),
            ],
        };
        let lo = self.n_min as f64;
        let hi = self.n_max as f64;
        let mut regions: Vec<CurvatureRegion> = pieces
            .iter()
            .filter_map(|&(s, e, curvature)| {
                let start = s.max(lo);
                let end = e.min(hi);
                (start < end).then_some(CurvatureRegion {
                    start,
                    end,
                    curvature,
                })
            })
            .collect();
        if regions.is_empty() {
            // n_min == n_max: the single point belongs to whichever piece
            // contains it.
            let curvature = pieces
                .iter()
                .find(|(s, e, _)| *s <= lo && lo <= *e)
                .map(|p| p.2)
                .unwrap_or(Curvature::Concave);
            regions.push(CurvatureRegion {
                start: lo,
                end: hi,
                curvature,
            });
        }
        CurvatureRegions {
            regions,
            inflections,
        }
    }

    /// First `k` in `[a, b)` with `u(k+1) - u(k) <= 0`, else `b`.
    fn concave_argmax(&self, a: u64, b: u64) -> u64 {
        let (mut lo, mut hi) = (a, b);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.utility(mid + 1) - self.utility(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Utility-maximising participating sample count, ignoring whether the
    /// agent would rather abstain. Ties go to the smaller `n`.
    pub(crate) fn best_participating(&self) -> (u64, f64) {
        if self.delta <= 0.0 || self.n_min == self.n_max {
            // Pass is non-increasing in n at or below the baseline.
            return (self.n_min, self.utility(self.n_min));
        }
        let mut candidates: Vec<u64> = vec![self.n_min, self.n_max];
        let curvature = self.curvature();
        let clamp = |x: f64| (x.max(self.n_min as f64).min(self.n_max as f64)) as u64;
        for &root in &curvature.inflections {
            candidates.push(clamp(root.floor()));
            candidates.push(clamp(root.ceil()));
        }
        for region in &curvature.regions {
            let a = clamp(region.start.ceil());
            let b = clamp(region.end.floor());
            if a > b {
                continue;
            }
            match region.curvature {
                Curvature::Concave => candidates.push(self.concave_argmax(a, b)),
                Curvature::Convex => {
                    candidates.push(a);
                    candidates.push(b);
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut best = (candidates[0], self.utility(candidates[0]));
        for &n in &candidates[1..] {
            let u = self.utility(n);
            if u > best.1 {
                best = (n, u);
            }
        }
        best
    }

    pub(crate) fn best_response(&self) -> BestResponse {
        let (n, u) = self.best_participating();
        if u >= 0.0 {
            BestResponse {
                participates: true,
                n_star: n,
                pass_prob: self.pass(n),
                utility: u,
            }
        } else {
            BestResponse::abstain()
        }
    }
}

/// Probability that an `n`-sample trial by an agent with belief `mu0` clears
/// the critical region. Zero for `n = 0`.
pub fn pass_probability(alpha: f64, mu0: AgentBelief, n: u64, mu_b: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(mu_b > 0.0 && mu_b < 1.0) {
        return Err(domain(format!("baseline must lie in (0, 1), got {mu_b}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let d = -quantile_unchecked(alpha);
    let sigma_b = (mu_b * (1.0 - mu_b)).sqrt();
    let sigma0 = mu0.sd();
    let v = (d * sigma_b - (mu0.get() - mu_b) * (n as f64).sqrt()) / sigma0;
    Ok(phi_upper(v))
}

/// Expected utility `R·Pass - 1{n≠0}(c0 + c·n)`.
pub fn utility(alpha: f64, mu0: AgentBelief, n: u64, inst: &EconomicInstance) -> Result<f64> {
    check_alpha(alpha)?;
    if n != 0 && (n < inst.n_min || n > inst.n_max) {
        return Err(domain(format!(
            "sample count {n} outside {{0}} ∪ [{}, {}]",
            inst.n_min, inst.n_max
        )));
    }
    Ok(AgentProblem::new(alpha, mu0, inst).utility(n))
}

/// Derivative of utility in a real-valued sample count, for `μ0 > μb`.
pub fn utility_slope(alpha: f64, mu0: AgentBelief, n: f64, inst: &EconomicInstance) -> Result<f64> {
    check_alpha(alpha)?;
    if !(n > 0.0 && n.is_finite()) {
        return Err(domain(format!(
            "slope needs a positive sample count, got {n}"
        )));
    }
    if mu0.get() <= inst.baseline {
        return Err(domain("utility slope is only defined above the baseline"));
    }
    Ok(AgentProblem::new(alpha, mu0, inst).slope(n))
}

/// Concave/convex partition of `[n_min, n_max]` for an effective agent.
pub fn curvature_regions(
    alpha: f64,
    mu0: AgentBelief,
    inst: &EconomicInstance,
) -> Result<CurvatureRegions> {
    check_alpha(alpha)?;
    if mu0.get() <= inst.baseline {
        return Err(domain(
            "curvature analysis is only defined above the baseline",
        ));
    }
    Ok(AgentProblem::new(alpha, mu0, inst).curvature())
}

/// The agent's participation decision and optimal trial size.
///
/// Below the baseline, pass probability falls with `n`, so only `n_min` is a
/// candidate. Above it, each concave region is searched by bisection on the
/// sign of the forward difference and each convex region contributes its
/// endpoints; the integers around each inflection point are added too.
/// Participation requires non-negative utility.
pub fn best_response(
    alpha: f64,
    mu0: AgentBelief,
    inst: &EconomicInstance,
) -> Result<BestResponse> {
    check_alpha(alpha)?;
    Ok(AgentProblem::new(alpha, mu0, inst).best_response())
}

/// Exhaustive best response over `{0} ∪ [n_min, n_max]`; the reference
/// against which `best_response` is checked.
pub fn best_response_bruteforce(
    alpha: f64,
    mu0: AgentBelief,
    inst: &EconomicInstance,
) -> Result<BestResponse> {
    check_alpha(alpha)?;
    let range = inst.n_max - inst.n_min;
    if range > BRUTEFORCE_MAX_RANGE {
        return Err(Error::Refused(format!(
            "exhaustive scan over {range} sample counts exceeds {BRUTEFORCE_MAX_RANGE}"
        )));
    }
    let problem = AgentProblem::new(alpha, mu0, inst);
    let mut best_n = inst.n_min;
    let mut best_u = problem.utility(best_n);
    for n in inst.n_min + 1..=inst.n_max {
        let u = problem.utility(n);
        if u > best_u {
            best_n = n;
            best_u = u;
        }
    }
    if best_u >= 0.0 {
        Ok(BestResponse {
            participates: true,
            n_star: best_n,
            pass_prob: problem.pass(best_n),
            utility: best_u,
        })
    } else {
        Ok(BestResponse::abstain())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::phi;

    fn worked_instance() -> EconomicInstance {
        EconomicInstance::new(1.0, 0.05, 0.002, 0.5)
            .unwrap()
            .with_sample_bounds(1, 500)
            .unwrap()
    }

    fn b(mu: f64) -> AgentBelief {
        AgentBelief::new(mu).unwrap()
    }

    #[test]
    fn instance_validation() {
        assert!(EconomicInstance::new(0.0, 0.0, 0.0, 0.5).is_err());
        assert!(EconomicInstance::new(1.0, -1.0, 0.0, 0.5).is_err());
        assert!(EconomicInstance::new(1.0, 0.0, -0.1, 0.5).is_err());
        assert!(EconomicInstance::new(1.0, 0.0, 0.0, 1.0).is_err());
        let i = EconomicInstance::new(1.0, 0.0, 0.0, 0.5).unwrap();
        assert!(i.with_sample_bounds(0, 5).is_err());
        assert!(i.with_sample_bounds(6, 5).is_err());
        assert_eq!(i.n_min(), 1);
        assert_eq!(i.n_max(), 100_000);
    }

    #[test]
    fn belief_clamp() {
        assert!(AgentBelief::new(0.0).is_err());
        assert!(AgentBelief::new(1.0).is_err());
        assert!(AgentBelief::new(1e-7).is_err());
        assert_eq!(AgentBelief::clamped(2.0).get(), 1.0 - BELIEF_CLAMP);
    }

    #[test]
    fn critical_region_examples() {
        assert!((critical_region(0.5, 64, 0.5).unwrap() - 32.0).abs() < 1e-12);
        assert!((critical_region(0.05, 100, 0.5).unwrap() - 58.224_268).abs() < 1e-4);
        assert!((critical_region(0.05, 400, 0.5).unwrap() - 216.448_536).abs() < 1e-4);
        assert!(critical_region(0.0, 10, 0.5).is_err());
        assert!(critical_region(1.0, 10, 0.5).is_err());
    }

    #[test]
    fn critical_region_decreases_in_alpha() {
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let z = critical_region(i as f64 / 100.0, 50, 0.3).unwrap();
            assert!(z < prev);
            prev = z;
        }
    }

    #[test]
    fn pass_probability_examples() {
        for mu in [0.1, 0.5, 0.9] {
            assert_eq!(pass_probability(0.05, b(mu), 0, 0.5).unwrap(), 0.0);
        }
        for n in [1, 100, 10_000] {
            let p = pass_probability(0.05, b(0.5), n, 0.5).unwrap();
            assert!((p - 0.05).abs() < 1e-12, "n={n} p={p}");
        }
        // scipy: norm.sf(1.678775 - 2.041241)
        let p = pass_probability(0.05, b(0.6), 100, 0.5).unwrap();
        assert!((p - 0.641_499_487_271_636).abs() < 1e-9, "{p}");
    }

    #[test]
    fn utility_examples() {
        let inst = worked_instance();
        assert_eq!(utility(0.05, b(0.6), 0, &inst).unwrap(), 0.0);
        let u = utility(0.05, b(0.6), 100, &inst).unwrap();
        assert!((u - 0.391_499_487_271_636).abs() < 1e-9, "{u}");
        let u = utility(0.05, b(0.5), 1, &inst).unwrap();
        assert!((u - (0.05 - 0.05 - 0.002)).abs() < 1e-12);
        assert!(utility(0.05, b(0.6), 501, &inst).is_err());
        let narrow = inst.with_sample_bounds(10, 20).unwrap();
        assert!(utility(0.05, b(0.6), 5, &narrow).is_err());
    }

    #[test]
    fn utility_slope_examples() {
        let inst = worked_instance();
        let s = utility_slope(0.05, b(0.6), 100.5, &inst).unwrap();
        assert!(s > 0.0);
        let fd =
            utility(0.05, b(0.6), 101, &inst).unwrap() - utility(0.05, b(0.6), 100, &inst).unwrap();
        assert!((s - fd).abs() < 1e-7, "{s} vs {fd}");
        let s = utility_slope(0.05, b(0.5 + 1e-12), 50.0, &inst).unwrap();
        assert!((s + 0.002).abs() < 1e-9);
        let free = EconomicInstance::new(1.0, 0.0, 0.0, 0.5).unwrap();
        for n in [1.0, 10.0, 1e3, 1e5] {
            assert!(utility_slope(0.05, b(0.7), n, &free).unwrap() >= 0.0);
        }
        let far = utility_slope(0.05, b(0.6), 1e12, &inst).unwrap();
        assert!((far + 0.002).abs() < 1e-12);
        assert!(utility_slope(0.05, b(0.5), 10.0, &inst).is_err());
        assert!(utility_slope(0.05, b(0.4), 10.0, &inst).is_err());
    }

    #[test]
    fn curvature_single_concave() {
        let inst = worked_instance();
        let r = curvature_regions(0.05, b(0.6), &inst).unwrap();
        assert_eq!(r.regions.len(), 1);
        assert_eq!(r.regions[0].curvature, Curvature::Concave);
        assert_eq!((r.regions[0].start, r.regions[0].end), (1.0, 500.0));
        assert!(r.inflections.is_empty());
    }

    #[test]
    fn curvature_two_roots() {
        let inst = EconomicInstance::new(1.0, 0.0, 0.0, 0.5).unwrap();
        let r = curvature_regions(0.001, b(0.99), &inst).unwrap();
        // Sign changes of a numerical second difference of Pass in n
        // (scipy): n ≈ 1.724e-4 and n ≈ 9.8607.
        assert_eq!(r.inflections.len(), 2);
        assert!(
            (r.inflections[0] - 1.724_17e-4).abs() < 1e-8,
            "{:?}",
            r.inflections
        );
        assert!(
            (r.inflections[1] - 9.860_65).abs() < 1e-4,
            "{:?}",
            r.inflections
        );
        // The leading concave piece lies below n_min and is dropped.
        let kinds: Vec<_> = r.regions.iter().map(|x| x.curvature).collect();
        assert_eq!(kinds, vec![Curvature::Convex, Curvature::Concave]);
        assert_eq!(r.regions[0].start, 1.0);
        assert_eq!(r.regions[1].end, 1e5);
    }

    #[test]
    fn curvature_labels_match_second_difference() {
        let inst = EconomicInstance::new(1.0, 0.0, 0.0, 0.5).unwrap();
        for (alpha, mu) in [(0.001, 0.99), (0.01, 0.9), (0.05, 0.999_999), (0.2, 0.7)] {
            let r = curvature_regions(alpha, b(mu), &inst).unwrap();
            let pass = |n: f64| {
                let sb = 0.25f64.sqrt();
                let s0 = (mu * (1.0 - mu)).sqrt();
                let d = -quantile_unchecked(alpha);
                1.0 - phi((d * sb - (mu - 0.5) * n.sqrt()) / s0)
            };
            for reg in &r.regions {
                let (a, e) = (reg.start, reg.end.min(1e4));
                if e - a < 0.2 {
                    continue;
                }
                let n = 0.5 * (a + e);
                let h = 1e-2 * n.min(1.0);
                let second = pass(n + h) - 2.0 * pass(n) + pass(n - h);
                match reg.curvature {
                    Curvature::Convex => assert!(second >= -1e-15, "{alpha} {mu} {n} {second}"),
                    Curvature::Concave => assert!(second <= 1e-15, "{alpha} {mu} {n} {second}"),
                }
            }
        }
    }

    #[test]
    fn curvature_tiny_effect_is_concave() {
        let inst = EconomicInstance::new(1.0, 0.0, 0.0, 0.5).unwrap();
        let r = curvature_regions(0.05, b(0.5 + 1e-9), &inst).unwrap();
        assert_eq!(r.regions.len(), 1);
        assert_eq!(r.regions[0].curvature, Curvature::Concave);
        assert!(curvature_regions(0.05, b(0.5), &inst).is_err());
    }

    #[test]
    fn curvature_regions_cover_bounds() {
        let inst = EconomicInstance::new(1.0, 0.0, 0.0, 0.3)
            .unwrap()
            .with_sample_bounds(1, 4)
            .unwrap();
        for alpha in [1e-4, 1e-3, 0.01, 0.2] {
            for mu in [0.31, 0.5, 0.9, 0.999] {
                let r = curvature_regions(alpha, b(mu), &inst).unwrap();
                assert!(r.regions.len() <= 3);
                assert_eq!(r.regions.first().unwrap().start, 1.0);
                assert_eq!(r.regions.last().unwrap().end, 4.0);
                for w in r.regions.windows(2) {
                    assert_eq!(w[0].end, w[1].start);
                    assert_ne!(w[0].curvature, w[1].curvature);
                }
            }
        }
    }

    #[test]
    fn best_response_worked_instance() {
        let inst = worked_instance();
        let br = best_response(0.05, b(0.6), &inst).unwrap();
        // Exhaustive scan over n ∈ [1, 500]: u(166) = 0.4472444943, u(167) = 0.4472442017.
        assert!(br.participates);
        assert_eq!(br.n_star, 166);
        assert!((br.utility - 0.447_244_494_322_51).abs() < 1e-9);
        assert!((br.pass_prob - 0.829_244_494_322_51).abs() < 1e-9);
    }

    #[test]
    fn best_response_ineffective_uses_n_min() {
        let inst = worked_instance();
        let br = best_response(0.05, b(0.3), &inst).unwrap();
        let u_min = utility(0.05, b(0.3), 1, &inst).unwrap();
        assert!(u_min < 0.0);
        assert!(!br.participates);
        assert_eq!(br.n_star, 0);
        let rich = inst.with_revenue(100.0).unwrap();
        let br = best_response(0.05, b(0.3), &rich).unwrap();
        assert!(br.participates);
        assert_eq!(br.n_star, 1);
    }

    #[test]
    fn best_response_at_baseline() {
        // Participation iff R·α >= c0 + c·n_min.
        let inst = EconomicInstance::new(1.0, 0.04, 0.002, 0.5).unwrap();
        let br = best_response(0.05, b(0.5), &inst).unwrap();
        assert!(br.participates);
        assert_eq!(br.n_star, 1);
        let inst = EconomicInstance::new(1.0, 0.049, 0.002, 0.5).unwrap();
        assert!(!best_response(0.05, b(0.5), &inst).unwrap().participates);
    }

    #[test]
    fn best_response_zero_utility_participates() {
        // R·α = c0 exactly with free samples.
        let inst = EconomicInstance::new(1.0, 0.5, 0.0, 0.5)
            .unwrap()
            .with_sample_bounds(3, 3)
            .unwrap();
        let br = best_response(0.5, b(0.5), &inst).unwrap();
        assert_eq!(br.utility, 0.0);
        assert!(br.participates);
        assert_eq!(br.n_star, 3);
    }

    #[test]
    fn best_response_two_point_domain() {
        let inst = EconomicInstance::new(1.0, 0.05, 0.002, 0.5)
            .unwrap()
            .with_sample_bounds(10, 10)
            .unwrap();
        for mu in [0.2, 0.5, 0.55, 0.8] {
            let br = best_response(0.05, b(mu), &inst).unwrap();
            let bf = best_response_bruteforce(0.05, b(mu), &inst).unwrap();
            assert!(br.n_star == 0 || br.n_star == 10);
            assert_eq!(br, bf);
        }
    }

    #[test]
    fn bruteforce_guard_and_free_samples() {
        let big = EconomicInstance::new(1.0, 0.0, 0.0, 0.5)
            .unwrap()
            .with_sample_bounds(1, 2_000_000)
            .unwrap();
        assert!(matches!(
            best_response_bruteforce(0.05, b(0.6), &big),
            Err(Error::Refused(_))
        ));
        let free = EconomicInstance::new(1.0, 0.0, 0.0, 0.5)
            .unwrap()
            .with_sample_bounds(1, 1000)
            .unwrap();
        let bf = best_response_bruteforce(0.05, b(0.6), &free).unwrap();
        assert!(bf.participates && bf.utility > 0.0);
    }

    #[test]
    fn best_response_matches_bruteforce_on_convex_instance() {
        let inst = EconomicInstance::new(10.0, 0.1, 0.05, 0.5)
            .unwrap()
            .with_sample_bounds(1, 300)
            .unwrap();
        for alpha in [1e-4, 1e-3, 0.01] {
            for mu in [0.9, 0.95, 0.99] {
                let br = best_response(alpha, b(mu), &inst).unwrap();
                let bf = best_response_bruteforce(alpha, b(mu), &inst).unwrap();
                assert!(
                    (br.utility - bf.utility).abs() <= 1e-9 * 10.0,
                    "{br:?} {bf:?}"
                );
            }
        }
    }
}
