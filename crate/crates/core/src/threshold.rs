//! Participation threshold `μτ(α)` and the critical p-value `α̂`.
//!
//! Both are found by bisection. Participation is monotone in the belief for a
//! fixed `α`, and `μτ(α)` is non-increasing in `α`, so each predicate is a
//! step function of its search variable.

use serde::Serialize;

use crate::agent::{AgentBelief, AgentProblem, EconomicInstance, BELIEF_CLAMP};
use crate::error::{domain, Result};
use crate::special::quantile_unchecked;

pub const DEFAULT_EPS: f64 = 1e-6;

/// Extra bisection rounds allowed in the outer search while `μτ(α̂)` is not
/// yet within `eps` of the baseline.
const MAX_REFINEMENT_ROUNDS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdClamp {
    /// Even the lowest admissible belief participates.
    EveryoneParticipates,
    /// Even the highest admissible belief abstains.
    NobodyParticipates,
}

/// `μτ(α)` together with the final bisection bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParticipationThreshold {
    pub mu_tau: f64,
    /// Width of the final bracket.
    pub epsilon: f64,
    /// Highest belief known to abstain.
    pub lower: f64,
    /// Lowest belief known to participate.
    pub upper: f64,
    pub clamp: Option<ThresholdClamp>,
    /// Number of best-response evaluations performed.
    pub evaluations: u32,
}

impl ParticipationThreshold {
    /// Whether an agent with belief `mu` is at or above the threshold.
    /// Beliefs inside the final bracket, and clamped searches, are resolved
    /// with one more best response: for `α > 1/2` the normal approximation
    /// lets near-zero beliefs pass with certainty, so a clamp at the lower
    /// end does not imply that every belief participates.
    fn admits(&self, mu: f64, alpha_quantile: f64, inst: &EconomicInstance) -> bool {
        if self.clamp.is_some() {
            return participates(alpha_quantile, mu, inst);
        }
        if mu >= self.upper {
            true
        } else if mu <= self.lower {
            false
        } else {
            participates(alpha_quantile, mu, inst)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaClamp {
    /// `(c0 + c·n_min)/R >= 1 - eps`: the boundary agent cannot break even
    /// at any admissible threshold.
    NoFeasibleAlpha,
    /// The boundary agent participates even at `α = eps`.
    AtLowerBound,
}

/// The p-value threshold at which the participation threshold reaches the
/// baseline. It does not depend on the effectiveness prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalAlpha {
    pub alpha_hat: f64,
    /// Width of the final `α` bracket.
    pub epsilon: f64,
    /// `μτ(α̂)` as found by the inner search.
    pub mu_tau: f64,
    pub clamp: Option<AlphaClamp>,
    /// Number of participation-threshold searches performed.
    pub threshold_evaluations: u32,
    /// Best-response evaluations summed over all inner searches.
    pub best_response_evaluations: u32,
}

impl CriticalAlpha {
    /// `(c0 + c·n_min) / R`: at the baseline `Pass = α` for every `n`, so the
    /// boundary agent breaks even exactly there.
    pub fn closed_form(inst: &EconomicInstance) -> f64 {
        inst.cost(inst.n_min()) / inst.revenue()
    }
}

fn participates(alpha_quantile: f64, mu: f64, inst: &EconomicInstance) -> bool {
    AgentProblem::with_quantile(alpha_quantile, AgentBelief::clamped(mu), inst)
        .best_response()
        .participates
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(domain(format!("precision must lie in (0, 0.5), got {eps}")))
    }
}

/// Lowest participating belief for threshold `alpha`, to within `eps`.
pub fn participation_threshold(
    alpha: f64,
    inst: &EconomicInstance,
    eps: f64,
) -> Result<ParticipationThreshold> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!(
            "p-value threshold must lie in (0, 1), got {alpha}"
        )));
    }
    check_eps(eps)?;
    Ok(threshold_search(-quantile_unchecked(alpha), inst, eps))
}

fn threshold_search(d: f64, inst: &EconomicInstance, eps: f64) -> ParticipationThreshold {
    let mut lo = BELIEF_CLAMP;
    let mut hi = 1.0 - BELIEF_CLAMP;
    let mut evaluations = 2;
    if participates(d, lo, inst) {
        return ParticipationThreshold {
            mu_tau: lo,
            epsilon: 0.0,
            lower: lo,
            upper: lo,
            clamp: Some(ThresholdClamp::EveryoneParticipates),
            evaluations: 1,
        };
    }
    if !participates(d, hi, inst) {
        return ParticipationThreshold {
            mu_tau: hi,
            epsilon: 0.0,
            lower: hi,
            upper: hi,
            clamp: Some(ThresholdClamp::NobodyParticipates),
            evaluations,
        };
    }
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if participates(d, mid, inst) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ParticipationThreshold {
        mu_tau: 0.5 * (lo + hi),
        epsilon: hi - lo,
        lower: lo,
        upper: hi,
        clamp: None,
        evaluations,
    }
}

/// `α̂` by nested bisection: the outer search over `α ∈ [eps, 1 - eps]` uses
/// the predicate `μτ(α) <= μb`, with `μτ` from [`participation_threshold`].
///
/// Bisection stops once the `α` bracket is narrower than `eps` and
/// `|μτ(α̂) - μb| <= eps`.
pub fn critical_alpha(inst: &EconomicInstance, eps: f64) -> Result<CriticalAlpha> {
    check_eps(eps)?;
    let mu_b = inst.baseline();
    let mut counts = (0u32, 0u32);
    let probe = |alpha: f64, counts: &mut (u32, u32)| {
        let d = -quantile_unchecked(alpha);
        let t = threshold_search(d, inst, eps);
        counts.0 += 1;
        counts.1 += t.evaluations + 1;
        (t.admits(mu_b, d, inst), t)
    };
    let done =
        |alpha_hat: f64, epsilon: f64, mu_tau: f64, clamp, counts: (u32, u32)| CriticalAlpha {
            alpha_hat,
            epsilon,
            mu_tau,
            clamp,
            threshold_evaluations: counts.0,
            best_response_evaluations: counts.1,
        };

    let (mut lo, mut hi) = (eps, 1.0 - eps);
    let (ok_hi, t_hi) = probe(hi, &mut counts);
    if !ok_hi {
        return Ok(done(
            hi,
            0.0,
            t_hi.mu_tau,
            Some(AlphaClamp::NoFeasibleAlpha),
            counts,
        ));
    }
    let (ok_lo, t_lo) = probe(lo, &mut counts);
    if ok_lo {
        return Ok(done(
            lo,
            0.0,
            t_lo.mu_tau,
            Some(AlphaClamp::AtLowerBound),
            counts,
        ));
    }
    let mut rounds = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let (ok, _) = probe(mid, &mut counts);
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= eps {
            let alpha_hat = 0.5 * (lo + hi);
            let (_, t_hat) = probe(alpha_hat, &mut counts);
            if (t_hat.mu_tau - mu_b).abs() <= eps || rounds >= MAX_REFINEMENT_ROUNDS {
                return Ok(done(alpha_hat, hi - lo, t_hat.mu_tau, None, counts));
            }
            rounds += 1;
        }
    }
}
