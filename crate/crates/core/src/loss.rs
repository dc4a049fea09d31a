//! The principal's loss: Type I and Type II error rates split by whether
//! agents participate, evaluated by quadrature over the effectiveness prior
//! with every agent best responding.
//!
//! With `Q` the prior cdf, `q` its density and `μτ = μτ(α)`:
//!
//! ```text
//! FP_particip = 1/Q(μb)     · ∫[max(μτ,lo), μb]  Pass·q
//! FN_particip = 1/(1-Q(μb)) · ∫[max(μτ,μb), hi]  (1-Pass)·q
//! FN_abstain  = (Q(max(μτ,μb)) - Q(μb)) / (1-Q(μb))
//! ```
//!
//! `FP_abstain` is identically zero since abstaining agents never pass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentBelief, AgentProblem, EconomicInstance};
use crate::error::{domain, invalid, Result};
use crate::quadrature::QuadratureSpec;
use crate::special::{quantile_unchecked, EffectivenessPrior};
use crate::table::SweepTable;
use crate::threshold::{
    critical_alpha, participation_threshold, CriticalAlpha, ThresholdClamp, DEFAULT_EPS,
};

/// Tolerance attributed to the default quadrature when comparing loss values
/// across grid points.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

/// CSV header of an α-sweep.
pub const LOSS_SWEEP_COLUMNS: [&str; 7] = [
    "alpha",
    "mu_tau",
    "fp_particip",
    "fn_particip",
    "fn_abstain",
    "fn_total",
    "total_loss",
];

/// Scales of the false-positive and false-negative terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRaw", into = "WeightsRaw")]
pub struct LossWeights {
    lambda_fp: f64,
    lambda_fn: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsRaw {
    lambda_fp: f64,
    lambda_fn: f64,
}

impl TryFrom<WeightsRaw> for LossWeights {
    type Error = crate::Error;
    fn try_from(w: WeightsRaw) -> Result<Self> {
        Self::new(w.lambda_fp, w.lambda_fn)
    }
}

impl From<LossWeights> for WeightsRaw {
    fn from(w: LossWeights) -> Self {
        Self {
            lambda_fp: w.lambda_fp,
            lambda_fn: w.lambda_fn,
        }
    }
}

impl LossWeights {
    pub fn new(lambda_fp: f64, lambda_fn: f64) -> Result<Self> {
        if !(lambda_fp >= 0.0 && lambda_fp.is_finite()) {
            return Err(invalid(
                "weights.lambda_fp",
                "must be non-negative and finite",
            ));
        }
        if !(lambda_fn >= 0.0 && lambda_fn.is_finite()) {
            return Err(invalid(
                "weights.lambda_fn",
                "must be non-negative and finite",
            ));
        }
        if lambda_fp == 0.0 && lambda_fn == 0.0 {
            return Err(invalid(
                "weights",
                "lambda_fp and lambda_fn cannot both be zero",
            ));
        }
        Ok(Self {
            lambda_fp,
            lambda_fn,
        })
    }

    pub fn lambda_fp(&self) -> f64 {
        self.lambda_fp
    }

    pub fn lambda_fn(&self) -> f64 {
        self.lambda_fn
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_fp: 1.0,
            lambda_fn: 1.0,
        }
    }
}

/// Conditions under which a loss component is reported as 0 rather than
/// computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LossFlags {
    /// The prior puts no mass below the baseline, so the FP terms condition
    /// on an empty event.
    pub no_ineffective_mass: bool,
    /// The prior puts no mass at or above the baseline.
    pub no_effective_mass: bool,
    pub threshold_clamp: Option<ThresholdClamp>,
}

impl LossFlags {
    pub fn any(&self) -> bool {
        self.no_ineffective_mass || self.no_effective_mass || self.threshold_clamp.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub alpha: f64,
    pub mu_tau: f64,
    pub fp_particip: f64,
    pub fp_abstain: f64,
    pub fn_particip: f64,
    pub fn_abstain: f64,
    pub flags: LossFlags,
}

impl LossBreakdown {
    pub fn fp_total(&self) -> f64 {
        self.fp_particip + self.fp_abstain
    }

    pub fn fn_total(&self) -> f64 {
        self.fn_particip + self.fn_abstain
    }

    pub fn total(&self, weights: &LossWeights) -> f64 {
        weights.lambda_fp * self.fp_total() + weights.lambda_fn * self.fn_total()
    }
}

/// The four loss components at threshold `alpha`.
pub fn loss_components<P: EffectivenessPrior + ?Sized>(
    alpha: f64,
    inst: &EconomicInstance,
    prior: &P,
    quad: &QuadratureSpec,
) -> Result<LossBreakdown> {
    let threshold = participation_threshold(alpha, inst, DEFAULT_EPS)?;
    let mu_tau = threshold.mu_tau;
    let mu_b = inst.baseline();
    let (lo, hi) = prior.support();
    let d = -quantile_unchecked(alpha);

    // Inside the integration ranges every agent participates, so the
    // integrand uses the pass probability of the best participating trial.
    let integrate = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        integrate_beliefs(d, inst, prior, quad.panels(), a, b, g)
    };

    let mut flags = LossFlags {
        threshold_clamp: threshold.clamp,
        ..LossFlags::default()
    };

    let below = prior.cdf(mu_b);
    let above = 1.0 - below;

    let fp_particip = if below > 0.0 {
        let a = mu_tau.max(lo);
        let b = mu_b.min(hi);
        integrate(&|p| p, a, b) / below
    } else {
        flags.no_ineffective_mass = true;
        0.0
    };

    let (fn_particip, fn_abstain) = if above > 0.0 {
        let a = mu_tau.max(mu_b).max(lo);
        let particip = integrate(&|p| 1.0 - p, a, hi) / above;
        let abstain = (prior.cdf(mu_tau.max(mu_b)) - below) / above;
        (particip, abstain)
    } else {
        flags.no_effective_mass = true;
        (0.0, 0.0)
    };

    Ok(LossBreakdown {
        alpha,
        mu_tau,
        fp_particip: fp_particip.clamp(0.0, 1.0),
        fp_abstain: 0.0,
        fn_particip: fn_particip.clamp(0.0, 1.0),
        fn_abstain: fn_abstain.clamp(0.0, 1.0),
        flags,
    })
}

/// `∫[a, b] g(Pass(μ, n*(μ))) q(μ) dμ` with `n*` the best participating trial
/// size.
///
/// `n*` is piecewise constant in the belief and `Pass` jumps by about `c/R`
/// wherever it changes, so plain Simpson over the jumps converges only at
/// first order. Each of the `cells` node intervals is instead split where the
/// best trial size switches, and Simpson's rule is applied to every piece
/// with its trial size held fixed.
fn integrate_beliefs<P: EffectivenessPrior + ?Sized>(
    d: f64,
    inst: &EconomicInstance,
    prior: &P,
    cells: usize,
    a: f64,
    b: f64,
    g: &dyn Fn(f64) -> f64,
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let problem = |mu: f64| AgentProblem::with_quantile(d, AgentBelief::clamped(mu), inst);
    let best = |mu: f64| problem(mu).best_participating().0;
    let piece = |s: f64, e: f64, n: u64| {
        let f = |mu: f64| g(problem(mu).pass(n)) * prior.pdf(mu);
        (e - s) / 6.0 * (f(s) + 4.0 * f(0.5 * (s + e)) + f(e))
    };
    let h = (b - a) / cells as f64;
    let node = |i: usize| if i == cells { b } else { a + h * i as f64 };
    let mut total = 0.0;
    let mut left = (a, best(a));
    for i in 1..=cells {
        let right = (node(i), best(node(i)));
        total += integrate_cell(&problem, &best, &piece, left, right, 0, g, prior);
        left = right;
    }
    total
}

/// Size changes across a cell beyond which it is integrated on the real
/// relaxation instead of switch by switch.
const DENSE_STEPS: u64 = 32;

/// Halvings allowed when the relaxed rule fails its error check.
const MAX_RELAXED_DEPTH: u32 = 16;

/// Accepted difference between one and two Simpson panels on the relaxed
/// integrand, per unit of belief.
const RELAXED_TOL: f64 = 1e-8;

#[allow(clippy::too_many_arguments)]
fn integrate_cell<P: EffectivenessPrior + ?Sized>(
    problem: &dyn Fn(f64) -> AgentProblem,
    best: &dyn Fn(f64) -> u64,
    piece: &dyn Fn(f64, f64, u64) -> f64,
    l: (f64, u64),
    r: (f64, u64),
    depth: u32,
    g: &dyn Fn(f64) -> f64,
    prior: &P,
) -> f64 {
    if l.1.abs_diff(r.1) >= DENSE_STEPS {
        match relaxed_cell(problem, best, l, r, g, prior) {
            Relaxed::Accepted(v) => return v,
            Relaxed::Rough(m) if depth < MAX_RELAXED_DEPTH => {
                let m = (m, best(m));
                return integrate_cell(problem, best, piece, l, m, depth + 1, g, prior)
                    + integrate_cell(problem, best, piece, m, r, depth + 1, g, prior);
            }
            _ => {}
        }
    }
    let mut pieces = Vec::new();
    if !step_through_sizes(problem, l, r, &mut pieces) {
        pieces.clear();
        split_at_switches(problem, l, r, 0, &mut pieces);
    }
    let mut start = l.0;
    let mut total = 0.0;
    for (end, n) in pieces {
        total += piece(start, end, n);
        start = end;
    }
    total
}

enum Relaxed {
    Accepted(f64),
    /// Failed the error check; carries the cell midpoint.
    Rough(f64),
    /// No interior stationary point next to the integer optimum.
    Undefined,
}

/// Simpson on `g(Pass(μ, ñ(μ)))` with `ñ` the real stationary point next to
/// the integer optimum. At the optimum `R ∂Pass/∂n = c`, so the integer pass
/// probability differs from the relaxed one by `c/R` times a sawtooth in
/// `n* - ñ` that averages out over each switch period.
fn relaxed_cell<P: EffectivenessPrior + ?Sized>(
    problem: &dyn Fn(f64) -> AgentProblem,
    best: &dyn Fn(f64) -> u64,
    l: (f64, u64),
    r: (f64, u64),
    g: &dyn Fn(f64) -> f64,
    prior: &P,
) -> Relaxed {
    let f = |mu: f64, n: u64| -> Option<f64> {
        let p = problem(mu);
        let t = p.relaxed_optimum(n)?;
        Some(g(p.pass_real(t)) * prior.pdf(mu))
    };
    let m = 0.5 * (l.0 + r.0);
    let (q1, q3) = (0.5 * (l.0 + m), 0.5 * (m + r.0));
    let values = (|| {
        Some([
            f(l.0, l.1)?,
            f(q1, best(q1))?,
            f(m, best(m))?,
            f(q3, best(q3))?,
            f(r.0, r.1)?,
        ])
    })();
    let Some([fl, f1, fm, f3, fr]) = values else {
        return Relaxed::Undefined;
    };
    let w = r.0 - l.0;
    let whole = w / 6.0 * (fl + 4.0 * fm + fr);
    let halves = w / 12.0 * (fl + 4.0 * f1 + 2.0 * fm + 4.0 * f3 + fr);
    // A jump between branches of the optimum inside the cell shows up here.
    if (halves - whole).abs() <= RELAXED_TOL * w {
        Relaxed::Accepted(halves)
    } else {
        Relaxed::Rough(m)
    }
}

const MAX_SWITCH_DEPTH: u32 = 24;

/// Belief resolution of a switch point. A misplaced switch costs at most
/// this times the pass-probability jump times the density.
const SWITCH_TOL: f64 = 1e-11;

/// Root of `f` on `[a, b]` given `f(a) <= 0 <= f(b)` (Illinois variant of
/// regula falsi).
fn illinois(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0;
    for _ in 0..100 {
        if b - a <= SWITCH_TOL {
            break;
        }
        let x = if fb > fa {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        let x = if x > a && x < b { x } else { 0.5 * (a + b) };
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Fast path for the usual case where the best size moves one step at a
/// time between the two ends. Returns `false` if that assumption fails, in
/// which case `out` is left partially filled.
fn step_through_sizes(
    problem: &dyn Fn(f64) -> AgentProblem,
    l: (f64, u64),
    r: (f64, u64),
    out: &mut Vec<(f64, u64)>,
) -> bool {
    if l.1 == r.1 {
        out.push((r.0, l.1));
        return true;
    }
    let up = r.1 > l.1;
    let mut start = l.0;
    let mut k = l.1;
    while k != r.1 {
        let next = if up { k + 1 } else { k - 1 };
        let gain = |mu: f64| {
            let p = problem(mu);
            p.utility(next) - p.utility(k)
        };
        // Switches are roughly evenly spaced: try the predicted spot first.
        let remaining = k.abs_diff(r.1) as f64;
        let guess = start + (r.0 - start) / (remaining + 0.5);
        let g0 = gain(start);
        let gg = gain(guess);
        let x = if g0 > 0.0 {
            return false;
        } else if gg >= 0.0 {
            illinois(gain, start, guess, g0, gg)
        } else {
            let g1 = gain(r.0);
            if g1 < 0.0 {
                return false;
            }
            illinois(gain, guess, r.0, gg, g1)
        };
        out.push((x, k));
        start = x;
        k = next;
    }
    out.push((r.0, r.1));
    // Each piece's size must beat its neighbours at the piece midpoint.
    let mut s = l.0;
    for &(e, n) in out.iter() {
        let p = problem(0.5 * (s + e));
        let u = p.utility(n);
        let beaten = |m: u64| (p.n_min()..=p.n_max()).contains(&m) && p.utility(m) > u;
        if beaten(n + 1) || (n > 0 && beaten(n - 1)) {
            return false;
        }
        s = e;
    }
    true
}

/// Appends `(end, n)` pieces covering `(l.0, r.0]` given the best trial size
/// at both ends. The switch point between two sizes is where their utilities
/// cross; if a third size wins there the search recurses on both sides.
fn split_at_switches(
    problem: &dyn Fn(f64) -> AgentProblem,
    l: (f64, u64),
    r: (f64, u64),
    depth: u32,
    out: &mut Vec<(f64, u64)>,
) {
    if l.1 == r.1 {
        out.push((r.0, l.1));
        return;
    }
    let gain = |mu: f64| {
        let p = problem(mu);
        p.utility(r.1) - p.utility(l.1)
    };
    let (mut lo, mut hi) = (l.0, r.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gain(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let at = 0.5 * (lo + hi);
    let winner = problem(at).best_participating().0;
    if winner == l.1 || winner == r.1 || depth >= MAX_SWITCH_DEPTH || at <= l.0 || at >= r.0 {
        out.push((at, l.1));
        out.push((r.0, r.1));
    } else {
        split_at_switches(problem, l, (at, winner), depth + 1, out);
        split_at_switches(problem, (at, winner), r, depth + 1, out);
    }
}

/// Weighted principal loss at threshold `alpha`.
pub fn total_loss<P: EffectivenessPrior + ?Sized>(
    alpha: f64,
    inst: &EconomicInstance,
    prior: &P,
    weights: &LossWeights,
    quad: &QuadratureSpec,
) -> Result<f64> {
    Ok(loss_components(alpha, inst, prior, quad)?.total(weights))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalAlpha {
    pub alpha: f64,
    pub loss: f64,
    pub critical: CriticalAlpha,
}

/// Grid search for the loss-minimising threshold over `[α̂, 1 - eps]`.
/// Ties go to the smaller `α`.
pub fn optimal_alpha<P: EffectivenessPrior + ?Sized>(
    inst: &EconomicInstance,
    prior: &P,
    weights: &LossWeights,
    quad: &QuadratureSpec,
    grid_resolution: usize,
) -> Result<OptimalAlpha> {
    if grid_resolution < 2 {
        return Err(domain(format!(
            "grid resolution must be at least 2, got {grid_resolution}"
        )));
    }
    let critical = critical_alpha(inst, DEFAULT_EPS)?;
    let start = critical.alpha_hat;
    let end = 1.0 - DEFAULT_EPS;
    let grid: Vec<f64> = if end > start {
        let step = (end - start) / (grid_resolution - 1) as f64;
        (0..grid_resolution)
            .map(|i| {
                if i + 1 == grid_resolution {
                    end
                } else {
                    start + step * i as f64
                }
            })
            .collect()
    } else {
        vec![start]
    };
    let losses: Vec<f64> = grid
        .par_iter()
        .map(|&a| total_loss(a, inst, prior, weights, quad))
        .collect::<Result<_>>()?;
    let (mut alpha, mut loss) = (grid[0], losses[0]);
    for (&a, &l) in grid.iter().zip(&losses).skip(1) {
        if l < loss {
            alpha = a;
            loss = l;
        }
    }
    Ok(OptimalAlpha {
        alpha,
        loss,
        critical,
    })
}

/// `points` log-spaced values from `start` to `end` inclusive.
pub fn log_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    let mut g: Vec<f64> = linear_grid(start.ln(), end.ln(), points)
        .into_iter()
        .map(f64::exp)
        .collect();
    if let Some(first) = g.first_mut() {
        *first = start;
    }
    if points > 1 {
        g[points - 1] = end;
    }
    g
}

/// `points` equally spaced values from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i + 1 == points {
                        end
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// 400 log-spaced thresholds in `[1e-4, 0.9]`.
pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(1e-4, 0.9, 400)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub breakdown: LossBreakdown,
    pub total_loss: f64,
    /// Best-response pass probability at each probe belief.
    pub probe_pass: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSweep {
    /// Beliefs at the quartiles of the prior support.
    pub probes: [f64; 3],
    pub rows: Vec<SweepRow>,
}

impl AlphaSweep {
    /// The loss-sweep CSV table.
    pub fn to_table(&self) -> SweepTable {
        let mut t = SweepTable::new(LOSS_SWEEP_COLUMNS);
        for r in &self.rows {
            let b = &r.breakdown;
            t.push(vec![
                b.alpha,
                b.mu_tau,
                b.fp_particip,
                b.fn_particip,
                b.fn_abstain,
                b.fn_total(),
                r.total_loss,
            ]);
        }
        t
    }
}

/// Loss components at every threshold of a strictly increasing grid.
/// Rows are computed in parallel and returned in grid order.
pub fn sweep_alpha<P: EffectivenessPrior + ?Sized>(
    inst: &EconomicInstance,
    prior: &P,
    weights: &LossWeights,
    quad: &QuadratureSpec,
    alpha_grid: &[f64],
) -> Result<AlphaSweep> {
    if let Some(&bad) = alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(domain(format!("alpha grid value {bad} outside (0, 1)")));
    }
    if alpha_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("alpha grid must be strictly increasing"));
    }
    let (lo, hi) = prior.support();
    let probes = [0.25, 0.5, 0.75].map(|f| lo + f * (hi - lo));
    let rows = alpha_grid
        .par_iter()
        .map(|&alpha| {
            let breakdown = loss_components(alpha, inst, prior, quad)?;
            let probe_pass = probes.map(|mu| {
                AgentProblem::new(alpha, AgentBelief::clamped(mu), inst)
                    .best_response()
                    .pass_prob
            });
            Ok(SweepRow {
                total_loss: breakdown.total(weights),
                breakdown,
                probe_pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaSweep { probes, rows })
}
