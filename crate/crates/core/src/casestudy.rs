//! Critical p-value maps over revenue and fixed cost, and helpers for the
//! false-negative curve experiments.

use rayon::prelude::*;

use crate::agent::EconomicInstance;
use crate::error::{domain, Result};
use crate::loss::AlphaSweep;
use crate::table::SweepTable;
use crate::threshold::{critical_alpha, CriticalAlpha};

pub const HEATMAP_COLUMNS: [&str; 5] = ["R", "c0", "alpha_hat", "clamped", "alpha_hat_le_0_05"];

/// The conventional regulatory threshold marked on every map.
pub const REFERENCE_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapCell {
    pub revenue: f64,
    pub fixed_cost: f64,
    pub critical: CriticalAlpha,
}

/// `α̂` on every `(R, c0)` pair, `R` varying slowest. Sample cost, baseline
/// and sample bounds come from `base`.
pub fn alpha_hat_heatmap(
    base: &EconomicInstance,
    revenues: &[f64],
    fixed_costs: &[f64],
    eps: f64,
) -> Result<Vec<HeatmapCell>> {
    let pairs: Vec<(f64, f64)> = revenues
        .iter()
        .flat_map(|&r| fixed_costs.iter().map(move |&c0| (r, c0)))
        .collect();
    pairs
        .par_iter()
        .map(|&(r, c0)| {
            let inst = base.with_revenue(r)?.with_fixed_cost(c0)?;
            Ok(HeatmapCell {
                revenue: r,
                fixed_cost: c0,
                critical: critical_alpha(&inst, eps)?,
            })
        })
        .collect()
}

pub fn heatmap_table(cells: &[HeatmapCell]) -> SweepTable {
    let mut t = SweepTable::new(HEATMAP_COLUMNS);
    for c in cells {
        let a = c.critical.alpha_hat;
        t.push(vec![
            c.revenue,
            c.fixed_cost,
            a,
            f64::from(u8::from(c.critical.clamp.is_some())),
            f64::from(u8::from(a <= REFERENCE_ALPHA)),
        ]);
    }
    t
}

/// Revenue at which `α̂` falls to `target`, by bisection on `[lo, hi]`.
/// `α̂` is non-increasing in revenue, so the bracket must straddle `target`.
pub fn crossing_revenue(
    base: &EconomicInstance,
    target: f64,
    lo: f64,
    hi: f64,
    eps: f64,
) -> Result<f64> {
    let alpha_at =
        |r: f64| -> Result<f64> { Ok(critical_alpha(&base.with_revenue(r)?, eps)?.alpha_hat) };
    if !(lo > 0.0 && hi > lo) {
        return Err(domain(format!("revenue bracket [{lo}, {hi}] is empty")));
    }
    let (a_lo, a_hi) = (alpha_at(lo)?, alpha_at(hi)?);
    if !(a_lo >= target && a_hi <= target) {
        return Err(domain(format!(
            "alpha_hat runs from {a_lo} to {a_hi} on [{lo}, {hi}] and does not cross {target}"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if alpha_at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Whether `FN_particip` strictly rises by more than `slack` between two
/// consecutive grid points below `alpha_hat`.
pub fn fn_particip_rises_below(sweep: &AlphaSweep, alpha_hat: f64, slack: f64) -> bool {
    let below: Vec<f64> = sweep
        .rows
        .iter()
        .filter(|r| r.breakdown.alpha < alpha_hat)
        .map(|r| r.breakdown.fn_particip)
        .collect();
    below.windows(2).any(|w| w[1] > w[0] + slack)
}

/// A gnuplot script drawing a heatmap CSV with the `α = 0.05` contour.
pub fn gnuplot_heatmap_script(csv_path: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set title \"{title}\"\n\
         set xlabel 'revenue R (million USD)'\n\
         set ylabel 'fixed cost c0 (million USD)'\n\
         set cblabel 'critical p-value'\n\
         set view map\n\
         set dgrid3d\n\
         set contour base\n\
         set cntrparam levels discrete {REFERENCE_ALPHA}\n\
         splot '{csv_path}' every ::1 using 1:2:3 with pm3d notitle, \\\n\
         \x20     '{csv_path}' every ::1 using 1:2:3 with lines lc rgb 'black' title 'alpha = {REFERENCE_ALPHA}'\n"
    )
}
