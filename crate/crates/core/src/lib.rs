//! Strategic hypothesis testing as a Stackelberg game.
//!
//! A principal publishes a p-value threshold `α`. Each agent privately knows
//! the effectiveness `μ0` of its product and decides whether to run a trial
//! and how many samples to collect, weighing the revenue of approval against
//! fixed and per-sample costs. This crate computes
//!
//! - agents' best responses ([`agent`]),
//! - the participation threshold `μτ(α)` and the critical p-value `α̂`
//!   ([`threshold`]),
//! - the principal's false-positive / false-negative decomposition and the
//!   loss-minimising threshold ([`loss`]),
//! - drug-approval case studies and the command-line front end
//!   ([`casestudy`], [`config`], [`cli`]).

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod casestudy;
pub mod cli;
pub mod config;
pub mod error;
pub mod loss;
pub mod presets;
pub mod quadrature;
pub mod special;
pub mod table;
pub mod threshold;

pub use agent::{
    best_response, best_response_bruteforce, critical_region, curvature_regions, pass_probability,
    utility, utility_slope, AgentBelief, BestResponse, Curvature, CurvatureRegion,
    CurvatureRegions, EconomicInstance,
};
pub use error::{Error, Result};
pub use loss::{
    loss_components, optimal_alpha, sweep_alpha, total_loss, AlphaSweep, LossBreakdown,
    LossWeights, OptimalAlpha,
};
pub use quadrature::QuadratureSpec;
pub use special::{
    binomial_tail, std_normal_cdf, std_normal_pdf, std_normal_quantile, EffectivenessPrior,
    Probability, TruncatedNormalPrior,
};
pub use table::SweepTable;
pub use threshold::{
    critical_alpha, participation_threshold, CriticalAlpha, ParticipationThreshold,
};
