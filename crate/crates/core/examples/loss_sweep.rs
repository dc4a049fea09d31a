//! Principal's loss over a grid of thresholds, and the loss-minimising one.

use strategic_testing::loss::log_grid;
use strategic_testing::{
    optimal_alpha, sweep_alpha, EconomicInstance, LossWeights, QuadratureSpec, TruncatedNormalPrior,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = EconomicInstance::new(1.0, 0.1, 0.001, 0.5)?;
    let prior = TruncatedNormalPrior::new(0.62, 0.04, 0.4, 0.7)?;
    let weights = LossWeights::default();
    let quad = QuadratureSpec::default();

    let sweep = sweep_alpha(&inst, &prior, &weights, &quad, &log_grid(1e-3, 0.5, 12))?;
    println!(
        "{:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "alpha", "mu_tau", "FP", "FN_part", "FN_abst", "loss"
    );
    for r in &sweep.rows {
        let b = &r.breakdown;
        println!(
            "{:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            b.alpha, b.mu_tau, b.fp_particip, b.fn_particip, b.fn_abstain, r.total_loss
        );
    }

    let best = optimal_alpha(&inst, &prior, &weights, &quad, 200)?;
    println!(
        "optimal alpha = {:.5} (loss {:.5}); critical alpha = {:.5}",
        best.alpha, best.loss, best.critical.alpha_hat
    );

    // The same sweep as CSV.
    print!("{}", sweep.to_table().to_csv_string());
    Ok(())
}
