//! The participation threshold across p-value thresholds, and the critical
//! p-value at which only effective products are tested.

use strategic_testing::threshold::CriticalAlpha;
use strategic_testing::{critical_alpha, participation_threshold, EconomicInstance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Cardiovascular economics, in millions of USD.
    let inst = EconomicInstance::new(3560.0, 141.0, 0.128, 0.5)?;

    for alpha in [0.005, 0.01, 0.03, 0.05, 0.1, 0.2] {
        let t = participation_threshold(alpha, &inst, 1e-6)?;
        println!(
            "alpha = {alpha:<5}  mu_tau = {:.6}  clamp = {:?}  ({} best responses)",
            t.mu_tau, t.clamp, t.evaluations
        );
    }

    let a = critical_alpha(&inst, 1e-6)?;
    println!(
        "alpha_hat = {:.8} (closed form {:.8}), mu_tau there = {:.7}",
        a.alpha_hat,
        CriticalAlpha::closed_form(&inst),
        a.mu_tau
    );

    // A product too expensive to be worth testing at any threshold.
    let hopeless = inst.with_revenue(100.0)?;
    println!("R = 100: {:?}", critical_alpha(&hopeless, 1e-6)?.clamp);
    Ok(())
}
