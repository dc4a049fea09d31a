//! Normal cdf/quantile, the exact binomial tail and a truncated normal prior.

use strategic_testing::{
    binomial_tail, std_normal_cdf, std_normal_quantile, EffectivenessPrior, TruncatedNormalPrior,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for p in [0.001, 0.05, 0.5, 0.975] {
        let z = std_normal_quantile(p)?;
        println!(
            "quantile({p}) = {z:+.10}  cdf back = {:.12}",
            std_normal_cdf(z)?.get()
        );
    }

    // P[X >= 30] for X ~ Bin(50, 0.6)
    println!("binomial tail = {:.12}", binomial_tail(50, 30, 0.6)?.get());

    let prior = TruncatedNormalPrior::new(0.55, 0.05, 0.4, 0.7)?;
    let (lo, hi) = prior.support();
    println!(
        "prior on [{lo}, {hi}], mass below 0.5 = {:.6}",
        prior.cdf(0.5)
    );
    for mu in [0.45, 0.55, 0.65] {
        println!("  pdf({mu}) = {:.6}", prior.pdf(mu));
    }
    Ok(())
}
