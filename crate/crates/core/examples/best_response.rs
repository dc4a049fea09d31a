//! An agent's best response: curvature regions, optimal sample size, and a
//! check against exhaustive search.

use strategic_testing::{
    best_response, best_response_bruteforce, curvature_regions, pass_probability, AgentBelief,
    EconomicInstance,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = EconomicInstance::new(1.0, 0.05, 0.002, 0.5)?.with_sample_bounds(1, 500)?;
    let alpha = 0.05;
    let mu0 = AgentBelief::new(0.6)?;

    // A near-certain product under a strict threshold: utility is convex for
    // small trials and concave beyond n ~ 9.9.
    let strict = EconomicInstance::new(1.0, 0.05, 0.002, 0.5)?;
    let curv = curvature_regions(0.001, AgentBelief::new(0.99)?, &strict)?;
    println!("inflections at n = {:?}", curv.inflections);
    for r in &curv.regions {
        println!("  [{:>10.4}, {:>10.4}] {:?}", r.start, r.end, r.curvature);
    }

    let br = best_response(alpha, mu0, &inst)?;
    let brute = best_response_bruteforce(alpha, mu0, &inst)?;
    println!(
        "best response: n* = {}, pass = {:.6}, utility = {:.6}",
        br.n_star, br.pass_prob, br.utility
    );
    println!(
        "exhaustive:    n* = {}, utility = {:.6}",
        brute.n_star, brute.utility
    );

    for n in [10, 100, br.n_star, 400] {
        println!(
            "  Pass(n = {n:>3}) = {:.6}",
            pass_probability(alpha, mu0, n, inst.baseline())?
        );
    }

    // Below the baseline nobody finds a trial worthwhile.
    for mu in [0.45, 0.5, 0.52, 0.55, 0.7] {
        let br = best_response(alpha, AgentBelief::new(mu)?, &inst)?;
        println!(
            "  mu0 = {mu}: participates = {}, n* = {}",
            br.participates, br.n_star
        );
    }
    Ok(())
}
