//! Bundled presets, a hand-written configuration, and the validation report
//! for a broken one.

use strategic_testing::config::RunConfig;
use strategic_testing::presets::{preset, preset_names};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in preset_names() {
        let c = preset(name).expect("bundled")?;
        let inst = c.require_instance("example")?;
        println!(
            "{name:<16} R = {:<8} c0 = {:<6} c = {:<6} alpha grid of {} points",
            inst.revenue(),
            inst.fixed_cost(),
            inst.sample_cost(),
            c.grids.alpha.as_ref().map_or(0, |g| g.points().len())
        );
    }

    let text = r#"{
        "instance": {"R": 5000, "c0": 648, "c": 0.136, "mu_b": 0.5},
        "prior": {"mean": 0.55, "sd": 0.05, "lo": 0.4, "hi": 0.7},
        "grids": {"alpha": {"values": [0.01, 0.05, 0.1]}}
    }"#;
    let c = RunConfig::from_json(text)?;
    println!("custom alpha grid: {:?}", c.grids.alpha.map(|g| g.points()));

    let broken = r#"{
        "instance": {"R": -1, "c0": 648, "c": 0.136, "mu_b": 1.5},
        "grids": {"alpha": {"log": {"start": 0, "end": 0.9, "points": 10}}},
        "colour": "blue"
    }"#;
    match RunConfig::from_json(broken) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected:\n{e}"),
    }
    Ok(())
}
