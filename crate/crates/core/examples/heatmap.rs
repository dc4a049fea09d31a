//! Critical p-value over revenue and fixed cost for oncology drugs, and the
//! revenue at which it reaches 0.05.

use strategic_testing::casestudy::{alpha_hat_heatmap, crossing_revenue, heatmap_table};
use strategic_testing::loss::linear_grid;
use strategic_testing::presets::ONCOLOGY;
use strategic_testing::EconomicInstance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = EconomicInstance::new(1.0, 0.0, ONCOLOGY.sample_cost, 0.5)?;
    let revenues = linear_grid(ONCOLOGY.revenue.low, ONCOLOGY.revenue.high, 6);
    let fixed_costs = linear_grid(ONCOLOGY.fixed_cost.low, ONCOLOGY.fixed_cost.high, 4);

    let cells = alpha_hat_heatmap(&base, &revenues, &fixed_costs, 1e-6)?;
    print!("{:>9}", "R \\ c0");
    for c0 in &fixed_costs {
        print!("{c0:>10.1}");
    }
    println!();
    for (i, r) in revenues.iter().enumerate() {
        print!("{r:>9.0}");
        for cell in &cells[i * fixed_costs.len()..(i + 1) * fixed_costs.len()] {
            print!("{:>10.4}", cell.critical.alpha_hat);
        }
        println!();
    }

    let median = base.with_fixed_cost(ONCOLOGY.fixed_cost.median.unwrap_or(648.0))?;
    let r = crossing_revenue(
        &median,
        0.05,
        ONCOLOGY.revenue.low,
        ONCOLOGY.revenue.high,
        1e-6,
    )?;
    println!("alpha_hat = 0.05 at R = {r:.1}");

    let table = heatmap_table(&cells);
    println!("{} rows, columns {:?}", table.len(), table.columns());
    Ok(())
}
