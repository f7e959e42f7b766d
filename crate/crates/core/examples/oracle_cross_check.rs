//! The brute-force oracles against the solvers: a capacity-grid DP for the
//! static market and an exhaustive control grid for a two-agent dynamic toy.

use eqkit::oracle::duality_gap;
use eqkit::{
    dp_welfare_sald, fixtures, grid_search_daltd, solve_daltd, solve_sald, ControlBox, DynamicOptions,
    DynamicScenario, StaticScenario,
};

const TOY: &str = r#"{
  "agents": [
    {"A": [[0.8]], "B": [[1]], "R": [[-1]], "W": [2], "Q": [[-0.5]], "K": [1], "H": [[1]], "a": [0.3, 0.3], "y0": [0.5]},
    {"A": [[-0.5]], "B": [[0.5]], "R": [[-2]], "W": [1], "Q": [[-1]], "K": [2], "H": [[2]], "a": [0.2, 0.4], "y0": [1]}
  ],
  "T": 2
}"#;

fn main() -> eqkit::Result<()> {
    let scenario: StaticScenario = serde_json::from_str(fixtures::EXAMPLE1)?;
    let eq = solve_sald(&scenario, 1e-9)?;
    println!("static welfare: solver {:.6}", scenario.welfare(&eq.x));
    for resolution in [0.1, 0.01, 0.001] {
        let grid = dp_welfare_sald(&scenario, resolution)?;
        println!("  grid {resolution:>6}: {:.6}", grid.welfare);
    }
    println!("duality gap at the solver price: {:.2e}", duality_gap(&scenario, eq.lambda, &eq.x)?);
    println!("duality gap one unit higher:     {:.2e}", duality_gap(&scenario, eq.lambda + 1.0, &eq.x)?);

    let toy: DynamicScenario = serde_json::from_str(TOY)?;
    let dynamic = solve_daltd(&toy, &DynamicOptions::default())?;
    let grid = grid_search_daltd(&toy, ControlBox::symmetric(1.0), 0.05)?;
    println!("\ndynamic welfare: solver {:.5} at prices {:?}", dynamic.welfare(&toy)?, dynamic.lambda);
    println!("  grid 0.05: {:.5} at controls {:?}", grid.welfare, grid.allocation);
    Ok(())
}
