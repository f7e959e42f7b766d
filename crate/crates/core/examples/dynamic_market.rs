//! Three agents with linear dynamics trade resource over 30 steps. Prices
//! are found by dual decomposition and the result is re-verified.

use eqkit::report::price_csv;
use eqkit::{fixtures, solve_daltd, verify_dynamic_equilibrium, DynamicOptions, DynamicScenario, DynamicTolerances};

fn main() -> eqkit::Result<()> {
    let scenario: DynamicScenario = serde_json::from_str(fixtures::EXAMPLE4)?;
    let eq = solve_daltd(&scenario, &DynamicOptions::default())?;
    println!("converged after {} iterations, residual {:.2e}", eq.iterations, eq.residual);

    let report = verify_dynamic_equilibrium(&scenario, &eq, &DynamicTolerances::default())?;
    for (i, a) in report.agents.iter().enumerate() {
        println!("agent {i}: payoff {:.3}, re-solve gap {:.2e}", a.best_payoff, a.payoff_gap);
    }
    println!("accepted: {}\n", report.accepted);

    let ys = eq.trajectories(&scenario)?;
    println!("final states: {:?}", ys.iter().map(|y| y.last().unwrap().as_slice().to_vec()).collect::<Vec<_>>());
    print!("{}", price_csv(&eq.lambda));
    Ok(())
}
