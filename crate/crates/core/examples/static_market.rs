//! Four agents with capped-linear utilities share 38 units of resource.
//! Solves the market with and without explicit trades and checks the result.

use eqkit::{fixtures, solve_sald, solve_saltd, verify_equilibrium, Mode, StaticScenario, Tolerances};

fn main() -> eqkit::Result<()> {
    let scenario: StaticScenario = serde_json::from_str(fixtures::EXAMPLE1)?;
    println!("capacity C = {}", scenario.capacity());

    let sald = solve_sald(&scenario, 1e-9)?;
    println!("\nwithout trades: lambda = {}", sald.lambda);
    for (i, x) in sald.x.iter().enumerate() {
        println!("  agent {}: x = {x:.3}", i + 1);
    }

    let saltd = solve_saltd(&scenario, 1e-9)?;
    let e = saltd.e.as_ref().expect("trading model returns trades");
    println!("\nwith trades: lambda = {}", saltd.lambda);
    for (i, (x, e)) in saltd.x.iter().zip(e).enumerate() {
        let side = if *e >= 0.0 { "sells" } else { "buys" };
        println!("  agent {}: x = {x:.3}, {side} {:.3}", i + 1, e.abs());
    }

    let report = verify_equilibrium(&scenario, &saltd, Mode::Saltd, &Tolerances::default())?;
    println!(
        "\nverification: accepted = {}, max payoff gap = {:.2e}, duality gap = {:.2e}",
        report.accepted, report.max_payoff_gap, report.duality_gap
    );
    Ok(())
}
