//! Building utilities by hand, including a tabulated piecewise-linear one,
//! and inspecting their set-valued best responses.

use eqkit::{solve_saltd, AgentSpec, StaticScenario, UtilityFunction};

fn main() -> eqkit::Result<()> {
    let tabulated = UtilityFunction::piecewise_linear(vec![[0.0, 0.0], [2.0, 30.0], [5.0, 45.0], [8.0, 48.0]]);
    println!("kinks in demand at prices {:?}", tabulated.kink_prices());
    for lambda in [20.0, 15.0, 10.0, 5.0, 2.0] {
        let r = tabulated.best_response(lambda);
        println!("  lambda = {lambda:>4}: demand [{}, {}]", r.lo, r.hi);
    }

    let scenario = StaticScenario::new(vec![
        AgentSpec { utility: tabulated, a: 4.0 },
        AgentSpec { utility: UtilityFunction::quadratic(2.0, 12.0), a: 1.0 },
        AgentSpec { utility: UtilityFunction::capped_linear(9.0, 27.0), a: 2.0 },
    ]);
    let eq = solve_saltd(&scenario, 1e-9)?;
    println!("\nclearing price {}", eq.lambda);
    println!("loads  {:?}", eq.x);
    println!("trades {:?}", eq.e.unwrap_or_default());
    println!("\nas JSON: {}", serde_json::to_string(&scenario)?);
    Ok(())
}
