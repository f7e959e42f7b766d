//! How the clearing price moves with network capacity, for two quadratic
//! parameter sets. Prints both models side by side; the no-trade price turns
//! negative once capacity outgrows what agents want to consume.

use eqkit::static_eq::SweepSpec;
use eqkit::{fixtures, price_capacity_sweep, BisectionOptions, Mode};

fn main() -> eqkit::Result<()> {
    let opts = BisectionOptions::default();
    for (name, text) in [("PM.1", fixtures::EXAMPLE2_PM1), ("PM.2", fixtures::EXAMPLE2_PM2)] {
        let spec: SweepSpec = serde_json::from_str(text)?;
        let grid = spec.capacities();
        let sald = price_capacity_sweep(&spec.utilities, &grid, Mode::Sald, &opts)?;
        let saltd = price_capacity_sweep(&spec.utilities, &grid, Mode::Saltd, &opts)?;
        println!("{name}");
        println!("{:>6} {:>12} {:>12}", "C", "no trades", "trades");
        for (a, b) in sald.iter().zip(&saltd).step_by(5) {
            println!("{:>6.1} {:>12.4} {:>12.4}", a.capacity, a.lambda, b.lambda);
        }
        println!();
    }
    Ok(())
}
