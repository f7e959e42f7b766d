//! Market-clearing prices for self-sustained multi-agent resource allocation.
//!
//! Agents hold local resource and derive utility from the load they consume.
//! A single price clears the network: in the static models it is found by
//! bisection over aggregate demand, in the dynamic model by dual
//! decomposition over a price per time step. Brute-force oracles and
//! equilibrium verifiers sit alongside the solvers.
//!
//! ```
//! use eqkit::{solve_sald, StaticScenario, UtilityFunction};
//!
//! let s = StaticScenario::uniform(
//!     &[UtilityFunction::quadratic(2.0, 21.0), UtilityFunction::quadratic(5.0, 17.0)],
//!     6.0,
//! );
//! let eq = solve_sald(&s, 1e-9).unwrap();
//! assert!((eq.x.iter().sum::<f64>() - 6.0).abs() < 1e-9);
//! ```

pub mod cli;
pub mod dynamic;
pub mod error;
pub mod fixtures;
pub mod oracle;
pub mod report;
pub mod shaping;
pub mod static_eq;
pub mod utility;

pub use dynamic::{
    agent_best_response, condense, rollout, solve_daltd, verify_dynamic_equilibrium, DynamicAgent,
    DynamicEquilibrium, DynamicOptions, DynamicScenario, DynamicTolerances,
};
pub use error::{EqError, Result};
pub use oracle::{dp_welfare_sald, dp_welfare_saltd, duality_gap, grid_search_daltd, ControlBox, OracleResult};
pub use shaping::{
    certify_worst_case_price, contour_sweep, is_admissible, monotonicity_check, quadratic_price, ContourSpec,
    QuadraticProfile, ShapingBounds,
};
pub use static_eq::{
    price_capacity_sweep, solve, solve_sald, solve_saltd, verify_equilibrium, AgentSpec, BisectionOptions, Mode,
    StaticEquilibrium, StaticScenario, Tolerances,
};
pub use utility::{ResponseInterval, UtilityFunction};
