//! Scenario files for the four worked examples, embedded at compile time.

pub const EXAMPLE1: &str = include_str!("../fixtures/example1.json");
pub const EXAMPLE2_PM1: &str = include_str!("../fixtures/example2_pm1.json");
pub const EXAMPLE2_PM2: &str = include_str!("../fixtures/example2_pm2.json");
pub const EXAMPLE3_BOUNDS: &str = include_str!("../fixtures/example3_bounds.json");
pub const EXAMPLE3_K_CONTOUR: &str = include_str!("../fixtures/example3_k_contour.json");
pub const EXAMPLE3_B_CONTOUR: &str = include_str!("../fixtures/example3_b_contour.json");
pub const EXAMPLE4: &str = include_str!("../fixtures/example4.json");
