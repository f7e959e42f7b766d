//! Generators shared by the property suites.
#![allow(dead_code)]

use eqkit::{AgentSpec, DynamicAgent, DynamicScenario, QuadraticProfile, ShapingBounds, StaticScenario, UtilityFunction};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

pub fn quadratic() -> impl Strategy<Value = UtilityFunction> {
    (0.5..5.0f64, 1.0..30.0f64).prop_map(|(b, k)| UtilityFunction::quadratic(b, k))
}

pub fn capped_linear() -> impl Strategy<Value = UtilityFunction> {
    (1.0..30.0f64, 5.0..150.0f64).prop_map(|(k, beta)| UtilityFunction::capped_linear(k, beta))
}

/// Concave, starting at the origin, with 1 to 4 segments whose slopes fall
/// from positive to possibly negative.
pub fn piecewise_linear() -> impl Strategy<Value = UtilityFunction> {
    (1.0..30.0f64, prop::collection::vec((0.5..5.0f64, 0.0..12.0f64), 1..=4)).prop_map(|(first, segs)| {
        let mut points = vec![[0.0, 0.0]];
        let mut slope = first;
        for (j, (width, drop)) in segs.into_iter().enumerate() {
            if j > 0 {
                slope -= drop;
            }
            let [x, f] = *points.last().unwrap();
            points.push([x + width, f + slope * width]);
        }
        UtilityFunction::piecewise_linear(points)
    })
}

pub fn any_utility() -> impl Strategy<Value = UtilityFunction> {
    prop_oneof![quadratic(), capped_linear(), piecewise_linear()]
}

pub fn mixed_utility() -> impl Strategy<Value = UtilityFunction> {
    prop_oneof![quadratic(), capped_linear()]
}

fn with_resources(utilities: Vec<UtilityFunction>, a: Vec<f64>) -> StaticScenario {
    StaticScenario::new(
        utilities
            .into_iter()
            .zip(a)
            .map(|(utility, a)| AgentSpec { utility, a })
            .collect(),
    )
}

/// Quadratic and capped-linear agents, `n <= 6`, `a_i` in `[0, 10]`.
pub fn mixed_scenario() -> impl Strategy<Value = StaticScenario> {
    (1usize..=6)
        .prop_flat_map(|n| (prop::collection::vec(mixed_utility(), n), prop::collection::vec(0.0..10.0f64, n)))
        .prop_map(|(u, a)| with_resources(u, a))
}

/// Mixed scenario with at least one capped-linear agent.
pub fn scenario_with_capped() -> impl Strategy<Value = StaticScenario> {
    (0usize..=5)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(mixed_utility(), n),
                capped_linear(),
                0..=n,
                prop::collection::vec(0.0..10.0f64, n + 1),
            )
        })
        .prop_map(|(mut u, capped, at, a)| {
            u.insert(at, capped);
            with_resources(u, a)
        })
}

pub fn general_scenario() -> impl Strategy<Value = StaticScenario> {
    (1usize..=6)
        .prop_flat_map(|n| (prop::collection::vec(any_utility(), n), prop::collection::vec(0.0..10.0f64, n)))
        .prop_map(|(u, a)| with_resources(u, a))
}

/// Quadratic profile with a prescribed interior price; returns the profile,
/// the capacity that clears at that price, and the price.
pub fn interior_profile() -> impl Strategy<Value = (QuadraticProfile, f64, f64)> {
    (2usize..=6)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(5.0..50.0f64, n),
                prop::collection::vec(0.5..6.0f64, n),
                0.0..1.0f64,
            )
        })
        .prop_map(|(k, b, t)| {
            let k_min = k.iter().copied().fold(f64::INFINITY, f64::min);
            let lambda = t * k_min * 0.999;
            let capacity = k.iter().zip(&b).map(|(k, b)| (k - lambda) / b).sum();
            (QuadraticProfile::new(k, b), capacity, lambda)
        })
}

/// Bounds satisfying the three admissibility inequalities by construction
/// (up to rounding, which callers filter).
pub fn admissible_bounds() -> impl Strategy<Value = ShapingBounds> {
    (2usize..=6, 10.0..50.0f64, 1.0..5.0f64, 0.0..0.4f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_map(
        |(n, k_min, b_min, spread_b, spread_k, at, margin)| {
            let b_max = b_min * (1.0 + spread_b);
            let k_room = 2.0 / (1.0 + spread_b) - 1.0;
            let k_max = k_min * (1.0 + 0.99 * spread_k * k_room);
            let nf = n as f64;
            let low = nf * k_min / b_max;
            let high = nf * k_max / b_min;
            let capacity = (high - low) + at * (2.0 * low - high);
            let lambda_dagger = ((high - capacity) * b_max / nf * (1.0 + margin)).max(1e-3);
            ShapingBounds {
                k_min,
                k_max,
                b_min,
                b_max,
                lambda_dagger,
                n,
                capacity,
            }
        },
    )
}

/// A profile inside `bounds`, described by unit-interval coordinates.
pub fn profile_in(bounds: &ShapingBounds, kt: &[f64], bt: &[f64]) -> QuadraticProfile {
    QuadraticProfile::new(
        kt.iter().map(|t| bounds.k_min + t * (bounds.k_max - bounds.k_min)).collect(),
        bt.iter().map(|t| bounds.b_min + t * (bounds.b_max - bounds.b_min)).collect(),
    )
}

fn matrix(m: usize, n: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-scale..scale, m * n).prop_map(move |v| DMatrix::from_vec(m, n, v))
}

/// `-(M'M + shift I)`.
fn negative_definite(m: usize, shift: f64) -> impl Strategy<Value = DMatrix<f64>> {
    matrix(m, m, 1.0).prop_map(move |x| -(x.transpose() * &x + DMatrix::identity(m, m) * shift))
}

pub fn dynamic_agent(m: usize, p: usize, horizon: usize) -> impl Strategy<Value = DynamicAgent> {
    (
        matrix(m, m, 0.9),
        matrix(m, p, 1.5),
        negative_definite(m, 0.5),
        prop::collection::vec(-5.0..5.0f64, m),
        negative_definite(p, 0.5),
        prop::collection::vec(-5.0..5.0f64, p),
        negative_definite(p, 0.2),
        prop::collection::vec(0.2..3.0f64, horizon),
        prop::collection::vec(-2.0..2.0f64, m),
    )
        .prop_map(|(a, b, r, w, q, k, h, supply, y0)| DynamicAgent {
            dynamics: a,
            input: b,
            state_weight: r,
            state_linear: DVector::from_vec(w),
            input_weight: q,
            input_linear: DVector::from_vec(k),
            resource: -h,
            supply,
            y0: DVector::from_vec(y0),
            terminal_weight: None,
            terminal_linear: None,
        })
}

pub fn dynamic_scenario() -> impl Strategy<Value = DynamicScenario> {
    (1usize..=3, 1usize..=2, 1usize..=2, 1usize..=4).prop_flat_map(|(n, m, p, horizon)| {
        prop::collection::vec(dynamic_agent(m, p, horizon), n).prop_map(move |agents| DynamicScenario { agents, horizon })
    })
}

/// Two scalar agents over two steps; both resource constraints bind at the optimum.
pub const TOY_DYNAMIC: &str = r#"{
  "agents": [
    {"A": [[0.8]], "B": [[1]], "R": [[-1]], "W": [2], "Q": [[-0.5]], "K": [1], "H": [[1]], "a": [0.3, 0.3], "y0": [0.5]},
    {"A": [[-0.5]], "B": [[0.5]], "R": [[-2]], "W": [1], "Q": [[-1]], "K": [2], "H": [[2]], "a": [0.2, 0.4], "y0": [1]}
  ],
  "T": 2
}"#;
