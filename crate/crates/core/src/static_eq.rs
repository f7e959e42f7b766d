//! Static market clearing for agents with load decisions only (SALD) and with
//! load plus trading decisions (SALTD).
//!
//! Both problems reduce to a scalar dual: aggregate demand is a nonincreasing
//! set-valued function of the price, so the clearing price is found by
//! bisection and the allocation is then reconciled inside the per-agent
//! argmax intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};
use crate::utility::{ResponseInterval, UtilityFunction};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Doublings of the negative price bracket before giving up.
const MAX_BRACKET_DOUBLINGS: usize = 1100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub utility: UtilityFunction,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticScenario {
    pub agents: Vec<AgentSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sald,
    Saltd,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Sald => "sald",
            Mode::Saltd => "saltd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticEquilibrium {
    pub lambda: f64,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<f64>>,
    #[serde(default)]
    pub duality_gap: f64,
    #[serde(default)]
    pub balance_residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BisectionOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl StaticScenario {
    pub fn new(agents: Vec<AgentSpec>) -> Self {
        Self { agents }
    }

    /// Agents with the given utilities, each holding `capacity / n`.
    pub fn uniform(utilities: &[UtilityFunction], capacity: f64) -> Self {
        let share = capacity / utilities.len() as f64;
        Self {
            agents: utilities
                .iter()
                .map(|u| AgentSpec {
                    utility: u.clone(),
                    a: share,
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn capacity(&self) -> f64 {
        self.agents.iter().map(|a| a.a).sum()
    }

    pub fn utilities(&self) -> impl Iterator<Item = &UtilityFunction> {
        self.agents.iter().map(|a| &a.utility)
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(EqError::InvalidInput("scenario has no agents".into()));
        }
        for (i, agent) in self.agents.iter().enumerate() {
            if !agent.utility.check_concavity() {
                return Err(EqError::NonConcaveUtility { agent: i });
            }
            if !(agent.a >= 0.0) || !agent.a.is_finite() {
                return Err(EqError::NegativeResource {
                    agent: i,
                    value: agent.a,
                });
            }
        }
        Ok(())
    }

    pub fn welfare(&self, x: &[f64]) -> f64 {
        self.utilities().zip(x).map(|(u, &xi)| u.value(xi.max(0.0))).sum()
    }
}

pub(crate) fn scaled(tol: f64, magnitude: f64) -> f64 {
    tol * magnitude.abs().max(1.0)
}

/// Sum of lower and upper ends of the agents' best responses.
fn aggregate_demand(utilities: &[&UtilityFunction], lambda: f64) -> (f64, f64) {
    utilities.iter().fold((0.0, 0.0), |(lo, hi), u| {
        let r = u.best_response(lambda);
        (lo + r.lo, hi + r.hi)
    })
}

fn clears(utilities: &[&UtilityFunction], lambda: f64, capacity: f64) -> bool {
    let eps = scaled(DEFAULT_TOL, capacity);
    let (lo, hi) = aggregate_demand(utilities, lambda);
    lo <= capacity + eps && hi >= capacity - eps
}

/// Smallest price at which the minimal aggregate demand no longer exceeds
/// `capacity`, optionally restricted to prices `>= floor`.
fn clearing_price(
    utilities: &[&UtilityFunction],
    capacity: f64,
    floor: Option<f64>,
    opts: &BisectionOptions,
) -> Result<f64> {
    let infeasible = || EqError::InfeasibleBalance { capacity };
    if !capacity.is_finite() || capacity < 0.0 {
        return Err(infeasible());
    }
    let excess = |lambda: f64| aggregate_demand(utilities, lambda).0 > capacity;

    let mut hi = utilities
        .iter()
        .map(|u| u.marginal_value_at_zero())
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    let mut lo;
    match floor {
        Some(f) => {
            if !excess(f) {
                return Ok(f);
            }
            lo = f;
            hi = hi.max(f + 1.0);
        }
        None => {
            if hi > 0.0 && excess(0.0) {
                lo = 0.0;
            } else {
                hi = hi.min(0.0);
                let mut step = 1.0;
                lo = hi - step;
                let mut doublings = 0;
                while !excess(lo) {
                    doublings += 1;
                    if doublings > MAX_BRACKET_DOUBLINGS || !lo.is_finite() {
                        return Err(infeasible());
                    }
                    step *= 2.0;
                    lo = hi - step;
                }
            }
        }
    }

    for _ in 0..opts.max_iter {
        if hi - lo <= opts.tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Snap onto a kink when the bracket straddles one: at kinks demand is
    // set-valued and no interior point of the bracket clears exactly.
    let mut kinks: Vec<f64> = utilities
        .iter()
        .flat_map(|u| u.kink_prices())
        .filter(|&p| p >= lo - opts.tol && p <= hi + opts.tol)
        .filter(|&p| floor.is_none_or(|f| p >= f))
        .collect();
    kinks.sort_by(f64::total_cmp);
    if let Some(&p) = kinks.iter().find(|&&p| clears(utilities, p, capacity)) {
        return Ok(p);
    }

    // Demand is continuous on the bracket; interpolate its lower envelope.
    let d_lo = aggregate_demand(utilities, lo).0;
    let d_hi = aggregate_demand(utilities, hi).0;
    if d_lo.is_finite() && d_lo > d_hi {
        let t = ((d_lo - capacity) / (d_lo - d_hi)).clamp(0.0, 1.0);
        let p = lo + t * (hi - lo);
        if clears(utilities, p, capacity) {
            return Ok(p);
        }
    }
    Ok(hi)
}

/// Start every agent at the low end of its interval, then hand out the
/// remaining capacity in ascending agent order up to each upper end. Any
/// tolerance-sized mismatch left over is absorbed in the same order so that
/// the allocation sums to `capacity`.
fn reconcile(responses: &[ResponseInterval], capacity: f64) -> Vec<f64> {
    let mut x: Vec<f64> = responses.iter().map(|r| r.lo).collect();
    let mut remainder = capacity - x.iter().sum::<f64>();
    if remainder > 0.0 {
        for (xi, r) in x.iter_mut().zip(responses) {
            let add = remainder.min(r.hi - *xi);
            *xi += add;
            remainder -= add;
            if remainder <= 0.0 {
                break;
            }
        }
    }
    if remainder > 0.0 {
        x[0] += remainder;
    } else if remainder < 0.0 {
        for xi in x.iter_mut() {
            let take = (-remainder).min(*xi);
            *xi -= take;
            remainder += take;
            if remainder >= 0.0 {
                break;
            }
        }
    }
    x
}

/// Split nonnegative total slack `a_i - x_i` into trades summing to zero:
/// buyers trade their full shortfall, sellers shrink proportionally.
pub(crate) fn shrink_trades(slack: &[f64]) -> Vec<f64> {
    let deficit: f64 = slack.iter().filter(|s| **s < 0.0).map(|s| -s).sum();
    let surplus: f64 = slack.iter().filter(|s| **s > 0.0).sum();
    let theta = if surplus > 0.0 {
        (deficit / surplus).min(1.0)
    } else {
        0.0
    };
    slack
        .iter()
        .map(|&s| if s < 0.0 { s } else { s * theta })
        .collect()
}

/// `sup_{x >= 0} f(x) + lambda (a - x)` summed over agents. Infinite when
/// some agent has no maximizer, or when `lambda < 0` under trading.
pub fn dual_value(s: &StaticScenario, lambda: f64, mode: Mode) -> f64 {
    if mode == Mode::Saltd && lambda < 0.0 {
        return f64::INFINITY;
    }
    s.agents
        .iter()
        .map(|ag| {
            let r = ag.utility.best_response(lambda);
            if r.is_attained() {
                ag.utility.value(r.lo) + lambda * (ag.a - r.lo)
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

pub fn solve_sald(s: &StaticScenario, tol: f64) -> Result<StaticEquilibrium> {
    solve(s, Mode::Sald, &BisectionOptions { tol, ..Default::default() })
}

pub fn solve_saltd(s: &StaticScenario, tol: f64) -> Result<StaticEquilibrium> {
    solve(s, Mode::Saltd, &BisectionOptions { tol, ..Default::default() })
}

pub fn solve(s: &StaticScenario, mode: Mode, opts: &BisectionOptions) -> Result<StaticEquilibrium> {
    s.validate()?;
    let utilities: Vec<&UtilityFunction> = s.utilities().collect();
    let capacity = s.capacity();
    let floor = match mode {
        Mode::Sald => None,
        Mode::Saltd => Some(0.0),
    };
    let lambda = clearing_price(&utilities, capacity, floor, opts)?;
    let responses: Vec<ResponseInterval> = utilities.iter().map(|u| u.best_response(lambda)).collect();
    if responses.iter().any(|r| !r.is_attained()) {
        return Err(EqError::InfeasibleBalance { capacity });
    }

    let (x, e) = match mode {
        Mode::Sald => (reconcile(&responses, capacity), None),
        Mode::Saltd if lambda > 0.0 => {
            let x = reconcile(&responses, capacity);
            let e = s.agents.iter().zip(&x).map(|(ag, xi)| ag.a - xi).collect();
            (x, Some(e))
        }
        Mode::Saltd => {
            let x: Vec<f64> = responses.iter().map(|r| r.lo).collect();
            let slack: Vec<f64> = s.agents.iter().zip(&x).map(|(ag, xi)| ag.a - xi).collect();
            (x, Some(shrink_trades(&slack)))
        }
    };

    let balance_residual = match &e {
        None => x.iter().sum::<f64>() - capacity,
        Some(e) => e.iter().sum(),
    };
    let duality_gap = (dual_value(s, lambda, mode) - s.welfare(&x)).abs();
    Ok(StaticEquilibrium {
        lambda,
        x,
        e,
        duality_gap,
        balance_residual,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub payoff_gap: f64,
    pub balance: f64,
    pub constraint: f64,
    pub duality_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            payoff_gap: 1e-6,
            balance: 1e-6,
            constraint: 1e-6,
            duality_gap: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            payoff_gap: tol,
            balance: tol,
            constraint: tol,
            duality_gap: tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentCheck {
    /// Best achievable payoff at the price minus the payoff actually obtained.
    pub payoff_gap: f64,
    /// Distance of the allocation from the argmax interval.
    pub response_distance: f64,
    /// Violation of `x >= 0` and, under trading, of `x + e <= a`.
    pub constraint_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub mode: Mode,
    pub agents: Vec<AgentCheck>,
    pub balance_residual: f64,
    pub max_payoff_gap: f64,
    pub max_response_distance: f64,
    pub max_constraint_violation: f64,
    pub duality_gap: f64,
    pub negative_price: bool,
    pub accepted: bool,
}

pub fn verify_equilibrium(
    s: &StaticScenario,
    eq: &StaticEquilibrium,
    mode: Mode,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let n = s.n();
    if eq.x.len() != n {
        return Err(EqError::DimensionMismatch(format!("x has {} entries, scenario has {n} agents", eq.x.len())));
    }
    let trades = match (mode, &eq.e) {
        (Mode::Saltd, Some(e)) if e.len() == n => Some(e.as_slice()),
        (Mode::Saltd, Some(e)) => {
            return Err(EqError::DimensionMismatch(format!("e has {} entries, scenario has {n} agents", e.len())))
        }
        (Mode::Saltd, None) => {
            return Err(EqError::DimensionMismatch("trading verification needs a trade vector".into()))
        }
        (Mode::Sald, _) => None,
    };
    let lambda = eq.lambda;
    let negative_price = mode == Mode::Saltd && lambda < 0.0;

    let mut agents = Vec::with_capacity(n);
    let mut gap_ok = true;
    for (i, ag) in s.agents.iter().enumerate() {
        let xi = eq.x[i];
        let f = ag.utility.value(xi.max(0.0));
        let r = ag.utility.best_response(lambda);
        let best = if negative_price || !r.is_attained() {
            f64::INFINITY
        } else {
            ag.utility.value(r.lo) + lambda * (ag.a - r.lo)
        };
        let (actual, mut violation) = match trades {
            None => (f + lambda * (ag.a - xi), 0.0),
            Some(e) => (f + lambda * e[i], (xi + e[i] - ag.a).max(0.0)),
        };
        violation = violation.max(-xi);
        let payoff_gap = best - actual;
        gap_ok &= payoff_gap <= scaled(tol.payoff_gap, best);
        agents.push(AgentCheck {
            payoff_gap,
            response_distance: r.distance(xi),
            constraint_violation: violation,
        });
    }

    let capacity = s.capacity();
    let balance_residual = match trades {
        None => eq.x.iter().sum::<f64>() - capacity,
        Some(e) => e.iter().sum(),
    };
    let primal = s.welfare(&eq.x);
    let duality_gap = (dual_value(s, lambda, mode) - primal).abs();
    let max_payoff_gap = agents.iter().map(|a| a.payoff_gap).fold(f64::NEG_INFINITY, f64::max);
    let max_response_distance = agents.iter().map(|a| a.response_distance).fold(0.0, f64::max);
    let max_constraint_violation = agents.iter().map(|a| a.constraint_violation).fold(0.0, f64::max);

    let accepted = gap_ok
        && !negative_price
        && balance_residual.abs() <= scaled(tol.balance, capacity)
        && max_constraint_violation <= scaled(tol.constraint, capacity)
        && duality_gap <= scaled(tol.duality_gap, primal);

    Ok(VerificationReport {
        mode,
        agents,
        balance_residual,
        max_payoff_gap,
        max_response_distance,
        max_constraint_violation,
        duality_gap,
        negative_price,
        accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub capacity: f64,
    pub lambda: f64,
}

/// Clearing price as a function of network capacity. Each capacity is split
/// evenly across agents; only the total enters either welfare problem.
pub fn price_capacity_sweep(
    template: &[UtilityFunction],
    capacities: &[f64],
    mode: Mode,
    opts: &BisectionOptions,
) -> Result<Vec<SweepPoint>> {
    if template.is_empty() {
        return Err(EqError::InvalidInput("sweep template has no agents".into()));
    }
    if let Some(c) = capacities.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(EqError::InvalidInput(format!("capacity {c} must be positive and finite")));
    }
    let mut points = capacities
        .par_iter()
        .map(|&c| {
            let eq = solve(&StaticScenario::uniform(template, c), mode, opts)?;
            Ok(SweepPoint {
                capacity: c,
                lambda: eq.lambda,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.capacity.total_cmp(&b.capacity));
    Ok(points)
}

/// A sweep template: utilities plus the capacity grid to scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub utilities: Vec<UtilityFunction>,
    #[serde(default = "default_sweep_step")]
    pub step: f64,
    #[serde(default = "default_sweep_count")]
    pub count: usize,
}

fn default_sweep_step() -> f64 {
    0.8
}

fn default_sweep_count() -> usize {
    50
}

impl SweepSpec {
    pub fn capacities(&self) -> Vec<f64> {
        capacity_grid(self.step, self.count)
    }
}

/// The capacity grid `step, 2 step, ..., count step`.
pub fn capacity_grid(step: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|j| step * j as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> StaticScenario {
        let a = [13.0, 14.0, 4.0, 7.0];
        let k = [21.0, 20.0, 23.0, 32.0];
        let beta = [135.0, 600.0, 130.0, 150.0];
        StaticScenario::new(
            (0..4)
                .map(|i| AgentSpec {
                    utility: UtilityFunction::capped_linear(k[i], beta[i]),
                    a: a[i],
                })
                .collect(),
        )
    }

    fn pm1(capacity: f64) -> StaticScenario {
        let b = [2.0, 5.0, 3.0, 4.0];
        let k = [21.0, 17.0, 23.0, 13.0];
        let us: Vec<_> = b.iter().zip(&k).map(|(&b, &k)| UtilityFunction::quadratic(b, k)).collect();
        StaticScenario::uniform(&us, capacity)
    }

    #[test]
    fn example1_sald_hits_the_kink() {
        let eq = solve_sald(&example1(), DEFAULT_TOL).unwrap();
        assert_eq!(eq.lambda, 20.0);
        let expected = [6.429, 21.232, 5.652, 4.688];
        for (x, e) in eq.x.iter().zip(expected) {
            assert!((x - e).abs() < 1e-3, "{x} vs {e}");
        }
        assert!(eq.balance_residual.abs() < 1e-9);
    }

    #[test]
    fn single_quadratic_agent_clears_at_zero() {
        let s = StaticScenario::new(vec![AgentSpec {
            utility: UtilityFunction::quadratic(1.0, 5.0),
            a: 5.0,
        }]);
        let eq = solve_sald(&s, DEFAULT_TOL).unwrap();
        assert!(eq.lambda.abs() < 1e-9);
        assert!((eq.x[0] - 5.0).abs() < 1e-9);
        let tr = solve_saltd(&s, DEFAULT_TOL).unwrap();
        assert_eq!(tr.e.unwrap(), vec![0.0]);
    }

    #[test]
    fn pm1_matches_closed_form() {
        // (sum k/b - C) / sum 1/b, evaluated by hand.
        let sum_kb = 10.5 + 3.4 + 23.0 / 3.0 + 3.25;
        let sum_b = 0.5 + 0.2 + 1.0 / 3.0 + 0.25;
        let expected = (sum_kb - 10.0) / sum_b;
        let eq = solve_sald(&pm1(10.0), DEFAULT_TOL).unwrap();
        assert!((eq.lambda - expected).abs() < 1e-9, "{} vs {expected}", eq.lambda);
        assert!((eq.lambda - 11.545).abs() < 1e-3);
    }

    #[test]
    fn saltd_slack_at_zero_price() {
        let s = pm1(30.0);
        let eq = solve_saltd(&s, DEFAULT_TOL).unwrap();
        assert_eq!(eq.lambda, 0.0);
        let expected = [10.5, 3.4, 23.0 / 3.0, 3.25];
        for (x, e) in eq.x.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        let e = eq.e.unwrap();
        assert!(e.iter().sum::<f64>().abs() < 1e-9);
        for i in 0..4 {
            assert!(e[i] <= s.agents[i].a - eq.x[i] + 1e-12);
        }
    }

    #[test]
    fn sald_price_goes_negative_with_oversupply() {
        let eq = solve_sald(&pm1(40.0), DEFAULT_TOL).unwrap();
        let sum_kb = 10.5 + 3.4 + 23.0 / 3.0 + 3.25;
        let sum_b = 0.5 + 0.2 + 1.0 / 3.0 + 0.25;
        assert!((eq.lambda - (sum_kb - 40.0) / sum_b).abs() < 1e-9);
        assert_eq!(solve_saltd(&pm1(40.0), DEFAULT_TOL).unwrap().lambda, 0.0);
    }

    #[test]
    fn verify_rejects_perturbed_price() {
        let s = example1();
        let mut eq = solve_sald(&s, DEFAULT_TOL).unwrap();
        assert!(verify_equilibrium(&s, &eq, Mode::Sald, &Tolerances::default()).unwrap().accepted);
        eq.lambda = 25.0;
        let rep = verify_equilibrium(&s, &eq, Mode::Sald, &Tolerances::default()).unwrap();
        assert!(!rep.accepted);
        // At 25 agent 2 would consume nothing: 25 * 14 versus 20 * x2 + 25 (14 - x2).
        let x2 = eq.x[1];
        let direct = 25.0 * 14.0 - (20.0 * x2 + 25.0 * (14.0 - x2));
        assert!((rep.agents[1].payoff_gap - direct).abs() < 1e-9);
        assert!(rep.agents[1].payoff_gap > 0.0);
    }

    #[test]
    fn verify_rejects_scaled_allocation() {
        let s = pm1(10.0);
        let mut eq = solve_sald(&s, DEFAULT_TOL).unwrap();
        eq.x.iter_mut().for_each(|x| *x *= 1.1);
        let rep = verify_equilibrium(&s, &eq, Mode::Sald, &Tolerances::default()).unwrap();
        assert!(!rep.accepted);
        assert!(rep.balance_residual > 0.5);
    }

    #[test]
    fn verify_checks_dimensions() {
        let s = pm1(10.0);
        let eq = StaticEquilibrium {
            lambda: 1.0,
            x: vec![1.0],
            e: None,
            duality_gap: 0.0,
            balance_residual: 0.0,
        };
        assert!(matches!(
            verify_equilibrium(&s, &eq, Mode::Sald, &Tolerances::default()),
            Err(EqError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn non_concave_utility_is_rejected() {
        let s = StaticScenario::new(vec![AgentSpec {
            utility: UtilityFunction::piecewise_linear(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 5.0]]),
            a: 1.0,
        }]);
        assert!(matches!(solve_sald(&s, DEFAULT_TOL), Err(EqError::NonConcaveUtility { agent: 0 })));
    }

    #[test]
    fn zero_capacity_clears_at_top_marginal_value() {
        let s = StaticScenario::new(vec![
            AgentSpec { utility: UtilityFunction::quadratic(1.0, 3.0), a: 0.0 },
            AgentSpec { utility: UtilityFunction::capped_linear(5.0, 2.0), a: 0.0 },
        ]);
        let eq = solve_sald(&s, DEFAULT_TOL).unwrap();
        assert_eq!(eq.lambda, 5.0);
        assert_eq!(eq.x, vec![0.0, 0.0]);
    }

    #[test]
    fn trade_shrinkage_balances() {
        let e = shrink_trades(&[3.0, -1.0, 1.0]);
        assert_eq!(e, vec![0.75, -1.0, 0.25]);
        assert_eq!(shrink_trades(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn sweep_is_sorted_and_nonincreasing() {
        let us: Vec<_> = pm1(1.0).agents.into_iter().map(|a| a.utility).collect();
        let mut grid = capacity_grid(0.8, 50);
        grid.reverse();
        let pts = price_capacity_sweep(&us, &grid, Mode::Sald, &BisectionOptions::default()).unwrap();
        assert_eq!(pts.len(), 50);
        assert!(pts.windows(2).all(|w| w[0].capacity < w[1].capacity && w[1].lambda <= w[0].lambda + 1e-12));
    }
}
