//! Brute-force reference solvers used to falsify the equilibrium solvers.
//!
//! Static welfare is maximized by dynamic programming over a capacity grid;
//! tiny dynamic instances are searched exhaustively over a control grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamic::DynamicScenario;
use crate::error::{EqError, Result};
use crate::static_eq::{dual_value, Mode, StaticScenario};

pub const MAX_DP_CELLS: f64 = 1e6;
pub const MAX_GRID_POINTS: f64 = 1e7;
/// Below this many `(agent, state, choice)` triples every DP stage is scanned in full.
const EXHAUSTIVE_WORK: f64 = 2e7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub welfare: f64,
    /// Grid-snapped decision: loads for static scenarios, stacked controls
    /// (agent-major) for dynamic ones.
    pub allocation: Vec<f64>,
    pub resolution: f64,
}

/// One DP stage: `next[j] = max_{x <= j} prev[j - x] + f[x]`, keeping the
/// largest maximizing `x`.
fn stage(prev: &[f64], f: &[f64], exhaustive: bool) -> (Vec<f64>, Vec<u32>) {
    let cells = prev.len();
    let mut value = vec![f64::NEG_INFINITY; cells];
    let mut choice = vec![0u32; cells];
    if exhaustive {
        for j in 0..cells {
            let (v, x) = scan(prev, f, j, 0, j);
            value[j] = v;
            choice[j] = x as u32;
        }
    } else {
        monotone_fill(prev, f, 0, cells - 1, 0, cells - 1, &mut value, &mut choice);
    }
    (value, choice)
}

fn scan(prev: &[f64], f: &[f64], j: usize, lo: usize, hi: usize) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, lo);
    for x in lo..=hi.min(j) {
        let v = prev[j - x] + f[x];
        if v >= best.0 {
            best = (v, x);
        }
    }
    best
}

/// `prev` is concave, so `(j, x) -> prev[j - x]` has increasing differences
/// and the largest maximizer is nondecreasing in `j`.
#[allow(clippy::too_many_arguments)]
fn monotone_fill(
    prev: &[f64],
    f: &[f64],
    jl: usize,
    jr: usize,
    optl: usize,
    optr: usize,
    value: &mut [f64],
    choice: &mut [u32],
) {
    let mut stack = vec![(jl, jr, optl, optr)];
    while let Some((jl, jr, optl, optr)) = stack.pop() {
        let mid = jl + (jr - jl) / 2;
        let (v, x) = scan(prev, f, mid, optl, optr);
        value[mid] = v;
        choice[mid] = x as u32;
        if mid > jl {
            stack.push((jl, mid - 1, optl, x));
        }
        if mid < jr {
            stack.push((mid + 1, jr, x, optr));
        }
    }
}

fn dp_welfare(s: &StaticScenario, resolution: f64, mode: Mode) -> Result<OracleResult> {
    s.validate()?;
    if !(resolution > 0.0) {
        return Err(EqError::InvalidInput("resolution must be positive".into()));
    }
    let capacity = s.capacity();
    let ratio = capacity / resolution;
    if ratio > MAX_DP_CELLS {
        return Err(EqError::GridTooLarge {
            cells: ratio,
            limit: MAX_DP_CELLS,
        });
    }
    let units = ratio.round() as usize;
    let cells = units + 1;
    let n = s.n();
    let exhaustive = n as f64 * (cells as f64).powi(2) / 2.0 <= EXHAUSTIVE_WORK;
    let tables: Vec<Vec<f64>> = s
        .utilities()
        .map(|u| (0..cells).map(|j| u.value(j as f64 * resolution)).collect())
        .collect();

    let mut value = tables[0].clone();
    let mut choices: Vec<Vec<u32>> = Vec::with_capacity(n);
    choices.push((0..cells as u32).collect());
    for f in &tables[1..] {
        let (v, c) = stage(&value, f, exhaustive);
        value = v;
        choices.push(c);
    }

    let mut remaining = match mode {
        Mode::Sald => units,
        // Smallest total load among the maximizers.
        Mode::Saltd => (0..cells).fold(0, |best, j| if value[j] > value[best] { j } else { best }),
    };
    let welfare = value[remaining];
    let mut units_per_agent = vec![0usize; n];
    for i in (0..n).rev() {
        let x = choices[i][remaining] as usize;
        units_per_agent[i] = x;
        remaining -= x;
    }
    Ok(OracleResult {
        welfare,
        allocation: units_per_agent.iter().map(|&u| u as f64 * resolution).collect(),
        resolution,
    })
}

/// Grid optimum of `sum_i f_i(x_i)` subject to `sum_i x_i = C`, with `C`
/// rounded to the nearest grid multiple.
pub fn dp_welfare_sald(s: &StaticScenario, resolution: f64) -> Result<OracleResult> {
    dp_welfare(s, resolution, Mode::Sald)
}

/// Grid optimum of `sum_i f_i(x_i)` subject to `sum_i x_i <= C`.
pub fn dp_welfare_saltd(s: &StaticScenario, resolution: f64) -> Result<OracleResult> {
    dp_welfare(s, resolution, Mode::Saltd)
}

/// Dual value at `lambda` minus the welfare of `x`. Nonnegative for any
/// price when `x` is feasible, and zero at an equilibrium. Feasible means
/// `sum x = C`, relaxed to `sum x <= C` when `lambda >= 0`.
pub fn duality_gap(s: &StaticScenario, lambda: f64, x: &[f64]) -> Result<f64> {
    s.validate()?;
    if x.len() != s.n() {
        return Err(EqError::DimensionMismatch(format!(
            "{} loads for {} agents",
            x.len(),
            s.n()
        )));
    }
    let capacity = s.capacity();
    let tol = 1e-6 * capacity.abs().max(1.0);
    let negative = x.iter().fold(0.0, |m: f64, v| m.max(-v));
    let excess = x.iter().sum::<f64>() - capacity;
    let imbalance = if lambda >= 0.0 { excess.max(0.0) } else { excess.abs() };
    let residual = negative.max(imbalance);
    if !(residual <= tol) {
        return Err(EqError::InfeasiblePoint { residual });
    }
    Ok(dual_value(s, lambda, Mode::Sald) - s.welfare(x))
}

/// Uniform bounds on every control component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlBox {
    pub lower: f64,
    pub upper: f64,
}

impl ControlBox {
    pub fn symmetric(radius: f64) -> Self {
        Self {
            lower: -radius,
            upper: radius,
        }
    }
}

/// Exhaustive search over controls on a grid, with trades eliminated: a
/// profile is feasible when `sum_i h_i(u_i(t)) <= sum_i a_i(t)` at every step.
pub fn grid_search_daltd(s: &DynamicScenario, bounds: ControlBox, resolution: f64) -> Result<OracleResult> {
    s.validate()?;
    if !(resolution > 0.0) || !(bounds.upper >= bounds.lower) {
        return Err(EqError::InvalidInput("grid needs a positive resolution and a nonempty box".into()));
    }
    let levels = ((bounds.upper - bounds.lower) / resolution + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..levels).map(|j| bounds.lower + j as f64 * resolution).collect();
    let horizon = s.horizon;
    let dims: Vec<usize> = s.agents.iter().map(|a| a.input_dim() * horizon).collect();
    let total_dims: usize = dims.iter().sum();
    let points = (levels as f64).powi(total_dims as i32);
    if points > MAX_GRID_POINTS {
        return Err(EqError::GridTooLarge {
            cells: points,
            limit: MAX_GRID_POINTS,
        });
    }
    let supply: Vec<f64> = (0..horizon).map(|t| s.total_supply(t)).collect();

    let decode = |mut index: usize| -> Vec<f64> {
        let mut u = vec![0.0; total_dims];
        for slot in u.iter_mut().rev() {
            *slot = grid[index % levels];
            index /= levels;
        }
        u
    };
    let evaluate = |index: usize| -> Option<f64> {
        let u = decode(index);
        let mut offset = 0;
        let mut used = vec![0.0; horizon];
        let mut welfare = 0.0;
        for (agent, &d) in s.agents.iter().zip(&dims) {
            let ui = &u[offset..offset + d];
            let p = agent.input_dim();
            for (t, acc) in used.iter_mut().enumerate() {
                *acc += agent.resource_use(&ui[t * p..(t + 1) * p]);
            }
            welfare += agent.utility(ui).ok()?;
            offset += d;
        }
        used.iter().zip(&supply).all(|(h, a)| h <= a).then_some(welfare)
    };

    let best = (0..points as usize)
        .into_par_iter()
        .filter_map(|i| evaluate(i).map(|w| (w, i)))
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        });
    let (welfare, index) = best.ok_or_else(|| EqError::InvalidInput("no feasible grid point".into()))?;
    Ok(OracleResult {
        welfare,
        allocation: decode(index),
        resolution,
    })
}
