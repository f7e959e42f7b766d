//! Dynamic market clearing for agents with linear dynamics and quadratic
//! stage utilities.
//!
//! Each agent `i` evolves as `y(t+1) = A y(t) + B u(t)` and collects
//! `y'R y + W y + u'Q u + K u` per step plus `y'R_T y + W_T y` at the horizon.
//! Acting costs `h(u) = u'H u` units of resource, and the agent trades
//! `e(t) <= a(t) - h(u(t))` at price `lambda_t`. The coupled welfare problem
//! is solved by dual decomposition: agents best-respond to a price vector, and
//! prices move along the per-step balance residual.

use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};
use crate::static_eq::shrink_trades;

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 50_000;
pub const DEFAULT_STEP_SCALE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AgentRecord", into = "AgentRecord")]
pub struct DynamicAgent {
    /// `A`, m x m.
    pub dynamics: DMatrix<f64>,
    /// `B`, m x p.
    pub input: DMatrix<f64>,
    /// `R`, negative definite.
    pub state_weight: DMatrix<f64>,
    /// `W`.
    pub state_linear: DVector<f64>,
    /// `Q`, negative definite.
    pub input_weight: DMatrix<f64>,
    /// `K`.
    pub input_linear: DVector<f64>,
    /// `H`, positive definite.
    pub resource: DMatrix<f64>,
    /// Resource produced at each step.
    pub supply: Vec<f64>,
    pub y0: DVector<f64>,
    /// Terminal quadratic weight; `R` when absent.
    pub terminal_weight: Option<DMatrix<f64>>,
    /// Terminal linear weight; `W` when absent.
    pub terminal_linear: Option<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicScenario {
    pub agents: Vec<DynamicAgent>,
    #[serde(rename = "T")]
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicEquilibrium {
    pub lambda: Vec<f64>,
    /// Stacked controls `(u(0), ..., u(T-1))` per agent.
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    /// Trades per agent and step.
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    /// `max_t |sum_i e_i(t)|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Trajectory as an affine map of the initial state and the stacked controls.
#[derive(Debug, Clone)]
pub struct CondensedDynamics {
    /// `(T+1) m x m`; block `t` is `A^t`.
    pub transition: DMatrix<f64>,
    /// `(T+1) m x T p`; block `(t, s)` is `A^(t-1-s) B` for `s < t`.
    pub control: DMatrix<f64>,
}

impl CondensedDynamics {
    pub fn apply(&self, y0: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.transition * y0 + &self.control * u
    }
}

impl DynamicAgent {
    pub fn state_dim(&self) -> usize {
        self.dynamics.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.input.ncols()
    }

    pub fn terminal_weight(&self) -> &DMatrix<f64> {
        self.terminal_weight.as_ref().unwrap_or(&self.state_weight)
    }

    pub fn terminal_linear(&self) -> &DVector<f64> {
        self.terminal_linear.as_ref().unwrap_or(&self.state_linear)
    }

    /// Resource drawn by control `u`.
    pub fn resource_use(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        (u.transpose() * &self.resource * &u)[(0, 0)]
    }

    fn validate(&self, index: usize, horizon: usize) -> Result<()> {
        let m = self.state_dim();
        let p = self.input_dim();
        let dims = [
            ("A", self.dynamics.shape(), (m, m)),
            ("B", self.input.shape(), (m, p)),
            ("R", self.state_weight.shape(), (m, m)),
            ("W", (self.state_linear.len(), 1), (m, 1)),
            ("Q", self.input_weight.shape(), (p, p)),
            ("K", (self.input_linear.len(), 1), (p, 1)),
            ("H", self.resource.shape(), (p, p)),
            ("y0", (self.y0.len(), 1), (m, 1)),
            ("a", (self.supply.len(), 1), (horizon, 1)),
            ("R_T", self.terminal_weight().shape(), (m, m)),
            ("W_T", (self.terminal_linear().len(), 1), (m, 1)),
        ];
        for (name, got, want) in dims {
            if got != want {
                return Err(EqError::DimensionMismatch(format!(
                    "agent {index}: {name} is {got:?}, expected {want:?}"
                )));
            }
        }
        if self.supply.iter().any(|a| !a.is_finite()) {
            return Err(EqError::InvalidInput(format!("agent {index}: supply must be finite")));
        }
        let negdef = |m: &DMatrix<f64>| (-symmetric(m)).cholesky().is_some();
        if !negdef(&self.state_weight) || !negdef(&self.input_weight) || !negdef(self.terminal_weight()) {
            return Err(EqError::InvalidInput(format!(
                "agent {index}: R, Q and the terminal weight must be negative definite"
            )));
        }
        if symmetric(&self.resource).cholesky().is_none() {
            return Err(EqError::InvalidInput(format!("agent {index}: H must be positive definite")));
        }
        Ok(())
    }

    /// Stage utility `y'R y + W y + u'Q u + K u`.
    fn stage_utility(&self, y: &DVector<f64>, u: &DVector<f64>) -> f64 {
        quad(&self.state_weight, y) + self.state_linear.dot(y) + quad(&self.input_weight, u) + self.input_linear.dot(u)
    }

    fn terminal_utility(&self, y: &DVector<f64>) -> f64 {
        quad(self.terminal_weight(), y) + self.terminal_linear().dot(y)
    }

    /// Utility of a control sequence, excluding trade income.
    pub fn utility(&self, u: &[f64]) -> Result<f64> {
        let horizon = self.supply.len();
        let ys = rollout(self, u)?;
        let p = self.input_dim();
        let mut total = 0.0;
        for t in 0..horizon {
            let ut = DVector::from_column_slice(&u[t * p..(t + 1) * p]);
            total += self.stage_utility(&ys[t], &ut);
        }
        Ok(total + self.terminal_utility(&ys[horizon]))
    }

    /// Utility plus trade income `sum_t lambda_t e(t)`.
    pub fn payoff(&self, u: &[f64], e: &[f64], lambda: &[f64]) -> Result<f64> {
        let income: f64 = lambda.iter().zip(e).map(|(l, e)| l * e).sum();
        Ok(self.utility(u)? + income)
    }
}

impl DynamicScenario {
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn total_supply(&self, t: usize) -> f64 {
        self.agents.iter().map(|a| a.supply[t]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(EqError::InvalidInput("horizon must be at least 1".into()));
        }
        if self.agents.is_empty() {
            return Err(EqError::InvalidInput("scenario has no agents".into()));
        }
        for (i, agent) in self.agents.iter().enumerate() {
            agent.validate(i, self.horizon)?;
        }
        for t in 0..self.horizon {
            if !(self.total_supply(t) > 0.0) {
                return Err(EqError::InfeasibleScenario { step: t });
            }
        }
        Ok(())
    }

    /// Total utility of a control profile, trades excluded.
    pub fn welfare(&self, u: &[Vec<f64>]) -> Result<f64> {
        self.agents.iter().zip(u).map(|(a, u)| a.utility(u)).sum()
    }
}

fn symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn quad(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

/// States `y(0), ..., y(T)` under stacked controls `u`.
pub fn rollout(agent: &DynamicAgent, u: &[f64]) -> Result<Vec<DVector<f64>>> {
    let p = agent.input_dim();
    let horizon = agent.supply.len();
    if u.len() != p * horizon {
        return Err(EqError::DimensionMismatch(format!(
            "control sequence has length {}, expected {}",
            u.len(),
            p * horizon
        )));
    }
    let mut ys = Vec::with_capacity(horizon + 1);
    ys.push(agent.y0.clone());
    for t in 0..horizon {
        let ut = DVector::from_column_slice(&u[t * p..(t + 1) * p]);
        let next = &agent.dynamics * &ys[t] + &agent.input * ut;
        ys.push(next);
    }
    Ok(ys)
}

pub fn condense(agent: &DynamicAgent, horizon: usize) -> CondensedDynamics {
    let m = agent.state_dim();
    let p = agent.input_dim();
    let mut transition = DMatrix::zeros((horizon + 1) * m, m);
    let mut power = DMatrix::identity(m, m);
    for t in 0..=horizon {
        transition.view_mut((t * m, 0), (m, m)).copy_from(&power);
        power = &agent.dynamics * power;
    }
    // powers[d] = A^d B
    let mut powers = Vec::with_capacity(horizon);
    let mut block = agent.input.clone();
    for _ in 0..horizon {
        powers.push(block.clone());
        block = &agent.dynamics * block;
    }
    let mut control = DMatrix::zeros((horizon + 1) * m, horizon * p);
    for t in 1..=horizon {
        for s in 0..t {
            control.view_mut((t * m, s * p), (m, p)).copy_from(&powers[t - 1 - s]);
        }
    }
    CondensedDynamics { transition, control }
}

#[derive(Debug, Clone)]
pub struct AgentResponse {
    /// Stacked optimal controls.
    pub u: Vec<f64>,
    /// Trades with the resource constraint tight.
    pub e: Vec<f64>,
    /// Optimal payoff including trade income.
    pub payoff: f64,
}

/// Price-independent pieces of an agent's best-response problem. With tight
/// trades the payoff is the concave quadratic `U'(G + D(lambda))U + 2 g'U + c`
/// where `D(lambda)` is block diagonal with blocks `Q - lambda_t H`.
struct ResponseModel {
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    input_sym: DMatrix<f64>,
    resource_sym: DMatrix<f64>,
}

impl ResponseModel {
    fn new(agent: &DynamicAgent, horizon: usize) -> Self {
        let m = agent.state_dim();
        let cond = condense(agent, horizon);
        let mut weights = DMatrix::zeros((horizon + 1) * m, (horizon + 1) * m);
        let mut linear = DVector::zeros((horizon + 1) * m);
        let stage = symmetric(&agent.state_weight);
        for t in 0..=horizon {
            let (w, l) = if t < horizon {
                (&stage, &agent.state_linear)
            } else {
                (&symmetric(agent.terminal_weight()), agent.terminal_linear())
            };
            weights.view_mut((t * m, t * m), (m, m)).copy_from(w);
            linear.rows_mut(t * m, m).copy_from(l);
        }
        let gt_w = cond.control.transpose() * &weights;
        let gram = &gt_w * &cond.control;
        let p = agent.input_dim();
        let mut input_lin = DVector::zeros(horizon * p);
        for t in 0..horizon {
            input_lin.rows_mut(t * p, p).copy_from(&agent.input_linear);
        }
        let rhs = &gt_w * (&cond.transition * &agent.y0)
            + (cond.control.transpose() * linear) * 0.5
            + input_lin * 0.5;
        Self {
            gram,
            rhs,
            input_sym: symmetric(&agent.input_weight),
            resource_sym: symmetric(&agent.resource),
        }
    }

    fn solve(&self, lambda: &[f64], index: usize) -> Result<DVector<f64>> {
        let p = self.input_sym.nrows();
        let mut system = -&self.gram;
        for (t, &l) in lambda.iter().enumerate() {
            let block = &self.resource_sym * l - &self.input_sym;
            let mut view = system.view_mut((t * p, t * p), (p, p));
            view += block;
        }
        let chol = system.cholesky().ok_or(EqError::SingularSystem { agent: index })?;
        Ok(chol.solve(&self.rhs))
    }
}

fn tight_trades(agent: &DynamicAgent, u: &[f64]) -> Vec<f64> {
    let p = agent.input_dim();
    agent
        .supply
        .iter()
        .enumerate()
        .map(|(t, a)| a - agent.resource_use(&u[t * p..(t + 1) * p]))
        .collect()
}

fn check_prices(lambda: &[f64], horizon: usize) -> Result<()> {
    if lambda.len() != horizon {
        return Err(EqError::DimensionMismatch(format!(
            "price vector has length {}, horizon is {horizon}",
            lambda.len()
        )));
    }
    if let Some(t) = lambda.iter().position(|l| !(*l >= 0.0)) {
        return Err(EqError::InvalidInput(format!("price at step {t} is negative")));
    }
    Ok(())
}

pub fn agent_best_response(agent: &DynamicAgent, lambda: &[f64]) -> Result<AgentResponse> {
    let horizon = agent.supply.len();
    check_prices(lambda, horizon)?;
    respond(agent, &ResponseModel::new(agent, horizon), lambda, 0)
}

fn respond(agent: &DynamicAgent, model: &ResponseModel, lambda: &[f64], index: usize) -> Result<AgentResponse> {
    let u = model.solve(lambda, index)?;
    let u = u.as_slice().to_vec();
    let e = tight_trades(agent, &u);
    let payoff = agent.payoff(&u, &e, lambda)?;
    Ok(AgentResponse { u, e, payoff })
}

#[derive(Debug, Clone, Copy)]
pub struct DynamicOptions {
    /// Acceptance threshold on `max_t |sum_i e_i(t)|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Base step is `step_scale / (n max_t sum_i a_i(t))`, decayed as `1/sqrt(k)`.
    pub step_scale: f64,
    pub initial_price: f64,
    /// Fraction of trailing iterations averaged when the loop runs out.
    pub averaging_window: f64,
}

impl Default for DynamicOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            step_scale: DEFAULT_STEP_SCALE,
            initial_price: 1.0,
            averaging_window: 0.1,
        }
    }
}

/// At zero-price steps with surplus, sellers scale their trades down so the
/// step balances; returns the per-step residuals after that adjustment.
fn reconcile_zero_price_steps(lambda: &[f64], trades: &mut [Vec<f64>]) -> Vec<f64> {
    let horizon = lambda.len();
    let mut residuals = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let raw: f64 = trades.iter().map(|e| e[t]).sum();
        if lambda[t] == 0.0 && raw > 0.0 {
            let column: Vec<f64> = trades.iter().map(|e| e[t]).collect();
            for (e, v) in trades.iter_mut().zip(shrink_trades(&column)) {
                e[t] = v;
            }
        }
        residuals.push(trades.iter().map(|e| e[t]).sum());
    }
    residuals
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn solve_daltd(s: &DynamicScenario, opts: &DynamicOptions) -> Result<DynamicEquilibrium> {
    s.validate()?;
    let n = s.n();
    let horizon = s.horizon;
    let models: Vec<ResponseModel> = s.agents.iter().map(|a| ResponseModel::new(a, horizon)).collect();
    let peak_supply = (0..horizon).map(|t| s.total_supply(t)).fold(0.0, f64::max);
    let base_step = opts.step_scale / (n as f64 * peak_supply);
    let window = ((opts.max_iter as f64 * opts.averaging_window).ceil() as usize).max(1);
    let window_start = opts.max_iter.saturating_sub(window) + 1;

    let mut lambda = vec![opts.initial_price.max(0.0); horizon];
    let mut sum_u: Vec<Vec<f64>> = s.agents.iter().map(|a| vec![0.0; a.input_dim() * horizon]).collect();
    let mut sum_e = vec![vec![0.0; horizon]; n];
    let mut averaged = 0usize;
    let mut last_residual = f64::INFINITY;

    for k in 1..=opts.max_iter {
        let responses = s
            .agents
            .iter()
            .zip(&models)
            .enumerate()
            .map(|(i, (agent, model))| respond(agent, model, &lambda, i))
            .collect::<Result<Vec<_>>>()?;
        let raw: Vec<f64> = (0..horizon).map(|t| responses.iter().map(|r| r.e[t]).sum()).collect();
        let mut trades: Vec<Vec<f64>> = responses.iter().map(|r| r.e.clone()).collect();
        let residuals = reconcile_zero_price_steps(&lambda, &mut trades);
        last_residual = max_abs(&residuals);
        if k % 25 == 0 {
            let dual: f64 = responses.iter().map(|r| r.payoff).sum();
            debug!("iteration {k}: dual {dual:.9e}, residual {last_residual:.3e}");
        }
        if last_residual <= opts.tol {
            info!("price iteration converged after {k} iterations (residual {last_residual:.3e})");
            return Ok(DynamicEquilibrium {
                lambda,
                u: responses.into_iter().map(|r| r.u).collect(),
                e: trades,
                residual: last_residual,
                iterations: k,
            });
        }
        if k >= window_start {
            for (acc, r) in sum_u.iter_mut().zip(&responses) {
                acc.iter_mut().zip(&r.u).for_each(|(a, v)| *a += v);
            }
            for (acc, e) in sum_e.iter_mut().zip(&trades) {
                acc.iter_mut().zip(e).for_each(|(a, v)| *a += v);
            }
            averaged += 1;
        }
        let step = base_step / (k as f64).sqrt();
        for (l, r) in lambda.iter_mut().zip(&raw) {
            *l = (*l - step * r).max(0.0);
        }
    }

    let scale = 1.0 / averaged.max(1) as f64;
    let u: Vec<Vec<f64>> = sum_u.into_iter().map(|v| v.into_iter().map(|x| x * scale).collect()).collect();
    let e: Vec<Vec<f64>> = sum_e.into_iter().map(|v| v.into_iter().map(|x| x * scale).collect()).collect();
    let averaged_residual = max_abs(&(0..horizon).map(|t| e.iter().map(|ei| ei[t]).sum()).collect::<Vec<f64>>());
    Err(EqError::NoConvergence {
        residual: last_residual.min(averaged_residual),
        iterations: opts.max_iter,
        last: Box::new(DynamicEquilibrium {
            lambda,
            u,
            e,
            residual: averaged_residual,
            iterations: opts.max_iter,
        }),
    })
}

impl DynamicEquilibrium {
    /// State trajectories `y_i(0..=T)` implied by the controls.
    pub fn trajectories(&self, s: &DynamicScenario) -> Result<Vec<Vec<DVector<f64>>>> {
        s.agents.iter().zip(&self.u).map(|(a, u)| rollout(a, u)).collect()
    }

    pub fn welfare(&self, s: &DynamicScenario) -> Result<f64> {
        s.welfare(&self.u)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DynamicTolerances {
    /// Relative to `1 + |best payoff|`.
    pub payoff_gap: f64,
    pub residual: f64,
    pub constraint: f64,
}

impl Default for DynamicTolerances {
    fn default() -> Self {
        Self {
            payoff_gap: 1e-3,
            residual: DEFAULT_TOL,
            constraint: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicAgentCheck {
    pub best_payoff: f64,
    /// Best payoff minus the payoff of the given controls with tight trades.
    pub payoff_gap: f64,
    /// Income forgone by trading below the resource slack, `sum_t lambda_t (a - h - e)`.
    pub trade_loss: f64,
    /// Largest `e(t) - (a(t) - h(u(t)))`.
    pub trade_violation: f64,
    /// Multipliers of the resource constraints, `mu_t = lambda_t`.
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicReport {
    pub agents: Vec<DynamicAgentCheck>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub negative_prices: Vec<usize>,
    pub accepted: bool,
}

pub fn verify_dynamic_equilibrium(
    s: &DynamicScenario,
    eq: &DynamicEquilibrium,
    tol: &DynamicTolerances,
) -> Result<DynamicReport> {
    s.validate()?;
    let horizon = s.horizon;
    if eq.lambda.len() != horizon || eq.u.len() != s.n() || eq.e.len() != s.n() {
        return Err(EqError::DimensionMismatch("equilibrium does not match the scenario".into()));
    }
    for (i, (agent, (u, e))) in s.agents.iter().zip(eq.u.iter().zip(&eq.e)).enumerate() {
        if u.len() != agent.input_dim() * horizon || e.len() != horizon {
            return Err(EqError::DimensionMismatch(format!("agent {i} profile has the wrong length")));
        }
    }
    let negative_prices: Vec<usize> = (0..horizon).filter(|&t| !(eq.lambda[t] >= 0.0)).collect();
    let residuals: Vec<f64> = (0..horizon).map(|t| eq.e.iter().map(|e| e[t]).sum()).collect();
    let max_residual = max_abs(&residuals);

    let mut accepted = negative_prices.is_empty() && max_residual <= tol.residual;
    let mut agents = Vec::with_capacity(s.n());
    for (agent, (u, e)) in s.agents.iter().zip(eq.u.iter().zip(&eq.e)) {
        let tight = tight_trades(agent, u);
        let trade_violation = e.iter().zip(&tight).map(|(e, t)| e - t).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        let trade_loss: f64 = eq.lambda.iter().zip(e.iter().zip(&tight)).map(|(l, (e, t))| l * (t - e)).sum();
        let (best_payoff, payoff_gap) = if negative_prices.is_empty() {
            let best = agent_best_response(agent, &eq.lambda)?.payoff;
            (best, best - agent.payoff(u, &tight, &eq.lambda)?)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        let allowed = tol.payoff_gap * (1.0 + best_payoff.abs());
        accepted &= payoff_gap <= allowed && trade_loss <= allowed && trade_violation <= tol.constraint;
        agents.push(DynamicAgentCheck {
            best_payoff,
            payoff_gap,
            trade_loss,
            trade_violation,
            multipliers: eq.lambda.clone(),
        });
    }
    Ok(DynamicReport {
        agents,
        residuals,
        max_residual,
        negative_prices,
        accepted,
    })
}

/// Row-major JSON form of [`DynamicAgent`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct AgentRecord {
    #[serde(rename = "A")]
    dynamics: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    input: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    state_weight: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    state_linear: RowVector,
    #[serde(rename = "Q")]
    input_weight: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    input_linear: RowVector,
    #[serde(rename = "H")]
    resource: Vec<Vec<f64>>,
    a: Vec<f64>,
    y0: Vec<f64>,
    #[serde(rename = "R_T", default, skip_serializing_if = "Option::is_none")]
    terminal_weight: Option<Vec<Vec<f64>>>,
    #[serde(rename = "W_T", default, skip_serializing_if = "Option::is_none")]
    terminal_linear: Option<RowVector>,
}

/// A `1 x m` weight, written either flat or as a one-row matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RowVector {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl RowVector {
    fn into_vector(self, name: &str) -> Result<DVector<f64>, String> {
        match self {
            RowVector::Flat(v) => Ok(DVector::from_vec(v)),
            RowVector::Nested(rows) if rows.len() == 1 => Ok(DVector::from_vec(rows.into_iter().next().unwrap())),
            RowVector::Nested(rows) => Err(format!("{name} must have a single row, found {}", rows.len())),
        }
    }
}

fn matrix(name: &str, rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(format!("{name} is empty"));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("{name} has rows of different lengths"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl TryFrom<AgentRecord> for DynamicAgent {
    type Error = String;

    fn try_from(r: AgentRecord) -> Result<Self, String> {
        Ok(DynamicAgent {
            dynamics: matrix("A", r.dynamics)?,
            input: matrix("B", r.input)?,
            state_weight: matrix("R", r.state_weight)?,
            state_linear: r.state_linear.into_vector("W")?,
            input_weight: matrix("Q", r.input_weight)?,
            input_linear: r.input_linear.into_vector("K")?,
            resource: matrix("H", r.resource)?,
            supply: r.a,
            y0: DVector::from_vec(r.y0),
            terminal_weight: r.terminal_weight.map(|m| matrix("R_T", m)).transpose()?,
            terminal_linear: r.terminal_linear.map(|v| v.into_vector("W_T")).transpose()?,
        })
    }
}

impl From<DynamicAgent> for AgentRecord {
    fn from(a: DynamicAgent) -> Self {
        AgentRecord {
            dynamics: rows_of(&a.dynamics),
            input: rows_of(&a.input),
            state_weight: rows_of(&a.state_weight),
            state_linear: RowVector::Nested(vec![a.state_linear.iter().copied().collect()]),
            input_weight: rows_of(&a.input_weight),
            input_linear: RowVector::Nested(vec![a.input_linear.iter().copied().collect()]),
            resource: rows_of(&a.resource),
            a: a.supply,
            y0: a.y0.iter().copied().collect(),
            terminal_weight: a.terminal_weight.as_ref().map(rows_of),
            terminal_linear: a
                .terminal_linear
                .map(|v| RowVector::Nested(vec![v.iter().copied().collect()])),
        }
    }
}
