//! Concave agent utilities and their price-parameterized best responses.
//!
//! An agent facing price `lambda` picks a load `x >= 0` maximizing
//! `f(x) - lambda * x`. Because utilities may be kinked or linear, that argmax
//! is a closed interval, possibly unbounded above, or empty when the payoff
//! grows without bound. [`ResponseInterval`] encodes all three cases.

use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};

/// Slope comparisons on tabulated utilities use this absolute tolerance.
pub const SLOPE_TOL: f64 = 1e-12;

/// Sentinel for an argmax set with no upper end.
pub const UNBOUNDED: f64 = f64::INFINITY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UtilityFunction {
    /// `f(x) = -b x^2 / 2 + k x`.
    Quadratic { b: f64, k: f64 },
    /// `f(x) = min(k x, beta)`.
    CappedLinear { k: f64, beta: f64 },
    /// Linear interpolation through `points`, starting at `x = 0`. Past the
    /// final breakpoint the last segment's slope continues.
    PiecewiseLinear { points: Vec<[f64; 2]> },
}

/// The set of loads maximizing `f(x) - lambda x` over `x >= 0`.
///
/// * `lo <= hi < UNBOUNDED`: the bounded argmax `[lo, hi]`.
/// * `hi == UNBOUNDED`, `lo` finite: every `x >= lo` is optimal.
/// * `lo == hi == UNBOUNDED`: no maximizer, the payoff increases forever.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ResponseInterval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn diverging() -> Self {
        Self {
            lo: UNBOUNDED,
            hi: UNBOUNDED,
        }
    }

    /// A finite maximizer exists.
    pub fn is_attained(&self) -> bool {
        self.lo.is_finite()
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    /// Euclidean distance from `x` to the interval; infinite when not attained.
    pub fn distance(&self, x: f64) -> f64 {
        if !self.is_attained() {
            f64::INFINITY
        } else if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

impl UtilityFunction {
    pub fn quadratic(b: f64, k: f64) -> Self {
        Self::Quadratic { b, k }
    }

    pub fn capped_linear(k: f64, beta: f64) -> Self {
        Self::CappedLinear { k, beta }
    }

    pub fn piecewise_linear(points: Vec<[f64; 2]>) -> Self {
        Self::PiecewiseLinear { points }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(EqError::NegativeLoad(x));
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation for callers that already guarantee `x >= 0`.
    pub(crate) fn value(&self, x: f64) -> f64 {
        match self {
            Self::Quadratic { b, k } => -0.5 * b * x * x + k * x,
            Self::CappedLinear { k, beta } => (k * x).min(*beta),
            Self::PiecewiseLinear { points } => {
                let seg = segment_index(points, x);
                let [x0, f0] = points[seg];
                let [x1, f1] = points[seg + 1];
                f0 + (f1 - f0) / (x1 - x0) * (x - x0)
            }
        }
    }

    /// Right derivative at `x`.
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Quadratic { b, k } => k - b * x,
            Self::CappedLinear { k, beta } => {
                if k * x < *beta {
                    *k
                } else {
                    0.0
                }
            }
            Self::PiecewiseLinear { points } => {
                segment_slope(points, segment_index(points, x))
            }
        }
    }

    /// Marginal value of the first unit of load.
    pub fn marginal_value_at_zero(&self) -> f64 {
        self.slope(0.0)
    }

    /// Bound on `|f'|` over `[0, cap]`.
    pub fn slope_bound(&self, cap: f64) -> f64 {
        match self {
            Self::Quadratic { b, k } => k.abs().max((k - b * cap).abs()),
            Self::CappedLinear { k, .. } => k.abs(),
            Self::PiecewiseLinear { points } => (0..points.len() - 1)
                .map(|j| segment_slope(points, j).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Prices at which the best response is set-valued. Between consecutive
    /// kinks aggregate demand is continuous in the price.
    pub fn kink_prices(&self) -> Vec<f64> {
        match self {
            Self::Quadratic { b, k } if *b == 0.0 => vec![*k],
            Self::Quadratic { .. } => Vec::new(),
            Self::CappedLinear { k, .. } => vec![*k, 0.0],
            Self::PiecewiseLinear { points } => {
                (0..points.len() - 1).map(|j| segment_slope(points, j)).collect()
            }
        }
    }

    pub fn check_concavity(&self) -> bool {
        match self {
            Self::Quadratic { b, k } => b.is_finite() && k.is_finite() && *b >= 0.0 && *k >= 0.0,
            Self::CappedLinear { k, beta } => {
                k.is_finite() && beta.is_finite() && *k > 0.0 && *beta > 0.0
            }
            Self::PiecewiseLinear { points } => {
                if points.len() < 2 || points[0][0] != 0.0 {
                    return false;
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return false;
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return false;
                }
                (1..points.len() - 1)
                    .all(|j| segment_slope(points, j) <= segment_slope(points, j - 1) + SLOPE_TOL)
            }
        }
    }

    /// Full argmax set of `f(x) - lambda x` over `x >= 0`.
    pub fn best_response(&self, lambda: f64) -> ResponseInterval {
        match self {
            Self::Quadratic { b, k } => {
                if *b > 0.0 {
                    ResponseInterval::point(((k - lambda) / b).max(0.0))
                } else if lambda > *k {
                    ResponseInterval::point(0.0)
                } else if lambda == *k {
                    ResponseInterval::new(0.0, UNBOUNDED)
                } else {
                    ResponseInterval::diverging()
                }
            }
            Self::CappedLinear { k, beta } => {
                let kink = beta / k;
                if lambda > *k {
                    ResponseInterval::point(0.0)
                } else if lambda == *k {
                    ResponseInterval::new(0.0, kink)
                } else if lambda > 0.0 {
                    ResponseInterval::point(kink)
                } else if lambda == 0.0 {
                    ResponseInterval::new(kink, UNBOUNDED)
                } else {
                    ResponseInterval::diverging()
                }
            }
            Self::PiecewiseLinear { points } => pwl_response(points, lambda),
        }
    }
}

fn segment_slope(points: &[[f64; 2]], seg: usize) -> f64 {
    let [x0, f0] = points[seg];
    let [x1, f1] = points[seg + 1];
    (f1 - f0) / (x1 - x0)
}

/// Segment containing `x`, closed on the left, with the last segment
/// extending to infinity.
fn segment_index(points: &[[f64; 2]], x: f64) -> usize {
    let last = points.len() - 2;
    points.partition_point(|p| p[0] <= x).saturating_sub(1).min(last)
}

fn pwl_response(points: &[[f64; 2]], lambda: f64) -> ResponseInterval {
    let nseg = points.len() - 1;
    let slopes: Vec<f64> = (0..nseg).map(|j| segment_slope(points, j)).collect();
    let last = slopes[nseg - 1];
    if last > lambda + SLOPE_TOL {
        return ResponseInterval::diverging();
    }
    // Right slope at breakpoint j is slopes[j] (last one extends), left slope
    // is slopes[j - 1]; x_j is optimal iff left >= lambda >= right.
    let right = |j: usize| slopes[j.min(nseg - 1)];
    let left = |j: usize| if j == 0 { f64::INFINITY } else { slopes[j - 1] };
    let lo_idx = (0..points.len())
        .find(|&j| right(j) <= lambda + SLOPE_TOL)
        .unwrap_or(points.len() - 1);
    if (last - lambda).abs() <= SLOPE_TOL {
        return ResponseInterval::new(points[lo_idx][0], UNBOUNDED);
    }
    let hi_idx = (0..points.len())
        .rev()
        .find(|&j| left(j) >= lambda - SLOPE_TOL)
        .unwrap_or(0);
    ResponseInterval::new(points[lo_idx][0], points[hi_idx][0].max(points[lo_idx][0]))
}
