//! Social shaping for quadratic utilities `f_i(x) = -b_i x^2 / 2 + k_i x`.
//!
//! When every agent is interior at the clearing price, the price has the
//! closed form `(sum k_i / b_i - C) / sum 1 / b_i`. Bounds on `(k_i, b_i)` in
//! the admissible set keep that price inside `[0, lambda_dagger]` for every
//! profile drawn from the box.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};
use crate::report::fmt_sig;
use crate::static_eq::{solve_sald, StaticScenario, DEFAULT_TOL};
use crate::utility::UtilityFunction;

/// Largest agent count for which the certifier enumerates corners.
pub const EXACT_CORNER_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapingBounds {
    pub k_min: f64,
    pub k_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub lambda_dagger: f64,
    pub n: usize,
    #[serde(rename = "C")]
    pub capacity: f64,
}

impl ShapingBounds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k_min >= 0.0
            && self.k_min <= self.k_max
            && self.b_min > 0.0
            && self.b_min <= self.b_max
            && self.lambda_dagger > 0.0
            && self.n >= 1
            && self.capacity.is_finite()
            && self.k_max.is_finite()
            && self.b_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(EqError::InvalidInput(format!("malformed shaping bounds {self:?}")))
        }
    }

    pub fn contains(&self, p: &QuadraticProfile) -> bool {
        p.k.len() == self.n
            && p.k.iter().all(|&k| k >= self.k_min && k <= self.k_max)
            && p.b.iter().all(|&b| b >= self.b_min && b <= self.b_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProfile {
    pub k: Vec<f64>,
    pub b: Vec<f64>,
}

impl QuadraticProfile {
    pub fn new(k: Vec<f64>, b: Vec<f64>) -> Self {
        Self { k, b }
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn utilities(&self) -> Vec<UtilityFunction> {
        self.k.iter().zip(&self.b).map(|(&k, &b)| UtilityFunction::quadratic(b, k)).collect()
    }

    fn check(&self) -> Result<()> {
        if self.k.len() != self.b.len() || self.k.is_empty() {
            return Err(EqError::DimensionMismatch(format!(
                "profile has {} marginal values and {} curvatures",
                self.k.len(),
                self.b.len()
            )));
        }
        for (i, &b) in self.b.iter().enumerate() {
            if b == 0.0 {
                return Err(EqError::ZeroCurvature { agent: i });
            }
            if !(b > 0.0) {
                return Err(EqError::NonConcaveUtility { agent: i });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticPrice {
    /// `(sum k/b - C) / sum 1/b`.
    pub closed_form: f64,
    /// Closed form lies in `[0, min k]`, so every agent is interior.
    pub interior_valid: bool,
    /// Bisection price, computed only when the closed form is not valid.
    pub solver: Option<f64>,
    /// The authoritative clearing price.
    pub price: f64,
}

pub fn quadratic_price(p: &QuadraticProfile, capacity: f64) -> Result<QuadraticPrice> {
    p.check()?;
    let (sum_kb, sum_inv) = p
        .k
        .iter()
        .zip(&p.b)
        .fold((0.0, 0.0), |(skb, sb), (&k, &b)| (skb + k / b, sb + 1.0 / b));
    let closed_form = (sum_kb - capacity) / sum_inv;
    let k_min = p.k.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * closed_form.abs().max(1.0);
    let interior_valid = closed_form >= -slack && closed_form <= k_min + slack;
    if interior_valid {
        return Ok(QuadraticPrice {
            closed_form,
            interior_valid,
            solver: None,
            price: closed_form,
        });
    }
    let eq = solve_sald(&StaticScenario::uniform(&p.utilities(), capacity), DEFAULT_TOL)?;
    Ok(QuadraticPrice {
        closed_form,
        interior_valid,
        solver: Some(eq.lambda),
        price: eq.lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Nonnegative slack means the condition holds:
    /// `n k_min / b_max - C`,
    /// `C - (n k_max / b_min - n k_min / b_max)`,
    /// `C - (n k_max / b_min - n lambda_dagger / b_max)`.
    pub slacks: [f64; 3],
}

pub fn is_admissible(bounds: &ShapingBounds) -> AdmissibilityReport {
    let n = bounds.n as f64;
    let c = bounds.capacity;
    let low = n * bounds.k_min / bounds.b_max;
    let high = n * bounds.k_max / bounds.b_min;
    let cap = n * bounds.lambda_dagger / bounds.b_max;
    let slacks = [low - c, c - (high - low), c - (high - cap)];
    AdmissibilityReport {
        admissible: slacks.iter().all(|s| *s >= 0.0),
        slacks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseCertificate {
    pub worst_price: f64,
    pub witness: QuadraticProfile,
    /// `worst_price <= lambda_dagger`.
    pub certified: bool,
    /// Corner enumeration ran; otherwise the result is a sampled lower bound.
    pub exact: bool,
    pub samples: usize,
}

/// Largest clearing price over all profiles in the bounds box.
///
/// The price is nondecreasing in every `k_i`, so the search fixes
/// `k_i = k_max`. In `1 / b_i` it is linear-fractional with partial
/// derivative proportional to `k_i - lambda`, so its maximum sits on a corner
/// of the `b` box; with identical `k_i` a corner is characterized by how many
/// agents sit at `b_min`. The best corner is then polished with that sign
/// rule. `budget` extra uniform samples from the full box are always drawn.
pub fn certify_worst_case_price(bounds: &ShapingBounds, budget: usize, seed: u64) -> Result<WorstCaseCertificate> {
    bounds.validate()?;
    let n = bounds.n;
    let mut best: Option<(f64, QuadraticProfile)> = None;
    let mut consider = |price: f64, profile: QuadraticProfile| {
        if best.as_ref().is_none_or(|(p, _)| price > *p) {
            best = Some((price, profile));
        }
    };

    let exact = n <= EXACT_CORNER_LIMIT;
    if exact {
        let k = vec![bounds.k_max; n];
        let mut corner_best: Option<(f64, Vec<f64>)> = None;
        for at_min in 0..=n {
            let b: Vec<f64> = (0..n).map(|i| if i < at_min { bounds.b_min } else { bounds.b_max }).collect();
            let price = quadratic_price(&QuadraticProfile::new(k.clone(), b.clone()), bounds.capacity)?.price;
            if corner_best.as_ref().is_none_or(|(p, _)| price > *p) {
                corner_best = Some((price, b));
            }
        }
        let (mut price, mut b) = corner_best.expect("at least one corner");
        for _ in 0..n {
            let next: Vec<f64> =
                k.iter().map(|&ki| if ki > price { bounds.b_min } else { bounds.b_max }).collect();
            if next == b {
                break;
            }
            let p = quadratic_price(&QuadraticProfile::new(k.clone(), next.clone()), bounds.capacity)?.price;
            if p <= price {
                break;
            }
            price = p;
            b = next;
        }
        consider(price, QuadraticProfile::new(k, b));
    }

    if budget > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<QuadraticProfile> = (0..budget)
            .map(|_| {
                let k = (0..n).map(|_| sample(&mut rng, bounds.k_min, bounds.k_max)).collect();
                let b = (0..n).map(|_| sample(&mut rng, bounds.b_min, bounds.b_max)).collect();
                QuadraticProfile::new(k, b)
            })
            .collect();
        let prices = draws
            .par_iter()
            .map(|p| quadratic_price(p, bounds.capacity).map(|q| q.price))
            .collect::<Result<Vec<_>>>()?;
        for (price, profile) in prices.into_iter().zip(draws) {
            consider(price, profile);
        }
    }

    let (worst_price, witness) =
        best.ok_or_else(|| EqError::InvalidInput("sampling budget must be positive beyond the exact limit".into()))?;
    Ok(WorstCaseCertificate {
        worst_price,
        certified: worst_price <= bounds.lambda_dagger,
        witness,
        exact,
        samples: budget,
    })
}

fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Checks that raising marginal values never lowers the price.
pub fn monotonicity_check(p: &QuadraticProfile, q: &QuadraticProfile, capacity: f64) -> Result<bool> {
    if p.b != q.b || p.k.len() != q.k.len() {
        return Err(EqError::DimensionMismatch("profiles must share their curvature vector".into()));
    }
    if let Some(index) = p.k.iter().zip(&q.k).position(|(a, b)| a > b) {
        return Err(EqError::PartialOrderViolated { index });
    }
    let low = quadratic_price(p, capacity)?.price;
    let high = quadratic_price(q, capacity)?.price;
    Ok(low <= high + 1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    K(usize),
    B(usize),
}

impl FromStr for Param {
    type Err = EqError;

    /// Parses one-based names such as `k1` or `b3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || EqError::InvalidInput(format!("unknown parameter {s:?}; expected k<i> or b<i>"));
        let (kind, idx) = s.split_at_checked(1).ok_or_else(bad)?;
        let idx: usize = idx.parse().map_err(|_| bad())?;
        if idx == 0 {
            return Err(bad());
        }
        match kind {
            "k" => Ok(Param::K(idx - 1)),
            "b" => Ok(Param::B(idx - 1)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for Param {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Param::K(i) => write!(f, "k{}", i + 1),
            Param::B(i) => write!(f, "b{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub k: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "C")]
    pub capacity: f64,
    pub axes: [Axis; 2],
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourGrid {
    pub axes: [String; 2],
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    /// `cells[i][j]` is the price at `(rows[i], cols[j])`.
    pub cells: Vec<Vec<f64>>,
}

impl ContourGrid {
    pub fn max(&self) -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for (i, row) in self.cells.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, self.rows[i], self.cols[j]);
                }
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\\{}", self.axes[0], self.axes[1]);
        for c in &self.cols {
            write!(out, ",{}", fmt_sig(*c, 9)).unwrap();
        }
        out.push('\n');
        for (r, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(&fmt_sig(*r, 9));
            for v in row {
                write!(out, ",{}", fmt_sig(*v, 9)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn axis_values(axis: &Axis, grid: usize) -> Vec<f64> {
    let step = (axis.max - axis.min) / (grid - 1) as f64;
    (0..grid)
        .map(|j| if j + 1 == grid { axis.max } else { axis.min + step * j as f64 })
        .collect()
}

pub fn contour_sweep(spec: &ContourSpec) -> Result<ContourGrid> {
    if spec.grid < 2 {
        return Err(EqError::InvalidInput("contour grid needs at least 2 points per axis".into()));
    }
    let n = spec.k.len();
    if spec.b.len() != n {
        return Err(EqError::DimensionMismatch("k and b lengths differ".into()));
    }
    let params = [spec.axes[0].param.parse::<Param>()?, spec.axes[1].param.parse::<Param>()?];
    if params[0] == params[1] {
        return Err(EqError::InvalidInput("contour axes must be distinct parameters".into()));
    }
    for p in params {
        let (Param::K(i) | Param::B(i)) = p;
        if i >= n {
            return Err(EqError::DimensionMismatch(format!("{p} is out of range for {n} agents")));
        }
    }
    let rows = axis_values(&spec.axes[0], spec.grid);
    let cols = axis_values(&spec.axes[1], spec.grid);
    let set = |profile: &mut QuadraticProfile, p: Param, v: f64| match p {
        Param::K(i) => profile.k[i] = v,
        Param::B(i) => profile.b[i] = v,
    };
    let cells = rows
        .par_iter()
        .map(|&r| {
            cols.iter()
                .map(|&c| {
                    let mut profile = QuadraticProfile::new(spec.k.clone(), spec.b.clone());
                    set(&mut profile, params[0], r);
                    set(&mut profile, params[1], c);
                    quadratic_price(&profile, spec.capacity).map(|q| q.price)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContourGrid {
        axes: [params[0].to_string(), params[1].to_string()],
        rows,
        cols,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example3() -> ShapingBounds {
        ShapingBounds {
            k_min: 40.0,
            k_max: 50.0,
            b_min: 4.0,
            b_max: 6.0,
            lambda_dagger: 42.0,
            n: 3,
            capacity: 18.0,
        }
    }

    #[test]
    fn closed_form_price_for_example3_profile() {
        let q = quadratic_price(&QuadraticProfile::new(vec![44.0, 46.0, 48.0], vec![4.0, 4.0, 4.4]), 18.0).unwrap();
        let expected = (11.0 + 11.5 + 48.0 / 4.4 - 18.0) / (0.5 + 1.0 / 4.4);
        assert!(q.interior_valid);
        assert!((q.price - expected).abs() < 1e-12);
        assert!((q.price - 21.19).abs() < 5e-3);
    }

    #[test]
    fn zero_price_at_unconstrained_capacity() {
        let b = vec![2.0, 3.0, 5.0];
        let c = 7.0;
        let capacity: f64 = b.iter().map(|bi| c / bi).sum();
        let q = quadratic_price(&QuadraticProfile::new(vec![c; 3], b), capacity).unwrap();
        assert!(q.price.abs() < 1e-9);
    }

    #[test]
    fn invalid_closed_form_falls_back_to_solver() {
        // Tiny capacity pushes the closed form above the smallest k.
        let p = QuadraticProfile::new(vec![21.0, 17.0, 23.0, 13.0], vec![2.0, 5.0, 3.0, 4.0]);
        let q = quadratic_price(&p, 0.8).unwrap();
        assert!(!q.interior_valid);
        assert!(q.closed_form > 13.0);
        assert_eq!(Some(q.price), q.solver);
        assert!(q.price > 13.0 && q.price < 21.0);
    }

    #[test]
    fn zero_curvature_is_an_error() {
        let p = QuadraticProfile::new(vec![1.0, 2.0], vec![1.0, 0.0]);
        assert!(matches!(quadratic_price(&p, 1.0), Err(EqError::ZeroCurvature { agent: 1 })));
    }

    #[test]
    fn admissibility_slacks() {
        let rep = is_admissible(&example3());
        assert!(rep.admissible);
        let expected = [2.0, 0.5, 1.5];
        for (s, e) in rep.slacks.iter().zip(expected) {
            assert!((s - e).abs() < 1e-12);
        }
        let degenerate = ShapingBounds {
            k_min: 5.0,
            k_max: 5.0,
            b_min: 2.0,
            b_max: 2.0,
            lambda_dagger: 6.0,
            n: 4,
            capacity: 10.0,
        };
        let rep = is_admissible(&degenerate);
        assert!(rep.admissible);
        assert_eq!(rep.slacks[0], 0.0);
        let wide = ShapingBounds {
            k_min: 1.0,
            k_max: 100.0,
            b_min: 1.0,
            b_max: 1.0,
            lambda_dagger: 1.0,
            n: 2,
            capacity: 1.0,
        };
        let rep = is_admissible(&wide);
        assert!(!rep.admissible);
        assert!(rep.slacks[0] >= 0.0 && rep.slacks[1] < 0.0);
    }

    #[test]
    fn worst_case_for_example3() {
        let cert = certify_worst_case_price(&example3(), 0, 0).unwrap();
        assert!((cert.worst_price - 26.0).abs() < 1e-12);
        assert!(cert.certified && cert.exact);
        assert_eq!(cert.witness.b, vec![4.0; 3]);
        assert_eq!(cert.witness.k, vec![50.0; 3]);
    }

    #[test]
    fn collapsed_box_certifies_its_only_point() {
        let b = ShapingBounds {
            k_min: 10.0,
            k_max: 10.0,
            b_min: 2.0,
            b_max: 2.0,
            lambda_dagger: 20.0,
            n: 2,
            capacity: 4.0,
        };
        let cert = certify_worst_case_price(&b, 16, 3).unwrap();
        let direct = quadratic_price(&QuadraticProfile::new(vec![10.0; 2], vec![2.0; 2]), 4.0).unwrap();
        assert_eq!(cert.worst_price, direct.price);
    }

    #[test]
    fn monotone_in_k() {
        let b = vec![4.0, 5.0, 6.0];
        let p = QuadraticProfile::new(vec![40.0; 3], b.clone());
        let q = QuadraticProfile::new(vec![50.0; 3], b.clone());
        assert!(monotonicity_check(&p, &q, 18.0).unwrap());
        assert!(monotonicity_check(&p, &p, 18.0).unwrap());
        assert!(matches!(monotonicity_check(&q, &p, 18.0), Err(EqError::PartialOrderViolated { index: 0 })));
    }

    #[test]
    fn param_names_round_trip() {
        assert_eq!("k1".parse::<Param>().unwrap(), Param::K(0));
        assert_eq!("b12".parse::<Param>().unwrap(), Param::B(11));
        assert_eq!(Param::B(2).to_string(), "b3");
        assert!("x1".parse::<Param>().is_err());
        assert!("k0".parse::<Param>().is_err());
    }

    #[test]
    fn k_contour_peaks_at_top_corner() {
        let spec = ContourSpec {
            k: vec![40.0, 40.0, 48.0],
            b: vec![4.0, 5.0, 6.0],
            capacity: 18.0,
            axes: [
                Axis { param: "k1".into(), min: 40.0, max: 50.0 },
                Axis { param: "k2".into(), min: 40.0, max: 50.0 },
            ],
            grid: 11,
        };
        let grid = contour_sweep(&spec).unwrap();
        let (max, r, c) = grid.max();
        assert_eq!((r, c), (50.0, 50.0));
        assert!((max - (12.5 + 10.0 + 8.0 - 18.0) / (0.25 + 0.2 + 1.0 / 6.0)).abs() < 1e-12);
        let csv = grid.to_csv();
        assert!(csv.starts_with("k1\\k2,40,41,"));
        assert_eq!(csv.lines().count(), 12);
    }
}
