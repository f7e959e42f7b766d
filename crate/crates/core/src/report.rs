//! Fixed-precision number formatting and CSV emitters.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::static_eq::{Mode, SweepPoint};

/// Formats `x` with `digits` significant digits in the style of C's `%g`:
/// trailing zeros are trimmed and an exponent is used only for very large or
/// very small magnitudes.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn sweep_csv(points: &[SweepPoint], mode: Mode) -> String {
    let mut out = format!("C,lambda_{}\n", mode.label());
    for p in points {
        writeln!(out, "{},{}", fmt_sig(p.capacity, 12), fmt_sig(p.lambda, 12)).unwrap();
    }
    out
}

/// `t,lambda` rows for a dynamic price vector.
pub fn price_csv(lambda: &[f64]) -> String {
    let mut out = String::from("t,lambda\n");
    for (t, l) in lambda.iter().enumerate() {
        writeln!(out, "{t},{}", fmt_sig(*l, 12)).unwrap();
    }
    out
}

/// `t,agent,dim,y` rows, one per state component.
pub fn trajectory_csv(trajectories: &[Vec<DVector<f64>>]) -> String {
    let mut out = String::from("t,agent,dim,y\n");
    let horizon = trajectories.first().map_or(0, Vec::len);
    for t in 0..horizon {
        for (i, ys) in trajectories.iter().enumerate() {
            for (d, y) in ys[t].iter().enumerate() {
                writeln!(out, "{t},{i},{d},{}", fmt_sig(*y, 12)).unwrap();
            }
        }
    }
    out
}
