//! Quotient norms `inf_a ‖f + a‖`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::space::{FinitePointSpace, WeightedSample};

use super::{evaluate_norm, NormSpec};

const GLOBAL_GRID: usize = 10_000;
const GOLDEN_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientValue {
    pub value: f64,
    pub minimizer: f64,
    /// True when the inner norm is convex, so the search is certified by
    /// unimodality; otherwise the value is an upper bound at grid resolution.
    pub certified: bool,
}

pub fn quotient_norm(space: &FinitePointSpace, sample: &WeightedSample, inner: &NormSpec) -> Result<QuotientValue> {
    let eval = |a: f64| -> Result<f64> {
        let shifted: Vec<f64> = sample.values.iter().map(|v| v + a).collect();
        evaluate_norm(space, &sample.with_values(shifted), inner)
    };
    let at_zero = eval(0.0)?;
    let convex = inner.is_convex();
    if sample.infinite_measure {
        return Ok(QuotientValue {
            value: at_zero,
            minimizer: 0.0,
            certified: true,
        });
    }
    let fmax = sample.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fmin = sample.values.iter().copied().fold(f64::INFINITY, f64::min);
    let (lo, hi) = (-fmax, -fmin);
    let mut best = (at_zero, 0.0);
    let mut consider = |a: f64, v: f64| {
        if v < best.0 {
            best = (v, a);
        }
    };
    if hi - lo <= 0.0 {
        let v = eval(lo)?;
        consider(lo, v);
        return Ok(QuotientValue {
            value: best.0,
            minimizer: best.1,
            certified: true,
        });
    }
    let (mut a, mut b) = (lo, hi);
    if !convex {
        let step = (hi - lo) / GLOBAL_GRID as f64;
        let mut grid_best = (f64::INFINITY, lo);
        for k in 0..=GLOBAL_GRID {
            let x = lo + step * k as f64;
            let v = eval(x)?;
            if v < grid_best.0 {
                grid_best = (v, x);
            }
        }
        consider(grid_best.1, grid_best.0);
        a = (grid_best.1 - step).max(lo);
        b = (grid_best.1 + step).min(hi);
    }
    for x in [lo, hi] {
        let v = eval(x)?;
        consider(x, v);
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    for _ in 0..GOLDEN_ITERS {
        if b - a <= 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d)?;
        }
    }
    consider(c, fc);
    consider(d, fd);
    Ok(QuotientValue {
        value: best.0,
        minimizer: best.1,
        certified: convex,
    })
}
