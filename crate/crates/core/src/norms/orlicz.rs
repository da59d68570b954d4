//! Orlicz functions, the Luxemburg norm and the Young conjugate.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscalar::{log_sum, LogScalar};

/// A user-supplied Orlicz function given by a closure.
#[derive(Clone)]
pub struct CustomOrlicz {
    pub eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub lower_type: f64,
    pub upper_type: f64,
    pub convex: bool,
}

impl fmt::Debug for CustomOrlicz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomOrlicz")
            .field("lower_type", &self.lower_type)
            .field("upper_type", &self.upper_type)
            .finish_non_exhaustive()
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OrliczFunction {
    /// `Φ(t) = scale · t^p`.
    Power {
        p: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `Φ(t) = e^t - 1`.
    ExpMinusOne,
    /// Log-log interpolation of positive samples on an increasing grid, with
    /// power extrapolation outside it.
    Tabulated { t: Vec<f64>, values: Vec<f64> },
    #[serde(skip)]
    Custom(CustomOrlicz),
}

impl OrliczFunction {
    pub fn power(p: f64) -> Self {
        OrliczFunction::Power { p, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OrliczFunction::Power { p, scale } => {
                if !(*p > 0.0 && p.is_finite() && *scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "power Orlicz function needs p > 0 and scale > 0, got p = {p}, scale = {scale}"
                    )));
                }
            }
            OrliczFunction::ExpMinusOne => {}
            OrliczFunction::Tabulated { t, values } => {
                if t.len() < 2 || t.len() != values.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated Orlicz function needs at least two matching samples".into(),
                    ));
                }
                if t.iter().any(|x| !(*x > 0.0 && x.is_finite())) || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidParameter(
                        "tabulated Orlicz samples must be positive and finite".into(),
                    ));
                }
                if t.windows(2).any(|w| !(w[0] < w[1])) || values.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParameter(
                        "tabulated Orlicz function must be strictly increasing".into(),
                    ));
                }
            }
            OrliczFunction::Custom(c) => {
                let grid: Vec<f64> = (-40..=40).map(|k| 10f64.powf(f64::from(k) / 4.0)).collect();
                let vals: Vec<f64> = grid.iter().map(|&t| (c.eval)(t)).collect();
                if (c.eval)(0.0) != 0.0 || vals.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParameter(
                        "custom Orlicz function must vanish at 0 and increase".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `ln Φ(t)` for `t > 0`.
    pub fn ln_eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            OrliczFunction::Power { p, scale } => scale.ln() + p * t.ln(),
            OrliczFunction::ExpMinusOne => {
                if t > 1.0 {
                    t + (-(-t).exp()).ln_1p()
                } else {
                    t.exp_m1().ln()
                }
            }
            OrliczFunction::Tabulated { t: ts, values } => {
                let x = t.ln();
                let n = ts.len();
                let k = ts.partition_point(|&u| u <= t).clamp(1, n - 1);
                let (x0, x1) = (ts[k - 1].ln(), ts[k].ln());
                let (y0, y1) = (values[k - 1].ln(), values[k].ln());
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            OrliczFunction::Custom(c) => (c.eval)(t).ln(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.ln_eval(t).exp()
        }
    }

    /// `Φ^{-1}(y)`, the generalized inverse of an increasing function.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match self {
            OrliczFunction::Power { p, scale } => (y / scale).powf(1.0 / p),
            OrliczFunction::ExpMinusOne => y.ln_1p(),
            _ => {
                let target = y.ln();
                let (mut lo, mut hi) = (-1.0f64, 1.0f64);
                while self.ln_eval(lo.exp()) > target && lo > -700.0 {
                    lo *= 2.0;
                }
                while self.ln_eval(hi.exp()) < target && hi < 700.0 {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.ln_eval(mid.exp()) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-14 {
                        break;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }

    /// Declared lower and upper types `(r⁻, r⁺)`; the upper type may be infinite.
    pub fn types(&self) -> (f64, f64) {
        match self {
            OrliczFunction::Power { p, .. } => (*p, *p),
            OrliczFunction::ExpMinusOne => (1.0, f64::INFINITY),
            OrliczFunction::Tabulated { t, values } => {
                let slopes = t.windows(2).zip(values.windows(2)).map(|(a, b)| (b[1] / b[0]).ln() / (a[1] / a[0]).ln());
                slopes.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)))
            }
            OrliczFunction::Custom(c) => (c.lower_type, c.upper_type),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            OrliczFunction::Power { p, .. } => *p >= 1.0,
            OrliczFunction::ExpMinusOne => true,
            OrliczFunction::Tabulated { t, values } => {
                // Piecewise log-log interpolation is convex when slopes are ≥ 1 and nondecreasing.
                let slopes: Vec<f64> = t
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(a, b)| (b[1] / b[0]).ln() / (a[1] / a[0]).ln())
                    .collect();
                slopes.iter().all(|&s| s >= 1.0) && slopes.windows(2).all(|w| w[0] <= w[1] + 1e-12)
            }
            OrliczFunction::Custom(c) => c.convex,
        }
    }
}

pub const BISECTION_MAX_ITER: usize = 200;
pub const BISECTION_REL_WIDTH: f64 = 1e-12;

/// Smallest `λ > 0` with `modular(ln λ) ≤ 1`, for a modular nonincreasing in λ.
pub fn luxemburg_bisect(start: f64, modular: impl Fn(f64) -> LogScalar) -> Result<f64> {
    let below = |l: f64| modular(l) <= LogScalar::ONE;
    let x0 = start.ln();
    let (mut lo, mut hi);
    let mut step = 1.0;
    let mut iter = 0;
    if below(x0) {
        hi = x0;
        loop {
            lo = hi - step;
            if !below(lo) {
                break;
            }
            hi = lo;
            step *= 2.0;
            iter += 1;
            if iter > BISECTION_MAX_ITER {
                return Err(Error::NonconvergentBisection(BISECTION_MAX_ITER));
            }
        }
    } else {
        lo = x0;
        loop {
            hi = lo + step;
            if below(hi) {
                break;
            }
            lo = hi;
            step *= 2.0;
            iter += 1;
            if iter > BISECTION_MAX_ITER {
                return Err(Error::NonconvergentBisection(BISECTION_MAX_ITER));
            }
        }
    }
    let mut iter = 0;
    while hi - lo > BISECTION_REL_WIDTH {
        iter += 1;
        if iter > BISECTION_MAX_ITER {
            return Err(Error::NonconvergentBisection(BISECTION_MAX_ITER));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

/// `Σ Φ(|f_i| / λ) w_i` with `w_i = ω_i μ_i`, as a function of `ln λ`.
pub fn orlicz_modular(phi: &OrliczFunction, values: &[f64], weights: &[LogScalar], ln_lambda: f64) -> LogScalar {
    let terms: Vec<LogScalar> = values
        .iter()
        .zip(weights)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, w)| LogScalar::from_ln(phi.ln_eval((v.abs().ln() - ln_lambda).exp())) * *w)
        .collect();
    log_sum(&terms)
}

/// Luxemburg norm `inf{λ : Σ Φ(|f|/λ) ω μ ≤ 1}` against combined weights `ω μ`.
pub fn luxemburg_weighted(values: &[f64], weights: &[LogScalar], phi: &OrliczFunction) -> Result<f64> {
    phi.validate()?;
    let fmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if fmax == 0.0 {
        return Ok(0.0);
    }
    luxemburg_bisect(fmax, |l| orlicz_modular(phi, values, weights, l))
}

/// `Φ̃(t) = sup_{u>0} (tu - Φ(u))` on `t_grid`, tabulated for interpolation.
pub fn young_conjugate(phi: &OrliczFunction, t_grid: &[f64]) -> Result<OrliczFunction> {
    phi.validate()?;
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) || t_grid.windows(2).any(|w| !(w[0] < w[1])) || t_grid.len() < 2 {
        return Err(Error::InvalidParameter("conjugate grid must be positive and increasing".into()));
    }
    const PER_DECADE: i32 = 30;
    let us: Vec<f64> = (-15 * PER_DECADE..=15 * PER_DECADE)
        .map(|k| 10f64.powf(f64::from(k) / f64::from(PER_DECADE)))
        .collect();
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let g = |u: f64| t * u - phi.eval(u);
        let (best, _) = us
            .iter()
            .enumerate()
            .map(|(i, &u)| (i, g(u)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let lo = if best == 0 { 0.0 } else { us[best - 1] };
        let hi = us[(best + 1).min(us.len() - 1)];
        let u = golden_max(g, lo, hi, 200);
        let v = g(u).max(g(us[best])).max(0.0);
        values.push(v);
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("conjugate vanishes on part of the grid".into()));
    }
    Ok(OrliczFunction::Tabulated {
        t: t_grid.to_vec(),
        values,
    })
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..iters {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}
