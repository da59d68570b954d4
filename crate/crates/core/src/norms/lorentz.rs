//! Decreasing rearrangement and weighted Lorentz norms.

use crate::error::{Error, Result};
use crate::logscalar::LogScalar;
use crate::space::WeightedSample;

use super::lebesgue::{combined_weights, finite_result};

/// `f*` as a nonincreasing step function: `values[k]` on `[ends[k-1], ends[k])`
/// with `ends[-1] = 0`. Zero values are dropped, so `f* = 0` past the last end.
#[derive(Clone, Debug, PartialEq)]
pub struct Rearrangement {
    pub ends: Vec<LogScalar>,
    pub values: Vec<f64>,
}

impl Rearrangement {
    pub fn eval(&self, t: LogScalar) -> f64 {
        let k = self.ends.partition_point(|e| *e <= t);
        self.values.get(k).copied().unwrap_or(0.0)
    }
}

pub fn decreasing_rearrangement(sample: &WeightedSample, weight: Option<&[f64]>) -> Result<Rearrangement> {
    let w = combined_weights(sample, weight)?;
    let mut order: Vec<usize> = (0..sample.values.len()).filter(|&i| sample.values[i] != 0.0).collect();
    order.sort_by(|&a, &b| {
        sample.values[b]
            .abs()
            .total_cmp(&sample.values[a].abs())
            .then(a.cmp(&b))
    });
    let mut ends: Vec<LogScalar> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut acc = LogScalar::ZERO;
    for i in order {
        let v = sample.values[i].abs();
        acc = acc + w[i];
        if values.last() == Some(&v) {
            *ends.last_mut().expect("paired with values") = acc;
        } else {
            ends.push(acc);
            values.push(v);
        }
    }
    Ok(Rearrangement { ends, values })
}

/// `(∫₀^∞ [t^{1/r} f*(t)]^τ dt/t)^{1/τ}`, integrated exactly on each step.
pub fn lorentz_norm(sample: &WeightedSample, r: f64, tau: f64, weight: Option<&[f64]>) -> Result<f64> {
    if !(r > 0.0 && r.is_finite() && tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Lorentz parameters must be positive and finite, got r = {r}, tau = {tau}"
        )));
    }
    let fs = decreasing_rearrangement(sample, weight)?;
    let e = tau / r;
    let mut prev = LogScalar::ZERO;
    let mut terms = Vec::with_capacity(fs.values.len());
    for (end, v) in fs.ends.iter().zip(&fs.values) {
        let piece = end.powf(e) - prev.powf(e);
        terms.push(LogScalar::from_f64(v.powf(tau) * r / tau) * piece);
        prev = *end;
    }
    let total = crate::logscalar::log_sum(&terms).powf(1.0 / tau);
    finite_result(total)
}
