//! Weighted Lebesgue, sup and variable-exponent norms.

use crate::error::{Error, Result};
use crate::logscalar::{log_sum, LogScalar};
use crate::space::WeightedSample;

use super::orlicz::luxemburg_bisect;

/// `ω_i μ_i` in the log domain.
pub fn combined_weights(sample: &WeightedSample, weight: Option<&[f64]>) -> Result<Vec<LogScalar>> {
    if sample.masses.len() != sample.values.len() {
        return Err(Error::LengthMismatch {
            expected: sample.values.len(),
            got: sample.masses.len(),
        });
    }
    match weight {
        None => Ok(sample.masses.clone()),
        Some(w) => {
            if w.len() != sample.values.len() {
                return Err(Error::LengthMismatch {
                    expected: sample.values.len(),
                    got: w.len(),
                });
            }
            w.iter()
                .zip(&sample.masses)
                .enumerate()
                .map(|(i, (&w, &m))| {
                    if w > 0.0 && w.is_finite() {
                        Ok(LogScalar::from_f64(w) * m)
                    } else {
                        Err(Error::NonpositiveWeight(i))
                    }
                })
                .collect()
        }
    }
}

pub(crate) fn finite_result(v: LogScalar) -> Result<f64> {
    let out = v.to_f64();
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow(v.ln()))
    }
}

/// `(Σ |f|^p ω μ)^{1/p}`.
pub fn lp_norm(sample: &WeightedSample, p: f64, weight: Option<&[f64]>) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lebesgue exponent must be positive, got {p}")));
    }
    let w = combined_weights(sample, weight)?;
    Ok(lp_log(&sample.values, &w, p)?.to_f64())
}

pub(crate) fn lp_log(values: &[f64], weights: &[LogScalar], p: f64) -> Result<LogScalar> {
    let terms: Vec<LogScalar> = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| LogScalar::from_f64(v.abs()).powf(p) * w)
        .collect();
    let n = log_sum(&terms).powf(1.0 / p);
    finite_result(n)?;
    Ok(n)
}

/// `max |f|` over the sample (every point has positive mass).
pub fn sup_norm(sample: &WeightedSample) -> f64 {
    sample.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `inf{λ : Σ (|f|/λ)^{r(x)} μ ≤ 1}`.
pub fn variable_lp_norm(sample: &WeightedSample, exponent: &[f64]) -> Result<f64> {
    if exponent.len() != sample.values.len() {
        return Err(Error::LengthMismatch {
            expected: sample.values.len(),
            got: exponent.len(),
        });
    }
    if exponent.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("variable exponents must be positive and finite".into()));
    }
    let fmax = sup_norm(sample);
    if fmax == 0.0 {
        return Ok(0.0);
    }
    luxemburg_bisect(fmax, |ln_l| {
        let terms: Vec<LogScalar> = sample
            .values
            .iter()
            .zip(&sample.masses)
            .zip(exponent)
            .filter(|((v, _), _)| **v != 0.0)
            .map(|((v, m), r)| LogScalar::from_ln(r * (v.abs().ln() - ln_l)) * *m)
            .collect();
        log_sum(&terms)
    })
}
