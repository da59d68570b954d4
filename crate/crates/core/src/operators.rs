//! Hardy–Littlewood maximal operator, Muckenhoupt constants and the Rubio de
//! Francia iteration on finite spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::family::{enumerate_ball_family, Ball, BallFamily, FamilySpec};

use crate::error::{Error, Result};
use crate::logscalar::{log_sum, pairwise_sum, LogScalar};
use crate::norms::{evaluate_norm, NormSpec};
use crate::space::{FinitePointSpace, WeightedSample};

/// `μ(B)^{-1} ∫_B g dμ`; exact for functions constant on the ball.
pub fn ball_average(space: &FinitePointSpace, values: &[f64], ball: &Ball) -> f64 {
    let first = values[ball.members[0]];
    if ball.members.iter().all(|&i| values[i] == first) {
        return first;
    }
    let terms: Vec<f64> = ball
        .members
        .iter()
        .map(|&i| values[i] * (space.mass(i).ln() - ball.measure.ln()).exp())
        .collect();
    pairwise_sum(&terms)
}

fn check_len(space: &FinitePointSpace, values: &[f64]) -> Result<()> {
    if values.len() == space.n_points() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: space.n_points(),
            got: values.len(),
        })
    }
}

/// `Mf(x) = max_{B ∋ x} μ(B)^{-1} ∫_B |f| dμ` over the family.
pub fn maximal_function(space: &FinitePointSpace, values: &[f64], family: &BallFamily) -> Result<Vec<f64>> {
    check_len(space, values)?;
    family.check_covers(space.n_points())?;
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let averages: Vec<f64> = family.balls().par_iter().map(|b| ball_average(space, &abs, b)).collect();
    let mut out = vec![0.0f64; space.n_points()];
    for (b, avg) in family.balls().iter().zip(averages) {
        for &i in &b.members {
            out[i] = out[i].max(avg);
        }
    }
    Ok(out)
}

/// `[ω]_{A_1} = sup_B avg_B ω / min_B ω`, or for `p > 1`
/// `[ω]_{A_p} = sup_B avg_B ω · (avg_B ω^{1/(1-p)})^{p-1}`.
pub fn muckenhoupt_constant(space: &FinitePointSpace, weight: &[f64], p: f64, family: &BallFamily) -> Result<f64> {
    check_len(space, weight)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("A_p needs p >= 1, got {p}")));
    }
    if let Some(i) = weight.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::NonpositiveWeight(i));
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    // ω^{1/(1-p)} overflows for p near 1, so the dual average is kept in the log domain.
    let ln_dual: Vec<f64> = weight.iter().map(|w| w.ln() / (1.0 - p)).collect();
    let per_ball: Vec<f64> = family
        .balls()
        .par_iter()
        .map(|b| {
            let avg = ball_average(space, weight, b);
            if p == 1.0 {
                let min = b.members.iter().map(|&i| weight[i]).fold(f64::INFINITY, f64::min);
                avg / min
            } else {
                let terms: Vec<LogScalar> = b
                    .members
                    .iter()
                    .map(|&i| LogScalar::from_ln(ln_dual[i]) * space.mass(i))
                    .collect();
                avg * (log_sum(&terms) / b.measure).powf(p - 1.0).to_f64()
            }
        })
        .collect();
    Ok(per_ball.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEstimate {
    pub lower: f64,
    pub upper: Option<f64>,
    pub trials: usize,
}

fn spec_norm(space: &FinitePointSpace, values: Vec<f64>, spec: &NormSpec) -> Result<f64> {
    evaluate_norm(space, &WeightedSample::on(space, values)?, spec)
}

/// Schur bound for `‖M‖` on `L^p(ω dμ)` via the dominating kernel
/// `m(x, y) = max{1/μ(B) : x, y ∈ B}`.
pub fn schur_upper_bound(space: &FinitePointSpace, p: f64, weight: Option<&[f64]>, family: &BallFamily) -> Result<f64> {
    let n = space.n_points();
    if !(p >= 1.0) {
        return Err(Error::UnsupportedSpec(format!("no Schur bound for p = {p} < 1")));
    }
    let ones = vec![1.0; n];
    let w = weight.unwrap_or(&ones);
    check_len(space, w)?;
    let mut kernel = vec![LogScalar::ZERO; n * n];
    for b in family.balls() {
        let inv = b.measure.powf(-1.0);
        for &x in &b.members {
            for &y in &b.members {
                let k = &mut kernel[x * n + y];
                *k = k.max(inv);
            }
        }
    }
    let mass = |i: usize| space.mass(i);
    let c1 = (0..n)
        .map(|x| log_sum(&(0..n).map(|y| kernel[x * n + y] * mass(y)).collect::<Vec<_>>()))
        .fold(LogScalar::ZERO, LogScalar::max)
        .to_f64();
    let c2 = (0..n)
        .map(|y| {
            let s = log_sum(&(0..n).map(|x| kernel[x * n + y] * mass(x) * LogScalar::from_f64(w[x])).collect::<Vec<_>>());
            s / LogScalar::from_f64(w[y])
        })
        .fold(LogScalar::ZERO, LogScalar::max)
        .to_f64();
    Ok(if p == 1.0 {
        c2
    } else {
        c1.powf(1.0 - 1.0 / p) * c2.powf(1.0 / p)
    })
}

/// Lower bound from trial functions (random positive functions, random spikes
/// and every ball indicator), and a certified upper bound for Lebesgue specs.
pub fn maximal_operator_norm(
    space: &FinitePointSpace,
    spec: &NormSpec,
    trials: usize,
    seed: u64,
) -> Result<OperatorNormEstimate> {
    let family = enumerate_ball_family(space);
    if let NormSpec::Sup = spec {
        return Ok(OperatorNormEstimate {
            lower: 1.0,
            upper: Some(1.0),
            trials,
        });
    }
    let n = space.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(trials + family.len());
    for b in family.balls() {
        let mut f = vec![0.0; n];
        for &i in &b.members {
            f[i] = 1.0;
        }
        candidates.push(f);
    }
    for t in 0..trials {
        let f: Vec<f64> = if t % 2 == 0 {
            (0..n).map(|_| rng.gen::<f64>()).collect()
        } else {
            (0..n).map(|_| if rng.gen_bool(0.2) { rng.gen_range(0.5..2.0) } else { 0.0 }).collect()
        };
        candidates.push(f);
    }
    let mut lower = 1.0f64;
    for f in candidates {
        if f.iter().all(|&v| v == 0.0) {
            continue;
        }
        let mf = maximal_function(space, &f, &family)?;
        let ratio = spec_norm(space, mf, spec)? / spec_norm(space, f, spec)?;
        lower = lower.max(ratio);
    }
    let upper = match spec {
        NormSpec::Lp { p, weight } if *p >= 1.0 => {
            let w = weight.as_ref().map(|w| w.resolve(space)).transpose()?;
            Some(schur_upper_bound(space, *p, w.as_deref(), &family)?)
        }
        _ => None,
    };
    Ok(OperatorNormEstimate { lower, upper, trials })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RubioResult {
    pub values: Vec<f64>,
    /// Largest observed `‖M^{k+1} g‖ / ‖M^k g‖`.
    pub observed_ratio: f64,
    pub k_max: usize,
}

pub const DEFAULT_RUBIO_K_MAX: usize = 40;

/// `R g = Σ_{k=0}^{k_max} M^k g / (2‖M‖)^k` with `M⁰ g = |g|`.
pub fn rubio_de_francia(
    space: &FinitePointSpace,
    g: &[f64],
    spec: &NormSpec,
    m_norm: f64,
    k_max: usize,
) -> Result<RubioResult> {
    check_len(space, g)?;
    if k_max < 8 {
        return Err(Error::InvalidParameter(format!("k_max must be at least 8, got {k_max}")));
    }
    if !(m_norm >= 1.0) || !m_norm.is_finite() {
        return Err(Error::InvalidOperatorNorm {
            given: m_norm,
            observed: 1.0,
        });
    }
    let family = enumerate_ball_family(space);
    let mut h: Vec<f64> = g.iter().map(|v| v.abs()).collect();
    let mut out = h.clone();
    let mut norm_h = spec_norm(space, h.clone(), spec)?;
    let mut observed = 0.0f64;
    let base = 2.0 * m_norm;
    for k in 1..=k_max {
        h = maximal_function(space, &h, &family)?;
        let norm_next = spec_norm(space, h.clone(), spec)?;
        if norm_h > 0.0 {
            let ratio = norm_next / norm_h;
            observed = observed.max(ratio);
            if ratio > m_norm * (1.0 + 1e-9) {
                return Err(Error::InvalidOperatorNorm {
                    given: m_norm,
                    observed: ratio,
                });
            }
        }
        norm_h = norm_next;
        let factor = base.powi(-(k as i32));
        for (o, v) in out.iter_mut().zip(&h) {
            *o += v * factor;
        }
    }
    Ok(RubioResult {
        values: out,
        observed_ratio: observed,
        k_max,
    })
}
