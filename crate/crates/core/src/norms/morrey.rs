//! Generalized Morrey and Orlicz–Morrey norms over a ball family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Ball, BallFamily};
use crate::logscalar::{log_sum, LogScalar};
use crate::space::FinitePointSpace;

use super::orlicz::{luxemburg_bisect, OrliczFunction};

/// A positive function of a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PhiFunction {
    /// `φ(B) = μ(B)^{-1/p}`.
    MeasurePower { p: f64 },
    /// `φ(x, r) = r^{-λ/p}`.
    RadiusPower { lambda: f64, p: f64 },
    Constant { value: f64 },
    /// `φ(B)^exponent`.
    Powered { inner: Box<PhiFunction>, exponent: f64 },
}

impl PhiFunction {
    pub fn powered(self, exponent: f64) -> Self {
        PhiFunction::Powered {
            inner: Box::new(self),
            exponent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            PhiFunction::MeasurePower { p } => *p > 0.0 && p.is_finite(),
            PhiFunction::RadiusPower { lambda, p } => *p > 0.0 && lambda.is_finite() && p.is_finite(),
            PhiFunction::Constant { value } => *value > 0.0 && value.is_finite(),
            PhiFunction::Powered { inner, exponent } => {
                inner.validate()?;
                exponent.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid φ parameters: {self:?}")))
        }
    }

    pub fn eval(&self, ball: &Ball) -> LogScalar {
        match self {
            PhiFunction::MeasurePower { p } => ball.measure.powf(-1.0 / p),
            PhiFunction::RadiusPower { lambda, p } => ball.radius.powf(-lambda / p),
            PhiFunction::Constant { value } => LogScalar::from_f64(*value),
            PhiFunction::Powered { inner, exponent } => inner.eval(ball).powf(*exponent),
        }
    }
}

fn check_inputs(space: &FinitePointSpace, values: &[f64], family: &BallFamily) -> Result<()> {
    if values.len() != space.n_points() {
        return Err(Error::LengthMismatch {
            expected: space.n_points(),
            got: values.len(),
        });
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(())
}

fn sup(per_ball: Vec<LogScalar>) -> f64 {
    per_ball.into_iter().fold(LogScalar::ZERO, LogScalar::max).to_f64()
}

/// `sup_B φ(B)^{-1} (μ(B)^{-1} ∫_B |f|^p dμ)^{1/p}`.
pub fn morrey_norm(
    space: &FinitePointSpace,
    values: &[f64],
    p: f64,
    phi: &PhiFunction,
    family: &BallFamily,
) -> Result<f64> {
    check_inputs(space, values, family)?;
    phi.validate()?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("Morrey exponent must be positive, got {p}")));
    }
    let per_ball = family
        .balls()
        .par_iter()
        .map(|b| {
            let terms: Vec<LogScalar> = b
                .members
                .iter()
                .map(|&i| LogScalar::from_f64(values[i].abs()).powf(p) * space.mass(i))
                .collect();
            (log_sum(&terms) / b.measure).powf(1.0 / p) / phi.eval(b)
        })
        .collect();
    Ok(sup(per_ball))
}

/// Per-ball infimum `inf{λ : μ(B)^{-1} ∫_B Φ(|f|/λ) dμ ≤ φ(B)}`.
pub fn orlicz_ball_norm(
    space: &FinitePointSpace,
    values: &[f64],
    phi_orlicz: &OrliczFunction,
    bound: LogScalar,
    ball: &Ball,
) -> Result<f64> {
    let fmax = ball.members.iter().fold(0.0f64, |m, &i| m.max(values[i].abs()));
    if fmax == 0.0 {
        return Ok(0.0);
    }
    let scale = (ball.measure * bound).powf(-1.0);
    luxemburg_bisect(fmax, |ln_l| {
        let terms: Vec<LogScalar> = ball
            .members
            .iter()
            .filter(|&&i| values[i] != 0.0)
            .map(|&i| LogScalar::from_ln(phi_orlicz.ln_eval((values[i].abs().ln() - ln_l).exp())) * space.mass(i))
            .collect();
        log_sum(&terms) * scale
    })
}

/// `sup_B` of [`orlicz_ball_norm`] with the modular bound `φ(B)`.
pub fn orlicz_morrey_norm(
    space: &FinitePointSpace,
    values: &[f64],
    phi_orlicz: &OrliczFunction,
    phi_morrey: &PhiFunction,
    family: &BallFamily,
) -> Result<f64> {
    check_inputs(space, values, family)?;
    phi_orlicz.validate()?;
    phi_morrey.validate()?;
    let per_ball: Result<Vec<f64>> = family
        .balls()
        .par_iter()
        .map(|b| orlicz_ball_norm(space, values, phi_orlicz, phi_morrey.eval(b), b))
        .collect();
    Ok(per_ball?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::enumerate_ball_family;
    use crate::space::build_finite_space;

    fn three_points() -> FinitePointSpace {
        let xs: [f64; 3] = [0.0, 1.0, 3.0];
        let d: Vec<Vec<f64>> = xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect();
        build_finite_space(&d, &[1.0, 2.0, 0.5], None).unwrap()
    }

    #[test]
    fn constant_function_gives_sup_of_inverse_phi() {
        let s = three_points();
        let fam = enumerate_ball_family(&s);
        let phi = PhiFunction::RadiusPower { lambda: 1.0, p: 2.0 };
        let got = morrey_norm(&s, &[1.0; 3], 2.0, &phi, &fam).unwrap();
        let expected = fam.balls().iter().map(|b| 1.0 / phi.eval(b).to_f64()).fold(0.0, f64::max);
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn indicator_of_a_ball_on_its_own_family() {
        let s = three_points();
        let fam = enumerate_ball_family(&s);
        let phi = OrliczFunction::ExpMinusOne;
        let bound = PhiFunction::Constant { value: 0.7 };
        for b in fam.balls() {
            let single = BallFamily::explicit(&s, &[(b.center, b.radius)]).unwrap();
            let mut f = vec![0.0; 3];
            for &i in &b.members {
                f[i] = 1.0;
            }
            let got = orlicz_morrey_norm(&s, &f, &phi, &bound, &single).unwrap();
            let expected = 1.0 / phi.inverse(0.7);
            assert!((got - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn empty_family_is_rejected() {
        let s = three_points();
        assert!(BallFamily::explicit(&s, &[]).is_err());
    }
}
