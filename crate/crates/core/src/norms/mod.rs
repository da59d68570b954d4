//! Ball quasi-Banach function space norms on weighted samples.

mod lebesgue;
mod lorentz;
mod morrey;
mod orlicz;
mod quotient;

pub use lebesgue::{combined_weights, lp_norm, sup_norm, variable_lp_norm};
pub use lorentz::{decreasing_rearrangement, lorentz_norm, Rearrangement};
pub use morrey::{morrey_norm, orlicz_ball_norm, orlicz_morrey_norm, PhiFunction};
pub use orlicz::{
    golden_max, luxemburg_bisect, luxemburg_weighted, orlicz_modular, young_conjugate, CustomOrlicz,
    OrliczFunction, BISECTION_MAX_ITER, BISECTION_REL_WIDTH,
};
pub use quotient::{quotient_norm, QuotientValue};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::FamilySpec;
use crate::space::{FinitePointSpace, WeightedSample};

/// `ω = (M 1_E)^δ` on the line for `E = (lo, hi)`, with `M` the uncentered
/// maximal operator: `M 1_E = 1` on `E` and `|E| / dist(x, far end of E)` off it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightProfile {
    MaximalIndicatorPower { lo: f64, hi: f64, exponent: f64 },
}

impl WeightProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            WeightProfile::MaximalIndicatorPower { lo, hi, exponent } => {
                let len = hi - lo;
                let m = if x <= lo {
                    len / (hi - x)
                } else if x >= hi {
                    len / (x - lo)
                } else {
                    1.0
                };
                m.powf(exponent)
            }
        }
    }

    /// Exponent `η` with `ω(x) ~ |x|^{-η}` as `|x| → ∞`.
    pub fn decay(&self) -> f64 {
        match *self {
            WeightProfile::MaximalIndicatorPower { exponent, .. } => exponent,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightProfile::MaximalIndicatorPower { lo, hi, exponent } => {
                if lo < hi && lo.is_finite() && hi.is_finite() && (0.0..1.0).contains(&exponent) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "maximal-indicator weight needs lo < hi and exponent in [0, 1)".into(),
                    ))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Values(Vec<f64>),
    Profile(WeightProfile),
}

impl Weight {
    /// Weight values at the points of `space`; profiles need a line space.
    pub fn resolve(&self, space: &FinitePointSpace) -> Result<Vec<f64>> {
        match self {
            Weight::Values(v) => {
                if v.len() != space.n_points() {
                    return Err(Error::LengthMismatch {
                        expected: space.n_points(),
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
            Weight::Profile(p) => {
                p.validate()?;
                (0..space.n_points())
                    .map(|i| {
                        space
                            .position(i)
                            .map(|x| p.eval(x.to_f64()))
                            .ok_or_else(|| Error::UnsupportedSpec("weight profiles need points on the line".into()))
                    })
                    .collect()
            }
        }
    }

    pub fn decay(&self) -> f64 {
        match self {
            Weight::Values(_) => 0.0,
            Weight::Profile(p) => p.decay(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NormSpec {
    Lp {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<Weight>,
    },
    Lorentz {
        r: f64,
        tau: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<Weight>,
    },
    Orlicz {
        phi: OrliczFunction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<Weight>,
    },
    VariableLp {
        exponent: Vec<f64>,
    },
    Morrey {
        p: f64,
        phi: PhiFunction,
        #[serde(default)]
        family: FamilySpec,
    },
    OrliczMorrey {
        phi_orlicz: OrliczFunction,
        phi_morrey: PhiFunction,
        #[serde(default)]
        family: FamilySpec,
    },
    Quotient {
        inner: Box<NormSpec>,
    },
    Sup,
}

impl NormSpec {
    pub fn lp(p: f64) -> Self {
        NormSpec::Lp { p, weight: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormSpec::Lp { .. } => "lp",
            NormSpec::Lorentz { .. } => "lorentz",
            NormSpec::Orlicz { .. } => "orlicz",
            NormSpec::VariableLp { .. } => "variable_lp",
            NormSpec::Morrey { .. } => "morrey",
            NormSpec::OrliczMorrey { .. } => "orlicz_morrey",
            NormSpec::Quotient { .. } => "quotient",
            NormSpec::Sup => "sup",
        }
    }

    /// Whether `a ↦ ‖f + a‖` is convex, i.e. the functional is a norm.
    pub fn is_convex(&self) -> bool {
        match self {
            NormSpec::Lp { p, .. } => *p >= 1.0,
            NormSpec::Lorentz { r, tau, .. } => 1.0 <= *tau && tau <= r,
            NormSpec::Orlicz { phi, .. } => phi.is_convex(),
            NormSpec::VariableLp { exponent } => exponent.iter().all(|&r| r >= 1.0),
            NormSpec::Morrey { p, .. } => *p >= 1.0,
            NormSpec::OrliczMorrey { phi_orlicz, .. } => phi_orlicz.is_convex(),
            NormSpec::Quotient { inner } => inner.is_convex(),
            NormSpec::Sup => true,
        }
    }

    /// Integrability exponent governing how far-field contributions scale:
    /// `p` for Lebesgue, `r` for Lorentz, the lower type for Orlicz.
    pub fn nominal_exponent(&self) -> Option<f64> {
        match self {
            NormSpec::Lp { p, .. } => Some(*p),
            NormSpec::Lorentz { r, .. } => Some(*r),
            NormSpec::Orlicz { phi, .. } => Some(phi.types().0),
            NormSpec::Quotient { inner } => inner.nominal_exponent(),
            NormSpec::Sup => Some(f64::INFINITY),
            _ => None,
        }
    }

    pub fn weight(&self) -> Option<&Weight> {
        match self {
            NormSpec::Lp { weight, .. } | NormSpec::Lorentz { weight, .. } | NormSpec::Orlicz { weight, .. } => {
                weight.as_ref()
            }
            NormSpec::Quotient { inner } => inner.weight(),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::Lp { p, .. } if !(*p > 0.0 && p.is_finite()) => {
                Err(Error::InvalidParameter(format!("p must be positive, got {p}")))
            }
            NormSpec::Lorentz { r, tau, .. } if !(*r > 0.0 && *tau > 0.0 && r.is_finite() && tau.is_finite()) => {
                Err(Error::InvalidParameter("Lorentz r and tau must be positive and finite".into()))
            }
            NormSpec::Orlicz { phi, .. } => phi.validate(),
            NormSpec::Morrey { p, phi, .. } => {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
                }
                phi.validate()
            }
            NormSpec::OrliczMorrey { phi_orlicz, phi_morrey, .. } => {
                phi_orlicz.validate()?;
                phi_morrey.validate()
            }
            NormSpec::Quotient { inner } => match **inner {
                NormSpec::Quotient { .. } => Err(Error::InvalidParameter("nested quotient norms".into())),
                _ => inner.validate(),
            },
            _ => Ok(()),
        }
    }
}

/// Evaluate `‖f‖_spec` for a sample living on `space`.
pub fn evaluate_norm(space: &FinitePointSpace, sample: &WeightedSample, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    if sample.values.len() != space.n_points() {
        return Err(Error::LengthMismatch {
            expected: space.n_points(),
            got: sample.values.len(),
        });
    }
    let weights = |w: &Option<Weight>| -> Result<Option<Vec<f64>>> { w.as_ref().map(|w| w.resolve(space)).transpose() };
    if sample.values.iter().all(|&v| v == 0.0) {
        if let Some(w) = spec.weight() {
            w.resolve(space)?;
        }
        return match spec {
            NormSpec::Morrey { family, .. } | NormSpec::OrliczMorrey { family, .. } => {
                family.build(space).map(|_| 0.0)
            }
            _ => Ok(0.0),
        };
    }
    match spec {
        NormSpec::Lp { p, weight } => lp_norm(sample, *p, weights(weight)?.as_deref()),
        NormSpec::Lorentz { r, tau, weight } => lorentz_norm(sample, *r, *tau, weights(weight)?.as_deref()),
        NormSpec::Orlicz { phi, weight } => {
            let w = combined_weights(sample, weights(weight)?.as_deref())?;
            luxemburg_weighted(&sample.values, &w, phi)
        }
        NormSpec::VariableLp { exponent } => variable_lp_norm(sample, exponent),
        NormSpec::Morrey { p, phi, family } => morrey_norm(space, &sample.values, *p, phi, &family.build(space)?),
        NormSpec::OrliczMorrey {
            phi_orlicz,
            phi_morrey,
            family,
        } => orlicz_morrey_norm(space, &sample.values, phi_orlicz, phi_morrey, &family.build(space)?),
        NormSpec::Quotient { inner } => Ok(quotient_norm(space, sample, inner)?.value),
        NormSpec::Sup => Ok(sup_norm(sample)),
    }
}

/// `luxemburg_norm(sample, Φ, ω)`.
pub fn luxemburg_norm(sample: &WeightedSample, phi: &OrliczFunction, weight: Option<&[f64]>) -> Result<f64> {
    let w = combined_weights(sample, weight)?;
    luxemburg_weighted(&sample.values, &w, phi)
}
