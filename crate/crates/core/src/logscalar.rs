//! Signed reals stored as `(sign, ln |value|)`.
//!
//! The double-exponential example space has points `2^(2^k)` which leave the
//! `f64` range at `k = 10`; every distance, mass and ball measure in this crate
//! is therefore carried as a [`LogScalar`]. Addition is the log-sum-exp
//! identity, so `max(a, b) <= a + b <= 2 max(a, b)` holds for positives.
//!
//! Sums over many terms go through [`pairwise_sum`] / [`log_sum`], which use a
//! fixed-order binary tree so results do not depend on thread count.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LogScalar {
    sign: i8,
    ln_mag: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar {
        sign: 0,
        ln_mag: f64::NEG_INFINITY,
    };
    pub const ONE: LogScalar = LogScalar {
        sign: 1,
        ln_mag: 0.0,
    };
    pub const INFINITY: LogScalar = LogScalar {
        sign: 1,
        ln_mag: f64::INFINITY,
    };

    pub fn from_f64(value: f64) -> Self {
        if value == 0.0 {
            Self::ZERO
        } else if value.is_nan() {
            LogScalar {
                sign: 1,
                ln_mag: f64::NAN,
            }
        } else {
            LogScalar {
                sign: if value > 0.0 { 1 } else { -1 },
                ln_mag: value.abs().ln(),
            }
        }
    }

    /// Positive value with the given natural logarithm.
    pub fn from_ln(ln_mag: f64) -> Self {
        if ln_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar { sign: 1, ln_mag }
        }
    }

    pub fn from_log2(log2_mag: f64) -> Self {
        Self::from_ln(log2_mag * std::f64::consts::LN_2)
    }

    pub fn from_parts(sign: i8, ln_mag: f64) -> Self {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar {
                sign: sign.signum(),
                ln_mag,
            }
        }
    }

    /// `2^(2^k)` without leaving the log domain.
    pub fn pow2_pow2(k: u32) -> Self {
        Self::from_log2((k as f64).exp2())
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln(self) -> f64 {
        self.ln_mag
    }

    pub fn log2(self) -> f64 {
        self.ln_mag / std::f64::consts::LN_2
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_mag.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    pub fn is_finite(self) -> bool {
        self.sign == 0 || self.ln_mag.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            LogScalar {
                sign: 1,
                ln_mag: self.ln_mag,
            }
        }
    }

    /// `|self|^e`, keeping the sign of `self`.
    pub fn powf(self, e: f64) -> Self {
        match self.sign {
            0 if e > 0.0 => Self::ZERO,
            0 if e == 0.0 => Self::ONE,
            0 => Self::INFINITY,
            s => LogScalar {
                sign: s,
                ln_mag: self.ln_mag * e,
            },
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        self * LogScalar::from_f64(factor)
    }

    /// Geometric midpoint `sqrt(a * b)` of two positives.
    pub fn log_midpoint(a: Self, b: Self) -> Self {
        Self::from_ln(0.5 * (a.ln_mag + b.ln_mag))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn add_impl(a: Self, b: Self) -> Self {
        if a.sign == 0 {
            return b;
        }
        if b.sign == 0 {
            return a;
        }
        let (big, small) = if a.ln_mag >= b.ln_mag { (a, b) } else { (b, a) };
        if big.ln_mag == f64::INFINITY {
            return big;
        }
        let d = small.ln_mag - big.ln_mag;
        if big.sign == small.sign {
            LogScalar {
                sign: big.sign,
                ln_mag: big.ln_mag + d.exp().ln_1p(),
            }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            LogScalar {
                sign: big.sign,
                ln_mag: big.ln_mag + (-d.exp_m1()).ln(),
            }
        }
    }
}

impl PartialEq for LogScalar {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.ln_mag == other.ln_mag)
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_mag.partial_cmp(&other.ln_mag),
                _ => other.ln_mag.partial_cmp(&self.ln_mag),
            },
            ord => Some(ord),
        }
    }
}

impl Add for LogScalar {
    type Output = LogScalar;
    fn add(self, rhs: Self) -> Self {
        LogScalar::add_impl(self, rhs)
    }
}

impl Sub for LogScalar {
    type Output = LogScalar;
    fn sub(self, rhs: Self) -> Self {
        LogScalar::add_impl(self, -rhs)
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;
    fn neg(self) -> Self {
        LogScalar {
            sign: -self.sign,
            ln_mag: self.ln_mag,
        }
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        LogScalar {
            sign: self.sign * rhs.sign,
            ln_mag: self.ln_mag + rhs.ln_mag,
        }
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    fn div(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return Self::ZERO;
        }
        if rhs.sign == 0 {
            return LogScalar {
                sign: self.sign,
                ln_mag: f64::INFINITY,
            };
        }
        LogScalar {
            sign: self.sign * rhs.sign,
            ln_mag: self.ln_mag - rhs.ln_mag,
        }
    }
}

impl From<f64> for LogScalar {
    fn from(v: f64) -> Self {
        LogScalar::from_f64(v)
    }
}

impl fmt::Display for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                if s < 0 {
                    write!(f, "-")?;
                }
                if self.ln_mag == f64::INFINITY {
                    write!(f, "inf")
                } else {
                    write!(f, "ln:{:?}", self.ln_mag)
                }
            }
        }
    }
}

impl FromStr for LogScalar {
    type Err = Error;

    /// Accepts plain decimals, `inf`, and `lnX` / `log2:X` / `log10:X` /
    /// `logB:X` for an arbitrary base `B`, optionally preceded by `-`.
    fn from_str(raw: &str) -> Result<Self> {
        let text = raw.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) if rest.starts_with("ln") || rest.starts_with("log") || rest == "inf" => {
                (true, rest)
            }
            _ => (false, text),
        };
        let bad = || Error::Parse(format!("cannot parse '{raw}' as a number"));
        let value = if body == "inf" {
            LogScalar::INFINITY
        } else if let Some(rest) = body.strip_prefix("ln:") {
            LogScalar::from_ln(rest.parse::<f64>().map_err(|_| bad())?)
        } else if let Some(rest) = body.strip_prefix("log") {
            let (base, exponent) = rest.split_once(':').ok_or_else(bad)?;
            let base: f64 = if base.is_empty() {
                std::f64::consts::E
            } else {
                base.parse().map_err(|_| bad())?
            };
            if !(base > 0.0 && base != 1.0) {
                return Err(bad());
            }
            let exponent: f64 = exponent.parse().map_err(|_| bad())?;
            LogScalar::from_ln(exponent * base.ln())
        } else {
            LogScalar::from_f64(body.parse::<f64>().map_err(|_| bad())?)
        };
        Ok(if negative { -value } else { value })
    }
}

impl Serialize for LogScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LogScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(LogScalar::from_f64(v)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

const PAIRWISE_LEAF: usize = 8;

/// Sum in a fixed binary-tree order (leaves of at most eight terms).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sum of signed log-domain terms, rescaled by the largest magnitude so that
/// the mantissa sum runs through [`pairwise_sum`].
pub fn log_sum(terms: &[LogScalar]) -> LogScalar {
    let max_ln = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    if max_ln == f64::NEG_INFINITY {
        return LogScalar::ZERO;
    }
    if max_ln == f64::INFINITY {
        return LogScalar::INFINITY;
    }
    let scaled: Vec<f64> = terms
        .iter()
        .map(|t| match t.sign() {
            0 => 0.0,
            s => f64::from(s) * (t.ln() - max_ln).exp(),
        })
        .collect();
    let total = pairwise_sum(&scaled);
    if total == 0.0 {
        return LogScalar::ZERO;
    }
    LogScalar::from_parts(if total > 0.0 { 1 } else { -1 }, max_ln + total.abs().ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_positive_reals() {
        for v in [1e-300, 3.5e-7, 1.0, 2.0, 12345.678, 9.9e307] {
            let back = LogScalar::from_f64(v).to_f64();
            assert!(((back - v) / v).abs() < 1e-12, "{v} -> {back}");
        }
    }

    #[test]
    fn addition_is_bracketed_by_max_and_twice_max() {
        let a = LogScalar::from_f64(3.0);
        let b = LogScalar::from_f64(3.0);
        let s = a + b;
        assert!(s >= a.max(b));
        assert!(s.ln() <= a.max(b).ln() + std::f64::consts::LN_2);
        assert!((s.to_f64() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn subtraction_of_huge_values() {
        // 2^(2^20) - 2^(2^19) = 2^(2^20) (1 - 2^-(2^19))
        let big = LogScalar::pow2_pow2(20);
        let small = LogScalar::pow2_pow2(19);
        let d = big - small;
        assert!(d.is_positive());
        assert_eq!(d.ln(), big.ln());
        let e = LogScalar::from_f64(16.0) - LogScalar::from_f64(4.0);
        assert!((e.to_f64() - 12.0).abs() < 1e-13);
        assert!((LogScalar::from_f64(4.0) - LogScalar::from_f64(4.0)).is_zero());
    }

    #[test]
    fn signed_arithmetic_and_order() {
        let a = LogScalar::from_f64(-2.0);
        let b = LogScalar::from_f64(5.0);
        assert!(((a + b).to_f64() - 3.0).abs() < 1e-14);
        assert!(((a * b).to_f64() + 10.0).abs() < 1e-13);
        assert!(a < LogScalar::ZERO && LogScalar::ZERO < b);
        assert!(LogScalar::from_f64(-3.0) < a);
    }

    #[test]
    fn parses_log_prefixes() {
        let v: LogScalar = "log2:1024".parse().unwrap();
        assert!((v.log2() - 1024.0).abs() < 1e-9);
        let w: LogScalar = "log10:3".parse().unwrap();
        assert!((w.to_f64() - 1000.0).abs() < 1e-9);
        let z: LogScalar = "-ln:2".parse().unwrap();
        assert!((z.to_f64() + 2f64.exp()).abs() < 1e-12);
        assert!("log:".parse::<LogScalar>().is_err());
        let text = LogScalar::pow2_pow2(40).to_string();
        assert_eq!(text.parse::<LogScalar>().unwrap(), LogScalar::pow2_pow2(40));
    }

    #[test]
    fn log_sum_matches_direct_sum() {
        let terms: Vec<LogScalar> = (1..=20).map(|k| LogScalar::from_f64(f64::from(k))).collect();
        assert!((log_sum(&terms).to_f64() - 210.0).abs() < 1e-12);
        assert!(log_sum(&[]).is_zero());
    }
}
