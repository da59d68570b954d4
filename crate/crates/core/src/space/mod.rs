//! Quasi-metric measure spaces: finite point sets and subsets of the line.

mod finite;
mod line;
mod quadrature;

pub use finite::{
    build_finite_space, double_exponential_space, geometric_space, holder_seminorm, integrate,
    FinitePointSpace, LinePositions, EXHAUSTIVE_TRIANGLE_LIMIT,
};
pub use line::{check_intervals, overlap, Cell, IntervalDomain1D, StepFunction1D};
pub use quadrature::{gauss_legendre, sample_1d, Mesher, Node, QuadratureRule};

use crate::error::{Error, Result};
use crate::logscalar::{log_sum, LogScalar};

#[derive(Clone, Debug)]
pub enum Space {
    Finite(FinitePointSpace),
    Line(IntervalDomain1D),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Center {
    Point(usize),
    Real(f64),
}

/// Function values paired with point masses. `infinite_measure` marks samples
/// of a compactly supported function on a space of infinite measure, where
/// the function is implicitly zero off the sample.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample {
    pub values: Vec<f64>,
    pub masses: Vec<LogScalar>,
    pub infinite_measure: bool,
}

impl WeightedSample {
    pub fn on(space: &FinitePointSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.n_points() {
            return Err(Error::LengthMismatch {
                expected: space.n_points(),
                got: values.len(),
            });
        }
        Ok(WeightedSample {
            values,
            masses: space.masses().to_vec(),
            infinite_measure: false,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        WeightedSample {
            values,
            masses: self.masses.clone(),
            infinite_measure: self.infinite_measure,
        }
    }

    pub fn total_mass(&self) -> LogScalar {
        log_sum(&self.masses)
    }
}

/// A measurable subset used by the weak measure decreasing condition.
#[derive(Clone, Debug, PartialEq)]
pub enum Subset {
    Points(Vec<usize>),
    Intervals(Vec<(f64, f64)>),
}

impl Subset {
    pub fn validated(self, space: &Space) -> Result<Self> {
        match (self, space) {
            (Subset::Points(mut p), Space::Finite(s)) => {
                if p.is_empty() {
                    return Err(Error::EmptySubset);
                }
                p.sort_unstable();
                p.dedup();
                for &i in &p {
                    s.check_point(i)?;
                }
                Ok(Subset::Points(p))
            }
            (Subset::Intervals(iv), Space::Line(d)) => {
                if iv.is_empty() {
                    return Err(Error::EmptySubset);
                }
                check_intervals(&iv, true)?;
                let sub = Subset::Intervals(iv);
                if sub.line_pieces(d).is_empty() {
                    return Err(Error::EmptySubset);
                }
                Ok(sub)
            }
            _ => Err(Error::InvalidParameter(
                "subset kind does not match the space".into(),
            )),
        }
    }

    /// Subset intervals clipped to the domain.
    pub fn line_pieces(&self, domain: &IntervalDomain1D) -> Vec<(f64, f64)> {
        let Subset::Intervals(iv) = self else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &(a, b) in &domain.as_intervals() {
            for &(c, d) in iv {
                let (lo, hi) = (a.max(c), b.min(d));
                if lo < hi {
                    out.push((lo, hi));
                }
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    pub fn contains_point(&self, i: usize) -> bool {
        match self {
            Subset::Points(p) => p.binary_search(&i).is_ok(),
            Subset::Intervals(_) => false,
        }
    }

    pub fn contains_real(&self, x: f64) -> bool {
        match self {
            Subset::Intervals(iv) => iv.iter().any(|&(a, b)| a < x && x < b),
            Subset::Points(_) => false,
        }
    }
}

impl Space {
    pub fn k0(&self) -> f64 {
        match self {
            Space::Finite(s) => s.k0(),
            Space::Line(_) => 1.0,
        }
    }

    pub fn check_center(&self, c: Center) -> Result<()> {
        match (self, c) {
            (Space::Finite(s), Center::Point(i)) => s.check_point(i),
            (Space::Line(_), Center::Real(x)) if x.is_finite() => Ok(()),
            (Space::Line(_), Center::Real(x)) => Err(Error::UnknownPoint(x.to_string())),
            _ => Err(Error::InvalidParameter("center kind does not match the space".into())),
        }
    }

    pub fn ball_measure(&self, c: Center, radius: LogScalar) -> Result<LogScalar> {
        self.check_center(c)?;
        match (self, c) {
            (Space::Finite(s), Center::Point(i)) => s.ball_measure(i, radius),
            (Space::Line(d), Center::Real(x)) => {
                if !radius.is_positive() {
                    return Err(Error::InvalidParameter("ball radius must be positive".into()));
                }
                Ok(LogScalar::from_f64(d.ball_measure(x, radius.to_f64())))
            }
            _ => unreachable!(),
        }
    }

    /// `μ(B(c, r) ∩ Ω)`.
    pub fn ball_measure_in(&self, c: Center, radius: LogScalar, subset: &Subset) -> Result<LogScalar> {
        self.check_center(c)?;
        match (self, c) {
            (Space::Finite(s), Center::Point(i)) => {
                let inside: Vec<LogScalar> = s
                    .ball_members(i, radius)?
                    .into_iter()
                    .filter(|&j| subset.contains_point(j))
                    .map(|j| s.mass(j))
                    .collect();
                Ok(log_sum(&inside))
            }
            (Space::Line(d), Center::Real(x)) => {
                let r = radius.to_f64();
                Ok(LogScalar::from_f64(overlap(&subset.line_pieces(d), x - r, x + r)))
            }
            _ => unreachable!(),
        }
    }

    pub fn mutual_min_measure(&self, x: Center, y: Center) -> Result<LogScalar> {
        self.check_center(x)?;
        self.check_center(y)?;
        match (self, x, y) {
            (Space::Finite(s), Center::Point(i), Center::Point(j)) => s.mutual_min_measure(i, j),
            (Space::Line(d), Center::Real(a), Center::Real(b)) => {
                if a == b {
                    return Err(Error::SamePoint);
                }
                let r = (a - b).abs();
                Ok(LogScalar::from_f64(d.ball_measure(a, r).min(d.ball_measure(b, r))))
            }
            _ => Err(Error::InvalidParameter("center kinds differ".into())),
        }
    }

    pub fn diameter(&self) -> LogScalar {
        match self {
            Space::Finite(s) => s.diameter(),
            Space::Line(d) => LogScalar::from_f64(d.diameter()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_space_mutual_measure() {
        let s = Space::Line(IntervalDomain1D::whole_line());
        let u = s.mutual_min_measure(Center::Real(0.0), Center::Real(1.5)).unwrap();
        assert!((u.to_f64() - 3.0).abs() < 1e-15);
        let d = Space::Line(IntervalDomain1D::new(vec![(0.0, 1.0)]).unwrap());
        let u = d.mutual_min_measure(Center::Real(0.1), Center::Real(0.9)).unwrap();
        assert!((u.to_f64() - 0.9).abs() < 1e-15);
        assert!(d.ball_measure(Center::Point(0), LogScalar::ONE).is_err());
    }

    #[test]
    fn subset_measure_in_ball() {
        let s = Space::Line(IntervalDomain1D::whole_line());
        let omega = Subset::Intervals(vec![(4.0, 6.0), (16.0, 20.0)]).validated(&s).unwrap();
        let m = s.ball_measure_in(Center::Real(5.0), LogScalar::from_f64(12.0), &omega).unwrap();
        assert!((m.to_f64() - 3.0).abs() < 1e-14);
        assert_eq!(Subset::Intervals(vec![]).validated(&s).unwrap_err(), Error::EmptySubset);
    }
}
