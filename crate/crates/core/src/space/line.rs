//! Subsets of the real line with Lebesgue measure and step functions on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite union of disjoint open intervals, or the whole line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalDomain1D {
    #[serde(default)]
    intervals: Vec<(f64, f64)>,
    #[serde(default)]
    whole_line: bool,
}

impl IntervalDomain1D {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyDomain);
        }
        check_intervals(&intervals, false)?;
        Ok(IntervalDomain1D {
            intervals,
            whole_line: false,
        })
    }

    pub fn whole_line() -> Self {
        IntervalDomain1D {
            intervals: Vec::new(),
            whole_line: true,
        }
    }

    /// Validates a deserialized domain; intervals are ignored for the whole line.
    pub fn validated(self) -> Result<Self> {
        if self.whole_line {
            Ok(Self::whole_line())
        } else {
            Self::new(self.intervals)
        }
    }

    pub fn is_whole_line(&self) -> bool {
        self.whole_line
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// The domain as (possibly unbounded) intervals.
    pub fn as_intervals(&self) -> Vec<(f64, f64)> {
        if self.whole_line {
            vec![(f64::NEG_INFINITY, f64::INFINITY)]
        } else {
            self.intervals.clone()
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.whole_line || self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }

    /// Lebesgue measure of `(c - r, c + r)` intersected with the domain.
    pub fn ball_measure(&self, center: f64, radius: f64) -> f64 {
        if self.whole_line {
            return 2.0 * radius;
        }
        overlap(&self.intervals, center - radius, center + radius)
    }

    pub fn measure(&self) -> f64 {
        if self.whole_line {
            f64::INFINITY
        } else {
            self.intervals.iter().map(|(a, b)| b - a).sum()
        }
    }

    pub fn diameter(&self) -> f64 {
        if self.whole_line {
            f64::INFINITY
        } else {
            self.intervals[self.intervals.len() - 1].1 - self.intervals[0].0
        }
    }
}

/// Total length of `(lo, hi)` intersected with the intervals.
pub fn overlap(intervals: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    intervals
        .iter()
        .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
        .sum()
}

/// Sorted, disjoint intervals with `a < b`; unbounded ends allowed if `open_ends`.
pub fn check_intervals(intervals: &[(f64, f64)], open_ends: bool) -> Result<()> {
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if a.is_nan() || b.is_nan() || !(a < b) {
            return Err(Error::InvalidDomain(format!("interval {i} = ({a}, {b}) is empty")));
        }
        if !open_ends && (!a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidDomain(format!("interval {i} = ({a}, {b}) is unbounded")));
        }
        if i > 0 && intervals[i - 1].1 > a {
            return Err(Error::InvalidDomain(format!(
                "intervals {} and {i} overlap or are out of order",
                i - 1
            )));
        }
    }
    Ok(())
}

/// A piecewise-constant function: `values[0]` on `(-∞, b_0)`, `values[i]` on
/// `(b_{i-1}, b_i)`, and the last value on `(b_last, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// A maximal interval on which a function is constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

impl Cell {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_bounded(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

impl StepFunction1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidStepFunction("breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidStepFunction("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction("values must be finite".into()));
        }
        Ok(StepFunction1D { breakpoints, values })
    }

    /// The indicator of `(a, b)`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidStepFunction(format!("empty interval ({a}, {b})")));
        }
        Self::new(vec![a, b], vec![0.0, 1.0, 0.0])
    }

    pub fn validated(self) -> Result<Self> {
        Self::new(self.breakpoints, self.values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b <= x)]
    }

    pub fn pieces(&self) -> Vec<Cell> {
        let mut edges = Vec::with_capacity(self.breakpoints.len() + 2);
        edges.push(f64::NEG_INFINITY);
        edges.extend_from_slice(&self.breakpoints);
        edges.push(f64::INFINITY);
        edges
            .windows(2)
            .zip(&self.values)
            .map(|(w, &value)| Cell { a: w[0], b: w[1], value })
            .collect()
    }

    /// Cells of `f` restricted to the given (possibly unbounded) intervals.
    pub fn cells_on(&self, intervals: &[(f64, f64)]) -> Vec<Cell> {
        let mut out = Vec::new();
        for &(lo, hi) in intervals {
            for p in self.pieces() {
                let a = p.a.max(lo);
                let b = p.b.min(hi);
                if a < b {
                    out.push(Cell { a, b, value: p.value });
                }
            }
        }
        out
    }

    /// Smallest interval outside of which `f` vanishes, if it is bounded.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        let pieces = self.pieces();
        let first = pieces.iter().position(|c| c.value != 0.0)?;
        let last = pieces.iter().rposition(|c| c.value != 0.0)?;
        let (a, b) = (pieces[first].a, pieces[last].b);
        (a.is_finite() && b.is_finite()).then_some((a, b))
    }

    /// `∫ |f|^p` over the intervals; infinite if `f` does not vanish on an
    /// unbounded piece.
    pub fn lp_power(&self, p: f64, intervals: &[(f64, f64)]) -> f64 {
        self.cells_on(intervals)
            .iter()
            .filter(|c| c.value != 0.0)
            .map(|c| c.value.abs().powf(p) * c.len())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_validation() {
        assert_eq!(IntervalDomain1D::new(vec![]).unwrap_err(), Error::EmptyDomain);
        assert!(IntervalDomain1D::new(vec![(0.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(IntervalDomain1D::new(vec![(1.0, 1.0)]).is_err());
        assert!(IntervalDomain1D::new(vec![(0.0, f64::INFINITY)]).is_err());
        assert!(IntervalDomain1D::new(vec![(0.0, 1.0), (1.0, 2.0)]).is_ok());
    }

    #[test]
    fn ball_measure_clips_to_the_domain() {
        let d = IntervalDomain1D::new(vec![(0.0, 1.0), (2.0, 4.0)]).unwrap();
        assert!((d.ball_measure(1.5, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(d.ball_measure(10.0, 1.0), 0.0);
        assert_eq!(d.diameter(), 4.0);
        assert_eq!(IntervalDomain1D::whole_line().ball_measure(3.0, 2.5), 5.0);
    }

    #[test]
    fn step_function_pieces_and_eval() {
        let f = StepFunction1D::new(vec![0.0, 1.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(-3.0), 0.0);
        assert_eq!(f.support_hull(), Some((0.0, 1.0)));
        let cells = f.cells_on(&[(0.5, 3.0)]);
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0], Cell { a: 0.5, b: 1.0, value: 2.0 });
        assert!((f.lp_power(2.0, &[(f64::NEG_INFINITY, f64::INFINITY)]) - 4.0).abs() < 1e-15);
        assert!(StepFunction1D::new(vec![1.0, 0.0], vec![0.0; 3]).is_err());
        assert!(StepFunction1D::new(vec![0.0], vec![0.0]).is_err());
        let g = StepFunction1D::new(vec![0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(g.support_hull(), None);
    }
}
