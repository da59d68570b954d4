//! Graded Gauss–Legendre quadrature on unions of intervals.

use crate::error::{Error, Result};
use crate::logscalar::LogScalar;

use super::finite::{FinitePointSpace, LinePositions};
use super::line::{IntervalDomain1D, StepFunction1D};
use super::WeightedSample;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule: each interval is split at its midpoint and each half is
/// graded geometrically toward its outer end, with a polynomial map on the
/// innermost cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: usize,
    pub grading: f64,
    pub levels: usize,
    pub ratio: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            nodes: 8,
            grading: 2.0,
            levels: 10,
            ratio: 0.2,
        }
    }
}

impl QuadratureRule {
    pub fn refined(self) -> Self {
        QuadratureRule {
            nodes: 2 * self.nodes,
            levels: self.levels + 5,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 || self.nodes > 512 {
            return Err(Error::InvalidParameter(format!("node count {} out of range", self.nodes)));
        }
        if !(self.grading >= 1.0) || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidParameter("grading must be >= 1 and ratio in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Reusable node set for one rule.
#[derive(Clone, Debug)]
pub struct Mesher {
    rule: QuadratureRule,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Mesher {
    pub fn new(rule: QuadratureRule) -> Result<Self> {
        rule.validate()?;
        let (x, w) = gauss_legendre(rule.nodes);
        Ok(Mesher { rule, x, w })
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Same nodes with a different grading exponent.
    pub fn with_grading(&self, grading: f64) -> Mesher {
        Mesher {
            rule: QuadratureRule { grading, ..self.rule },
            ..self.clone()
        }
    }

    /// Plain rule on `[a, b]`.
    pub fn plain(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in self.x.iter().zip(&self.w) {
            out.push((c + h * x, h * w));
        }
    }

    /// Offsets and weights on `[0, len]`, graded toward 0, ascending.
    fn graded_offsets(&self, len: f64, out: &mut Vec<(f64, f64)>) {
        let QuadratureRule {
            grading,
            levels,
            ratio,
            ..
        } = self.rule;
        let inner = len * ratio.powi(levels as i32);
        // Keep the smallest offset well above the subnormal range.
        let u_min = 0.5 * (self.x[0] + 1.0);
        let grading = grading.min(((1e-250 / inner).ln() / u_min.ln()).max(1.0));
        for (x, w) in self.x.iter().zip(&self.w) {
            let u = 0.5 * (x + 1.0);
            out.push((inner * u.powf(grading), 0.5 * w * inner * grading * u.powf(grading - 1.0)));
        }
        for k in (0..levels).rev() {
            let lo = len * ratio.powi(k as i32 + 1);
            let hi = len * ratio.powi(k as i32);
            self.plain(lo, hi, out);
        }
    }

    /// Interval `[a, b]` graded toward both ends, each node kept as an offset
    /// from the end it is graded toward. Ascending in position.
    pub fn graded_anchored(&self, a: f64, b: f64, out: &mut Vec<Node>) {
        let half = 0.5 * (b - a);
        let mut offsets = Vec::new();
        self.graded_offsets(half, &mut offsets);
        out.extend(offsets.iter().map(|&(t, w)| Node {
            anchor: a,
            offset: t,
            weight: w,
        }));
        out.extend(offsets.iter().rev().map(|&(t, w)| Node {
            anchor: b,
            offset: -t,
            weight: w,
        }));
    }

    /// Interval `[a, b]` graded toward both ends.
    pub fn graded(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let mut nodes = Vec::new();
        self.graded_anchored(a, b, &mut nodes);
        // Nodes that round onto an endpoint carry negligible weight but would
        // sit on a jump of the integrand.
        out.extend(
            nodes
                .iter()
                .map(|n| (n.position(), n.weight))
                .filter(|&(x, _)| a < x && x < b),
        );
    }
}

/// Quadrature node at `anchor + offset`. Near a graded end the offset is
/// exact while the rounded position is not.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub anchor: f64,
    pub offset: f64,
    pub weight: f64,
}

impl Node {
    pub fn at(x: f64, weight: f64) -> Self {
        Node {
            anchor: x,
            offset: 0.0,
            weight,
        }
    }

    pub fn position(&self) -> f64 {
        self.anchor + self.offset
    }
}

/// Discretize a step function on an interval domain. On the whole line the
/// sample covers the support hull and is flagged as having infinite measure.
pub fn sample_1d(
    domain: &IntervalDomain1D,
    f: &StepFunction1D,
    rule: QuadratureRule,
) -> Result<(FinitePointSpace, WeightedSample)> {
    let mesher = Mesher::new(rule)?;
    let (intervals, infinite) = if domain.is_whole_line() {
        let hull = match f.support_hull() {
            Some(h) => h,
            None if f.values().iter().all(|&v| v == 0.0) => (0.0, 1.0),
            None => {
                return Err(Error::InvalidStepFunction(
                    "function does not vanish outside a bounded set".into(),
                ))
            }
        };
        (vec![hull], true)
    } else {
        (domain.intervals().to_vec(), false)
    };
    if intervals.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for cell in f.cells_on(&intervals) {
        let start = nodes.len();
        mesher.graded(cell.a, cell.b, &mut nodes);
        values.extend(std::iter::repeat_n(cell.value, nodes.len() - start));
    }
    let positions = nodes.iter().map(|&(x, _)| x).collect();
    let masses: Vec<LogScalar> = nodes.iter().map(|&(_, w)| LogScalar::from_f64(w)).collect();
    let space = FinitePointSpace::on_line(LinePositions::Real(positions), masses.clone())?;
    Ok((
        space,
        WeightedSample {
            values,
            masses,
            infinite_measure: infinite,
        },
    ))
}
