//! The Gagliardo-type kernel
//! `G_s f(x) = ∫ |f(x) - f(y)|^q / (U(x,y) ρ(x,y)^{sq}) dμ(y)`
//! and the functional `F(s) = s^{1/q} ‖G_s^{1/q}‖_Y`.
//!
//! Finite spaces are summed in the log domain. Step functions on the line use
//! `U(x,y) = 2|x - y|` and integrate the kernel exactly over each constant
//! piece; the outer norm is taken on a graded quadrature mesh, extended on the
//! whole line by geometric far-field cells and one tail atom.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscalar::{log_sum, LogScalar};
use crate::norms::{evaluate_norm, quotient_norm, NormSpec};
use crate::space::{
    gauss_legendre, Cell, Center, FinitePointSpace, IntervalDomain1D, LinePositions, Mesher, Node, QuadratureRule, Space,
    StepFunction1D, Subset, WeightedSample,
};

/// Number of doubling cells between the support and the tail atom.
pub const FAR_CELLS: i32 = 40;
const PAIR_NODES: usize = 32;
const MAX_GRADING: f64 = 64.0;

#[derive(Clone, Debug, PartialEq)]
pub enum RegionSpec {
    All,
    InsideBall { radius: LogScalar },
    OutsideBall { radius: LogScalar },
    Subset(Subset),
}

#[derive(Clone, Copy, Debug)]
pub enum MsInput<'a> {
    Finite {
        space: &'a FinitePointSpace,
        values: &'a [f64],
    },
    Step {
        domain: &'a IntervalDomain1D,
        f: &'a StepFunction1D,
        rule: QuadratureRule,
    },
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::SOutOfRange(s))
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q must be positive, got {q}")))
    }
}

/// `∫_{d1}^{d2} r^{-1-σ} dr` without cancellation; `d2` may be infinite.
pub fn power_integral(d1: f64, d2: f64, sigma: f64) -> f64 {
    power_integral_width(d1, d2 - d1, sigma)
}

/// [`power_integral`] over `[d1, d1 + width]`, for when `width` is known more
/// accurately than `d2 - d1`.
fn power_integral_width(d1: f64, width: f64, sigma: f64) -> f64 {
    if !(width > 0.0) {
        return 0.0;
    }
    if d1 <= 0.0 {
        return f64::INFINITY;
    }
    let lead = (-sigma * d1.ln()).exp() / sigma;
    if width.is_infinite() {
        lead
    } else {
        lead * -(-sigma * (width / d1).ln_1p()).exp_m1()
    }
}

// ---------------------------------------------------------------------------
// Finite spaces

/// Pairwise `ln ρ` and `ln U`, independent of `s`.
#[derive(Clone, Debug)]
pub struct FiniteKernel<'a> {
    space: &'a FinitePointSpace,
    ln_rho: Vec<f64>,
    ln_u: Vec<f64>,
}

impl<'a> FiniteKernel<'a> {
    pub fn new(space: &'a FinitePointSpace) -> Result<Self> {
        let n = space.n_points();
        if n < 2 {
            return Err(Error::DiagonalOnly);
        }
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut rho = vec![f64::NAN; n];
                let mut u = vec![f64::NAN; n];
                for y in (0..n).filter(|&y| y != x) {
                    rho[y] = space.distance(x, y).ln();
                    u[y] = space.mutual_min_measure(x, y).expect("distinct valid points").ln();
                }
                (rho, u)
            })
            .collect();
        let (ln_rho, ln_u): (Vec<Vec<f64>>, Vec<Vec<f64>>) = rows.into_iter().unzip();
        Ok(FiniteKernel {
            space,
            ln_rho: ln_rho.concat(),
            ln_u: ln_u.concat(),
        })
    }

    fn included(&self, x: usize, y: usize, region: &RegionSpec) -> bool {
        let n = self.space.n_points();
        match region {
            RegionSpec::All => true,
            RegionSpec::InsideBall { radius } => self.ln_rho[x * n + y] < radius.ln(),
            RegionSpec::OutsideBall { radius } => self.ln_rho[x * n + y] >= radius.ln(),
            RegionSpec::Subset(s) => s.contains_point(y),
        }
    }

    /// `G_s f(x)` in the log domain; zero for `x` outside a subset region.
    pub fn kernel(&self, values: &[f64], q: f64, s: f64, x: usize, region: &RegionSpec) -> LogScalar {
        let n = self.space.n_points();
        if let RegionSpec::Subset(sub) = region {
            if !sub.contains_point(x) {
                return LogScalar::ZERO;
            }
        }
        let terms: Vec<LogScalar> = (0..n)
            .filter(|&y| y != x && values[y] != values[x] && self.included(x, y, region))
            .map(|y| {
                let k = x * n + y;
                LogScalar::from_ln(
                    q * (values[x] - values[y]).abs().ln() + self.space.mass(y).ln() - self.ln_u[k] - s * q * self.ln_rho[k],
                )
            })
            .collect();
        log_sum(&terms)
    }

    pub fn kernel_all(&self, values: &[f64], q: f64, s: f64, region: &RegionSpec) -> Vec<LogScalar> {
        (0..self.space.n_points())
            .into_par_iter()
            .map(|x| self.kernel(values, q, s, x, region))
            .collect()
    }
}

fn check_finite_region(space: &FinitePointSpace, region: &RegionSpec) -> Result<RegionSpec> {
    match region {
        RegionSpec::InsideBall { radius } | RegionSpec::OutsideBall { radius } if !radius.is_positive() => {
            Err(Error::InvalidParameter("region radius must be positive".into()))
        }
        RegionSpec::Subset(s) => Ok(RegionSpec::Subset(s.clone().validated(&Space::Finite(space.clone()))?)),
        r => Ok(r.clone()),
    }
}

fn restrict_values(values: &[f64], region: &RegionSpec) -> Vec<f64> {
    match region {
        RegionSpec::Subset(s) => values
            .iter()
            .enumerate()
            .map(|(i, &v)| if s.contains_point(i) { v } else { 0.0 })
            .collect(),
        _ => values.to_vec(),
    }
}

// ---------------------------------------------------------------------------
// Step functions on the line

fn line_base(domain: &IntervalDomain1D, region: &RegionSpec) -> Result<Vec<(f64, f64)>> {
    match region {
        RegionSpec::Subset(sub @ Subset::Intervals(_)) => {
            let sub = sub.clone().validated(&Space::Line(domain.clone()))?;
            Ok(sub.line_pieces(domain))
        }
        RegionSpec::Subset(Subset::Points(_)) => Err(Error::InvalidParameter(
            "point subsets need a finite space".into(),
        )),
        RegionSpec::InsideBall { radius } | RegionSpec::OutsideBall { radius } if !radius.is_positive() => {
            Err(Error::InvalidParameter("region radius must be positive".into()))
        }
        _ => Ok(domain.as_intervals()),
    }
}

/// Distances from `at` to the ends of `c`, measured from the anchor so that
/// offsets of a few ulps next to a jump are not lost.
fn distance_range(at: &Node, c: &Cell) -> (f64, f64) {
    let (da, db) = (c.a - at.anchor, c.b - at.anchor);
    if at.offset <= da {
        (da - at.offset, db - at.offset)
    } else {
        (at.offset - db, at.offset - da)
    }
}

fn inside(at: &Node, c: &Cell) -> bool {
    c.a - at.anchor < at.offset && at.offset < c.b - at.anchor
}

fn clip(range: (f64, f64), region: &RegionSpec) -> (f64, f64) {
    match region {
        RegionSpec::InsideBall { radius } => (range.0, range.1.min(radius.to_f64())),
        RegionSpec::OutsideBall { radius } => (range.0.max(radius.to_f64()), range.1),
        _ => range,
    }
}

/// `G_s f(x)` for a step function, with `U = 2|x - y|` and the inner integral
/// taken over `cells` (pieces of `f` on the domain, clipped to the region).
fn step_kernel(cells: &[Cell], vx: f64, q: f64, s: f64, at: &Node, region: &RegionSpec) -> f64 {
    let sigma = s * q;
    let terms: Vec<f64> = cells
        .iter()
        .filter(|c| c.value != vx && !inside(at, c))
        .map(|c| {
            let range = distance_range(at, c);
            let (d1, d2) = clip(range, region);
            // Far from the cell, d2 - d1 loses the digits of the cell length.
            let width = if (d1, d2) == range { c.len() } else { d2 - d1 };
            0.5 * (c.value - vx).abs().powf(q) * power_integral_width(d1, width, sigma)
        })
        .collect();
    crate::logscalar::pairwise_sum(&terms)
}

/// Outer quadrature points for the step-function path.
struct OuterMesh {
    /// Nodes with the value of `f` there.
    nodes: Vec<(Node, f64)>,
    infinite: bool,
}

enum Segment {
    Graded(f64, f64),
    Plain(f64, f64),
    /// Tail atom at `x` standing for the ray beyond it, pointing right if `true`.
    Atom(f64, f64, bool),
}

fn is_constant(f: &StepFunction1D, base: &[(f64, f64)]) -> bool {
    let cells = f.cells_on(base);
    cells.windows(2).all(|w| w[0].value == w[1].value)
}

fn outer_mesh(
    domain: &IntervalDomain1D,
    f: &StepFunction1D,
    base: &[(f64, f64)],
    mesher: &Mesher,
    gamma: Option<f64>,
) -> Result<OuterMesh> {
    let mut segments = Vec::new();
    if domain.is_whole_line() {
        let (lo, hi) = f.support_hull().ok_or_else(|| {
            Error::InvalidStepFunction("on the whole line the function must vanish outside a bounded set".into())
        })?;
        for c in f.cells_on(&[(lo, hi)]) {
            segments.push(Segment::Graded(c.a, c.b));
        }
        let len = hi - lo;
        let mid = 0.5 * (lo + hi);
        segments.push(Segment::Graded(hi, hi + len));
        segments.push(Segment::Graded(lo - len, lo));
        for k in 0..FAR_CELLS {
            let (a, b) = (len * 2f64.powi(k), len * 2f64.powi(k + 1));
            segments.push(Segment::Plain(hi + a, hi + b));
            segments.push(Segment::Plain(lo - b, lo - a));
        }
        if let Some(g) = gamma {
            let reach = len * 2f64.powi(FAR_CELLS);
            segments.push(Segment::Atom(hi + reach, (hi + reach - mid) / g, true));
            segments.push(Segment::Atom(lo - reach, (mid - lo + reach) / g, false));
        }
    } else {
        for c in f.cells_on(&domain.as_intervals()) {
            segments.push(Segment::Graded(c.a, c.b));
        }
    }
    let mut nodes = Vec::new();
    for seg in segments {
        match seg {
            Segment::Graded(a, b) | Segment::Plain(a, b) => {
                let graded = matches!(seg, Segment::Graded(..));
                for &(lo, hi) in base {
                    let (ca, cb) = (a.max(lo), b.min(hi));
                    if ca >= cb {
                        continue;
                    }
                    let v = f.eval(0.5 * (ca + cb));
                    if graded || ca > a || cb < b {
                        let mut piece = Vec::new();
                        mesher.graded_anchored(ca, cb, &mut piece);
                        nodes.extend(piece.into_iter().map(|n| (n, v)));
                    } else {
                        let mut piece = Vec::new();
                        mesher.plain(ca, cb, &mut piece);
                        nodes.extend(piece.into_iter().map(|(x, w)| (Node::at(x, w), v)));
                    }
                }
            }
            Segment::Atom(x, w, right) => {
                let covered = base.iter().any(|&(lo, hi)| {
                    if right {
                        lo < x && hi == f64::INFINITY
                    } else {
                        hi > x && lo == f64::NEG_INFINITY
                    }
                });
                if covered {
                    nodes.push((Node::at(x, w), f.eval(x)));
                }
            }
        }
    }
    nodes.sort_by(|a, b| {
        (a.0.position().total_cmp(&b.0.position()))
            .then(a.0.anchor.total_cmp(&b.0.anchor))
            .then(a.0.offset.total_cmp(&b.0.offset))
    });
    Ok(OuterMesh {
        nodes,
        infinite: domain.is_whole_line(),
    })
}

fn check_line_spec(spec: &NormSpec) -> Result<()> {
    match spec {
        NormSpec::VariableLp { .. } | NormSpec::Morrey { .. } | NormSpec::OrliczMorrey { .. } => Err(
            Error::UnsupportedSpec(format!("{} norms are only evaluated on finite spaces", spec.name())),
        ),
        NormSpec::Quotient { inner } => check_line_spec(inner),
        _ => match spec.weight() {
            Some(crate::norms::Weight::Values(_)) => Err(Error::UnsupportedSpec(
                "weights on the line must be given as a profile".into(),
            )),
            _ => Ok(()),
        },
    }
}

/// Exponent governing `Y` near a singularity: `t^{-a}` is locally in `Y`
/// iff `a` times this is below 1.
fn local_exponent(spec: &NormSpec) -> f64 {
    match spec {
        NormSpec::Lp { p, .. } => *p,
        NormSpec::Lorentz { r, .. } => *r,
        NormSpec::Orlicz { phi, .. } => phi.types().1,
        NormSpec::Quotient { inner } => local_exponent(inner),
        NormSpec::Sup => f64::INFINITY,
        _ => 1.0,
    }
}

/// Near a jump `G_s^{1/q}` behaves like `|x - b|^{-s}`, so the outer integrand
/// is `|x - b|^{-sp}`; grading `1/(1 - sp)` makes the innermost cell regular.
fn outer_grading(mesher: &Mesher, spec: &NormSpec, s: f64) -> f64 {
    let alpha = s * local_exponent(spec);
    let wanted = if alpha < 1.0 { 1.0 / (1.0 - alpha) } else { MAX_GRADING };
    mesher.rule().grading.max(wanted.min(MAX_GRADING))
}

fn has_jump(cells: &[Cell]) -> bool {
    cells.windows(2).any(|w| w[0].b == w[1].a && w[0].value != w[1].value)
}

/// Decay exponent `γ` of `G^{p/q} ω ~ |x|^{-1-γ}` in the far field.
fn tail_exponent(spec: &NormSpec, q: f64, s: f64) -> Result<Option<f64>> {
    let p = spec
        .nominal_exponent()
        .ok_or_else(|| Error::UnsupportedSpec(format!("no far-field exponent for {} norms", spec.name())))?;
    if p.is_infinite() {
        return Ok(None);
    }
    let eta = spec.weight().map_or(0.0, |w| w.decay());
    let gamma = (1.0 + s * q) * p / q - 1.0 + eta;
    if gamma <= 0.0 {
        return Err(Error::DivergentTail(gamma));
    }
    Ok(Some(gamma))
}

/// Positions that round together (close to a jump, or far from the origin)
/// are moved apart by an ulp; they only label the nodes.
fn line_space(nodes: &[(f64, f64)], values: Vec<f64>, infinite: bool) -> Result<(FinitePointSpace, WeightedSample)> {
    let mut pos: Vec<f64> = Vec::with_capacity(nodes.len());
    for &(x, _) in nodes {
        let x = match pos.last() {
            Some(&last) if x <= last => last.next_up(),
            _ => x,
        };
        pos.push(x);
    }
    let mass: Vec<f64> = nodes.iter().map(|n| n.1).collect();
    let masses: Vec<LogScalar> = mass.iter().map(|&m| LogScalar::from_f64(m)).collect();
    let space = FinitePointSpace::on_line(LinePositions::Real(pos), masses.clone())?;
    Ok((
        space,
        WeightedSample {
            values,
            masses,
            infinite_measure: infinite,
        },
    ))
}

// ---------------------------------------------------------------------------
// Public operations

/// `G_s f(x)` at one point.
pub fn gagliardo_kernel(input: MsInput<'_>, q: f64, s: f64, x: Center, region: &RegionSpec) -> Result<f64> {
    check_s(s)?;
    check_q(q)?;
    match (input, x) {
        (MsInput::Finite { space, values }, Center::Point(i)) => {
            space.check_point(i)?;
            check_len(space, values)?;
            let region = check_finite_region(space, region)?;
            let values = restrict_values(values, &region);
            Ok(FiniteKernel::new(space)?.kernel(&values, q, s, i, &region).to_f64())
        }
        (MsInput::Step { domain, f, .. }, Center::Real(x)) => {
            let base = line_base(domain, region)?;
            let cells = f.cells_on(&base);
            Ok(step_kernel(&cells, f.eval(x), q, s, &Node::at(x, 0.0), region))
        }
        _ => Err(Error::InvalidParameter("center kind does not match the input".into())),
    }
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

/// Everything that does not depend on `s`, shared across a scan.
enum Prepared<'a> {
    Finite {
        kernel: FiniteKernel<'a>,
        values: Vec<f64>,
        region: RegionSpec,
    },
    Step {
        domain: &'a IntervalDomain1D,
        f: &'a StepFunction1D,
        mesher: Mesher,
        base: Vec<(f64, f64)>,
        cells: Vec<Cell>,
        constant: bool,
        region: RegionSpec,
    },
}

impl<'a> Prepared<'a> {
    fn new(input: MsInput<'a>, region: &RegionSpec) -> Result<Self> {
        match input {
            MsInput::Finite { space, values } => {
                check_len(space, values)?;
                let region = check_finite_region(space, region)?;
                Ok(Prepared::Finite {
                    kernel: FiniteKernel::new(space)?,
                    values: restrict_values(values, &region),
                    region,
                })
            }
            MsInput::Step { domain, f, rule } => {
                let base = line_base(domain, region)?;
                if base.is_empty() {
                    return Err(Error::EmptyDomain);
                }
                let cells = f.cells_on(&base);
                Ok(Prepared::Step {
                    domain,
                    f,
                    mesher: Mesher::new(rule)?,
                    constant: is_constant(f, &base),
                    base,
                    cells,
                    region: region.clone(),
                })
            }
        }
    }

    fn functional(&self, q: f64, spec: &NormSpec, s: f64) -> Result<f64> {
        check_s(s)?;
        check_q(q)?;
        let norm = match self {
            Prepared::Finite { kernel, values, region } => {
                let g = kernel.kernel_all(values, q, s, region);
                let roots: Vec<f64> = g.iter().map(|v| v.powf(1.0 / q).to_f64()).collect();
                let sample = WeightedSample::on(kernel.space, roots)?;
                evaluate_norm(kernel.space, &sample, spec)?
            }
            Prepared::Step {
                domain,
                f,
                mesher,
                base,
                cells,
                constant,
                region,
            } => {
                check_line_spec(spec)?;
                if *constant {
                    return Ok(0.0);
                }
                let alpha = s * local_exponent(spec);
                if alpha >= 1.0 && has_jump(cells) && !matches!(region, RegionSpec::OutsideBall { .. }) {
                    return Err(Error::DivergentAtJump(alpha));
                }
                let gamma = if domain.is_whole_line() { tail_exponent(spec, q, s)? } else { None };
                let mesh = outer_mesh(domain, f, base, &mesher.with_grading(outer_grading(mesher, spec, s)), gamma)?;
                let values: Vec<f64> = mesh
                    .nodes
                    .par_iter()
                    .map(|(at, v)| step_kernel(cells, *v, q, s, at, region).powf(1.0 / q))
                    .collect();
                let points: Vec<(f64, f64)> = mesh.nodes.iter().map(|(n, _)| (n.position(), n.weight)).collect();
                let (space, sample) = line_space(&points, values, mesh.infinite)?;
                evaluate_norm(&space, &sample, spec)?
            }
        };
        Ok(s.powf(1.0 / q) * norm)
    }

    fn reference(&self, spec: &NormSpec) -> Result<f64> {
        match self {
            Prepared::Finite { kernel, values, .. } => {
                evaluate_norm(kernel.space, &WeightedSample::on(kernel.space, values.clone())?, spec)
            }
            Prepared::Step {
                domain, f, mesher, base, ..
            } => {
                check_line_spec(spec)?;
                let mut intervals = base.clone();
                if domain.is_whole_line() {
                    let hull = match f.support_hull() {
                        Some(h) => h,
                        None if f.values().iter().all(|&v| v == 0.0) => return Ok(0.0),
                        None => {
                            return Err(Error::InvalidStepFunction(
                                "on the whole line the function must vanish outside a bounded set".into(),
                            ))
                        }
                    };
                    intervals = intervals
                        .iter()
                        .map(|&(a, b)| (a.max(hull.0), b.min(hull.1)))
                        .filter(|(a, b)| a < b)
                        .collect();
                }
                let mut nodes = Vec::new();
                let mut values = Vec::new();
                for c in f.cells_on(&intervals) {
                    let start = nodes.len();
                    mesher.graded(c.a, c.b, &mut nodes);
                    values.extend(std::iter::repeat_n(c.value, nodes.len() - start));
                }
                if nodes.is_empty() {
                    return Ok(0.0);
                }
                let (space, sample) = line_space(&nodes, values, domain.is_whole_line())?;
                match spec {
                    NormSpec::Quotient { inner } => Ok(quotient_norm(&space, &sample, inner)?.value),
                    _ => evaluate_norm(&space, &sample, spec),
                }
            }
        }
    }
}

/// `F(s) = s^{1/q} ‖G_s^{1/q}‖_Y`.
pub fn ms_value(input: MsInput<'_>, q: f64, spec: &NormSpec, s: f64, region: &RegionSpec) -> Result<f64> {
    check_s(s)?;
    check_q(q)?;
    spec.validate()?;
    Prepared::new(input, region)?.functional(q, spec, s)
}

/// `‖G_s^{1/q}‖_Y` without the `s^{1/q}` factor: the homogeneous fractional
/// Sobolev quasi-norm of order `s`.
pub fn fractional_seminorm(input: MsInput<'_>, q: f64, spec: &NormSpec, s: f64, region: &RegionSpec) -> Result<f64> {
    Ok(ms_value(input, q, spec, s, region)? / s.powf(1.0 / q))
}

/// `‖f‖_Y` as used for ratios in a scan.
pub fn reference_norm(input: MsInput<'_>, spec: &NormSpec, region: &RegionSpec) -> Result<f64> {
    spec.validate()?;
    Prepared::new(input, region)?.reference(spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    DecreasingToZero,
    BoundedBracket,
    Increasing,
    Inconclusive,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::DecreasingToZero => "decreasing_to_zero",
            Trend::BoundedBracket => "bounded_bracket",
            Trend::Increasing => "increasing",
            Trend::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub spread: f64,
    /// Set when the relative spread is 5% or more.
    pub unreliable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MsScanResult {
    pub q: f64,
    pub spec: NormSpec,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub reference_norm: f64,
    pub ratio_bracket: (f64, f64),
    pub trend: Trend,
    pub extrapolation: Option<Extrapolation>,
}

impl MsScanResult {
    pub fn ratio(&self, i: usize) -> f64 {
        self.values[i] / self.reference_norm
    }
}

/// Parse-free default grid `10^{-1}, 10^{-1.5}, …, 10^{-5}`.
pub fn default_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-1.0 - 0.5 * f64::from(k))).collect()
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 4 {
        return Err(Error::InvalidGrid(format!("need at least 4 points, got {}", grid.len())));
    }
    if grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::InvalidGrid("every s must lie in (0, 1)".into()));
    }
    if grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidGrid("grid must be strictly decreasing".into()));
    }
    Ok(())
}

pub fn classify_trend(values: &[f64]) -> Trend {
    let n = values.len();
    if n < 4 || values.iter().any(|v| !v.is_finite()) {
        return Trend::Inconclusive;
    }
    let tail = &values[n - 4..];
    let dropping = tail.windows(2).all(|w| w[1] <= 0.8 * w[0]);
    if dropping && values[n - 1] < 0.05 * values[0] {
        return Trend::DecreasingToZero;
    }
    let rising = tail.windows(2).all(|w| w[1] >= 1.25 * w[0]);
    if rising && values[n - 1] > 20.0 * values[0] {
        return Trend::Increasing;
    }
    let settled = tail.windows(2).all(|w| (w[1] - w[0]).abs() < 0.2 * w[0].abs().max(w[1].abs()));
    if values.iter().all(|&v| v > 0.0) && settled {
        return Trend::BoundedBracket;
    }
    Trend::Inconclusive
}

/// Aitken Δ² on the last three values.
pub fn aitken(values: &[f64]) -> Option<Extrapolation> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let (x0, x1, x2) = (values[n - 3], values[n - 2], values[n - 1]);
    let denom = (x2 - x1) - (x1 - x0);
    let limit = if denom == 0.0 {
        x2
    } else {
        x2 - (x2 - x1) * (x2 - x1) / denom
    };
    if !limit.is_finite() {
        return None;
    }
    let spread = (limit - x2).abs() / x2.abs().max(f64::MIN_POSITIVE);
    Some(Extrapolation {
        limit,
        spread,
        unreliable: spread >= 0.05,
    })
}

/// Evaluate `F` on a decreasing grid and summarise its behaviour as `s → 0⁺`.
pub fn ms_scan(input: MsInput<'_>, q: f64, spec: &NormSpec, grid: &[f64], region: &RegionSpec) -> Result<MsScanResult> {
    check_grid(grid)?;
    check_q(q)?;
    spec.validate()?;
    let prepared = Prepared::new(input, region)?;
    let values = grid
        .iter()
        .map(|&s| prepared.functional(q, spec, s))
        .collect::<Result<Vec<f64>>>()?;
    let reference = prepared.reference(spec)?;
    let half = &values[grid.len() / 2..];
    let ratios: Vec<f64> = half.iter().map(|v| v / reference).collect();
    let bracket = (
        ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(MsScanResult {
        q,
        spec: spec.clone(),
        grid: grid.to_vec(),
        trend: classify_trend(&values),
        extrapolation: aitken(&values),
        values,
        reference_norm: reference,
        ratio_bracket: bracket,
    })
}

/// `s ∫_{ρ(x,y) ≥ s^{-1/q}} dμ(y) / (U(x,y) ρ(x,y)^{sq})`.
pub fn tail_mass(space: &Space, x: Center, q: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    check_q(q)?;
    space.check_center(x)?;
    let ln_r = -s.ln() / q;
    match (space, x) {
        (Space::Finite(fs), Center::Point(i)) => {
            let terms: Vec<LogScalar> = (0..fs.n_points())
                .into_par_iter()
                .filter(|&y| y != i)
                .filter_map(|y| {
                    let rho = fs.distance(i, y);
                    (rho.ln() >= ln_r).then(|| {
                        let u = fs.mutual_min_measure(i, y).expect("distinct valid points");
                        fs.mass(y) / u / rho.powf(s * q)
                    })
                })
                .collect();
            Ok(s * log_sum(&terms).to_f64())
        }
        (Space::Line(d), Center::Real(x)) => {
            let r = ln_r.exp();
            if d.is_whole_line() {
                return Ok(s.powf(s) / q);
            }
            let cells: Vec<Cell> = d
                .intervals()
                .iter()
                .map(|&(a, b)| Cell { a, b, value: 0.0 })
                .collect();
            let total: f64 = cells
                .iter()
                .map(|c| {
                    if c.a < x && x < c.b {
                        power_integral(r.max(0.0), (c.b - x).max(r), s * q) * 0.5
                            + power_integral(r, (x - c.a).max(r), s * q) * 0.5
                    } else {
                        let (d1, d2) = distance_range(&Node::at(x, 0.0), c);
                        0.5 * power_integral(d1.max(r), d2.max(r), s * q)
                    }
                })
                .sum();
            Ok(s * total)
        }
        _ => unreachable!(),
    }
}

/// `s ∬_{D×D} |f(x) - f(y)| / (2|x - y|^{1+s}) dy dx` in closed form, summed over
/// pairs of constant pieces.
pub fn exact_ms_step_1d(f: &StepFunction1D, s: f64, domain: &IntervalDomain1D) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::SEqualsOne);
    }
    check_s(s)?;
    let cells = f.cells_on(&domain.as_intervals());
    let (gx, gw) = gauss_legendre(PAIR_NODES);
    let mut terms = Vec::new();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let (l, r) = (cells[i], cells[j]);
            if l.value == r.value {
                continue;
            }
            if !l.is_bounded() && !r.is_bounded() {
                return Err(Error::InvalidStepFunction(
                    "the function takes different values on the two rays, so the seminorm is infinite".into(),
                ));
            }
            terms.push((l.value - r.value).abs() * pair_integral(&l, &r, s, &gx, &gw));
        }
    }
    Ok(s * crate::logscalar::pairwise_sum(&terms))
}

/// `∫_{[a,b]} ∫_{[c,d]} |x - y|^{-1-s} dy dx` for cells with `b ≤ c`.
fn pair_integral(l: &Cell, r: &Cell, s: f64, gx: &[f64], gw: &[f64]) -> f64 {
    let gap = r.a - l.b;
    let width = l.len().min(r.len());
    if gap >= width {
        // Separated cells: Gauss–Legendre over the narrower cell of the exact inner integral.
        let (narrow, other) = if l.len() <= r.len() { (l, r) } else { (r, l) };
        let (c, h) = (0.5 * (narrow.a + narrow.b), 0.5 * narrow.len());
        let sum: f64 = gx
            .iter()
            .zip(gw)
            .map(|(x, w)| {
                let (d1, d2) = distance_range(&Node::at(c + h * x, 0.0), other);
                w * power_integral(d1, d2, s)
            })
            .sum();
        return h * sum;
    }
    let (a, b, c, d) = (l.a, l.b, r.a, r.b);
    if !l.is_bounded() || !r.is_bounded() {
        // Terms with an infinite endpoint cancel in pairs.
        let pw = |t: f64| if t.is_finite() { t.powf(1.0 - s) } else { 0.0 };
        return (pw(c - a) - pw(c - b) - pw(d - a) + pw(d - b)) / (s * (1.0 - s));
    }
    // t^{1-s} = t + t·expm1(-s ln t); the linear parts cancel exactly.
    let part = |t: f64| {
        if t == 0.0 || t.is_infinite() {
            0.0
        } else {
            t * (-s * t.ln()).exp_m1()
        }
    };
    let val = part(c - a) - part(c - b) - part(d - a) + part(d - b);
    val / (s * (1.0 - s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::double_exponential_space;

    fn indicator() -> StepFunction1D {
        StepFunction1D::indicator(0.0, 1.0).unwrap()
    }

    #[test]
    fn classical_kernel_closed_forms() {
        let d = IntervalDomain1D::whole_line();
        let f = indicator();
        let input = MsInput::Step {
            domain: &d,
            f: &f,
            rule: QuadratureRule::default(),
        };
        for s in [0.5, 0.1, 0.01] {
            for x in [0.1, 0.5, 0.93] {
                let g = gagliardo_kernel(input, 1.0, s, Center::Real(x), &RegionSpec::All).unwrap();
                let exact = (x.powf(-s) + (1.0 - x).powf(-s)) / (2.0 * s);
                assert!((g - exact).abs() < 1e-12 * exact);
            }
            let x: f64 = 3.5;
            let g = gagliardo_kernel(input, 1.0, s, Center::Real(x), &RegionSpec::All).unwrap();
            let exact = ((x - 1.0).powf(-s) - x.powf(-s)) / (2.0 * s);
            assert!((g - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn exact_indicator_value() {
        let v = exact_ms_step_1d(&indicator(), 0.5, &IntervalDomain1D::whole_line()).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let c = StepFunction1D::new(vec![0.0], vec![2.0, 2.0]).unwrap();
        assert_eq!(exact_ms_step_1d(&c, 0.3, &IntervalDomain1D::whole_line()).unwrap(), 0.0);
        assert_eq!(exact_ms_step_1d(&indicator(), 1.0, &IntervalDomain1D::whole_line()).unwrap_err(), Error::SEqualsOne);
    }

    #[test]
    fn quadrature_path_matches_closed_form() {
        let d = IntervalDomain1D::whole_line();
        let f = indicator();
        let input = MsInput::Step {
            domain: &d,
            f: &f,
            rule: QuadratureRule::default(),
        };
        for s in [0.5, 0.1, 0.01] {
            let v = ms_value(input, 1.0, &NormSpec::lp(1.0), s, &RegionSpec::All).unwrap();
            assert!((v * (1.0 - s) / 2.0 - 1.0).abs() < 1e-3, "s = {s}: {v}");
        }
    }

    #[test]
    fn prop835_kernel_at_four() {
        let space = double_exponential_space(60).unwrap();
        let mut f = vec![0.0; 60];
        f[0] = 1.0;
        let input = MsInput::Finite { space: &space, values: &f };
        for s in [0.1, 1e-3, 1e-5] {
            let g = gagliardo_kernel(input, 1.0, s, Center::Point(0), &RegionSpec::All).unwrap();
            let oracle: f64 = (2..=60)
                .map(|j: i32| {
                    let ln_rho = 2f64.powi(j) * 2f64.ln() + (-4.0 * (-(2f64.powi(j)) * 2f64.ln()).exp()).ln_1p();
                    2f64.powi(j) / (2f64.powi(j) - 2.0) * (-s * ln_rho).exp()
                })
                .sum();
            assert!((g - oracle).abs() < 1e-10 * oracle, "s = {s}: {g} vs {oracle}");
        }
    }

    #[test]
    fn region_split_is_additive() {
        let d = IntervalDomain1D::whole_line();
        let f = StepFunction1D::new(vec![0.0, 0.5, 2.0], vec![0.0, 1.0, -2.0, 0.0]).unwrap();
        let input = MsInput::Step {
            domain: &d,
            f: &f,
            rule: QuadratureRule::default(),
        };
        for x in [-1.0, 0.2, 1.0, 5.0] {
            for r in [0.1, 1.0, 3.0] {
                let radius = LogScalar::from_f64(r);
                let all = gagliardo_kernel(input, 1.5, 0.3, Center::Real(x), &RegionSpec::All).unwrap();
                let i = gagliardo_kernel(input, 1.5, 0.3, Center::Real(x), &RegionSpec::InsideBall { radius }).unwrap();
                let o = gagliardo_kernel(input, 1.5, 0.3, Center::Real(x), &RegionSpec::OutsideBall { radius }).unwrap();
                assert!((all - i - o).abs() <= 1e-12 * all);
            }
        }
    }

    #[test]
    fn whole_line_tail_mass() {
        let line = Space::Line(IntervalDomain1D::whole_line());
        for s in [0.5, 0.01, 1e-4] {
            let t = tail_mass(&line, Center::Real(0.0), 1.0, s).unwrap();
            assert!((t - s.powf(s)).abs() < 1e-12);
        }
        assert_eq!(tail_mass(&line, Center::Real(0.0), 1.0, 1.5).unwrap_err(), Error::SOutOfRange(1.5));
    }

    #[test]
    fn trend_rules() {
        assert_eq!(classify_trend(&[1.0, 0.5, 0.2, 0.05, 0.01]), Trend::DecreasingToZero);
        assert_eq!(classify_trend(&[2.2, 2.02, 2.002, 2.0002]), Trend::BoundedBracket);
        assert_eq!(classify_trend(&[0.01, 0.1, 1.0, 10.0, 100.0]), Trend::Increasing);
        assert!(check_grid(&[0.1, 0.01, 0.001]).is_err());
        assert!(check_grid(&[0.001, 0.01, 0.1, 0.5]).is_err());
    }
}
