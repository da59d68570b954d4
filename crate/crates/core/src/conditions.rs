//! Window checks for the doubling, weak reverse doubling and weak measure
//! density conditions.
//!
//! The conditions are statements about `r → ∞`. Every check here evaluates the
//! relevant ratio on a finite radius window, so verdicts are window verdicts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscalar::LogScalar;
use crate::space::{Center, Space, Subset};

pub const DEFAULT_WRD_THRESHOLD: f64 = 1.0 + 1e-6;
pub const DEFAULT_WMD_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_PER_DECADE: usize = 32;
const MAX_GRID_POINTS: usize = 1_000_000;
const MIN_RADII: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Doubling,
    Wrd,
    Wmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: LogScalar,
    pub hi: LogScalar,
}

impl Window {
    pub fn new(lo: LogScalar, hi: LogScalar) -> Result<Self> {
        if !lo.is_positive() || !(lo < hi) {
            return Err(Error::WindowTooNarrow(lo.to_f64(), hi.to_f64()));
        }
        Ok(Window { lo, hi })
    }

    pub fn from_f64(lo: f64, hi: f64) -> Result<Self> {
        Self::new(LogScalar::from_f64(lo), LogScalar::from_f64(hi))
    }

    pub fn contains(&self, r: LogScalar) -> bool {
        self.lo <= r && r <= self.hi
    }
}

/// How radii are placed inside a window.
#[derive(Clone, Debug, PartialEq)]
pub enum RadiusGrid {
    /// Breakpoint midpoints on finite spaces, 32 per decade on the line.
    Auto,
    LogUniform { per_decade: usize },
    /// Log-midpoints between consecutive values of `ρ(x₀, y)` and `ρ(x₀, y)/λ`:
    /// one radius per constant piece of the ratio.
    Breakpoints,
    Explicit(Vec<LogScalar>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionParameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Largest observed doubling ratio, the estimate of `L_(μ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling_constant: Option<f64>,
    /// `log₂ L_(μ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_dimension: Option<f64>,
    pub base_point: String,
    pub window: Option<(LogScalar, LogScalar)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub ratios: Vec<(LogScalar, f64)>,
    pub window_inf: f64,
    pub window_sup: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub parameters: ConditionParameters,
    pub note: String,
}

const WINDOW_NOTE: &str = "finite-window verdict; the condition itself concerns r -> infinity";

fn center_label(space: &Space, c: Center) -> String {
    match (space, c) {
        (Space::Finite(s), Center::Point(i)) => s.label(i).map_or_else(|| i.to_string(), str::to_string),
        (_, Center::Point(i)) => i.to_string(),
        (_, Center::Real(x)) => x.to_string(),
    }
}

pub fn default_base_point(space: &Space) -> Center {
    match space {
        Space::Finite(_) => Center::Point(0),
        Space::Line(_) => Center::Real(0.0),
    }
}

fn log_uniform(window: &Window, per_decade: usize) -> Result<Vec<LogScalar>> {
    if per_decade == 0 {
        return Err(Error::InvalidParameter("per_decade must be positive".into()));
    }
    let (a, b) = (window.lo.ln(), window.hi.ln());
    let steps = ((b - a) / std::f64::consts::LN_10 * per_decade as f64).ceil();
    if !(steps < MAX_GRID_POINTS as f64) {
        return Err(Error::InvalidParameter(format!(
            "a log-uniform grid would need {steps} radii; use the breakpoint grid"
        )));
    }
    let steps = steps.max(1.0) as usize;
    Ok((0..=steps)
        .map(|i| LogScalar::from_ln(a + (b - a) * i as f64 / steps as f64))
        .collect())
}

fn breakpoint_grid(space: &Space, center: Center, lambda: f64, window: &Window) -> Result<Vec<LogScalar>> {
    let Space::Finite(s) = space else {
        return Err(Error::InvalidParameter("breakpoint grids need a finite space".into()));
    };
    let Center::Point(x) = center else {
        return Err(Error::InvalidParameter("breakpoint grids need a point center".into()));
    };
    s.check_point(x)?;
    let inv = LogScalar::from_f64(lambda).powf(-1.0);
    let mut cuts: Vec<LogScalar> = Vec::new();
    for d in s.distinct_distances(x) {
        cuts.push(d);
        cuts.push(d * inv);
    }
    cuts.retain(|c| window.lo < *c && *c < window.hi);
    cuts.push(window.lo);
    cuts.push(window.hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("radii are ordered"));
    cuts.dedup();
    Ok(cuts
        .windows(2)
        .map(|w| LogScalar::log_midpoint(w[0], w[1]))
        .collect())
}

/// Radii for a ratio `μ(B(x, λr)) / μ(B(x, r))` over the window.
pub fn radius_grid(
    space: &Space,
    center: Center,
    lambda: f64,
    window: &Window,
    grid: &RadiusGrid,
) -> Result<Vec<LogScalar>> {
    match grid {
        RadiusGrid::Auto => match space {
            Space::Finite(_) => breakpoint_grid(space, center, lambda, window),
            Space::Line(_) => log_uniform(window, DEFAULT_PER_DECADE),
        },
        RadiusGrid::LogUniform { per_decade } => log_uniform(window, *per_decade),
        RadiusGrid::Breakpoints => breakpoint_grid(space, center, lambda, window),
        RadiusGrid::Explicit(r) => {
            if r.iter().any(|x| !x.is_positive()) {
                return Err(Error::InvalidParameter("radii must be positive".into()));
            }
            Ok(r.iter().copied().filter(|x| window.contains(*x)).collect())
        }
    }
}

fn ratio_profile(
    space: &Space,
    center: Center,
    radii: &[LogScalar],
    ratio: impl Fn(LogScalar) -> Result<LogScalar> + Sync,
) -> Result<Vec<(LogScalar, f64)>> {
    space.check_center(center)?;
    radii
        .par_iter()
        .map(|&r| ratio(r).map(|q| (r, q.to_f64())))
        .collect()
}

fn finish(
    condition: Condition,
    ratios: Vec<(LogScalar, f64)>,
    threshold: f64,
    cap: f64,
    parameters: ConditionParameters,
) -> ConditionReport {
    let window_inf = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let window_sup = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let verdict = if ratios.len() < MIN_RADII {
        Verdict::Inconclusive
    } else if window_inf >= threshold && window_sup <= cap {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    ConditionReport {
        condition,
        ratios,
        window_inf,
        window_sup,
        threshold,
        verdict,
        parameters,
        note: WINDOW_NOTE.to_string(),
    }
}

fn check_window_fits(space: &Space, window: &Window) -> Result<()> {
    if let Space::Finite(s) = space {
        if window.hi > s.diameter() {
            return Err(Error::InvalidParameter(format!(
                "window end {} exceeds the diameter {}",
                window.hi,
                s.diameter()
            )));
        }
    }
    Ok(())
}

/// `μ(B(x, 2r)) / μ(B(x, r))` at the given radii. The report carries the
/// estimate `L_(μ)` (largest ratio) and `d = log₂ L_(μ)`. The verdict uses
/// `threshold` on the smallest ratio and `cap` on the largest.
pub fn doubling_profile(
    space: &Space,
    x: Center,
    radii: &[LogScalar],
    threshold: f64,
    cap: f64,
) -> Result<ConditionReport> {
    let two = LogScalar::from_f64(2.0);
    let ratios = ratio_profile(space, x, radii, |r| {
        Ok(space.ball_measure(x, r * two)? / space.ball_measure(x, r)?)
    })?;
    let l = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let window = match (radii.first(), radii.last()) {
        (Some(a), Some(b)) => Some((*a, *b)),
        _ => None,
    };
    let params = ConditionParameters {
        lambda: Some(2.0),
        doubling_constant: (!ratios.is_empty()).then_some(l),
        upper_dimension: (!ratios.is_empty()).then_some(l.log2()),
        base_point: center_label(space, x),
        window,
    };
    Ok(finish(Condition::Doubling, ratios, threshold, cap, params))
}

/// Exact supremum of the doubling ratio at `x` over all radii of a finite space.
pub fn doubling_constant_at(space: &Space, x: usize) -> Result<f64> {
    let Space::Finite(s) = space else {
        return Err(Error::InvalidParameter("exact doubling constants need a finite space".into()));
    };
    s.check_point(x)?;
    let d = s.distinct_distances(x);
    if d.is_empty() {
        return Ok(1.0);
    }
    let lo = d[0] * LogScalar::from_f64(0.25);
    let hi = d[d.len() - 1] * LogScalar::from_f64(2.0);
    let window = Window::new(lo, hi)?;
    let radii = breakpoint_grid(space, Center::Point(x), 2.0, &window)?;
    let report = doubling_profile(space, Center::Point(x), &radii, 1.0, f64::INFINITY)?;
    Ok(report.window_sup)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WrdOptions {
    pub lambda: f64,
    pub window: Window,
    pub base_point: Option<Center>,
    pub threshold: f64,
    pub grid: RadiusGrid,
}

impl WrdOptions {
    pub fn new(lambda: f64, window: Window) -> Self {
        WrdOptions {
            lambda,
            window,
            base_point: None,
            threshold: DEFAULT_WRD_THRESHOLD,
            grid: RadiusGrid::Auto,
        }
    }
}

/// `μ(B(x₀, λr)) / μ(B(x₀, r))` over the window.
pub fn check_wrd(space: &Space, opts: &WrdOptions) -> Result<ConditionReport> {
    if !(opts.lambda > 1.0) || !opts.lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must exceed 1, got {}", opts.lambda)));
    }
    check_window_fits(space, &opts.window)?;
    let x0 = opts.base_point.unwrap_or_else(|| default_base_point(space));
    space.check_center(x0)?;
    let radii = radius_grid(space, x0, opts.lambda, &opts.window, &opts.grid)?;
    let lam = LogScalar::from_f64(opts.lambda);
    let ratios = ratio_profile(space, x0, &radii, |r| {
        Ok(space.ball_measure(x0, r * lam)? / space.ball_measure(x0, r)?)
    })?;
    let params = ConditionParameters {
        lambda: Some(opts.lambda),
        doubling_constant: None,
        upper_dimension: None,
        base_point: center_label(space, x0),
        window: Some((opts.window.lo, opts.window.hi)),
    };
    Ok(finish(Condition::Wrd, ratios, opts.threshold, f64::INFINITY, params))
}

/// `μ(B(x₀, r) ∩ Ω) / μ(B(x₀, r))` over the window.
pub fn check_wmd(
    space: &Space,
    subset: &Subset,
    base_point: Option<Center>,
    window: &Window,
    threshold: f64,
    grid: &RadiusGrid,
) -> Result<ConditionReport> {
    let subset = subset.clone().validated(space)?;
    let x0 = base_point.unwrap_or_else(|| default_base_point(space));
    space.check_center(x0)?;
    let radii = radius_grid(space, x0, 1.0, window, grid)?;
    let ratios = ratio_profile(space, x0, &radii, |r| {
        Ok(space.ball_measure_in(x0, r, &subset)? / space.ball_measure(x0, r)?)
    })?;
    let params = ConditionParameters {
        lambda: None,
        doubling_constant: None,
        upper_dimension: None,
        base_point: center_label(space, x0),
        window: Some((window.lo, window.hi)),
    };
    Ok(finish(Condition::Wmd, ratios, threshold, f64::INFINITY, params))
}

/// Outcome of moving the base point of a WRD check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePointSweep {
    pub lambda: f64,
    /// Smallest multiple `λ' = 2^i λ` (up to `4K₀²λ`) for which every point passes.
    pub lambda_prime: Option<f64>,
    /// Points failing at the largest candidate, with their window infima.
    pub failures: Vec<(usize, f64)>,
}

/// Re-run a passing WRD check from every point `x` of a finite space. For `x`
/// the window starts at `2K₀·max(r_lo, ρ(x, x₀))`; the multiplier `λ'` is
/// searched over `λ, 2λ, 4λ, …, 4K₀²λ`.
pub fn wrd_base_point_sweep(space: &Space, opts: &WrdOptions) -> Result<BasePointSweep> {
    let Space::Finite(s) = space else {
        return Err(Error::InvalidParameter("base-point sweeps need a finite space".into()));
    };
    let x0 = match opts.base_point.unwrap_or(Center::Point(0)) {
        Center::Point(i) => i,
        Center::Real(_) => return Err(Error::InvalidParameter("base point must be a point".into())),
    };
    let k0 = s.k0();
    let top = 4.0 * k0 * k0 * opts.lambda;
    let mut candidates = vec![opts.lambda];
    while *candidates.last().expect("non-empty") * 2.0 <= top * (1.0 + 1e-12) {
        let next = candidates.last().expect("non-empty") * 2.0;
        candidates.push(next);
    }
    if *candidates.last().expect("non-empty") < top {
        candidates.push(top);
    }
    let mut failures = Vec::new();
    for &lp in &candidates {
        failures.clear();
        for x in 0..s.n_points() {
            let start = LogScalar::from_f64(2.0 * k0) * opts.window.lo.max(s.distance(x, x0));
            if !(start < opts.window.hi) {
                continue;
            }
            let o = WrdOptions {
                lambda: lp,
                window: Window::new(start, opts.window.hi)?,
                base_point: Some(Center::Point(x)),
                threshold: opts.threshold,
                grid: opts.grid.clone(),
            };
            let r = check_wrd(space, &o)?;
            if r.verdict == Verdict::Fail {
                failures.push((x, r.window_inf));
            }
        }
        if failures.is_empty() {
            return Ok(BasePointSweep {
                lambda: opts.lambda,
                lambda_prime: Some(lp),
                failures,
            });
        }
    }
    Ok(BasePointSweep {
        lambda: opts.lambda,
        lambda_prime: None,
        failures,
    })
}
