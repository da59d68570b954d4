//! JSON input formats and numeric text parsing shared by the CLI and the
//! scenario runner.
//!
//! Numbers may be JSON numbers or strings: `"inf"`, `"-inf"`, `"log2:1024"`,
//! `"ln:3.5"`, `"logB:x"`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::logscalar::LogScalar;
use crate::norms::NormSpec;
use crate::space::{
    build_finite_space, double_exponential_space, geometric_space, FinitePointSpace, IntervalDomain1D,
    LinePositions, Space, StepFunction1D, Subset,
};

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Number(f64),
    Text(String),
}

impl Num {
    pub fn log(&self) -> Result<LogScalar> {
        match self {
            Num::Number(v) => Ok(LogScalar::from_f64(*v)),
            Num::Text(t) => t.parse(),
        }
    }

    pub fn real(&self) -> Result<f64> {
        match self {
            Num::Number(v) => Ok(*v),
            Num::Text(t) => parse_number(t),
        }
    }

    /// Value read as a base-2 logarithm.
    fn log2(&self) -> Result<LogScalar> {
        match self {
            Num::Text(t) if t.trim() == "-inf" => Ok(LogScalar::ZERO),
            other => Ok(LogScalar::from_log2(other.real()?)),
        }
    }
}

pub fn parse_number(text: &str) -> Result<f64> {
    if let Ok(v) = text.trim().parse::<f64>() {
        return Ok(v);
    }
    Ok(text.parse::<LogScalar>()?.to_f64())
}

pub fn parse_log(text: &str) -> Result<LogScalar> {
    text.parse()
}

/// `lo:hi:n` for `n` log-uniform points from `lo` down to `hi`, or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("cannot parse grid '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = if parts.len() == 3 && !text.contains(',') && parts[0].parse::<f64>().is_ok() {
        let a = parse_number(parts[0])?;
        let b = parse_number(parts[1])?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if n < 2 || !(a > 0.0 && b > 0.0) {
            return Err(bad());
        }
        let (la, lb) = (a.log10(), b.log10());
        (0..n)
            .map(|k| 10f64.powf(la + (lb - la) * k as f64 / (n - 1) as f64))
            .collect()
    } else {
        text.split(',').map(|t| parse_number(t.trim())).collect::<Result<Vec<f64>>>()?
    };
    Ok(grid)
}

/// `lo:hi` with both ends parsed in the log domain.
pub fn parse_window(text: &str) -> Result<(LogScalar, LogScalar)> {
    let (a, b) = split_pair(text)?;
    Ok((parse_log(a)?, parse_log(b)?))
}

/// Split `a:b`, allowing `logB:x` on either side.
fn split_pair(text: &str) -> Result<(&str, &str)> {
    let bad = || Error::Parse(format!("expected 'lo:hi', got '{text}'"));
    let idx: Vec<usize> = text.match_indices(':').map(|(i, _)| i).collect();
    for &i in &idx {
        let (a, b) = (&text[..i], &text[i + 1..]);
        if parse_log(a).is_ok() && parse_log(b).is_ok() {
            return Ok((a, b));
        }
    }
    Err(bad())
}

fn json_err(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SpaceFile {
    Finite {
        masses: Vec<Num>,
        distances: Vec<Vec<Num>>,
        #[serde(default)]
        k0: Option<f64>,
        #[serde(default)]
        log_scale: bool,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    Line {
        positions: Vec<Num>,
        masses: Vec<Num>,
        #[serde(default)]
        log_scale: bool,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
    Intervals {
        #[serde(default)]
        intervals: Vec<(Num, Num)>,
        #[serde(default)]
        whole_line: bool,
    },
    DoubleExponential {
        k_max: u32,
    },
    Geometric {
        k_max: u32,
    },
}

fn read_nums(v: &[Num], log_scale: bool) -> Result<Vec<LogScalar>> {
    v.iter().map(|n| if log_scale { n.log2() } else { n.log() }).collect()
}

pub fn parse_space(text: &str) -> Result<Space> {
    let file: SpaceFile = serde_json::from_str(text).map_err(|e| json_err("space file", e))?;
    let finite = match file {
        SpaceFile::Finite {
            masses,
            distances,
            k0,
            log_scale,
            labels,
        } => {
            let space = if log_scale {
                let table = distances
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, d)| if i == j { Ok(LogScalar::ZERO) } else { d.log2() })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                FinitePointSpace::from_table(table, read_nums(&masses, true)?, k0)?
            } else {
                let table = distances
                    .iter()
                    .map(|row| row.iter().map(Num::real).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let m = masses.iter().map(Num::real).collect::<Result<Vec<_>>>()?;
                build_finite_space(&table, &m, k0)?
            };
            with_labels(space, labels)?
        }
        SpaceFile::Line {
            positions,
            masses,
            log_scale,
            labels,
        } => {
            let pos = if log_scale {
                LinePositions::Log(read_nums(&positions, true)?)
            } else {
                LinePositions::Real(positions.iter().map(Num::real).collect::<Result<Vec<_>>>()?)
            };
            with_labels(FinitePointSpace::on_line(pos, read_nums(&masses, log_scale)?)?, labels)?
        }
        SpaceFile::Intervals { intervals, whole_line } => {
            if whole_line {
                return Ok(Space::Line(IntervalDomain1D::whole_line()));
            }
            let iv = intervals
                .iter()
                .map(|(a, b)| Ok((a.real()?, b.real()?)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Space::Line(IntervalDomain1D::new(iv)?));
        }
        SpaceFile::DoubleExponential { k_max } => double_exponential_space(k_max)?,
        SpaceFile::Geometric { k_max } => geometric_space(k_max)?,
    };
    Ok(Space::Finite(finite))
}

fn with_labels(space: FinitePointSpace, labels: Option<Vec<String>>) -> Result<FinitePointSpace> {
    match labels {
        Some(l) => space.with_labels(l),
        None => Ok(space),
    }
}

/// A function file: values on a finite space, point labels with values, or a
/// step function on the line.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionData {
    Values(Vec<f64>),
    /// Point label (or index) to value; unlisted points are zero.
    Sparse(Vec<(String, f64)>),
    Step(StepFunction1D),
}

impl FunctionData {
    pub fn values_on(&self, space: &FinitePointSpace) -> Result<Vec<f64>> {
        match self {
            FunctionData::Values(v) => {
                if v.len() != space.n_points() {
                    return Err(Error::LengthMismatch {
                        expected: space.n_points(),
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
            FunctionData::Sparse(entries) => {
                let mut out = vec![0.0; space.n_points()];
                for (key, v) in entries {
                    out[resolve_point(space, key)?] = *v;
                }
                Ok(out)
            }
            FunctionData::Step(_) => Err(Error::InvalidParameter(
                "a step function needs an interval space".into(),
            )),
        }
    }

    pub fn step(&self) -> Result<&StepFunction1D> {
        match self {
            FunctionData::Step(f) => Ok(f),
            _ => Err(Error::InvalidParameter(
                "an interval space needs a step function with breakpoints".into(),
            )),
        }
    }
}

/// A label, or a point index when no label matches.
pub fn resolve_point(space: &FinitePointSpace, key: &str) -> Result<usize> {
    if let Ok(i) = space.find_label(key) {
        return Ok(i);
    }
    let i: usize = key.trim().parse().map_err(|_| Error::UnknownPoint(key.to_string()))?;
    space.check_point(i)?;
    Ok(i)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FunctionFile {
    Step { breakpoints: Vec<Num>, values: Vec<Num> },
    Values { values: Vec<Num> },
    Sparse { points: BTreeMap<String, Num> },
    Bare(Vec<Num>),
}

fn reals(v: &[Num]) -> Result<Vec<f64>> {
    v.iter().map(Num::real).collect()
}

pub fn parse_function(text: &str) -> Result<FunctionData> {
    let file: FunctionFile = serde_json::from_str(text).map_err(|e| json_err("function file", e))?;
    Ok(match file {
        FunctionFile::Step { breakpoints, values } => {
            FunctionData::Step(StepFunction1D::new(reals(&breakpoints)?, reals(&values)?)?)
        }
        FunctionFile::Values { values } | FunctionFile::Bare(values) => FunctionData::Values(reals(&values)?),
        FunctionFile::Sparse { points } => FunctionData::Sparse(
            points
                .into_iter()
                .map(|(k, v)| Ok((k, v.real()?)))
                .collect::<Result<Vec<_>>>()?,
        ),
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRef {
    Index(usize),
    Label(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubsetFile {
    #[serde(default)]
    points: Option<Vec<PointRef>>,
    #[serde(default)]
    intervals: Option<Vec<(Num, Num)>>,
}

/// `{"points": [...]}` (indices or labels) or `{"intervals": [[a, b], ...]}`.
pub fn parse_subset(text: &str, space: &Space) -> Result<Subset> {
    let file: SubsetFile = serde_json::from_str(text).map_err(|e| json_err("subset file", e))?;
    let subset = match (file.points, file.intervals, space) {
        (Some(points), None, Space::Finite(s)) => Subset::Points(
            points
                .iter()
                .map(|p| match p {
                    PointRef::Index(i) => s.check_point(*i).map(|_| *i),
                    PointRef::Label(l) => resolve_point(s, l),
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        (None, Some(iv), Space::Line(_)) => Subset::Intervals(
            iv.iter()
                .map(|(a, b)| Ok((a.real()?, b.real()?)))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => {
            return Err(Error::Parse(
                "subset file needs 'points' on a finite space or 'intervals' on an interval space".into(),
            ))
        }
    };
    subset.validated(space)
}

pub fn parse_spec(text: &str) -> Result<NormSpec> {
    let spec: NormSpec = serde_json::from_str(text).map_err(|e| json_err("norm spec", e))?;
    spec.validate().map_err(|e| Error::Parse(format!("norm spec: {e}")))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_grids() {
        assert_eq!(parse_number("log2:10").unwrap(), 1024.0);
        assert_eq!(parse_number("-inf").unwrap(), f64::NEG_INFINITY);
        let g = parse_grid("1e-1:1e-5:9").unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[8] - 1e-5).abs() < 1e-18);
        assert_eq!(parse_grid("0.5,0.25").unwrap(), vec![0.5, 0.25]);
        let (lo, hi) = parse_window("1:log2:1024").unwrap();
        assert_eq!(lo.to_f64(), 1.0);
        assert_eq!(hi.log2(), 1024.0);
    }

    #[test]
    fn space_files() {
        let s = parse_space(r#"{"type":"finite","masses":[1,1],"distances":[[0,1],[1,0]]}"#).unwrap();
        assert!(matches!(s, Space::Finite(ref f) if f.n_points() == 2));
        let s = parse_space(r#"{"type":"finite","masses":[0,1],"distances":[[0,10],[10,0]],"log_scale":true}"#)
            .unwrap();
        let Space::Finite(f) = s else { panic!() };
        assert_eq!(f.distance(0, 1).to_f64(), 1024.0);
        assert_eq!(f.mass(1).to_f64(), 2.0);
        let s = parse_space(r#"{"type":"intervals","intervals":[["log2:-1",0.75],[1,"log10:1"]]}"#).unwrap();
        assert!(matches!(s, Space::Line(ref d) if d.intervals().len() == 2));
        assert!(parse_space(r#"{"type":"finite","masses":[1]}"#).is_err());
    }

    #[test]
    fn function_files() {
        let dexp = double_exponential_space(5).unwrap();
        let f = parse_function(r#"{"points":{"4":1}}"#).unwrap();
        assert_eq!(f.values_on(&dexp).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let f = parse_function(r#"{"breakpoints":[0,1],"values":[0,1,0]}"#).unwrap();
        assert_eq!(f.step().unwrap().eval(0.5), 1.0);
        assert!(parse_spec(r#"{"type":"lp","p":-1}"#).is_err());
        assert!(parse_spec(r#"{"type":"lp","p":2}"#).is_ok());
    }
}
