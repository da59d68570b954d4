//! Finite families of open balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscalar::{log_sum, LogScalar};
use crate::space::FinitePointSpace;

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: LogScalar,
    /// Member points in ascending index order.
    pub members: Vec<usize>,
    pub measure: LogScalar,
}

impl Ball {
    pub fn new(space: &FinitePointSpace, center: usize, radius: LogScalar) -> Result<Self> {
        let mut members = space.ball_members(center, radius)?;
        members.sort_unstable();
        let masses: Vec<LogScalar> = members.iter().map(|&i| space.mass(i)).collect();
        Ok(Ball {
            center,
            radius,
            members,
            measure: log_sum(&masses),
        })
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallFamily {
    balls: Vec<Ball>,
}

/// Which balls a norm or operator ranges over.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FamilySpec {
    #[default]
    Canonical,
    Explicit { balls: Vec<(usize, LogScalar)> },
}

impl FamilySpec {
    pub fn build(&self, space: &FinitePointSpace) -> Result<BallFamily> {
        match self {
            FamilySpec::Canonical => Ok(enumerate_ball_family(space)),
            FamilySpec::Explicit { balls } => BallFamily::explicit(space, balls),
        }
    }
}

/// Every distinct open ball of a finite space: per center, one radius below the
/// nearest neighbour, one at each log-midpoint between consecutive distinct
/// distances, and one beyond the farthest point.
pub fn enumerate_ball_family(space: &FinitePointSpace) -> BallFamily {
    let mut balls = Vec::new();
    for c in 0..space.n_points() {
        let d = space.distinct_distances(c);
        let mut radii = Vec::with_capacity(d.len() + 1);
        match d.first() {
            Some(first) => radii.push(*first * LogScalar::from_f64(0.5)),
            None => radii.push(LogScalar::ONE),
        }
        for w in d.windows(2) {
            radii.push(LogScalar::log_midpoint(w[0], w[1]));
        }
        if let Some(last) = d.last() {
            radii.push(*last * LogScalar::from_f64(2.0));
        }
        for r in radii {
            balls.push(Ball::new(space, c, r).expect("center is a valid point"));
        }
    }
    BallFamily { balls }
}

impl BallFamily {
    pub fn explicit(space: &FinitePointSpace, balls: &[(usize, LogScalar)]) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let mut out: Vec<Ball> = Vec::with_capacity(balls.len());
        for &(c, r) in balls {
            let b = Ball::new(space, c, r)?;
            if b.members.is_empty() {
                return Err(Error::InvalidParameter(format!("ball ({c}, {r}) is empty")));
            }
            if !out.iter().any(|o| o.center == b.center && o.members == b.members) {
                out.push(b);
            }
        }
        Ok(BallFamily { balls: out })
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Number of distinct member sets, ignoring centers.
    pub fn distinct_memberships(&self) -> usize {
        let mut sets: Vec<&Vec<usize>> = self.balls.iter().map(|b| &b.members).collect();
        sets.sort();
        sets.dedup();
        sets.len()
    }

    pub fn check_covers(&self, n_points: usize) -> Result<()> {
        let mut covered = vec![false; n_points];
        for b in &self.balls {
            for &i in &b.members {
                covered[i] = true;
            }
        }
        match covered.iter().position(|c| !c) {
            Some(i) => Err(Error::UncoveredPoint(i)),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_finite_space, double_exponential_space};

    #[test]
    fn two_point_family() {
        let s = build_finite_space(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0, 1.0], None).unwrap();
        let f = enumerate_ball_family(&s);
        assert_eq!(f.len(), 4);
        assert_eq!(f.distinct_memberships(), 3);
        f.check_covers(2).unwrap();
    }

    #[test]
    fn one_point_family() {
        let s = build_finite_space(&[vec![0.0]], &[2.0], None).unwrap();
        assert_eq!(enumerate_ball_family(&s).len(), 1);
    }

    #[test]
    fn double_exponential_family_contains_the_proof_balls() {
        let s = double_exponential_space(5).unwrap();
        let f = enumerate_ball_family(&s);
        assert!(f.len() <= 25);
        for j in 2..=5u32 {
            let r = LogScalar::pow2_pow2(j) - LogScalar::from_f64(4.0);
            let expected: Vec<usize> = (0..5).filter(|&i| s.distance(0, i) < r).collect();
            assert!(f.balls().iter().any(|b| b.center == 0 && b.members == expected), "j = {j}");
        }
    }

    #[test]
    fn explicit_family_errors() {
        let s = double_exponential_space(3).unwrap();
        assert_eq!(BallFamily::explicit(&s, &[]).unwrap_err(), Error::EmptyFamily);
        let f = BallFamily::explicit(&s, &[(0, LogScalar::ONE)]).unwrap();
        assert_eq!(f.check_covers(3).unwrap_err(), Error::UncoveredPoint(1));
    }
}
