//! Finite quasi-metric measure spaces.
//!
//! Two storage layouts share one API: a dense symmetric distance table for
//! arbitrary quasi-metrics, and sorted positions on the real line (`ρ = |x-y|`)
//! for large or double-exponential point sets. Ball queries are `O(log n)` in
//! both layouts after construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logscalar::{log_sum, LogScalar};

/// Above this size the quasi-triangle constant is checked on random triples.
pub const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 512;
const SAMPLED_TRIPLES: usize = 200_000;
const TRIANGLE_SEED: u64 = 0x6b30_7472_6970;

#[derive(Clone, Debug)]
pub enum LinePositions {
    Real(Vec<f64>),
    /// Positive positions given in the log domain.
    Log(Vec<LogScalar>),
}

impl LinePositions {
    fn len(&self) -> usize {
        match self {
            LinePositions::Real(v) => v.len(),
            LinePositions::Log(v) => v.len(),
        }
    }

    fn get(&self, i: usize) -> LogScalar {
        match self {
            LinePositions::Real(v) => LogScalar::from_f64(v[i]),
            LinePositions::Log(v) => v[i],
        }
    }

    fn strictly_after(&self, i: usize) -> bool {
        match self {
            LinePositions::Real(v) => v[i] > v[i - 1],
            LinePositions::Log(v) => v[i] > v[i - 1],
        }
    }

    fn gap(&self, i: usize, j: usize) -> LogScalar {
        match self {
            LinePositions::Real(v) => LogScalar::from_f64((v[j] - v[i]).abs()),
            LinePositions::Log(v) => (v[j] - v[i]).abs(),
        }
    }
}

#[derive(Clone, Debug)]
enum Metric {
    Table { n: usize, dist: Vec<LogScalar> },
    Line(LinePositions),
}

#[derive(Clone, Debug)]
struct CenterProfile {
    order: Vec<usize>,
    dists: Vec<LogScalar>,
    /// `cum[k]` is the mass of the first `k` points of `order`.
    cum: Vec<LogScalar>,
}

/// Segment tree of masses; range sums combine `O(log n)` nodes in a fixed order.
#[derive(Clone, Debug)]
struct MassTree {
    size: usize,
    nodes: Vec<LogScalar>,
}

impl MassTree {
    fn new(masses: &[LogScalar]) -> Self {
        let size = masses.len().next_power_of_two().max(1);
        let mut nodes = vec![LogScalar::ZERO; 2 * size];
        nodes[size..size + masses.len()].copy_from_slice(masses);
        for i in (1..size).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        MassTree { size, nodes }
    }

    fn range(&self, lo: usize, hi: usize) -> LogScalar {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let (mut l, mut r) = (lo + self.size, hi + self.size);
        while l < r {
            if l & 1 == 1 {
                left.push(self.nodes[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                right.push(self.nodes[r]);
            }
            l >>= 1;
            r >>= 1;
        }
        left.extend(right.into_iter().rev());
        left.into_iter().fold(LogScalar::ZERO, |acc, m| acc + m)
    }
}

#[derive(Clone, Debug)]
enum BallIndex {
    Sorted(Vec<CenterProfile>),
    Tree(MassTree),
}

#[derive(Clone, Debug)]
pub struct FinitePointSpace {
    metric: Metric,
    masses: Vec<LogScalar>,
    k0: f64,
    labels: Option<Vec<String>>,
    index: BallIndex,
}

/// Build a space from a real distance table and real masses. When `k0` is
/// absent the minimal quasi-triangle constant is inferred.
pub fn build_finite_space(
    distances: &[Vec<f64>],
    masses: &[f64],
    k0: Option<f64>,
) -> Result<FinitePointSpace> {
    let table = distances
        .iter()
        .map(|row| row.iter().map(|&d| LogScalar::from_f64(d)).collect())
        .collect::<Vec<Vec<LogScalar>>>();
    let masses = masses.iter().map(|&m| LogScalar::from_f64(m)).collect();
    FinitePointSpace::from_table(table, masses, k0)
}

/// Points `2^(2^k)`, `k = 1..=k_max`, with `μ({2^(2^k)}) = 2^k`.
pub fn double_exponential_space(k_max: u32) -> Result<FinitePointSpace> {
    if k_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "double-exponential space needs k_max >= 2, got {k_max}"
        )));
    }
    if k_max > 1000 {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} exceeds the log-domain range"
        )));
    }
    let positions = (1..=k_max).map(LogScalar::pow2_pow2).collect();
    let masses = (1..=k_max).map(|k| LogScalar::from_log2(f64::from(k))).collect();
    let labels = (1..=k_max)
        .map(|k| {
            if k <= 5 {
                format!("{}", 1u64 << (1u64 << k))
            } else {
                format!("2^(2^{k})")
            }
        })
        .collect();
    let mut space = FinitePointSpace::on_line(LinePositions::Log(positions), masses)?;
    space.labels = Some(labels);
    Ok(space)
}

/// Points `2^k`, `k = 1..=k_max`, with `μ({2^k}) = 2^k`: a doubling space that
/// satisfies the weak reverse doubling condition.
pub fn geometric_space(k_max: u32) -> Result<FinitePointSpace> {
    if k_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "geometric space needs k_max >= 2, got {k_max}"
        )));
    }
    let positions = (1..=k_max).map(|k| LogScalar::from_log2(f64::from(k))).collect();
    let masses = (1..=k_max).map(|k| LogScalar::from_log2(f64::from(k))).collect();
    FinitePointSpace::on_line(LinePositions::Log(positions), masses)
}

impl FinitePointSpace {
    pub fn from_table(
        table: Vec<Vec<LogScalar>>,
        masses: Vec<LogScalar>,
        k0: Option<f64>,
    ) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("space has no points".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "distance table must be {n} x {n} to match the masses"
            )));
        }
        check_masses(&masses)?;
        for i in 0..n {
            for j in 0..n {
                let d = table[i][j];
                if !d.is_finite() || d.sign() < 0 || d.ln().is_nan() {
                    return Err(Error::InvalidDistance(i, j, d.to_f64()));
                }
                if i == j && !d.is_zero() {
                    return Err(Error::InvalidDistance(i, j, d.to_f64()));
                }
                if i != j && d.is_zero() {
                    return Err(Error::ZeroDistanceDistinctPoints(i.min(j), i.max(j)));
                }
                if j > i && table[j][i] != d {
                    return Err(Error::AsymmetricDistance(i, j));
                }
            }
        }
        let dist: Vec<LogScalar> = table.into_iter().flatten().collect();
        let metric = Metric::Table { n, dist };
        let index = BallIndex::Sorted(build_profiles(&metric, &masses));
        let mut space = FinitePointSpace {
            metric,
            masses,
            k0: 1.0,
            labels: None,
            index,
        };
        let (ratio, witness) = space.max_triangle_ratio();
        match k0 {
            Some(k) if !(k >= 1.0 && k.is_finite()) => {
                return Err(Error::InvalidParameter(format!("K0 must be >= 1, got {k}")))
            }
            Some(k) if ratio > k * (1.0 + 1e-12) => {
                let (x, y, z) = witness;
                return Err(Error::QuasiTriangleViolation {
                    x,
                    y,
                    z,
                    ratio,
                    k0: k,
                });
            }
            Some(k) => space.k0 = k,
            None => space.k0 = ratio.max(1.0),
        }
        Ok(space)
    }

    /// Points on the real line at strictly increasing positions; `K0 = 1`.
    pub fn on_line(positions: LinePositions, masses: Vec<LogScalar>) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("space has no points".into()));
        }
        if masses.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: masses.len(),
            });
        }
        check_masses(&masses)?;
        for i in 1..n {
            if !positions.strictly_after(i) {
                return Err(Error::ZeroDistanceDistinctPoints(i - 1, i));
            }
        }
        let index = BallIndex::Tree(MassTree::new(&masses));
        Ok(FinitePointSpace {
            metric: Metric::Line(positions),
            masses,
            k0: 1.0,
            labels: None,
            index,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_points() {
            return Err(Error::LengthMismatch {
                expected: self.n_points(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_points(&self) -> usize {
        self.masses.len()
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn mass(&self, i: usize) -> LogScalar {
        self.masses[i]
    }

    pub fn masses(&self) -> &[LogScalar] {
        &self.masses
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[i].as_str())
    }

    pub fn find_label(&self, label: &str) -> Result<usize> {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().position(|x| x == label))
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn is_line(&self) -> bool {
        matches!(self.metric, Metric::Line(_))
    }

    /// Position of a point when the space lives on the real line.
    pub fn position(&self, i: usize) -> Option<LogScalar> {
        match &self.metric {
            Metric::Line(p) => Some(p.get(i)),
            Metric::Table { .. } => None,
        }
    }

    pub fn check_point(&self, i: usize) -> Result<()> {
        if i < self.n_points() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(i.to_string()))
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> LogScalar {
        match &self.metric {
            Metric::Table { n, dist } => dist[i * n + j],
            Metric::Line(p) => {
                if i == j {
                    LogScalar::ZERO
                } else {
                    p.gap(i.min(j), i.max(j))
                }
            }
        }
    }

    fn line_ball_bounds(&self, center: usize, radius: LogScalar) -> (usize, usize) {
        let Metric::Line(positions) = &self.metric else {
            unreachable!("line bounds requested on a table space")
        };
        // Binary search without materialising index vectors.
        let n = self.n_points();
        let (mut a, mut b) = (center + 1, n);
        while a < b {
            let m = (a + b) / 2;
            if positions.gap(center, m) < radius {
                a = m + 1;
            } else {
                b = m;
            }
        }
        let hi = a;
        let (mut a, mut b) = (0, center);
        while a < b {
            let m = (a + b) / 2;
            if positions.gap(m, center) < radius {
                b = m;
            } else {
                a = m + 1;
            }
        }
        (a, hi)
    }

    /// `μ(B(x, r))` for the open ball `{y : ρ(x, y) < r}`.
    pub fn ball_measure(&self, center: usize, radius: LogScalar) -> Result<LogScalar> {
        self.check_point(center)?;
        if !radius.is_positive() {
            return Err(Error::InvalidParameter("ball radius must be positive".into()));
        }
        Ok(match &self.index {
            BallIndex::Sorted(profiles) => {
                let p = &profiles[center];
                p.cum[p.dists.partition_point(|d| *d < radius)]
            }
            BallIndex::Tree(tree) => {
                let (lo, hi) = self.line_ball_bounds(center, radius);
                tree.range(lo, hi)
            }
        })
    }

    /// Points of the open ball, in increasing distance order for table spaces
    /// and in increasing position order for line spaces.
    pub fn ball_members(&self, center: usize, radius: LogScalar) -> Result<Vec<usize>> {
        self.check_point(center)?;
        Ok(match &self.index {
            BallIndex::Sorted(profiles) => {
                let p = &profiles[center];
                p.order[..p.dists.partition_point(|d| *d < radius)].to_vec()
            }
            BallIndex::Tree(_) => {
                let (lo, hi) = self.line_ball_bounds(center, radius);
                (lo..hi).collect()
            }
        })
    }

    /// `U(x, y) = min{μ(B(x, ρ(x,y))), μ(B(y, ρ(x,y)))}`.
    pub fn mutual_min_measure(&self, x: usize, y: usize) -> Result<LogScalar> {
        self.check_point(x)?;
        self.check_point(y)?;
        if x == y {
            return Err(Error::SamePoint);
        }
        let r = self.distance(x, y);
        Ok(self.ball_measure(x, r)?.min(self.ball_measure(y, r)?))
    }

    /// Distinct positive distances from `center`, ascending.
    pub fn distinct_distances(&self, center: usize) -> Vec<LogScalar> {
        let mut d: Vec<LogScalar> = match &self.index {
            BallIndex::Sorted(profiles) => profiles[center].dists[1..].to_vec(),
            BallIndex::Tree(_) => {
                let n = self.n_points();
                let mut d: Vec<LogScalar> = (0..n)
                    .filter(|&j| j != center)
                    .map(|j| self.distance(center, j))
                    .collect();
                d.sort_by(|a, b| a.partial_cmp(b).expect("distances are ordered"));
                d
            }
        };
        d.dedup();
        d
    }

    pub fn diameter(&self) -> LogScalar {
        match &self.metric {
            Metric::Table { dist, .. } => dist.iter().copied().fold(LogScalar::ZERO, LogScalar::max),
            Metric::Line(p) => p.gap(0, p.len() - 1),
        }
    }

    pub fn total_mass(&self) -> LogScalar {
        log_sum(&self.masses)
    }

    /// Largest `ρ(x,z) / (ρ(x,y) + ρ(y,z))` over all triples (or a fixed random
    /// sample of triples above [`EXHAUSTIVE_TRIANGLE_LIMIT`] points).
    pub fn max_triangle_ratio(&self) -> (f64, (usize, usize, usize)) {
        let n = self.n_points();
        let mut best = (0.0f64, (0, 0, 0));
        if let Metric::Line(_) = self.metric {
            return (1.0, best.1);
        }
        let mut check = |x: usize, y: usize, z: usize| {
            if x == z || y == x || y == z {
                return;
            }
            let ratio = (self.distance(x, z) / (self.distance(x, y) + self.distance(y, z))).to_f64();
            if ratio > best.0 {
                best = (ratio, (x, y, z));
            }
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for x in 0..n {
                for z in x + 1..n {
                    for y in 0..n {
                        check(x, y, z);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(TRIANGLE_SEED);
            for _ in 0..SAMPLED_TRIPLES {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            }
        }
        best
    }
}

fn check_masses(masses: &[LogScalar]) -> Result<()> {
    for (i, m) in masses.iter().enumerate() {
        if !m.is_positive() || !m.is_finite() || m.ln().is_nan() {
            return Err(Error::NonpositiveMass(i));
        }
    }
    Ok(())
}

fn build_profiles(metric: &Metric, masses: &[LogScalar]) -> Vec<CenterProfile> {
    let Metric::Table { n, dist } = metric else {
        unreachable!("profiles are only built for table spaces")
    };
    let n = *n;
    (0..n)
        .map(|c| {
            let row = &dist[c * n..(c + 1) * n];
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                row[a]
                    .partial_cmp(&row[b])
                    .expect("distances are ordered")
                    .then(a.cmp(&b))
            });
            let dists = order.iter().map(|&j| row[j]).collect();
            let mut cum = Vec::with_capacity(n + 1);
            cum.push(LogScalar::ZERO);
            for &j in &order {
                let last = *cum.last().expect("non-empty");
                cum.push(last + masses[j]);
            }
            CenterProfile { order, dists, cum }
        })
        .collect()
}

/// `Σ_x values(x) μ({x})`, rescaled in the log domain and summed pairwise.
pub fn integrate(space: &FinitePointSpace, values: &[f64]) -> Result<f64> {
    if values.len() != space.n_points() {
        return Err(Error::LengthMismatch {
            expected: space.n_points(),
            got: values.len(),
        });
    }
    let terms: Vec<LogScalar> = values
        .iter()
        .zip(space.masses())
        .map(|(&v, &m)| LogScalar::from_f64(v) * m)
        .collect();
    let total = log_sum(&terms);
    let out = total.to_f64();
    if !out.is_finite() {
        return Err(Error::Overflow(total.ln()));
    }
    Ok(out)
}

/// `sup_{x≠y} |f(x) - f(y)| / ρ(x,y)^β`.
pub fn holder_seminorm(space: &FinitePointSpace, values: &[f64], beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("Hölder exponent must be positive, got {beta}")));
    }
    let n = space.n_points();
    if values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: values.len(),
        });
    }
    let mut best = LogScalar::ZERO;
    for i in 0..n {
        for j in i + 1..n {
            let q = LogScalar::from_f64((values[i] - values[j]).abs()) / space.distance(i, j).powf(beta);
            best = best.max(q);
        }
    }
    Ok(best.to_f64())
}
