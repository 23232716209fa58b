//! Spaces that functions live on, and the sample grids used to probe them.
//!
//! Four kinds of space are supported: a closed interval, a finite union of
//! disjoint closed intervals, a finite subset of the real line with the usual
//! metric, and a finite topological space. On a finite topological space the
//! variable `x` ranges over point indices `0, 1, ..., k-1`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::finite_space::FiniteTopology;

/// Slack used when deciding whether a real number is a point of a domain.
pub const POINT_TOL: f64 = 1e-12;

/// Default grid spacing for interval domains.
pub const DEFAULT_STEP: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("interval [{lo}, {hi}] must satisfy lo < hi with finite endpoints")]
    BadInterval { lo: f64, hi: f64 },
    #[error("intervals [{0}, {1}] and [{2}, {3}] overlap or are out of order")]
    Overlap(f64, f64, f64, f64),
    #[error("a finite domain needs at least one point")]
    Empty,
    #[error("non-finite point {0}")]
    NonFinite(f64),
    #[error("sampler parameter {0} is invalid")]
    BadSampler(f64),
    #[error("sample point {0} lies outside the domain")]
    SampleOutside(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Interval { lo: f64, hi: f64 },
    IntervalUnion { intervals: Vec<(f64, f64)> },
    FiniteMetric { points: Vec<f64> },
    FiniteTopology { space: Arc<FiniteTopology> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "sampler", rename_all = "snake_case")]
pub enum Sampler {
    /// Evenly spaced grid with the given spacing; endpoints included when
    /// the spacing divides the interval length.
    Step { step: f64 },
    /// Evenly spaced grid with exactly `count` points per interval.
    Count { count: usize },
    /// Explicit sample list.
    Points { points: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    #[serde(flatten)]
    kind: DomainKind,
    #[serde(flatten)]
    sampler: Sampler,
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self, DomainError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(DomainError::BadInterval { lo, hi });
        }
        Ok(Domain {
            kind: DomainKind::Interval { lo, hi },
            sampler: Sampler::Step { step: DEFAULT_STEP },
        })
    }

    pub fn interval_union(mut intervals: Vec<(f64, f64)>) -> Result<Self, DomainError> {
        if intervals.is_empty() {
            return Err(DomainError::Empty);
        }
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(DomainError::BadInterval { lo, hi });
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in intervals.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(DomainError::Overlap(w[0].0, w[0].1, w[1].0, w[1].1));
            }
        }
        Ok(Domain {
            kind: DomainKind::IntervalUnion { intervals },
            sampler: Sampler::Step { step: DEFAULT_STEP },
        })
    }

    /// A finite metric subspace of the line. Points are sorted and deduplicated.
    pub fn finite_metric(mut points: Vec<f64>) -> Result<Self, DomainError> {
        if points.is_empty() {
            return Err(DomainError::Empty);
        }
        if let Some(&p) = points.iter().find(|p| !p.is_finite()) {
            return Err(DomainError::NonFinite(p));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Domain {
            kind: DomainKind::FiniteMetric { points },
            sampler: Sampler::Step { step: DEFAULT_STEP },
        })
    }

    pub fn finite_topology(space: Arc<FiniteTopology>) -> Self {
        Domain {
            kind: DomainKind::FiniteTopology { space },
            sampler: Sampler::Step { step: DEFAULT_STEP },
        }
    }

    pub fn with_step(mut self, step: f64) -> Result<Self, DomainError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(DomainError::BadSampler(step));
        }
        self.sampler = Sampler::Step { step };
        Ok(self)
    }

    pub fn with_count(mut self, count: usize) -> Result<Self, DomainError> {
        if count < 2 {
            return Err(DomainError::BadSampler(count as f64));
        }
        self.sampler = Sampler::Count { count };
        Ok(self)
    }

    pub fn with_points(mut self, points: Vec<f64>) -> Result<Self, DomainError> {
        if let Some(&p) = points.iter().find(|&&p| !self.contains(p)) {
            return Err(DomainError::SampleOutside(p));
        }
        self.sampler = Sampler::Points { points };
        Ok(self)
    }

    /// Same underlying space, sampled the way `other` is sampled.
    pub fn with_sampler_of(&self, other: &Domain) -> Domain {
        Domain { kind: self.kind.clone(), sampler: other.sampler.clone() }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    /// Whether two domains describe the same space, ignoring how they are sampled.
    pub fn same_space(&self, other: &Domain) -> bool {
        self.kind == other.kind
    }

    pub fn is_metric(&self) -> bool {
        !matches!(self.kind, DomainKind::FiniteTopology { .. })
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match &self.kind {
            DomainKind::Interval { lo, hi } => x >= lo - POINT_TOL && x <= hi + POINT_TOL,
            DomainKind::IntervalUnion { intervals } => intervals
                .iter()
                .any(|(lo, hi)| x >= lo - POINT_TOL && x <= hi + POINT_TOL),
            DomainKind::FiniteMetric { points } => {
                points.iter().any(|p| (p - x).abs() <= POINT_TOL)
            }
            DomainKind::FiniteTopology { space } => {
                x >= 0.0 && x.fract() == 0.0 && (x as usize) < space.len()
            }
        }
    }

    /// Closed pieces covering the domain: intervals for continuum domains,
    /// degenerate `[p, p]` pieces for finite ones.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            DomainKind::Interval { lo, hi } => vec![(*lo, *hi)],
            DomainKind::IntervalUnion { intervals } => intervals.clone(),
            DomainKind::FiniteMetric { points } => points.iter().map(|&p| (p, p)).collect(),
            DomainKind::FiniteTopology { space } => {
                (0..space.len()).map(|i| (i as f64, i as f64)).collect()
            }
        }
    }

    /// Every sample point lies in the domain.
    pub fn samples(&self) -> Vec<f64> {
        match &self.kind {
            DomainKind::Interval { lo, hi } => self.grid(*lo, *hi),
            DomainKind::IntervalUnion { intervals } => {
                intervals.iter().flat_map(|&(lo, hi)| self.grid(lo, hi)).collect()
            }
            DomainKind::FiniteMetric { points } => match &self.sampler {
                Sampler::Points { points: chosen } => chosen.clone(),
                _ => points.clone(),
            },
            DomainKind::FiniteTopology { space } => match &self.sampler {
                Sampler::Points { points: chosen } => chosen.clone(),
                _ => (0..space.len()).map(|i| i as f64).collect(),
            },
        }
    }

    fn grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.sampler {
            Sampler::Points { points } => {
                points.iter().copied().filter(|&p| p >= lo - POINT_TOL && p <= hi + POINT_TOL).collect()
            }
            Sampler::Count { count } => linspace(lo, hi, *count - 1),
            Sampler::Step { step } => {
                let ratio = (hi - lo) / step;
                let whole = ratio.round();
                if (ratio - whole).abs() <= 1e-9 * ratio.max(1.0) {
                    linspace(lo, hi, whole as usize)
                } else {
                    let count = ratio.floor() as usize;
                    (0..=count).map(|k| lo + k as f64 * step).collect()
                }
            }
        }
    }
}

/// `divisions + 1` evenly spaced points from `lo` to `hi`, both endpoints exact.
pub fn linspace(lo: f64, hi: f64, divisions: usize) -> Vec<f64> {
    if divisions == 0 {
        return vec![lo];
    }
    (0..=divisions)
        .map(|k| {
            if k == divisions {
                hi
            } else {
                lo + (hi - lo) * (k as f64 / divisions as f64)
            }
        })
        .collect()
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DomainKind::Interval { lo, hi } => write!(f, "[{lo}, {hi}]"),
            DomainKind::IntervalUnion { intervals } => {
                let parts: Vec<String> =
                    intervals.iter().map(|(lo, hi)| format!("[{lo}, {hi}]")).collect();
                write!(f, "{}", parts.join(" u "))
            }
            DomainKind::FiniteMetric { points } => {
                let parts: Vec<String> = points.iter().map(|p| p.to_string()).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            DomainKind::FiniteTopology { space } => {
                write!(f, "finite space on {} points", space.len())
            }
        }
    }
}

/// A closed subset of the line given by finitely many points and intervals.
/// Used as the target of distance functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    points: Vec<f64>,
    intervals: Vec<(f64, f64)>,
}

impl Region {
    pub fn points(points: Vec<f64>) -> Result<Self, DomainError> {
        Region::new(points, Vec::new())
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, DomainError> {
        Region::new(Vec::new(), vec![(lo, hi)])
    }

    pub fn new(points: Vec<f64>, intervals: Vec<(f64, f64)>) -> Result<Self, DomainError> {
        if points.is_empty() && intervals.is_empty() {
            return Err(DomainError::Empty);
        }
        if let Some(&p) = points.iter().find(|p| !p.is_finite()) {
            return Err(DomainError::NonFinite(p));
        }
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(DomainError::BadInterval { lo, hi });
            }
        }
        Ok(Region { points, intervals })
    }

    pub fn distance(&self, x: f64) -> f64 {
        let from_points = self.points.iter().map(|p| (x - p).abs());
        let from_intervals = self.intervals.iter().map(|&(lo, hi)| {
            if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            }
        });
        from_points.chain(from_intervals).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_grid_hits_decimal_points() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let s = d.samples();
        assert_eq!(s.len(), 11);
        assert_eq!(s[3], 0.3);
        assert_eq!(s[10], 1.0);
    }

    #[test]
    fn symmetric_grid_contains_zero() {
        let d = Domain::interval(-1.0, 1.0).unwrap().with_step(0.25).unwrap();
        assert!(d.samples().contains(&0.0));
        assert_eq!(d.samples().len(), 9);
    }

    #[test]
    fn counted_grid() {
        let d = Domain::interval(0.0, 1.0).unwrap().with_count(1000).unwrap();
        let s = d.samples();
        assert_eq!(s.len(), 1000);
        assert!(s.iter().all(|&x| d.contains(x)));
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Domain::interval(1.0, 0.0).is_err());
        assert!(Domain::interval_union(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(Domain::finite_metric(vec![]).is_err());
        assert!(Domain::interval(0.0, 1.0).unwrap().with_points(vec![2.0]).is_err());
    }

    #[test]
    fn union_samples_stay_inside() {
        let d = Domain::interval_union(vec![(2.0, 3.0), (0.0, 1.0)]).unwrap();
        let s = d.samples();
        assert_eq!(s.len(), 22);
        assert!(s.iter().all(|&x| d.contains(x)));
        assert!(!d.contains(1.5));
    }

    #[test]
    fn region_distance() {
        let r = Region::new(vec![5.0], vec![(-1.0, 1.0)]).unwrap();
        assert_eq!(r.distance(0.3), 0.0);
        assert_eq!(r.distance(2.0), 1.0);
        assert_eq!(r.distance(4.5), 0.5);
    }
}
