//! Finite topological spaces, computed exactly.
//!
//! Subsets are bitmasks over at most 64 points. A finite topology is the
//! same thing as a preorder (specialization: `x <= y` iff `x` lies in the
//! closure of `{y}`); its open sets are exactly the up-sets.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::zero_sets::IdentityCheck;

pub type Subset = u64;

pub const MAX_POINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiniteError {
    #[error("a finite space has at most {MAX_POINTS} points, got {0}")]
    TooManyPoints(usize),
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown point {0:?} in open set")]
    UnknownPoint(String),
    #[error("malformed topology document: {0}")]
    Malformed(String),
    #[error("function has {got} values for {want} points")]
    Arity { got: usize, want: usize },
    #[error("function value {0} is not finite")]
    NonFinite(f64),
    #[error(transparent)]
    Violation(#[from] TopologyViolation),
}

/// First axiom a family of subsets fails.
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum TopologyViolation {
    #[error("empty set is not open")]
    MissingEmpty,
    #[error("whole space is not open")]
    MissingFull,
    #[error("union of {a:?} and {b:?} is not open")]
    Union { a: Vec<String>, b: Vec<String> },
    #[error("intersection of {a:?} and {b:?} is not open")]
    Intersection { a: Vec<String>, b: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTopology {
    points: Vec<String>,
    opens: Vec<Subset>,
}

impl Serialize for FiniteTopology {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            points: &'a [String],
            opens: Vec<Vec<String>>,
        }
        Doc { points: &self.points, opens: self.opens.iter().map(|&o| self.labels(o)).collect() }
            .serialize(s)
    }
}

fn full(n: usize) -> Subset {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn members(s: Subset) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| s >> i & 1 == 1)
}

impl FiniteTopology {
    /// A family of subsets over labelled points; not validated.
    pub fn new(points: Vec<String>, opens: Vec<Subset>) -> Result<Self, FiniteError> {
        if points.len() > MAX_POINTS {
            return Err(FiniteError::TooManyPoints(points.len()));
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(FiniteError::DuplicateLabel(p.clone()));
            }
        }
        let mask = full(points.len());
        let mut opens: Vec<Subset> = opens.into_iter().map(|o| o & mask).collect();
        opens.sort_unstable();
        opens.dedup();
        Ok(FiniteTopology { points, opens })
    }

    /// Points labelled `a, b, c, ...` (then `p26, p27, ...`).
    pub fn with_default_labels(n: usize, opens: Vec<Subset>) -> Result<Self, FiniteError> {
        Self::new(default_labels(n), opens)
    }

    pub fn discrete(n: usize) -> Self {
        Self::with_default_labels(n, (0..=full(n)).collect()).expect("small discrete space")
    }

    pub fn indiscrete(n: usize) -> Self {
        Self::with_default_labels(n, vec![0, full(n)]).expect("indiscrete space")
    }

    /// `{}, {a}, {a, b}` on `{a, b}`.
    pub fn sierpinski() -> Self {
        Self::with_default_labels(2, vec![0b00, 0b01, 0b11]).expect("two points")
    }

    /// The topology whose opens are the up-sets of a preorder; `above[x]`
    /// is the set of `y` with `x <= y` and must be reflexive and transitive.
    pub fn from_preorder(above: &[Subset]) -> Self {
        let n = above.len();
        let opens = (0..=full(n)).filter(|&s| members(s).all(|x| above[x] & !s == 0)).collect();
        Self::with_default_labels(n, opens).expect("preorder size")
    }

    /// Parse `{"points": [...], "opens": [[...], ...]}`. Points may be
    /// strings or numbers; open sets list point labels.
    pub fn from_json(v: &Value) -> Result<Self, FiniteError> {
        let malformed = |m: &str| FiniteError::Malformed(m.to_string());
        let points: Vec<String> = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("missing \"points\" array"))?
            .iter()
            .map(label_of)
            .collect::<Option<_>>()
            .ok_or_else(|| malformed("point labels must be strings or numbers"))?;
        if points.len() > MAX_POINTS {
            return Err(FiniteError::TooManyPoints(points.len()));
        }
        let mut opens = Vec::new();
        for o in v
            .get("opens")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("missing \"opens\" array"))?
        {
            let mut s = 0u64;
            for p in o.as_array().ok_or_else(|| malformed("each open set must be an array"))? {
                let l = label_of(p).ok_or_else(|| malformed("open set members must be labels"))?;
                let i = points.iter().position(|q| *q == l).ok_or(FiniteError::UnknownPoint(l))?;
                s |= 1 << i;
            }
            opens.push(s);
        }
        Self::new(points, opens)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn opens(&self) -> &[Subset] {
        &self.opens
    }

    pub fn full(&self) -> Subset {
        full(self.len())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p == label)
    }

    pub fn labels(&self, s: Subset) -> Vec<String> {
        members(s).filter(|&i| i < self.len()).map(|i| self.points[i].clone()).collect()
    }

    pub fn subset_of(&self, labels: &[&str]) -> Option<Subset> {
        labels.iter().try_fold(0u64, |acc, l| Some(acc | 1 << self.index_of(l)?))
    }

    /// Check the axioms; pairwise unions are checked before intersections.
    pub fn validate(&self) -> Result<(), TopologyViolation> {
        if self.opens.binary_search(&0).is_err() {
            return Err(TopologyViolation::MissingEmpty);
        }
        if self.opens.binary_search(&self.full()).is_err() {
            return Err(TopologyViolation::MissingFull);
        }
        for (i, &a) in self.opens.iter().enumerate() {
            for &b in &self.opens[i + 1..] {
                if !self.is_open(a | b) {
                    return Err(TopologyViolation::Union { a: self.labels(a), b: self.labels(b) });
                }
            }
        }
        for (i, &a) in self.opens.iter().enumerate() {
            for &b in &self.opens[i + 1..] {
                if !self.is_open(a & b) {
                    return Err(TopologyViolation::Intersection {
                        a: self.labels(a),
                        b: self.labels(b),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_open(&self, s: Subset) -> bool {
        self.opens.binary_search(&s).is_ok()
    }

    pub fn is_closed(&self, s: Subset) -> bool {
        self.is_open(self.full() & !s)
    }

    /// Smallest open set containing `s`.
    pub fn open_hull(&self, s: Subset) -> Subset {
        self.opens.iter().filter(|&&o| o & s == s).fold(self.full(), |acc, &o| acc & o)
    }

    pub fn closure(&self, s: Subset) -> Subset {
        self.full() & !self.interior(self.full() & !s)
    }

    pub fn interior(&self, s: Subset) -> Subset {
        self.opens.iter().filter(|&&o| o & !s == 0).fold(0, |acc, &o| acc | o)
    }

    /// `above[x]`: all `y` with `x` in the closure of `{y}`.
    pub fn specialization(&self) -> Vec<Subset> {
        (0..self.len()).map(|x| self.open_hull(1 << x)).collect()
    }

    /// Connected components (classes of the symmetric-transitive closure of
    /// the specialization preorder), as disjoint subsets.
    pub fn components(&self) -> Vec<Subset> {
        let above = self.specialization();
        let n = self.len();
        let mut comp: Vec<Subset> = Vec::new();
        let mut seen = 0u64;
        for start in 0..n {
            if seen >> start & 1 == 1 {
                continue;
            }
            let mut c = 1u64 << start;
            loop {
                let mut next = c;
                for x in 0..n {
                    let related = above[x] & c != 0 || members(c).any(|y| above[y] >> x & 1 == 1);
                    if related {
                        next |= 1 << x;
                    }
                }
                if next == c {
                    break;
                }
                c = next;
            }
            seen |= c;
            comp.push(c);
        }
        comp
    }
}

fn label_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| if i < 26 { ((b'a' + i as u8) as char).to_string() } else { format!("p{i}") })
        .collect()
}

/// A real function on the points of a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteRealFn {
    pub values: Vec<f64>,
}

impl FiniteRealFn {
    pub fn new(values: Vec<f64>) -> Result<Self, FiniteError> {
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(FiniteError::NonFinite(v));
        }
        Ok(FiniteRealFn { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        FiniteRealFn { values: vec![c; n] }
    }

    /// Accepts a list of values in point order or a `{label: value}` map.
    pub fn from_json(t: &FiniteTopology, v: &Value) -> Result<Self, FiniteError> {
        let values = match v {
            Value::Array(xs) => xs
                .iter()
                .map(Value::as_f64)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| FiniteError::Malformed("function values must be numbers".into()))?,
            Value::Object(m) => {
                let mut vals = vec![f64::NAN; t.len()];
                for (k, x) in m {
                    let i = t.index_of(k).ok_or_else(|| FiniteError::UnknownPoint(k.clone()))?;
                    vals[i] = x.as_f64().ok_or_else(|| {
                        FiniteError::Malformed(format!("value for {k:?} is not a number"))
                    })?;
                }
                vals
            }
            _ => return Err(FiniteError::Malformed("function must be an array or object".into())),
        };
        if values.len() != t.len() {
            return Err(FiniteError::Arity { got: values.len(), want: t.len() });
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        FiniteRealFn { values: self.values.iter().map(|&v| op(v)).collect() }
    }

    pub fn zip(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        FiniteRealFn { values: self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect() }
    }

    /// `{x : f(x) = 0}`, exactly.
    pub fn zero_set(&self) -> Subset {
        self.values.iter().enumerate().filter(|(_, &v)| v == 0.0).fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// `{x : lo < f(x) < hi}`.
    pub fn preimage(&self, lo: f64, hi: f64) -> Subset {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| lo < v && v < hi)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Sorted distinct values.
    pub fn range(&self) -> Vec<f64> {
        let mut r = self.values.clone();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }
}

/// Open intervals whose preimages determine all preimages of open sets:
/// with midpoints `m_i` between consecutive range values, the rays
/// `(-inf, m_i)`, `(m_i, inf)` and the gaps `(m_{i-1}, m_i)`.
pub fn generating_intervals(range: &[f64]) -> Vec<(f64, f64)> {
    let mids: Vec<f64> = range.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
    let mut out = Vec::with_capacity(3 * mids.len() + 1);
    out.push((f64::NEG_INFINITY, f64::INFINITY));
    for &m in &mids {
        out.push((f64::NEG_INFINITY, m));
        out.push((m, f64::INFINITY));
    }
    for w in mids.windows(2) {
        out.push((w[0], w[1]));
    }
    out
}

fn check_arity(f: &FiniteRealFn, t: &FiniteTopology) {
    assert_eq!(f.len(), t.len(), "function and space sizes differ");
}

pub fn is_continuous(f: &FiniteRealFn, t: &FiniteTopology) -> bool {
    check_arity(f, t);
    generating_intervals(&f.range()).into_iter().all(|(lo, hi)| t.is_open(f.preimage(lo, hi)))
}

/// Whether `s` is a union of closed sets (finitely many suffice).
pub fn is_f_sigma(s: Subset, t: &FiniteTopology) -> bool {
    let covered = (0..t.len())
        .filter(|&x| s >> x & 1 == 1)
        .filter(|&x| {
            let cl = t.closure(1 << x);
            cl & !s == 0
        })
        .fold(0u64, |acc, x| acc | 1 << x);
    covered == s
}

/// Whether `s` is an intersection of open sets.
pub fn is_g_delta(s: Subset, t: &FiniteTopology) -> bool {
    t.open_hull(s) == s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalVerdict {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub preimage: Vec<String>,
    pub f_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsigmaReport {
    pub pass: bool,
    pub intervals: Vec<IntervalVerdict>,
}

impl FsigmaReport {
    pub fn failures(&self) -> impl Iterator<Item = &IntervalVerdict> {
        self.intervals.iter().filter(|v| !v.f_sigma)
    }
}

/// Test every generating preimage of `f` for being F-sigma. A failure
/// shows that `f` is not a pointwise limit of continuous functions.
pub fn check_fsigma_characterization(f: &FiniteRealFn, t: &FiniteTopology) -> FsigmaReport {
    check_arity(f, t);
    let intervals: Vec<IntervalVerdict> = generating_intervals(&f.range())
        .into_iter()
        .map(|(lo, hi)| {
            let pre = f.preimage(lo, hi);
            IntervalVerdict {
                lo: lo.is_finite().then_some(lo),
                hi: hi.is_finite().then_some(hi),
                preimage: t.labels(pre),
                f_sigma: is_f_sigma(pre, t),
            }
        })
        .collect();
    FsigmaReport { pass: intervals.iter().all(|v| v.f_sigma), intervals }
}

pub fn zero_set_is_gdelta(f: &FiniteRealFn, t: &FiniteTopology) -> bool {
    check_arity(f, t);
    is_g_delta(f.zero_set(), t)
}

/// All topologies on `n <= 5` labelled points.
pub fn enumerate_topologies(n: usize) -> Vec<FiniteTopology> {
    assert!(n <= 5, "enumeration is only practical for tiny spaces");
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << pairs.len()) {
        let mut above: Vec<Subset> = (0..n).map(|i| 1 << i).collect();
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if bits >> b & 1 == 1 {
                above[i] |= 1 << j;
            }
        }
        let transitive = (0..n).all(|i| members(above[i]).all(|j| above[j] & !above[i] == 0));
        if transitive {
            out.push(FiniteTopology::from_preorder(&above));
        }
    }
    out
}

/// A random topology: a random relation closed up to a preorder.
pub fn random_topology<R: Rng>(n: usize, density: f64, rng: &mut R) -> FiniteTopology {
    let mut above: Vec<Subset> = (0..n).map(|i| 1 << i).collect();
    for (i, row) in above.iter_mut().enumerate() {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                *row |= 1 << j;
            }
        }
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            let reach = members(above[i]).fold(above[i], |acc, j| acc | above[j]);
            if reach != above[i] {
                above[i] = reach;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    FiniteTopology::from_preorder(&above)
}

/// Values used by the random generators: quarters in `[-2, 2]`.
pub fn value_grid() -> Vec<f64> {
    (-8..=8).map(|k| k as f64 / 4.0).collect()
}

/// A random continuous function: constant on each connected component.
pub fn random_continuous<R: Rng>(t: &FiniteTopology, grid: &[f64], rng: &mut R) -> FiniteRealFn {
    let mut values = vec![0.0; t.len()];
    for c in t.components() {
        let v = *grid.choose(rng).expect("nonempty grid");
        for x in members(c) {
            values[x] = v;
        }
    }
    FiniteRealFn { values }
}

/// A convergent sequence of continuous functions: arbitrary continuous
/// noise for the first `burn_in` terms, then `v + w 2^-n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSequence {
    noise: Vec<FiniteRealFn>,
    base: FiniteRealFn,
    drift: FiniteRealFn,
}

/// Index past which every generated sequence has stopped changing.
const SETTLE_CAP: u64 = 4096;

impl FiniteSequence {
    pub fn random<R: Rng>(t: &FiniteTopology, grid: &[f64], burn_in: usize, rng: &mut R) -> Self {
        FiniteSequence {
            noise: (0..burn_in).map(|_| random_continuous(t, grid, rng)).collect(),
            base: random_continuous(t, grid, rng),
            drift: random_continuous(t, grid, rng),
        }
    }

    /// Term `n >= 1`.
    pub fn term(&self, n: u64) -> FiniteRealFn {
        let n = n.max(1);
        if let Some(f) = self.noise.get((n - 1) as usize) {
            return f.clone();
        }
        let scale = 0.5f64.powi(n.min(2000) as i32);
        self.base.zip(&self.drift, |v, w| v + w * scale)
    }

    /// The pointwise limit, read off once consecutive terms coincide.
    pub fn limit(&self) -> FiniteRealFn {
        let mut n = self.noise.len() as u64 + 1;
        let mut prev = self.term(n);
        while n < SETTLE_CAP {
            n += 1;
            let next = self.term(n);
            if next == prev {
                return next;
            }
            prev = next;
        }
        prev
    }
}

/// The zero-set identities evaluated exactly on a finite space.
pub fn exact_zero_identities(f: &FiniteRealFn, g: &FiniteRealFn, powers: &[u64]) -> Vec<IdentityCheck> {
    let zf = f.zero_set();
    let zg = g.zero_set();
    let check = |name: String, a: Subset, b: Subset| IdentityCheck {
        name,
        pass: a == b,
        offending: members(a ^ b).map(|i| i as f64).collect(),
    };
    let mut out = vec![
        check("Z(f) u Z(g) = Z(f*g)".into(), zf | zg, f.zip(g, |a, b| a * b).zero_set()),
        check("Z(f) n Z(g) = Z(f^2+g^2)".into(), zf & zg, f.zip(g, |a, b| a * a + b * b).zero_set()),
        check("Z(f) n Z(g) = Z(|f|+|g|)".into(), zf & zg, f.zip(g, |a, b| a.abs() + b.abs()).zero_set()),
        check("Z(f) = Z(|f|)".into(), zf, f.map(f64::abs).zero_set()),
    ];
    for &k in powers {
        out.push(check(format!("Z(f) = Z(f^{k})"), zf, f.map(|v| crate::continuous::powu(v, k)).zero_set()));
    }
    out
}

/// Named functions attached to a topology document under `"functions"`.
pub fn functions_from_json(
    t: &FiniteTopology,
    v: &Value,
) -> Result<BTreeMap<String, FiniteRealFn>, FiniteError> {
    let mut out = BTreeMap::new();
    if let Some(fs) = v.get("functions") {
        let m = fs
            .as_object()
            .ok_or_else(|| FiniteError::Malformed("\"functions\" must be an object".into()))?;
        for (name, body) in m {
            out.insert(name.clone(), FiniteRealFn::from_json(t, body)?);
        }
    }
    Ok(out)
}
