//! Slopes on a torus and the integer matrices acting on them.
//!
//! A slope is the unsigned class `±(p·m + q·l)` of a primitive vector in a
//! fixed homology basis `(m, l)`. It is written as the extended rational
//! `q/p`, so `(0, 1)` is the slope `∞` (the coordinate of `l`) and `(1, 0)`
//! is `0/1` (the coordinate of `m`).
//!
//! The stored pair is always reduced and sign-canonical: `p > 0`, or `p = 0`
//! and `q = 1`. With that convention `q/p` is the usual rational coordinate
//! and `∞` is an ordinary value of the type; nothing downstream has to branch
//! on it.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlopeError {
    #[error("(0, 0) is not a slope")]
    ZeroPair,
    #[error("cannot parse slope {0:?}: expected \"q/p\", an integer, or \"inf\"")]
    Parse(String),
    #[error("annulus twist needs two distinct coordinates, got {0} twice")]
    SameIndex(usize),
    #[error("coordinate {0} is ∞ and cannot be shifted")]
    InfiniteCoordinate(usize),
    #[error("coordinate {index} out of range for a vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("twist sign must be +1 or -1, got {0}")]
    BadSign(i64),
    #[error("sequence is not essential at coordinate {coord}: term {term} equals the limit")]
    NotEssential { coord: usize, term: usize },
    #[error("sequence repeats slope {slope} at term {term}; terms must be pairwise distinct")]
    RepeatedTerm { term: usize, slope: Slope },
    #[error("comparison sequence meets the limit at term {term}")]
    LimitNotAvoided { term: usize },
    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("matrix has determinant {0}, expected ±1")]
    NotUnimodular(i64),
    #[error("integer overflow")]
    Overflow,
}

/// An unsigned primitive homology class on a torus, stored as a reduced pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    /// The slope `∞ = 1/0`, i.e. the class of `l`.
    pub const INFINITY: Slope = Slope { p: 0, q: 1 };
    /// The slope `0/1`, i.e. the class of `m`.
    pub const ZERO: Slope = Slope { p: 1, q: 0 };

    /// Reduce `(p, q)` and pick the canonical sign.
    pub fn new(p: i64, q: i64) -> Result<Slope, SlopeError> {
        normalize(p, q)
    }

    /// The slope with rational coordinate `q/p` (argument order as written).
    pub fn from_fraction(q: i64, p: i64) -> Result<Slope, SlopeError> {
        normalize(p, q)
    }

    /// The integral slope `n/1`.
    pub fn integer(n: i64) -> Slope {
        Slope { p: 1, q: n }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_infinite(&self) -> bool {
        self.p == 0
    }

    /// `q/p` as an exact rational, `None` for `∞`.
    pub fn to_ratio(&self) -> Option<Ratio<i64>> {
        (self.p != 0).then(|| Ratio::new(self.q, self.p))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Slope {
        // Ratio is already reduced with a positive denominator.
        Slope { p: *r.denom(), q: *r.numer() }
    }

    /// Minimal geometric intersection number `|p·s − q·r|`.
    pub fn distance(&self, other: &Slope) -> u64 {
        distance(*self, *other)
    }

    /// Image of the slope under an integer matrix acting on `(p, q)` columns.
    pub fn transform(&self, m: &Mat2) -> Slope {
        let (p, q) = m.apply(self.p, self.q);
        normalize(p, q).expect("unimodular image of a primitive vector is primitive")
    }

    /// `q/p + k`, the effect of `k` fiber twists on a finite slope.
    pub fn shifted(&self, k: i64) -> Result<Slope, SlopeError> {
        if self.is_infinite() {
            return Err(SlopeError::InfiniteCoordinate(0));
        }
        let q = k
            .checked_mul(self.p)
            .and_then(|kp| kp.checked_add(self.q))
            .ok_or(SlopeError::Overflow)?;
        normalize(self.p, q)
    }
}

/// Reduce a nonzero pair and choose the representative with `p > 0`, or
/// `(0, 1)` when `p = 0`.
pub fn normalize(p: i64, q: i64) -> Result<Slope, SlopeError> {
    if p == 0 && q == 0 {
        return Err(SlopeError::ZeroPair);
    }
    let g = p.gcd(&q);
    let (mut p, mut q) = (p / g, q / g);
    if p < 0 || (p == 0 && q < 0) {
        p = -p;
        q = -q;
    }
    Ok(Slope { p, q })
}

/// `Δ(s, t) = |p_s·q_t − q_s·p_t|`.
pub fn distance(s: Slope, t: Slope) -> u64 {
    let v = s.p as i128 * t.q as i128 - s.q as i128 * t.p as i128;
    u64::try_from(v.unsigned_abs()).expect("distance exceeds u64")
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 0 {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.q, self.p)
        }
    }
}

impl FromStr for Slope {
    type Err = SlopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "∞" | "infinity" | "1/0" | "-1/0") {
            return Ok(Slope::INFINITY);
        }
        let bad = || SlopeError::Parse(s.to_string());
        match t.split_once('/') {
            Some((num, den)) => {
                let q: i64 = num.trim().parse().map_err(|_| bad())?;
                let p: i64 = den.trim().parse().map_err(|_| bad())?;
                normalize(p, q).map_err(|_| bad())
            }
            None => {
                let q: i64 = t.parse().map_err(|_| bad())?;
                Ok(Slope::integer(q))
            }
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A 2×2 integer matrix `[[a, b], [c, d]]` acting on column vectors `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1, b: 0, c: 0, d: 1 };
    /// Exchanges the two basis vectors.
    pub const SWAP: Mat2 = Mat2 { a: 0, b: 1, c: 1, d: 0 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    pub fn apply(&self, p: i64, q: i64) -> (i64, i64) {
        (self.a * p + self.b * q, self.c * p + self.d * q)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Inverse of a matrix with determinant ±1.
    pub fn inverse(&self) -> Result<Mat2, SlopeError> {
        let det = self.det();
        if det.abs() != 1 {
            return Err(SlopeError::NotUnimodular(det));
        }
        Ok(Mat2 { a: self.d * det, b: -self.b * det, c: -self.c * det, d: self.a * det })
    }

    pub fn max_abs_entry(&self) -> i64 {
        [self.a, self.b, self.c, self.d].iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    /// A random element of GL(2,ℤ) with entries bounded by `max_entry`,
    /// built as a random word in the elementary generators.
    pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R, max_entry: i64) -> Mat2 {
        const GENS: [Mat2; 5] = [
            Mat2::new(1, 1, 0, 1),
            Mat2::new(1, -1, 0, 1),
            Mat2::new(1, 0, 1, 1),
            Mat2::new(1, 0, -1, 1),
            Mat2::new(1, 0, 0, -1),
        ];
        let mut m = if rng.gen_bool(0.5) { Mat2::IDENTITY } else { Mat2::SWAP };
        for _ in 0..rng.gen_range(0..12) {
            let next = m.mul(&GENS[rng.gen_range(0..GENS.len())]);
            if next.max_abs_entry() <= max_entry {
                m = next;
            }
        }
        m
    }
}

impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [[self.a, self.b], [self.c, self.d]].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mat2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [[a, b], [c, d]] = <[[i64; 2]; 2]>::deserialize(deserializer)?;
        Ok(Mat2 { a, b, c, d })
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// `(a + b·√d) / c` with `d > 1` square-free; an exact irrational real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticIrrational {
    pub a: i64,
    pub b: i64,
    pub d: i64,
    pub c: i64,
}

/// A point of the completed slope circle `ℝ ∪ {∞}`: either a slope or an
/// irrational geodesic foliation. Irrationals are never approximated by the
/// library; the caller provides them exactly or as a bracketing interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FoliationLimit {
    Rational { slope: Slope },
    Quadratic { value: QuadraticIrrational },
    /// An irrational known to lie strictly between `lower` and `upper`.
    Bracketed { lower: Ratio<i64>, upper: Ratio<i64> },
}

impl FoliationLimit {
    pub fn slope(s: Slope) -> FoliationLimit {
        FoliationLimit::Rational { slope: s }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, FoliationLimit::Rational { .. })
    }

    /// Whether the foliation is the given slope. Irrational foliations are
    /// never slopes.
    pub fn is_slope(&self, s: &Slope) -> bool {
        matches!(self, FoliationLimit::Rational { slope } if slope == s)
    }
}

/// One slope per boundary torus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlopeVector(pub Vec<Slope>);

impl SlopeVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn get(&self, index: usize) -> Result<Slope, SlopeError> {
        self.0
            .get(index)
            .copied()
            .ok_or(SlopeError::IndexOutOfRange { index, len: self.0.len() })
    }
}

impl From<Vec<Slope>> for SlopeVector {
    fn from(v: Vec<Slope>) -> Self {
        SlopeVector(v)
    }
}

/// Twist along an annulus whose boundary slopes are `∞` on tori `i` and `j`:
/// coordinate `i` moves by `+sign`, coordinate `j` by `−sign`.
pub fn annulus_twist(v: &SlopeVector, i: usize, j: usize, sign: i64) -> Result<SlopeVector, SlopeError> {
    if sign != 1 && sign != -1 {
        return Err(SlopeError::BadSign(sign));
    }
    if i == j {
        return Err(SlopeError::SameIndex(i));
    }
    let si = v.get(i)?;
    let sj = v.get(j)?;
    let si = si.shifted(sign).map_err(|e| relabel_infinite(e, i))?;
    let sj = sj.shifted(-sign).map_err(|e| relabel_infinite(e, j))?;
    let mut out = v.clone();
    out.0[i] = si;
    out.0[j] = sj;
    Ok(out)
}

fn relabel_infinite(e: SlopeError, index: usize) -> SlopeError {
    match e {
        SlopeError::InfiniteCoordinate(_) => SlopeError::InfiniteCoordinate(index),
        other => other,
    }
}

/// A sequence of slope vectors together with its declared limit foliations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSequence {
    pub terms: Vec<SlopeVector>,
    pub limit: Vec<FoliationLimit>,
}

impl SlopeSequence {
    pub fn new(terms: Vec<SlopeVector>, limit: Vec<FoliationLimit>) -> Result<Self, SlopeError> {
        if let Some(t) = terms.iter().find(|t| t.len() != limit.len()) {
            return Err(SlopeError::LengthMismatch(t.len(), limit.len()));
        }
        Ok(SlopeSequence { terms, limit })
    }

    /// A one-coordinate sequence.
    pub fn scalar(terms: impl IntoIterator<Item = Slope>, limit: FoliationLimit) -> Self {
        SlopeSequence {
            terms: terms.into_iter().map(|s| SlopeVector(vec![s])).collect(),
            limit: vec![limit],
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coordinate(&self, coord: usize) -> Result<Vec<Slope>, SlopeError> {
        self.terms.iter().map(|t| t.get(coord)).collect()
    }

    /// `s_j^i ≠ λ_j` for every term.
    pub fn is_essential_at(&self, coord: usize) -> Result<bool, SlopeError> {
        let lambda = self.limit_at(coord)?;
        Ok(self.coordinate(coord)?.iter().all(|s| !lambda.is_slope(s)))
    }

    pub fn limit_at(&self, coord: usize) -> Result<&FoliationLimit, SlopeError> {
        self.limit
            .get(coord)
            .ok_or(SlopeError::IndexOutOfRange { index: coord, len: self.limit.len() })
    }
}

/// `Δ(s_i, s'_i)` along two sequences, after checking the finite-prefix part
/// of the divergence hypotheses: `seq` is essential at `coord` with pairwise
/// distinct terms, and `other` never meets the limit of `seq`.
pub fn divergence_profile(seq: &SlopeSequence, other: &SlopeSequence, coord: usize) -> Result<Vec<u64>, SlopeError> {
    if seq.len() != other.len() {
        return Err(SlopeError::LengthMismatch(seq.len(), other.len()));
    }
    let lambda = seq.limit_at(coord)?;
    let first = seq.coordinate(coord)?;
    let second = other.coordinate(coord)?;
    let mut seen = std::collections::HashSet::with_capacity(first.len());
    for (i, s) in first.iter().enumerate() {
        if lambda.is_slope(s) {
            return Err(SlopeError::NotEssential { coord, term: i });
        }
        if !seen.insert(*s) {
            return Err(SlopeError::RepeatedTerm { term: i, slope: *s });
        }
    }
    if let Some(i) = second.iter().position(|s| lambda.is_slope(s)) {
        return Err(SlopeError::LimitNotAvoided { term: i });
    }
    Ok(first.iter().zip(&second).map(|(s, t)| s.distance(t)).collect())
}
