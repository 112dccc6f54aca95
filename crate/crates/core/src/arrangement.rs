//! Exact line arrangements in the projective plane and the invariants read
//! off their intersection lattice.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::poly::HomPoly;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error("linear form is identically zero")]
    ZeroForm,
    #[error("lines {0} and {1} define the same projective line")]
    DuplicateLine(usize, usize),
    #[error("an arrangement needs at least one line")]
    Empty,
    #[error("could not parse coefficient {0:?}")]
    BadCoefficient(String),
    #[error("malformed arrangement file: {0}")]
    Format(String),
}

/// Divides out the content of an integer triple and makes the first nonzero
/// entry positive. Returns `None` for the zero triple.
pub(crate) fn canonical_triple(mut v: [BigInt; 3]) -> Option<[BigInt; 3]> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return None;
    }
    let first = v.iter().find(|x| !x.is_zero()).expect("nonzero triple");
    let g = if first.is_negative() { -g } else { g };
    for x in v.iter_mut() {
        *x = &*x / &g;
    }
    Some(v)
}

fn cross(u: &[BigInt; 3], v: &[BigInt; 3]) -> [BigInt; 3] {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

fn dot(u: &[BigInt; 3], v: &[BigInt; 3]) -> BigInt {
    &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2]
}

/// A projective line `a x + b y + c z = 0` in canonical form: coprime
/// integer coefficients with the first nonzero one positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    coeffs: [BigInt; 3],
}

impl Line {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Line, ArrangementError> {
        Line::from_integers([a.into(), b.into(), c.into()])
    }

    pub fn from_integers(v: [BigInt; 3]) -> Result<Line, ArrangementError> {
        canonical_triple(v)
            .map(|coeffs| Line { coeffs })
            .ok_or(ArrangementError::ZeroForm)
    }

    pub fn coeffs(&self) -> &[BigInt; 3] {
        &self.coeffs
    }

    pub fn linear_form(&self) -> HomPoly<BigInt> {
        let [a, b, c] = self.coeffs.clone();
        HomPoly::linear(a, b, c)
    }

    pub fn contains(&self, p: &Point) -> bool {
        dot(&self.coeffs, &p.coords).is_zero()
    }

    /// Intersection point of two distinct lines.
    pub fn meet(&self, other: &Line) -> Point {
        Point::from_integers(cross(&self.coeffs, &other.coeffs))
            .expect("distinct lines meet in a point")
    }

    /// Line through two distinct points.
    pub fn join(p: &Point, q: &Point) -> Line {
        Line::from_integers(cross(&p.coords, &q.coords)).expect("distinct points span a line")
    }

    /// Largest absolute coefficient.
    pub fn height(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap()
    }
}

/// Serialized as three decimal strings; reading canonicalizes.
impl Serialize for Line {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let [a, b, c] = &self.coeffs;
        [a.to_string(), b.to_string(), c.to_string()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Line {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Line, D::Error> {
        let [a, b, c] = <[String; 3]>::deserialize(d)?;
        let parse = |x: &str| parse_rational(x).map_err(serde::de::Error::custom);
        canonicalize_line(&parse(&a)?, &parse(&b)?, &parse(&c)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {} : {}]", self.coeffs[0], self.coeffs[1], self.coeffs[2])
    }
}

/// Canonical representative of the projective line through `(a, b, c)`:
/// clear denominators, divide by the gcd, make the first nonzero entry
/// positive.
pub fn canonicalize_line(a: &Rational, b: &Rational, c: &Rational) -> Result<Line, ArrangementError> {
    let lcm = [a, b, c]
        .iter()
        .fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    let scaled = [a, b, c].map(|q| (q * Rational::from_integer(lcm.clone())).to_integer());
    Line::from_integers(scaled)
}

/// A point of the projective plane with canonical integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    coords: [BigInt; 3],
}

impl Point {
    pub fn new(x: i64, y: i64, z: i64) -> Option<Point> {
        Point::from_integers([x.into(), y.into(), z.into()])
    }

    pub fn from_integers(v: [BigInt; 3]) -> Option<Point> {
        canonical_triple(v).map(|coords| Point { coords })
    }

    pub fn coords(&self) -> &[BigInt; 3] {
        &self.coords
    }

    pub fn rational_coords(&self) -> [Rational; 3] {
        self.coords.clone().map(Rational::from_integer)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {} : {})", self.coords[0], self.coords[1], self.coords[2])
    }
}

/// Ordered set of pairwise distinct lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    lines: Vec<Line>,
}

impl Arrangement {
    pub fn new(lines: Vec<Line>) -> Result<Arrangement, ArrangementError> {
        build_arrangement(lines)
    }

    pub fn from_triples(triples: &[[i64; 3]]) -> Result<Arrangement, ArrangementError> {
        let lines = triples
            .iter()
            .map(|t| Line::new(t[0], t[1], t[2]))
            .collect::<Result<Vec<_>, _>>()?;
        build_arrangement(lines)
    }

    pub fn n(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn contains(&self, line: &Line) -> bool {
        self.lines.contains(line)
    }

    /// Appends a line, failing if it is already present.
    pub fn with_line(&self, line: Line) -> Result<Arrangement, ArrangementError> {
        if let Some(i) = self.lines.iter().position(|l| *l == line) {
            return Err(ArrangementError::DuplicateLine(i, self.lines.len()));
        }
        let mut lines = self.lines.clone();
        lines.push(line);
        Ok(Arrangement { lines })
    }

    pub fn lines_sorted(&self) -> Vec<Line> {
        let mut v = self.lines.clone();
        v.sort();
        v
    }

    /// Hex SHA-256 of the sorted canonical lines. Two arrangements share a
    /// hash iff they are the same set of lines.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for l in self.lines_sorted() {
            let c = l.coeffs();
            hasher.update(format!("{},{},{};", c[0], c[1], c[2]).as_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// The defining polynomial `Q = Π α_i`, exactly.
    pub fn defining_polynomial(&self) -> HomPoly<BigInt> {
        self.lines
            .iter()
            .fold(HomPoly::from_coeffs(0, vec![BigInt::one()]), |acc, l| {
                acc.mul(&l.linear_form())
            })
    }
}

/// Builds an arrangement, preserving order and rejecting projective
/// duplicates.
pub fn build_arrangement(lines: Vec<Line>) -> Result<Arrangement, ArrangementError> {
    if lines.is_empty() {
        return Err(ArrangementError::Empty);
    }
    let mut seen: HashMap<&Line, usize> = HashMap::with_capacity(lines.len());
    for (j, l) in lines.iter().enumerate() {
        if let Some(&i) = seen.get(l) {
            return Err(ArrangementError::DuplicateLine(i, j));
        }
        seen.insert(l, j);
    }
    Ok(Arrangement { lines })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionPoint {
    pub point: Point,
    /// Sorted indices of the lines through the point.
    pub incident_lines: Vec<usize>,
}

impl IntersectionPoint {
    pub fn multiplicity(&self) -> usize {
        self.incident_lines.len()
    }
}

/// Multiplicity profile of an arrangement together with `b2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSummary {
    pub n: usize,
    pub points: Vec<IntersectionPoint>,
    /// `t[m]` = number of points of multiplicity `m`, for `m >= 2`.
    pub t: BTreeMap<usize, usize>,
    pub b2: i64,
    /// Whether `Σ C(m,2) t_m = C(n,2)` held.
    pub pair_count_check: bool,
}

/// Enumerates all pairwise intersections and groups them by point.
pub fn intersection_summary(arr: &Arrangement) -> LatticeSummary {
    let lines = arr.lines();
    let n = lines.len();
    let mut index: HashMap<Point, usize> = HashMap::new();
    let mut points: Vec<IntersectionPoint> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = lines[i].meet(&lines[j]);
            let k = *index.entry(p.clone()).or_insert_with(|| {
                points.push(IntersectionPoint {
                    point: p,
                    incident_lines: Vec::new(),
                });
                points.len() - 1
            });
            let inc = &mut points[k].incident_lines;
            // pairs are visited in lexicographic order, so both pushes keep
            // the list sorted
            if !inc.contains(&i) {
                inc.push(i);
            }
            if !inc.contains(&j) {
                inc.push(j);
            }
        }
    }
    for p in points.iter_mut() {
        p.incident_lines.sort_unstable();
    }
    let mut t = BTreeMap::new();
    for p in &points {
        *t.entry(p.multiplicity()).or_insert(0usize) += 1;
    }
    let b2 = t.iter().map(|(&m, &c)| (m as i64 - 1) * c as i64).sum();
    let pairs: usize = t.iter().map(|(&m, &c)| m * (m - 1) / 2 * c).sum();
    LatticeSummary {
        n,
        points,
        t,
        b2,
        pair_count_check: pairs == n * n.saturating_sub(1) / 2,
    }
}

impl LatticeSummary {
    pub fn t_m(&self, m: usize) -> usize {
        self.t.get(&m).copied().unwrap_or(0)
    }

    /// Profile as the dense list `(t_2, ..., t_max)`.
    pub fn profile(&self) -> Vec<usize> {
        let max = self.t.keys().next_back().copied().unwrap_or(1);
        (2..=max).map(|m| self.t_m(m)).collect()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.t.keys().next_back().copied().unwrap_or(0)
    }

    pub fn count_at_least(&self, m: usize) -> usize {
        self.t.range(m..).map(|(_, &c)| c).sum()
    }

    pub fn discriminant(&self) -> i64 {
        discriminant(self.n, self.b2)
    }

    pub fn candidate_exponents(&self) -> Result<CandidateExponents, ExponentObstruction> {
        candidate_exponents_from(self.n, self.b2)
    }

    pub fn characteristic_polynomial(&self) -> CharPoly {
        CharPoly::new(self.n, self.b2)
    }

    pub fn tjurina(&self) -> TjurinaReport {
        tjurina(self)
    }
}

/// `Δ = (n-1)^2 - 4 (b2 - n + 1)`.
pub fn discriminant(n: usize, b2: i64) -> i64 {
    let n1 = n as i64 - 1;
    n1 * n1 - 4 * (b2 - n1)
}

/// Exact integer square root of a nonnegative perfect square.
pub fn exact_sqrt(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let r = (v as f64).sqrt().round() as i64;
    (r.saturating_sub(1)..=r + 1).find(|s| *s >= 0 && s * s == v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateExponents {
    pub d1: usize,
    pub d2: usize,
    pub discriminant: i64,
}

/// Why an arrangement has no candidate exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExponentObstruction {
    #[error("discriminant {discriminant} is negative")]
    NegativeDiscriminant { discriminant: i64 },
    #[error("discriminant {discriminant} is not a perfect square")]
    NotASquare { discriminant: i64 },
    /// Roots exist but one of them is zero (pencils, or fewer than two lines).
    #[error("exponents ({d1}, {d2}) are not both positive")]
    NonPositive { d1: i64, d2: i64 },
}

pub fn candidate_exponents(arr: &Arrangement) -> Result<CandidateExponents, ExponentObstruction> {
    intersection_summary(arr).candidate_exponents()
}

/// Integer roots of `t^2 - (n-1) t + (b2 - n + 1)`.
pub fn candidate_exponents_from(n: usize, b2: i64) -> Result<CandidateExponents, ExponentObstruction> {
    let disc = discriminant(n, b2);
    if disc < 0 {
        return Err(ExponentObstruction::NegativeDiscriminant { discriminant: disc });
    }
    let s = exact_sqrt(disc).ok_or(ExponentObstruction::NotASquare { discriminant: disc })?;
    let n1 = n as i64 - 1;
    // n - 1 and s have the same parity because Δ ≡ (n-1)^2 mod 4
    let d1 = (n1 - s) / 2;
    let d2 = (n1 + s) / 2;
    if d1 <= 0 {
        return Err(ExponentObstruction::NonPositive { d1, d2 });
    }
    Ok(CandidateExponents {
        d1: d1 as usize,
        d2: d2 as usize,
        discriminant: disc,
    })
}

/// `χ(A, t) = t^3 - n t^2 + b2 t - (b2 - n + 1)` and its reduced quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharPoly {
    /// Coefficients of `t^3, t^2, t, 1`.
    pub cubic: [i64; 4],
    /// Coefficients of `t^2, t, 1`.
    pub quadratic: [i64; 3],
}

impl CharPoly {
    pub fn new(n: usize, b2: i64) -> CharPoly {
        let n = n as i64;
        CharPoly {
            cubic: [1, -n, b2, -(b2 - n + 1)],
            quadratic: [1, -(n - 1), b2 - n + 1],
        }
    }

    pub fn eval_cubic(&self, t: i64) -> i64 {
        self.cubic.iter().fold(0, |acc, &c| acc * t + c)
    }

    pub fn eval_quadratic(&self, t: i64) -> i64 {
        self.quadratic.iter().fold(0, |acc, &c| acc * t + c)
    }

    /// Whether the cubic equals `(t - 1)` times the quadratic.
    pub fn factors_through_one(&self) -> bool {
        let [_, b, c] = self.quadratic;
        // (t - 1)(t^2 + b t + c) = t^3 + (b - 1) t^2 + (c - b) t - c
        self.cubic == [1, b - 1, c - b, -c]
    }

    /// Whether the quadratic equals `(t - d1)(t - d2)`.
    pub fn splits_as(&self, d1: i64, d2: i64) -> bool {
        self.quadratic == [1, -(d1 + d2), d1 * d2]
    }
}

pub fn characteristic_polynomial(arr: &Arrangement) -> CharPoly {
    intersection_summary(arr).characteristic_polynomial()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TjurinaReport {
    /// `n (n - 1) - b2`.
    pub tau: i64,
    /// `Σ_p (m_p - 1)^2`.
    pub from_points: i64,
    /// `(n - 1)^2 - d1 d2` when candidate exponents exist.
    pub from_exponents: Option<i64>,
}

impl TjurinaReport {
    pub fn consistent(&self) -> bool {
        self.tau == self.from_points && self.from_exponents.is_none_or(|t| t == self.tau)
    }
}

pub fn tjurina(summary: &LatticeSummary) -> TjurinaReport {
    let n = summary.n as i64;
    let from_points = summary
        .points
        .iter()
        .map(|p| {
            let m = p.multiplicity() as i64 - 1;
            m * m
        })
        .sum();
    let from_exponents = summary
        .candidate_exponents()
        .ok()
        .map(|e| (n - 1) * (n - 1) - (e.d1 * e.d2) as i64);
    TjurinaReport {
        tau: n * (n - 1) - summary.b2,
        from_points,
        from_exponents,
    }
}

/// `b2(A ∪ {L}) - b2(A)`, from the incidences of `L` with the existing
/// points: each existing point on `L` gains one line, and every line whose
/// meet with `L` is not an existing point creates a new double point. Both
/// counts together give `n - Σ_{p ∈ L} (m_p - 1)`.
pub fn delta_b2(
    arr: &Arrangement,
    summary: &LatticeSummary,
    line: &Line,
) -> Result<i64, ArrangementError> {
    if let Some(i) = arr.lines().iter().position(|l| l == line) {
        return Err(ArrangementError::DuplicateLine(i, arr.n()));
    }
    let absorbed: i64 = summary
        .points
        .iter()
        .filter(|p| line.contains(&p.point))
        .map(|p| p.multiplicity() as i64 - 1)
        .sum();
    Ok(arr.n() as i64 - absorbed)
}

/// JSON arrangement file: `{"lines": [[a, b, c], ...]}` with decimal
/// integer or `p/q` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrangementFile {
    pub lines: Vec<[String; 3]>,
}

pub fn parse_rational(s: &str) -> Result<Rational, ArrangementError> {
    let t = s.trim();
    let bad = || ArrangementError::BadCoefficient(s.to_string());
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => t.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad()),
    }
}

impl ArrangementFile {
    pub fn to_arrangement(&self) -> Result<Arrangement, ArrangementError> {
        let lines = self
            .lines
            .iter()
            .map(|[a, b, c]| {
                canonicalize_line(&parse_rational(a)?, &parse_rational(b)?, &parse_rational(c)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        build_arrangement(lines)
    }

    pub fn from_arrangement(arr: &Arrangement) -> ArrangementFile {
        ArrangementFile {
            lines: arr
                .lines()
                .iter()
                .map(|l| l.coeffs().clone().map(|c| c.to_string()))
                .collect(),
        }
    }
}

pub fn read_arrangement_json(text: &str) -> Result<Arrangement, ArrangementError> {
    let file: ArrangementFile =
        serde_json::from_str(text).map_err(|e| ArrangementError::Format(e.to_string()))?;
    file.to_arrangement()
}

pub fn write_arrangement_json(arr: &Arrangement) -> String {
    serde_json::to_string_pretty(&ArrangementFile::from_arrangement(arr))
        .expect("arrangement serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn canonical_forms() {
        let l = canonicalize_line(&q("2/3"), &q("-4/3"), &q("2")).unwrap();
        assert_eq!(l, Line::new(1, -2, 3).unwrap());
        let l = canonicalize_line(&q("0"), &q("0"), &q("5")).unwrap();
        assert_eq!(l, Line::new(0, 0, 1).unwrap());
        let l = canonicalize_line(&q("-1"), &q("5"), &q("-3")).unwrap();
        assert_eq!(l.coeffs(), &[1.into(), BigInt::from(-5), 3.into()]);
        assert_eq!(
            canonicalize_line(&q("0"), &q("0"), &q("0")),
            Err(ArrangementError::ZeroForm)
        );
    }

    #[test]
    fn duplicate_lines_are_rejected() {
        let x = Line::new(1, 0, 0).unwrap();
        let two_x = Line::new(2, 0, 0).unwrap();
        assert_eq!(
            build_arrangement(vec![x, two_x]),
            Err(ArrangementError::DuplicateLine(0, 1))
        );
        assert_eq!(build_arrangement(vec![]), Err(ArrangementError::Empty));
    }

    #[test]
    fn boolean_invariants() {
        let a = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        let s = intersection_summary(&a);
        assert_eq!(s.t_m(2), 3);
        assert_eq!(s.b2, 3);
        assert!(s.pair_count_check);
        let e = s.candidate_exponents().unwrap();
        assert_eq!((e.d1, e.d2, e.discriminant), (1, 1, 0));
        let chi = s.characteristic_polynomial();
        assert_eq!(chi.cubic, [1, -3, 3, -1]);
        assert!(chi.splits_as(1, 1));
        assert_eq!(s.tjurina().tau, 3);
        assert!(s.tjurina().consistent());
    }

    #[test]
    fn generic_four_lines_have_no_exponents() {
        let a = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]).unwrap();
        let s = intersection_summary(&a);
        assert_eq!(s.b2, 6);
        assert_eq!(
            s.candidate_exponents(),
            Err(ExponentObstruction::NegativeDiscriminant { discriminant: -3 })
        );
    }

    #[test]
    fn exponents_from_published_counts() {
        let e = candidate_exponents_from(13, 48).unwrap();
        assert_eq!((e.d1, e.d2, e.discriminant), (6, 6, 0));
        let e = candidate_exponents_from(19, 95).unwrap();
        assert_eq!((e.d1, e.d2, e.discriminant), (7, 11, 16));
        assert_eq!(
            candidate_exponents_from(5, 6),
            Err(ExponentObstruction::NotASquare { discriminant: 8 })
        );
        let chi = CharPoly::new(13, 48);
        assert_eq!(chi.cubic, [1, -13, 48, -36]);
        assert!(chi.splits_as(6, 6));
        assert_eq!(CharPoly::new(20, 109).quadratic, [1, -19, 90]);
    }

    #[test]
    fn pencil_has_zero_exponent() {
        let a = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [1, 1, 0]]).unwrap();
        let s = intersection_summary(&a);
        assert_eq!(s.b2, 2);
        assert_eq!(
            s.candidate_exponents(),
            Err(ExponentObstruction::NonPositive { d1: 0, d2: 2 })
        );
    }

    #[test]
    fn delta_b2_examples() {
        let a = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        let s = intersection_summary(&a);
        assert_eq!(delta_b2(&a, &s, &Line::new(1, 1, 1).unwrap()), Ok(3));
        assert_eq!(delta_b2(&a, &s, &Line::new(1, 1, 0).unwrap()), Ok(2));
        assert_eq!(
            delta_b2(&a, &s, &Line::new(0, 1, 0).unwrap()),
            Err(ArrangementError::DuplicateLine(1, 3))
        );
    }

    #[test]
    fn file_round_trip_is_canonical() {
        let text = r#"{"lines": [["1", "3/2", "-3/2"], ["0", "-2", "4"]]}"#;
        let a = read_arrangement_json(text).unwrap();
        assert_eq!(a.lines()[0], Line::new(2, 3, -3).unwrap());
        assert_eq!(a.lines()[1], Line::new(0, 1, -2).unwrap());
        let back = read_arrangement_json(&write_arrangement_json(&a)).unwrap();
        assert_eq!(back, a);
        assert!(read_arrangement_json(r#"{"lines": [["1", "x", "0"]]}"#).is_err());
        assert!(read_arrangement_json(r#"{"lines": [["1", "1/0", "0"]]}"#).is_err());
    }

    #[test]
    fn hash_ignores_order() {
        let a = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        let b = Arrangement::from_triples(&[[0, 0, 1], [1, 0, 0], [0, 1, 0]]).unwrap();
        assert_eq!(a.hash(), b.hash());
    }
}
