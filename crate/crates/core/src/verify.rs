//! Exact certification of freeness over the rationals.
//!
//! For kernels at degrees `d1 + d2 = n - 1`, any nonzero Saito determinant
//! is divisible by `Q` and has degree `n`, so it is a nonzero multiple of
//! `Q`. The map is bilinear, so it is either nonzero on some pair of basis
//! vectors or identically zero; a scan over basis pairs therefore either
//! produces a certificate or proves that no free basis with these exponents
//! exists.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{intersection_summary, parse_rational, Arrangement, ExponentObstruction, Line, Rational};
use crate::derivation::{derivation_matrix, null_space_modulo_euler};
use crate::poly::{basis_size, monomial_index, saito_determinant, Derivation, HomPoly, MonomialBasis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("degrees {d1} + {d2} do not add up to n - 1 = {expected}")]
    DegreeMismatch { d1: usize, d2: usize, expected: usize },
    #[error("nonzero Saito determinant is not proportional to Q (pair {pair:?}); this is a bug")]
    InternalInconsistency { pair: (usize, usize) },
    #[error("malformed certificate: {0}")]
    Format(String),
}

/// Exact witness `det M(θ_E, θ1, θ2) = c Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreenessCertificate {
    pub d1: usize,
    pub d2: usize,
    /// Stacked `(f, g, h)` coefficients in the degree-`d1` basis.
    pub theta1: Vec<Rational>,
    pub theta2: Vec<Rational>,
    pub c: Rational,
    /// Coefficients of the determinant in the degree-`n` basis.
    pub determinant: Vec<Rational>,
    /// Hash of the arrangement this certifies.
    pub arrangement_hash: String,
}

/// Proof that no free basis exists at the given exponents: the Saito
/// determinant vanishes on every pair of kernel basis vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    pub d1: usize,
    pub d2: usize,
    pub k1: usize,
    pub k2: usize,
    /// Kernel dimensions modulo Euler multiples.
    pub quotient1: usize,
    pub quotient2: usize,
    pub pairs_checked: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerificationOutcome {
    Certified(FreenessCertificate),
    /// A statement about these exponents only.
    NotFreeAtExponents(Refutation),
    NoCandidateExponents(ExponentObstruction),
}

impl VerificationOutcome {
    pub fn certificate(&self) -> Option<&FreenessCertificate> {
        match self {
            VerificationOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certificate().is_some()
    }
}

fn to_rational(v: &[BigInt]) -> Vec<Rational> {
    v.iter().cloned().map(Rational::from_integer).collect()
}

/// Exact `x(g1h2 - g2h1) - y(f1h2 - f2h1) + z(f1g2 - f2g1)` for stacked
/// coefficient vectors of degrees `d1` and `d2`.
pub fn exact_determinant(
    arr: &Arrangement,
    theta1: &[Rational],
    d1: usize,
    theta2: &[Rational],
    d2: usize,
) -> Result<HomPoly<Rational>, VerifyError> {
    let n = arr.n();
    if d1 + d2 + 1 != n || theta1.len() != 3 * basis_size(d1) || theta2.len() != 3 * basis_size(d2) {
        return Err(VerifyError::DegreeMismatch {
            d1,
            d2,
            expected: n.saturating_sub(1),
        });
    }
    let t1 = Derivation::from_stacked(d1, theta1);
    let t2 = Derivation::from_stacked(d2, theta2);
    Ok(saito_determinant(&t1, &t2))
}

fn bit_size(v: &[BigInt]) -> u64 {
    v.iter().map(|x| x.bits()).sum()
}

/// Checks `det = c Q` coefficientwise and returns `c`, or `None` if the
/// determinant is not proportional to `Q` (or is zero).
fn proportionality(det: &HomPoly<BigInt>, q: &HomPoly<BigInt>) -> Option<Rational> {
    let beta = q.coeffs().iter().position(|c| !c.is_zero())?;
    let c = Rational::new(det.coeffs()[beta].clone(), q.coeffs()[beta].clone());
    if c.is_zero() {
        return None;
    }
    let ok = det
        .coeffs()
        .iter()
        .zip(q.coeffs())
        .all(|(d, qq)| Rational::from_integer(d.clone()) == &c * Rational::from_integer(qq.clone()));
    ok.then_some(c)
}

fn make_certificate(
    arr: &Arrangement,
    d1: usize,
    d2: usize,
    theta1: &[BigInt],
    theta2: &[BigInt],
    det: &HomPoly<BigInt>,
    c: Rational,
) -> FreenessCertificate {
    FreenessCertificate {
        d1,
        d2,
        theta1: to_rational(theta1),
        theta2: to_rational(theta2),
        c,
        determinant: to_rational(det.coeffs()),
        arrangement_hash: arr.hash(),
    }
}

/// Float witness from the Saito functional, tried before the basis scan.
#[derive(Debug, Clone, Copy)]
pub struct FloatHint<'a> {
    pub theta1: &'a [f64],
    pub theta2: &'a [f64],
}

/// Best rational approximation with denominator at most `max_den`, by
/// continued fractions.
pub fn rationalize(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut y = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let p2 = a.saturating_mul(p1).saturating_add(p0);
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a as f64;
        if frac < 1e-12 {
            break;
        }
        y = 1.0 / frac;
    }
    if q1 == 0 {
        return Rational::zero();
    }
    let r = Rational::new(p1.into(), q1.into());
    if neg {
        -r
    } else {
        r
    }
}

/// Clears denominators of a rational vector into a primitive integer one.
fn integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    crate::derivation::primitive_vector(&ints)
}

fn rationalized(theta: &[f64]) -> Vec<BigInt> {
    let scale = theta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return vec![BigInt::zero(); theta.len()];
    }
    let q: Vec<Rational> = theta.iter().map(|x| rationalize(x / scale, 1_000_000)).collect();
    integer_vector(&q)
}

/// Certifies or refutes freeness with exponents `(d1, d2)`.
pub fn verify_free(arr: &Arrangement, d1: usize, d2: usize) -> Result<VerificationOutcome, VerifyError> {
    verify_free_with_hint(arr, d1, d2, None)
}

/// [`verify_free`] at the candidate exponents of the arrangement.
pub fn verify_auto(arr: &Arrangement) -> Result<VerificationOutcome, VerifyError> {
    match intersection_summary(arr).candidate_exponents() {
        Ok(e) => verify_free(arr, e.d1, e.d2),
        Err(obstruction) => Ok(VerificationOutcome::NoCandidateExponents(obstruction)),
    }
}

const SCAN_CHUNK: usize = 64;

pub fn verify_free_with_hint(
    arr: &Arrangement,
    d1: usize,
    d2: usize,
    hint: Option<FloatHint<'_>>,
) -> Result<VerificationOutcome, VerifyError> {
    let n = arr.n();
    if d1 == 0 || d1 + d2 + 1 != n {
        return Err(VerifyError::DegreeMismatch {
            d1,
            d2,
            expected: n.saturating_sub(1),
        });
    }
    let m1 = derivation_matrix(arr, d1);
    let m2 = derivation_matrix(arr, d2);
    let q = arr.defining_polynomial();

    if let Some(h) = hint {
        if h.theta1.len() == m1.ncols && h.theta2.len() == m2.ncols {
            let t1 = rationalized(h.theta1);
            let t2 = rationalized(h.theta2);
            if m1.annihilates(&t1) && m2.annihilates(&t2) {
                let det = saito_determinant(&Derivation::from_stacked(d1, &t1), &Derivation::from_stacked(d2, &t2));
                if let Some(c) = proportionality(&det, &q) {
                    return Ok(VerificationOutcome::Certified(make_certificate(arr, d1, d2, &t1, &t2, &det, c)));
                }
            }
            log::debug!("rationalized float witness did not certify; scanning basis pairs");
        }
    }

    let (k1, k2) = rayon::join(|| null_space_modulo_euler(&m1), || null_space_modulo_euler(&m2));
    let by_size = |k: &crate::derivation::KernelModuloEuler| {
        let mut v: Vec<(u64, usize)> = k.complement.iter().map(|x| bit_size(x)).zip(0..).collect();
        v.sort();
        v
    };
    let s1 = by_size(&k1);
    let s2 = by_size(&k2);
    let mut pairs: Vec<(u64, usize, usize)> = s1
        .iter()
        .flat_map(|&(b1, i)| s2.iter().map(move |&(b2, j)| (b1 + b2, i, j)))
        .collect();
    pairs.sort();
    let derivs1: Vec<Derivation<BigInt>> = k1.complement.iter().map(|v| Derivation::from_stacked(d1, v)).collect();
    let derivs2: Vec<Derivation<BigInt>> = k2.complement.iter().map(|v| Derivation::from_stacked(d2, v)).collect();

    for chunk in pairs.chunks(SCAN_CHUNK) {
        let hit = chunk.par_iter().find_map_first(|&(_, i, j)| {
            let det = saito_determinant(&derivs1[i], &derivs2[j]);
            (!det.is_zero()).then_some((i, j, det))
        });
        if let Some((i, j, det)) = hit {
            let c = proportionality(&det, &q).ok_or(VerifyError::InternalInconsistency { pair: (i, j) })?;
            let cert = make_certificate(arr, d1, d2, &k1.complement[i], &k2.complement[j], &det, c);
            return Ok(VerificationOutcome::Certified(cert));
        }
    }
    Ok(VerificationOutcome::NotFreeAtExponents(Refutation {
        d1,
        d2,
        k1: k1.nullity,
        k2: k2.nullity,
        quotient1: k1.complement.len(),
        quotient2: k2.complement.len(),
        pairs_checked: pairs.len(),
    }))
}

/// Whether `p` vanishes identically on `line`, by substituting the line's
/// parametrization `x_v = -(Σ_{o ≠ v} a_o x_o) / a_v` for a variable `v`
/// with nonzero coefficient.
pub fn vanishes_on_line(p: &HomPoly<Rational>, line: &Line) -> bool {
    let coeffs: Vec<Rational> = line.coeffs().iter().cloned().map(Rational::from_integer).collect();
    let v = coeffs.iter().position(|c| !c.is_zero()).expect("line is nonzero");
    let others: Vec<usize> = (0..3).filter(|&o| o != v).collect();
    let r: Vec<Rational> = others.iter().map(|&o| -(&coeffs[o] / &coeffs[v])).collect();
    let d = p.degree();
    // binary form in (x_{others[0]}, x_{others[1]}), indexed by the first power
    let mut out = vec![Rational::zero(); d + 1];
    let binom = |n: u32, k: u32| -> BigInt {
        (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
    };
    for (e, c) in p.terms() {
        let ev = e[v];
        let e0 = e[others[0]];
        for l in 0..=ev {
            // (r0 x0 + r1 x1)^ev: term with x0^l
            let term = Rational::from_integer(binom(ev, l)) * pow(&r[0], l) * pow(&r[1], ev - l);
            out[(e0 + l) as usize] += c * term;
        }
    }
    out.iter().all(|x| x.is_zero())
}

fn pow(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// Whether every line divides `θ(α_i) = a f + b g + c h`.
pub fn is_logarithmic(arr: &Arrangement, theta: &Derivation<Rational>) -> Result<(), usize> {
    for (i, line) in arr.lines().iter().enumerate() {
        let [a, b, c] = line.coeffs().clone().map(Rational::from_integer);
        let p = theta.f.scale(&a).add(&theta.g.scale(&b)).add(&theta.h.scale(&c));
        if !vanishes_on_line(&p, line) {
            return Err(i);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckFailure {
    ArrangementMismatch { expected: String, found: String },
    ExponentMismatch { d1: usize, d2: usize, n: usize },
    Malformed { detail: String },
    KernelMembership { derivation: usize, line: usize },
    ZeroScalar,
    DeterminantMismatch,
    StoredDeterminantMismatch,
}

impl std::fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckFailure::ArrangementMismatch { .. } => write!(f, "certificate belongs to a different arrangement"),
            CheckFailure::ExponentMismatch { d1, d2, n } => write!(f, "exponents ({d1}, {d2}) do not sum to n - 1 = {}", n - 1),
            CheckFailure::Malformed { detail } => write!(f, "malformed certificate: {detail}"),
            CheckFailure::KernelMembership { derivation, line } => {
                write!(f, "θ{derivation} is not logarithmic along line {line}")
            }
            CheckFailure::ZeroScalar => write!(f, "c is zero"),
            CheckFailure::DeterminantMismatch => write!(f, "determinant ≠ c·Q"),
            CheckFailure::StoredDeterminantMismatch => write!(f, "stored determinant differs from the recomputed one"),
        }
    }
}

/// Re-derives every claim of a certificate from scratch.
pub fn check_certificate(arr: &Arrangement, cert: &FreenessCertificate) -> Result<(), CheckFailure> {
    let n = arr.n();
    let found = arr.hash();
    if !cert.arrangement_hash.is_empty() && cert.arrangement_hash != found {
        return Err(CheckFailure::ArrangementMismatch {
            expected: cert.arrangement_hash.clone(),
            found,
        });
    }
    if cert.d1 + cert.d2 + 1 != n {
        return Err(CheckFailure::ExponentMismatch {
            d1: cert.d1,
            d2: cert.d2,
            n,
        });
    }
    for (which, theta, d) in [(1, &cert.theta1, cert.d1), (2, &cert.theta2, cert.d2)] {
        if theta.len() != 3 * basis_size(d) {
            return Err(CheckFailure::Malformed {
                detail: format!("θ{which} has {} coefficients, expected {}", theta.len(), 3 * basis_size(d)),
            });
        }
        let t = Derivation::from_stacked(d, theta);
        is_logarithmic(arr, &t).map_err(|line| CheckFailure::KernelMembership { derivation: which, line })?;
    }
    if cert.c.is_zero() {
        return Err(CheckFailure::ZeroScalar);
    }
    let det = saito_determinant(
        &Derivation::from_stacked(cert.d1, &cert.theta1),
        &Derivation::from_stacked(cert.d2, &cert.theta2),
    );
    let q = arr
        .lines()
        .iter()
        .fold(HomPoly::from_coeffs(0, vec![Rational::one()]), |acc, l| {
            let [a, b, c] = l.coeffs().clone().map(Rational::from_integer);
            acc.mul(&HomPoly::linear(a, b, c))
        });
    if det != q.scale(&cert.c) {
        return Err(CheckFailure::DeterminantMismatch);
    }
    if !cert.determinant.is_empty() && cert.determinant != det.coeffs() {
        return Err(CheckFailure::StoredDeterminantMismatch);
    }
    Ok(())
}

/// Serialized certificate. Polynomials are maps from `"a,b,c"` exponent
/// keys to `"p/q"` strings; zero coefficients are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub arrangement_hash: String,
    pub exponents: [usize; 2],
    pub theta1: DerivationFile,
    pub theta2: DerivationFile,
    pub c: String,
    #[serde(default)]
    pub determinant: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationFile {
    pub f: BTreeMap<String, String>,
    pub g: BTreeMap<String, String>,
    pub h: BTreeMap<String, String>,
}

pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn poly_to_map(coeffs: &[Rational], degree: usize) -> BTreeMap<String, String> {
    let basis = MonomialBasis::new(degree);
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            let e = basis.get(i);
            (format!("{},{},{}", e[0], e[1], e[2]), format_rational(c))
        })
        .collect()
}

fn map_to_poly(map: &BTreeMap<String, String>, degree: usize) -> Result<Vec<Rational>, VerifyError> {
    let mut out = vec![Rational::zero(); basis_size(degree)];
    for (k, v) in map {
        let e: Vec<u32> = k
            .split(',')
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| VerifyError::Format(format!("bad monomial key {k:?}")))?;
        if e.len() != 3 || e.iter().sum::<u32>() as usize != degree {
            return Err(VerifyError::Format(format!("monomial {k:?} is not of degree {degree}")));
        }
        out[monomial_index([e[0], e[1], e[2]])] =
            parse_rational(v).map_err(|_| VerifyError::Format(format!("bad coefficient {v:?}")))?;
    }
    Ok(out)
}

fn derivation_to_file(stacked: &[Rational], degree: usize) -> DerivationFile {
    let nd = basis_size(degree);
    DerivationFile {
        f: poly_to_map(&stacked[..nd], degree),
        g: poly_to_map(&stacked[nd..2 * nd], degree),
        h: poly_to_map(&stacked[2 * nd..], degree),
    }
}

fn derivation_from_file(file: &DerivationFile, degree: usize) -> Result<Vec<Rational>, VerifyError> {
    let mut v = map_to_poly(&file.f, degree)?;
    v.extend(map_to_poly(&file.g, degree)?);
    v.extend(map_to_poly(&file.h, degree)?);
    Ok(v)
}

impl CertificateFile {
    pub fn from_certificate(cert: &FreenessCertificate) -> CertificateFile {
        let n = cert.d1 + cert.d2 + 1;
        CertificateFile {
            arrangement_hash: cert.arrangement_hash.clone(),
            exponents: [cert.d1, cert.d2],
            theta1: derivation_to_file(&cert.theta1, cert.d1),
            theta2: derivation_to_file(&cert.theta2, cert.d2),
            c: format_rational(&cert.c),
            determinant: poly_to_map(&cert.determinant, n),
        }
    }

    pub fn to_certificate(&self) -> Result<FreenessCertificate, VerifyError> {
        let [d1, d2] = self.exponents;
        let n = d1 + d2 + 1;
        let determinant = if self.determinant.is_empty() {
            Vec::new()
        } else {
            map_to_poly(&self.determinant, n)?
        };
        Ok(FreenessCertificate {
            d1,
            d2,
            theta1: derivation_from_file(&self.theta1, d1)?,
            theta2: derivation_from_file(&self.theta2, d2)?,
            c: parse_rational(&self.c).map_err(|_| VerifyError::Format(format!("bad scalar {:?}", self.c)))?,
            determinant,
            arrangement_hash: self.arrangement_hash.clone(),
        })
    }
}

pub fn write_certificate_json(cert: &FreenessCertificate) -> String {
    serde_json::to_string_pretty(&CertificateFile::from_certificate(cert)).expect("certificate serializes")
}

pub fn read_certificate_json(text: &str) -> Result<FreenessCertificate, VerifyError> {
    let file: CertificateFile = serde_json::from_str(text).map_err(|e| VerifyError::Format(e.to_string()))?;
    file.to_certificate()
}

/// Approximate size of a certificate's coefficients in bits, for logging.
pub fn certificate_bits(cert: &FreenessCertificate) -> u64 {
    cert.theta1
        .iter()
        .chain(&cert.theta2)
        .map(|x| x.numer().bits() + x.denom().bits())
        .max()
        .unwrap_or(0)
}

/// `c` as a float, for display.
pub fn scalar_f64(cert: &FreenessCertificate) -> f64 {
    let n = cert.c.numer().to_f64().unwrap_or(f64::NAN);
    let d = cert.c.denom().to_f64().unwrap_or(f64::NAN);
    if cert.c.is_negative() {
        -(n.abs() / d)
    } else {
        n / d
    }
}
