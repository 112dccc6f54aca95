//! Monomial bases and homogeneous polynomials in `x, y, z`.
//!
//! Every coefficient vector in the crate uses the same graded-lexicographic
//! order with `x > y > z`: within a degree, monomials are sorted by the
//! exponent of `x` descending, then by the exponent of `y` descending.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

/// Exponent triple `(a, b, c)` of the monomial `x^a y^b z^c`.
pub type Exponent = [u32; 3];

/// Number of monomials of degree `d` in three variables, `C(d + 2, 2)`.
pub fn basis_size(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Position of a monomial inside the basis of its own degree.
///
/// The position only depends on `b + c` and `c`, which is what makes the
/// graded-lex order convenient: `r = b + c` counts how far the `x` exponent
/// is below the degree.
#[inline]
pub fn monomial_index(e: Exponent) -> usize {
    let r = (e[1] + e[2]) as usize;
    r * (r + 1) / 2 + e[2] as usize
}

/// Ordered monomial basis of `S_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    degree: usize,
    monomials: Vec<Exponent>,
}

impl MonomialBasis {
    pub fn new(degree: usize) -> Self {
        let d = degree as u32;
        let mut monomials = Vec::with_capacity(basis_size(degree));
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                monomials.push([a, b, d - a - b]);
            }
        }
        MonomialBasis { degree, monomials }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn get(&self, i: usize) -> Exponent {
        self.monomials[i]
    }

    pub fn index_of(&self, e: Exponent) -> Option<usize> {
        if (e[0] + e[1] + e[2]) as usize != self.degree {
            return None;
        }
        Some(monomial_index(e))
    }
}

/// Renders a monomial like `x^2*y*z`; the constant monomial is `1`.
pub fn format_monomial(e: Exponent) -> String {
    let mut parts = Vec::new();
    for (var, &p) in ["x", "y", "z"].iter().zip(e.iter()) {
        match p {
            0 => {}
            1 => parts.push(var.to_string()),
            _ => parts.push(format!("{var}^{p}")),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Homogeneous polynomial stored as a dense coefficient vector in the
/// monomial basis of its degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomPoly<T> {
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Clone + Zero> HomPoly<T> {
    pub fn zero(degree: usize) -> Self {
        HomPoly {
            degree,
            coeffs: vec![T::zero(); basis_size(degree)],
        }
    }

    /// Panics if the vector length does not match `C(degree + 2, 2)`.
    pub fn from_coeffs(degree: usize, coeffs: Vec<T>) -> Self {
        assert_eq!(
            coeffs.len(),
            basis_size(degree),
            "coefficient vector length does not match degree {degree}"
        );
        HomPoly { degree, coeffs }
    }

    /// The linear form `a x + b y + c z`.
    pub fn linear(a: T, b: T, c: T) -> Self {
        HomPoly {
            degree: 1,
            coeffs: vec![a, b, c],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, e: Exponent) -> &T {
        &self.coeffs[monomial_index(e)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Iterates over `(exponent, coefficient)` pairs with nonzero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &T)> + '_ {
        let basis = MonomialBasis::new(self.degree);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (basis.get(i), c))
    }
}

impl<T> HomPoly<T>
where
    T: Clone + Zero + Mul<Output = T> + Add<Output = T>,
{
    pub fn mul(&self, other: &HomPoly<T>) -> HomPoly<T> {
        let degree = self.degree + other.degree;
        let mut out = vec![T::zero(); basis_size(degree)];
        let lhs = MonomialBasis::new(self.degree);
        let rhs = MonomialBasis::new(other.degree);
        let rhs_terms: Vec<(Exponent, &T)> = other
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (rhs.get(j), c))
            .collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = lhs.get(i);
            for (eb, b) in &rhs_terms {
                let idx = monomial_index([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]);
                out[idx] = out[idx].clone() + a.clone() * (*b).clone();
            }
        }
        HomPoly { degree, coeffs: out }
    }

    /// Multiplies by the variable `x` (0), `y` (1) or `z` (2).
    pub fn mul_var(&self, var: usize) -> HomPoly<T> {
        let degree = self.degree + 1;
        let mut out = vec![T::zero(); basis_size(degree)];
        let basis = MonomialBasis::new(self.degree);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut e = basis.get(i);
            e[var] += 1;
            out[monomial_index(e)] = a.clone();
        }
        HomPoly { degree, coeffs: out }
    }

    pub fn scale(&self, s: &T) -> HomPoly<T> {
        HomPoly {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }
}

impl<T> HomPoly<T>
where
    T: Clone + Zero + Add<Output = T> + Sub<Output = T>,
{
    pub fn add(&self, other: &HomPoly<T>) -> HomPoly<T> {
        assert_eq!(self.degree, other.degree);
        HomPoly {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &HomPoly<T>) -> HomPoly<T> {
        assert_eq!(self.degree, other.degree);
        HomPoly {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

/// Homogeneous derivation `f ∂x + g ∂y + h ∂z` with components of a common
/// degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation<T> {
    pub f: HomPoly<T>,
    pub g: HomPoly<T>,
    pub h: HomPoly<T>,
}

impl<T: Clone + Zero> Derivation<T> {
    /// Splits a stacked coefficient vector `(f, g, h)` of length `3 N_d`.
    pub fn from_stacked(degree: usize, v: &[T]) -> Self {
        let n = basis_size(degree);
        assert_eq!(v.len(), 3 * n, "stacked vector has the wrong length");
        Derivation {
            f: HomPoly::from_coeffs(degree, v[..n].to_vec()),
            g: HomPoly::from_coeffs(degree, v[n..2 * n].to_vec()),
            h: HomPoly::from_coeffs(degree, v[2 * n..].to_vec()),
        }
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    pub fn stacked(&self) -> Vec<T> {
        let mut v = self.f.coeffs().to_vec();
        v.extend_from_slice(self.g.coeffs());
        v.extend_from_slice(self.h.coeffs());
        v
    }
}

/// Expansion of `det M(θ_E, θ1, θ2)` along the Euler row:
/// `x (g1 h2 - g2 h1) - y (f1 h2 - f2 h1) + z (f1 g2 - f2 g1)`.
pub fn saito_determinant<T>(t1: &Derivation<T>, t2: &Derivation<T>) -> HomPoly<T>
where
    T: Clone + Zero + Mul<Output = T> + Add<Output = T> + Sub<Output = T> + Neg<Output = T>,
{
    let gh = t1.g.mul(&t2.h).sub(&t2.g.mul(&t1.h));
    let fh = t1.f.mul(&t2.h).sub(&t2.f.mul(&t1.h));
    let fg = t1.f.mul(&t2.g).sub(&t2.f.mul(&t1.g));
    gh.mul_var(0).sub(&fh.mul_var(1)).add(&fg.mul_var(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bases_follow_graded_lex() {
        assert_eq!(MonomialBasis::new(0).monomials(), &[[0, 0, 0]]);
        assert_eq!(
            MonomialBasis::new(1).monomials(),
            &[[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        );
        assert_eq!(
            MonomialBasis::new(2).monomials(),
            &[[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]]
        );
    }

    #[test]
    fn index_formula_matches_enumeration() {
        for d in 0..15 {
            let basis = MonomialBasis::new(d);
            assert_eq!(basis.len(), basis_size(d));
            for (i, &e) in basis.monomials().iter().enumerate() {
                assert_eq!(monomial_index(e), i);
            }
        }
    }

    #[test]
    fn difference_of_squares() {
        let p = HomPoly::<i64>::linear(1, 1, 0);
        let m = HomPoly::<i64>::linear(1, -1, 0);
        let prod = p.mul(&m);
        assert_eq!(*prod.coeff([2, 0, 0]), 1);
        assert_eq!(*prod.coeff([0, 2, 0]), -1);
        assert_eq!(*prod.coeff([1, 1, 0]), 0);
    }

    #[test]
    fn determinant_of_coordinate_fields() {
        // θ1 = x∂x, θ2 = y∂y
        let t1 = Derivation::from_stacked(1, &[1i64, 0, 0, 0, 0, 0, 0, 0, 0]);
        let t2 = Derivation::from_stacked(1, &[0i64, 0, 0, 0, 1, 0, 0, 0, 0]);
        let det = saito_determinant(&t1, &t2);
        assert_eq!(det.degree(), 3);
        assert_eq!(*det.coeff([1, 1, 1]), 1);
        assert_eq!(det.coeffs().iter().filter(|&&c| c != 0).count(), 1);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_monomial([2, 1, 0]), "x^2*y");
        assert_eq!(format_monomial([0, 0, 0]), "1");
    }
}
