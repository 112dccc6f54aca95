//! The bilinear map `(α1, α2) ↦ det M(θ_E, V1 α1, V2 α2)` in the degree-`n`
//! monomial basis.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::arrangement::Arrangement;
use crate::derivation::{q_coefficient_vector, DerivationError, NullBasisFloat};
use crate::poly::{basis_size, monomial_index, saito_determinant, Derivation, MonomialBasis};

/// Default cap on `N_out * k1 * k2` for dense assembly.
pub const DEFAULT_TENSOR_BUDGET: usize = 2_000_000_000;

/// `(component of θ1, component of θ2, multiplying variable, sign)` for the
/// six products in `x(g1h2 - g2h1) - y(f1h2 - f2h1) + z(f1g2 - f2g1)`.
const TERMS: [(usize, usize, usize, f64); 6] = [
    (1, 2, 0, 1.0),
    (2, 1, 0, -1.0),
    (0, 2, 1, -1.0),
    (2, 0, 1, 1.0),
    (0, 1, 2, 1.0),
    (1, 0, 2, -1.0),
];

/// Dense tensor `T` of shape `N_out x k1 x k2` and the target vector `q`.
#[derive(Debug, Clone)]
pub struct SaitoTensor {
    pub n_out: usize,
    pub k1: usize,
    pub k2: usize,
    /// Stored as `[i][β][j]` so each slice over the first parameter is
    /// contiguous.
    data: Vec<f64>,
    pub q: Vec<f64>,
}

impl SaitoTensor {
    pub fn get(&self, beta: usize, i: usize, j: usize) -> f64 {
        self.data[(i * self.n_out + beta) * self.k2 + j]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Builds a tensor from an entry function; used by tests and by callers
    /// that want to run the optimizer on synthetic data.
    pub fn from_fn(n_out: usize, k1: usize, k2: usize, q: Vec<f64>, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        assert_eq!(q.len(), n_out);
        let mut data = vec![0.0; n_out * k1 * k2];
        for i in 0..k1 {
            for beta in 0..n_out {
                for j in 0..k2 {
                    data[(i * n_out + beta) * k2 + j] = f(beta, i, j);
                }
            }
        }
        SaitoTensor { n_out, k1, k2, data, q }
    }
}

/// Polynomial components of each null-basis column, kept for the lazy path.
#[derive(Debug, Clone)]
pub struct LazyBilinear {
    pub n_out: usize,
    cols1: Vec<Derivation<f64>>,
    v2: DMatrix<f64>,
    d2: usize,
    pub q: Vec<f64>,
}

/// The Saito bilinear map, either materialized or evaluated on demand.
#[derive(Debug, Clone)]
pub enum BilinearMap {
    Dense(SaitoTensor),
    Lazy(LazyBilinear),
}

fn rows_of(v: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..v.nrows()).map(|r| v.row(r).iter().copied().collect()).collect()
}

fn derivation_of(v: &DMatrix<f64>, degree: usize, alpha: &[f64]) -> Derivation<f64> {
    let theta = v * DVector::from_column_slice(alpha);
    Derivation::from_stacked(degree, theta.as_slice())
}

/// Assembles the bilinear map for null bases at degrees `d1 + d2 = n - 1`.
/// Falls back to the lazy representation when the dense tensor would exceed
/// `budget` entries.
pub fn assemble_saito_tensor(
    arr: &Arrangement,
    v1: &NullBasisFloat,
    v2: &NullBasisFloat,
    budget: usize,
) -> Result<BilinearMap, DerivationError> {
    let n = arr.n();
    let (d1, d2) = (v1.degree, v2.degree);
    if d1 + d2 + 1 != n {
        return Err(DerivationError::DegreeMismatch {
            d1,
            d2,
            expected: n - 1,
        });
    }
    let q = q_coefficient_vector(arr).float;
    let n_out = basis_size(n);
    let (k1, k2) = (v1.nullity(), v2.nullity());
    let entries = n_out.saturating_mul(k1).saturating_mul(k2);
    log::debug!("Saito tensor {n_out} x {k1} x {k2} = {entries} entries");
    if entries > budget {
        log::info!("tensor of {entries} entries exceeds budget {budget}; contracting lazily");
        let cols1 = (0..k1)
            .map(|i| Derivation::from_stacked(d1, v1.v.column(i).as_slice()))
            .collect();
        return Ok(BilinearMap::Lazy(LazyBilinear {
            n_out,
            cols1,
            v2: v2.v.clone(),
            d2,
            q,
        }));
    }
    let (n1, n2) = (basis_size(d1), basis_size(d2));
    let rows1 = rows_of(&v1.v);
    let rows2 = rows_of(&v2.v);
    let mono1 = MonomialBasis::new(d1);
    let mono2 = MonomialBasis::new(d2);
    let mut data = vec![0.0; n_out * k1 * k2];
    data.par_chunks_mut((n_out * k2).max(1))
        .enumerate()
        .for_each(|(i, slab)| {
            for &(c1, c2, var, sign) in &TERMS {
                for m1 in 0..n1 {
                    let a = sign * rows1[c1 * n1 + m1][i];
                    if a == 0.0 {
                        continue;
                    }
                    let e1 = mono1.get(m1);
                    for m2 in 0..n2 {
                        let e2 = mono2.get(m2);
                        let mut e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                        e[var] += 1;
                        let beta = monomial_index(e);
                        let dst = &mut slab[beta * k2..(beta + 1) * k2];
                        for (d, b) in dst.iter_mut().zip(&rows2[c2 * n2 + m2]) {
                            *d += a * b;
                        }
                    }
                }
            }
        });
    Ok(BilinearMap::Dense(SaitoTensor { n_out, k1, k2, data, q }))
}

impl BilinearMap {
    pub fn n_out(&self) -> usize {
        match self {
            BilinearMap::Dense(t) => t.n_out,
            BilinearMap::Lazy(l) => l.n_out,
        }
    }

    pub fn k1(&self) -> usize {
        match self {
            BilinearMap::Dense(t) => t.k1,
            BilinearMap::Lazy(l) => l.cols1.len(),
        }
    }

    pub fn k2(&self) -> usize {
        match self {
            BilinearMap::Dense(t) => t.k2,
            BilinearMap::Lazy(l) => l.v2.ncols(),
        }
    }

    pub fn q(&self) -> &[f64] {
        match self {
            BilinearMap::Dense(t) => &t.q,
            BilinearMap::Lazy(l) => &l.q,
        }
    }

    /// `A1` with `T(α1, α2) = A1 α1`, shape `N_out x k1`.
    pub fn fix_second(&self, alpha2: &[f64]) -> DMatrix<f64> {
        match self {
            BilinearMap::Dense(t) => DMatrix::from_fn(t.n_out, t.k1, |beta, i| {
                let row = &t.data[(i * t.n_out + beta) * t.k2..(i * t.n_out + beta + 1) * t.k2];
                row.iter().zip(alpha2).map(|(a, b)| a * b).sum()
            }),
            BilinearMap::Lazy(l) => {
                let theta2 = derivation_of(&l.v2, l.d2, alpha2);
                let cols: Vec<Vec<f64>> = l
                    .cols1
                    .par_iter()
                    .map(|t1| saito_determinant(t1, &theta2).into_coeffs())
                    .collect();
                DMatrix::from_fn(l.n_out, cols.len(), |beta, i| cols[i][beta])
            }
        }
    }

    /// `A2` with `T(α1, α2) = A2 α2`, shape `N_out x k2`.
    pub fn fix_first(&self, alpha1: &[f64]) -> DMatrix<f64> {
        match self {
            BilinearMap::Dense(t) => {
                let mut out = DMatrix::zeros(t.n_out, t.k2);
                for (i, &a) in alpha1.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for beta in 0..t.n_out {
                        let row = &t.data[(i * t.n_out + beta) * t.k2..(i * t.n_out + beta + 1) * t.k2];
                        for (j, x) in row.iter().enumerate() {
                            out[(beta, j)] += a * x;
                        }
                    }
                }
                out
            }
            BilinearMap::Lazy(l) => {
                let theta1 = l.cols1.iter().zip(alpha1).fold(None, |acc: Option<Derivation<f64>>, (c, &a)| {
                    let scaled = Derivation {
                        f: c.f.scale(&a),
                        g: c.g.scale(&a),
                        h: c.h.scale(&a),
                    };
                    Some(match acc {
                        None => scaled,
                        Some(s) => Derivation {
                            f: s.f.add(&scaled.f),
                            g: s.g.add(&scaled.g),
                            h: s.h.add(&scaled.h),
                        },
                    })
                });
                let theta1 = theta1.expect("k1 >= 1");
                let k2 = l.v2.ncols();
                let cols: Vec<Vec<f64>> = (0..k2)
                    .into_par_iter()
                    .map(|j| {
                        let t2 = Derivation::from_stacked(l.d2, l.v2.column(j).as_slice());
                        saito_determinant(&theta1, &t2).into_coeffs()
                    })
                    .collect();
                DMatrix::from_fn(l.n_out, k2, |beta, j| cols[j][beta])
            }
        }
    }

    /// `T(α1, α2)_β = Σ_ij T[β,i,j] α1_i α2_j`.
    pub fn contract(&self, alpha1: &[f64], alpha2: &[f64]) -> Vec<f64> {
        let a1 = self.fix_second(alpha2);
        (a1 * DVector::from_column_slice(alpha1)).as_slice().to_vec()
    }
}

/// Free-function form of the contraction.
pub fn contract(map: &BilinearMap, alpha1: &[f64], alpha2: &[f64]) -> Vec<f64> {
    map.contract(alpha1, alpha2)
}

/// Norm of the part of `θ = V α` lying outside the Euler-multiples
/// subspace, relative to `‖θ‖`. The Euler multiples `m θ_E` have disjoint
/// supports, so the projection is computed monomial by monomial.
pub fn non_euler_fraction(v: &DMatrix<f64>, degree: usize, alpha: &[f64]) -> f64 {
    let theta = v * DVector::from_column_slice(alpha);
    let nd = basis_size(degree);
    let total = theta.norm();
    if total == 0.0 || degree == 0 {
        return if total == 0.0 { 0.0 } else { 1.0 };
    }
    let mut residual = theta.clone();
    for m in MonomialBasis::new(degree - 1).monomials() {
        let idx: Vec<usize> = (0..3)
            .map(|var| {
                let mut e = *m;
                e[var] += 1;
                var * nd + monomial_index(e)
            })
            .collect();
        let coef = idx.iter().map(|&k| theta[k]).sum::<f64>() / 3.0;
        for &k in &idx {
            residual[k] -= coef;
        }
    }
    residual.norm() / total
}
