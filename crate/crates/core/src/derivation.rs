//! Derivation matrices `M_d` whose kernels are the degree-`d` logarithmic
//! derivations of an arrangement, and their exact and floating-point null
//! spaces.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arrangement::{Arrangement, Line};
use crate::exact;
use crate::poly::{basis_size, HomPoly, MonomialBasis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DerivationError {
    #[error("no spectral gap of at least {required:e} around the numerical kernel (gap {gap:e}, nullity {nullity})")]
    IllConditionedKernel { gap: f64, required: f64, nullity: usize },
    #[error("degrees {d1} + {d2} do not add up to n - 1 = {expected}")]
    DegreeMismatch { d1: usize, d2: usize, expected: usize },
}

/// Two integer vectors spanning the plane `a v1 + b v2 + c v3 = 0`.
///
/// For `a != 0` this is `(-b, a, 0)` and `(-c, 0, a)`; for `a = 0` the
/// first vector is `e_x` and the second `(0, -c, b)`. Both are made
/// primitive with a positive leading entry.
pub fn line_kernel_basis(line: &Line) -> ([BigInt; 3], [BigInt; 3]) {
    let [a, b, c] = line.coeffs().clone();
    let (u, w) = if !a.is_zero() {
        ([-b.clone(), a.clone(), BigInt::zero()], [-c, BigInt::zero(), a])
    } else {
        ([BigInt::one(), BigInt::zero(), BigInt::zero()], [BigInt::zero(), -c, b])
    };
    (primitive(u), primitive(w))
}

fn primitive(v: [BigInt; 3]) -> [BigInt; 3] {
    crate::arrangement::canonical_triple(v).expect("kernel vector is nonzero")
}

/// Coefficients (indexed by the power of `s`) of `Π_k (s u_k + t w_k)^{e_k}`.
fn restricted_monomial(e: [u32; 3], u: &[BigInt; 3], w: &[BigInt; 3]) -> Vec<BigInt> {
    let mut form = vec![BigInt::one()];
    for k in 0..3 {
        for _ in 0..e[k] {
            let mut next = vec![BigInt::zero(); form.len() + 1];
            for (p, c) in form.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                next[p + 1] += c * &u[k];
                next[p] += c * &w[k];
            }
            form = next;
        }
    }
    form
}

/// Integer matrix of shape `n(d+1) x 3 N_d`; row `(i, p)` is the coefficient
/// of `s^p t^(d-p)` in `θ(α_i)(s u_i + t w_i)` as a functional of the
/// stacked coefficients `(f, g, h)` of `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationMatrix {
    pub degree: usize,
    pub n_lines: usize,
    pub ncols: usize,
    pub rows: Vec<Vec<BigInt>>,
    /// `(line index, power of s)` for each row.
    pub provenance: Vec<(usize, usize)>,
}

impl DerivationMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.ncols)
    }

    /// Whitespace-separated integer dump, one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), self.ncols, |i, j| {
            self.rows[i][j].to_f64().unwrap_or(f64::NAN)
        })
    }

    /// Exact check that `v` is in the kernel.
    pub fn annihilates(&self, v: &[BigInt]) -> bool {
        exact::mat_vec(&self.rows, v).iter().all(|x| x.is_zero())
    }
}

pub fn derivation_matrix(arr: &Arrangement, d: usize) -> DerivationMatrix {
    let basis = MonomialBasis::new(d);
    let nd = basis.len();
    let blocks: Vec<Vec<(Vec<BigInt>, (usize, usize))>> = arr
        .lines()
        .par_iter()
        .enumerate()
        .map(|(i, line)| {
            let (u, w) = line_kernel_basis(line);
            let restricted: Vec<Vec<BigInt>> = basis
                .monomials()
                .iter()
                .map(|&e| restricted_monomial(e, &u, &w))
                .collect();
            (0..=d)
                .map(|p| {
                    let mut row = vec![BigInt::zero(); 3 * nd];
                    for (comp, coef) in line.coeffs().iter().enumerate() {
                        if coef.is_zero() {
                            continue;
                        }
                        for (m, form) in restricted.iter().enumerate() {
                            if !form[p].is_zero() {
                                row[comp * nd + m] = coef * &form[p];
                            }
                        }
                    }
                    (row, (i, p))
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(arr.n() * (d + 1));
    let mut provenance = Vec::with_capacity(arr.n() * (d + 1));
    for (row, prov) in blocks.into_iter().flatten() {
        rows.push(row);
        provenance.push(prov);
    }
    DerivationMatrix {
        degree: d,
        n_lines: arr.n(),
        ncols: 3 * nd,
        rows,
        provenance,
    }
}

/// Stacked coefficient vectors of `m θ_E = (m x, m y, m z)` for every
/// monomial `m` of degree `d - 1`.
pub fn euler_multiples(d: usize) -> Vec<Vec<BigInt>> {
    assert!(d >= 1, "Euler multiples start in degree 1");
    let nd = basis_size(d);
    MonomialBasis::new(d - 1)
        .monomials()
        .iter()
        .map(|&m| {
            let mut v = vec![BigInt::zero(); 3 * nd];
            for var in 0..3 {
                let mut e = m;
                e[var] += 1;
                v[var * nd + crate::poly::monomial_index(e)] = BigInt::one();
            }
            v
        })
        .collect()
}

/// Exact kernel of a derivation matrix.
#[derive(Debug, Clone)]
pub struct NullBasisExact {
    pub degree: usize,
    pub basis: Vec<Vec<BigInt>>,
}

impl NullBasisExact {
    pub fn nullity(&self) -> usize {
        self.basis.len()
    }
}

pub fn null_space_exact(m: &DerivationMatrix) -> NullBasisExact {
    let k = exact::kernel_fast(&m.rows, m.ncols, None);
    NullBasisExact {
        degree: m.degree,
        basis: k.basis,
    }
}

/// Exact kernel split into Euler multiples and a complement.
#[derive(Debug, Clone)]
pub struct KernelModuloEuler {
    pub degree: usize,
    pub nullity: usize,
    /// Kernel vectors whose `f` component has no monomial divisible by `x`.
    /// They are independent modulo the Euler multiples and together with
    /// them span the kernel.
    pub complement: Vec<Vec<BigInt>>,
}

/// Exact kernel with the columns `f[x m]` eliminated last. Those columns
/// are always free (each equals minus the sum of `g[y m]` and `h[z m]`), so
/// the kernel vectors attached to the remaining free columns vanish on them
/// and form a basis of the kernel modulo Euler multiples.
pub fn null_space_modulo_euler(m: &DerivationMatrix) -> KernelModuloEuler {
    let d = m.degree;
    let nd = basis_size(d);
    let n_euler = basis_size(d - 1);
    // monomials divisible by x are exactly the first N_{d-1} of S_d
    let order: Vec<usize> = (n_euler..3 * nd).chain(0..n_euler).collect();
    let k = exact::kernel_fast(&m.rows, m.ncols, Some(&order));
    let nullity = k.nullity();
    let complement = k
        .basis
        .into_iter()
        .zip(&k.free_columns)
        .filter(|(_, &c)| c >= n_euler)
        .map(|(v, _)| v)
        .collect();
    KernelModuloEuler {
        degree: d,
        nullity,
        complement,
    }
}

/// Orthonormal floating-point basis of the numerical kernel.
#[derive(Debug, Clone)]
pub struct NullBasisFloat {
    pub degree: usize,
    /// Shape `3 N_d x k`.
    pub v: DMatrix<f64>,
    /// Singular values of the equilibrated matrix restricted to the
    /// complement of the Euler multiples, descending, padded with zeros up
    /// to the number of columns.
    pub singular_values: Vec<f64>,
    /// Ratio of the smallest kept to the largest discarded singular value.
    pub gap: f64,
    /// Set when the gap rule failed and the nullity was taken from exact
    /// elimination instead.
    pub exact_fallback: bool,
}

impl NullBasisFloat {
    pub fn nullity(&self) -> usize {
        self.v.ncols()
    }

    pub fn orthonormality_error(&self) -> f64 {
        let g = self.v.transpose() * &self.v;
        (g - DMatrix::identity(self.nullity(), self.nullity())).amax()
    }
}

pub const DEFAULT_NULL_TOL: f64 = 1e-9;
pub const REQUIRED_GAP: f64 = 1e3;

struct Spectrum {
    sigma: Vec<f64>,
    /// Right singular vectors, one column per entry of `sigma`.
    v: DMatrix<f64>,
}

fn spectrum(rows: &[Vec<BigInt>], ncols: usize) -> Spectrum {
    let nrows = rows.len().max(ncols);
    let mut a = DMatrix::<f64>::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            a[(i, j)] = x.to_f64().unwrap_or(f64::MAX);
        }
    }
    // Ruiz equilibration: entries of high-degree rows and columns differ by
    // many orders of magnitude, which buries the kernel among tiny but
    // nonzero singular values. Row scaling leaves the kernel unchanged; the
    // column scaling is undone on the singular vectors below.
    let mut col_scale = vec![1.0f64; ncols];
    for _ in 0..RUIZ_SWEEPS {
        for i in 0..rows.len() {
            let r = a.row(i).amax();
            if r > 0.0 {
                a.row_mut(i).scale_mut(1.0 / r.sqrt());
            }
        }
        for (j, cs) in col_scale.iter_mut().enumerate() {
            let c = a.column(j).amax();
            if c > 0.0 {
                a.column_mut(j).scale_mut(1.0 / c.sqrt());
                *cs /= c.sqrt();
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(ncols, idx.len(), |r, c| v_t[(idx[c], r)] * col_scale[r]);
    Spectrum { sigma, v }
}

const RUIZ_SWEEPS: usize = 8;

/// The Euler multiples have disjoint supports `{m x, m y, m z}` in the
/// stacked coordinates, so together with an integer basis of their
/// orthogonal complement they split the coefficient space exactly.
struct EulerSplit {
    /// Orthonormal Euler multiples, shape `3 N_d x N_{d-1}`.
    euler: DMatrix<f64>,
    /// Sparse integer columns spanning the orthogonal complement: unit
    /// vectors off the Euler supports, and `e_a - e_b`, `e_a + e_b - 2 e_c`
    /// on each support `{a, b, c}`.
    complement: Vec<Vec<(usize, i64)>>,
}

fn euler_split(d: usize, ncols: usize) -> EulerSplit {
    if d == 0 || ncols != 3 * basis_size(d) {
        return EulerSplit {
            euler: DMatrix::zeros(ncols, 0),
            complement: (0..ncols).map(|i| vec![(i, 1)]).collect(),
        };
    }
    let nd = basis_size(d);
    let supports: Vec<[usize; 3]> = MonomialBasis::new(d - 1)
        .monomials()
        .iter()
        .map(|&m| {
            std::array::from_fn(|var| {
                let mut e = m;
                e[var] += 1;
                var * nd + crate::poly::monomial_index(e)
            })
        })
        .collect();
    let mut covered = vec![false; 3 * nd];
    let inv = 1.0 / 3f64.sqrt();
    let mut euler = DMatrix::zeros(3 * nd, supports.len());
    let mut complement = Vec::with_capacity(3 * nd - supports.len());
    for (j, &[a, b, c]) in supports.iter().enumerate() {
        for i in [a, b, c] {
            covered[i] = true;
            euler[(i, j)] = inv;
        }
        complement.push(vec![(a, 1), (b, -1)]);
        complement.push(vec![(a, 1), (b, 1), (c, -2)]);
    }
    complement.extend((0..3 * nd).filter(|&i| !covered[i]).map(|i| vec![(i, 1)]));
    EulerSplit { euler, complement }
}

/// `M P` for the sparse integer complement basis `P`.
fn restrict(m: &DerivationMatrix, cols: &[Vec<(usize, i64)>]) -> Vec<Vec<BigInt>> {
    m.rows
        .par_iter()
        .map(|row| {
            cols.iter()
                .map(|col| col.iter().map(|&(i, w)| &row[i] * w).sum())
                .collect()
        })
        .collect()
}

/// Orthonormal basis of the column span (the columns are independent).
fn orthonormalize(v: DMatrix<f64>) -> DMatrix<f64> {
    if v.ncols() == 0 {
        return v;
    }
    v.qr().q()
}

fn cut(sigma: &[f64], tol: f64) -> (usize, f64) {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return (sigma.len(), f64::INFINITY);
    }
    let threshold = tol * smax;
    let k = sigma.iter().filter(|&&s| s < threshold).count();
    let r = sigma.len() - k;
    let gap = if k == 0 {
        sigma[r - 1] / threshold
    } else if sigma[r] == 0.0 {
        f64::INFINITY
    } else {
        sigma[r - 1] / sigma[r]
    };
    (k, gap)
}

/// Kernel of `M` restricted to the complement of the Euler multiples,
/// before the nullity is decided.
struct Reduced {
    split: EulerSplit,
    rows: Vec<Vec<BigInt>>,
    spectrum: Spectrum,
}

fn reduce(m: &DerivationMatrix) -> Reduced {
    let split = euler_split(m.degree, m.ncols);
    let rows = restrict(m, &split.complement);
    let spectrum = spectrum(&rows, split.complement.len());
    Reduced { split, rows, spectrum }
}

/// Euler multiples followed by the `k` weakest directions of the reduced
/// matrix mapped back to stacked coordinates, orthonormalized.
fn assemble(m: &DerivationMatrix, r: Reduced, k: usize, gap: f64, fallback: bool) -> NullBasisFloat {
    let Reduced { split, spectrum, .. } = r;
    let c = spectrum.sigma.len();
    let n_euler = split.euler.ncols();
    let mut v = DMatrix::zeros(m.ncols, n_euler + k);
    v.columns_mut(0, n_euler).copy_from(&split.euler);
    for (t, w) in spectrum.v.columns(c - k, k).column_iter().enumerate() {
        for (col, &wj) in split.complement.iter().zip(w.iter()) {
            for &(i, p) in col {
                v[(i, n_euler + t)] += p as f64 * wj;
            }
        }
    }
    let mut singular_values = spectrum.sigma;
    singular_values.resize(m.ncols, 0.0);
    NullBasisFloat {
        degree: m.degree,
        v: orthonormalize(v),
        singular_values,
        gap,
        exact_fallback: fallback,
    }
}

/// Numerical kernel. The Euler multiples are in every kernel and are taken
/// exactly; on their complement singular values below `tol * σ_max` are
/// discarded, and the cut must sit in a spectral gap of at least `10^3`.
pub fn null_space_float(m: &DerivationMatrix, tol: f64) -> Result<NullBasisFloat, DerivationError> {
    assert!(tol > 0.0 && tol < 1.0, "tolerance must lie in (0, 1)");
    let r = reduce(m);
    let (k, gap) = cut(&r.spectrum.sigma, tol);
    if gap < REQUIRED_GAP {
        return Err(DerivationError::IllConditionedKernel {
            gap,
            required: REQUIRED_GAP,
            nullity: k + r.split.euler.ncols(),
        });
    }
    Ok(assemble(m, r, k, gap, false))
}

/// Like [`null_space_float`], but when the gap rule fails the nullity is
/// taken from an exact (modular) rank computation and the result is flagged.
pub fn null_space_float_or_exact(m: &DerivationMatrix, tol: f64) -> NullBasisFloat {
    let r = reduce(m);
    let (k, gap) = cut(&r.spectrum.sigma, tol);
    if gap >= REQUIRED_GAP {
        return assemble(m, r, k, gap, false);
    }
    let ncols = r.split.complement.len();
    let k_exact = ncols - exact::rank_modular(&r.rows, ncols);
    log::info!(
        "degree {} kernel: spectral gap {gap:e} too small, using exact nullity {} (float cut gave {})",
        m.degree,
        k_exact + r.split.euler.ncols(),
        k + r.split.euler.ncols()
    );
    assemble(m, r, k_exact, gap, true)
}

/// Defining polynomial of the arrangement, exact and as floats.
#[derive(Debug, Clone)]
pub struct QVector {
    pub exact: HomPoly<BigInt>,
    pub float: Vec<f64>,
}

pub fn q_coefficient_vector(arr: &Arrangement) -> QVector {
    let exact = arr.defining_polynomial();
    let float = exact.coeffs().iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    QVector { exact, float }
}

/// Removes a common integer factor from a vector and fixes the sign of its
/// first nonzero entry.
pub fn primitive_vector(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let first_neg = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if first_neg { -g } else { g };
    v.iter().map(|x| x / &g).collect()
}
