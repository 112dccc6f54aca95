//! Exact kernels and ranks of integer matrices.
//!
//! [`kernel`] runs fraction-free Gauss-Jordan elimination: rows are
//! combined by cross-multiplication and immediately divided by their
//! content. It first runs on `i128` with checked arithmetic and restarts on
//! `BigInt` if anything overflows. [`kernel_multimodular`] produces the same
//! basis from eliminations modulo 62-bit primes and verifies it exactly; it
//! is the one used on derivation matrices, where kernel entries reach
//! hundreds of bits, whenever the `i128` elimination overflows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

/// Integer scalar usable by the eliminator.
pub trait ElimScalar: Clone + PartialEq + Send + Sync + std::fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn checked_mul(&self, o: &Self) -> Option<Self>;
    fn checked_sub(&self, o: &Self) -> Option<Self>;
    /// Nonnegative gcd.
    fn gcd_with(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn bits(&self) -> u64;
    fn to_bigint(&self) -> BigInt;
    fn from_bigint(v: &BigInt) -> Option<Self>;
}

impl ElimScalar for i128 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn checked_mul(&self, o: &Self) -> Option<Self> {
        i128::checked_mul(*self, *o)
    }
    fn checked_sub(&self, o: &Self) -> Option<Self> {
        i128::checked_sub(*self, *o)
    }
    fn gcd_with(&self, o: &Self) -> Self {
        // i128::MIN never appears: every product is checked
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn bits(&self) -> u64 {
        128 - self.unsigned_abs().leading_zeros() as u64
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        // keep one bit of headroom so negation can never overflow
        v.to_i128().filter(|x| *x != i128::MIN)
    }
}

impl ElimScalar for BigInt {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn checked_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn checked_sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn gcd_with(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn bits(&self) -> u64 {
        BigInt::bits(self)
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
}

/// Reduced row echelon form with integer pivots.
#[derive(Debug, Clone)]
pub struct Echelon<T> {
    pub ncols: usize,
    /// Nonzero rows; row `r` has its pivot in column `pivots[r]` and zeros in
    /// every other pivot column.
    pub rows: Vec<Vec<T>>,
    pub pivots: Vec<usize>,
}

struct Overflow;

fn normalize_content<T: ElimScalar>(row: &mut [T]) {
    let mut g = T::zero();
    for x in row.iter() {
        if !x.is_zero() {
            g = g.gcd_with(x);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() {
        return;
    }
    for x in row.iter_mut() {
        if !x.is_zero() {
            *x = x.div_exact(&g);
        }
    }
}

/// `row <- a * row - b * pivot` on the support of the pivot row.
fn combine<T: ElimScalar>(row: &mut [T], pivot: &[T], support: &[usize], col: usize) -> Result<(), Overflow> {
    let p = &pivot[col];
    let v = row[col].clone();
    let g = p.gcd_with(&v);
    let a = p.div_exact(&g);
    let b = v.div_exact(&g);
    if !a.is_one() {
        for x in row.iter_mut() {
            if !x.is_zero() {
                *x = x.checked_mul(&a).ok_or(Overflow)?;
            }
        }
    }
    for &k in support {
        let t = b.checked_mul(&pivot[k]).ok_or(Overflow)?;
        row[k] = row[k].checked_sub(&t).ok_or(Overflow)?;
    }
    debug_assert!(row[col].is_zero());
    normalize_content(row);
    Ok(())
}

const PAR_THRESHOLD: usize = 1 << 14;

fn gauss_jordan<T: ElimScalar>(mut rows: Vec<Vec<T>>, ncols: usize, order: &[usize]) -> Result<Echelon<T>, Overflow> {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    for r in rows.iter_mut() {
        normalize_content(r);
    }
    let mut pivots = Vec::new();
    for &col in order {
        let rank = pivots.len();
        if rank == rows.len() {
            break;
        }
        let best = (rank..rows.len())
            .filter(|&i| !rows[i][col].is_zero())
            .min_by_key(|&i| (rows[i][col].bits(), i));
        let Some(pi) = best else { continue };
        rows.swap(rank, pi);
        let pivot = rows[rank].clone();
        let support: Vec<usize> = (0..ncols).filter(|&k| !pivot[k].is_zero()).collect();
        let update = |(i, row): (usize, &mut Vec<T>)| -> Result<(), Overflow> {
            if i == rank || row[col].is_zero() {
                return Ok(());
            }
            combine(row, &pivot, &support, col)
        };
        if rows.len() * ncols >= PAR_THRESHOLD {
            rows.par_iter_mut().enumerate().try_for_each(update)?;
        } else {
            rows.iter_mut().enumerate().try_for_each(update)?;
        }
        pivots.push(col);
        let tail = rows.split_off(rank + 1);
        rows.extend(tail.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
    }
    rows.truncate(pivots.len());
    Ok(Echelon { ncols, rows, pivots })
}

fn to_scalar<T: ElimScalar>(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<T>>> {
    rows.iter()
        .map(|r| r.iter().map(T::from_bigint).collect::<Option<Vec<T>>>())
        .collect()
}

fn echelon_bigint(rows: &[Vec<BigInt>], ncols: usize, order: &[usize]) -> Echelon<BigInt> {
    if let Some(small) = to_scalar::<i128>(rows) {
        if let Ok(e) = gauss_jordan(small, ncols, order) {
            return Echelon {
                ncols,
                rows: e.rows.iter().map(|r| r.iter().map(|x| x.to_bigint()).collect()).collect(),
                pivots: e.pivots,
            };
        }
        log::debug!("i128 elimination overflowed; retrying with big integers");
    }
    match gauss_jordan(rows.to_vec(), ncols, order) {
        Ok(e) => e,
        Err(Overflow) => unreachable!("big integer arithmetic cannot overflow"),
    }
}

/// Exact kernel of an integer matrix.
#[derive(Debug, Clone)]
pub struct ExactKernel {
    pub ncols: usize,
    pub rank: usize,
    /// Primitive integer basis vectors, one per free column.
    pub basis: Vec<Vec<BigInt>>,
    /// The free column that each basis vector is normalized on.
    pub free_columns: Vec<usize>,
}

impl ExactKernel {
    pub fn nullity(&self) -> usize {
        self.basis.len()
    }
}

/// Kernel of `rows` (each of length `ncols`). Pivots are searched in the
/// column order `order` (a permutation of `0..ncols`), which decides which
/// columns end up free.
pub fn kernel(rows: &[Vec<BigInt>], ncols: usize, order: Option<&[usize]>) -> ExactKernel {
    let natural: Vec<usize> = (0..ncols).collect();
    let order = order.unwrap_or(&natural);
    debug_assert_eq!(order.len(), ncols);
    kernel_from_echelon(&echelon_bigint(rows, ncols, order))
}

/// [`kernel`] when the `i128` elimination succeeds, otherwise
/// [`kernel_multimodular`]. Both give the same basis.
pub fn kernel_fast(rows: &[Vec<BigInt>], ncols: usize, order: Option<&[usize]>) -> ExactKernel {
    let natural: Vec<usize> = (0..ncols).collect();
    let order_ref = order.unwrap_or(&natural);
    if let Some(small) = to_scalar::<i128>(rows) {
        if let Ok(e) = gauss_jordan(small, ncols, order_ref) {
            return kernel_from_echelon(&Echelon {
                ncols,
                rows: e.rows.iter().map(|r| r.iter().map(|x| x.to_bigint()).collect()).collect(),
                pivots: e.pivots,
            });
        }
    }
    kernel_multimodular(rows, ncols, order)
}

fn kernel_from_echelon(ech: &Echelon<BigInt>) -> ExactKernel {
    let ncols = ech.ncols;
    let mut is_pivot = vec![false; ncols];
    for &c in &ech.pivots {
        is_pivot[c] = true;
    }
    let free_columns: Vec<usize> = (0..ncols).filter(|&c| !is_pivot[c]).collect();
    let basis = free_columns
        .par_iter()
        .map(|&j| {
            // x_j = L, x_{c_r} = -row_r[j] * L / p_r
            let lcm = ech
                .rows
                .iter()
                .zip(&ech.pivots)
                .filter(|(r, _)| !r[j].is_zero())
                .fold(BigInt::one(), |l, (r, &c)| l.lcm(&r[c]));
            let mut v = vec![BigInt::zero(); ncols];
            v[j] = lcm.clone();
            for (r, &c) in ech.rows.iter().zip(&ech.pivots) {
                if !r[j].is_zero() {
                    v[c] = -(&r[j] * (&lcm / &r[c]));
                }
            }
            let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            let g = if v[j].is_negative() { -g } else { g };
            v.iter().map(|x| x / &g).collect()
        })
        .collect();
    ExactKernel {
        ncols,
        rank: ech.pivots.len(),
        basis,
        free_columns,
    }
}

pub fn rank(rows: &[Vec<BigInt>], ncols: usize) -> usize {
    let order: Vec<usize> = (0..ncols).collect();
    echelon_bigint(rows, ncols, &order).pivots.len()
}

/// Primes used for modular rank computations.
pub const RANK_PRIMES: [u64; 2] = [(1 << 61) - 1, (1 << 62) - 57];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p is prime
    let (mut base, mut e, mut acc) = (a, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

/// Rank of the reduction of `rows` modulo the prime `p`.
pub fn rank_mod_p(rows: &[Vec<BigInt>], ncols: usize, p: u64) -> usize {
    let bp = BigInt::from(p);
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x.mod_floor(&bp).to_u64().expect("residue fits")).collect())
        .collect();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pi) = (rank..a.len()).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, pi);
        let inv = inv_mod(a[rank][col], p);
        let pivot: Vec<u64> = a[rank].iter().map(|&x| mul_mod(x, inv, p)).collect();
        a[rank + 1..].par_iter_mut().for_each(|row| {
            let f = row[col];
            if f != 0 {
                for (x, &y) in row.iter_mut().zip(&pivot).skip(col) {
                    *x = (*x + p - mul_mod(f, y, p)) % p;
                }
            }
        });
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

/// Rank over the rationals computed modulo large primes. Reduction can only
/// lower the rank, so the maximum over [`RANK_PRIMES`] is a lower bound
/// that is exact unless every prime divides all maximal nonzero minors.
pub fn rank_modular(rows: &[Vec<BigInt>], ncols: usize) -> usize {
    RANK_PRIMES.iter().map(|&p| rank_mod_p(rows, ncols, p)).max().unwrap_or(0)
}

fn pow_mod(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let (mut d, mut r) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The next `count` primes below `*cursor`, moving the cursor past them.
fn primes_below(cursor: &mut u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        *cursor -= 2;
        if is_prime_u64(*cursor) {
            out.push(*cursor);
        }
    }
    out
}

/// Reduced row echelon form modulo `p` with pivots searched in `order`:
/// the pivot columns and, for every pivot row, its entries on `free`.
struct ModularEchelon {
    pivots: Vec<usize>,
    /// `entries[r][t]` is row `r` at column `free[t]`.
    entries: Vec<Vec<u64>>,
    free: Vec<usize>,
}

fn echelon_mod_p(rows: &[Vec<BigInt>], ncols: usize, order: &[usize], p: u64) -> ModularEchelon {
    let bp = BigInt::from(p);
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| order.iter().map(|&c| r[c].mod_floor(&bp).to_u64().expect("residue fits")).collect())
        .collect();
    let mut pivot_pos = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == a.len() {
            break;
        }
        let Some(pi) = (rank..a.len()).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, pi);
        let inv = inv_mod(a[rank][col], p);
        for x in a[rank].iter_mut().skip(col) {
            *x = mul_mod(*x, inv, p);
        }
        let pivot = a[rank].clone();
        a.par_iter_mut().enumerate().for_each(|(i, row)| {
            let f = row[col];
            if i != rank && f != 0 {
                for (x, &y) in row.iter_mut().zip(&pivot).skip(col) {
                    if y != 0 {
                        *x = (*x + p - mul_mod(f, y, p)) % p;
                    }
                }
            }
        });
        pivot_pos.push(col);
        rank += 1;
    }
    let mut is_pivot = vec![false; ncols];
    for &c in &pivot_pos {
        is_pivot[c] = true;
    }
    let free_pos: Vec<usize> = (0..ncols).filter(|&c| !is_pivot[c]).collect();
    ModularEchelon {
        pivots: pivot_pos.iter().map(|&c| order[c]).collect(),
        entries: a[..rank].iter().map(|r| free_pos.iter().map(|&c| r[c]).collect()).collect(),
        free: free_pos.iter().map(|&c| order[c]).collect(),
    }
}

/// `n / d` with `|n|, d <= sqrt(m / 2)` and `n = a d (mod m)`, if any.
fn rational_reconstruction(a: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        (r0, r1, t0, t1) = (r1, r2, t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (n, d) = if t1.is_negative() { (-r1, -t1) } else { (r1, t1) };
    One::is_one(&n.gcd(&d)).then_some((n, d))
}

/// Primitive integer kernel vectors for the accumulated residues, or
/// `None` if reconstruction fails or a vector is not annihilated exactly.
fn reconstruct(
    rows: &[Vec<BigInt>],
    ncols: usize,
    pivots: &[usize],
    free: &[usize],
    residues: &[Vec<BigInt>],
    modulus: &BigInt,
) -> Option<Vec<Vec<BigInt>>> {
    free.par_iter()
        .enumerate()
        .map(|(t, &j)| {
            // x_j = 1 and x_{pivot r} = -E[r][j]; a shared denominator
            // keeps later reconstructions small
            let mut den = BigInt::one();
            let mut num = vec![BigInt::zero(); pivots.len()];
            for (r, res) in residues.iter().enumerate() {
                let scaled = (&res[t] * &den).mod_floor(modulus);
                let (n, d) = rational_reconstruction(&scaled, modulus)?;
                if !One::is_one(&d) {
                    for x in num[..r].iter_mut() {
                        *x *= &d;
                    }
                    den *= &d;
                }
                num[r] = n;
            }
            let mut v = vec![BigInt::zero(); ncols];
            v[j] = den;
            for (x, &c) in num.into_iter().zip(pivots) {
                v[c] = -x;
            }
            let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            let v: Vec<BigInt> = v.iter().map(|x| x / &g).collect();
            mat_vec(rows, &v).iter().all(|x| x.is_zero()).then_some(v)
        })
        .collect()
}

/// Same result as [`kernel`], computed by elimination modulo 62-bit primes,
/// Chinese remaindering and rational reconstruction. Primes are added until
/// every reconstructed vector is annihilated exactly; since reduction mod
/// a prime can only lower the rank, that many verified vectors also prove
/// the nullity.
pub fn kernel_multimodular(rows: &[Vec<BigInt>], ncols: usize, order: Option<&[usize]>) -> ExactKernel {
    let natural: Vec<usize> = (0..ncols).collect();
    let order = order.unwrap_or(&natural);
    debug_assert_eq!(order.len(), ncols);
    // odd start just above the largest prime below 2^62
    let mut cursor = (1u64 << 62) + 1;
    let mut reference: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut residues: Vec<Vec<BigInt>> = Vec::new();
    let mut modulus = BigInt::one();
    let mut used = 0;
    let mut next_attempt = 1;
    loop {
        let echelons: Vec<(u64, ModularEchelon)> = primes_below(&mut cursor, MODULAR_BATCH)
            .into_par_iter()
            .map(|p| (p, echelon_mod_p(rows, ncols, order, p)))
            .collect();
        for (p, e) in echelons {
            let restart = match &reference {
                None => true,
                // reduction only loses rank: a higher rank means every
                // earlier prime was unlucky
                Some((piv, _)) if e.pivots.len() > piv.len() => true,
                Some((piv, _)) if e.pivots != *piv => continue,
                Some(_) => false,
            };
            if restart {
                residues = vec![vec![BigInt::zero(); e.free.len()]; e.pivots.len()];
                modulus = BigInt::one();
                used = 0;
                next_attempt = 1;
                reference = Some((e.pivots, e.free));
            }
            // CRT: x = x0 + m ((r - x0) m^{-1} mod p)
            let bp = BigInt::from(p);
            let m_inv = inv_mod(modulus.mod_floor(&bp).to_u64().expect("residue fits"), p);
            for (row, er) in residues.iter_mut().zip(&e.entries) {
                for (x, &r) in row.iter_mut().zip(er) {
                    let x0 = x.mod_floor(&bp).to_u64().expect("residue fits");
                    let t = mul_mod((r + p - x0) % p, m_inv, p);
                    *x += &modulus * t;
                }
            }
            modulus *= &bp;
            used += 1;
        }
        let Some((pivots, free)) = &reference else { continue };
        // full column rank modulo p implies full column rank over Q
        if free.is_empty() {
            return ExactKernel {
                ncols,
                rank: pivots.len(),
                basis: Vec::new(),
                free_columns: Vec::new(),
            };
        }
        if used < next_attempt {
            continue;
        }
        next_attempt = used * 2;
        if let Some(basis) = reconstruct(rows, ncols, pivots, free, &residues, &modulus) {
            log::debug!("modular kernel reconstructed from {used} primes");
            let mut pairs: Vec<(usize, Vec<BigInt>)> = free.iter().copied().zip(basis).collect();
            pairs.sort_by_key(|(c, _)| *c);
            let (free_columns, basis) = pairs.into_iter().unzip();
            return ExactKernel {
                ncols,
                rank: pivots.len(),
                basis,
                free_columns,
            };
        }
    }
}

const MODULAR_BATCH: usize = 4;

/// Exact matrix-vector product.
pub fn mat_vec(rows: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    rows.iter()
        .map(|r| {
            r.iter()
                .zip(v)
                .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}
