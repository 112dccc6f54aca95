//! Independent oracles and the randomized property checks shared by the
//! integration tests and the acceptance report.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use freearr::arrangement::{delta_b2, intersection_summary, Arrangement, Line};
use freearr::derivation::{derivation_matrix, euler_multiples, null_space_exact, null_space_float_or_exact, DEFAULT_NULL_TOL};
use freearr::fixtures::Fixture;
use freearr::saito::{als_minimize, AlsConfig};
use freearr::search::{
    beam_search_build, candidate_pool, cascade, BeamConfig, CascadeConfig, ExtensionConfig, Targets,
};
use freearr::tensor::{assemble_saito_tensor, contract, BilinearMap, SaitoTensor, DEFAULT_TENSOR_BUDGET};
use num_traits::ToPrimitive;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Primitive representative with first nonzero entry positive.
pub fn normalize(v: [i128; 3]) -> [i128; 3] {
    let g = gcd(gcd(v[0], v[1]), v[2]);
    let mut w = v.map(|x| x / g);
    if w.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        w = w.map(|x| -x);
    }
    w
}

pub fn triples(arr: &Arrangement) -> Vec<[i128; 3]> {
    arr.lines()
        .iter()
        .map(|l| l.coeffs().clone().map(|c| c.to_i128().expect("small coefficients")))
        .collect()
}

fn cross(a: [i128; 3], b: [i128; 3]) -> [i128; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Multiplicity profile and `b2` by counting the line pairs meeting at each
/// point: `C(m, 2)` pairs means multiplicity `m`.
pub fn lattice_oracle(lines: &[[i128; 3]]) -> (BTreeMap<usize, usize>, i64) {
    let mut pairs: HashMap<[i128; 3], usize> = HashMap::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            *pairs.entry(normalize(cross(lines[i], lines[j]))).or_default() += 1;
        }
    }
    let mut t = BTreeMap::new();
    let mut b2 = 0;
    for p in pairs.values() {
        let m = (1..).find(|m| m * (m - 1) / 2 == *p).expect("pair count is triangular");
        *t.entry(m).or_default() += 1;
        b2 += m as i64 - 1;
    }
    (t, b2)
}

/// All primitive sign-normalized triples with entries in `[-r, r]`.
pub fn pool_oracle(r: i64) -> Vec<[i128; 3]> {
    let r = r as i128;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let v = [a, b, c];
                if v == [0, 0, 0] || gcd(gcd(a, b), c) != 1 || normalize(v) != v {
                    continue;
                }
                out.push(v);
            }
        }
    }
    out.sort();
    out
}

pub fn random_pool_arrangement(rng: &mut ChaCha8Rng, pool: &[Line], n: usize) -> Arrangement {
    let lines: Vec<Line> = pool.choose_multiple(rng, n).cloned().collect();
    Arrangement::new(lines).expect("distinct pool lines")
}

pub fn fixture_check(f: &Fixture) -> Result<(), String> {
    let a = f.arrangement();
    let (t, _) = lattice_oracle(&triples(&a));
    let expected: BTreeMap<usize, usize> = f.profile.iter().copied().collect();
    if t != expected {
        return Err(format!("{}: profile {t:?}, expected {expected:?}", f.name));
    }
    Ok(())
}

/// `Σ C(m,2) t_m = C(n,2)` and agreement with the oracle profile on random
/// arrangements drawn from the bound-2 pool.
pub fn double_counting_cases(cases: usize, seed: u64) -> Result<(), String> {
    let pool = candidate_pool(2).lines;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(2..=12);
        let a = random_pool_arrangement(&mut rng, &pool, n);
        let s = intersection_summary(&a);
        let lhs: usize = s.t.iter().map(|(m, t)| m * (m - 1) / 2 * t).sum();
        if lhs != n * (n - 1) / 2 || !s.pair_count_check {
            return Err(format!("case {case}: Σ C(m,2) t_m = {lhs}, C(n,2) = {}", n * (n - 1) / 2));
        }
        let (t, b2) = lattice_oracle(&triples(&a));
        if t != s.t || b2 != s.b2 {
            return Err(format!("case {case}: profile {:?} / b2 {} vs oracle {t:?} / {b2}", s.t, s.b2));
        }
    }
    Ok(())
}

/// Incremental `Δb2` against a from-scratch recount.
pub fn delta_b2_cases(cases: usize, seed: u64) -> Result<(), String> {
    let pool = candidate_pool(2).lines;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(1..=10);
        let picked: Vec<Line> = pool.choose_multiple(&mut rng, n + 1).cloned().collect();
        let a = Arrangement::new(picked[..n].to_vec()).unwrap();
        let line = &picked[n];
        let inc = delta_b2(&a, &intersection_summary(&a), line).map_err(|e| e.to_string())?;
        let before = lattice_oracle(&triples(&a)).1;
        let after = lattice_oracle(&triples(&a.with_line(line.clone()).unwrap())).1;
        if inc != after - before {
            return Err(format!("case {case}: incremental {inc}, recount {}", after - before));
        }
    }
    Ok(())
}

/// Every half-step of every restart must not decrease the squared cosine.
pub fn als_monotonicity_cases(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n_out = rng.random_range(2..=12);
        let k1 = rng.random_range(1..=5);
        let k2 = rng.random_range(1..=5);
        let data: Vec<f64> = (0..n_out * k1 * k2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..n_out).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = SaitoTensor::from_fn(n_out, k1, k2, q, |b, i, j| data[(b * k1 + i) * k2 + j]);
        let config = AlsConfig {
            seed: rng.random(),
            ..AlsConfig::default()
        };
        let r = als_minimize(&BilinearMap::Dense(t), &config).map_err(|e| e.to_string())?;
        for (k, h) in r.histories.iter().enumerate() {
            for w in h.windows(2) {
                if w[1] < w[0] - 1e-12 {
                    return Err(format!("case {case} restart {k}: cos² fell from {} to {}", w[0], w[1]));
                }
            }
        }
        if !(0.0..=1.0 + 1e-12).contains(&r.loss) {
            return Err(format!("case {case}: loss {} outside [0, 1]", r.loss));
        }
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Bilinearity of the contraction and vanishing on Euler multiples, both
/// relative to `‖α1‖‖α2‖` and within `tol`.
pub fn contract_checks(arr: &Arrangement, d1: usize, d2: usize, tol: f64, seed: u64) -> Result<(), String> {
    let v1 = null_space_float_or_exact(&derivation_matrix(arr, d1), DEFAULT_NULL_TOL);
    let v2 = null_space_float_or_exact(&derivation_matrix(arr, d2), DEFAULT_NULL_TOL);
    let map = assemble_saito_tensor(arr, &v1, &v2, DEFAULT_TENSOR_BUDGET).map_err(|e| e.to_string())?;
    let (k1, k2) = (v1.nullity(), v2.nullity());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rv = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let (x, y, z, w) = (rv(k1), rv(k1), rv(k2), rv(k2));
    let (a, b) = (0.75, -1.25);
    let comb = |u: &[f64], v: &[f64]| -> Vec<f64> { u.iter().zip(v).map(|(p, q)| a * p + b * q).collect() };
    let scale = contract(&map, &x, &z).iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let lhs = contract(&map, &comb(&x, &y), &z);
    let rhs = comb(&contract(&map, &x, &z), &contract(&map, &y, &z));
    let err = lhs.iter().zip(&rhs).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale;
    if err > tol {
        return Err(format!("first-argument linearity error {err:e}"));
    }
    let lhs = contract(&map, &x, &comb(&z, &w));
    let rhs = comb(&contract(&map, &x, &z), &contract(&map, &x, &w));
    let err = lhs.iter().zip(&rhs).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale;
    if err > tol {
        return Err(format!("second-argument linearity error {err:e}"));
    }
    for (d, v, other_k, first) in [(d1, &v1, k2, true), (d2, &v2, k1, false)] {
        if d == 0 {
            continue;
        }
        for e in euler_multiples(d) {
            let e: Vec<f64> = e.iter().map(|c| c.to_f64().unwrap()).collect();
            let e_norm = norm(&e);
            let alpha: Vec<f64> = (0..v.nullity())
                .map(|j| v.v.column(j).iter().zip(&e).map(|(p, q)| p * q).sum::<f64>() / e_norm)
                .collect();
            let resid = (&v.v * nalgebra::DVector::from_column_slice(&alpha)).iter().zip(&e).map(|(p, q)| (p - q / e_norm).abs()).fold(0.0, f64::max);
            if resid > 1e-8 {
                return Err(format!("Euler multiple at degree {d} not in the numerical kernel ({resid:e})"));
            }
            let beta = rv(other_k);
            let beta_n = norm(&beta);
            let out = if first { contract(&map, &alpha, &beta) } else { contract(&map, &beta, &alpha) };
            let err = norm(&out) / beta_n.max(1e-300) / scale;
            if err > tol {
                return Err(format!("Euler multiple at degree {d} is not annihilated ({err:e})"));
            }
        }
    }
    Ok(())
}

/// Float kernel dimension against exact elimination at both exponents.
pub fn nullity_agreement(f: &Fixture) -> Result<(), String> {
    let a = f.arrangement();
    let (d1, d2) = f.exponents;
    for d in [d1, d2] {
        let m = derivation_matrix(&a, d);
        let float = null_space_float_or_exact(&m, DEFAULT_NULL_TOL).nullity();
        let exact = null_space_exact(&m).nullity();
        if float != exact {
            return Err(format!("{} degree {d}: float nullity {float}, exact {exact}", f.name));
        }
    }
    Ok(())
}

fn beam_fingerprint(threads: usize) -> Vec<(String, String, bool)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let config = BeamConfig {
            beam_width: 4,
            ..BeamConfig::default()
        };
        beam_search_build(5, 1, 3, &candidate_pool(1), &config)
            .into_iter()
            .map(|b| (b.arrangement.hash(), format!("{:.12e}", b.cumulative_reward), b.certificate.is_some()))
            .collect()
    })
}

fn cascade_fingerprint(threads: usize) -> Vec<((usize, usize, usize), Vec<String>)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let seed = freearr::fixtures::NEAR_PENCIL_5.arrangement();
        let targets = Targets::Pairs((5..=6).map(|n| (1, n - 1)).collect());
        cascade(&[seed], 7, &targets, &ExtensionConfig::default(), &CascadeConfig::default())
            .unwrap()
            .catalog
            .fingerprint()
    })
}

/// Beam and cascade outputs are identical across repeated runs and thread
/// counts.
pub fn determinism() -> Result<(), String> {
    let b1 = beam_fingerprint(1);
    if b1.is_empty() || b1 != beam_fingerprint(1) || b1 != beam_fingerprint(4) {
        return Err("beam search output depends on the run".into());
    }
    let c1 = cascade_fingerprint(1);
    if c1.is_empty() || c1 != cascade_fingerprint(1) || c1 != cascade_fingerprint(4) {
        return Err("cascade output depends on the run".into());
    }
    Ok(())
}

/// Rank by plain Gaussian elimination over the rationals.
pub fn rank_oracle(rows: &[Vec<num_bigint::BigInt>]) -> usize {
    use num_rational::BigRational;
    use num_traits::Zero;
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|c| BigRational::from_integer(c.clone())).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pivot;
            for c in col..ncols {
                let v = &f * &m[rank][c];
                m[r][c] -= v;
            }
        }
        rank += 1;
    }
    rank
}

/// Constraints `θ(α)(P_k) = 0` at `d + 1` points of every line, as rows
/// over the stacked coefficients `(f, g, h)` of a degree-`d` derivation.
/// A degree-`d` form on a line vanishing at `d + 1` points vanishes there.
pub fn logarithmic_constraints(arr: &Arrangement, d: usize) -> Vec<Vec<num_bigint::BigInt>> {
    use num_bigint::BigInt;
    let monos = freearr::poly::MonomialBasis::new(d);
    let mut rows = Vec::new();
    for l in triples(arr) {
        // two independent points on the line
        let mut pts: Vec<[i128; 3]> = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
            .iter()
            .map(|e| cross(l, *e))
            .filter(|p| *p != [0, 0, 0])
            .collect();
        pts.dedup_by(|a, b| normalize(*a) == normalize(*b));
        let (p, q) = (pts[0], pts[1]);
        for k in 0..=d as i128 {
            let pt = [p[0] + k * q[0], p[1] + k * q[1], p[2] + k * q[2]];
            let vals: Vec<BigInt> = monos
                .monomials()
                .iter()
                .map(|e| (0..3).map(|v| BigInt::from(pt[v]).pow(e[v])).product())
                .collect();
            let mut row = Vec::with_capacity(3 * vals.len());
            for coef in l {
                row.extend(vals.iter().map(|v| v * BigInt::from(coef)));
            }
            rows.push(row);
        }
    }
    rows
}
