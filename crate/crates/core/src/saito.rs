//! Evaluation of the Saito functional by alternating least squares.
//!
//! For fixed `α2` the map `α1 ↦ T(α1, α2)` is linear, so each half-step is
//! a homogeneous least-squares problem. The half-steps here solve it in
//! whitened coordinates (orthonormalized columns, unit `q`), where the
//! smallest right singular vector of `[U | -q]` is exactly the maximizer of
//! the squared cosine with `q`. That makes the squared cosine non-decreasing
//! from one half-step to the next.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{intersection_summary, Arrangement, ExponentObstruction};
use crate::derivation::{derivation_matrix, null_space_float_or_exact, DerivationError, NullBasisFloat, DEFAULT_NULL_TOL};
use crate::tensor::{assemble_saito_tensor, non_euler_fraction, BilinearMap, DEFAULT_TENSOR_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlsConfig {
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Contractions with norm below this count as zero.
    pub zero_guard: f64,
    /// Dense tensor size limit before switching to lazy contraction.
    pub tensor_budget: usize,
}

impl Default for AlsConfig {
    fn default() -> Self {
        AlsConfig {
            iterations: 10,
            restarts: 3,
            seed: 0x5A17_0F4E,
            zero_guard: 1e-12,
            tensor_budget: DEFAULT_TENSOR_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SaitoError {
    #[error("no candidate exponents: {0}")]
    NoCandidateExponents(ExponentObstruction),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error("invalid ALS configuration: {0}")]
    Config(&'static str),
}

/// Why a run ended at the conventional value 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// Every restart ended with `‖T(α1, α2)‖` below the zero guard.
    AllContractionsZero,
    /// One of the kernels is trivial.
    EmptyKernel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlsResult {
    pub loss: f64,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub c: f64,
    pub best_restart: usize,
    /// Squared cosine after every half-step, one list per restart.
    pub histories: Vec<Vec<f64>>,
    pub restart_losses: Vec<f64>,
    pub degenerate: Option<Degeneracy>,
}

impl AlsResult {
    pub fn history(&self) -> &[f64] {
        &self.histories[self.best_restart]
    }

    fn degenerate(kind: Degeneracy, k1: usize, k2: usize, restarts: usize) -> AlsResult {
        AlsResult {
            loss: 1.0,
            alpha1: vec![0.0; k1],
            alpha2: vec![0.0; k2],
            c: 0.0,
            best_restart: 0,
            histories: vec![Vec::new(); restarts.max(1)],
            restart_losses: vec![1.0; restarts.max(1)],
            degenerate: Some(kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    /// Unit-length parameter vector.
    pub alpha: Vec<f64>,
    /// Scale of `q`, divided by the norm the raw `α` had.
    pub c: f64,
    /// `‖[A | -q] w‖` at the unit minimizer `w` before re-normalizing `α`.
    pub residual: f64,
}

/// Unit `w = (α, c)` minimizing `‖[A | -q] w‖`, read off the Gram matrix of
/// `[A | -q]`; `α` is then rescaled to unit length.
pub fn homogeneous_lsq(a: &DMatrix<f64>, q: &[f64]) -> LsqSolution {
    let (rows, k) = a.shape();
    assert_eq!(rows, q.len());
    let mut b = DMatrix::zeros(rows, k + 1);
    b.columns_mut(0, k).copy_from(a);
    for (r, &x) in q.iter().enumerate() {
        b[(r, k)] = -x;
    }
    let gram = b.transpose() * &b;
    let eig = SymmetricEigen::new(gram);
    let imin = eig.eigenvalues.imin();
    let w = eig.eigenvectors.column(imin);
    let residual = eig.eigenvalues[imin].max(0.0).sqrt();
    let alpha: Vec<f64> = w.rows(0, k).iter().copied().collect();
    let norm = alpha.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return LsqSolution {
            alpha,
            c: w[k],
            residual,
        };
    }
    LsqSolution {
        alpha: alpha.iter().map(|x| x / norm).collect(),
        c: w[k] / norm,
        residual,
    }
}

/// Relative eigenvalue floor below which a direction of `AᵀA` (or `AAᵀ`)
/// counts as part of a kernel.
const GRAM_FLOOR: f64 = 1e-13;

/// Maximizer over unit `α` of the squared cosine between `A α` and `q`:
/// the normalized least-squares solution `A⁺ q`, whose image is the
/// projection of `q` onto the column space of `A`. The pseudo-inverse is
/// applied through the Gram matrix of the smaller side of `A`.
fn angular_step(a: &DMatrix<f64>, q_unit: &[f64]) -> Option<Vec<f64>> {
    let (m, k) = a.shape();
    let q = DVector::from_column_slice(q_unit);
    let gram = if k <= m { a.transpose() * a } else { a * a.transpose() };
    let eig = SymmetricEigen::new(gram);
    let lmax = eig.eigenvalues.max();
    if !(lmax > 0.0) {
        return None;
    }
    // α = Σ w (wᵀ Aᵀ q) / λ over eigenpairs of AᵀA, or Aᵀ Σ u (uᵀ q) / λ
    // over eigenpairs of AAᵀ
    let rhs = if k <= m { a.transpose() * &q } else { q };
    let mut sol = DVector::zeros(rhs.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > GRAM_FLOOR * lmax {
            let w = eig.eigenvectors.column(i);
            sol.axpy(w.dot(&rhs) / lambda, &w, 1.0);
        }
    }
    let alpha = if k <= m { sol } else { a.transpose() * sol };
    let norm = alpha.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    Some((alpha / norm).as_slice().to_vec())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Squared cosine between `v` and `q`, zero when `‖v‖` is below `guard`.
pub fn cos2(v: &[f64], q: &[f64], guard: f64) -> f64 {
    let nv = norm(v);
    let nq = norm(q);
    if nv < guard || nq == 0.0 {
        return 0.0;
    }
    let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
    ((dot / (nv * nq)).powi(2)).min(1.0)
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    // splitmix64 step so consecutive restarts get unrelated streams
    let mut z = seed.wrapping_add((restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct RestartOutcome {
    alpha1: Vec<f64>,
    alpha2: Vec<f64>,
    history: Vec<f64>,
    loss: f64,
    zero: bool,
}

fn run_restart(map: &BilinearMap, q_unit: &[f64], config: &AlsConfig, restart: usize) -> RestartOutcome {
    let (k1, k2) = (map.k1(), map.k2());
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(config.seed, restart));
    let mut alpha2: Vec<f64> = (0..k2).map(|_| StandardNormal.sample(&mut rng)).collect();
    let n2 = norm(&alpha2);
    alpha2.iter_mut().for_each(|x| *x /= n2);
    let mut alpha1: Vec<f64> = (0..k1).map(|_| StandardNormal.sample(&mut rng)).collect();
    let n1 = norm(&alpha1);
    alpha1.iter_mut().for_each(|x| *x /= n1);

    let mut history = Vec::with_capacity(2 * config.iterations);
    for _ in 0..config.iterations {
        let a1 = map.fix_second(&alpha2);
        if let Some(a) = angular_step(&a1, q_unit) {
            alpha1 = a;
        }
        history.push(cos2(&map.contract(&alpha1, &alpha2), q_unit, config.zero_guard));
        let a2 = map.fix_first(&alpha1);
        if let Some(a) = angular_step(&a2, q_unit) {
            alpha2 = a;
        }
        history.push(cos2(&map.contract(&alpha1, &alpha2), q_unit, config.zero_guard));
    }
    let v = map.contract(&alpha1, &alpha2);
    let zero = norm(&v) < config.zero_guard;
    let loss = if zero { 1.0 } else { 1.0 - cos2(&v, q_unit, 0.0) };
    RestartOutcome {
        alpha1,
        alpha2,
        history,
        loss: loss.clamp(0.0, 1.0),
        zero,
    }
}

/// Best of `restarts` independent ALS runs. Restarts run in parallel and
/// the reduction is by loss with ties going to the lower restart index.
pub fn als_minimize(map: &BilinearMap, config: &AlsConfig) -> Result<AlsResult, SaitoError> {
    if config.iterations == 0 {
        return Err(SaitoError::Config("iterations must be at least 1"));
    }
    if config.restarts == 0 {
        return Err(SaitoError::Config("restarts must be at least 1"));
    }
    let (k1, k2) = (map.k1(), map.k2());
    if k1 == 0 || k2 == 0 {
        return Ok(AlsResult::degenerate(Degeneracy::EmptyKernel, k1, k2, config.restarts));
    }
    let q = map.q();
    let nq = norm(q);
    if nq == 0.0 {
        return Err(SaitoError::Config("target vector q is zero"));
    }
    let q_unit: Vec<f64> = q.iter().map(|x| x / nq).collect();
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(map, &q_unit, config, r))
        .collect();
    let restart_losses: Vec<f64> = outcomes.iter().map(|o| o.loss).collect();
    let all_zero = outcomes.iter().all(|o| o.zero);
    let best = (0..outcomes.len())
        .min_by(|&a, &b| restart_losses[a].total_cmp(&restart_losses[b]).then(a.cmp(&b)))
        .unwrap();
    let o = &outcomes[best];
    let v = map.contract(&o.alpha1, &o.alpha2);
    // c with T(α1, α2) ≈ c q
    let c = v.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() / (nq * nq);
    Ok(AlsResult {
        loss: if all_zero { 1.0 } else { o.loss },
        alpha1: o.alpha1.clone(),
        alpha2: o.alpha2.clone(),
        c,
        best_restart: best,
        histories: outcomes.iter().map(|o| o.history.clone()).collect(),
        restart_losses,
        degenerate: all_zero.then_some(Degeneracy::AllContractionsZero),
    })
}

/// Full evaluation of the functional at exponents `(d1, d2)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaitoReport {
    pub loss: f64,
    pub d1: usize,
    pub d2: usize,
    pub k1: usize,
    pub k2: usize,
    pub n_out: usize,
    pub als: AlsResult,
    /// The optimum lies (numerically) inside the Euler multiples, so it is a
    /// spurious zero of `T` rather than a freeness witness.
    pub euler_degenerate: bool,
    /// One of the numerical kernels needed the exact-nullity fallback.
    pub kernel_fallback: bool,
    pub lazy_tensor: bool,
    /// Stacked coefficients of `V1 α1` and `V2 α2` at the optimum.
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub timing_ms: f64,
}

fn float_kernel(arr: &Arrangement, d: usize) -> NullBasisFloat {
    null_space_float_or_exact(&derivation_matrix(arr, d), DEFAULT_NULL_TOL)
}

/// Derivation matrices, float null bases, tensor and ALS at `(d1, d2)`.
pub fn saito_functional(arr: &Arrangement, d1: usize, d2: usize, config: &AlsConfig) -> Result<SaitoReport, SaitoError> {
    let start = Instant::now();
    let n = arr.n();
    if d1 + d2 + 1 != n {
        return Err(DerivationError::DegreeMismatch {
            d1,
            d2,
            expected: n.saturating_sub(1),
        }
        .into());
    }
    let (v1, v2) = rayon::join(|| float_kernel(arr, d1), || float_kernel(arr, d2));
    let (k1, k2) = (v1.nullity(), v2.nullity());
    let kernel_fallback = v1.exact_fallback || v2.exact_fallback;
    let n_out = crate::poly::basis_size(n);
    if k1 == 0 || k2 == 0 {
        return Ok(SaitoReport {
            loss: 1.0,
            d1,
            d2,
            k1,
            k2,
            n_out,
            als: AlsResult::degenerate(Degeneracy::EmptyKernel, k1, k2, config.restarts),
            euler_degenerate: false,
            kernel_fallback,
            lazy_tensor: false,
            theta1: vec![0.0; v1.v.nrows()],
            theta2: vec![0.0; v2.v.nrows()],
            timing_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let map = assemble_saito_tensor(arr, &v1, &v2, config.tensor_budget)?;
    let als = als_minimize(&map, config)?;
    let euler_degenerate = als.degenerate.is_none()
        && (non_euler_fraction(&v1.v, d1, &als.alpha1) < 1e-8 || non_euler_fraction(&v2.v, d2, &als.alpha2) < 1e-8);
    let theta1 = (&v1.v * DVector::from_column_slice(&als.alpha1)).as_slice().to_vec();
    let theta2 = (&v2.v * DVector::from_column_slice(&als.alpha2)).as_slice().to_vec();
    Ok(SaitoReport {
        loss: als.loss,
        d1,
        d2,
        k1,
        k2,
        n_out,
        euler_degenerate,
        kernel_fallback,
        lazy_tensor: matches!(map, BilinearMap::Lazy(_)),
        als,
        theta1,
        theta2,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// [`saito_functional`] at the arrangement's candidate exponents.
pub fn saito_functional_auto(arr: &Arrangement, config: &AlsConfig) -> Result<SaitoReport, SaitoError> {
    let e = intersection_summary(arr)
        .candidate_exponents()
        .map_err(SaitoError::NoCandidateExponents)?;
    saito_functional(arr, e.d1, e.d2, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lsq_with_q_in_span() {
        let q = vec![1.0, 2.0, -1.0];
        let a = DMatrix::from_column_slice(3, 1, &q);
        let s = homogeneous_lsq(&a, &q);
        assert!((s.alpha[0].abs() - 1.0).abs() < 1e-12);
        assert!(s.residual < 1e-7);
    }

    #[test]
    fn lsq_with_orthogonal_column() {
        let q = vec![1.0, 0.0, 0.0];
        let a = DMatrix::from_column_slice(3, 1, &[0.0, 2.0, 0.0]);
        let s = homogeneous_lsq(&a, &q);
        // Gram of [A | -q] is diag(4, 1)
        assert!((s.residual * s.residual - 1.0).abs() < 1e-12);
        // the minimizing direction is pure c, so α carries no weight
        assert_eq!(s.alpha[0], 0.0);
        assert!((s.c.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn restart_seeds_differ() {
        assert_ne!(restart_seed(1, 0), restart_seed(1, 1));
        assert_eq!(restart_seed(7, 2), restart_seed(7, 2));
    }

    #[test]
    fn rejects_bad_config() {
        let t = crate::tensor::SaitoTensor::from_fn(2, 1, 1, vec![1.0, 0.0], |_, _, _| 1.0);
        let map = BilinearMap::Dense(t);
        let cfg = AlsConfig {
            iterations: 0,
            ..Default::default()
        };
        assert!(als_minimize(&map, &cfg).is_err());
    }
}
