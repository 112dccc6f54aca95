//! Combinatorial and algebraic scores and the per-step reward.
//!
//! The distance `δ` of the discriminant from a nonnegative perfect square
//! is `δ_max` when `b2 < n - 1`, `|Δ|` when `Δ < 0`, and the distance to the
//! nearest square otherwise, with `δ_max = (n - 1)^2` unless overridden.

use serde::{Deserialize, Serialize};

use crate::arrangement::{exact_sqrt, intersection_summary, Arrangement, LatticeSummary};
use crate::saito::{saito_functional, AlsConfig};
use crate::verify::verify_auto;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    /// Overrides `δ_max = (n - 1)^2`.
    pub delta_max: Option<f64>,
    /// Target exponents of the finished arrangement.
    pub targets: Option<(usize, usize)>,
    /// Up to this many lines the terminal bonus uses exact verification;
    /// beyond it the bonus is graded by `σ_alg`.
    pub exact_bonus_cutoff: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            delta_max: None,
            targets: None,
            exact_bonus_cutoff: 13,
        }
    }
}

impl ScoreConfig {
    pub fn delta_max(&self, n: usize) -> f64 {
        self.delta_max.unwrap_or_else(|| ((n.saturating_sub(1)).pow(2)).max(1) as f64)
    }

    /// `b2* = (n - 1) + d1 d2` for the target exponents.
    pub fn target_b2(&self) -> Option<i64> {
        self.targets.map(|(d1, d2)| (d1 + d2) as i64 + (d1 * d2) as i64)
    }
}

/// Distance of `Δ` from the nearest nonnegative perfect square.
pub fn square_distance(delta: i64) -> i64 {
    if delta < 0 {
        return -delta;
    }
    let r = (delta as f64).sqrt() as i64;
    // correct the float root
    let r = (r.saturating_sub(1)..=r + 1).filter(|k| k * k <= delta).max().unwrap_or(0);
    (delta - r * r).min((r + 1) * (r + 1) - delta)
}

/// `δ(A)` for an arrangement with `n` lines and the given `b2`.
pub fn delta(n: usize, b2: i64, config: &ScoreConfig) -> f64 {
    if b2 < n as i64 - 1 {
        return config.delta_max(n);
    }
    square_distance(crate::arrangement::discriminant(n, b2)) as f64
}

fn comb_from(n: usize, b2: i64, config: &ScoreConfig) -> f64 {
    if n < 3 {
        return 0.0;
    }
    let disc = crate::arrangement::discriminant(n, b2);
    if disc >= 0 && exact_sqrt(disc).is_some() {
        return 1.0;
    }
    (1.0 - 2.0 * delta(n, b2, config) / config.delta_max(n)).clamp(-1.0, 1.0)
}

/// `1` on a perfect-square discriminant, else `1 - 2 δ / δ_max`, clamped.
/// Arrangements with fewer than three lines score 0.
pub fn sigma_comb(arr: &Arrangement, config: &ScoreConfig) -> f64 {
    let s = intersection_summary(arr);
    comb_from(s.n, s.b2, config)
}

/// Negative score used when no candidate exponents exist: `-δ / δ_max`,
/// or `-|b2 - b2*| / b2*` when targets are set, floored at one unit so it
/// stays below zero and clamped at `-1`.
pub fn tier1(n: usize, b2: i64, config: &ScoreConfig) -> f64 {
    let (dist, scale) = match config.target_b2() {
        Some(t) => ((b2 - t).abs() as f64, t.max(1) as f64),
        None => (delta(n, b2, config), config.delta_max(n)),
    };
    -(dist.max(1.0) / scale).min(1.0)
}

fn alg_from(arr: &Arrangement, summary: &LatticeSummary, config: &ScoreConfig, als: &AlsConfig) -> f64 {
    if summary.n < 3 {
        return 0.0;
    }
    match summary.candidate_exponents() {
        Ok(e) => match saito_functional(arr, e.d1, e.d2, als) {
            Ok(r) => (1.0 - r.loss).clamp(0.0, 1.0),
            Err(err) => {
                log::warn!("Saito functional failed ({err}); scoring as not free");
                0.0
            }
        },
        Err(_) => tier1(summary.n, summary.b2, config),
    }
}

/// `1 - 𝔖` when candidate exponents exist, otherwise the negative tier-1
/// distance.
pub fn sigma_alg(arr: &Arrangement, config: &ScoreConfig, als: &AlsConfig) -> f64 {
    alg_from(arr, &intersection_summary(arr), config, als)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub w_comb: f64,
    pub w_alg: f64,
    pub w_feas: f64,
    pub w_b2: f64,
    pub w_int: f64,
    pub w_pen: f64,
    pub w_mult: f64,
    pub w_free: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_comb: 0.5,
            w_alg: 1.0,
            w_feas: 0.25,
            w_b2: 0.25,
            w_int: 0.1,
            w_pen: 0.1,
            w_mult: 0.1,
            w_free: 5.0,
        }
    }
}

impl RewardWeights {
    pub fn unit() -> Self {
        RewardWeights {
            w_comb: 1.0,
            w_alg: 1.0,
            w_feas: 1.0,
            w_b2: 1.0,
            w_int: 1.0,
            w_pen: 1.0,
            w_mult: 1.0,
            w_free: 1.0,
        }
    }
}

/// Unweighted reward terms and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub sigma_comb: f64,
    pub sigma_alg: f64,
    /// 1 if candidate exponents exist.
    pub feasible: f64,
    /// `1 - |b2 - b2*| / b2*`, or 0 without targets.
    pub sigma_b2: f64,
    /// Fraction of intersection points of multiplicity at least 3.
    pub sigma_int: f64,
    /// 1 for near-pencil-like arrangements (a point on at least `n - 1`
    /// lines, `n >= 4`).
    pub sigma_pen: f64,
    /// Change in the number of points of multiplicity at least 3.
    pub delta_m3: f64,
    /// Terminal freeness indicator, or `max(0, σ_alg)^2` above the exact
    /// cutoff; 0 on non-terminal steps.
    pub free_bonus: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn weighted_total(&self, w: &RewardWeights) -> f64 {
        w.w_comb * self.sigma_comb + w.w_alg * self.sigma_alg + w.w_feas * self.feasible + w.w_b2 * self.sigma_b2
            + w.w_int * self.sigma_int
            - w.w_pen * self.sigma_pen
            + w.w_mult * self.delta_m3
            + w.w_free * self.free_bonus
    }
}

/// Reward for the step that produced `arr`; `prev` is the summary before
/// the step (`None` for the first line).
pub fn reward(
    arr: &Arrangement,
    prev: Option<&LatticeSummary>,
    weights: &RewardWeights,
    config: &ScoreConfig,
    als: &AlsConfig,
    terminal: bool,
) -> RewardBreakdown {
    let s = intersection_summary(arr);
    let n = s.n;
    let sigma_comb = comb_from(n, s.b2, config);
    let sigma_alg = alg_from(arr, &s, config, als);
    let feasible = if n >= 3 && s.candidate_exponents().is_ok() { 1.0 } else { 0.0 };
    let sigma_b2 = match config.target_b2() {
        Some(t) => (1.0 - (s.b2 - t).abs() as f64 / t.max(1) as f64).clamp(-1.0, 1.0),
        None => 0.0,
    };
    let sigma_int = if s.points.is_empty() {
        0.0
    } else {
        s.count_at_least(3) as f64 / s.points.len() as f64
    };
    let sigma_pen = if n >= 4 && s.max_multiplicity() + 1 >= n { 1.0 } else { 0.0 };
    let delta_m3 = s.count_at_least(3) as f64 - prev.map_or(0, |p| p.count_at_least(3)) as f64;
    let free_bonus = if !terminal {
        0.0
    } else if n <= config.exact_bonus_cutoff {
        match verify_auto(arr) {
            Ok(o) if o.is_certified() => 1.0,
            _ => 0.0,
        }
    } else {
        sigma_alg.max(0.0).powi(2)
    };
    let mut r = RewardBreakdown {
        sigma_comb,
        sigma_alg,
        feasible,
        sigma_b2,
        sigma_int,
        sigma_pen,
        delta_m3,
        free_bonus,
        total: 0.0,
    };
    r.total = r.weighted_total(weights);
    r
}
