//! Deterministic beam search over the line pool, ranked by cumulative
//! reward.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{intersection_summary, Arrangement, LatticeSummary, Line};
use crate::saito::AlsConfig;
use crate::search::pool::CandidatePool;
use crate::search::scores::{reward, RewardBreakdown, RewardWeights, ScoreConfig};
use crate::verify::{verify_auto, FreenessCertificate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamConfig {
    pub beam_width: usize,
    /// Seeds the ALS restarts and breaks reward ties.
    pub seed: u64,
    pub weights: RewardWeights,
    pub scores: ScoreConfig,
    pub als: AlsConfig,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            beam_width: 8,
            seed: AlsConfig::default().seed,
            weights: RewardWeights::default(),
            scores: ScoreConfig::default(),
            als: AlsConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BeamResult {
    pub arrangement: Arrangement,
    pub cumulative_reward: f64,
    pub sigma_alg: f64,
    pub certificate: Option<FreenessCertificate>,
    /// Per-step rewards along the trajectory.
    pub rewards: Vec<RewardBreakdown>,
}

#[derive(Clone)]
struct State {
    lines: Vec<Line>,
    summary: Option<LatticeSummary>,
    cumulative: f64,
    rewards: Vec<RewardBreakdown>,
    hash: String,
}

fn tie_break(seed: u64, hash: &str) -> u64 {
    let h = u64::from_str_radix(&hash[..16], 16).unwrap_or(0);
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds `n`-line arrangements one pool line at a time, keeping the
/// `beam_width` best partial arrangements (as line sets) by cumulative
/// reward toward exponents `(d1, d2)`. The final beam is sorted by `σ_alg`,
/// then certified before uncertified, then by cumulative reward.
pub fn beam_search_build(n: usize, d1: usize, d2: usize, pool: &CandidatePool, config: &BeamConfig) -> Vec<BeamResult> {
    assert!(config.beam_width >= 1, "beam width must be positive");
    let scores = ScoreConfig {
        targets: Some((d1, d2)),
        ..config.scores
    };
    let als = AlsConfig {
        seed: config.seed,
        ..config.als
    };
    let mut beam = vec![State {
        lines: Vec::new(),
        summary: None,
        cumulative: 0.0,
        rewards: Vec::new(),
        hash: String::new(),
    }];
    for step in 1..=n {
        let terminal = step == n;
        let expansions: Vec<(usize, &Line)> = beam
            .iter()
            .enumerate()
            .flat_map(|(i, s)| pool.lines.iter().filter(|l| !s.lines.contains(l)).map(move |l| (i, l)))
            .collect();
        let children: Vec<State> = expansions
            .par_iter()
            .map(|&(i, l)| {
                let parent = &beam[i];
                let mut lines = parent.lines.clone();
                lines.push(l.clone());
                let arr = Arrangement::new(lines.clone()).expect("pool lines are distinct");
                let r = reward(&arr, parent.summary.as_ref(), &config.weights, &scores, &als, terminal);
                let mut rewards = parent.rewards.clone();
                rewards.push(r);
                State {
                    lines,
                    summary: Some(intersection_summary(&arr)),
                    cumulative: parent.cumulative + r.total,
                    rewards,
                    hash: arr.hash(),
                }
            })
            .collect();
        // identical line sets reached in different orders: keep the best
        let mut best: HashMap<String, State> = HashMap::new();
        for c in children {
            match best.get(&c.hash) {
                Some(b) if b.cumulative >= c.cumulative => {}
                _ => {
                    best.insert(c.hash.clone(), c);
                }
            }
        }
        let mut next: Vec<State> = best.into_values().collect();
        next.sort_by(|a, b| {
            b.cumulative
                .total_cmp(&a.cumulative)
                .then_with(|| tie_break(config.seed, &a.hash).cmp(&tie_break(config.seed, &b.hash)))
                .then_with(|| a.hash.cmp(&b.hash))
        });
        next.truncate(config.beam_width);
        if next.is_empty() {
            break;
        }
        beam = next;
    }
    let mut results: Vec<BeamResult> = beam
        .into_par_iter()
        .filter(|s| s.lines.len() == n)
        .map(|s| {
            let arrangement = Arrangement::new(s.lines).unwrap();
            let certificate = verify_auto(&arrangement).ok().and_then(|o| o.certificate().cloned());
            BeamResult {
                sigma_alg: s.rewards.last().map_or(0.0, |r| r.sigma_alg),
                arrangement,
                cumulative_reward: s.cumulative,
                certificate,
                rewards: s.rewards,
            }
        })
        .collect();
    results.sort_by(|a, b| {
        b.sigma_alg
            .total_cmp(&a.sigma_alg)
            .then_with(|| b.certificate.is_some().cmp(&a.certificate.is_some()))
            .then_with(|| b.cumulative_reward.total_cmp(&a.cumulative_reward))
            .then_with(|| a.arrangement.hash().cmp(&b.arrangement.hash()))
    });
    results
}
