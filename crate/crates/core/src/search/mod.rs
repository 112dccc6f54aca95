//! Construction of free arrangements: scores and rewards, deterministic
//! beam search over an integer line pool, bootstrap extension of certified
//! arrangements, two-pencil constructions and the discovery cascade.

pub mod beam;
pub mod cascade;
pub mod catalog;
pub mod extension;
pub mod pencil;
pub mod pool;
pub mod scores;

use serde::{Deserialize, Serialize};

use crate::saito::AlsConfig;
pub use beam::{beam_search_build, BeamConfig, BeamResult};
pub use cascade::{cascade, CascadeConfig, Targets};
pub use catalog::{Catalog, CatalogEntry, Provenance};
pub use extension::{bootstrap_extend, enumerate_extension_candidates, Candidate, ExtensionConfig, Sources};
pub use pencil::supersolvable_two_pencil;
pub use pool::{candidate_pool, CandidatePool};
pub use scores::{reward, sigma_alg, sigma_comb, RewardBreakdown, RewardWeights, ScoreConfig};

/// Everything a search run can be configured with, as read from a JSON
/// config file. Missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub weights: RewardWeights,
    pub scores: ScoreConfig,
    pub als: AlsConfig,
    pub pool_bound: u32,
    pub beam_width: usize,
    pub extension: ExtensionConfig,
    pub cascade: CascadeConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            weights: RewardWeights::default(),
            scores: ScoreConfig::default(),
            als: AlsConfig::default(),
            pool_bound: 2,
            beam_width: 8,
            extension: ExtensionConfig::default(),
            cascade: CascadeConfig::default(),
        }
    }
}
