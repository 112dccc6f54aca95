//! Level-by-level bootstrap extension from certified seeds.

use serde::{Deserialize, Serialize};

use crate::arrangement::Arrangement;
use crate::search::catalog::{Catalog, CatalogEntry, Provenance};
use crate::search::extension::{bootstrap_extend, ExtendError, ExtensionConfig, Source};
use crate::verify::verify_auto;

/// Exponent pairs to extend toward. A pair `(d1, d2)` applies to seeds with
/// `d1 + d2` lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targets {
    /// Every admissible pair at every level.
    All,
    Pairs(Vec<(usize, usize)>),
}

impl Targets {
    /// Pairs `(d1, d2)`, `1 <= d1 <= d2`, with `d1 + d2 = level`.
    pub fn at_level(&self, level: usize) -> Vec<(usize, usize)> {
        match self {
            Targets::All => (1..=level / 2).map(|d1| (d1, level - d1)).collect(),
            Targets::Pairs(p) => {
                let mut v: Vec<(usize, usize)> = p
                    .iter()
                    .map(|&(a, b)| (a.min(b), a.max(b)))
                    .filter(|&(a, b)| a >= 1 && a + b == level)
                    .collect();
                v.sort();
                v.dedup();
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    /// At most this many arrangements of each level seed the next one.
    pub max_seeds_per_level: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig { max_seeds_per_level: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub seeds: usize,
    pub candidates: usize,
    pub discoveries: usize,
}

#[derive(Debug, Clone)]
pub struct CascadeResult {
    pub catalog: Catalog,
    pub levels: Vec<LevelReport>,
    /// Hashes of seeds that did not certify and were dropped.
    pub rejected_seeds: Vec<String>,
}

fn source_label(sources: &[Source]) -> String {
    let names: Vec<&str> = sources
        .iter()
        .map(|s| match s {
            Source::PointPair => "point_pair",
            Source::Pool => "pool",
            Source::MultiPoint => "multi_point",
        })
        .collect();
    names.join("+")
}

/// Extends certified seeds level by level up to `n_max` lines. Discoveries
/// at one level seed the next.
pub fn cascade(
    seeds: &[Arrangement],
    n_max: usize,
    targets: &Targets,
    extension: &ExtensionConfig,
    config: &CascadeConfig,
) -> Result<CascadeResult, ExtendError> {
    let mut catalog = Catalog::new();
    let mut rejected_seeds = Vec::new();
    for s in seeds {
        match verify_auto(s).map_err(ExtendError::Verify)? {
            o if o.is_certified() => {
                catalog.insert(CatalogEntry {
                    arrangement: s.clone(),
                    certificate: o.certificate().unwrap().clone(),
                    provenance: Provenance::seed(),
                });
            }
            _ => {
                log::warn!("seed {} is not certified free; skipping", s.hash());
                rejected_seeds.push(s.hash());
            }
        }
    }
    let mut levels = Vec::new();
    let Some(start) = catalog.iter().map(|e| e.arrangement.n()).min() else {
        return Ok(CascadeResult {
            catalog,
            levels,
            rejected_seeds,
        });
    };
    for level in start..n_max {
        let frontier: Vec<Arrangement> = catalog
            .at_level(level)
            .take(config.max_seeds_per_level)
            .map(|e| e.arrangement.clone())
            .collect();
        let mut report = LevelReport {
            level: level + 1,
            seeds: frontier.len(),
            candidates: 0,
            discoveries: 0,
        };
        for seed in &frontier {
            for (d1, d2) in targets.at_level(level) {
                let r = bootstrap_extend(seed, d1, d2, extension)?;
                report.candidates += r.candidates;
                for e in r.extensions {
                    let provenance = Provenance {
                        source: source_label(&e.candidate.sources),
                        seed_hash: Some(r.seed_hash.clone()),
                        delta_b2: Some(r.delta_b2_target),
                        saito: Some(e.saito),
                    };
                    if catalog.insert(CatalogEntry {
                        arrangement: e.arrangement,
                        certificate: e.certificate,
                        provenance,
                    }) {
                        report.discoveries += 1;
                    }
                }
            }
        }
        log::info!(
            "level {}: {} seeds, {} candidates, {} discoveries",
            report.level,
            report.seeds,
            report.candidates,
            report.discoveries
        );
        levels.push(report);
    }
    Ok(CascadeResult {
        catalog,
        levels,
        rejected_seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_per_level() {
        assert_eq!(Targets::All.at_level(5), vec![(1, 4), (2, 3)]);
        let t = Targets::Pairs(vec![(1, 4), (4, 1), (2, 2)]);
        assert_eq!(t.at_level(5), vec![(1, 4)]);
        assert_eq!(t.at_level(4), vec![(2, 2)]);
    }

    #[test]
    fn empty_seeds() {
        let r = cascade(&[], 10, &Targets::All, &ExtensionConfig::default(), &CascadeConfig::default()).unwrap();
        assert!(r.catalog.is_empty());
    }
}
