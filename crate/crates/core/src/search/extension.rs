//! Extending a certified free arrangement by one line.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{delta_b2, intersection_summary, Arrangement, LatticeSummary, Line};
use crate::saito::{saito_functional, AlsConfig};
use crate::search::pool::candidate_pool;
use crate::verify::{verify_free_with_hint, FloatHint, FreenessCertificate, VerifyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Join of two existing intersection points.
    PointPair,
    /// Line of the integer pool.
    Pool,
    /// Join of two points of multiplicity at least 3, or a line through at
    /// least three existing points.
    MultiPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sources {
    pub point_pairs: bool,
    /// Pool bound, if the pool source is enabled.
    pub pool: Option<u32>,
    pub multi_point: bool,
}

impl Default for Sources {
    fn default() -> Self {
        Sources {
            point_pairs: true,
            pool: Some(2),
            multi_point: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtensionConfig {
    /// Candidates with `𝔖` above this are not verified.
    pub threshold: f64,
    pub sources: Sources,
    /// Keep only candidates changing `b2` by exactly this much. When
    /// extending toward given exponents the target is derived from them
    /// unless set here.
    pub delta_b2: Option<i64>,
    pub als: AlsConfig,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        ExtensionConfig {
            threshold: 0.05,
            sources: Sources::default(),
            delta_b2: None,
            als: AlsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub line: Line,
    /// Every source that produced the line, sorted.
    pub sources: Vec<Source>,
    pub delta_b2: i64,
}

/// Candidate lines from the enabled sources, excluding lines of `arr`,
/// sorted by canonical form and filtered by the `Δb2` target if one is set.
pub fn enumerate_extension_candidates(arr: &Arrangement, config: &ExtensionConfig) -> Vec<Candidate> {
    let summary = intersection_summary(arr);
    enumerate_with_summary(arr, &summary, config, config.delta_b2)
}

fn enumerate_with_summary(
    arr: &Arrangement,
    summary: &LatticeSummary,
    config: &ExtensionConfig,
    target: Option<i64>,
) -> Vec<Candidate> {
    let mut found: BTreeMap<Line, Vec<Source>> = BTreeMap::new();
    let pts = &summary.points;
    if config.sources.point_pairs || config.sources.multi_point {
        let mut joins: BTreeMap<Line, usize> = BTreeMap::new();
        let mut rich_joins = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let l = Line::join(&pts[i].point, &pts[j].point);
                if arr.contains(&l) {
                    continue;
                }
                if pts[i].multiplicity() >= 3 && pts[j].multiplicity() >= 3 {
                    rich_joins.push(l.clone());
                }
                *joins.entry(l).or_insert(0) += 1;
            }
        }
        for (l, pairs) in joins {
            if config.sources.point_pairs {
                found.entry(l.clone()).or_default().push(Source::PointPair);
            }
            // k collinear points give k(k-1)/2 pairs
            if config.sources.multi_point && pairs >= 3 {
                found.entry(l).or_default().push(Source::MultiPoint);
            }
        }
        if config.sources.multi_point {
            for l in rich_joins {
                let s = found.entry(l).or_default();
                if !s.contains(&Source::MultiPoint) {
                    s.push(Source::MultiPoint);
                }
            }
        }
    }
    if let Some(bound) = config.sources.pool {
        for l in candidate_pool(bound).lines {
            if !arr.contains(&l) {
                found.entry(l).or_default().push(Source::Pool);
            }
        }
    }
    found
        .into_iter()
        .filter_map(|(line, mut sources)| {
            let d = delta_b2(arr, summary, &line).expect("candidates are new lines");
            if target.is_some_and(|t| t != d) {
                return None;
            }
            sources.sort();
            Some(Candidate {
                line,
                sources,
                delta_b2: d,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtendError {
    #[error("target exponents ({d1}, {d2}) must add up to the seed size {n}")]
    Exponents { d1: usize, d2: usize, n: usize },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// A certified one-line extension.
#[derive(Debug, Clone)]
pub struct Extension {
    pub arrangement: Arrangement,
    pub certificate: FreenessCertificate,
    pub candidate: Candidate,
    /// `𝔖` at pre-filter time.
    pub saito: f64,
}

/// What happened to one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fate {
    Rejected,
    NotFree,
    Certified,
}

#[derive(Debug, Clone)]
pub struct ExtensionReport {
    pub seed_hash: String,
    pub exponents: (usize, usize),
    pub delta_b2_target: i64,
    pub candidates: usize,
    /// `(line, 𝔖, fate)` per candidate, in candidate order.
    pub evaluated: Vec<(Line, f64, Fate)>,
    pub extensions: Vec<Extension>,
}

/// Extends a certified free `seed` of `n` lines toward exponents
/// `(d1p, d2p)` with `d1p + d2p = n`: candidates achieving the `Δb2` target
/// are pre-filtered by `𝔖` and the survivors verified exactly.
pub fn bootstrap_extend(
    seed: &Arrangement,
    d1p: usize,
    d2p: usize,
    config: &ExtensionConfig,
) -> Result<ExtensionReport, ExtendError> {
    let n = seed.n();
    if d1p + d2p != n {
        return Err(ExtendError::Exponents { d1: d1p, d2: d2p, n });
    }
    let summary = intersection_summary(seed);
    let target = config
        .delta_b2
        .unwrap_or((n + d1p * d2p) as i64 - summary.b2);
    let candidates = enumerate_with_summary(seed, &summary, config, Some(target));
    let results: Vec<Result<(f64, Option<Extension>), ExtendError>> = candidates
        .par_iter()
        .map(|c| {
            let ext = seed.with_line(c.line.clone()).expect("candidate is new");
            let report = match saito_functional(&ext, d1p, d2p, &config.als) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("pre-filter failed on {}: {e}", c.line);
                    return Ok((1.0, None));
                }
            };
            if report.loss > config.threshold {
                return Ok((report.loss, None));
            }
            let hint = FloatHint {
                theta1: &report.theta1,
                theta2: &report.theta2,
            };
            let outcome = verify_free_with_hint(&ext, d1p, d2p, Some(hint))?;
            Ok((
                report.loss,
                outcome.certificate().map(|cert| Extension {
                    arrangement: ext.clone(),
                    certificate: cert.clone(),
                    candidate: c.clone(),
                    saito: report.loss,
                }),
            ))
        })
        .collect();
    let mut evaluated = Vec::with_capacity(candidates.len());
    let mut extensions = Vec::new();
    for (c, r) in candidates.iter().zip(results) {
        let (loss, ext) = r?;
        let fate = match (&ext, loss <= config.threshold) {
            (Some(_), _) => Fate::Certified,
            (None, true) => Fate::NotFree,
            (None, false) => Fate::Rejected,
        };
        evaluated.push((c.line.clone(), loss, fate));
        extensions.extend(ext);
    }
    Ok(ExtensionReport {
        seed_hash: seed.hash(),
        exponents: (d1p, d2p),
        delta_b2_target: target,
        candidates: candidates.len(),
        evaluated,
        extensions,
    })
}
