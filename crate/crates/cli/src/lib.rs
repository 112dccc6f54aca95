//! Batch command-line surface for the freearr pipeline. Every command
//! returns a [`CommandResult`] that the binary prints as JSON; exit code 0
//! means success, 1 a domain failure (not free, no candidate exponents,
//! failed check) and 2 a usage or input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use freearr::arrangement::{intersection_summary, read_arrangement_json, write_arrangement_json, Arrangement};
use freearr::saito::{saito_functional, AlsConfig};
use freearr::search::catalog::{write_catalog, Catalog, CatalogEntry, Provenance};
use freearr::search::extension::{bootstrap_extend, Fate};
use freearr::search::{
    beam_search_build, candidate_pool, cascade, supersolvable_two_pencil, BeamConfig, SearchConfig, Targets,
};
use freearr::verify::{
    check_certificate, format_rational, read_certificate_json, verify_auto, verify_free, write_certificate_json,
    FreenessCertificate, VerificationOutcome,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Serialize)]
pub struct CommandResult {
    pub command: String,
    /// Hash of the primary input arrangement, when there is one.
    pub input_hash: Option<String>,
    pub exit_code: u8,
    pub payload: Value,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{message}")]
    Domain {
        message: String,
        payload: Value,
        input_hash: Option<String>,
    },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type Outcome = Result<(Option<String>, Value), CliError>;

#[derive(Debug, Parser)]
#[command(name = "freearr", version, about = "Free line arrangements: invariants, Saito functional, exact certificates, search")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON search configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct AlsFlags {
    /// ALS iterations per restart.
    #[arg(long)]
    als_iters: Option<usize>,
    /// Number of ALS restarts.
    #[arg(long)]
    als_restarts: Option<usize>,
    /// Random seed for ALS starting points and beam tie-breaks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
struct ExtendFlags {
    /// Coefficient bound of the integer candidate pool.
    #[arg(long)]
    pool_bound: Option<u32>,
    /// Candidates whose Saito functional exceeds this are not verified.
    #[arg(long)]
    prefilter_threshold: Option<f64>,
    /// Required change of b2 (derived from the exponents when omitted).
    #[arg(long, allow_hyphen_values = true)]
    delta_b2: Option<i64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Multiplicity profile, b2, discriminant, candidate exponents, Tjurina
    /// number and characteristic polynomial.
    Invariants {
        /// Arrangement JSON file.
        file: PathBuf,
    },
    /// Saito functional at the candidate (or given) exponents.
    Saito {
        /// Arrangement JSON file.
        file: PathBuf,
        /// Exponents d1,d2 (candidate exponents when omitted).
        #[arg(long, value_parser = parse_pair)]
        exponents: Option<(usize, usize)>,
        #[command(flatten)]
        als: AlsFlags,
    },
    /// Exact freeness certification; writes the certificate on success.
    Verify {
        /// Arrangement JSON file.
        file: PathBuf,
        /// Exponents d1,d2 (candidate exponents when omitted).
        #[arg(long, value_parser = parse_pair)]
        exponents: Option<(usize, usize)>,
        /// Directory for the certificate file (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-checks a certificate against an arrangement.
    Check {
        /// Arrangement JSON file.
        arrangement: PathBuf,
        /// Certificate JSON file.
        certificate: PathBuf,
    },
    /// Certified two-pencil arrangement with the given exponents.
    Construct {
        /// Target exponents d1,d2.
        #[arg(long, value_parser = parse_pair)]
        exponents: (usize, usize),
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-line extensions of a certified seed toward the given exponents.
    Extend {
        /// Certified seed arrangement file.
        seed_file: PathBuf,
        /// Target exponents d1,d2.
        #[arg(long, value_parser = parse_pair)]
        exponents: (usize, usize),
        #[command(flatten)]
        ext: ExtendFlags,
        #[command(flatten)]
        als: AlsFlags,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Beam search for an n-line arrangement with the given exponents.
    Search {
        /// Number of lines.
        #[arg(long)]
        n: usize,
        /// Target exponents d1,d2.
        #[arg(long, value_parser = parse_pair)]
        exponents: (usize, usize),
        /// Coefficient bound of the candidate pool.
        #[arg(long)]
        pool_bound: Option<u32>,
        /// Beam width.
        #[arg(long)]
        beam: Option<usize>,
        #[command(flatten)]
        als: AlsFlags,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Level-by-level extension of certified seeds.
    Cascade {
        /// Seed arrangement files, or directories of them.
        seeds: Vec<PathBuf>,
        /// Largest arrangement size to reach.
        #[arg(long)]
        n_max: usize,
        /// Target exponent pairs; all admissible pairs when omitted.
        #[arg(long = "exponents", value_parser = parse_pair)]
        targets: Vec<(usize, usize)>,
        /// Certified arrangements carried from one level to the next.
        #[arg(long)]
        max_seeds_per_level: Option<usize>,
        #[command(flatten)]
        ext: ExtendFlags,
        #[command(flatten)]
        als: AlsFlags,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Saito functional over a batch of arrangement files.
    Survey {
        /// Arrangement JSON files.
        files: Vec<PathBuf>,
        #[command(flatten)]
        als: AlsFlags,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Invariants { .. } => "invariants",
            Command::Saito { .. } => "saito",
            Command::Verify { .. } => "verify",
            Command::Check { .. } => "check",
            Command::Construct { .. } => "construct",
            Command::Extend { .. } => "extend",
            Command::Search { .. } => "search",
            Command::Cascade { .. } => "cascade",
            Command::Survey { .. } => "survey",
        }
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected d1,d2 but got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad exponent {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad exponent {b:?}"))?;
    Ok((a.min(b), a.max(b)))
}

fn read_arrangement(path: &Path) -> Result<Arrangement, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    read_arrangement_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<SearchConfig, CliError> {
    match path {
        None => Ok(SearchConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn apply_als(mut als: AlsConfig, flags: &AlsFlags) -> AlsConfig {
    if let Some(i) = flags.als_iters {
        als.iterations = i;
    }
    if let Some(r) = flags.als_restarts {
        als.restarts = r;
    }
    if let Some(s) = flags.seed {
        als.seed = s;
    }
    als
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn certificate_summary(cert: &FreenessCertificate) -> Value {
    json!({
        "exponents": [cert.d1, cert.d2],
        "c": format_rational(&cert.c),
        "arrangement_hash": cert.arrangement_hash,
    })
}

fn exponents_or_candidates(arr: &Arrangement, given: Option<(usize, usize)>) -> Result<(usize, usize), CliError> {
    if let Some(e) = given {
        if e.0 == 0 || e.0 + e.1 + 1 != arr.n() {
            return Err(usage(format!("exponents {e:?} must be positive and add up to n - 1 = {}", arr.n() - 1)));
        }
        return Ok(e);
    }
    intersection_summary(arr)
        .candidate_exponents()
        .map(|e| (e.d1, e.d2))
        .map_err(|o| CliError::Domain {
            message: format!("no candidate exponents: {o}"),
            payload: json!({ "status": "no_candidate_exponents", "reason": o }),
            input_hash: Some(arr.hash()),
        })
}

fn cmd_invariants(file: &Path) -> Outcome {
    let arr = read_arrangement(file)?;
    let s = intersection_summary(&arr);
    let t: BTreeMap<String, usize> = s.t.iter().map(|(m, c)| (m.to_string(), *c)).collect();
    let tj = s.tjurina();
    let chi = s.characteristic_polynomial();
    let exponents = match s.candidate_exponents() {
        Ok(e) => json!({ "d1": e.d1, "d2": e.d2 }),
        Err(o) => json!({ "none": o }),
    };
    Ok((
        Some(arr.hash()),
        json!({
            "n": s.n,
            "t": t,
            "b2": s.b2,
            "discriminant": s.discriminant(),
            "candidate_exponents": exponents,
            "tjurina": tj.tau,
            "tjurina_consistent": tj.consistent(),
            "char_poly_cubic": chi.cubic,
            "char_poly_quadratic": chi.quadratic,
            "double_counting": s.pair_count_check,
        }),
    ))
}

fn cmd_saito(file: &Path, given: Option<(usize, usize)>, als: AlsConfig) -> Outcome {
    let arr = read_arrangement(file)?;
    let (d1, d2) = exponents_or_candidates(&arr, given)?;
    let r = saito_functional(&arr, d1, d2, &als).map_err(|e| usage(e.to_string()))?;
    Ok((
        Some(arr.hash()),
        json!({
            "saito": r.loss,
            "exponents": [d1, d2],
            "k1": r.k1,
            "k2": r.k2,
            "n_out": r.n_out,
            "restart_losses": r.als.restart_losses,
            "best_restart": r.als.best_restart,
            "degenerate": r.als.degenerate,
            "euler_degenerate": r.euler_degenerate,
            "kernel_fallback": r.kernel_fallback,
            "timing_ms": r.timing_ms,
        }),
    ))
}

fn cmd_verify(file: &Path, given: Option<(usize, usize)>, out: Option<&Path>) -> Outcome {
    let arr = read_arrangement(file)?;
    let hash = arr.hash();
    let (d1, d2) = exponents_or_candidates(&arr, given)?;
    let start = Instant::now();
    let outcome = verify_free(&arr, d1, d2).map_err(|e| usage(e.to_string()))?;
    let timing_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        VerificationOutcome::Certified(cert) => {
            let dir = out.map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            let path = write_file(&dir, &format!("{}.cert.json", &hash[..16]), &write_certificate_json(&cert))?;
            let mut payload = certificate_summary(&cert);
            payload["status"] = json!("certified");
            payload["certificate_file"] = json!(path.display().to_string());
            payload["timing_ms"] = json!(timing_ms);
            Ok((Some(hash), payload))
        }
        VerificationOutcome::NotFreeAtExponents(r) => Err(CliError::Domain {
            message: format!("not free at exponents ({d1}, {d2})"),
            payload: json!({ "status": "not_free_at_exponents", "refutation": r, "timing_ms": timing_ms }),
            input_hash: Some(hash),
        }),
        VerificationOutcome::NoCandidateExponents(o) => Err(CliError::Domain {
            message: format!("no candidate exponents: {o}"),
            payload: json!({ "status": "no_candidate_exponents", "reason": o }),
            input_hash: Some(hash),
        }),
    }
}

fn cmd_check(arr_path: &Path, cert_path: &Path) -> Outcome {
    let arr = read_arrangement(arr_path)?;
    let text =
        fs::read_to_string(cert_path).map_err(|e| usage(format!("cannot read {}: {e}", cert_path.display())))?;
    let cert = read_certificate_json(&text).map_err(|e| usage(format!("{}: {e}", cert_path.display())))?;
    match check_certificate(&arr, &cert) {
        Ok(()) => Ok((Some(arr.hash()), json!({ "passed": true }))),
        Err(f) => Err(CliError::Domain {
            message: f.to_string(),
            payload: json!({ "passed": false, "reason": f.to_string(), "failure": f }),
            input_hash: Some(arr.hash()),
        }),
    }
}

fn cmd_construct(exponents: (usize, usize), out: Option<&Path>) -> Outcome {
    let (d1, d2) = exponents;
    if d1 == 0 {
        return Err(usage("exponents must be positive"));
    }
    let arr = supersolvable_two_pencil(d1, d2);
    let cert = match verify_free(&arr, d1, d2).map_err(|e| usage(e.to_string()))? {
        VerificationOutcome::Certified(c) => c,
        other => {
            return Err(CliError::Domain {
                message: "two-pencil arrangement failed to certify".into(),
                payload: json!({ "status": format!("{other:?}") }),
                input_hash: Some(arr.hash()),
            })
        }
    };
    let hash = arr.hash();
    let mut payload = json!({
        "arrangement": serde_json::from_str::<Value>(&write_arrangement_json(&arr)).unwrap(),
        "certificate": serde_json::from_str::<Value>(&write_certificate_json(&cert)).unwrap(),
    });
    if let Some(dir) = out {
        let stem = format!("two_pencil_{d1}_{d2}");
        let a = write_file(dir, &format!("{stem}.json"), &write_arrangement_json(&arr))?;
        let c = write_file(dir, &format!("{stem}.cert.json"), &write_certificate_json(&cert))?;
        payload["files"] = json!([a.display().to_string(), c.display().to_string()]);
    }
    Ok((Some(hash), payload))
}

fn save_catalog(catalog: &Catalog, out: Option<&Path>) -> Result<Option<String>, CliError> {
    match out {
        Some(dir) => {
            write_catalog(catalog, dir).map_err(|e| usage(e.to_string()))?;
            Ok(Some(dir.display().to_string()))
        }
        None => Ok(None),
    }
}

fn catalog_cells(catalog: &Catalog) -> BTreeMap<String, Vec<String>> {
    catalog
        .cells()
        .map(|&(n, d1, d2)| {
            (
                format!("{n},{d1},{d2}"),
                catalog.get(n, d1, d2).iter().map(|e| e.arrangement.hash()).collect(),
            )
        })
        .collect()
}

fn apply_extend(config: &mut SearchConfig, flags: &ExtendFlags, als: &AlsFlags) {
    if let Some(b) = flags.pool_bound {
        config.extension.sources.pool = Some(b);
    }
    if let Some(t) = flags.prefilter_threshold {
        config.extension.threshold = t;
    }
    if flags.delta_b2.is_some() {
        config.extension.delta_b2 = flags.delta_b2;
    }
    config.extension.als = apply_als(config.extension.als, als);
}

fn cmd_extend(seed_file: &Path, exponents: (usize, usize), mut config: SearchConfig, flags: &ExtendFlags, als: &AlsFlags, out: Option<&Path>) -> Outcome {
    let seed = read_arrangement(seed_file)?;
    let hash = seed.hash();
    let (d1, d2) = exponents;
    if d1 == 0 || d1 + d2 != seed.n() {
        return Err(usage(format!("target exponents must be positive and add up to the seed size {}", seed.n())));
    }
    if !(flags.prefilter_threshold.is_none_or(|t| t > 0.0 && t < 1.0)) {
        return Err(usage("prefilter threshold must lie in (0, 1)"));
    }
    apply_extend(&mut config, flags, als);
    let seed_outcome = verify_auto(&seed).map_err(|e| usage(e.to_string()))?;
    let Some(seed_cert) = seed_outcome.certificate() else {
        return Err(CliError::Domain {
            message: "seed is not certified free".into(),
            payload: json!({ "status": "seed_not_free" }),
            input_hash: Some(hash),
        });
    };
    let report = bootstrap_extend(&seed, d1, d2, &config.extension).map_err(|e| usage(e.to_string()))?;
    let mut catalog = Catalog::new();
    catalog.insert(CatalogEntry {
        arrangement: seed.clone(),
        certificate: seed_cert.clone(),
        provenance: Provenance::seed(),
    });
    let discoveries: Vec<Value> = report
        .extensions
        .iter()
        .map(|e| {
            json!({
                "hash": e.arrangement.hash(),
                "line": e.candidate.line,
                "sources": e.candidate.sources,
                "saito": e.saito,
            })
        })
        .collect();
    for e in report.extensions {
        catalog.insert(CatalogEntry {
            arrangement: e.arrangement,
            certificate: e.certificate,
            provenance: Provenance {
                source: e.candidate.sources.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join("+"),
                seed_hash: Some(hash.clone()),
                delta_b2: Some(report.delta_b2_target),
                saito: Some(e.saito),
            },
        });
    }
    let count = |f: Fate| report.evaluated.iter().filter(|(_, _, x)| *x == f).count();
    Ok((
        Some(hash),
        json!({
            "exponents": [d1, d2],
            "delta_b2_target": report.delta_b2_target,
            "candidates": report.candidates,
            "rejected_by_prefilter": count(Fate::Rejected),
            "not_free": count(Fate::NotFree),
            "discoveries": discoveries,
            "catalog_dir": save_catalog(&catalog, out)?,
        }),
    ))
}

fn cmd_search(n: usize, exponents: (usize, usize), config: SearchConfig, pool_bound: Option<u32>, beam: Option<usize>, als: &AlsFlags, out: Option<&Path>) -> Outcome {
    let (d1, d2) = exponents;
    if d1 == 0 || d1 + d2 + 1 != n {
        return Err(usage(format!("exponents must be positive and add up to n - 1 = {}", n.saturating_sub(1))));
    }
    let beam_width = beam.unwrap_or(config.beam_width);
    if beam_width == 0 {
        return Err(usage("beam width must be positive"));
    }
    let als_cfg = apply_als(config.als, als);
    let beam_cfg = BeamConfig {
        beam_width,
        seed: als_cfg.seed,
        weights: config.weights,
        scores: config.scores,
        als: als_cfg,
    };
    let pool = candidate_pool(pool_bound.unwrap_or(config.pool_bound).max(1));
    let results = beam_search_build(n, d1, d2, &pool, &beam_cfg);
    let mut catalog = Catalog::new();
    let rows: Vec<Value> = results
        .iter()
        .map(|r| {
            if let Some(c) = &r.certificate {
                catalog.insert(CatalogEntry {
                    arrangement: r.arrangement.clone(),
                    certificate: c.clone(),
                    provenance: Provenance {
                        source: "beam".into(),
                        seed_hash: None,
                        delta_b2: None,
                        saito: Some(1.0 - r.sigma_alg),
                    },
                });
            }
            json!({
                "hash": r.arrangement.hash(),
                "lines": r.arrangement.lines(),
                "sigma_alg": r.sigma_alg,
                "cumulative_reward": r.cumulative_reward,
                "certified": r.certificate.is_some(),
                "exponents": r.certificate.as_ref().map(|c| [c.d1, c.d2]),
            })
        })
        .collect();
    Ok((
        None,
        json!({
            "n": n,
            "exponents": [d1, d2],
            "pool_size": pool.len(),
            "beam": rows,
            "certified": catalog.len(),
            "catalog_dir": save_catalog(&catalog, out)?,
        }),
    ))
}

fn collect_seed_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.extension().is_some_and(|x| x == "json")
                        && !f.file_name().is_some_and(|n| n.to_string_lossy().ends_with(".cert.json") || n == "index.json")
                })
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

#[allow(clippy::too_many_arguments)]
fn cmd_cascade(
    seeds: &[PathBuf],
    n_max: usize,
    targets: &[(usize, usize)],
    max_seeds: Option<usize>,
    mut config: SearchConfig,
    flags: &ExtendFlags,
    als: &AlsFlags,
    out: Option<&Path>,
) -> Outcome {
    apply_extend(&mut config, flags, als);
    if let Some(m) = max_seeds {
        config.cascade.max_seeds_per_level = m;
    }
    let files = collect_seed_files(seeds)?;
    let arrangements = files.iter().map(|f| read_arrangement(f)).collect::<Result<Vec<_>, _>>()?;
    let targets = if targets.is_empty() {
        Targets::All
    } else {
        Targets::Pairs(targets.to_vec())
    };
    let r = cascade(&arrangements, n_max, &targets, &config.extension, &config.cascade)
        .map_err(|e| usage(e.to_string()))?;
    Ok((
        None,
        json!({
            "seeds": files.len(),
            "rejected_seeds": r.rejected_seeds,
            "levels": r.levels,
            "entries": r.catalog.len(),
            "cells": catalog_cells(&r.catalog),
            "catalog_dir": save_catalog(&r.catalog, out)?,
        }),
    ))
}

fn cmd_survey(files: &[PathBuf], als: AlsConfig) -> Outcome {
    if files.is_empty() {
        return Err(usage("survey needs at least one arrangement file"));
    }
    let mut rows = Vec::new();
    for f in files {
        let arr = read_arrangement(f)?;
        let s = intersection_summary(&arr);
        let mut row = json!({
            "file": f.display().to_string(),
            "hash": arr.hash(),
            "n": s.n,
            "b2": s.b2,
        });
        match s.candidate_exponents() {
            Ok(e) => {
                let r = saito_functional(&arr, e.d1, e.d2, &als).map_err(|e| usage(e.to_string()))?;
                row["exponents"] = json!([e.d1, e.d2]);
                row["saito"] = json!(r.loss);
                row["timing_ms"] = json!(r.timing_ms);
            }
            Err(o) => row["no_candidate_exponents"] = json!(o),
        }
        rows.push(row);
    }
    Ok((None, json!({ "rows": rows })))
}

fn dispatch(cli: Cli) -> Outcome {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Invariants { file } => cmd_invariants(&file),
        Command::Saito { file, exponents, als } => cmd_saito(&file, exponents, apply_als(config.als, &als)),
        Command::Verify { file, exponents, out } => cmd_verify(&file, exponents, out.as_deref()),
        Command::Check { arrangement, certificate } => cmd_check(&arrangement, &certificate),
        Command::Construct { exponents, out } => cmd_construct(exponents, out.as_deref()),
        Command::Extend { seed_file, exponents, ext, als, out } => {
            cmd_extend(&seed_file, exponents, config, &ext, &als, out.as_deref())
        }
        Command::Search { n, exponents, pool_bound, beam, als, out } => {
            cmd_search(n, exponents, config, pool_bound, beam, &als, out.as_deref())
        }
        Command::Cascade { seeds, n_max, targets, max_seeds_per_level, ext, als, out } => cmd_cascade(
            &seeds,
            n_max,
            &targets,
            max_seeds_per_level,
            config,
            &ext,
            &als,
            out.as_deref(),
        ),
        Command::Survey { files, als } => cmd_survey(&files, apply_als(config.als, &als)),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return CommandResult {
                command: String::new(),
                input_hash: None,
                exit_code: code,
                payload: json!({ "message": e.render().to_string() }),
            };
        }
    };
    let name = cli.command.name().to_string();
    let threads = cli.threads;
    let go = move || dispatch(cli);
    let result = match threads {
        Some(t) if t >= 1 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(usage(format!("cannot build thread pool: {e}"))),
        },
        Some(_) => Err(usage("--threads must be at least 1")),
        None => go(),
    };
    match result {
        Ok((input_hash, payload)) => CommandResult {
            command: name,
            input_hash,
            exit_code: EXIT_OK,
            payload,
        },
        Err(CliError::Usage(message)) => CommandResult {
            command: name,
            input_hash: None,
            exit_code: EXIT_USAGE,
            payload: json!({ "error": message }),
        },
        Err(CliError::Domain {
            message,
            mut payload,
            input_hash,
        }) => {
            payload["error"] = json!(message);
            CommandResult {
                command: name,
                input_hash,
                exit_code: EXIT_DOMAIN,
                payload,
            }
        }
    }
}
