mod common;

use std::collections::BTreeSet;

use common::*;
use freearr::arrangement::{intersection_summary, Arrangement, Line};
use freearr::fixtures::{BOOLEAN, N13, N20, NEAR_PENCIL_5};
use freearr::saito::AlsConfig;
use freearr::search::*;
use freearr::search::catalog::{read_catalog, write_catalog};
use freearr::search::extension::{Fate, Source};
use freearr::search::scores::tier1;
use freearr::verify::{check_certificate, verify_free};

fn line(t: [i64; 3]) -> Line {
    Line::new(t[0], t[1], t[2]).unwrap()
}

fn max_multiplicity(a: &Arrangement) -> usize {
    lattice_oracle(&triples(a)).0.keys().copied().max().unwrap_or(0)
}

#[test]
fn pool_sizes_match_enumeration() {
    assert_eq!(candidate_pool(1).len(), 13);
    assert_eq!(candidate_pool(2).len(), pool_oracle(2).len());
    assert_eq!(candidate_pool(3).len(), pool_oracle(3).len());
}

#[test]
fn combinatorial_and_tier_one_scores() {
    let c = ScoreConfig::default();
    let generic = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]).unwrap();
    // Δ = -3, δ = 3, δ_max = (n - 1)^2 = 9
    assert!((sigma_comb(&generic, &c) - (1.0 - 2.0 * 3.0 / 9.0)).abs() < 1e-15);
    assert!((tier1(4, 6, &c) + 3.0 / 9.0).abs() < 1e-15);
    assert!((sigma_alg(&generic, &c, &AlsConfig::default()) + 3.0 / 9.0).abs() < 1e-15);
    assert_eq!(sigma_comb(&N13.arrangement(), &c), 1.0);
    assert!(sigma_alg(&N20.arrangement(), &c, &AlsConfig::default()) >= 1.0 - 1e-6);
}

/// Building the Boolean arrangement x, then y, then z with unit weights:
/// the first two steps have fewer than three lines and score nothing; the
/// last has σ_comb = 1 (Δ = 0), σ_alg = 1, feasibility 1 and a certified
/// terminal bonus of 1.
#[test]
fn boolean_reward_trace() {
    let w = RewardWeights::unit();
    let c = ScoreConfig::default();
    let als = AlsConfig::default();
    let lines = [line([1, 0, 0]), line([0, 1, 0]), line([0, 0, 1])];
    let mut prev = None;
    let mut totals = Vec::new();
    for k in 1..=3 {
        let a = Arrangement::new(lines[..k].to_vec()).unwrap();
        let r = reward(&a, prev.as_ref(), &w, &c, &als, k == 3);
        totals.push(r.total);
        prev = Some(intersection_summary(&a));
    }
    let oracle = [0.0, 0.0, 4.0];
    for (got, want) in totals.iter().zip(oracle) {
        assert!((got - want).abs() < 1e-9, "{totals:?}");
    }
}

#[test]
fn new_triple_point_and_feasibility_terms() {
    let w = RewardWeights::default();
    let c = ScoreConfig::default();
    let als = AlsConfig::default();
    let before = BOOLEAN.arrangement();
    let after = before.with_line(line([1, 1, 0])).unwrap();
    let r = reward(&after, Some(&intersection_summary(&before)), &w, &c, &als, false);
    assert_eq!(r.delta_m3, 1.0);
    assert_eq!(r.feasible, 1.0);
    // four lines with a triple point form a near-pencil
    assert_eq!(r.sigma_pen, 1.0);
    let by_hand =
        w.w_comb * r.sigma_comb + w.w_alg * r.sigma_alg + w.w_feas + w.w_int * r.sigma_int - w.w_pen + w.w_mult;
    assert!((r.total - by_hand).abs() < 1e-12);
}

fn pair_joins_oracle(a: &Arrangement) -> BTreeSet<Line> {
    let s = intersection_summary(a);
    let mut out = BTreeSet::new();
    for p in &s.points {
        for q in &s.points {
            if p != q {
                let l = Line::join(&p.point, &q.point);
                if !a.contains(&l) {
                    out.insert(l);
                }
            }
        }
    }
    out
}

#[test]
fn pair_source_matches_join_oracle() {
    let pairs_only = ExtensionConfig {
        sources: Sources {
            point_pairs: true,
            pool: None,
            multi_point: false,
        },
        ..Default::default()
    };
    let near_pencil_4 = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1]]).unwrap();
    let two_pencil = supersolvable_two_pencil(2, 2);
    for a in [BOOLEAN.arrangement(), near_pencil_4, two_pencil] {
        let got: BTreeSet<Line> = enumerate_extension_candidates(&a, &pairs_only).into_iter().map(|c| c.line).collect();
        assert_eq!(got, pair_joins_oracle(&a));
    }
    assert!(enumerate_extension_candidates(&BOOLEAN.arrangement(), &pairs_only).is_empty());
}

#[test]
fn full_delta_target_selects_lines_missing_every_point() {
    let a = NEAR_PENCIL_5.arrangement();
    let s = intersection_summary(&a);
    let config = ExtensionConfig {
        delta_b2: Some(a.n() as i64),
        ..Default::default()
    };
    let got = enumerate_extension_candidates(&a, &config);
    assert!(!got.is_empty());
    for c in &got {
        assert!(s.points.iter().all(|p| !c.line.contains(&p.point)));
    }
    let pool_misses = candidate_pool(2)
        .lines
        .into_iter()
        .filter(|l| !a.contains(l) && s.points.iter().all(|p| !l.contains(&p.point)))
        .count();
    assert_eq!(got.iter().filter(|c| c.sources.contains(&Source::Pool)).count(), pool_misses);
}

#[test]
fn near_pencil_extends_to_the_next_near_pencil() {
    let seed = NEAR_PENCIL_5.arrangement();
    let r = bootstrap_extend(&seed, 1, 4, &ExtensionConfig::default()).unwrap();
    let np6 = seed.with_line(line([1, 2, 0])).unwrap();
    assert!(verify_free(&np6, 1, 4).unwrap().is_certified());
    let found: Vec<&Arrangement> = r.extensions.iter().map(|e| &e.arrangement).collect();
    assert!(found.contains(&&np6));
    for e in &r.extensions {
        assert!(check_certificate(&e.arrangement, &e.certificate).is_ok());
        assert_eq!(max_multiplicity(&e.arrangement), 5);
    }
}

#[test]
fn unreachable_target_gives_no_candidates() {
    let config = ExtensionConfig {
        delta_b2: Some(1000),
        ..Default::default()
    };
    let r = bootstrap_extend(&NEAR_PENCIL_5.arrangement(), 1, 4, &config).unwrap();
    assert_eq!(r.candidates, 0);
    assert!(r.extensions.is_empty());
}

/// Lowering the threshold to accept everything must not certify anything
/// the default pre-filter threw away.
#[test]
fn prefilter_never_discards_a_free_extension() {
    let seed = supersolvable_two_pencil(2, 3);
    for (d1, d2) in [(1, 5), (2, 4), (3, 3)] {
        let filtered = bootstrap_extend(&seed, d1, d2, &ExtensionConfig::default()).unwrap();
        let everything = bootstrap_extend(&seed, d1, d2, &ExtensionConfig {
            threshold: 1.0,
            ..Default::default()
        })
        .unwrap();
        let a: BTreeSet<String> = filtered.extensions.iter().map(|e| e.arrangement.hash()).collect();
        let b: BTreeSet<String> = everything.extensions.iter().map(|e| e.arrangement.hash()).collect();
        assert_eq!(a, b, "({d1}, {d2})");
        for (_, loss, fate) in &everything.evaluated {
            if *fate == Fate::Certified {
                assert!(*loss <= 0.05);
            }
        }
    }
}

#[test]
fn n13_extends_to_fourteen_lines() {
    let seed = N13.arrangement();
    let mut found = 0;
    for d1 in 1..=6 {
        let r = bootstrap_extend(&seed, d1, 13 - d1, &ExtensionConfig::default()).unwrap();
        for e in &r.extensions {
            assert!(check_certificate(&e.arrangement, &e.certificate).is_ok());
        }
        found += r.extensions.len();
    }
    assert!(found > 0);
}

#[test]
fn two_pencils_are_certified() {
    let t = supersolvable_two_pencil(1, 1);
    assert_eq!(t.n(), 3);
    assert!(verify_free(&t, 1, 1).unwrap().is_certified());
    for n in 4..=9 {
        let a = supersolvable_two_pencil(1, n - 2);
        assert_eq!(max_multiplicity(&a), n - 1);
        assert!(verify_free(&a, 1, n - 2).unwrap().is_certified());
    }
    let a = supersolvable_two_pencil(9, 10);
    assert_eq!(a.n(), 20);
    let c = verify_free(&a, 9, 10).unwrap();
    assert!(check_certificate(&a, c.certificate().unwrap()).is_ok());
}

/// Three pool lines form a free triangle exactly when they are not
/// concurrent, i.e. their coefficient determinant is nonzero.
fn triangle_oracle(pool: &[Line]) -> BTreeSet<String> {
    let t: Vec<[i128; 3]> = pool.iter().map(|l| l.coeffs().clone().map(|c| i128::try_from(c).unwrap())).collect();
    let mut out = BTreeSet::new();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            for k in j + 1..t.len() {
                let (a, b, c) = (t[i], t[j], t[k]);
                let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
                if det != 0 {
                    let arr = Arrangement::new(vec![pool[i].clone(), pool[j].clone(), pool[k].clone()]).unwrap();
                    out.insert(arr.hash());
                }
            }
        }
    }
    out
}

#[test]
fn beam_finds_certified_triangles() {
    let pool = candidate_pool(1);
    let oracle = triangle_oracle(&pool.lines);
    let config = BeamConfig {
        beam_width: 4,
        weights: RewardWeights::unit(),
        ..Default::default()
    };
    let beam = beam_search_build(3, 1, 1, &pool, &config);
    assert!(beam.iter().any(|b| b.certificate.is_some()));
    for b in &beam {
        assert_eq!(b.certificate.is_some(), oracle.contains(&b.arrangement.hash()));
    }
}

#[test]
fn greedy_beam_is_reproducible() {
    let pool = candidate_pool(1);
    let config = BeamConfig {
        beam_width: 1,
        ..Default::default()
    };
    let a = beam_search_build(4, 1, 2, &pool, &config);
    let b = beam_search_build(4, 1, 2, &pool, &config);
    assert_eq!(a.len(), 1);
    assert_eq!(a[0].arrangement, b[0].arrangement);
    assert_eq!(a[0].cumulative_reward, b[0].cumulative_reward);
}

#[test]
fn beam_certifies_five_line_arrangements() {
    // a free arrangement satisfies b2 = d1 d2 + d1 + d2; five lines with two
    // triple points and four double points have b2 = 8, matching (2, 2)
    let beam = beam_search_build(5, 2, 2, &candidate_pool(2), &BeamConfig::default());
    assert!(beam.iter().any(|b| b.certificate.is_some()));
    for b in beam.iter().filter(|b| b.certificate.is_some()) {
        let cert = b.certificate.as_ref().unwrap();
        let (profile, _) = lattice_oracle(&triples(&b.arrangement));
        let b2: usize = profile.iter().map(|(m, c)| (m - 1) * c).sum();
        assert_eq!(b2, cert.d1 * cert.d2 + cert.d1 + cert.d2);
        assert!(check_certificate(&b.arrangement, cert).is_ok());
    }
}

#[test]
fn cascade_from_a_triangle_reaches_near_pencils() {
    let r = cascade(
        &[supersolvable_two_pencil(1, 1)],
        6,
        &Targets::All,
        &ExtensionConfig::default(),
        &CascadeConfig::default(),
    )
    .unwrap();
    for n in 4..=6 {
        assert!(!r.catalog.get(n, 1, n - 2).is_empty(), "n = {n}");
    }
    for e in r.catalog.iter() {
        assert!(check_certificate(&e.arrangement, &e.certificate).is_ok());
    }
}

#[test]
fn cascade_edge_cases() {
    let none = cascade(&[], 8, &Targets::All, &ExtensionConfig::default(), &CascadeConfig::default()).unwrap();
    assert!(none.catalog.is_empty());
    let seed = NEAR_PENCIL_5.arrangement();
    let same = cascade(&[seed.clone()], 4, &Targets::All, &ExtensionConfig::default(), &CascadeConfig::default()).unwrap();
    assert_eq!(same.catalog.len(), 1);
    assert_eq!(same.catalog.iter().next().unwrap().arrangement, seed);
    let generic = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]).unwrap();
    let rejected = cascade(&[generic], 6, &Targets::All, &ExtensionConfig::default(), &CascadeConfig::default()).unwrap();
    assert!(rejected.catalog.is_empty());
    assert_eq!(rejected.rejected_seeds.len(), 1);
}

#[test]
fn catalog_round_trip() {
    let targets = Targets::Pairs(vec![(1, 4), (2, 3)]);
    let r = cascade(&[NEAR_PENCIL_5.arrangement()], 6, &targets, &ExtensionConfig::default(), &CascadeConfig::default()).unwrap();
    assert!(r.catalog.len() > 1);
    let dir = tempfile::tempdir().unwrap();
    write_catalog(&r.catalog, dir.path()).unwrap();
    let back = read_catalog(dir.path()).unwrap();
    assert_eq!(back.fingerprint(), r.catalog.fingerprint());
    for (a, b) in r.catalog.iter().zip(back.iter()) {
        assert_eq!(a.certificate, b.certificate);
        let (p, q) = (&a.provenance, &b.provenance);
        assert_eq!((&p.source, &p.seed_hash, p.delta_b2), (&q.source, &q.seed_hash, q.delta_b2));
        assert_eq!(p.saito.is_some(), q.saito.is_some());
        assert!(p.saito.unwrap_or(0.0) - q.saito.unwrap_or(0.0) == 0.0 || (p.saito.unwrap() - q.saito.unwrap()).abs() < 1e-15);
    }
}

#[test]
fn beam_and_cascade_are_deterministic() {
    determinism().unwrap();
}
