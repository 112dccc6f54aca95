mod common;

use common::*;
use freearr::arrangement::*;
use freearr::fixtures::{ALL, NOT_FREE_7};
use freearr::search::candidate_pool;
use proptest::prelude::*;

#[test]
fn double_counting_on_random_pool_arrangements() {
    double_counting_cases(500, 11).unwrap();
}

#[test]
fn incremental_b2_matches_recount() {
    delta_b2_cases(100, 12).unwrap();
}

#[test]
fn fixture_profiles_match_oracle() {
    for f in ALL.iter().chain([&NOT_FREE_7]) {
        fixture_check(f).unwrap();
        let s = intersection_summary(&f.arrangement());
        let e = s.candidate_exponents().unwrap();
        assert_eq!((e.d1, e.d2), f.exponents, "{}", f.name);
    }
}

#[test]
fn characteristic_polynomial_factors_at_exponents() {
    for f in ALL {
        let a = f.arrangement();
        let chi = characteristic_polynomial(&a);
        let (d1, d2) = f.exponents;
        assert!(chi.factors_through_one());
        assert!(chi.splits_as(d1 as i64, d2 as i64));
        let n = a.n() as i64;
        let b2 = intersection_summary(&a).b2;
        for t in -3..=3 {
            assert_eq!(chi.eval_cubic(t), t.pow(3) - n * t * t + b2 * t - (b2 - n + 1));
            assert_eq!(chi.eval_cubic(t), (t - 1) * (t - d1 as i64) * (t - d2 as i64));
        }
    }
}

#[test]
fn published_fixture_invariants() {
    for (f, b2) in [(freearr::fixtures::N13, 48), (freearr::fixtures::N19, 95), (freearr::fixtures::N20, 109)] {
        let s = intersection_summary(&f.arrangement());
        let (d1, d2) = f.exponents;
        assert_eq!(s.b2, b2, "{}", f.name);
        assert_eq!(s.b2, (d1 * d2 + f.arrangement().n() - 1) as i64);
        assert!(s.tjurina().consistent());
        assert_eq!(s.discriminant(), (d1 as i64 - d2 as i64).pow(2));
    }
}

#[test]
fn pool_of_bound_two_matches_enumeration() {
    let pool = candidate_pool(2);
    let got: Vec<[i128; 3]> = {
        let mut v: Vec<_> = pool.lines.iter().map(|l| l.coeffs().clone().map(|c| i128::try_from(c).unwrap())).collect();
        v.sort();
        v
    };
    assert_eq!(got, pool_oracle(2));
    assert_eq!(candidate_pool(1).len(), pool_oracle(1).len());
}

#[test]
fn generic_lines_have_negative_discriminant() {
    let a = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]).unwrap();
    let s = intersection_summary(&a);
    assert_eq!(s.discriminant(), -3);
    assert!(matches!(
        s.candidate_exponents(),
        Err(ExponentObstruction::NegativeDiscriminant { discriminant: -3 })
    ));
}

#[test]
fn boolean_extensions() {
    let a = Arrangement::from_triples(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
    let s = intersection_summary(&a);
    let l = |t: [i64; 3]| Line::new(t[0], t[1], t[2]).unwrap();
    assert_eq!(delta_b2(&a, &s, &l([1, 1, 1])).unwrap(), 3);
    assert_eq!(delta_b2(&a, &s, &l([1, 1, 0])).unwrap(), 2);
    assert!(delta_b2(&a, &s, &l([0, 0, 1])).is_err());
}

fn arb_line() -> impl Strategy<Value = Line> {
    (-9i64..=9, -9i64..=9, -9i64..=9)
        .prop_filter("nonzero", |t| *t != (0, 0, 0))
        .prop_map(|(a, b, c)| Line::new(a, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summary_matches_oracle(lines in prop::collection::btree_set(arb_line(), 1..10)) {
        let a = Arrangement::new(lines.into_iter().collect()).unwrap();
        let s = intersection_summary(&a);
        let (t, b2) = lattice_oracle(&triples(&a));
        prop_assert_eq!(&s.t, &t);
        prop_assert_eq!(s.b2, b2);
    }

    #[test]
    fn file_round_trip(lines in prop::collection::btree_set(arb_line(), 1..8), scale in 1i64..50) {
        let a = Arrangement::new(lines.into_iter().collect()).unwrap();
        let back = read_arrangement_json(&write_arrangement_json(&a)).unwrap();
        prop_assert_eq!(back.lines(), a.lines());
        prop_assert_eq!(back.hash(), a.hash());
        // a rescaled copy canonicalizes to the same lines
        let scaled: Vec<[i64; 3]> = triples(&a).iter().map(|t| t.map(|c| c as i64 * scale)).collect();
        prop_assert_eq!(Arrangement::from_triples(&scaled).unwrap().hash(), a.hash());
    }
}
