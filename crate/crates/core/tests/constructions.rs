use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use supersim_core::constructions::{
    cshs_counterexample, cshs_from_profile, decompose_shs, pgf_transform, shs_from_supermodular,
    similarity_from_slice_function, ConstructionError, ModularSpec,
};
use supersim_core::generate::{random_convex_profile, random_modular, random_pgf, random_shs, random_supermodular};
use supersim_core::pgf::{is_pgf_dilution, Dilution, PgfSpec};
use supersim_core::setfn::{is_monotone, is_supermodular, CardinalityProfile, Direction};
use supersim_core::similarity::{check_metric, classify, SimilarityVerdict};
use supersim_core::{rat, Rational, SetFunctionTable, SimilaritySpec, Universe};

const TOL: f64 = 1e-9;

fn u(n: usize) -> Universe {
    Universe::new(n).unwrap()
}

fn max_dev(a: &SetFunctionTable<f64>, b: &SetFunctionTable<f64>) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Direct evaluation of the normalization formula, independent of the
/// library's table plumbing.
fn construction_oracle(g: &SetFunctionTable<f64>, m: &ModularSpec<f64>, mask: u32) -> f64 {
    let n = g.universe().size();
    let full = g.universe().full_mask();
    let canon = |s: u32| {
        let mut v = g.at(s) - g.at(0);
        for i in 0..n {
            if s >> i & 1 == 1 {
                v -= g.at(1 << i) - g.at(0);
            }
        }
        v + m.eval_mask(s)
    };
    canon(full ^ mask) / canon(full)
}

#[test]
fn construction_matches_formula_and_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let v = u(1 + i % 5);
        let (g, m, f) = loop {
            let g = random_supermodular(v, &mut rng);
            let m = random_modular(v, &mut rng);
            match shs_from_supermodular(&g, &m, &TOL) {
                Ok(f) => break (g, m, f),
                Err(ConstructionError::DenominatorZero(_)) => continue,
                Err(e) => panic!("case {i}: {e}"),
            }
        };
        for mask in 0..v.power_set_len() as u32 {
            assert!((f.at(mask) - construction_oracle(&g, &m, mask)).abs() <= 1e-12);
        }
        assert_eq!(*f.at(0), 1.0);
        assert!(f.is_nonnegative(&TOL));
        assert!(is_monotone(&f, Direction::Nonincreasing, &TOL).unwrap().passed());
        assert!(is_supermodular(&f, &TOL).unwrap().passed());

        let (gh, mh) = decompose_shs(&f, &TOL).unwrap();
        let again = shs_from_supermodular(&gh, &mh, &TOL).unwrap();
        assert!(max_dev(&f, &again) <= 1e-12, "case {i}: {}", max_dev(&f, &again));
    }
}

#[test]
fn exact_round_trip_is_identity() {
    let v = u(3);
    let g = SetFunctionTable::from_fn(v, |a| rat((a.len() * a.len() * a.len()) as i64, 1) + rat(a.mask() as i64, 7));
    let m = ModularSpec::new(rat(1, 3), vec![rat(1, 2), rat(0, 1), rat(2, 5)]).unwrap();
    let f = shs_from_supermodular(&g, &m, &Rational::zero()).unwrap();
    let (gh, mh) = decompose_shs(&f, &Rational::zero()).unwrap();
    assert_eq!(shs_from_supermodular(&gh, &mh, &Rational::zero()).unwrap(), f);
}

#[test]
fn slice_similarities_are_pseudometrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let v = u(2 + i % 5);
        let f = random_shs(v, &mut rng);
        let s = similarity_from_slice_function(&f, &TOL).unwrap();
        assert!(check_metric::<f64>(&s, v, &TOL).unwrap().passed(), "case {i}");
    }
}

#[test]
fn slice_similarity_at_five_is_a_pseudometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let f = random_shs(u(5), &mut rng);
    let s = similarity_from_slice_function(&f, &TOL).unwrap();
    assert!(check_metric::<f64>(&s, u(5), &TOL).unwrap().passed());
}

#[test]
fn random_convex_profiles_classify_supermodular() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 2..=5 {
        for _ in 0..5 {
            let h = random_convex_profile(n, &mut rng);
            let s = cshs_from_profile(&h, &TOL).unwrap();
            let report = classify::<f64>(&s, u(n), &TOL).unwrap();
            assert!(matches!(report.verdict, SimilarityVerdict::Supermodular | SimilarityVerdict::Modular));
        }
    }
}

#[test]
fn hamming_profile_is_accepted_and_equals_hamming() {
    let n = 4;
    let h = CardinalityProfile::new((0..=n).map(|x| rat(1, 1) - rat(x as i64, n as i64)).collect());
    let s = cshs_from_profile(&h, &Rational::zero()).unwrap();
    let v = u(n);
    for x in v.subsets() {
        for y in v.subsets() {
            assert_eq!(s.eval_exact(&x, &y).unwrap(), SimilaritySpec::Hamming.eval_exact(&x, &y).unwrap());
        }
    }
}

#[test]
fn constructed_similarity_from_squares_is_the_indicator() {
    let v = u(2);
    let g = SetFunctionTable::from_fn(v, |a| (a.len() * a.len()) as f64);
    let f = shs_from_supermodular(&g, &ModularSpec::zero(v), &TOL).unwrap();
    let s = similarity_from_slice_function(&f, &TOL).unwrap();
    for x in v.subsets() {
        for y in v.subsets() {
            assert_eq!(s.eval_exact(&x, &y).unwrap(), if x == y { rat(1, 1) } else { rat(0, 1) });
        }
    }
}

#[test]
fn pgf_transforms_preserve_supermodularity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let v = u(4);
    for _ in 0..10 {
        let p = random_pgf(4, &mut rng);
        for base in [SimilaritySpec::Jaccard, SimilaritySpec::Hamming] {
            let s = pgf_transform(p.clone(), base).unwrap();
            let verdict = classify::<Rational>(&s, v, &Rational::zero()).unwrap().verdict;
            assert!(matches!(verdict, SimilarityVerdict::Supermodular | SimilarityVerdict::Modular), "{}", s.id());
        }
    }
}

#[test]
fn geometric_transforms_equal_gamma_families() {
    for g in [2, 3, 4] {
        let gamma = rat(g, 1);
        let p = PgfSpec::for_gamma(&gamma).unwrap();
        let j = pgf_transform(p.clone(), SimilaritySpec::Jaccard).unwrap();
        let h = pgf_transform(p, SimilaritySpec::Hamming).unwrap();
        let sg = SimilaritySpec::SorensenGamma { gamma: gamma.clone() };
        let ssg = SimilaritySpec::SokalSneathGamma { gamma };
        for n in 1..=5 {
            let v = u(n);
            for x in v.subsets() {
                for y in v.subsets() {
                    assert_eq!(j.eval_exact(&x, &y).unwrap(), sg.eval_exact(&x, &y).unwrap());
                    assert_eq!(h.eval_exact(&x, &y).unwrap(), ssg.eval_exact(&x, &y).unwrap());
                }
            }
        }
    }
}

#[test]
fn cubic_counterexample_is_cshs_but_not_pgf() {
    let ce = cshs_counterexample(4).unwrap();
    let expect = [1.0, 0.6328125, 0.3125, 0.0859375, 0.0];
    for (got, want) in ce.profile.values.iter().zip(expect) {
        assert_eq!(supersim_core::Scalar::to_f64(got), want);
    }
    assert!(ce.cshs.is_ok());
    assert_eq!(ce.dilution, Dilution::Negative { index: 3 });
    assert_eq!(is_pgf_dilution(&[0.5, 0.5]), Dilution::Yes { alpha: 1.0, pgf: vec![0.5, 0.5] });
    assert_eq!(is_pgf_dilution(&[0.25, 0.25]), Dilution::Yes { alpha: 0.5, pgf: vec![0.5, 0.5] });
}

#[test]
fn construction_errors_name_the_condition() {
    let v = u(3);
    let modular = SetFunctionTable::from_fn(v, |a| a.len() as f64);
    assert!(matches!(
        shs_from_supermodular(&modular, &ModularSpec::zero(v), &TOL),
        Err(ConstructionError::DenominatorZero(_))
    ));
    let err = cshs_from_profile(&CardinalityProfile::new(vec![1.0, 0.5, 0.4, 0.0]), &TOL).unwrap_err();
    assert!(err.to_string().contains("convex"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cshs_acceptance_matches_definition(n in 2usize..=6, raw in prop::collection::vec(0.0f64..1.0, 6)) {
        let mut values = vec![1.0];
        values.extend_from_slice(&raw[..n]);
        let h = CardinalityProfile::new(values.clone());
        let nonincreasing = values.windows(2).all(|w| w[1] <= w[0]);
        let convex = values.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -TOL);
        prop_assert_eq!(cshs_from_profile(&h, &TOL).is_ok(), nonincreasing && convex);
    }
}
