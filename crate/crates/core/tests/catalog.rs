use std::collections::BTreeSet;

use num_traits::{One, Zero};
use supersim_core::similarity::{
    check_metric, classify, gamma_counterexample_matrix, IntersectionParams, MetricOutcome, MetricVerdict,
    SimilarityVerdict,
};
use supersim_core::setfn::{PropertyKind, Witness};
use supersim_core::table1::{run_table1, Table1Config};
use supersim_core::{rat, Rational, SimilaritySpec, Subset, Universe};

fn u(n: usize) -> Universe {
    Universe::new(n).unwrap()
}

fn zero() -> Rational {
    Rational::zero()
}

fn q(num: usize, den: usize) -> Rational {
    rat(num as i64, den as i64)
}

/// Textbook formulas evaluated from explicit element sets.
fn oracle(name: &str, n: usize, x: &Subset, y: &Subset) -> Rational {
    let sx: BTreeSet<usize> = x.elements().into_iter().collect();
    let sy: BTreeSet<usize> = y.elements().into_iter().collect();
    if sx == sy {
        return Rational::one();
    }
    let i = sx.intersection(&sy).count();
    let d = sx.symmetric_difference(&sy).count();
    let o = n - sx.union(&sy).count();
    let guard = |num: usize, den: usize| if den == 0 { zero() } else { q(num, den) };
    match name {
        "jaccard" => q(i, i + d),
        "hamming" => q(i + o, i + o + d),
        "anderberg" => q(i, i + 2 * d),
        "rogers_tanimoto" => q(i + o, i + o + 2 * d),
        "simpson" => guard(i, sx.len().min(sy.len())),
        "braun_blanquet" => guard(i, sx.len().max(sy.len())),
        "sorensen_dice" => q(2 * i, 2 * i + d),
        "sokal_sneath_1" => q(2 * (i + o), 2 * (i + o) + d),
        "forbes" => guard(n * i, sx.len() * sy.len()),
        _ => unreachable!(),
    }
}

const FORMULAS: [&str; 9] = [
    "jaccard",
    "hamming",
    "anderberg",
    "rogers_tanimoto",
    "simpson",
    "braun_blanquet",
    "sorensen_dice",
    "sokal_sneath_1",
    "forbes",
];

#[test]
fn formulas_match_set_oracle() {
    for n in 1..=5 {
        let v = u(n);
        for name in FORMULAS {
            let spec = SimilaritySpec::parse_descriptor(name).unwrap();
            for x in v.subsets() {
                for y in v.subsets() {
                    assert_eq!(spec.eval_exact(&x, &y).unwrap(), oracle(name, n, &x, &y), "{name} {x} {y}");
                }
            }
        }
    }
}

fn every_kind() -> Vec<SimilaritySpec> {
    let mut specs: Vec<SimilaritySpec> = FORMULAS.iter().map(|n| SimilaritySpec::parse_descriptor(n).unwrap()).collect();
    for g in [rat(1, 2), rat(2, 1), rat(3, 1)] {
        specs.push(SimilaritySpec::SorensenGamma { gamma: g.clone() });
        specs.push(SimilaritySpec::SokalSneathGamma { gamma: g });
    }
    specs
}

#[test]
fn symmetry_and_unit_diagonal_for_every_kind() {
    let p = IntersectionParams::new(2, 4, rat(1, 10), rat(1, 5));
    let mut cases: Vec<(SimilaritySpec, Universe)> =
        every_kind().into_iter().flat_map(|s| (1..=6).map(move |n| (s.clone(), u(n)))).collect();
    cases.push((SimilaritySpec::CardinalityIntersection(p.clone()), u(6)));
    cases.push((SimilaritySpec::IdentityIntersection(p), u(4)));
    for (spec, v) in cases {
        let m = spec.matrix::<Rational>(v).unwrap();
        let len = v.power_set_len() as u32;
        for a in 0..len {
            assert!(m.get(a, a).is_one(), "{}", spec.id());
            for b in 0..len {
                assert_eq!(m.get(a, b), m.get(b, a), "{}", spec.id());
            }
        }
    }
}

#[test]
fn slice_at_x_equals_slice_at_x_sym_y() {
    for spec in every_kind() {
        for n in 1..=5 {
            let v = u(n);
            for x in v.subsets() {
                let fx = spec.slice::<Rational>(&x).unwrap();
                for y in v.subsets() {
                    let xy = x.symmetric_difference(&y).unwrap();
                    let fxy = spec.slice::<Rational>(&xy).unwrap();
                    assert_eq!(fx.value(&y).unwrap(), fxy.value(&y).unwrap());
                }
            }
        }
    }
}

#[test]
fn every_slice_starts_at_one() {
    for spec in every_kind() {
        let v = u(4);
        for x in v.subsets() {
            assert!(spec.slice::<Rational>(&x).unwrap().at(0).is_one());
        }
    }
}

#[test]
fn gamma_two_identities_exact() {
    let sg = SimilaritySpec::SorensenGamma { gamma: rat(2, 1) };
    let ssg = SimilaritySpec::SokalSneathGamma { gamma: rat(2, 1) };
    for n in 1..=6 {
        let v = u(n);
        for x in v.subsets() {
            for y in v.subsets() {
                assert_eq!(SimilaritySpec::Anderberg.eval_exact(&x, &y).unwrap(), sg.eval_exact(&x, &y).unwrap());
                assert_eq!(SimilaritySpec::RogersTanimoto.eval_exact(&x, &y).unwrap(), ssg.eval_exact(&x, &y).unwrap());
            }
        }
    }
}

#[test]
fn table1_column_reproduced_at_five() {
    let report = run_table1(&Table1Config::default()).unwrap();
    assert_eq!((report.matched_rows, report.total_rows), (13, 13));
    assert_eq!(report.rows.iter().map(|r| r.instances.len()).sum::<usize>(), 15);
}

#[test]
fn table1_column_reproduced_at_three() {
    let report = run_table1(&Table1Config { n: 3, ..Default::default() }).unwrap();
    assert!(report.all_matched());
}

#[test]
fn classify_examples() {
    let exact = |spec: SimilaritySpec, n: usize| classify::<Rational>(&spec, u(n), &zero()).unwrap().verdict;
    assert_eq!(exact(SimilaritySpec::Jaccard, 5), SimilarityVerdict::Supermodular);
    assert_eq!(exact(SimilaritySpec::Hamming, 5), SimilarityVerdict::Modular);
    assert_eq!(exact(SimilaritySpec::Simpson, 5), SimilarityVerdict::Neither);
    assert_eq!(exact(SimilaritySpec::SokalSneath1, 5), SimilarityVerdict::Submodular);
    assert_eq!(exact(SimilaritySpec::SokalSneathGamma { gamma: rat(1, 2) }, 5), SimilarityVerdict::Submodular);
    // float arithmetic with a tolerance agrees on formula similarities
    let float = classify::<f64>(&SimilaritySpec::Anderberg, u(5), &1e-9).unwrap();
    assert_eq!(float.verdict, SimilarityVerdict::Supermodular);
}

#[test]
fn neither_verdicts_carry_certificates() {
    let report = classify::<Rational>(&SimilaritySpec::BraunBlanquet, u(4), &zero()).unwrap();
    let sup = report.certificate(PropertyKind::Supermodularity).unwrap();
    let sub = report.certificate(PropertyKind::Submodularity).unwrap();
    for c in [sup, sub] {
        let center = c.center.unwrap();
        let f = SimilaritySpec::BraunBlanquet.slice::<Rational>(&center).unwrap();
        assert_eq!(c.certificate.replay(&f).unwrap(), c.certificate.margin);
    }
}

#[test]
fn forbes_flags_range_separately_from_verdict() {
    let report = classify::<Rational>(&SimilaritySpec::Forbes, u(4), &zero()).unwrap();
    assert!(!report.axioms_hold);
    assert_eq!(report.verdict, SimilarityVerdict::Neither);
    assert!(report.certificate(PropertyKind::SimilarityAxiom).is_some());
}

#[test]
fn gamma_matrix_is_supermodular_but_not_metric() {
    for g in [rat(1, 4), rat(1, 3), rat(1, 10)] {
        let spec = gamma_counterexample_matrix(&g).unwrap();
        let report = classify::<Rational>(&spec, u(2), &zero()).unwrap();
        assert_eq!(report.verdict, SimilarityVerdict::Supermodular, "gamma {g}");
        assert!(report.monotone);
        let v = u(2);
        match report.metric.unwrap() {
            MetricOutcome::Violation(c) => {
                assert_eq!(c.margin, g);
                assert_eq!(
                    c.witness,
                    Witness::Triple { x: v.subset(&[1]).unwrap(), y: v.full(), z: v.subset(&[2]).unwrap() }
                );
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }
}

#[test]
fn gamma_matrix_at_zero_is_degenerate() {
    let spec = gamma_counterexample_matrix(&zero()).unwrap();
    let out = check_metric(&spec, u(2), &zero()).unwrap();
    assert!(out.passed());
    assert_eq!(out.verdict(), MetricVerdict::Pseudometric);
}

#[test]
fn float_and_exact_agree_on_gamma_margin() {
    let spec = gamma_counterexample_matrix(&rat(1, 4)).unwrap();
    let out = check_metric::<f64>(&spec, u(2), &1e-9).unwrap();
    assert!((out.certificate().unwrap().margin - 0.25).abs() <= 1e-12);
}
