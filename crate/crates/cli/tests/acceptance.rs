//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use supersim_core::constructions::{
    cshs_counterexample, decompose_shs, pgf_transform, shs_from_supermodular, similarity_from_slice_function,
    ConstructionError,
};
use supersim_core::generate::{random_increasing_supermodular, random_modular, random_pgf, random_shs, random_supermodular};
use supersim_core::lsh::{
    bit_sampling_family, exact_collision, family_for, intersection_family, minhash_family, verify_lsh, HashFamily,
    PairSelection,
};
use supersim_core::pgf::{is_pgf_dilution, Dilution};
use supersim_core::setfn::{is_monotone, is_supermodular, product_supermodularity_check, Direction};
use supersim_core::similarity::{
    check_metric, classify, gamma_counterexample_matrix, Encoding, IntersectionParams, MetricOutcome, SimilarityVerdict,
};
use supersim_core::{rat, Rational, Scalar, SimilaritySpec, Subset, Universe};

const SEED: u64 = 7;
const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn u(n: usize) -> Universe {
    Universe::new(n).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

/// Verdict column of the published catalogue, keyed by descriptor.
fn published_verdict(similarity: &str) -> &'static str {
    match similarity {
        "jaccard" | "anderberg" | "rogers_tanimoto" => "supermodular",
        "hamming" => "modular",
        "simpson" | "braun_blanquet" | "sorensen_dice" | "forbes" => "neither",
        "sokal_sneath_1" => "submodular",
        "sorensen_gamma:gamma=2" | "sokal_sneath_gamma:gamma=2" => "supermodular",
        "sorensen_gamma:gamma=1/2" => "neither",
        "sokal_sneath_gamma:gamma=1/2" => "submodular",
        s if s.starts_with("cardinality_intersection") => "neither",
        s if s.starts_with("identity_intersection") => "supermodular",
        other => panic!("no published verdict for {other}"),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_supersim"))
        .args(["table1", "--n", "5", "--gammas", "0.5,2", "--k", "2", "--nint", "4", "--x", "0.1", "--h", "0.2", "--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("bad JSON: {e}"))?;
    let mut matched_rows = 0;
    let rows = v["rows"].as_array().ok_or("no rows")?;
    for row in rows {
        let ok = row["instances"].as_array().ok_or("no instances")?.iter().all(|i| {
            i["verdict"].as_str() == Some(published_verdict(i["similarity"].as_str().unwrap_or_default()))
        });
        matched_rows += ok as usize;
    }
    ensure(out.status.code() == Some(0), || format!("exit code {:?}", out.status.code()))?;
    ensure(matched_rows == 13 && rows.len() == 13, || format!("{matched_rows}/{} rows match", rows.len()))?;
    ensure(v["matched_rows"] == 13, || format!("report says {} matched", v["matched_rows"]))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:.1?}"))?;
    Ok(format!("13/13 rows match the published column, {elapsed:.1?}"))
}

fn criterion_2() -> Outcome {
    let gamma = rat(1, 4);
    let spec = gamma_counterexample_matrix(&gamma).map_err(|e| e.to_string())?;
    let report = classify::<Rational>(&spec, u(2), &Rational::zero()).map_err(|e| e.to_string())?;
    ensure(report.verdict == SimilarityVerdict::Supermodular, || format!("verdict {}", report.verdict))?;
    ensure(report.monotone, || "slices not nonincreasing".into())?;
    let Some(MetricOutcome::Violation(cert)) = &report.metric else {
        return Err(format!("no triangle violation: {:?}", report.metric));
    };
    let margin = cert.margin.to_f64();
    ensure((margin - 0.25).abs() <= 1e-12, || format!("margin {margin}"))?;
    ensure(cert.margin == gamma, || format!("exact margin {}", cert.margin))?;
    Ok(format!("supermodular, nonincreasing, triangle margin {} at {}", cert.margin, cert.witness))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst, mut redraws) = (0.0f64, 0);
    for i in 0..100 {
        let v = u(1 + i % 5);
        let f = loop {
            let g = random_supermodular(v, &mut rng);
            let m = random_modular(v, &mut rng);
            match shs_from_supermodular(&g, &m, &TOL) {
                Ok(f) => break f,
                Err(ConstructionError::DenominatorZero(_)) => redraws += 1,
                Err(e) => return Err(format!("pair {i}: {e}")),
            }
        };
        ensure(*f.at(0) == 1.0, || format!("pair {i}: f(empty) = {}", f.at(0)))?;
        ensure(f.is_nonnegative(&TOL), || format!("pair {i}: negative value"))?;
        ensure(is_supermodular(&f, &TOL).unwrap().passed(), || format!("pair {i}: not supermodular"))?;
        ensure(is_monotone(&f, Direction::Nonincreasing, &TOL).unwrap().passed(), || format!("pair {i}: not nonincreasing"))?;
        let (gh, mh) = decompose_shs(&f, &TOL).map_err(|e| format!("pair {i}: {e}"))?;
        let again = shs_from_supermodular(&gh, &mh, &TOL).map_err(|e| format!("pair {i}: {e}"))?;
        let dev = f.values().iter().zip(again.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        ensure(dev <= 1e-12, || format!("pair {i}: round trip off by {dev:e}"))?;
    }
    Ok(format!("100 pairs, max round-trip error {worst:e}, {redraws} redraws on a zero denominator"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut violations = 0;
    for i in 0..100 {
        let v = u(1 + i % 6);
        let f = random_shs(v, &mut rng);
        let s = similarity_from_slice_function(&f, &TOL).map_err(|e| format!("case {i}: {e}"))?;
        if !check_metric::<f64>(&s, v, &TOL).map_err(|e| e.to_string())?.passed() {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("100 similarities, 0 triangle violations".into())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut supermodular, mut modular) = (0, 0);
    for i in 0..50 {
        let p = random_pgf(4, &mut rng);
        for base in [SimilaritySpec::Jaccard, SimilaritySpec::Hamming] {
            let s = pgf_transform(p.clone(), base).map_err(|e| e.to_string())?;
            match classify::<Rational>(&s, u(5), &Rational::zero()).map_err(|e| e.to_string())?.verdict {
                SimilarityVerdict::Supermodular => supermodular += 1,
                SimilarityVerdict::Modular => modular += 1,
                other => return Err(format!("pgf {i} ({}) gives {other}", s.id())),
            }
        }
    }
    Ok(format!("100 transforms: {supermodular} supermodular, {modular} modular (both super- and submodular)"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let v = u(4);
    let mut violations = 0;
    for i in 0..1000 {
        let (f, g) = if i % 2 == 0 {
            (random_shs(v, &mut rng), random_shs(v, &mut rng))
        } else {
            (random_increasing_supermodular(v, &mut rng), random_increasing_supermodular(v, &mut rng))
        };
        match product_supermodularity_check(&f, &g, &TOL) {
            Ok(verdict) if verdict.passed() => {}
            Ok(_) => violations += 1,
            Err(e) => return Err(format!("pair {i}: {e}")),
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("1000 pairs, 0 violations".into())
}

/// Unordered pairs including `X = Y`.
fn all_pairs(v: Universe) -> impl Iterator<Item = (Subset, Subset)> {
    let subsets: Vec<Subset> = v.subsets().collect();
    (0..subsets.len()).flat_map(move |i| {
        let s = subsets.clone();
        (i..s.len()).map(move |j| (s[i], s[j]))
    })
}

fn exact_matches(fam: &HashFamily, spec: &SimilaritySpec) -> Result<usize, String> {
    let mut count = 0;
    for (x, y) in all_pairs(fam.universe()) {
        let p = exact_collision(fam, &x, &y).map_err(|e| e.to_string())?;
        let s = spec.eval_exact(&x, &y).map_err(|e| e.to_string())?;
        ensure(p == s, || format!("{}: {x} {y} collides with {p}, similarity {s}", fam.id()))?;
        count += 1;
    }
    Ok(count)
}

fn criterion_7() -> Outcome {
    let mut pairs = 0;
    for n in 1..=6 {
        pairs += exact_matches(&minhash_family(u(n)), &SimilaritySpec::Jaccard)?;
    }
    for n in 1..=10 {
        pairs += exact_matches(&bit_sampling_family(u(n)), &SimilaritySpec::Hamming)?;
    }
    let params = IntersectionParams::new(2, 4, rat(1, 10), rat(1, 5));
    let card = intersection_family(rat(1, 10), rat(1, 5), 2, 4, Encoding::Cardinality).map_err(|e| e.to_string())?;
    pairs += exact_matches(&card, &SimilaritySpec::CardinalityIntersection(params.clone()))?;
    let ident = intersection_family(rat(1, 10), rat(1, 5), 2, 4, Encoding::Identity).map_err(|e| e.to_string())?;
    pairs += exact_matches(&ident, &SimilaritySpec::IdentityIntersection(params))?;
    for n in 1..=5 {
        for spec in [SimilaritySpec::Anderberg, SimilaritySpec::RogersTanimoto] {
            let fam = family_for(&spec, u(n)).map_err(|e| e.to_string())?;
            pairs += exact_matches(&fam, &spec)?;
        }
    }
    Ok(format!("{pairs} pairs, every collision probability equals the similarity"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let params = IntersectionParams::new(2, 4, rat(1, 10), rat(1, 5));
    let v = u(5);
    let mut cases: Vec<(HashFamily, SimilaritySpec)> = vec![
        (minhash_family(v), SimilaritySpec::Jaccard),
        (bit_sampling_family(v), SimilaritySpec::Hamming),
    ];
    for spec in [
        SimilaritySpec::Anderberg,
        SimilaritySpec::RogersTanimoto,
        SimilaritySpec::CardinalityIntersection(params.clone()),
        SimilaritySpec::IdentityIntersection(params),
    ] {
        let n = spec.required_universe().unwrap_or(5);
        cases.push((family_for(&spec, u(n)).map_err(|e| e.to_string())?, spec));
    }
    let (mut pairs, mut worst, mut failed) = (0, 0.0f64, Vec::new());
    for (fam, spec) in &cases {
        let report = verify_lsh(fam, spec, &PairSelection::All, 100_000, SEED, 4.0).map_err(|e| e.to_string())?;
        pairs += report.pairs.len();
        worst = worst.max(report.max_abs_z().unwrap_or(0.0));
        if !report.pass {
            failed.push(format!("{} ({} pairs)", fam.id(), report.failures));
        }
    }
    let elapsed = start.elapsed();
    ensure(failed.is_empty(), || format!("failing families: {}; max |z| {worst:.2}", failed.join(", ")))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:.1?}"))?;
    Ok(format!("{} families, {pairs} pairs, max |z| {worst:.2}, {elapsed:.1?}", cases.len()))
}

fn criterion_9() -> Outcome {
    let ce = cshs_counterexample(4).map_err(|e| e.to_string())?;
    // h(x) = 3t^2/2 - t^3/2 with t = 1 - x/4
    for (x, h) in ce.profile.values.iter().enumerate() {
        let t = 1.0 - x as f64 / 4.0;
        let want = 1.5 * t * t - 0.5 * t * t * t;
        ensure((h.to_f64() - want).abs() <= 1e-15, || format!("h({x}) = {h}, expected {want}"))?;
    }
    ensure(ce.profile.values[0].is_one(), || "h(0) != 1".into())?;
    ce.cshs.as_ref().map_err(|e| format!("profile rejected: {e}"))?;
    ensure(ce.dilution == Dilution::Negative { index: 3 }, || format!("dilution {:?}", ce.dilution))?;
    let direct = is_pgf_dilution(&ce.coefficients);
    ensure(direct == Dilution::Negative { index: 3 }, || format!("coefficients give {direct:?}"))?;
    Ok("accepted as CSHS, rejected as a PGF dilution (negative coefficient at degree 3)".into())
}

fn criterion_10() -> Outcome {
    let sg = SimilaritySpec::SorensenGamma { gamma: rat(2, 1) };
    let ssg = SimilaritySpec::SokalSneathGamma { gamma: rat(2, 1) };
    let mut pairs = 0;
    for n in 1..=6 {
        for (x, y) in all_pairs(u(n)) {
            let a = SimilaritySpec::Anderberg.eval_exact(&x, &y).unwrap();
            ensure(a == sg.eval_exact(&x, &y).unwrap(), || format!("Anderberg differs at {x} {y}"))?;
            let r = SimilaritySpec::RogersTanimoto.eval_exact(&x, &y).unwrap();
            ensure(r == ssg.eval_exact(&x, &y).unwrap(), || format!("Rogers-Tanimoto differs at {x} {y}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs, both identities exact"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("table-1 reproduction", criterion_1),
        ("counterexample fidelity", criterion_2),
        ("construction soundness", criterion_3),
        ("metric theorem", criterion_4),
        ("supermodularity preservation", criterion_5),
        ("product lemma", criterion_6),
        ("exact LSH correctness", criterion_7),
        ("Monte-Carlo LSH", criterion_8),
        ("CSHS strictness", criterion_9),
        ("identities", criterion_10),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                passed += 1;
                println!("criterion {:>2} PASS {name}: {detail} [{secs:.1}s]", i + 1);
            }
            Err(detail) => println!("criterion {:>2} FAIL {name}: {detail} [{secs:.1}s]", i + 1),
        }
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
