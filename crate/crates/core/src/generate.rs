//! Random instances for property checks: supermodular tables, modular
//! parts, convex profiles and finite PGFs.

use num_bigint::BigInt;
use rand::Rng;

use crate::constructions::{shs_from_supermodular, ModularSpec};
use crate::pgf::PgfSpec;
use crate::scalar::{Rational, Scalar};
use crate::set::Universe;
use crate::setfn::{CardinalityProfile, SetFunctionTable, DEFAULT_TOLERANCE};

/// `g(A) = Σ_j w_j φ_j(|A ∩ S_j|) + Σ_{i∈A} v_i` with convex `φ_j`; the
/// linear term may have either sign.
pub fn random_supermodular<R: Rng + ?Sized>(u: Universe, rng: &mut R) -> SetFunctionTable<f64> {
    let n = u.size();
    let terms: Vec<(u32, f64, f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let support = rng.random_range(1..=u.full_mask().max(1));
            let weight = rng.random_range(0.1..2.0);
            let power = rng.random_range(1.0..3.0);
            let shift = rng.random_range(0.0..2.0);
            (support, weight, power, shift)
        })
        .collect();
    let linear: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SetFunctionTable::from_fn(u, |a| {
        let convex: f64 = terms
            .iter()
            .map(|&(s, w, p, shift)| {
                let c = (a.mask() & s).count_ones() as f64;
                w * (c.powf(p) + (c - shift).max(0.0))
            })
            .sum();
        let lin: f64 = (0..n).filter(|i| a.mask() >> i & 1 == 1).map(|i| linear[i]).sum();
        convex + lin
    })
}

/// Offset and weights in `[0, 1)`, each weight zero with probability 1/4.
pub fn random_modular<R: Rng + ?Sized>(u: Universe, rng: &mut R) -> ModularSpec<f64> {
    let offset = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..1.0) };
    let weights = (0..u.size())
        .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..1.0) })
        .collect();
    ModularSpec::new(offset, weights).expect("non-negative by construction")
}

/// A normalized supermodular Hamming slice: `f(∅) = 1`, non-negative,
/// nonincreasing, supermodular.
pub fn random_shs<R: Rng + ?Sized>(u: Universe, rng: &mut R) -> SetFunctionTable<f64> {
    loop {
        let g = random_supermodular(u, rng);
        let m = random_modular(u, rng);
        if let Ok(f) = shs_from_supermodular(&g, &m, &DEFAULT_TOLERANCE) {
            return f;
        }
    }
}

/// Non-negative, nondecreasing, supermodular.
pub fn random_increasing_supermodular<R: Rng + ?Sized>(u: Universe, rng: &mut R) -> SetFunctionTable<f64> {
    let f = random_shs(u, rng);
    let full = u.full_mask();
    SetFunctionTable::from_fn(u, |a| *f.at(full ^ a.mask()))
}

/// `h(0) = 1`, non-negative, nonincreasing and convex, of length `n + 1`.
pub fn random_convex_profile<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CardinalityProfile<f64> {
    let mut drops: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    drops.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = drops.iter().sum();
    let scale = if total > 0.0 { rng.random_range(0.2..=1.0) / total } else { 0.0 };
    let mut values = vec![1.0];
    for d in drops {
        let next = (values.last().unwrap() - d * scale).max(0.0);
        values.push(next);
    }
    CardinalityProfile::new(values)
}

/// A finite PGF with `α = 1`, rational coefficients and degree at most
/// `max_degree`.
pub fn random_pgf<R: Rng + ?Sized>(max_degree: usize, rng: &mut R) -> PgfSpec {
    let weights: Vec<u32> = loop {
        let w: Vec<u32> = (0..=max_degree).map(|_| if rng.random_bool(0.3) { 0 } else { rng.random_range(1..20) }).collect();
        if w.iter().any(|&x| x > 0) {
            break w;
        }
    };
    let total: u32 = weights.iter().sum();
    let coefficients = weights
        .iter()
        .map(|&w| Rational::new(BigInt::from(w), BigInt::from(total)))
        .collect();
    PgfSpec::finite(coefficients, Rational::from_int(1)).expect("normalized by construction")
}
