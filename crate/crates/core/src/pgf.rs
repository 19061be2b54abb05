//! Probability generating functions and their dilutions `x ↦ α·p(x)`.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{rat, Rational, Scalar};

/// Allowed deviation of `Σ p_i` from 1 for a finite distribution.
pub const PGF_MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PgfError {
    #[error("dilution alpha must lie in [0, 1], got {0}")]
    Alpha(Rational),
    #[error("coefficient p_{index} = {value} is negative")]
    NegativeCoefficient { index: usize, value: Rational },
    #[error("coefficients sum to {0}, expected 1")]
    Mass(Rational),
    #[error("geometric ratio must lie in [0, 1), got {0}")]
    Ratio(Rational),
    #[error("gamma must be at least 1 for a geometric transform, got {0}")]
    Gamma(Rational),
    #[error("empty coefficient list")]
    Empty,
    #[error("invalid PGF description: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PgfDistribution {
    /// `p_0, p_1, ..., p_d`
    Finite(Vec<Rational>),
    /// `p_i = (1 − r) r^(i−1)` for `i ≥ 1`, with generating function
    /// `(1 − r)x / (1 − r x)`.
    Geometric { ratio: Rational },
}

/// `x ↦ α Σ p_i x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PgfSpec {
    pub alpha: Rational,
    pub distribution: PgfDistribution,
}

impl PgfSpec {
    pub fn finite(coefficients: Vec<Rational>, alpha: Rational) -> Result<Self, PgfError> {
        let spec = PgfSpec { alpha, distribution: PgfDistribution::Finite(coefficients) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn geometric(ratio: Rational, alpha: Rational) -> Result<Self, PgfError> {
        let spec = PgfSpec { alpha, distribution: PgfDistribution::Geometric { ratio } };
        spec.validate()?;
        Ok(spec)
    }

    /// Geometric PGF with ratio `1 − 1/γ`, mapping Jaccard to Sørensen_γ and
    /// Hamming to Sokal-Sneath_γ: `x ↦ x / (γ − (γ − 1) x)`.
    pub fn for_gamma(gamma: &Rational) -> Result<Self, PgfError> {
        if *gamma < Rational::one() {
            return Err(PgfError::Gamma(gamma.clone()));
        }
        Self::geometric(Rational::one() - gamma.recip(), Rational::one())
    }

    pub fn identity() -> Self {
        PgfSpec {
            alpha: Rational::one(),
            distribution: PgfDistribution::Finite(vec![Rational::zero(), Rational::one()]),
        }
    }

    pub fn validate(&self) -> Result<(), PgfError> {
        if self.alpha.is_negative() || self.alpha > Rational::one() {
            return Err(PgfError::Alpha(self.alpha.clone()));
        }
        match &self.distribution {
            PgfDistribution::Finite(p) => {
                if p.is_empty() {
                    return Err(PgfError::Empty);
                }
                if let Some((index, value)) = p.iter().enumerate().find(|(_, v)| v.is_negative()) {
                    return Err(PgfError::NegativeCoefficient { index, value: value.clone() });
                }
                let mass: Rational = p.iter().sum();
                let tol = Rational::from_float(PGF_MASS_TOLERANCE).expect("finite");
                if (mass.clone() - Rational::one()).abs() > tol {
                    return Err(PgfError::Mass(mass));
                }
            }
            PgfDistribution::Geometric { ratio } => {
                if ratio.is_negative() || *ratio >= Rational::one() {
                    return Err(PgfError::Ratio(ratio.clone()));
                }
            }
        }
        Ok(())
    }

    /// `α p(x)`.
    pub fn eval<T: Scalar>(&self, x: &T) -> T {
        let alpha = T::from_rational(&self.alpha);
        alpha * self.eval_undiluted(x)
    }

    /// `p(x)` without the dilution factor.
    pub fn eval_undiluted<T: Scalar>(&self, x: &T) -> T {
        match &self.distribution {
            PgfDistribution::Finite(p) => p
                .iter()
                .rev()
                .fold(T::zero(), |acc, c| acc * x.clone() + T::from_rational(c)),
            PgfDistribution::Geometric { ratio } => {
                let r = T::from_rational(ratio);
                (T::one() - r.clone()) * x.clone() / (T::one() - r * x.clone())
            }
        }
    }

    /// Samples a degree `i` with probability `p_i` from a unit uniform.
    pub(crate) fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.distribution {
            PgfDistribution::Finite(p) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut last_positive = 0;
                for (i, c) in p.iter().enumerate() {
                    let c = c.to_f64();
                    if c > 0.0 {
                        last_positive = i;
                    }
                    acc += c;
                    if u < acc {
                        return i;
                    }
                }
                last_positive
            }
            PgfDistribution::Geometric { ratio } => {
                let r = ratio.to_f64();
                if r <= 0.0 {
                    return 1;
                }
                // inverse CDF: P(I > i) = r^i
                let u: f64 = 1.0 - rng.random::<f64>();
                1 + (u.ln() / r.ln()).floor() as usize
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.distribution {
            PgfDistribution::Finite(p) => {
                let cs: Vec<String> = p.iter().map(|c| c.to_string()).collect();
                format!("pgf[alpha={};coeffs={}]", self.alpha, cs.join(","))
            }
            PgfDistribution::Geometric { ratio } => {
                format!("pgf[alpha={};geometric={}]", self.alpha, ratio)
            }
        }
    }
}

/// JSON form: `{ "alpha": a, "coeffs": [...] }` or
/// `{ "alpha": a, "family": "geometric", "ratio": r }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PgfFile {
    Finite { alpha: f64, coeffs: Vec<f64> },
    Family { alpha: f64, family: String, ratio: f64 },
}

impl PgfSpec {
    pub fn from_json(text: &str) -> Result<Self, PgfError> {
        let file: PgfFile = serde_json::from_str(text).map_err(|e| PgfError::Format(e.to_string()))?;
        let exact = |x: f64| Rational::from_float(x).ok_or_else(|| PgfError::Format(format!("non-finite value {x}")));
        match file {
            PgfFile::Finite { alpha, coeffs } => {
                let coeffs = coeffs.into_iter().map(exact).collect::<Result<_, _>>()?;
                PgfSpec::finite(coeffs, exact(alpha)?)
            }
            PgfFile::Family { alpha, family, ratio } => {
                if family != "geometric" {
                    return Err(PgfError::Format(format!("unknown family `{family}`")));
                }
                PgfSpec::geometric(exact(ratio)?, exact(alpha)?)
            }
        }
    }
}

/// Result of testing whether a coefficient list is `α` times a PGF.
#[derive(Debug, Clone, PartialEq)]
pub enum Dilution<T> {
    Yes { alpha: T, pgf: Vec<T> },
    /// First negative coefficient.
    Negative { index: usize },
    /// Non-negative but with total mass above 1.
    MassExceedsOne { mass: T },
}

impl<T> Dilution<T> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Dilution::Yes { .. })
    }
}

/// Decides whether `Σ c_i x^i` equals `α p(x)` for a PGF `p` and
/// `α ∈ [0, 1]`. An all-zero list is the `α = 0` dilution of `p(x) = 1`.
pub fn is_pgf_dilution<T: Scalar>(coefficients: &[T]) -> Dilution<T> {
    if let Some(index) = coefficients.iter().position(|c| c.is_negative()) {
        return Dilution::Negative { index };
    }
    let mass = coefficients.iter().fold(T::zero(), |acc, c| acc + c.clone());
    if mass > T::one() {
        return Dilution::MassExceedsOne { mass };
    }
    if mass.is_zero() {
        return Dilution::Yes { alpha: mass, pgf: vec![T::one()] };
    }
    let pgf = coefficients.iter().map(|c| c.clone() / mass.clone()).collect();
    Dilution::Yes { alpha: mass, pgf }
}

/// Coefficients of `f(t) = (3/2) t² − (1/2) t³`.
pub fn cubic_counterexample_coefficients() -> Vec<Rational> {
    vec![rat(0, 1), rat(0, 1), rat(3, 2), rat(-1, 2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dilution_examples() {
        assert_eq!(is_pgf_dilution(&[0.0, 0.0, 1.5, -0.5]), Dilution::Negative { index: 3 });
        assert_eq!(
            is_pgf_dilution(&[0.5, 0.5]),
            Dilution::Yes { alpha: 1.0, pgf: vec![0.5, 0.5] }
        );
        assert_eq!(
            is_pgf_dilution(&[rat(1, 4), rat(1, 4)]),
            Dilution::Yes { alpha: rat(1, 2), pgf: vec![rat(1, 2), rat(1, 2)] }
        );
        assert!(matches!(is_pgf_dilution(&[0.7, 0.7]), Dilution::MassExceedsOne { .. }));
        assert_eq!(
            is_pgf_dilution(&cubic_counterexample_coefficients()),
            Dilution::Negative { index: 3 }
        );
    }

    #[test]
    fn geometric_closed_form() {
        let p = PgfSpec::for_gamma(&rat(2, 1)).unwrap();
        assert_eq!(p.eval(&rat(1, 3)), rat(1, 5));
        assert_eq!(p.eval(&rat(1, 1)), rat(1, 1));
        assert_eq!(p.eval(&rat(0, 1)), rat(0, 1));
        let gamma = rat(3, 1);
        let p = PgfSpec::for_gamma(&gamma).unwrap();
        let x = rat(2, 7);
        assert_eq!(p.eval(&x), x.clone() / (gamma.clone() - (gamma - rat(1, 1)) * x));
    }

    #[test]
    fn geometric_matches_truncated_series() {
        let p = PgfSpec::geometric(rat(1, 2), rat(1, 1)).unwrap();
        let x = 0.6f64;
        let series: f64 = (1..200).map(|i| 0.5 * 0.5f64.powi(i - 1) * x.powi(i)).sum();
        assert!((p.eval(&x) - series).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(PgfSpec::finite(vec![rat(1, 2), rat(1, 2)], rat(3, 2)).is_err());
        assert!(matches!(
            PgfSpec::finite(vec![rat(3, 2), rat(-1, 2)], rat(1, 1)),
            Err(PgfError::NegativeCoefficient { index: 1, .. })
        ));
        assert!(matches!(PgfSpec::finite(vec![rat(1, 2)], rat(1, 1)), Err(PgfError::Mass(_))));
        assert!(PgfSpec::geometric(rat(1, 1), rat(1, 1)).is_err());
        assert!(PgfSpec::for_gamma(&rat(1, 2)).is_err());
        assert!(PgfSpec::for_gamma(&rat(1, 1)).is_ok());
    }

    #[test]
    fn json_forms() {
        let p = PgfSpec::from_json(r#"{"alpha": 1, "coeffs": [0.25, 0.75]}"#).unwrap();
        assert_eq!(p.distribution, PgfDistribution::Finite(vec![rat(1, 4), rat(3, 4)]));
        let g = PgfSpec::from_json(r#"{"alpha": 0.5, "family": "geometric", "ratio": 0.5}"#).unwrap();
        assert_eq!(g.alpha, rat(1, 2));
        assert!(PgfSpec::from_json(r#"{"alpha": 1, "family": "poisson", "ratio": 0.5}"#).is_err());
    }

    #[test]
    fn degree_sampling_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = PgfSpec::geometric(rat(1, 2), rat(1, 1)).unwrap();
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let d = p.sample_degree(&mut rng);
            assert!(d >= 1);
            if d <= 3 {
                counts[d] += 1;
            }
        }
        for (i, expect) in [(1, 0.5), (2, 0.25), (3, 0.125)] {
            let freq = counts[i] as f64 / n as f64;
            let se = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!((freq - expect).abs() < 5.0 * se, "degree {i}: {freq}");
        }

        let f = PgfSpec::finite(vec![rat(0, 1), rat(1, 4), rat(0, 1), rat(3, 4)], rat(1, 1)).unwrap();
        for _ in 0..1000 {
            let d = f.sample_degree(&mut rng);
            assert!(d == 1 || d == 3);
        }
    }
}
