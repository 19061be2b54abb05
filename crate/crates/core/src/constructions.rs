//! Supermodular Hamming similarities from supermodular + modular
//! ingredients, cardinality-based ones from convex profiles, and PGF value
//! transforms.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pgf::{cubic_counterexample_coefficients, is_pgf_dilution, Dilution, PgfError, PgfSpec};
use crate::scalar::{powi, rational_from_usize, Rational, Scalar};
use crate::set::{SetError, Universe};
use crate::setfn::{
    is_convex_profile, is_monotone, is_supermodular, CardinalityProfile, Certificate, Direction, SetFnError,
    SetFunctionTable, Verdict,
};
use crate::similarity::{SimilarityError, SimilaritySpec, SimilarityTable, MAX_CLASSIFY_UNIVERSE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    SetFn(#[from] SetFnError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Pgf(#[from] PgfError),
    #[error("invalid modular function: {0}")]
    Modular(String),
    #[error("normalizing denominator is zero ({0}); g must be non-modular or m non-zero")]
    DenominatorZero(String),
    #[error("{input} violates `{condition}`{}", witness.as_ref().map(|w| format!(": {w}")).unwrap_or_default())]
    Precondition { input: &'static str, condition: &'static str, witness: Option<String> },
    #[error("constructed function fails `{0}`")]
    Internal(String),
}

fn precondition<T: Scalar>(input: &'static str, condition: &'static str, cert: Option<&Certificate<T>>) -> ConstructionError {
    ConstructionError::Precondition { input, condition, witness: cert.map(|c| c.to_string()) }
}

/// `m(A) = offset + Σ_{i∈A} w_i` with non-negative offset and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularSpec<T = f64> {
    offset: T,
    weights: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct ModularFile {
    offset: f64,
    weights: Vec<f64>,
}

impl<T: Scalar> ModularSpec<T> {
    pub fn new(offset: T, weights: Vec<T>) -> Result<Self, ConstructionError> {
        if !offset.is_finite_value() || offset.is_negative() {
            return Err(ConstructionError::Modular(format!("offset must be non-negative, got {offset}")));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite_value() || w.is_negative()) {
            return Err(ConstructionError::Modular(format!("weight w_{} must be non-negative, got {w}", i + 1)));
        }
        Universe::new(weights.len())?;
        Ok(ModularSpec { offset, weights })
    }

    pub fn zero(u: Universe) -> Self {
        ModularSpec { offset: T::zero(), weights: vec![T::zero(); u.size()] }
    }

    pub fn offset(&self) -> &T {
        &self.offset
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn universe(&self) -> Universe {
        Universe::new(self.weights.len()).expect("validated at construction")
    }

    pub fn eval_mask(&self, mask: u32) -> T {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(self.offset.clone(), |acc, (_, w)| acc + w.clone())
    }

    pub fn to_table(&self) -> SetFunctionTable<T> {
        SetFunctionTable::from_fn(self.universe(), |a| self.eval_mask(a.mask()))
    }
}

impl ModularSpec<f64> {
    /// Parses `{ "offset": real, "weights": [...] }`.
    pub fn from_json(text: &str) -> Result<Self, ConstructionError> {
        let file: ModularFile = serde_json::from_str(text).map_err(|e| ConstructionError::Modular(e.to_string()))?;
        Self::new(file.offset, file.weights)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModularFile { offset: self.offset, weights: self.weights.clone() })
            .expect("modular spec serializes")
    }
}

/// `g(X) − g(∅) − Σ_{i∈X}(g({i}) − g(∅)) + m(X)`
fn normalized<T: Scalar>(g: &SetFunctionTable<T>, m: &ModularSpec<T>) -> SetFunctionTable<T> {
    let g0 = g.at(0).clone();
    let n = g.universe().size();
    let single: Vec<T> = (0..n).map(|i| g.at(1 << i).clone() - g0.clone()).collect();
    SetFunctionTable::from_fn(g.universe(), |a| {
        let linear = (0..n).filter(|i| a.mask() >> i & 1 == 1).fold(T::zero(), |acc, i| acc + single[i].clone());
        g.at(a.mask()).clone() - g0.clone() - linear + m.eval_mask(a.mask())
    })
}

/// Checks the four defining properties of a normalized supermodular
/// Hamming slice: `f(∅) = 1`, non-negative, nonincreasing, supermodular.
fn check_shs<T: Scalar>(f: &SetFunctionTable<T>, tol: &T) -> Result<(), (&'static str, Option<Certificate<T>>)> {
    if (f.at(0).clone() - T::one()).abs() > *tol {
        return Err(("f(∅) = 1", None));
    }
    if !f.is_nonnegative(tol) {
        return Err(("non-negative", None));
    }
    if let Verdict::Fail(c) = is_monotone(f, Direction::Nonincreasing, tol).map_err(|_| ("nonincreasing", None))? {
        return Err(("nonincreasing", Some(c)));
    }
    if let Verdict::Fail(c) = is_supermodular(f, tol).map_err(|_| ("supermodular", None))? {
        return Err(("supermodular", Some(c)));
    }
    Ok(())
}

/// `f(X) = ĝ(V∖X) / ĝ(V)` where `ĝ` is `g` with its modular part replaced
/// by `m`. The result is verified before it is returned.
pub fn shs_from_supermodular<T: Scalar>(
    g: &SetFunctionTable<T>,
    m: &ModularSpec<T>,
    tol: &T,
) -> Result<SetFunctionTable<T>, ConstructionError> {
    let u = g.universe();
    if m.universe() != u {
        return Err(SetError::UniverseMismatch(u.size(), m.universe().size()).into());
    }
    if let Verdict::Fail(c) = is_supermodular(g, tol)? {
        return Err(precondition("g", "supermodular", Some(&c)));
    }
    let canon = normalized(g, m);
    let full = u.full_mask();
    let denominator = canon.at(full).clone();
    if denominator.abs() <= *tol {
        return Err(ConstructionError::DenominatorZero(denominator.to_string()));
    }
    let f = SetFunctionTable::from_fn(u, |x| canon.at(full ^ x.mask()).clone() / denominator.clone());
    check_shs(&f, tol).map_err(|(condition, _)| ConstructionError::Internal(condition.to_string()))?;
    Ok(f)
}

/// Recovers `(ĝ, m̂)` with `m̂(∅) = f(V)`, `m̂({i}) = f(V∖{i})` and
/// `ĝ(X) = f(V∖X) − m̂(X)`; feeding them back reproduces `f`.
pub fn decompose_shs<T: Scalar>(
    f: &SetFunctionTable<T>,
    tol: &T,
) -> Result<(SetFunctionTable<T>, ModularSpec<T>), ConstructionError> {
    check_shs(f, tol).map_err(|(condition, c)| precondition("f", condition, c.as_ref()))?;
    let u = f.universe();
    let full = u.full_mask();
    let offset = f.at(full).clone();
    // tiny negative weights can appear from float noise within `tol`
    let clamp = |v: T| if v.is_negative() { T::zero() } else { v };
    let weights = (0..u.size()).map(|i| clamp(f.at(full ^ (1 << i)).clone() - offset.clone())).collect();
    let m = ModularSpec::new(clamp(offset), weights)?;
    let g = SetFunctionTable::from_fn(u, |x| f.at(full ^ x.mask()).clone() - m.eval_mask(x.mask()));
    Ok((g, m))
}

/// `S(X, Y) = f(X △ Y)` as a custom table.
pub fn similarity_from_slice_function<T: Scalar>(
    f: &SetFunctionTable<T>,
    tol: &T,
) -> Result<SimilaritySpec, ConstructionError> {
    check_shs(f, tol).map_err(|(condition, c)| precondition("f", condition, c.as_ref()))?;
    let u = f.universe();
    if u.size() > MAX_CLASSIFY_UNIVERSE {
        return Err(SimilarityError::TooLarge { operation: "similarity table", size: u.size(), cap: MAX_CLASSIFY_UNIVERSE }
            .into());
    }
    let exact: Vec<Rational> = f
        .values()
        .iter()
        .enumerate()
        .map(|(mask, v)| if mask == 0 { Rational::one() } else { v.to_rational().expect("finite table") })
        .collect();
    let m = u.power_set_len();
    let values = (0..m * m).map(|idx| exact[(idx / m) ^ (idx % m)].clone()).collect();
    Ok(SimilaritySpec::Table(SimilarityTable::new(u, values)?))
}

/// Validates `h` (`h(0) = 1`, non-negative, nonincreasing, convex) and
/// returns `S(X, Y) = h(|X △ Y|)`.
pub fn cshs_from_profile<T: Scalar>(h: &CardinalityProfile<T>, tol: &T) -> Result<SimilaritySpec, ConstructionError> {
    if h.len() < 2 {
        return Err(SetFnError::ProfileTooShort(h.len()).into());
    }
    if let Some(i) = h.values.iter().position(|v| !v.is_finite_value()) {
        return Err(precondition::<T>("h", "finite", None).with_witness(format!("h({i})")));
    }
    if (h.values[0].clone() - T::one()).abs() > *tol {
        return Err(precondition::<T>("h", "h(0) = 1", None).with_witness(format!("h(0) = {}", h.values[0])));
    }
    if let Some(i) = h.values.iter().position(|v| *v < -tol.clone()) {
        return Err(precondition::<T>("h", "non-negative", None).with_witness(format!("h({i}) = {}", h.values[i])));
    }
    if let Some(i) = (1..h.len()).find(|&i| h.values[i].clone() - h.values[i - 1].clone() > *tol) {
        return Err(precondition::<T>("h", "nonincreasing", None)
            .with_witness(format!("h({}) = {} < h({i}) = {}", i - 1, h.values[i - 1], h.values[i])));
    }
    if let Verdict::Fail(c) = is_convex_profile(h, tol)? {
        return Err(precondition("h", "convex", Some(&c)));
    }
    let mut exact: Vec<Rational> = h.values.iter().map(|v| v.to_rational().expect("finite")).collect();
    exact[0] = Rational::one();
    let spec = SimilaritySpec::Profile(CardinalityProfile::new(exact));
    spec.validate()?;
    Ok(spec)
}

impl ConstructionError {
    fn with_witness(self, w: String) -> Self {
        match self {
            ConstructionError::Precondition { input, condition, .. } => {
                ConstructionError::Precondition { input, condition, witness: Some(w) }
            }
            other => other,
        }
    }
}

/// `S'(X, Y) = α p(S(X, Y))` off the diagonal.
pub fn pgf_transform(p: PgfSpec, s: SimilaritySpec) -> Result<SimilaritySpec, ConstructionError> {
    p.validate()?;
    s.validate()?;
    Ok(SimilaritySpec::PgfTransform { pgf: p, base: Box::new(s) })
}

/// A convex profile that is not a PGF composed with Hamming.
#[derive(Debug, Clone)]
pub struct CshsCounterexample {
    /// `h(x) = f(1 − x/n)` with `f(t) = 3t²/2 − t³/2`
    pub profile: CardinalityProfile<Rational>,
    pub coefficients: Vec<Rational>,
    pub cshs: Result<SimilaritySpec, ConstructionError>,
    pub dilution: Dilution<Rational>,
}

pub fn cshs_counterexample(n: usize) -> Result<CshsCounterexample, ConstructionError> {
    let u = Universe::new(n)?;
    let coefficients = cubic_counterexample_coefficients();
    let f = |t: Rational| {
        coefficients
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (i, c)| acc + c.clone() * powi(&t, i))
    };
    let nn = rational_from_usize(u.size());
    let values = (0..=u.size()).map(|x| f(Rational::one() - rational_from_usize(x) / nn.clone())).collect();
    let profile = CardinalityProfile::new(values);
    let cshs = cshs_from_profile(&profile, &Rational::zero());
    let dilution = is_pgf_dilution(&coefficients);
    Ok(CshsCounterexample { profile, coefficients, cshs, dilution })
}
