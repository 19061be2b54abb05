//! Explicit set-function tables and exhaustive property testers.
//!
//! Every tester walks the whole power set and returns either a pass (with the
//! tightest slack it saw) or the single worst violation as a [`Certificate`].
//! Ties between equally bad witnesses go to the one visited first, i.e. the
//! lowest base mask, then the lowest element indices.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::set::{SetError, Subset, Universe};

/// Largest universe the exhaustive testers accept (loops are `O(2^n n^2)`).
pub const MAX_TESTER_UNIVERSE: usize = 16;

/// Default comparison tolerance for float tables.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetFnError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("table for universe of size {size} needs {expected} values, got {got}")]
    WrongLength { size: usize, expected: usize, got: usize },
    #[error("table value at mask {mask} is not finite")]
    NonFinite { mask: u32 },
    #[error("universe size {size} exceeds the tester cap of {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("elements s and t must be distinct (both {0})")]
    SameElement(usize),
    #[error("element {0} already belongs to the base set")]
    ElementInBase(usize),
    #[error("{0} is not a subset of {1}")]
    NotNested(Subset, Subset),
    #[error("profile needs at least 2 values, got {0}")]
    ProfileTooShort(usize),
    #[error("profile has {got} values but the universe needs {expected}")]
    ProfileLength { expected: usize, got: usize },
    #[error("product precondition failed: {input} is not {property}")]
    Precondition { input: &'static str, property: String },
    #[error("invalid table file: {0}")]
    Format(String),
}

/// A set function `f : P(V) -> T` stored as a dense table indexed by mask.
#[derive(Clone, PartialEq)]
pub struct SetFunctionTable<T = f64> {
    universe: Universe,
    values: Vec<T>,
}

impl<T: Scalar> SetFunctionTable<T> {
    pub fn new(universe: Universe, values: Vec<T>) -> Result<Self, SetFnError> {
        let expected = universe.power_set_len();
        if values.len() != expected {
            return Err(SetFnError::WrongLength {
                size: universe.size(),
                expected,
                got: values.len(),
            });
        }
        if let Some(mask) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(SetFnError::NonFinite { mask: mask as u32 });
        }
        Ok(SetFunctionTable { universe, values })
    }

    pub fn from_fn(universe: Universe, mut f: impl FnMut(Subset) -> T) -> Self {
        let values = universe.subsets().map(&mut f).collect();
        SetFunctionTable { universe, values }
    }

    /// `A ↦ g(|A|)`.
    pub fn from_profile(universe: Universe, profile: &CardinalityProfile<T>) -> Result<Self, SetFnError> {
        if profile.len() != universe.size() + 1 {
            return Err(SetFnError::ProfileLength {
                expected: universe.size() + 1,
                got: profile.len(),
            });
        }
        Ok(Self::from_fn(universe, |a| profile.values[a.len()].clone()))
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, mask: u32) -> &T {
        &self.values[mask as usize]
    }

    pub fn value(&self, a: &Subset) -> Result<&T, SetFnError> {
        if a.universe() != self.universe {
            return Err(SetError::UniverseMismatch(a.universe().size(), self.universe.size()).into());
        }
        Ok(&self.values[a.mask() as usize])
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SetFunctionTable<U> {
        SetFunctionTable { universe: self.universe, values: self.values.iter().map(f).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v.clone())
    }

    /// Pointwise product `fg`.
    pub fn product(&self, other: &Self) -> Result<Self, SetFnError> {
        if self.universe != other.universe {
            return Err(SetError::UniverseMismatch(self.universe.size(), other.universe.size()).into());
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.clone() * b.clone())
            .collect();
        Ok(SetFunctionTable { universe: self.universe, values })
    }

    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .skip(1)
            .fold(self.values[0].clone(), |m, v| if *v < m { v.clone() } else { m })
    }

    pub fn is_nonnegative(&self, tol: &T) -> bool {
        let floor = -tol.clone();
        self.values.iter().all(|v| *v >= floor)
    }
}

impl<T: Scalar> fmt::Debug for SetFunctionTable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetFunctionTable")
            .field("n", &self.universe.size())
            .field("values", &self.values)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    n: usize,
    values: Vec<f64>,
}

impl SetFunctionTable<f64> {
    /// Parses `{ "n": int, "values": [2^n reals in mask order] }`.
    pub fn from_json(text: &str) -> Result<Self, SetFnError> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| SetFnError::Format(e.to_string()))?;
        let universe = Universe::new(file.n)?;
        Self::new(universe, file.values)
    }

    pub fn to_json(&self) -> String {
        let file = TableFile { n: self.universe.size(), values: self.values.clone() };
        serde_json::to_string(&file).expect("table serializes")
    }
}

/// `g(0), g(1), ..., g(n)` for a cardinality-based set function.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityProfile<T = f64> {
    pub values: Vec<T>,
}

impl<T: Scalar> CardinalityProfile<T> {
    pub fn new(values: Vec<T>) -> Self {
        CardinalityProfile { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Size of the universe this profile describes (`len - 1`).
    pub fn universe_size(&self) -> usize {
        self.values.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Nonincreasing => "nonincreasing",
            Direction::Nondecreasing => "nondecreasing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyKind {
    Submodularity,
    Supermodularity,
    Monotonicity,
    Modularity,
    Convexity,
    Triangle,
    SimilarityAxiom,
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropertyKind::Submodularity => "submodularity",
            PropertyKind::Supermodularity => "supermodularity",
            PropertyKind::Monotonicity => "monotonicity",
            PropertyKind::Modularity => "modularity",
            PropertyKind::Convexity => "convexity",
            PropertyKind::Triangle => "triangle",
            PropertyKind::SimilarityAxiom => "similarity-axiom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    /// `f(A∪{t}) − f(A) − f(A∪{s,t}) + f(A∪{s})`
    SecondOrder { base: Subset, s: usize, t: usize },
    /// `A` against `A ∪ {element}`
    Cover { set: Subset, element: usize, direction: Direction },
    /// interior point of a cardinality profile
    ProfilePoint { x: usize },
    /// `d(X,Z) ≤ d(X,Y) + d(Y,Z)` fails
    Triple { x: Subset, y: Subset, z: Subset },
    Pair { x: Subset, y: Subset },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::SecondOrder { base, s, t } => write!(f, "A={base} s={s} t={t}"),
            Witness::Cover { set, element, .. } => write!(f, "A={set} x={element}"),
            Witness::ProfilePoint { x } => write!(f, "x={x}"),
            Witness::Triple { x, y, z } => write!(f, "X={x} Y={y} Z={z}"),
            Witness::Pair { x, y } => write!(f, "X={x} Y={y}"),
        }
    }
}

/// A concrete violation: the inequality defining `kind` fails at `witness`
/// by `margin` (always strictly greater than the tolerance used).
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<T = f64> {
    pub kind: PropertyKind,
    pub witness: Witness,
    pub margin: T,
}

impl<T: Scalar> Certificate<T> {
    /// Re-evaluates the violated inequality on `f`. `None` for witnesses that
    /// do not refer to a set-function table.
    pub fn replay(&self, f: &SetFunctionTable<T>) -> Option<T> {
        match &self.witness {
            Witness::SecondOrder { base, s, t } => {
                let d = second_order_difference(f, base, *s, *t).ok()?;
                Some(match self.kind {
                    PropertyKind::Submodularity => -d,
                    PropertyKind::Supermodularity => d,
                    PropertyKind::Modularity => d.abs(),
                    _ => return None,
                })
            }
            Witness::Cover { set, element, direction } => {
                let lo = f.value(set).ok()?.clone();
                let hi = f.value(&set.with(*element).ok()?).ok()?.clone();
                Some(match direction {
                    Direction::Nonincreasing => hi - lo,
                    Direction::Nondecreasing => lo - hi,
                })
            }
            _ => None,
        }
    }
}

impl<T: Scalar> fmt::Display for Certificate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at {} by {}", self.kind, self.witness, self.margin)
    }
}

/// Outcome of an exhaustive property test.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<T = f64> {
    /// `slack` is the tightest value of the tested quantity (`None` when the
    /// universe is too small to contain any instance of the inequality).
    Pass { slack: Option<T> },
    Fail(Certificate<T>),
}

impl<T> Verdict<T> {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn certificate(&self) -> Option<&Certificate<T>> {
        match self {
            Verdict::Fail(c) => Some(c),
            Verdict::Pass { .. } => None,
        }
    }

    pub fn into_certificate(self) -> Option<Certificate<T>> {
        match self {
            Verdict::Fail(c) => Some(c),
            Verdict::Pass { .. } => None,
        }
    }
}

fn check_cap(u: Universe) -> Result<(), SetFnError> {
    if u.size() > MAX_TESTER_UNIVERSE {
        Err(SetFnError::TooLarge { size: u.size(), cap: MAX_TESTER_UNIVERSE })
    } else {
        Ok(())
    }
}

#[inline]
fn sod_raw<T: Scalar>(v: &[T], a: u32, sb: u32, tb: u32) -> T {
    v[(a | tb) as usize].clone() - v[a as usize].clone() - v[(a | sb | tb) as usize].clone()
        + v[(a | sb) as usize].clone()
}

/// Visits every `(A, s, t)` with `s < t`, both outside `A`, in deterministic
/// order. The second-order difference is symmetric in `s` and `t`.
fn for_each_second_order<T: Scalar>(f: &SetFunctionTable<T>, mut visit: impl FnMut(u32, usize, usize, T)) {
    let n = f.universe.size();
    let v = &f.values;
    for a in 0..f.universe.power_set_len() as u32 {
        for s in 0..n {
            let sb = 1u32 << s;
            if a & sb != 0 {
                continue;
            }
            for t in s + 1..n {
                let tb = 1u32 << t;
                if a & tb != 0 {
                    continue;
                }
                visit(a, s + 1, t + 1, sod_raw(v, a, sb, tb));
            }
        }
    }
}

pub fn second_order_difference<T: Scalar>(
    f: &SetFunctionTable<T>,
    a: &Subset,
    s: usize,
    t: usize,
) -> Result<T, SetFnError> {
    if a.universe() != f.universe {
        return Err(SetError::UniverseMismatch(a.universe().size(), f.universe.size()).into());
    }
    let n = f.universe.size();
    for e in [s, t] {
        if e == 0 || e > n {
            return Err(SetError::ElementOutOfRange { element: e, size: n }.into());
        }
    }
    if s == t {
        return Err(SetFnError::SameElement(s));
    }
    for e in [s, t] {
        if a.contains(e) {
            return Err(SetFnError::ElementInBase(e));
        }
    }
    Ok(sod_raw(&f.values, a.mask(), 1 << (s - 1), 1 << (t - 1)))
}

/// `f(A∪{x}) − f(A) − f(B∪{x}) + f(B)` for `A ⊆ B`, `x ∉ B`: non-negative
/// everywhere iff `f` is submodular.
pub fn submodular_gap<T: Scalar>(
    f: &SetFunctionTable<T>,
    a: &Subset,
    b: &Subset,
    x: usize,
) -> Result<T, SetFnError> {
    if !a.is_subset_of(b)? {
        return Err(SetFnError::NotNested(*a, *b));
    }
    if b.contains(x) {
        return Err(SetFnError::ElementInBase(x));
    }
    let ax = a.with(x)?;
    let bx = b.with(x)?;
    Ok(f.value(&ax)?.clone() - f.value(a)?.clone() - f.value(&bx)?.clone() + f.value(b)?.clone())
}

pub fn is_submodular<T: Scalar>(f: &SetFunctionTable<T>, tol: &T) -> Result<Verdict<T>, SetFnError> {
    check_cap(f.universe)?;
    let mut worst: Option<(T, u32, usize, usize)> = None;
    for_each_second_order(f, |a, s, t, d| {
        if worst.as_ref().is_none_or(|w| d < w.0) {
            worst = Some((d, a, s, t));
        }
    });
    Ok(match worst {
        None => Verdict::Pass { slack: None },
        Some((d, a, s, t)) if d < -tol.clone() => Verdict::Fail(Certificate {
            kind: PropertyKind::Submodularity,
            witness: Witness::SecondOrder { base: Subset::from_mask_unchecked(f.universe, a), s, t },
            margin: -d,
        }),
        Some((d, ..)) => Verdict::Pass { slack: Some(d) },
    })
}

/// Supermodularity, i.e. submodularity of `-f`. The reported slack is the
/// smallest second-order difference of `-f`.
pub fn is_supermodular<T: Scalar>(f: &SetFunctionTable<T>, tol: &T) -> Result<Verdict<T>, SetFnError> {
    check_cap(f.universe)?;
    let mut worst: Option<(T, u32, usize, usize)> = None;
    for_each_second_order(f, |a, s, t, d| {
        if worst.as_ref().is_none_or(|w| d > w.0) {
            worst = Some((d, a, s, t));
        }
    });
    Ok(match worst {
        None => Verdict::Pass { slack: None },
        Some((d, a, s, t)) if d > *tol => Verdict::Fail(Certificate {
            kind: PropertyKind::Supermodularity,
            witness: Witness::SecondOrder { base: Subset::from_mask_unchecked(f.universe, a), s, t },
            margin: d,
        }),
        Some((d, ..)) => Verdict::Pass { slack: Some(-d) },
    })
}

/// Monotonicity on covering pairs `A ⊂ A∪{x}`, which implies it for all
/// `A ⊆ B` by transitivity.
pub fn is_monotone<T: Scalar>(
    f: &SetFunctionTable<T>,
    direction: Direction,
    tol: &T,
) -> Result<Verdict<T>, SetFnError> {
    check_cap(f.universe)?;
    let n = f.universe.size();
    let v = &f.values;
    let mut worst: Option<(T, u32, usize)> = None;
    for a in 0..f.universe.power_set_len() as u32 {
        for x in 0..n {
            let xb = 1u32 << x;
            if a & xb != 0 {
                continue;
            }
            let up = v[(a | xb) as usize].clone() - v[a as usize].clone();
            let violation = match direction {
                Direction::Nonincreasing => up,
                Direction::Nondecreasing => -up,
            };
            if worst.as_ref().is_none_or(|w| violation > w.0) {
                worst = Some((violation, a, x + 1));
            }
        }
    }
    Ok(match worst {
        None => Verdict::Pass { slack: None },
        Some((m, a, x)) if m > *tol => Verdict::Fail(Certificate {
            kind: PropertyKind::Monotonicity,
            witness: Witness::Cover {
                set: Subset::from_mask_unchecked(f.universe, a),
                element: x,
                direction,
            },
            margin: m,
        }),
        Some((m, ..)) => Verdict::Pass { slack: Some(-m) },
    })
}

/// Both submodular and supermodular. A failure reports the larger of the two
/// violations (submodularity first on ties) relabelled as a modularity
/// certificate.
pub fn is_modular<T: Scalar>(f: &SetFunctionTable<T>, tol: &T) -> Result<Verdict<T>, SetFnError> {
    let sub = is_submodular(f, tol)?;
    let sup = is_supermodular(f, tol)?;
    let relabel = |c: Certificate<T>| Certificate { kind: PropertyKind::Modularity, ..c };
    Ok(match (sub, sup) {
        (Verdict::Pass { slack: a }, Verdict::Pass { slack: b }) => Verdict::Pass {
            slack: match (a, b) {
                (Some(a), Some(b)) => Some(if b < a { b } else { a }),
                (a, b) => a.or(b),
            },
        },
        (Verdict::Fail(c), Verdict::Pass { .. }) | (Verdict::Pass { .. }, Verdict::Fail(c)) => {
            Verdict::Fail(relabel(c))
        }
        (Verdict::Fail(a), Verdict::Fail(b)) => {
            Verdict::Fail(relabel(if b.margin > a.margin { b } else { a }))
        }
    })
}

/// The profile `g` with `f(A) = g(|A|)`, if `f` depends only on `|A|`
/// (within `tol`).
pub fn cardinality_profile_of<T: Scalar>(f: &SetFunctionTable<T>, tol: &T) -> Option<CardinalityProfile<T>> {
    let n = f.universe.size();
    let profile: Vec<T> = (0..=n).map(|k| f.values[(1usize << k) - 1].clone()).collect();
    let consistent = f.values.iter().enumerate().all(|(mask, v)| {
        let k = (mask as u32).count_ones() as usize;
        (v.clone() - profile[k].clone()).abs() <= *tol
    });
    consistent.then(|| CardinalityProfile::new(profile))
}

/// Discrete convexity: `g(x+1) − 2g(x) + g(x−1) ≥ −tol` at every interior `x`.
pub fn is_convex_profile<T: Scalar>(g: &CardinalityProfile<T>, tol: &T) -> Result<Verdict<T>, SetFnError> {
    if g.len() < 2 {
        return Err(SetFnError::ProfileTooShort(g.len()));
    }
    let v = &g.values;
    let mut worst: Option<(T, usize)> = None;
    for x in 1..v.len() - 1 {
        let d = v[x + 1].clone() - v[x].clone() - v[x].clone() + v[x - 1].clone();
        if worst.as_ref().is_none_or(|w| d < w.0) {
            worst = Some((d, x));
        }
    }
    Ok(match worst {
        None => Verdict::Pass { slack: None },
        Some((d, x)) if d < -tol.clone() => Verdict::Fail(Certificate {
            kind: PropertyKind::Convexity,
            witness: Witness::ProfilePoint { x },
            margin: -d,
        }),
        Some((d, _)) => Verdict::Pass { slack: Some(d) },
    })
}

/// Checks that the pointwise product of two non-negative supermodular
/// functions with a shared monotonicity direction is supermodular.
///
/// The preconditions are verified first; a failure names the offending input.
pub fn product_supermodularity_check<T: Scalar>(
    f: &SetFunctionTable<T>,
    g: &SetFunctionTable<T>,
    tol: &T,
) -> Result<Verdict<T>, SetFnError> {
    if f.universe != g.universe {
        return Err(SetError::UniverseMismatch(f.universe.size(), g.universe.size()).into());
    }
    for (name, t) in [("f", f), ("g", g)] {
        if !t.is_nonnegative(tol) {
            return Err(SetFnError::Precondition { input: name, property: "non-negative".into() });
        }
        if !is_supermodular(t, tol)?.passed() {
            return Err(SetFnError::Precondition { input: name, property: "supermodular".into() });
        }
    }
    let shared = [Direction::Nonincreasing, Direction::Nondecreasing]
        .into_iter()
        .find(|&d| {
            is_monotone(f, d, tol).map(|v| v.passed()).unwrap_or(false)
                && is_monotone(g, d, tol).map(|v| v.passed()).unwrap_or(false)
        });
    if shared.is_none() {
        return Err(SetFnError::Precondition {
            input: "f and g",
            property: "monotone in a shared direction".into(),
        });
    }
    is_supermodular(&f.product(g)?, tol)
}
