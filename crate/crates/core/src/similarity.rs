//! Set similarities, their slices `f_X(A) = S(X, X △ A)`, and exhaustive
//! classification of the slice family.
//!
//! Formula-based similarities are evaluated in exact rational arithmetic and
//! converted to the requested [`Scalar`] at the boundary.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pgf::{PgfError, PgfSpec};
use crate::scalar::{parse_rational, rat, rational_from_usize, Rational, Scalar};
use crate::set::{SetError, Subset, Universe};
use crate::setfn::{
    is_monotone, is_submodular, is_supermodular, CardinalityProfile, Certificate, Direction, PropertyKind,
    SetFnError, SetFunctionTable, Witness,
};

/// Largest universe for slice classification (`O(4^n n^2)`).
pub const MAX_CLASSIFY_UNIVERSE: usize = 8;
/// Largest universe for the triangle-inequality sweep (`O(8^n)`).
pub const MAX_METRIC_UNIVERSE: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimilarityError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    SetFn(#[from] SetFnError),
    #[error(transparent)]
    Pgf(#[from] PgfError),
    #[error("{name} requires a universe of size {required}, got {got}")]
    UniverseSize { name: String, required: usize, got: usize },
    #[error("universe size {size} exceeds the cap of {cap} for {operation}")]
    TooLarge { operation: &'static str, size: usize, cap: usize },
    #[error("gamma must be positive, got {0}")]
    Gamma(Rational),
    #[error("invalid intersection parameters: {0}")]
    Intersection(String),
    #[error("invalid similarity table: {0}")]
    Table(String),
    #[error("unknown similarity `{0}`")]
    Unknown(String),
    #[error("similarity `{name}`: {message}")]
    Parameter { name: String, message: String },
}

/// How an element of the intersection similarity's domain (a subset of
/// `{1..k}` plus an integer part) is written as a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// Integer part is the cardinality of the last `nint` elements.
    Cardinality,
    /// Integer part is the binary number spelled by the last `log2 nint` elements.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionParams {
    /// size of the set part `{1..k}`
    pub k: usize,
    /// number of values of the integer part
    pub nint: usize,
    /// base similarity `x`
    pub x: Rational,
    /// per-shared-element step `h`
    pub h: Rational,
}

impl IntersectionParams {
    pub fn new(k: usize, nint: usize, x: Rational, h: Rational) -> Self {
        IntersectionParams { k, nint, x, h }
    }

    pub fn validate(&self, encoding: Encoding) -> Result<(), SimilarityError> {
        let bad = |m: String| Err(SimilarityError::Intersection(m));
        if self.k == 0 || self.nint == 0 {
            return bad(format!("k and nint must be positive (k={}, nint={})", self.k, self.nint));
        }
        if self.x.is_negative() || self.h.is_negative() {
            return bad("x and h must be non-negative".into());
        }
        if self.x.clone() + rational_from_usize(self.k) * self.h.clone() > Rational::one() {
            return bad(format!("x + k h = {} exceeds 1", self.top()));
        }
        if encoding == Encoding::Identity && (self.nint < 2 || !self.nint.is_power_of_two()) {
            return bad(format!("identity encoding needs nint a power of two >= 2, got {}", self.nint));
        }
        Ok(())
    }

    /// `x + k h`, the largest off-diagonal similarity.
    pub fn top(&self) -> Rational {
        self.x.clone() + rational_from_usize(self.k) * self.h.clone()
    }

    pub fn universe_size(&self, encoding: Encoding) -> usize {
        match encoding {
            Encoding::Cardinality => self.k + self.nint,
            Encoding::Identity => self.k + self.nint.trailing_zeros() as usize,
        }
    }

    pub fn set_part_mask(&self) -> u32 {
        (1u32 << self.k) - 1
    }

    /// Identifies masks that encode the same domain element.
    pub fn canonical_key(&self, encoding: Encoding, mask: u32) -> u64 {
        match encoding {
            Encoding::Identity => mask as u64,
            Encoding::Cardinality => {
                let set = mask & self.set_part_mask();
                let i = (mask >> self.k).count_ones();
                ((i as u64) << 32) | set as u64
            }
        }
    }

    fn eval(&self, encoding: Encoding, a: u32, b: u32) -> Rational {
        if self.canonical_key(encoding, a) == self.canonical_key(encoding, b) {
            return Rational::one();
        }
        let shared = (a & b & self.set_part_mask()).count_ones() as usize;
        self.x.clone() + self.h.clone() * rational_from_usize(shared)
    }
}

/// A dense `2^n × 2^n` similarity matrix indexed by masks.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTable {
    universe: Universe,
    values: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    n: usize,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
}

impl SimilarityTable {
    /// Builds a table, requiring symmetry and a unit diagonal.
    pub fn new(universe: Universe, values: Vec<Rational>) -> Result<Self, SimilarityError> {
        let m = universe.power_set_len();
        if values.len() != m * m {
            return Err(SimilarityError::Table(format!("expected {} entries, got {}", m * m, values.len())));
        }
        for i in 0..m {
            if !values[i * m + i].is_one() {
                return Err(SimilarityError::Table(format!("S(X,X) != 1 at mask {i}")));
            }
            for j in i + 1..m {
                if values[i * m + j] != values[j * m + i] {
                    return Err(SimilarityError::Table(format!("not symmetric at masks ({i},{j})")));
                }
            }
        }
        Ok(SimilarityTable { universe, values })
    }

    pub fn from_rows(universe: Universe, rows: Vec<Vec<Rational>>) -> Result<Self, SimilarityError> {
        let m = universe.power_set_len();
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(SimilarityError::Table(format!("expected a {m}x{m} matrix")));
        }
        Self::new(universe, rows.into_iter().flatten().collect())
    }

    /// Parses `{ "n": int, "S": [[...]] }`; floats are taken at their exact
    /// binary value.
    pub fn from_json(text: &str) -> Result<Self, SimilarityError> {
        let file: TableFile = serde_json::from_str(text).map_err(|e| SimilarityError::Table(e.to_string()))?;
        let universe = Universe::new(file.n)?;
        let rows = file
            .s
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| Rational::from_float(v).ok_or_else(|| SimilarityError::Table(format!("non-finite value {v}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(universe, rows)
    }

    pub fn to_json(&self) -> String {
        let m = self.universe.power_set_len();
        let s = (0..m)
            .map(|i| (0..m).map(|j| self.values[i * m + j].to_f64()).collect())
            .collect();
        serde_json::to_string(&TableFile { n: self.universe.size(), s }).expect("table serializes")
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn get(&self, a: u32, b: u32) -> &Rational {
        &self.values[a as usize * self.universe.power_set_len() + b as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    Jaccard,
    Hamming,
    Anderberg,
    RogersTanimoto,
    Simpson,
    BraunBlanquet,
    SorensenDice,
    SokalSneath1,
    Forbes,
    SorensenGamma,
    SokalSneathGamma,
    CardinalityIntersection,
    IdentityIntersection,
    Profile,
    CustomTable,
    PgfTransform,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 16] = [
        SimilarityKind::Jaccard,
        SimilarityKind::Hamming,
        SimilarityKind::Anderberg,
        SimilarityKind::RogersTanimoto,
        SimilarityKind::Simpson,
        SimilarityKind::BraunBlanquet,
        SimilarityKind::SorensenDice,
        SimilarityKind::SokalSneath1,
        SimilarityKind::Forbes,
        SimilarityKind::SorensenGamma,
        SimilarityKind::SokalSneathGamma,
        SimilarityKind::CardinalityIntersection,
        SimilarityKind::IdentityIntersection,
        SimilarityKind::Profile,
        SimilarityKind::CustomTable,
        SimilarityKind::PgfTransform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityKind::Jaccard => "jaccard",
            SimilarityKind::Hamming => "hamming",
            SimilarityKind::Anderberg => "anderberg",
            SimilarityKind::RogersTanimoto => "rogers_tanimoto",
            SimilarityKind::Simpson => "simpson",
            SimilarityKind::BraunBlanquet => "braun_blanquet",
            SimilarityKind::SorensenDice => "sorensen_dice",
            SimilarityKind::SokalSneath1 => "sokal_sneath_1",
            SimilarityKind::Forbes => "forbes",
            SimilarityKind::SorensenGamma => "sorensen_gamma",
            SimilarityKind::SokalSneathGamma => "sokal_sneath_gamma",
            SimilarityKind::CardinalityIntersection => "cardinality_intersection",
            SimilarityKind::IdentityIntersection => "identity_intersection",
            SimilarityKind::Profile => "profile",
            SimilarityKind::CustomTable => "custom_table",
            SimilarityKind::PgfTransform => "pgf_transform",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimilaritySpec {
    Jaccard,
    Hamming,
    Anderberg,
    RogersTanimoto,
    Simpson,
    BraunBlanquet,
    SorensenDice,
    SokalSneath1,
    Forbes,
    SorensenGamma { gamma: Rational },
    SokalSneathGamma { gamma: Rational },
    CardinalityIntersection(IntersectionParams),
    IdentityIntersection(IntersectionParams),
    /// `S(X,Y) = h(|X △ Y|)`
    Profile(CardinalityProfile<Rational>),
    Table(SimilarityTable),
    /// `S'(X,Y) = α Σ p_i S(X,Y)^i` off the diagonal, 1 on it.
    PgfTransform { pgf: PgfSpec, base: Box<SimilaritySpec> },
}

/// Region counts of a pair of sets.
#[derive(Debug, Clone, Copy)]
struct PairCounts {
    inter: usize,
    sym: usize,
    outside: usize,
    size_x: usize,
    size_y: usize,
}

impl PairCounts {
    fn new(n: usize, a: u32, b: u32) -> Self {
        let inter = (a & b).count_ones() as usize;
        let sym = (a ^ b).count_ones() as usize;
        PairCounts {
            inter,
            sym,
            outside: n - inter - sym,
            size_x: a.count_ones() as usize,
            size_y: b.count_ones() as usize,
        }
    }
}

fn r(n: usize) -> Rational {
    rational_from_usize(n)
}

fn ratio_or_zero(num: Rational, den: Rational) -> Rational {
    if den.is_zero() {
        Rational::zero()
    } else {
        num / den
    }
}

impl SimilaritySpec {
    pub fn kind(&self) -> SimilarityKind {
        match self {
            SimilaritySpec::Jaccard => SimilarityKind::Jaccard,
            SimilaritySpec::Hamming => SimilarityKind::Hamming,
            SimilaritySpec::Anderberg => SimilarityKind::Anderberg,
            SimilaritySpec::RogersTanimoto => SimilarityKind::RogersTanimoto,
            SimilaritySpec::Simpson => SimilarityKind::Simpson,
            SimilaritySpec::BraunBlanquet => SimilarityKind::BraunBlanquet,
            SimilaritySpec::SorensenDice => SimilarityKind::SorensenDice,
            SimilaritySpec::SokalSneath1 => SimilarityKind::SokalSneath1,
            SimilaritySpec::Forbes => SimilarityKind::Forbes,
            SimilaritySpec::SorensenGamma { .. } => SimilarityKind::SorensenGamma,
            SimilaritySpec::SokalSneathGamma { .. } => SimilarityKind::SokalSneathGamma,
            SimilaritySpec::CardinalityIntersection(_) => SimilarityKind::CardinalityIntersection,
            SimilaritySpec::IdentityIntersection(_) => SimilarityKind::IdentityIntersection,
            SimilaritySpec::Profile(_) => SimilarityKind::Profile,
            SimilaritySpec::Table(_) => SimilarityKind::CustomTable,
            SimilaritySpec::PgfTransform { .. } => SimilarityKind::PgfTransform,
        }
    }

    /// Descriptor string, e.g. `sorensen_gamma:gamma=2`.
    pub fn id(&self) -> String {
        let name = self.kind().name();
        match self {
            SimilaritySpec::SorensenGamma { gamma } | SimilaritySpec::SokalSneathGamma { gamma } => {
                format!("{name}:gamma={gamma}")
            }
            SimilaritySpec::CardinalityIntersection(p) | SimilaritySpec::IdentityIntersection(p) => {
                format!("{name}:k={},nint={},x={},h={}", p.k, p.nint, p.x, p.h)
            }
            SimilaritySpec::Profile(h) => {
                let vs: Vec<String> = h.values.iter().map(|v| v.to_string()).collect();
                format!("{name}:h=[{}]", vs.join(","))
            }
            SimilaritySpec::Table(t) => format!("{name}:n={}", t.universe.size()),
            SimilaritySpec::PgfTransform { pgf, base } => format!("{}({})", pgf.describe(), base.id()),
            _ => name.to_string(),
        }
    }

    /// Universe size forced by the parameters, if any.
    pub fn required_universe(&self) -> Option<usize> {
        match self {
            SimilaritySpec::CardinalityIntersection(p) => Some(p.universe_size(Encoding::Cardinality)),
            SimilaritySpec::IdentityIntersection(p) => Some(p.universe_size(Encoding::Identity)),
            SimilaritySpec::Profile(h) => Some(h.universe_size()),
            SimilaritySpec::Table(t) => Some(t.universe.size()),
            SimilaritySpec::PgfTransform { base, .. } => base.required_universe(),
            _ => None,
        }
    }

    /// Whether values come from float input (custom tables), in which case
    /// verdicts need a tolerance.
    pub fn is_float_sourced(&self) -> bool {
        match self {
            SimilaritySpec::Table(_) => true,
            SimilaritySpec::PgfTransform { base, .. } => base.is_float_sourced(),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<(), SimilarityError> {
        match self {
            SimilaritySpec::SorensenGamma { gamma } | SimilaritySpec::SokalSneathGamma { gamma } => {
                if !gamma.is_positive() {
                    return Err(SimilarityError::Gamma(gamma.clone()));
                }
            }
            SimilaritySpec::CardinalityIntersection(p) => p.validate(Encoding::Cardinality)?,
            SimilaritySpec::IdentityIntersection(p) => p.validate(Encoding::Identity)?,
            SimilaritySpec::Profile(h) => {
                if h.len() < 2 {
                    return Err(SimilarityError::Parameter {
                        name: "profile".into(),
                        message: "needs at least h(0) and h(1)".into(),
                    });
                }
                if !h.values[0].is_one() {
                    return Err(SimilarityError::Parameter {
                        name: "profile".into(),
                        message: "h(0) must be 1".into(),
                    });
                }
            }
            SimilaritySpec::PgfTransform { pgf, base } => {
                pgf.validate()?;
                base.validate()?;
            }
            _ => {}
        }
        Ok(())
    }

    fn check_universe(&self, u: Universe) -> Result<(), SimilarityError> {
        match self.required_universe() {
            Some(required) if required != u.size() => Err(SimilarityError::UniverseSize {
                name: self.kind().name().to_string(),
                required,
                got: u.size(),
            }),
            _ => Ok(()),
        }
    }

    /// `S(X, Y)` evaluated exactly.
    pub fn eval_exact(&self, x: &Subset, y: &Subset) -> Result<Rational, SimilarityError> {
        if x.universe() != y.universe() {
            return Err(SetError::UniverseMismatch(x.universe().size(), y.universe().size()).into());
        }
        self.validate()?;
        self.check_universe(x.universe())?;
        Ok(self.eval_masks(x.universe().size(), x.mask(), y.mask()))
    }

    pub fn eval<T: Scalar>(&self, x: &Subset, y: &Subset) -> Result<T, SimilarityError> {
        self.eval_exact(x, y).map(|v| T::from_rational(&v))
    }

    /// Unchecked evaluation on masks; parameters must already be validated.
    pub(crate) fn eval_masks(&self, n: usize, a: u32, b: u32) -> Rational {
        if let SimilaritySpec::CardinalityIntersection(p) = self {
            return p.eval(Encoding::Cardinality, a, b);
        }
        if a == b {
            return Rational::one();
        }
        let c = PairCounts::new(n, a, b);
        let half = || rat(1, 2);
        match self {
            SimilaritySpec::Jaccard => r(c.inter) / r(c.inter + c.sym),
            SimilaritySpec::Hamming => r(c.inter + c.outside) / r(n),
            SimilaritySpec::Anderberg => r(c.inter) / r(c.inter + 2 * c.sym),
            SimilaritySpec::RogersTanimoto => r(c.inter + c.outside) / r(c.inter + c.outside + 2 * c.sym),
            SimilaritySpec::Simpson => ratio_or_zero(r(c.inter), r(c.size_x.min(c.size_y))),
            SimilaritySpec::BraunBlanquet => ratio_or_zero(r(c.inter), r(c.size_x.max(c.size_y))),
            SimilaritySpec::SorensenDice => r(c.inter) / (r(c.inter) + half() * r(c.sym)),
            SimilaritySpec::SokalSneath1 => {
                r(c.inter + c.outside) / (r(c.inter + c.outside) + half() * r(c.sym))
            }
            SimilaritySpec::Forbes => ratio_or_zero(r(n * c.inter), r(c.size_x * c.size_y)),
            SimilaritySpec::SorensenGamma { gamma } => r(c.inter) / (r(c.inter) + gamma.clone() * r(c.sym)),
            SimilaritySpec::SokalSneathGamma { gamma } => {
                r(c.inter + c.outside) / (r(c.inter + c.outside) + gamma.clone() * r(c.sym))
            }
            SimilaritySpec::CardinalityIntersection(_) => unreachable!(),
            SimilaritySpec::IdentityIntersection(p) => p.eval(Encoding::Identity, a, b),
            SimilaritySpec::Profile(h) => h.values[c.sym].clone(),
            SimilaritySpec::Table(t) => t.get(a, b).clone(),
            SimilaritySpec::PgfTransform { pgf, base } => pgf.eval(&base.eval_masks(n, a, b)),
        }
    }

    /// Full similarity matrix over `u`.
    pub fn matrix<T: Scalar>(&self, u: Universe) -> Result<SimilarityMatrix<T>, SimilarityError> {
        self.validate()?;
        self.check_universe(u)?;
        if u.size() > MAX_CLASSIFY_UNIVERSE {
            return Err(SimilarityError::TooLarge { operation: "matrix", size: u.size(), cap: MAX_CLASSIFY_UNIVERSE });
        }
        let m = u.power_set_len();
        let n = u.size();
        let values = (0..m * m)
            .into_par_iter()
            .map(|idx| T::from_rational(&self.eval_masks(n, (idx / m) as u32, (idx % m) as u32)))
            .collect();
        Ok(SimilarityMatrix { universe: u, values })
    }

    /// `f_X(A) = S(X, X △ A)`.
    pub fn slice<T: Scalar>(&self, x: &Subset) -> Result<SetFunctionTable<T>, SimilarityError> {
        self.validate()?;
        let u = x.universe();
        self.check_universe(u)?;
        let n = u.size();
        Ok(SetFunctionTable::from_fn(u, |a| {
            T::from_rational(&self.eval_masks(n, x.mask(), x.mask() ^ a.mask()))
        }))
    }

    /// Builds a similarity from a name and `key=value` parameters.
    pub fn from_parts(name: &str, params: &BTreeMap<String, String>) -> Result<Self, SimilarityError> {
        let kind = SimilarityKind::from_name(name).ok_or_else(|| SimilarityError::Unknown(name.to_string()))?;
        let get = |key: &str| -> Result<Rational, SimilarityError> {
            let raw = params.get(key).ok_or_else(|| SimilarityError::Parameter {
                name: name.to_string(),
                message: format!("missing parameter `{key}`"),
            })?;
            parse_rational(raw).map_err(|e| SimilarityError::Parameter { name: name.to_string(), message: e.to_string() })
        };
        let get_usize = |key: &str| -> Result<usize, SimilarityError> {
            let v = get(key)?;
            if !v.is_integer() || v.is_negative() {
                return Err(SimilarityError::Parameter {
                    name: name.to_string(),
                    message: format!("`{key}` must be a non-negative integer"),
                });
            }
            usize::try_from(v.to_integer()).map_err(|_| SimilarityError::Parameter {
                name: name.to_string(),
                message: format!("`{key}` is too large"),
            })
        };
        let intersection = || -> Result<IntersectionParams, SimilarityError> {
            Ok(IntersectionParams::new(get_usize("k")?, get_usize("nint")?, get("x")?, get("h")?))
        };
        let spec = match kind {
            SimilarityKind::Jaccard => SimilaritySpec::Jaccard,
            SimilarityKind::Hamming => SimilaritySpec::Hamming,
            SimilarityKind::Anderberg => SimilaritySpec::Anderberg,
            SimilarityKind::RogersTanimoto => SimilaritySpec::RogersTanimoto,
            SimilarityKind::Simpson => SimilaritySpec::Simpson,
            SimilarityKind::BraunBlanquet => SimilaritySpec::BraunBlanquet,
            SimilarityKind::SorensenDice => SimilaritySpec::SorensenDice,
            SimilarityKind::SokalSneath1 => SimilaritySpec::SokalSneath1,
            SimilarityKind::Forbes => SimilaritySpec::Forbes,
            SimilarityKind::SorensenGamma => SimilaritySpec::SorensenGamma { gamma: get("gamma")? },
            SimilarityKind::SokalSneathGamma => SimilaritySpec::SokalSneathGamma { gamma: get("gamma")? },
            SimilarityKind::CardinalityIntersection => SimilaritySpec::CardinalityIntersection(intersection()?),
            SimilarityKind::IdentityIntersection => SimilaritySpec::IdentityIntersection(intersection()?),
            SimilarityKind::Profile => {
                let raw = params.get("h").ok_or_else(|| SimilarityError::Parameter {
                    name: name.to_string(),
                    message: "missing parameter `h`".into(),
                })?;
                let values = raw
                    .split(';')
                    .map(|v| {
                        parse_rational(v)
                            .map_err(|e| SimilarityError::Parameter { name: name.to_string(), message: e.to_string() })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                SimilaritySpec::Profile(CardinalityProfile::new(values))
            }
            SimilarityKind::CustomTable | SimilarityKind::PgfTransform => {
                return Err(SimilarityError::Parameter {
                    name: name.to_string(),
                    message: "cannot be built from a descriptor".into(),
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses `name[:key=value,key=value]`. Profile values are separated by
    /// `;`, e.g. `profile:h=1;0.5;0.25`.
    pub fn parse_descriptor(descriptor: &str) -> Result<Self, SimilarityError> {
        let (name, params) = split_descriptor(descriptor)?;
        Self::from_parts(&name, &params)
    }
}

/// Splits `name:key=value,...` into its name and parameter map.
pub fn split_descriptor(descriptor: &str) -> Result<(String, BTreeMap<String, String>), SimilarityError> {
    let (name, rest) = descriptor.split_once(':').unwrap_or((descriptor, ""));
    let mut params = BTreeMap::new();
    for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| SimilarityError::Parameter {
            name: name.to_string(),
            message: format!("expected key=value, got `{item}`"),
        })?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((name.trim().to_string(), params))
}

/// Dense matrix of `S` values in a chosen scalar type.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix<T> {
    universe: Universe,
    values: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn get(&self, a: u32, b: u32) -> &T {
        &self.values[a as usize * self.universe.power_set_len() + b as usize]
    }

    pub fn slice(&self, x: u32) -> SetFunctionTable<T> {
        let u = self.universe;
        SetFunctionTable::from_fn(u, |a| self.get(x, x ^ a.mask()).clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityVerdict {
    Supermodular,
    Submodular,
    Modular,
    Neither,
}

impl fmt::Display for SimilarityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityVerdict::Supermodular => "supermodular",
            SimilarityVerdict::Submodular => "submodular",
            SimilarityVerdict::Modular => "modular",
            SimilarityVerdict::Neither => "neither",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricVerdict {
    Metric,
    Pseudometric,
    NotAMetric,
}

impl fmt::Display for MetricVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricVerdict::Metric => "metric",
            MetricVerdict::Pseudometric => "pseudometric",
            MetricVerdict::NotAMetric => "not-a-metric",
        })
    }
}

/// Result of the triangle-inequality sweep on `1 − S`.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricOutcome<T> {
    Metric,
    /// Triangle inequality holds but `d(x, y) = 0` for this distinct pair.
    Pseudometric { x: Subset, y: Subset },
    Violation(Certificate<T>),
}

impl<T> MetricOutcome<T> {
    pub fn verdict(&self) -> MetricVerdict {
        match self {
            MetricOutcome::Metric => MetricVerdict::Metric,
            MetricOutcome::Pseudometric { .. } => MetricVerdict::Pseudometric,
            MetricOutcome::Violation(_) => MetricVerdict::NotAMetric,
        }
    }

    pub fn passed(&self) -> bool {
        !matches!(self, MetricOutcome::Violation(_))
    }

    pub fn certificate(&self) -> Option<&Certificate<T>> {
        match self {
            MetricOutcome::Violation(c) => Some(c),
            _ => None,
        }
    }
}

/// Checks `1 − S(X,Z) ≤ (1 − S(X,Y)) + (1 − S(Y,Z))` over all triples.
pub fn check_metric<T: Scalar>(
    spec: &SimilaritySpec,
    u: Universe,
    tol: &T,
) -> Result<MetricOutcome<T>, SimilarityError> {
    if u.size() > MAX_METRIC_UNIVERSE {
        return Err(SimilarityError::TooLarge { operation: "check_metric", size: u.size(), cap: MAX_METRIC_UNIVERSE });
    }
    Ok(check_metric_matrix(&spec.matrix(u)?, tol))
}

pub fn check_metric_matrix<T: Scalar>(s: &SimilarityMatrix<T>, tol: &T) -> MetricOutcome<T> {
    let u = s.universe;
    let m = u.power_set_len();
    let dist: Vec<T> = s.values.iter().map(|v| T::one() - v.clone()).collect();
    let d = |a: usize, b: usize| &dist[a * m + b];

    // per-x worst violation (margin, y, z) and first zero-distance partner
    let per_x: Vec<(Option<(T, usize, usize)>, Option<usize>)> = (0..m)
        .into_par_iter()
        .map(|x| {
            let mut worst: Option<(T, usize, usize)> = None;
            for y in 0..m {
                let dxy = d(x, y).clone();
                for z in 0..m {
                    let margin = d(x, z).clone() - dxy.clone() - d(y, z).clone();
                    if worst.as_ref().is_none_or(|w| margin > w.0) {
                        worst = Some((margin, y, z));
                    }
                }
            }
            let zero = (x + 1..m).find(|&y| d(x, y).abs() <= *tol);
            (worst, zero)
        })
        .collect();

    let mut worst: Option<(T, usize, usize, usize)> = None;
    let mut zero_pair = None;
    for (x, (w, z0)) in per_x.into_iter().enumerate() {
        if let Some((margin, y, z)) = w {
            if worst.as_ref().is_none_or(|cur| margin > cur.0) {
                worst = Some((margin, x, y, z));
            }
        }
        if zero_pair.is_none() {
            zero_pair = z0.map(|y| (x, y));
        }
    }
    let sub = |mask: usize| Subset::from_mask_unchecked(u, mask as u32);
    match worst {
        Some((margin, x, y, z)) if margin > *tol => MetricOutcome::Violation(Certificate {
            kind: PropertyKind::Triangle,
            witness: Witness::Triple { x: sub(x), y: sub(y), z: sub(z) },
            margin,
        }),
        _ => match zero_pair {
            Some((x, y)) => MetricOutcome::Pseudometric { x: sub(x), y: sub(y) },
            None => MetricOutcome::Metric,
        },
    }
}

/// Symmetry, unit diagonal and range `[0, 1]`; returns the worst breach.
pub fn check_similarity_axioms<T: Scalar>(s: &SimilarityMatrix<T>, tol: &T) -> Option<Certificate<T>> {
    let u = s.universe;
    let m = u.power_set_len() as u32;
    let mut worst: Option<(T, u32, u32)> = None;
    let mut consider = |margin: T, a: u32, b: u32| {
        if margin > *tol && worst.as_ref().is_none_or(|w| margin > w.0) {
            worst = Some((margin, a, b));
        }
    };
    for a in 0..m {
        consider((s.get(a, a).clone() - T::one()).abs(), a, a);
        for b in 0..m {
            let v = s.get(a, b).clone();
            consider((v.clone() - s.get(b, a).clone()).abs(), a, b);
            consider(-v.clone(), a, b);
            consider(v - T::one(), a, b);
        }
    }
    worst.map(|(margin, a, b)| Certificate {
        kind: PropertyKind::SimilarityAxiom,
        witness: Witness::Pair {
            x: Subset::from_mask_unchecked(u, a),
            y: Subset::from_mask_unchecked(u, b),
        },
        margin,
    })
}

/// A certificate found on the slice centred at `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCertificate<T> {
    pub center: Option<Subset>,
    pub certificate: Certificate<T>,
}

#[derive(Debug, Clone)]
pub struct ClassificationReport<T> {
    pub similarity: String,
    pub universe: Universe,
    pub verdict: SimilarityVerdict,
    /// every slice supermodular
    pub slices_supermodular: bool,
    /// every slice submodular
    pub slices_submodular: bool,
    /// every slice nonincreasing
    pub monotone: bool,
    pub axioms_hold: bool,
    /// `None` above the metric cap
    pub metric: Option<MetricOutcome<T>>,
    /// one certificate per failed property, ordered as
    /// axioms, supermodularity, submodularity, monotonicity, triangle
    pub certificates: Vec<SliceCertificate<T>>,
}

impl<T: Scalar> ClassificationReport<T> {
    pub fn metric_verdict(&self) -> Option<MetricVerdict> {
        self.metric.as_ref().map(|m| m.verdict())
    }

    pub fn certificate(&self, kind: PropertyKind) -> Option<&SliceCertificate<T>> {
        self.certificates.iter().find(|c| c.certificate.kind == kind)
    }
}

struct SliceOutcome<T> {
    sup: Option<Certificate<T>>,
    sub: Option<Certificate<T>>,
    mono: Option<Certificate<T>>,
}

fn keep_worst<T: Scalar>(acc: &mut Option<(u32, Certificate<T>)>, x: u32, c: Option<Certificate<T>>) {
    if let Some(c) = c {
        if acc.as_ref().is_none_or(|(_, w)| c.margin > w.margin) {
            *acc = Some((x, c));
        }
    }
}

/// Combines the per-slice flags into a single verdict. Supermodular and
/// submodular verdicts both require every slice to be nonincreasing.
pub fn combine_verdict(supermodular: bool, submodular: bool, monotone: bool) -> SimilarityVerdict {
    match (supermodular && monotone, submodular && monotone) {
        (true, true) => SimilarityVerdict::Modular,
        (true, false) => SimilarityVerdict::Supermodular,
        (false, true) => SimilarityVerdict::Submodular,
        (false, false) => SimilarityVerdict::Neither,
    }
}

/// Classifies the slice family `{f_X : X ⊆ V}` of `spec` over `u`.
pub fn classify<T: Scalar>(
    spec: &SimilaritySpec,
    u: Universe,
    tol: &T,
) -> Result<ClassificationReport<T>, SimilarityError> {
    if u.size() > MAX_CLASSIFY_UNIVERSE {
        return Err(SimilarityError::TooLarge { operation: "classify", size: u.size(), cap: MAX_CLASSIFY_UNIVERSE });
    }
    let matrix = spec.matrix::<T>(u)?;
    classify_matrix(spec.id(), &matrix, tol)
}

pub fn classify_matrix<T: Scalar>(
    similarity: String,
    matrix: &SimilarityMatrix<T>,
    tol: &T,
) -> Result<ClassificationReport<T>, SimilarityError> {
    let u = matrix.universe;
    let axioms = check_similarity_axioms(matrix, tol);

    let outcomes: Vec<SliceOutcome<T>> = (0..u.power_set_len() as u32)
        .into_par_iter()
        .map(|x| -> Result<SliceOutcome<T>, SetFnError> {
            let f = matrix.slice(x);
            Ok(SliceOutcome {
                sup: is_supermodular(&f, tol)?.into_certificate(),
                sub: is_submodular(&f, tol)?.into_certificate(),
                mono: is_monotone(&f, Direction::Nonincreasing, tol)?.into_certificate(),
            })
        })
        .collect::<Result<_, _>>()?;

    let (mut sup, mut sub, mut mono) = (None, None, None);
    for (x, o) in outcomes.into_iter().enumerate() {
        keep_worst(&mut sup, x as u32, o.sup);
        keep_worst(&mut sub, x as u32, o.sub);
        keep_worst(&mut mono, x as u32, o.mono);
    }
    let slices_supermodular = sup.is_none();
    let slices_submodular = sub.is_none();
    let monotone = mono.is_none();

    let metric = if u.size() <= MAX_METRIC_UNIVERSE { Some(check_metric_matrix(matrix, tol)) } else { None };

    let mut certificates = Vec::new();
    if let Some(c) = axioms.clone() {
        certificates.push(SliceCertificate { center: None, certificate: c });
    }
    for (x, c) in [sup, sub, mono].into_iter().flatten() {
        certificates.push(SliceCertificate { center: Some(Subset::from_mask_unchecked(u, x)), certificate: c });
    }
    if let Some(MetricOutcome::Violation(c)) = &metric {
        certificates.push(SliceCertificate { center: None, certificate: c.clone() });
    }

    Ok(ClassificationReport {
        similarity,
        universe: u,
        verdict: combine_verdict(slices_supermodular, slices_submodular, monotone),
        slices_supermodular,
        slices_submodular,
        monotone,
        axioms_hold: axioms.is_none(),
        metric,
        certificates,
    })
}

/// The 4×4 similarity on `V = {1, 2}` that is supermodular and monotone in
/// every slice, yet `1 − S` breaks the triangle inequality by `γ`.
pub fn gamma_counterexample_matrix(gamma: &Rational) -> Result<SimilaritySpec, SimilarityError> {
    if gamma.is_negative() || *gamma > rat(1, 3) {
        return Err(SimilarityError::Parameter {
            name: "gamma_matrix".into(),
            message: format!("gamma must lie in [0, 1/3], got {gamma}"),
        });
    }
    let g = gamma.clone();
    let one = Rational::one();
    let zero = Rational::zero();
    let two_g = g.clone() * Rational::from_integer(BigInt::from(2));
    // rows and columns in mask order: {}, {1}, {2}, {1,2}
    let rows = vec![
        vec![one.clone(), g.clone(), g.clone(), g.clone()],
        vec![g.clone(), one.clone(), zero.clone(), two_g.clone()],
        vec![g.clone(), zero, one.clone(), one.clone() - g.clone()],
        vec![g.clone(), two_g, one.clone() - g, one],
    ];
    Ok(SimilaritySpec::Table(SimilarityTable::from_rows(Universe::new(2)?, rows)?))
}
