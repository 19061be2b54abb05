//! Hash families realizing LSHable similarities, PGF composition of
//! families, and exact or Monte-Carlo collision checks.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pgf::{PgfError, PgfSpec};
use crate::scalar::{rat, rational_from_usize, Rational, Scalar};
use crate::set::{SetError, Subset, Universe};
use crate::similarity::{Encoding, IntersectionParams, SimilarityError, SimilarityKind, SimilaritySpec};

/// Largest universe for exact minhash enumeration over all `n!` permutations.
pub const MAX_EXACT_MINHASH: usize = 8;
/// Largest universe for all-pairs verification.
pub const MAX_ALL_PAIRS: usize = 6;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_ZMAX: f64 = 4.0;

const DRAWS_PER_CHUNK: u64 = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LshError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Pgf(#[from] PgfError),
    #[error("{0} is not LSHable per Table 1")]
    NotLshable(String),
    #[error("no hash family is known for {0}")]
    NoFamily(String),
    #[error("exact collision is unsupported for {0}")]
    Unsupported(String),
    #[error("universe size {size} exceeds the cap of {cap} for {operation}")]
    TooLarge { operation: &'static str, size: usize, cap: usize },
    #[error("samples must be at least 1")]
    NoSamples,
    #[error("family works on a universe of size {family}, pairs use {pairs}")]
    UniverseMismatch { family: usize, pairs: usize },
    #[error("invalid pair file: {0}")]
    PairFile(String),
}

/// Opaque 128-bit hash output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashValue(pub u128);

const TAG_MIN: u128 = 1 << 120;
const TAG_MIN_EMPTY: u128 = 2 << 120;
const TAG_BIT: u128 = 3 << 120;
const TAG_CONST: u128 = 4 << 120;
const TAG_SHARED: u128 = 5 << 120;

fn digest(parts: &[u128]) -> HashValue {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let out = h.finalize();
    let mut bytes = [0u8; 16];
    bytes.copy_from_slice(&out[..16]);
    HashValue(u128::from_le_bytes(bytes))
}

/// What a "token unique to X" is keyed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Keying {
    Mask,
    /// set part plus the cardinality of the integer part
    Cardinality { k: usize },
}

impl Keying {
    fn key(self, mask: u32) -> u64 {
        match self {
            Keying::Mask => mask as u64,
            Keying::Cardinality { k } => {
                let set = mask & ((1u32 << k) - 1);
                (((mask >> k).count_ones() as u64) << 32) | set as u64
            }
        }
    }

    fn for_encoding(params: &IntersectionParams, encoding: Encoding) -> Self {
        match encoding {
            Encoding::Cardinality => Keying::Cardinality { k: params.k },
            Encoding::Identity => Keying::Mask,
        }
    }
}

/// One drawn hash function.
#[derive(Debug, Clone, PartialEq)]
pub enum HashFunction {
    /// `permutation[0]` is the first element in the order.
    MinHash { permutation: Vec<u8> },
    BitSample { element: usize },
    Constant,
    /// Distinct keys never collide.
    Unique { salt: u64, keying: KeyingTag },
    /// Shared token when `element ∈ X`, else a token unique to `X`.
    SharedElement { element: usize, salt: u64, keying: KeyingTag },
    Tuple(Vec<HashFunction>),
}

/// Public wrapper so [`HashFunction`] can be compared and printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyingTag(Keying);

impl HashFunction {
    pub fn apply(&self, x: &Subset) -> HashValue {
        self.apply_mask(x.mask())
    }

    fn apply_mask(&self, mask: u32) -> HashValue {
        match self {
            HashFunction::MinHash { permutation } => match permutation.iter().find(|&&e| mask >> (e - 1) & 1 == 1) {
                Some(&e) => HashValue(TAG_MIN | e as u128),
                None => HashValue(TAG_MIN_EMPTY),
            },
            HashFunction::BitSample { element } => HashValue(TAG_BIT | (mask >> (element - 1) & 1) as u128),
            HashFunction::Constant => HashValue(TAG_CONST),
            HashFunction::Unique { salt, keying } => digest(&[1, *salt as u128, keying.0.key(mask) as u128]),
            HashFunction::SharedElement { element, salt, keying } => {
                if mask >> (element - 1) & 1 == 1 {
                    HashValue(TAG_SHARED | *element as u128)
                } else {
                    digest(&[2, *salt as u128, keying.0.key(mask) as u128])
                }
            }
            HashFunction::Tuple(parts) => {
                let mut tokens = vec![3, parts.len() as u128];
                tokens.extend(parts.iter().map(|p| p.apply_mask(mask).0));
                digest(&tokens)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HashFamily {
    MinHash { universe: Universe },
    BitSampling { universe: Universe },
    Intersection { params: IntersectionParams, encoding: Encoding },
    PgfComposed { base: Box<HashFamily>, pgf: PgfSpec },
}

pub fn minhash_family(u: Universe) -> HashFamily {
    HashFamily::MinHash { universe: u }
}

pub fn bit_sampling_family(u: Universe) -> HashFamily {
    HashFamily::BitSampling { universe: u }
}

pub fn intersection_family(
    x: Rational,
    hstep: Rational,
    k: usize,
    nint: usize,
    encoding: Encoding,
) -> Result<HashFamily, LshError> {
    let params = IntersectionParams::new(k, nint, x, hstep);
    params.validate(encoding)?;
    Ok(HashFamily::Intersection { params, encoding })
}

pub fn pgf_compose_family(base: HashFamily, p: PgfSpec) -> Result<HashFamily, LshError> {
    p.validate()?;
    Ok(HashFamily::PgfComposed { base: Box::new(base), pgf: p })
}

impl HashFamily {
    pub fn universe(&self) -> Universe {
        match self {
            HashFamily::MinHash { universe } | HashFamily::BitSampling { universe } => *universe,
            HashFamily::Intersection { params, encoding } => {
                Universe::new(params.universe_size(*encoding)).expect("validated parameters")
            }
            HashFamily::PgfComposed { base, .. } => base.universe(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            HashFamily::MinHash { .. } => "minhash".into(),
            HashFamily::BitSampling { .. } => "bit_sampling".into(),
            HashFamily::Intersection { params, encoding } => {
                let enc = match encoding {
                    Encoding::Cardinality => "cardinality",
                    Encoding::Identity => "identity",
                };
                format!("intersection_mixture:{enc}:k={},nint={},x={},h={}", params.k, params.nint, params.x, params.h)
            }
            HashFamily::PgfComposed { base, pgf } => format!("{}({})", pgf.describe(), base.id()),
        }
    }

    /// The similarity this family's collision probability equals.
    pub fn target_similarity(&self) -> SimilaritySpec {
        match self {
            HashFamily::MinHash { .. } => SimilaritySpec::Jaccard,
            HashFamily::BitSampling { .. } => SimilaritySpec::Hamming,
            HashFamily::Intersection { params, encoding: Encoding::Cardinality } => {
                SimilaritySpec::CardinalityIntersection(params.clone())
            }
            HashFamily::Intersection { params, encoding: Encoding::Identity } => {
                SimilaritySpec::IdentityIntersection(params.clone())
            }
            HashFamily::PgfComposed { base, pgf } => {
                SimilaritySpec::PgfTransform { pgf: pgf.clone(), base: Box::new(base.target_similarity()) }
            }
        }
    }

    /// Deterministic draw: the same `(seed, index)` always gives the same
    /// function.
    pub fn draw(&self, seed: u64, index: u64) -> HashFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.sample(&mut rng)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HashFunction {
        match self {
            HashFamily::MinHash { universe } => {
                let mut permutation: Vec<u8> = (1..=universe.size() as u8).collect();
                for i in (1..permutation.len()).rev() {
                    let j = rng.random_range(0..=i);
                    permutation.swap(i, j);
                }
                HashFunction::MinHash { permutation }
            }
            HashFamily::BitSampling { universe } => {
                HashFunction::BitSample { element: rng.random_range(1..=universe.size()) }
            }
            HashFamily::Intersection { params, encoding } => {
                let keying = KeyingTag(Keying::for_encoding(params, *encoding));
                let u: f64 = rng.random();
                let salt: u64 = rng.random();
                let shared = (rational_from_usize(params.k) * params.h.clone()).to_f64();
                let constant = params.x.to_f64();
                if u < shared {
                    HashFunction::SharedElement { element: rng.random_range(1..=params.k), salt, keying }
                } else if u < shared + constant {
                    HashFunction::Constant
                } else {
                    HashFunction::Unique { salt, keying }
                }
            }
            HashFamily::PgfComposed { base, pgf } => {
                let u: f64 = rng.random();
                if u >= pgf.alpha.to_f64() {
                    return HashFunction::Unique { salt: rng.random(), keying: KeyingTag(Keying::Mask) };
                }
                match pgf.sample_degree(rng) {
                    0 => HashFunction::Constant,
                    i => HashFunction::Tuple((0..i).map(|_| base.sample(rng)).collect()),
                }
            }
        }
    }
}

impl fmt::Display for HashFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Hash family whose collision probability is `spec`, on universe `u`.
pub fn family_for(spec: &SimilaritySpec, u: Universe) -> Result<HashFamily, LshError> {
    spec.validate()?;
    let composed = |gamma: &Rational, base: HashFamily| -> Result<HashFamily, LshError> {
        if *gamma < Rational::one() {
            return Err(LshError::NotLshable(format!("{} with gamma < 1", spec.kind())));
        }
        pgf_compose_family(base, PgfSpec::for_gamma(gamma)?)
    };
    let family = match spec {
        SimilaritySpec::Jaccard => minhash_family(u),
        SimilaritySpec::Hamming => bit_sampling_family(u),
        SimilaritySpec::Anderberg => composed(&rat(2, 1), minhash_family(u))?,
        SimilaritySpec::RogersTanimoto => composed(&rat(2, 1), bit_sampling_family(u))?,
        SimilaritySpec::SorensenGamma { gamma } => composed(gamma, minhash_family(u))?,
        SimilaritySpec::SokalSneathGamma { gamma } => composed(gamma, bit_sampling_family(u))?,
        SimilaritySpec::CardinalityIntersection(p) => HashFamily::Intersection { params: p.clone(), encoding: Encoding::Cardinality },
        SimilaritySpec::IdentityIntersection(p) => HashFamily::Intersection { params: p.clone(), encoding: Encoding::Identity },
        SimilaritySpec::PgfTransform { pgf, base } => pgf_compose_family(family_for(base, u)?, pgf.clone())?,
        SimilaritySpec::Simpson
        | SimilaritySpec::BraunBlanquet
        | SimilaritySpec::SorensenDice
        | SimilaritySpec::SokalSneath1
        | SimilaritySpec::Forbes => return Err(LshError::NotLshable(spec.kind().to_string())),
        SimilaritySpec::Profile(_) | SimilaritySpec::Table(_) => return Err(LshError::NoFamily(spec.kind().to_string())),
    };
    if family.universe() != u {
        return Err(LshError::UniverseMismatch { family: family.universe().size(), pairs: u.size() });
    }
    Ok(family)
}

/// Whether a similarity kind has a family here, independent of parameters.
pub fn kind_has_family(kind: SimilarityKind) -> bool {
    !matches!(
        kind,
        SimilarityKind::Simpson
            | SimilarityKind::BraunBlanquet
            | SimilarityKind::SorensenDice
            | SimilarityKind::SokalSneath1
            | SimilarityKind::Forbes
            | SimilarityKind::Profile
            | SimilarityKind::CustomTable
    )
}

fn check_pair(fam: &HashFamily, x: &Subset, y: &Subset) -> Result<(), LshError> {
    let n = fam.universe().size();
    for s in [x, y] {
        if s.universe().size() != n {
            return Err(LshError::UniverseMismatch { family: n, pairs: s.universe().size() });
        }
    }
    Ok(())
}

/// Exact `P[h(X) = h(Y)]` by enumerating the family's outcome space.
pub fn exact_collision(fam: &HashFamily, x: &Subset, y: &Subset) -> Result<Rational, LshError> {
    check_pair(fam, x, y)?;
    exact_masks(fam, x.mask(), y.mask())
}

fn exact_masks(fam: &HashFamily, a: u32, b: u32) -> Result<Rational, LshError> {
    match fam {
        HashFamily::MinHash { universe } => {
            let n = universe.size();
            if n > MAX_EXACT_MINHASH {
                return Err(LshError::TooLarge { operation: "exact minhash", size: n, cap: MAX_EXACT_MINHASH });
            }
            let mut permutation: Vec<u8> = (1..=n as u8).collect();
            let (mut hits, mut total) = (0usize, 0usize);
            loop {
                let h = HashFunction::MinHash { permutation: permutation.clone() };
                total += 1;
                if h.apply_mask(a) == h.apply_mask(b) {
                    hits += 1;
                }
                if !next_permutation(&mut permutation) {
                    break;
                }
            }
            Ok(rat(hits as i64, total as i64))
        }
        HashFamily::BitSampling { universe } => {
            let n = universe.size();
            let hits = (1..=n)
                .filter(|&e| {
                    let h = HashFunction::BitSample { element: e };
                    h.apply_mask(a) == h.apply_mask(b)
                })
                .count();
            Ok(rat(hits as i64, n as i64))
        }
        HashFamily::Intersection { params, encoding } => {
            let keying = Keying::for_encoding(params, *encoding);
            let same_key = keying.key(a) == keying.key(b);
            let indicator = |c: bool| if c { Rational::one() } else { Rational::zero() };
            // each of the k shared-element branches has weight h
            let mut p = Rational::zero();
            for e in 1..=params.k {
                let (ia, ib) = (a >> (e - 1) & 1 == 1, b >> (e - 1) & 1 == 1);
                p += params.h.clone() * indicator((ia && ib) || (!ia && !ib && same_key));
            }
            p += params.x.clone();
            p += (Rational::one() - params.top()) * indicator(same_key);
            Ok(p)
        }
        HashFamily::PgfComposed { base, pgf } => {
            let q = exact_masks(base, a, b)?;
            let fresh = if a == b { Rational::one() - pgf.alpha.clone() } else { Rational::zero() };
            Ok(pgf.eval(&q) + fresh)
        }
    }
}

fn next_permutation(p: &mut [u8]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Which pairs to check.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSelection {
    /// Every unordered pair of distinct subsets.
    All,
    List(Vec<(Subset, Subset)>),
}

impl PairSelection {
    pub fn resolve(&self, u: Universe) -> Result<Vec<(Subset, Subset)>, LshError> {
        match self {
            PairSelection::All => {
                if u.size() > MAX_ALL_PAIRS {
                    return Err(LshError::TooLarge { operation: "all-pairs verification", size: u.size(), cap: MAX_ALL_PAIRS });
                }
                let subsets: Vec<Subset> = u.subsets().collect();
                let mut pairs = Vec::new();
                for (i, x) in subsets.iter().enumerate() {
                    for y in &subsets[i + 1..] {
                        pairs.push((*x, *y));
                    }
                }
                Ok(pairs)
            }
            PairSelection::List(pairs) => {
                for (x, y) in pairs {
                    for s in [x, y] {
                        if s.universe() != u {
                            return Err(LshError::UniverseMismatch { family: u.size(), pairs: s.universe().size() });
                        }
                    }
                }
                Ok(pairs.clone())
            }
        }
    }

    /// Parses `[{ "X": [...], "Y": [...] }, ...]`.
    pub fn from_json(text: &str, u: Universe) -> Result<Self, LshError> {
        #[derive(serde::Deserialize)]
        struct Pair {
            #[serde(rename = "X")]
            x: Vec<usize>,
            #[serde(rename = "Y")]
            y: Vec<usize>,
        }
        let raw: Vec<Pair> = serde_json::from_str(text).map_err(|e| LshError::PairFile(e.to_string()))?;
        let pairs = raw
            .into_iter()
            .map(|p| Ok((u.subset(&p.x)?, u.subset(&p.y)?)))
            .collect::<Result<Vec<_>, SetError>>()?;
        Ok(PairSelection::List(pairs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    MonteCarlo,
    Exact,
}

/// One row of a [`CollisionReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCollision {
    #[serde(rename = "X")]
    pub x: Subset,
    #[serde(rename = "Y")]
    pub y: Subset,
    pub similarity: f64,
    pub collision_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collisions: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_similarity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_collision: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionReport {
    pub family: String,
    pub similarity: String,
    pub universe: usize,
    pub mode: CheckMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zmax: Option<f64>,
    pub pairs: Vec<PairCollision>,
    pub failures: usize,
    pub pass: bool,
}

impl CollisionReport {
    pub fn max_abs_z(&self) -> Option<f64> {
        self.pairs.iter().filter_map(|p| p.z.map(f64::abs)).fold(None, |m, z| Some(m.map_or(z, |m: f64| m.max(z))))
    }

    /// Fixed-width table, one line per pair.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "family: {}\nsimilarity: {}\nuniverse: {}\n",
            self.family, self.similarity, self.universe
        );
        match self.mode {
            CheckMode::MonteCarlo => {
                out += &format!(
                    "samples: {}  seed: {}  zmax: {}\n",
                    self.samples.unwrap_or(0),
                    self.seed.unwrap_or(0),
                    self.zmax.unwrap_or(0.0)
                );
                out += &format!("{:<24} {:<24} {:>10} {:>10} {:>10} {:>8} {:>5}\n", "X", "Y", "S", "rate", "stderr", "z", "ok");
                for p in &self.pairs {
                    out += &format!(
                        "{:<24} {:<24} {:>10.6} {:>10.6} {:>10.6} {:>8.3} {:>5}\n",
                        p.x.to_string(),
                        p.y.to_string(),
                        p.similarity,
                        p.collision_rate,
                        p.stderr.unwrap_or(0.0),
                        p.z.unwrap_or(0.0),
                        if p.pass { "yes" } else { "no" }
                    );
                }
            }
            CheckMode::Exact => {
                out += &format!("{:<24} {:<24} {:>14} {:>14} {:>5}\n", "X", "Y", "S", "collision", "ok");
                for p in &self.pairs {
                    out += &format!(
                        "{:<24} {:<24} {:>14} {:>14} {:>5}\n",
                        p.x.to_string(),
                        p.y.to_string(),
                        p.exact_similarity.as_deref().unwrap_or(""),
                        p.exact_collision.as_deref().unwrap_or(""),
                        if p.pass { "yes" } else { "no" }
                    );
                }
            }
        }
        out += &format!(
            "result: {} ({} of {} pairs failed)\n",
            if self.pass { "pass" } else { "fail" },
            self.failures,
            self.pairs.len()
        );
        out
    }
}

/// Collision counts per pair over draws `0..samples`, shared across pairs.
fn count_collisions(fam: &HashFamily, pairs: &[(Subset, Subset)], samples: u64, seed: u64) -> Vec<u64> {
    let mut index: BTreeMap<u32, usize> = BTreeMap::new();
    for (x, y) in pairs {
        for m in [x.mask(), y.mask()] {
            let next = index.len();
            index.entry(m).or_insert(next);
        }
    }
    let masks: Vec<u32> = {
        let mut v = vec![0; index.len()];
        for (&m, &i) in &index {
            v[i] = m;
        }
        v
    };
    let slots: Vec<(usize, usize)> = pairs.iter().map(|(x, y)| (index[&x.mask()], index[&y.mask()])).collect();
    let chunks = samples.div_ceil(DRAWS_PER_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; pairs.len()];
            let mut values = vec![HashValue(0); masks.len()];
            for d in c * DRAWS_PER_CHUNK..((c + 1) * DRAWS_PER_CHUNK).min(samples) {
                let h = fam.draw(seed, d);
                for (v, &m) in values.iter_mut().zip(&masks) {
                    *v = h.apply_mask(m);
                }
                for (count, &(i, j)) in counts.iter_mut().zip(&slots) {
                    if values[i] == values[j] {
                        *count += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; pairs.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

fn mc_row(x: Subset, y: Subset, target: &Rational, collisions: u64, samples: u64, zmax: f64) -> PairCollision {
    let s = target.to_f64();
    let n = samples as f64;
    let p = collisions as f64 / n;
    let stderr = (p * (1.0 - p) / n).sqrt();
    let z = if stderr > 0.0 {
        (p - s) / stderr
    } else if p == s {
        0.0
    } else {
        // a degenerate estimate: scale by the spread the target implies
        let spread = (s * (1.0 - s) / n).sqrt();
        if spread > 0.0 { (p - s) / spread } else { f64::INFINITY.copysign(p - s) }
    };
    PairCollision {
        x,
        y,
        similarity: s,
        collision_rate: p,
        samples: Some(samples),
        collisions: Some(collisions),
        stderr: Some(stderr),
        z: Some(z),
        exact_similarity: None,
        exact_collision: None,
        pass: z.abs() <= zmax,
    }
}

/// Monte-Carlo collision rate of one pair against the family's own target.
pub fn empirical_collision(
    fam: &HashFamily,
    x: &Subset,
    y: &Subset,
    samples: u64,
    seed: u64,
) -> Result<PairCollision, LshError> {
    if samples == 0 {
        return Err(LshError::NoSamples);
    }
    check_pair(fam, x, y)?;
    let target = fam.target_similarity().eval_exact(x, y)?;
    let counts = count_collisions(fam, &[(*x, *y)], samples, seed);
    Ok(mc_row(*x, *y, &target, counts[0], samples, DEFAULT_ZMAX))
}

/// Monte-Carlo check of `P[h(X) = h(Y)] = S(X, Y)`; passes iff every
/// pair's `|z| ≤ zmax`.
pub fn verify_lsh(
    fam: &HashFamily,
    s: &SimilaritySpec,
    pairs: &PairSelection,
    samples: u64,
    seed: u64,
    zmax: f64,
) -> Result<CollisionReport, LshError> {
    if samples == 0 {
        return Err(LshError::NoSamples);
    }
    let u = fam.universe();
    let pairs = pairs.resolve(u)?;
    let targets = pairs.iter().map(|(x, y)| s.eval_exact(x, y)).collect::<Result<Vec<_>, _>>()?;
    let counts = count_collisions(fam, &pairs, samples, seed);
    let rows: Vec<PairCollision> = pairs
        .iter()
        .zip(&targets)
        .zip(counts)
        .map(|(((x, y), t), c)| mc_row(*x, *y, t, c, samples, zmax))
        .collect();
    let failures = rows.iter().filter(|r| !r.pass).count();
    Ok(CollisionReport {
        family: fam.id(),
        similarity: s.id(),
        universe: u.size(),
        mode: CheckMode::MonteCarlo,
        samples: Some(samples),
        seed: Some(seed),
        zmax: Some(zmax),
        pairs: rows,
        failures,
        pass: failures == 0,
    })
}

/// Exact check: every pair's collision probability equals `S` as a rational.
pub fn verify_lsh_exact(fam: &HashFamily, s: &SimilaritySpec, pairs: &PairSelection) -> Result<CollisionReport, LshError> {
    let u = fam.universe();
    let pairs = pairs.resolve(u)?;
    let rows = pairs
        .par_iter()
        .map(|(x, y)| -> Result<PairCollision, LshError> {
            let target = s.eval_exact(x, y)?;
            let p = exact_collision(fam, x, y)?;
            Ok(PairCollision {
                x: *x,
                y: *y,
                similarity: target.to_f64(),
                collision_rate: p.to_f64(),
                samples: None,
                collisions: None,
                stderr: None,
                z: None,
                pass: p == target,
                exact_similarity: Some(target.to_string()),
                exact_collision: Some(p.to_string()),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    Ok(CollisionReport {
        family: fam.id(),
        similarity: s.id(),
        universe: u.size(),
        mode: CheckMode::Exact,
        samples: None,
        seed: None,
        zmax: None,
        pairs: rows,
        failures,
        pass: failures == 0,
    })
}
