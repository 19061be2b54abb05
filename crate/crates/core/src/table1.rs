//! The thirteen catalogued similarities with their published verdicts, and
//! a driver that re-derives every verdict by exhaustive classification.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::scalar::{rat, Rational};
use crate::set::Universe;
use crate::similarity::{
    classify, IntersectionParams, MetricVerdict, SimilarityError, SimilarityKind, SimilaritySpec, SimilarityVerdict,
};

/// Published verdict for one row, possibly depending on `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Always(SimilarityVerdict),
    /// first verdict when `γ ≥ 1`, second when `0 < γ < 1`
    ByGamma(SimilarityVerdict, SimilarityVerdict),
}

/// Published LSHability for one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lshable {
    Yes,
    No,
    IffGammaAtLeastOne,
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogRow {
    pub name: &'static str,
    pub kind: SimilarityKind,
    pub expected: Expected,
    pub lshable: Lshable,
}

pub const CATALOG: [CatalogRow; 13] = {
    use SimilarityVerdict::*;
    const fn row(name: &'static str, kind: SimilarityKind, expected: Expected, lshable: Lshable) -> CatalogRow {
        CatalogRow { name, kind, expected, lshable }
    }
    [
        row("Jaccard", SimilarityKind::Jaccard, Expected::Always(Supermodular), Lshable::Yes),
        row("Hamming", SimilarityKind::Hamming, Expected::Always(Modular), Lshable::Yes),
        row("Anderberg", SimilarityKind::Anderberg, Expected::Always(Supermodular), Lshable::Yes),
        row("Rogers-Tanimoto", SimilarityKind::RogersTanimoto, Expected::Always(Supermodular), Lshable::Yes),
        row("Simpson", SimilarityKind::Simpson, Expected::Always(Neither), Lshable::No),
        row("Braun-Blanquet", SimilarityKind::BraunBlanquet, Expected::Always(Neither), Lshable::No),
        row("Sørensen-Dice", SimilarityKind::SorensenDice, Expected::Always(Neither), Lshable::No),
        row("Sokal-Sneath 1", SimilarityKind::SokalSneath1, Expected::Always(Submodular), Lshable::No),
        row("Forbes", SimilarityKind::Forbes, Expected::Always(Neither), Lshable::No),
        row("Sørensen_γ", SimilarityKind::SorensenGamma, Expected::ByGamma(Supermodular, Neither), Lshable::IffGammaAtLeastOne),
        row(
            "Sokal-Sneath_γ",
            SimilarityKind::SokalSneathGamma,
            Expected::ByGamma(Supermodular, Submodular),
            Lshable::IffGammaAtLeastOne,
        ),
        row("Cardinality intersection", SimilarityKind::CardinalityIntersection, Expected::Always(Neither), Lshable::Yes),
        row("Identity intersection", SimilarityKind::IdentityIntersection, Expected::Always(Supermodular), Lshable::Yes),
    ]
};

fn gamma_of(spec: &SimilaritySpec) -> Option<&Rational> {
    match spec {
        SimilaritySpec::SorensenGamma { gamma } | SimilaritySpec::SokalSneathGamma { gamma } => Some(gamma),
        _ => None,
    }
}

pub fn catalog_row(kind: SimilarityKind) -> Option<&'static CatalogRow> {
    CATALOG.iter().find(|r| r.kind == kind)
}

/// Published verdict for a concrete similarity, if it is a catalogued one.
pub fn expected_verdict(spec: &SimilaritySpec) -> Option<SimilarityVerdict> {
    let row = catalog_row(spec.kind())?;
    Some(match row.expected {
        Expected::Always(v) => v,
        Expected::ByGamma(at_least_one, below) => {
            if *gamma_of(spec)? >= Rational::one() {
                at_least_one
            } else {
                below
            }
        }
    })
}

pub fn expected_lshable(spec: &SimilaritySpec) -> Option<bool> {
    let row = catalog_row(spec.kind())?;
    Some(match row.lshable {
        Lshable::Yes => true,
        Lshable::No => false,
        Lshable::IffGammaAtLeastOne => *gamma_of(spec)? >= Rational::one(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    /// universe size for every row except the intersection encodings
    pub n: usize,
    pub gammas: Vec<Rational>,
    pub intersection: IntersectionParams,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            n: 5,
            gammas: vec![rat(1, 2), rat(2, 1)],
            intersection: IntersectionParams::new(2, 4, rat(1, 10), rat(1, 5)),
        }
    }
}

impl Table1Config {
    /// Every concrete similarity the configuration expands to, grouped by row.
    pub fn instances(&self) -> Result<Vec<(usize, SimilaritySpec, Universe)>, SimilarityError> {
        if self.gammas.is_empty() {
            return Err(SimilarityError::Parameter { name: "table1".into(), message: "no gamma values".into() });
        }
        if let Some(g) = self.gammas.iter().find(|g| **g <= Rational::zero()) {
            return Err(SimilarityError::Gamma(g.clone()));
        }
        let u = Universe::new(self.n)?;
        let mut out = Vec::new();
        for (i, row) in CATALOG.iter().enumerate() {
            let specs = match row.kind {
                SimilarityKind::SorensenGamma => {
                    self.gammas.iter().map(|g| SimilaritySpec::SorensenGamma { gamma: g.clone() }).collect()
                }
                SimilarityKind::SokalSneathGamma => {
                    self.gammas.iter().map(|g| SimilaritySpec::SokalSneathGamma { gamma: g.clone() }).collect()
                }
                SimilarityKind::CardinalityIntersection => {
                    vec![SimilaritySpec::CardinalityIntersection(self.intersection.clone())]
                }
                SimilarityKind::IdentityIntersection => {
                    vec![SimilaritySpec::IdentityIntersection(self.intersection.clone())]
                }
                kind => vec![SimilaritySpec::from_parts(kind.name(), &Default::default())?],
            };
            for spec in specs {
                spec.validate()?;
                let universe = match spec.required_universe() {
                    Some(size) => Universe::new(size)?,
                    None => u,
                };
                out.push((i, spec, universe));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Instance {
    pub similarity: String,
    pub n: usize,
    pub verdict: SimilarityVerdict,
    pub expected: SimilarityVerdict,
    pub matched: bool,
    pub metric: Option<MetricVerdict>,
    pub lshable_expected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub name: &'static str,
    pub instances: Vec<Table1Instance>,
    pub matched: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    pub n: usize,
    pub gammas: Vec<String>,
    pub intersection: String,
    pub rows: Vec<Table1Row>,
    pub matched_rows: usize,
    pub total_rows: usize,
}

impl Table1Report {
    pub fn all_matched(&self) -> bool {
        self.matched_rows == self.total_rows
    }
}

/// Classifies every configured instance in exact arithmetic.
pub fn run_table1(config: &Table1Config) -> Result<Table1Report, SimilarityError> {
    let instances = config.instances()?;
    let results = instances
        .par_iter()
        .map(|(row, spec, u)| -> Result<(usize, Table1Instance), SimilarityError> {
            let report = classify::<Rational>(spec, *u, &Rational::zero())?;
            let expected = expected_verdict(spec).expect("catalogued similarity");
            Ok((
                *row,
                Table1Instance {
                    similarity: spec.id(),
                    n: u.size(),
                    verdict: report.verdict,
                    expected,
                    matched: report.verdict == expected,
                    metric: report.metric_verdict(),
                    lshable_expected: expected_lshable(spec).expect("catalogued similarity"),
                },
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<Table1Row> =
        CATALOG.iter().map(|r| Table1Row { name: r.name, instances: Vec::new(), matched: true }).collect();
    for (i, inst) in results {
        rows[i].matched &= inst.matched;
        rows[i].instances.push(inst);
    }
    let matched_rows = rows.iter().filter(|r| r.matched).count();
    let p = &config.intersection;
    Ok(Table1Report {
        n: config.n,
        gammas: config.gammas.iter().map(|g| g.to_string()).collect(),
        intersection: format!("k={},nint={},x={},h={}", p.k, p.nint, p.x, p.h),
        total_rows: rows.len(),
        matched_rows,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_dependent_expectations() {
        let half = rat(1, 2);
        let two = rat(2, 1);
        let sg = |g: &Rational| SimilaritySpec::SorensenGamma { gamma: g.clone() };
        let ssg = |g: &Rational| SimilaritySpec::SokalSneathGamma { gamma: g.clone() };
        assert_eq!(expected_verdict(&sg(&half)), Some(SimilarityVerdict::Neither));
        assert_eq!(expected_verdict(&sg(&two)), Some(SimilarityVerdict::Supermodular));
        assert_eq!(expected_verdict(&ssg(&half)), Some(SimilarityVerdict::Submodular));
        assert_eq!(expected_lshable(&ssg(&half)), Some(false));
        assert_eq!(expected_lshable(&ssg(&rat(1, 1))), Some(true));
        assert_eq!(expected_verdict(&SimilaritySpec::SokalSneath1), Some(SimilarityVerdict::Submodular));
        assert_eq!(expected_verdict(&SimilaritySpec::Profile(crate::setfn::CardinalityProfile::new(vec![]))), None);
    }

    #[test]
    fn default_configuration_expands_to_fifteen_instances() {
        let inst = Table1Config::default().instances().unwrap();
        assert_eq!(inst.len(), 15);
        let sizes: Vec<usize> = inst.iter().map(|(_, _, u)| u.size()).collect();
        assert_eq!(sizes[inst.len() - 2], 6);
        assert_eq!(sizes[inst.len() - 1], 4);
    }

    #[test]
    fn rejects_nonpositive_gamma() {
        let cfg = Table1Config { gammas: vec![rat(0, 1)], ..Default::default() };
        assert!(matches!(cfg.instances(), Err(SimilarityError::Gamma(_))));
    }
}
