//! Serializable views of classification results.

use num_traits::One;
use serde::Serialize;

use crate::scalar::{Rational, Scalar};
use crate::set::Subset;
use crate::setfn::{Certificate, PropertyKind, Witness};
use crate::similarity::{ClassificationReport, MetricOutcome, MetricVerdict, SimilaritySpec, SimilarityVerdict};
use crate::table1::{expected_lshable, expected_verdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub property: PropertyKind,
    /// slice centre `X` for slice properties
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Subset>,
    pub witness: Witness,
    pub margin: f64,
    /// exact margin when computed in rational arithmetic
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_exact: Option<String>,
}

impl CertificateRecord {
    pub fn new<T: Scalar>(center: Option<Subset>, c: &Certificate<T>, exact: bool) -> Self {
        CertificateRecord {
            property: c.kind,
            center,
            witness: c.witness.clone(),
            margin: c.margin.to_f64(),
            margin_exact: exact.then(|| c.margin.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationRecord {
    pub similarity: String,
    pub n: usize,
    pub arithmetic: &'static str,
    pub tolerance: f64,
    pub verdict: SimilarityVerdict,
    pub slices_supermodular: bool,
    pub slices_submodular: bool,
    pub monotone_nonincreasing: bool,
    pub similarity_axioms: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_distance_pair: Option<(Subset, Subset)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<SimilarityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_lshable: Option<bool>,
    pub certificates: Vec<CertificateRecord>,
    pub notes: Vec<String>,
}

impl ClassificationRecord {
    pub fn new<T: Scalar>(spec: &SimilaritySpec, report: &ClassificationReport<T>, exact: bool, tolerance: f64) -> Self {
        let mut notes = Vec::new();
        if !report.axioms_hold {
            notes.push("values break symmetry, unit diagonal or the [0, 1] range".to_string());
        }
        if report.metric.is_none() {
            notes.push("triangle check skipped above the size cap".to_string());
        }
        if let SimilaritySpec::PgfTransform { pgf, .. } = spec {
            if pgf.alpha < Rational::one() {
                notes.push("diluted transform: the diagonal is fixed at 1 by convention".to_string());
            }
        }
        let zero_distance_pair = match &report.metric {
            Some(MetricOutcome::Pseudometric { x, y }) => Some((*x, *y)),
            _ => None,
        };
        ClassificationRecord {
            similarity: report.similarity.clone(),
            n: report.universe.size(),
            arithmetic: if exact { "exact" } else { "float" },
            tolerance: if exact { 0.0 } else { tolerance },
            verdict: report.verdict,
            slices_supermodular: report.slices_supermodular,
            slices_submodular: report.slices_submodular,
            monotone_nonincreasing: report.monotone,
            similarity_axioms: report.axioms_hold,
            metric: report.metric_verdict(),
            zero_distance_pair,
            expected_verdict: expected_verdict(spec),
            expected_lshable: expected_lshable(spec),
            certificates: report
                .certificates
                .iter()
                .map(|c| CertificateRecord::new(c.center, &c.certificate, exact))
                .collect(),
            notes,
        }
    }
}
