use std::path::{Path, PathBuf};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use supersim_core::constructions::{
    cshs_counterexample, cshs_from_profile, decompose_shs, pgf_transform, shs_from_supermodular,
    similarity_from_slice_function, ConstructionError, ModularSpec,
};
use supersim_core::lsh::{family_for, verify_lsh, verify_lsh_exact, CheckMode, CollisionReport, PairSelection};
use supersim_core::pgf::{Dilution, PgfSpec};
use supersim_core::report::{CertificateRecord, ClassificationRecord};
use supersim_core::setfn::{is_monotone, is_submodular, is_supermodular, CardinalityProfile, Direction};
use supersim_core::similarity::{
    classify, gamma_counterexample_matrix, split_descriptor, IntersectionParams, MetricOutcome, SimilarityTable,
    SimilarityVerdict,
};
use supersim_core::table1::{run_table1, Table1Config};
use supersim_core::{parse_rational, Rational, Scalar, SetFunctionTable, SimilaritySpec, Universe};
use thiserror::Error;

use crate::output::{opt, yes_no, Report, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn rational(name: &str, raw: &str) -> Result<Rational, CliError> {
    parse_rational(raw).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

/// Descriptor plus the parameter flags that may extend it.
#[derive(Debug, Clone, Default)]
pub struct SimFlags {
    pub sim: String,
    pub gamma: Option<String>,
    pub k: Option<String>,
    pub nint: Option<String>,
    pub x: Option<String>,
    pub h: Option<String>,
    pub pgf: Option<PathBuf>,
}

impl SimFlags {
    pub fn build(&self) -> Result<SimilaritySpec, CliError> {
        let (name, mut params) = split_descriptor(&self.sim).map_err(usage)?;
        for (key, value) in [("gamma", &self.gamma), ("k", &self.k), ("nint", &self.nint), ("x", &self.x), ("h", &self.h)] {
            if let Some(v) = value {
                if let Some(old) = params.insert(key.to_string(), v.clone()) {
                    if old != *v {
                        return Err(CliError::Usage(format!("`{key}` given twice ({old} and {v})")));
                    }
                }
            }
        }
        let spec = SimilaritySpec::from_parts(&name, &params).map_err(usage)?;
        match &self.pgf {
            Some(path) => {
                let p = PgfSpec::from_json(&read(path)?).map_err(usage)?;
                pgf_transform(p, spec).map_err(usage)
            }
            None => Ok(spec),
        }
    }
}

fn universe_for(spec: &SimilaritySpec, n: Option<usize>) -> Result<Universe, CliError> {
    Universe::new(n.or(spec.required_universe()).unwrap_or(5)).map_err(usage)
}

fn classification_table(r: &ClassificationRecord) -> Table {
    let mut fields = vec![
        ("similarity", r.similarity.clone()),
        ("n", r.n.to_string()),
        ("arithmetic", r.arithmetic.to_string()),
        ("tolerance", r.tolerance.to_string()),
        ("verdict", r.verdict.to_string()),
        ("expected", opt(r.expected_verdict)),
        ("slices supermodular", yes_no(r.slices_supermodular)),
        ("slices submodular", yes_no(r.slices_submodular)),
        ("monotone nonincreasing", yes_no(r.monotone_nonincreasing)),
        ("similarity axioms", yes_no(r.similarity_axioms)),
        ("metric", opt(r.metric)),
        ("lshable", opt(r.expected_lshable.map(yes_no))),
    ];
    if let Some((x, y)) = &r.zero_distance_pair {
        fields.push(("zero distance pair", format!("{x} {y}")));
    }
    let mut t = Table::fields(fields);
    for c in &r.certificates {
        t.push(vec![format!("certificate {}", c.property), certificate_text(c)]);
    }
    for n in &r.notes {
        t.push(vec!["note".into(), n.clone()]);
    }
    t
}

fn certificate_text(c: &CertificateRecord) -> String {
    let mut s = String::new();
    if let Some(x) = &c.center {
        s += &format!("X={x} ");
    }
    s += &format!("{} margin={}", c.witness, c.margin);
    if let Some(e) = &c.margin_exact {
        s += &format!(" ({e})");
    }
    s
}

/// Classifies in exact arithmetic unless values came from float input.
fn classify_record(spec: &SimilaritySpec, u: Universe, tol: f64) -> Result<ClassificationRecord, CliError> {
    if spec.is_float_sourced() {
        let report = classify::<f64>(spec, u, &tol).map_err(usage)?;
        Ok(ClassificationRecord::new(spec, &report, false, tol))
    } else {
        let report = classify::<Rational>(spec, u, &Rational::zero()).map_err(usage)?;
        Ok(ClassificationRecord::new(spec, &report, true, tol))
    }
}

pub fn classify_similarity(spec: &SimilaritySpec, n: Option<usize>, tol: f64) -> Result<Report, CliError> {
    let u = universe_for(spec, n)?;
    let record = classify_record(spec, u, tol)?;
    let table = classification_table(&record);
    Ok(Report::new(&record, table, true))
}

pub fn classify_table(path: &Path, tol: f64) -> Result<Report, CliError> {
    let table = SimilarityTable::from_json(&read(path)?).map_err(usage)?;
    classify_similarity(&SimilaritySpec::Table(table), None, tol)
}

#[derive(Serialize)]
struct FunctionRecord {
    n: usize,
    tolerance: f64,
    supermodular: bool,
    submodular: bool,
    modular: bool,
    nonincreasing: bool,
    nondecreasing: bool,
    certificates: Vec<CertificateRecord>,
}

/// Property tests on a single set function `{ "n", "values" }`.
pub fn classify_function(path: &Path, tol: f64) -> Result<Report, CliError> {
    let f = SetFunctionTable::from_json(&read(path)?).map_err(usage)?;
    let verdicts = [
        is_supermodular(&f, &tol).map_err(usage)?,
        is_submodular(&f, &tol).map_err(usage)?,
        is_monotone(&f, Direction::Nonincreasing, &tol).map_err(usage)?,
        is_monotone(&f, Direction::Nondecreasing, &tol).map_err(usage)?,
    ];
    let record = FunctionRecord {
        n: f.universe().size(),
        tolerance: tol,
        supermodular: verdicts[0].passed(),
        submodular: verdicts[1].passed(),
        modular: verdicts[0].passed() && verdicts[1].passed(),
        nonincreasing: verdicts[2].passed(),
        nondecreasing: verdicts[3].passed(),
        certificates: verdicts.iter().filter_map(|v| v.certificate()).map(|c| CertificateRecord::new(None, c, false)).collect(),
    };
    let mut table = Table::fields(vec![
        ("n", record.n.to_string()),
        ("tolerance", tol.to_string()),
        ("supermodular", yes_no(record.supermodular)),
        ("submodular", yes_no(record.submodular)),
        ("modular", yes_no(record.modular)),
        ("nonincreasing", yes_no(record.nonincreasing)),
        ("nondecreasing", yes_no(record.nondecreasing)),
    ]);
    for c in &record.certificates {
        table.push(vec![format!("certificate {}", c.property), certificate_text(c)]);
    }
    Ok(Report::new(&record, table, true))
}

pub struct Table1Flags {
    pub n: usize,
    pub gammas: Vec<String>,
    pub k: usize,
    pub nint: usize,
    pub x: String,
    pub h: String,
}

pub fn table1(flags: &Table1Flags) -> Result<Report, CliError> {
    let gammas = flags.gammas.iter().map(|g| rational("gammas", g)).collect::<Result<Vec<_>, _>>()?;
    let config = Table1Config {
        n: flags.n,
        gammas,
        intersection: IntersectionParams::new(flags.k, flags.nint, rational("x", &flags.x)?, rational("h", &flags.h)?),
    };
    let report = run_table1(&config).map_err(usage)?;
    let mut table = Table::new(&["name", "similarity", "n", "verdict", "expected", "metric", "lshable", "match"]);
    for row in &report.rows {
        for i in &row.instances {
            table.push(vec![
                row.name.to_string(),
                i.similarity.clone(),
                i.n.to_string(),
                i.verdict.to_string(),
                i.expected.to_string(),
                opt(i.metric),
                yes_no(i.lshable_expected),
                yes_no(i.matched),
            ]);
        }
    }
    let mut out = Report::new(&report, table, report.all_matched());
    out.preamble = format!(
        "table1: n={} gammas={} intersection={}\n",
        report.n,
        report.gammas.join(","),
        report.intersection
    );
    out.footer = format!("matched: {}/{} rows\n", report.matched_rows, report.total_rows);
    Ok(out)
}

pub struct LshFlags {
    pub n: Option<usize>,
    pub samples: u64,
    pub seed: Option<u64>,
    pub zmax: f64,
    pub exact: bool,
    pub pairs: Option<PathBuf>,
}

pub fn verify(spec: &SimilaritySpec, flags: &LshFlags) -> Result<Report, CliError> {
    let u = universe_for(spec, flags.n)?;
    let family = family_for(spec, u).map_err(usage)?;
    let pairs = match &flags.pairs {
        Some(path) => PairSelection::from_json(&read(path)?, u).map_err(usage)?,
        None => PairSelection::All,
    };
    let report = if flags.exact {
        verify_lsh_exact(&family, spec, &pairs).map_err(usage)?
    } else {
        let seed = flags.seed.ok_or_else(|| CliError::Usage("--seed is required unless --exact is given".into()))?;
        verify_lsh(&family, spec, &pairs, flags.samples, seed, flags.zmax).map_err(usage)?
    };
    Ok(collision_report(&report))
}

fn collision_report(r: &CollisionReport) -> Report {
    let mut preamble = format!("family: {}\nsimilarity: {}\nuniverse: {}\n", r.family, r.similarity, r.universe);
    let table = match r.mode {
        CheckMode::MonteCarlo => {
            preamble += &format!(
                "samples: {}  seed: {}  zmax: {}\n",
                opt(r.samples),
                opt(r.seed),
                opt(r.zmax)
            );
            let mut t = Table::new(&["X", "Y", "S", "rate", "stderr", "z", "ok"]);
            for p in &r.pairs {
                t.push(vec![
                    p.x.to_string(),
                    p.y.to_string(),
                    format!("{:.6}", p.similarity),
                    format!("{:.6}", p.collision_rate),
                    format!("{:.6}", p.stderr.unwrap_or(0.0)),
                    format!("{:.3}", p.z.unwrap_or(0.0)),
                    yes_no(p.pass),
                ]);
            }
            t
        }
        CheckMode::Exact => {
            let mut t = Table::new(&["X", "Y", "S", "collision", "ok"]);
            for p in &r.pairs {
                t.push(vec![
                    p.x.to_string(),
                    p.y.to_string(),
                    p.exact_similarity.clone().unwrap_or_default(),
                    p.exact_collision.clone().unwrap_or_default(),
                    yes_no(p.pass),
                ]);
            }
            t
        }
    };
    let mut out = Report::new(r, table, r.pass);
    out.preamble = preamble;
    out.footer = format!(
        "result: {} ({} of {} pairs failed)\n",
        if r.pass { "pass" } else { "fail" },
        r.failures,
        r.pairs.len()
    );
    out
}

#[derive(Serialize)]
struct GammaMatrixRecord {
    counterexample: &'static str,
    gamma: String,
    supermodular: bool,
    monotone_nonincreasing: bool,
    triangle_violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    triangle_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    triangle_margin_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    triangle_witness: Option<String>,
    classification: ClassificationRecord,
}

pub fn gamma_matrix(gamma: &str) -> Result<Report, CliError> {
    let g = rational("gamma", gamma)?;
    let spec = gamma_counterexample_matrix(&g).map_err(usage)?;
    let u = Universe::new(2).map_err(usage)?;
    let report = classify::<Rational>(&spec, u, &Rational::zero()).map_err(usage)?;
    let cert = report.metric.as_ref().and_then(MetricOutcome::certificate);
    let supermodular = matches!(report.verdict, SimilarityVerdict::Supermodular | SimilarityVerdict::Modular);
    let record = GammaMatrixRecord {
        counterexample: "gamma_matrix",
        gamma: g.to_string(),
        supermodular,
        monotone_nonincreasing: report.monotone,
        triangle_violated: cert.is_some(),
        triangle_margin: cert.map(|c| c.margin.to_f64()),
        triangle_margin_exact: cert.map(|c| c.margin.to_string()),
        triangle_witness: cert.map(|c| c.witness.to_string()),
        classification: ClassificationRecord::new(&spec, &report, true, 0.0),
    };
    let ok = supermodular && report.monotone && cert.is_some_and(|c| c.margin == g);
    let table = Table::fields(vec![
        ("gamma", record.gamma.clone()),
        ("verdict", report.verdict.to_string()),
        ("supermodular", yes_no(supermodular)),
        ("monotone nonincreasing", yes_no(report.monotone)),
        ("triangle violated", yes_no(record.triangle_violated)),
        ("triangle witness", opt(record.triangle_witness.clone())),
        ("triangle margin", opt(record.triangle_margin)),
        ("triangle margin exact", opt(record.triangle_margin_exact.clone())),
    ]);
    let mut out = Report::new(&record, table, ok);
    out.footer = match record.triangle_margin {
        Some(m) => format!("supermodular: {}; triangle margin: {m}\n", yes_no(supermodular)),
        None => format!("supermodular: {}; triangle inequality holds\n", yes_no(supermodular)),
    };
    Ok(out)
}

#[derive(Serialize)]
struct CshsPgfRecord {
    counterexample: &'static str,
    n: usize,
    profile: Vec<String>,
    coefficients: Vec<String>,
    cshs_valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    cshs_error: Option<String>,
    pgf: bool,
    pgf_detail: String,
}

pub fn cshs_pgf(n: usize) -> Result<Report, CliError> {
    let ce = cshs_counterexample(n).map_err(usage)?;
    let pgf_detail = match &ce.dilution {
        Dilution::Yes { alpha, .. } => format!("yes (alpha {alpha})"),
        Dilution::Negative { index } => format!("no (index {index})"),
        Dilution::MassExceedsOne { mass } => format!("no (mass {mass})"),
    };
    let record = CshsPgfRecord {
        counterexample: "cshs_pgf",
        n,
        profile: ce.profile.values.iter().map(|v| v.to_string()).collect(),
        coefficients: ce.coefficients.iter().map(|v| v.to_string()).collect(),
        cshs_valid: ce.cshs.is_ok(),
        cshs_error: ce.cshs.as_ref().err().map(|e| e.to_string()),
        pgf: ce.dilution.is_yes(),
        pgf_detail: pgf_detail.clone(),
    };
    let ok = record.cshs_valid && !record.pgf;
    let table = Table::fields(vec![
        ("n", n.to_string()),
        ("profile", record.profile.join(" ")),
        ("coefficients", record.coefficients.join(" ")),
        ("cshs", if record.cshs_valid { "valid".into() } else { opt(record.cshs_error.clone()) }),
        ("pgf", pgf_detail.clone()),
    ]);
    let mut out = Report::new(&record, table, ok);
    out.footer = format!(
        "CSHS: {}; PGF: {}\n",
        if record.cshs_valid { "valid" } else { "invalid" },
        pgf_detail
    );
    Ok(out)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileFile {
    Object { h: Vec<f64> },
    List(Vec<f64>),
}

#[derive(Serialize)]
struct ConstructRecord {
    source: &'static str,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    slice_function: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    round_trip_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Vec<f64>>,
    verification: ClassificationRecord,
    table: serde_json::Value,
}

pub struct ConstructFlags {
    pub g: Option<PathBuf>,
    pub m: Option<PathBuf>,
    pub profile: Option<PathBuf>,
    pub table_out: Option<PathBuf>,
}

fn construction_error(e: ConstructionError) -> CliError {
    match e {
        ConstructionError::DenominatorZero(_) | ConstructionError::Precondition { .. } | ConstructionError::Internal(_) => {
            CliError::Violation(e.to_string())
        }
        other => usage(other),
    }
}

pub fn construct(flags: &ConstructFlags, tol: f64) -> Result<Report, CliError> {
    let (source, spec, slice_function, round_trip_error, profile) = match (&flags.g, &flags.profile) {
        (Some(g), None) => {
            let g = SetFunctionTable::from_json(&read(g)?).map_err(usage)?;
            let m = match &flags.m {
                Some(path) => ModularSpec::from_json(&read(path)?).map_err(usage)?,
                None => ModularSpec::zero(g.universe()),
            };
            if m.universe() != g.universe() {
                return Err(CliError::Usage(format!(
                    "g has n = {} but m has {} weights",
                    g.universe().size(),
                    m.universe().size()
                )));
            }
            let f = shs_from_supermodular(&g, &m, &tol).map_err(construction_error)?;
            let (gh, mh) = decompose_shs(&f, &tol).map_err(construction_error)?;
            let again = shs_from_supermodular(&gh, &mh, &tol).map_err(construction_error)?;
            let err = f.values().iter().zip(again.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let spec = similarity_from_slice_function(&f, &tol).map_err(construction_error)?;
            ("supermodular", spec, Some(f.values().to_vec()), Some(err), None)
        }
        (None, Some(path)) => {
            let values = match serde_json::from_str::<ProfileFile>(&read(path)?).map_err(usage)? {
                ProfileFile::Object { h } | ProfileFile::List(h) => h,
            };
            let spec = cshs_from_profile(&CardinalityProfile::new(values.clone()), &tol).map_err(construction_error)?;
            ("profile", spec, None, None, Some(values))
        }
        _ => return Err(CliError::Usage("give either --g (with optional --m) or --profile".into())),
    };
    let u = universe_for(&spec, None)?;
    let table = match &spec {
        SimilaritySpec::Table(t) => t.clone(),
        other => {
            let m = other.matrix::<Rational>(u).map_err(usage)?;
            let len = u.power_set_len() as u32;
            let values = (0..len).flat_map(|a| (0..len).map(move |b| (a, b))).map(|(a, b)| m.get(a, b).clone()).collect();
            SimilarityTable::new(u, values).map_err(usage)?
        }
    };
    let table_spec = SimilaritySpec::Table(table.clone());
    let verification = classify_record(&table_spec, u, tol)?;
    let ok = matches!(verification.verdict, SimilarityVerdict::Supermodular | SimilarityVerdict::Modular)
        && verification.metric.is_none_or(|m| m != supersim_core::similarity::MetricVerdict::NotAMetric)
        && round_trip_error.is_none_or(|e| e <= tol);
    let table_json = table.to_json();
    if let Some(path) = &flags.table_out {
        std::fs::write(path, format!("{table_json}\n"))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let record = ConstructRecord {
        source,
        n: u.size(),
        slice_function,
        round_trip_error,
        profile,
        verification,
        table: serde_json::from_str(&table_json).expect("table JSON parses"),
    };
    let mut fields = vec![("source", source.to_string()), ("n", u.size().to_string())];
    if let Some(f) = &record.slice_function {
        fields.push(("slice function", f.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")));
    }
    if let Some(e) = record.round_trip_error {
        fields.push(("round trip error", e.to_string()));
    }
    if let Some(h) = &record.profile {
        fields.push(("profile", h.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")));
    }
    fields.push(("verdict", record.verification.verdict.to_string()));
    fields.push(("metric", opt(record.verification.metric)));
    fields.push(("similarity axioms", yes_no(record.verification.similarity_axioms)));
    fields.push(match &flags.table_out {
        Some(p) => ("table written to", p.display().to_string()),
        None => ("table", table_json),
    });
    Ok(Report::new(&record, Table::fields(fields), ok))
}
