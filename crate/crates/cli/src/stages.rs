//! One function per pipeline stage. Each reads the previous stage's files
//! from the working directory and writes its own artifacts there, so the
//! subcommands and the full run share exactly the same code path.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sentilogit::corpus::{build_dtm, load_corpus, DroppedRow, Preprocessor, TokenStream};
use sentilogit::diagnostics::{
    classification_summary, covariate_patterns, marginal_effects, pearson_chi2, qq_export, VariableKind,
};
use sentilogit::logit::{self, DesignMatrix, FitOptions};
use sentilogit::sentiment::{aggregate_by_state, score_all, to_binary, Lexicon, SentimentClass};
use sentilogit::tabulate::{self, descriptive_stats, AnalysisTable, ScoredDocument};
use sentilogit::Execution;

use crate::error::{PipelineError, Stage, StageContext};
use crate::report::{Diagnostics, FitReport};

pub const PREPROCESSED: &str = "preprocessed.csv";
pub const DTM: &str = "dtm.csv";
pub const SCORED: &str = "scored.csv";
pub const STATE_SUMMARY: &str = "state_summary.csv";
pub const ANALYSIS_TABLE: &str = "analysis_table.csv";
pub const DESCRIPTIVES: &str = "descriptives.csv";
pub const FIT_JSON: &str = "fit_report.json";
pub const FIT_TEXT: &str = "fit_report.txt";
pub const MARGINS: &str = "margins.csv";
pub const QQ: &str = "qq.csv";

/// One preprocessed document. Token lists are space-joined; tokens never
/// contain whitespace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedRow {
    pub id: String,
    pub state: String,
    pub text_width: usize,
    pub tokens: String,
    pub terms: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub id: String,
    pub state: String,
    pub score: f64,
    pub class: SentimentClass,
    pub binary: u8,
    pub text_width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MarginRow {
    variable: String,
    dydx: f64,
    std_err: f64,
    z: f64,
    p: f64,
    kind: VariableKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreprocessSummary {
    pub documents: usize,
    pub dropped: Vec<DroppedRow>,
}

fn artifact(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8], stage: Stage) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)
        .map_err(|e| PipelineError::io(stage, format!("cannot create {}: {e}", dir.display())))?;
    let path = artifact(dir, name);
    fs::write(&path, bytes).map_err(|e| PipelineError::io(stage, format!("cannot write {}: {e}", path.display())))
}

/// Reads an artifact produced by an earlier stage, naming it when missing.
fn read_artifact(dir: &Path, name: &str, producer: &str, stage: Stage) -> Result<Vec<u8>, PipelineError> {
    let path = artifact(dir, name);
    fs::read(&path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            PipelineError::input(
                stage,
                format!("missing {name} in {} (run `{producer}` first)", dir.display()),
            )
        } else {
            PipelineError::io(stage, format!("cannot read {}: {e}", path.display()))
        }
    })
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str], stage: Stage) -> Result<Vec<u8>, PipelineError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).stage(stage)?;
    for r in rows {
        w.serialize(r).stage(stage)?;
    }
    w.into_inner().map_err(|e| PipelineError::io(stage, e.to_string()))
}

fn from_csv<T: for<'de> Deserialize<'de>>(
    bytes: &[u8],
    name: &str,
    columns: &[&str],
    stage: Stage,
) -> Result<Vec<T>, PipelineError> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let headers = rdr.headers().stage(stage)?.clone();
    for c in columns {
        if !headers.iter().any(|h| h == *c) {
            return Err(PipelineError::input(stage, format!("{name} is missing column {c:?}")));
        }
    }
    rdr.deserialize()
        .map(|r| r.map_err(|e| PipelineError::input(stage, format!("{name}: {e}"))))
        .collect()
}

const PREPROCESSED_COLUMNS: [&str; 5] = ["id", "state", "text_width", "tokens", "terms"];
const SCORED_COLUMNS: [&str; 6] = ["id", "state", "score", "class", "binary", "text_width"];

/// Corpus → `preprocessed.csv` and `dtm.csv` (doc_id, term, count).
pub fn preprocess(
    corpus: &Path,
    pre: &Preprocessor,
    dir: &Path,
    exec: Execution,
) -> Result<PreprocessSummary, PipelineError> {
    let stage = Stage::Preprocess;
    let loaded = load_corpus(corpus).stage(stage)?;
    if loaded.documents.is_empty() {
        return Err(PipelineError::input(stage, format!("{} has no usable documents", corpus.display())));
    }
    let processed = pre.process_all(&loaded.documents, exec);
    let rows: Vec<PreprocessedRow> = processed
        .iter()
        .map(|p| PreprocessedRow {
            id: p.id.clone(),
            state: p.state.clone(),
            text_width: p.text_width,
            tokens: p.lowered.normalized().join(" "),
            terms: p.terms.normalized().join(" "),
        })
        .collect();
    write_artifact(dir, PREPROCESSED, &to_csv(&rows, &PREPROCESSED_COLUMNS, stage)?, stage)?;

    let terms: Vec<TokenStream> = processed.into_iter().map(|p| p.terms).collect();
    let dtm = build_dtm(&terms).stage(stage)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["doc_id", "term", "count"]).stage(stage)?;
    for (doc, term, count) in dtm.triplets() {
        w.write_record([doc, term, &count.to_string()]).stage(stage)?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::io(stage, e.to_string()))?;
    write_artifact(dir, DTM, &bytes, stage)?;
    Ok(PreprocessSummary { documents: rows.len(), dropped: loaded.dropped })
}

/// `preprocessed.csv` → `scored.csv` and `state_summary.csv`.
pub fn score(dir: &Path, lexicon: &Lexicon, exec: Execution) -> Result<usize, PipelineError> {
    let stage = Stage::Score;
    let bytes = read_artifact(dir, PREPROCESSED, "preprocess", stage)?;
    let docs: Vec<PreprocessedRow> = from_csv(&bytes, PREPROCESSED, &PREPROCESSED_COLUMNS, stage)?;
    let streams: Vec<TokenStream> = docs
        .iter()
        .map(|d| TokenStream::from_words(d.id.as_str(), &d.tokens.split_whitespace().collect::<Vec<_>>()))
        .collect();
    let scores = score_all(&streams, lexicon, exec);
    let rows: Vec<ScoredRow> = docs
        .iter()
        .zip(&scores)
        .map(|(d, s)| ScoredRow {
            id: d.id.clone(),
            state: d.state.clone(),
            score: s.value,
            class: s.class,
            binary: to_binary(s.class),
            text_width: d.text_width,
        })
        .collect();
    write_artifact(dir, SCORED, &to_csv(&rows, &SCORED_COLUMNS, stage)?, stage)?;

    let summary = aggregate_by_state(docs.iter().map(|d| d.state.as_str()).zip(&scores));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["state", "n_docs", "mean_score", "share_positive", "share_negative", "share_neutral"])
        .stage(stage)?;
    for s in &summary {
        w.write_record([
            s.state.clone(),
            s.n_docs.to_string(),
            s.mean_score.to_string(),
            s.share_positive.to_string(),
            s.share_negative.to_string(),
            s.share_neutral.to_string(),
        ])
        .stage(stage)?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::io(stage, e.to_string()))?;
    write_artifact(dir, STATE_SUMMARY, &bytes, stage)?;
    Ok(rows.len())
}

/// `scored.csv` + covariates → `analysis_table.csv` and `descriptives.csv`.
pub fn join(dir: &Path, covariates: &Path) -> Result<usize, PipelineError> {
    let stage = Stage::Join;
    let bytes = read_artifact(dir, SCORED, "score", stage)?;
    let scored: Vec<ScoredRow> = from_csv(&bytes, SCORED, &SCORED_COLUMNS, stage)?;
    let covars = tabulate::load_covariates(covariates).stage(stage)?;
    let docs: Vec<ScoredDocument> = scored
        .into_iter()
        .map(|s| ScoredDocument { id: s.id, state: s.state, text_width: s.text_width, sentiment: s.binary })
        .collect();
    let table = AnalysisTable::from_rows(&tabulate::join(&docs, &covars).stage(stage)?);
    let mut buf = Vec::new();
    table.write_csv(&mut buf).stage(stage)?;
    write_artifact(dir, ANALYSIS_TABLE, &buf, stage)?;
    let mut buf = Vec::new();
    descriptive_stats(&table).stage(stage)?.write_csv(&mut buf).stage(stage)?;
    write_artifact(dir, DESCRIPTIVES, &buf, stage)?;
    Ok(table.len())
}

fn load_design(dir: &Path, stage: Stage) -> Result<DesignMatrix, PipelineError> {
    let bytes = read_artifact(dir, ANALYSIS_TABLE, "join", stage)?;
    let table = AnalysisTable::read_csv(bytes.as_slice()).stage(stage)?;
    if table.is_empty() {
        return Err(PipelineError::input(stage, format!("{ANALYSIS_TABLE} has no rows")));
    }
    DesignMatrix::from_table(&table).stage(stage)
}

fn write_report(dir: &Path, report: &FitReport, stage: Stage) -> Result<(), PipelineError> {
    write_artifact(dir, FIT_JSON, report.to_json().as_bytes(), stage)?;
    write_artifact(dir, FIT_TEXT, report.to_text().as_bytes(), stage)
}

/// `analysis_table.csv` → `fit_report.json` and `fit_report.txt`.
pub fn fit(dir: &Path, opts: &FitOptions) -> Result<FitReport, PipelineError> {
    let stage = Stage::Fit;
    let data = load_design(dir, stage)?;
    let fitted = logit::fit(&data, opts).stage(stage)?;
    let report = FitReport::from_fit(&fitted);
    write_report(dir, &report, stage)?;
    Ok(report)
}

/// Variable kinds for every predictor: the names in `discrete` are 0/1
/// indicators, everything else is continuous.
pub fn variable_kinds(
    names: &[String],
    discrete: &[String],
) -> Result<BTreeMap<String, VariableKind>, PipelineError> {
    let declared: BTreeSet<&str> = discrete.iter().map(String::as_str).collect();
    if let Some(unknown) = declared.iter().find(|d| !names.iter().any(|n| n == *d)) {
        return Err(PipelineError::input(
            Stage::Diagnose,
            format!("discrete variable {unknown:?} is not a column of {ANALYSIS_TABLE}"),
        ));
    }
    Ok(names
        .iter()
        .skip(1)
        .map(|n| {
            let kind =
                if declared.contains(n.as_str()) { VariableKind::Discrete } else { VariableKind::Continuous };
            (n.clone(), kind)
        })
        .collect())
}

/// Table + fit report → `margins.csv`, `qq.csv`, and the fit report
/// rewritten with the goodness-of-fit and classification sections.
pub fn diagnose(
    dir: &Path,
    cutoff: f64,
    discrete: &[String],
    exec: Execution,
) -> Result<Diagnostics, PipelineError> {
    let stage = Stage::Diagnose;
    let data = load_design(dir, stage)?;
    let bytes = read_artifact(dir, FIT_JSON, "fit", stage)?;
    let mut report: FitReport = serde_json::from_slice(&bytes)
        .map_err(|e| PipelineError::input(stage, format!("{FIT_JSON}: {e}")))?;
    let fitted = report.to_fit(data.names()).map_err(|e| PipelineError::input(stage, e))?;

    let patterns = covariate_patterns(&data);
    let pearson = pearson_chi2(&fitted, &data, &patterns).stage(stage)?;
    let classification = classification_summary(&fitted, &data, cutoff).stage(stage)?;
    let qq = qq_export(&fitted, &data, &patterns).stage(stage)?;
    let kinds = variable_kinds(data.names(), discrete)?;
    let margins = marginal_effects(&fitted, &data, &kinds, exec).stage(stage)?;

    let rows: Vec<MarginRow> = margins
        .into_iter()
        .map(|m| MarginRow { variable: m.variable, dydx: m.dydx, std_err: m.std_err, z: m.z, p: m.p, kind: m.kind })
        .collect();
    write_artifact(dir, MARGINS, &to_csv(&rows, &["variable", "dydx", "std_err", "z", "p", "kind"], stage)?, stage)?;
    write_artifact(dir, QQ, &to_csv(&qq, &["theoretical", "residual"], stage)?, stage)?;

    let diagnostics = Diagnostics { pearson, classification };
    report.diagnostics = Some(diagnostics.clone());
    write_report(dir, &report, stage)?;
    Ok(diagnostics)
}
