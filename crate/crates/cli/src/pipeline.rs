use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use sentilogit::corpus::Normalization;
use sentilogit::logit::FitOptions;
use sentilogit::tabulate::REGION_DUMMIES;
use sentilogit::Execution;

use crate::error::{PipelineError, Stage};
use crate::inputs::{self, InputRecord, ResourcePaths};
use crate::report::Diagnostics;
use crate::stages::{self, PreprocessSummary};

pub const MANIFEST: &str = "run_manifest.json";

/// Stage artifacts written by a full run, in production order. The
/// manifest, written last, hashes each of them.
pub const ARTIFACTS: [&str; 10] = [
    stages::PREPROCESSED,
    stages::DTM,
    stages::SCORED,
    stages::STATE_SUMMARY,
    stages::ANALYSIS_TABLE,
    stages::DESCRIPTIVES,
    stages::FIT_JSON,
    stages::FIT_TEXT,
    stages::MARGINS,
    stages::QQ,
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub covariates: PathBuf,
    pub resources: ResourcePaths,
    pub out: PathBuf,
    pub cutoff: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Recorded for simulation-based checks; the pipeline itself draws no
    /// random numbers.
    pub seed: u64,
    pub normalization: Normalization,
    /// Predictors treated as 0/1 indicators in the marginal effects.
    pub discrete: Vec<String>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub exec: Execution,
}

impl PipelineConfig {
    pub fn new(corpus: impl Into<PathBuf>, covariates: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            corpus: corpus.into(),
            covariates: covariates.into(),
            resources: ResourcePaths::default(),
            out: out.into(),
            cutoff: 0.5,
            tol: 1e-10,
            max_iter: 100,
            seed: 0,
            normalization: Normalization::default(),
            discrete: REGION_DUMMIES.iter().map(|s| s.to_string()).collect(),
            threads: None,
            exec: Execution::default(),
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions { tol: self.tol, max_iter: self.max_iter, exec: self.exec }
    }

    /// Flag ranges and existence of every input, each reported against the
    /// stage that reads it.
    pub fn validate(&self) -> Result<(), PipelineError> {
        check_numeric(self.cutoff, self.tol, self.max_iter)?;
        let r = &self.resources;
        let mut files: Vec<(&Path, Stage)> =
            vec![(&self.corpus, Stage::Preprocess), (&self.covariates, Stage::Join)];
        for p in [&r.stopwords, &r.slang, &r.stem_rules, &r.lemmas].into_iter().flatten() {
            files.push((p, Stage::Preprocess));
        }
        for p in [&r.lexicon, &r.negators, &r.amplifiers].into_iter().flatten() {
            files.push((p, Stage::Score));
        }
        for (path, stage) in files {
            if !path.is_file() {
                return Err(PipelineError::io(stage, format!("input file {} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

pub fn check_numeric(cutoff: f64, tol: f64, max_iter: usize) -> Result<(), PipelineError> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(PipelineError::input(Stage::Config, format!("--cutoff must lie in (0, 1), got {cutoff}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PipelineError::input(Stage::Config, format!("--tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(PipelineError::input(Stage::Config, "--max-iter must be at least 1"));
    }
    Ok(())
}

/// Runs `f` on a dedicated pool of `threads` workers when requested.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, PipelineError> {
    match threads {
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::input(Stage::Config, e.to_string()))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    pub library_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub cutoff: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub normalization: String,
    pub discrete: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub documents: usize,
    pub dropped_rows: Vec<u64>,
}

/// Machine- and schedule-dependent facts; excluded from reproducibility
/// comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRecord {
    pub parallel: bool,
    pub threads: Option<usize>,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: ToolInfo,
    pub config: ConfigRecord,
    pub inputs: Vec<InputRecord>,
    pub corpus: CorpusRecord,
    pub outputs: Vec<OutputRecord>,
    pub runtime: RuntimeRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub preprocess: PreprocessSummary,
    pub diagnostics: Diagnostics,
    pub manifest: RunManifest,
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::Stem => "stem",
        Normalization::Lemmatize => "lemma",
        Normalization::LemmaThenStem => "lemma-stem",
    }
}

/// Every stage in order, then the manifest.
pub fn run(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    with_threads(config.threads, || run_stages(config))?
}

fn run_stages(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    let dir = config.out.as_path();
    let mut timings = BTreeMap::new();
    let mut inputs = vec![inputs::hash_file("corpus", &config.corpus, Stage::Preprocess)?];
    let mut timed = |name: &str, start: Instant| {
        timings.insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
    };

    let t = Instant::now();
    let pre = inputs::load_preprocessor(&config.resources, config.normalization, &mut inputs)?;
    let preprocess = stages::preprocess(&config.corpus, &pre, dir, config.exec)?;
    timed("preprocess", t);

    let t = Instant::now();
    let lexicon = inputs::load_lexicon(&config.resources, &mut inputs)?;
    stages::score(dir, &lexicon, config.exec)?;
    timed("score", t);

    let t = Instant::now();
    inputs.push(inputs::hash_file("covariates", &config.covariates, Stage::Join)?);
    stages::join(dir, &config.covariates)?;
    timed("join", t);

    let t = Instant::now();
    stages::fit(dir, &config.fit_options())?;
    timed("fit", t);

    let t = Instant::now();
    let diagnostics = stages::diagnose(dir, config.cutoff, &config.discrete, config.exec)?;
    timed("diagnose", t);

    let mut outputs = Vec::new();
    for name in ARTIFACTS {
        let path = dir.join(name);
        let bytes = fs::read(&path)
            .map_err(|e| PipelineError::io(Stage::Manifest, format!("cannot read {}: {e}", path.display())))?;
        outputs.push(OutputRecord { file: name.to_string(), sha256: inputs::sha256_hex(&bytes), bytes: bytes.len() });
    }
    let manifest = RunManifest {
        tool: ToolInfo {
            name: "sentilogit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            library_version: sentilogit::VERSION.into(),
        },
        config: ConfigRecord {
            cutoff: config.cutoff,
            tol: config.tol,
            max_iter: config.max_iter,
            seed: config.seed,
            normalization: normalization_name(config.normalization).into(),
            discrete: config.discrete.clone(),
        },
        inputs,
        corpus: CorpusRecord {
            documents: preprocess.documents,
            dropped_rows: preprocess.dropped.iter().map(|d| d.line).collect(),
        },
        outputs,
        runtime: RuntimeRecord { parallel: config.exec.is_parallel(), threads: config.threads, timings_ms: timings },
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(dir.join(MANIFEST), json)
        .map_err(|e| PipelineError::io(Stage::Manifest, format!("cannot write {MANIFEST}: {e}")))?;
    Ok(RunSummary { preprocess, diagnostics, manifest })
}
