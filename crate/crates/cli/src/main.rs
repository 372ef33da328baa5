use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sentilogit::corpus::Normalization;
use sentilogit::tabulate::REGION_DUMMIES;
use sentilogit::Execution;
use sentilogit_cli::inputs::{self, ResourcePaths};
use sentilogit_cli::pipeline::{self, check_numeric, with_threads, PipelineConfig};
use sentilogit_cli::{stages, PipelineError};

const FORMATS: &str = "\
INPUT FORMATS
  corpus CSV        RFC 4180, UTF-8, header required: id,state,text (extra columns
                    ignored). Rows whose state is not a US state code or DC are
                    dropped and reported; duplicate ids are an error.
  covariates CSV    state,FHH_pct,AFS,EDU2,EDU3,AGE2,WP,OCH,PWHI,LF,POPDEN,CASES,
                    PR,MHHI,GR,region with region one of Northeast, Midwest, South,
                    West. One row per state. Percentages in [0,100], AFS and
                    POPDEN > 0, CASES, MHHI and GR >= 0.
  --lexicon         TSV term<TAB>valence, valence in [-2, 2].
  --negators        one term per line.
  --amplifiers      TSV term<TAB>multiplier, multiplier > 1.
  --stopwords/--slang
                    one term per line.
  --stem-rules      TSV suffix<TAB>replacement, tried in file order.
  --lemmas          TSV surface<TAB>lemma.
  In every list and TSV, blank lines and lines starting with '#' are skipped.
  Omitted resources fall back to the bundled defaults.

ARTIFACTS (in --out)
  preprocessed.csv  id,state,text_width,tokens,terms (space-joined)
  dtm.csv           doc_id,term,count
  scored.csv        id,state,score,class,binary,text_width
  state_summary.csv state,n_docs,mean_score,share_positive,share_negative,share_neutral
  analysis_table.csv
                    id,state,sentiment,TW,NE,MW,WEST,L_FHH,AFS,EDU2,EDU3,AGE2,WP,
                    OCH,PWHI,LF,L_POPDEN,CASES,PR,MHHI,GR
  descriptives.csv  variable,n,mean,sd,min,max
  fit_report.json   coefficients (name,coef,std_err,z,p; constant last), ll, ll0,
                    lr_chi2, df, lr_p, pseudo_r2, n_iter, converged, cov and,
                    after diagnose, pearson and classification sections
  fit_report.txt    the same as a fixed-width table
  margins.csv       variable,dydx,std_err,z,p,kind
  qq.csv            theoretical,residual
  run_manifest.json input and output SHA-256 hashes, versions, config, timings

EXIT STATUS
  0 success, 2 input or schema error, 3 estimation error (separation,
  collinearity, single-class response), 4 I/O error.";

#[derive(Parser)]
#[command(name = "sentilogit", version, about = "Sentiment scoring and binary logit analysis of geotagged texts")]
#[command(after_long_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage, then write run_manifest.json
    #[command(after_long_help = FORMATS)]
    Run(RunArgs),
    /// Tokenize and normalize the corpus
    #[command(after_long_help = FORMATS)]
    Preprocess(PreprocessArgs),
    /// Score preprocessed documents against the valence lexicon
    #[command(after_long_help = FORMATS)]
    Score(ScoreArgs),
    /// Join scores with state covariates into the analysis table
    #[command(after_long_help = FORMATS)]
    Join(JoinArgs),
    /// Fit the binary logit on the analysis table
    #[command(after_long_help = FORMATS)]
    Fit(FitArgs),
    /// Goodness of fit, classification, QQ data and marginal effects
    #[command(after_long_help = FORMATS)]
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct Common {
    /// Working directory holding stage artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Disable data parallelism
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Args)]
struct PreprocessFlags {
    /// Stop-word list
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Slang list, removed like stop words
    #[arg(long)]
    slang: Option<PathBuf>,
    /// Suffix-stripping rules
    #[arg(long)]
    stem_rules: Option<PathBuf>,
    /// Lemma dictionary
    #[arg(long)]
    lemmas: Option<PathBuf>,
    /// stem | lemma | lemma-stem
    #[arg(long, default_value = "lemma-stem", value_parser = parse_normalization)]
    normalize: Normalization,
}

#[derive(Args)]
struct LexiconFlags {
    /// Valence lexicon
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Negator list
    #[arg(long)]
    negators: Option<PathBuf>,
    /// Amplifier table
    #[arg(long)]
    amplifiers: Option<PathBuf>,
}

#[derive(Args)]
struct FitFlags {
    /// Convergence tolerance on the log-likelihood change
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Newton iteration limit
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Args)]
struct DiagnoseFlags {
    /// Classification cutoff in (0, 1)
    #[arg(long, default_value_t = 0.5)]
    cutoff: f64,
    /// Comma-separated 0/1 predictors for discrete marginal effects
    #[arg(long, value_delimiter = ',', default_values_t = REGION_DUMMIES.map(String::from))]
    discrete: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    /// Corpus CSV (id,state,text)
    #[arg(long)]
    corpus: PathBuf,
    /// State covariates CSV
    #[arg(long)]
    covariates: PathBuf,
    /// Recorded in the manifest; the pipeline itself is deterministic
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    pre: PreprocessFlags,
    #[command(flatten)]
    lex: LexiconFlags,
    #[command(flatten)]
    fit: FitFlags,
    #[command(flatten)]
    diag: DiagnoseFlags,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Corpus CSV (id,state,text)
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    pre: PreprocessFlags,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    lex: LexiconFlags,
}

#[derive(Args)]
struct JoinArgs {
    /// State covariates CSV
    #[arg(long)]
    covariates: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    diag: DiagnoseFlags,
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    s.parse()
}

fn resources(pre: Option<&PreprocessFlags>, lex: Option<&LexiconFlags>) -> ResourcePaths {
    ResourcePaths {
        lexicon: lex.and_then(|l| l.lexicon.clone()),
        negators: lex.and_then(|l| l.negators.clone()),
        amplifiers: lex.and_then(|l| l.amplifiers.clone()),
        stopwords: pre.and_then(|p| p.stopwords.clone()),
        slang: pre.and_then(|p| p.slang.clone()),
        stem_rules: pre.and_then(|p| p.stem_rules.clone()),
        lemmas: pre.and_then(|p| p.lemmas.clone()),
    }
}

fn execute(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Run(a) => {
            let config = PipelineConfig {
                resources: resources(Some(&a.pre), Some(&a.lex)),
                cutoff: a.diag.cutoff,
                tol: a.fit.tol,
                max_iter: a.fit.max_iter,
                seed: a.seed,
                normalization: a.pre.normalize,
                discrete: a.diag.discrete.clone(),
                threads: a.common.threads,
                exec: a.common.exec(),
                ..PipelineConfig::new(&a.corpus, &a.covariates, &a.common.out)
            };
            let summary = pipeline::run(&config)?;
            for d in &summary.preprocess.dropped {
                eprintln!("preprocess: dropped line {} (id {}, state {:?})", d.line, d.id, d.state);
            }
            println!("{}", std::fs::read_to_string(a.common.out.join(stages::FIT_TEXT)).unwrap_or_default());
            Ok(())
        }
        Command::Preprocess(a) => with_threads(a.common.threads, || {
            let mut records = Vec::new();
            let pre = inputs::load_preprocessor(&resources(Some(&a.pre), None), a.pre.normalize, &mut records)?;
            let summary = stages::preprocess(&a.corpus, &pre, &a.common.out, a.common.exec())?;
            for d in &summary.dropped {
                eprintln!("preprocess: dropped line {} (id {}, state {:?})", d.line, d.id, d.state);
            }
            Ok(())
        })?,
        Command::Score(a) => with_threads(a.common.threads, || {
            let lexicon = inputs::load_lexicon(&resources(None, Some(&a.lex)), &mut Vec::new())?;
            stages::score(&a.common.out, &lexicon, a.common.exec()).map(drop)
        })?,
        Command::Join(a) => stages::join(&a.common.out, &a.covariates).map(drop),
        Command::Fit(a) => with_threads(a.common.threads, || {
            check_numeric(0.5, a.fit.tol, a.fit.max_iter)?;
            let opts = sentilogit::logit::FitOptions {
                tol: a.fit.tol,
                max_iter: a.fit.max_iter,
                exec: a.common.exec(),
            };
            let report = stages::fit(&a.common.out, &opts)?;
            print!("{}", report.to_text());
            Ok(())
        })?,
        Command::Diagnose(a) => with_threads(a.common.threads, || {
            check_numeric(a.diag.cutoff, 1.0, 1)?;
            stages::diagnose(&a.common.out, a.diag.cutoff, &a.diag.discrete, a.common.exec())?;
            print!("{}", std::fs::read_to_string(a.common.out.join(stages::FIT_TEXT)).unwrap_or_default());
            Ok(())
        })?,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
