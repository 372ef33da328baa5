//! Resource loading with content hashing, so every input that shaped a run
//! can be recorded in the manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sentilogit::corpus::{LemmaDictionary, Normalization, Preprocessor, StemRules};
use sentilogit::resources::{self, bundled};
use sentilogit::sentiment::Lexicon;

use crate::error::{PipelineError, Stage, StageContext};

/// Optional overrides for the bundled text resources.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourcePaths {
    pub lexicon: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub amplifiers: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub slang: Option<PathBuf>,
    pub stem_rules: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
}

/// One hashed input, as listed in the run manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    /// File path as given, or `"bundled"`.
    pub source: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hashes a file that a stage reads directly.
pub fn hash_file(role: &str, path: &Path, stage: Stage) -> Result<InputRecord, PipelineError> {
    let bytes = std::fs::read(path)
        .map_err(|e| PipelineError::io(stage, format!("cannot read {} {}: {e}", role, path.display())))?;
    Ok(InputRecord {
        role: role.to_string(),
        source: path.display().to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len(),
    })
}

fn load_text(
    role: &str,
    path: Option<&Path>,
    default: &'static str,
    stage: Stage,
    records: &mut Vec<InputRecord>,
) -> Result<String, PipelineError> {
    let (text, source) = match path {
        Some(p) => (resources::read_text(p).stage(stage)?, p.display().to_string()),
        None => (default.to_string(), "bundled".to_string()),
    };
    records.push(InputRecord {
        role: role.to_string(),
        source,
        sha256: sha256_hex(text.as_bytes()),
        bytes: text.len(),
    });
    Ok(text)
}

fn origin(path: Option<&Path>, fallback: &str) -> String {
    path.map_or_else(|| fallback.to_string(), |p| p.display().to_string())
}

/// Builds the preprocessing chain from the configured (or bundled) lists.
pub fn load_preprocessor(
    paths: &ResourcePaths,
    normalization: Normalization,
    records: &mut Vec<InputRecord>,
) -> Result<Preprocessor, PipelineError> {
    let stage = Stage::Preprocess;
    let stopwords = load_text("stopwords", paths.stopwords.as_deref(), bundled::STOPWORDS, stage, records)?;
    let slang = load_text("slang", paths.slang.as_deref(), bundled::SLANG, stage, records)?;
    let rules = load_text("stem_rules", paths.stem_rules.as_deref(), bundled::STEM_RULES, stage, records)?;
    let lemmas = load_text("lemmas", paths.lemmas.as_deref(), bundled::LEMMAS, stage, records)?;
    Ok(Preprocessor {
        stopwords: resources::parse_word_list(&stopwords),
        slang: resources::parse_word_list(&slang),
        stem_rules: StemRules::parse(&rules, &origin(paths.stem_rules.as_deref(), "bundled stem rules"))
            .stage(stage)?,
        lemmas: LemmaDictionary::parse(&lemmas, &origin(paths.lemmas.as_deref(), "bundled lemmas"))
            .stage(stage)?,
        normalization,
    })
}

pub fn load_lexicon(paths: &ResourcePaths, records: &mut Vec<InputRecord>) -> Result<Lexicon, PipelineError> {
    let stage = Stage::Score;
    let lex = load_text("lexicon", paths.lexicon.as_deref(), bundled::LEXICON, stage, records)?;
    let neg = load_text("negators", paths.negators.as_deref(), bundled::NEGATORS, stage, records)?;
    let amp = load_text("amplifiers", paths.amplifiers.as_deref(), bundled::AMPLIFIERS, stage, records)?;
    Lexicon::parse(&lex, &neg, &amp).stage(stage)
}
