//! Plain-text resource formats shared by the preprocessing and scoring
//! stages, plus the resources bundled with the crate.
//!
//! Word lists are newline-delimited; tables are `key<TAB>value`. In both,
//! blank lines and lines starting with `#` are skipped.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {message}")]
    Malformed { origin: String, line: usize, message: String },
}

pub mod bundled {
    //! Default resources compiled into the crate.
    pub const STOPWORDS: &str = include_str!("../data/stopwords.txt");
    pub const SLANG: &str = include_str!("../data/slang.txt");
    pub const STEM_RULES: &str = include_str!("../data/stem_rules.tsv");
    pub const LEMMAS: &str = include_str!("../data/lemmas.tsv");
    pub const POS_LEXICON: &str = include_str!("../data/pos_lexicon.tsv");
    pub const LEXICON: &str = include_str!("../data/lexicon.tsv");
    pub const NEGATORS: &str = include_str!("../data/negators.tsv");
    pub const AMPLIFIERS: &str = include_str!("../data/amplifiers.tsv");
}

pub fn read_text(path: &Path) -> Result<String, ResourceError> {
    fs::read_to_string(path).map_err(|source| ResourceError::Io { path: path.to_path_buf(), source })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Parses a newline-delimited word list. Entries are trimmed; case is kept.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    content_lines(text).map(|(_, l)| l.trim().to_string()).collect()
}

/// Parses a two-column TSV. `origin` labels errors.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, ResourceError> {
    content_lines(text)
        .map(|(line, l)| {
            let mut parts = l.split('\t');
            let key = parts.next().unwrap_or_default();
            let value = parts.next();
            if parts.next().is_some() {
                return Err(ResourceError::Malformed {
                    origin: origin.to_string(),
                    line,
                    message: "expected exactly two tab-separated columns".into(),
                });
            }
            let value = value.ok_or_else(|| ResourceError::Malformed {
                origin: origin.to_string(),
                line,
                message: "missing tab-separated value".into(),
            })?;
            if key.trim().is_empty() {
                return Err(ResourceError::Malformed {
                    origin: origin.to_string(),
                    line,
                    message: "empty key".into(),
                });
            }
            Ok((key.trim().to_string(), value.trim().to_string()))
        })
        .collect()
}

/// Parses a TSV whose values are real numbers.
pub fn parse_numeric_pairs(text: &str, origin: &str) -> Result<Vec<(String, f64)>, ResourceError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let mut parts = l.split('\t');
        let key = parts.next().unwrap_or_default().trim();
        let raw = parts.next().map(str::trim).unwrap_or_default();
        let value: f64 = raw.parse().map_err(|_| ResourceError::Malformed {
            origin: origin.to_string(),
            line,
            message: format!("invalid number {raw:?}"),
        })?;
        if key.is_empty() || !value.is_finite() {
            return Err(ResourceError::Malformed {
                origin: origin.to_string(),
                line,
                message: "expected `term<TAB>finite number`".into(),
            });
        }
        out.push((key.to_string(), value));
    }
    Ok(out)
}
