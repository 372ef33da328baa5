//! Document ingestion and text preprocessing: tokenization, normalization
//! and the count structures used for exploration (bag of words,
//! document-term matrix, n-grams, POS tags).

mod counts;
mod text;

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

pub use counts::{bag_of_words, build_dtm, ngrams, BagOfWords, DocumentTermMatrix};
pub use text::{
    lemmatize, lowercase, pos_tag, remove_stopwords, stem, strip_urls, tokenize, LemmaDictionary,
    PosTag, PosTaggedStream, StemRules, TagLexicon, Token, TokenStream,
};

use crate::par::{self, Execution};
use crate::resources::{self, ResourceError};
use crate::states::canonical_state;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus is missing required column {0:?}")]
    MissingColumn(String),
    #[error("duplicate document id {id:?} on line {line}")]
    DuplicateId { id: String, line: u64 },
    #[error("malformed corpus row on line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("n-gram size must be at least 1")]
    InvalidNgramSize,
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

/// One raw text with the state it was posted from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub state: String,
    pub text: String,
    /// Character count of `text`.
    pub text_width: usize,
}

impl Document {
    pub fn new(id: impl Into<String>, state: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Document { id: id.into(), state: state.into(), text_width: text.chars().count(), text }
    }
}

/// A row skipped during loading because its state code is not a US state
/// or DC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRow {
    pub line: u64,
    pub id: String,
    pub state: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    pub dropped: Vec<DroppedRow>,
}

pub fn load_corpus(path: &Path) -> Result<LoadedCorpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    read_corpus(file)
}

/// Reads a corpus CSV with columns `id,state,text` (extra columns ignored).
pub fn read_corpus<R: Read>(reader: R) -> Result<LoadedCorpus, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::Malformed { line: 1, message: e.to_string() })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let (id_col, state_col, text_col) = (column("id")?, column("state")?, column("text")?);

    let mut out = LoadedCorpus::default();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CorpusError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            record.get(i).ok_or_else(|| CorpusError::Malformed {
                line,
                message: format!("missing field {name:?}"),
            })
        };
        let id = field(id_col, "id")?.trim().to_string();
        let state = field(state_col, "state")?;
        let text = field(text_col, "text")?;
        if id.is_empty() {
            return Err(CorpusError::Malformed { line, message: "empty id".into() });
        }
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { id, line });
        }
        match canonical_state(state) {
            Some(code) => out.documents.push(Document::new(id, code, text)),
            None => out.dropped.push(DroppedRow { line, id, state: state.to_string() }),
        }
    }
    Ok(out)
}

/// Which normalization runs after stop-word removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    Stem,
    Lemmatize,
    /// Dictionary lemma where one exists, suffix stem otherwise.
    #[default]
    LemmaThenStem,
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stem" => Ok(Normalization::Stem),
            "lemma" | "lemmatize" => Ok(Normalization::Lemmatize),
            "lemma-stem" => Ok(Normalization::LemmaThenStem),
            other => Err(format!("unknown normalization {other:?} (stem | lemma | lemma-stem)")),
        }
    }
}

/// Output of preprocessing one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessedDocument {
    pub id: String,
    pub state: String,
    pub text_width: usize,
    /// URL-stripped, tokenized and lowercased; input to sentiment scoring.
    pub lowered: TokenStream,
    /// After stop-word/slang removal and normalization; input to counting.
    pub terms: TokenStream,
}

/// The fixed preprocessing chain: URL strip, tokenize, lowercase,
/// stop-word and slang removal, then stemming and/or lemmatization.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub stopwords: BTreeSet<String>,
    pub slang: BTreeSet<String>,
    pub stem_rules: StemRules,
    pub lemmas: LemmaDictionary,
    pub normalization: Normalization,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            stopwords: resources::parse_word_list(resources::bundled::STOPWORDS),
            slang: resources::parse_word_list(resources::bundled::SLANG),
            stem_rules: StemRules::bundled(),
            lemmas: LemmaDictionary::bundled(),
            normalization: Normalization::default(),
        }
    }
}

impl Preprocessor {
    pub fn lowered(&self, id: &str, text: &str) -> TokenStream {
        lowercase(tokenize(id, &strip_urls(text)))
    }

    pub fn normalize(&self, lowered: TokenStream) -> TokenStream {
        let filtered = remove_stopwords(remove_stopwords(lowered, &self.stopwords), &self.slang);
        match self.normalization {
            Normalization::Stem => stem(filtered, &self.stem_rules),
            Normalization::Lemmatize => lemmatize(filtered, &self.lemmas),
            Normalization::LemmaThenStem => {
                let mut s = filtered;
                for t in &mut s.tokens {
                    t.normalized = match self.lemmas.get(&t.normalized) {
                        Some(lemma) => lemma.to_string(),
                        None => self.stem_rules.stem_word(&t.normalized),
                    };
                }
                s
            }
        }
    }

    pub fn process(&self, doc: &Document) -> ProcessedDocument {
        let lowered = self.lowered(&doc.id, &doc.text);
        let terms = self.normalize(lowered.clone());
        ProcessedDocument {
            id: doc.id.clone(),
            state: doc.state.clone(),
            text_width: doc.text_width,
            lowered,
            terms,
        }
    }

    /// Processes every document; output order equals input order.
    pub fn process_all(&self, docs: &[Document], exec: Execution) -> Vec<ProcessedDocument> {
        par::map(exec, docs, |d| self.process(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_drops_unknown_states() {
        let csv = "id,state,text,extra\n1,NC,reopen now,x\n2,ZZ,hello,y\n3,tx,\"a, b\",z\n4,WY,ok,w\n";
        let c = read_corpus(csv.as_bytes()).unwrap();
        assert_eq!(c.documents.len(), 3);
        assert_eq!(c.dropped.len(), 1);
        assert_eq!(c.dropped[0].state, "ZZ");
        assert_eq!(c.dropped[0].line, 3);
        assert_eq!(c.documents[1].state, "TX");
        assert_eq!(c.documents[1].text, "a, b");
    }

    #[test]
    fn load_edge_cases() {
        assert!(read_corpus("id,state,text\n".as_bytes()).unwrap().documents.is_empty());
        let c = read_corpus("id,state,text\n1,NC,we have collected data from twitter\n".as_bytes()).unwrap();
        // 30 letters and 5 spaces.
        assert_eq!(c.documents[0].text_width, 35);
        assert!(matches!(
            read_corpus("id,text\n1,x\n".as_bytes()),
            Err(CorpusError::MissingColumn(c)) if c == "state"
        ));
        assert!(matches!(
            read_corpus("id,state,text\n1,NC,a\n1,NC,b\n".as_bytes()),
            Err(CorpusError::DuplicateId { line: 3, .. })
        ));
        let err = read_corpus("id,state,text\n1,NC,a\n2,NC\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 3, .. }), "{err:?}");
        assert!(load_corpus(Path::new("/nonexistent/corpus.csv")).is_err());
    }

    #[test]
    fn text_width_counts_characters() {
        assert_eq!(Document::new("1", "NC", "café ☕").text_width, 6);
    }

    #[test]
    fn preprocessing_chain() {
        let p = Preprocessor::default();
        let d = Document::new("1", "NC", "We are READING the #reopening plans https://t.co/abc computed!");
        let out = p.process(&d);
        assert_eq!(
            out.lowered.normalized(),
            ["we", "are", "reading", "the", "reopening", "plans", "computed"]
        );
        assert_eq!(out.terms.normalized(), ["read", "reopen", "plan", "compute"]);
        let stemmed = Preprocessor { normalization: Normalization::Stem, ..Preprocessor::default() };
        assert_eq!(stemmed.process(&d).terms.normalized(), ["read", "reopen", "plan", "comput"]);
    }
}
