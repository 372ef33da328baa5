use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::resources::{self, ResourceError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub doc_id: String,
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn new(doc_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        TokenStream { doc_id: doc_id.into(), tokens }
    }

    /// Builds a stream from bare words, with surface = normalized.
    pub fn from_words<S: AsRef<str>>(doc_id: impl Into<String>, words: &[S]) -> Self {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(position, w)| Token {
                surface: w.as_ref().to_string(),
                normalized: w.as_ref().to_string(),
                position,
            })
            .collect();
        TokenStream { doc_id: doc_id.into(), tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn normalized(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.normalized.as_str()).collect()
    }

    fn map_normalized(mut self, f: impl Fn(&Token) -> String) -> Self {
        for t in &mut self.tokens {
            t.normalized = f(t);
        }
        self
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into maximal runs of letters and digits, keeping
/// apostrophes only between two word characters (`don't`, `state's`).
/// Everything else separates tokens and is discarded.
pub fn tokenize(doc_id: &str, text: &str) -> TokenStream {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if is_word_char(c) {
            current.push(c);
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.get(i + 1).copied().is_some_and(is_word_char)
        {
            current.push(c);
        } else if !current.is_empty() {
            push_token(&mut tokens, std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        push_token(&mut tokens, current);
    }
    TokenStream::new(doc_id, tokens)
}

fn push_token(tokens: &mut Vec<Token>, surface: String) {
    let position = tokens.len();
    tokens.push(Token { normalized: surface.clone(), surface, position });
}

/// Drops whitespace-delimited chunks that start with `http` (any case).
pub fn strip_urls(text: &str) -> String {
    text.split_whitespace()
        .filter(|chunk| !chunk.get(..4).is_some_and(|p| p.eq_ignore_ascii_case("http")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Sets every token's normalized form to the lowercase of its surface.
pub fn lowercase(stream: TokenStream) -> TokenStream {
    stream.map_normalized(|t| t.surface.to_lowercase())
}

/// Removes tokens whose lowercased surface is in `stoplist`. Survivors keep
/// their original positions.
pub fn remove_stopwords(mut stream: TokenStream, stoplist: &BTreeSet<String>) -> TokenStream {
    stream.tokens.retain(|t| !stoplist.contains(&t.surface.to_lowercase()));
    stream
}

/// Ordered suffix-stripping rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRules {
    rules: Vec<(String, String)>,
    min_stem_chars: usize,
}

impl StemRules {
    pub const DEFAULT_MIN_STEM: usize = 3;

    pub fn new(rules: Vec<(String, String)>) -> Self {
        StemRules { rules, min_stem_chars: Self::DEFAULT_MIN_STEM }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ResourceError> {
        Ok(StemRules::new(resources::parse_pairs(text, origin)?))
    }

    pub fn bundled() -> Self {
        Self::parse(resources::bundled::STEM_RULES, "bundled stem rules")
            .expect("bundled stem rules are valid")
    }

    /// Applies the first rule whose suffix matches and leaves a stem of at
    /// least the minimum length. Words matching no rule are returned as is.
    pub fn stem_word(&self, word: &str) -> String {
        for (suffix, replacement) in &self.rules {
            if let Some(stem) = word.strip_suffix(suffix.as_str()) {
                if stem.chars().count() >= self.min_stem_chars {
                    return format!("{stem}{replacement}");
                }
            }
        }
        word.to_string()
    }
}

pub fn stem(stream: TokenStream, rules: &StemRules) -> TokenStream {
    stream.map_normalized(|t| rules.stem_word(&t.normalized))
}

/// Flat surface → lemma dictionary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaDictionary {
    entries: HashMap<String, String>,
}

impl LemmaDictionary {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        LemmaDictionary { entries: pairs.into_iter().collect() }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ResourceError> {
        Ok(Self::from_pairs(resources::parse_pairs(text, origin)?))
    }

    pub fn bundled() -> Self {
        Self::parse(resources::bundled::LEMMAS, "bundled lemmas").expect("bundled lemmas are valid")
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.entries.get(word).map(String::as_str)
    }
}

pub fn lemmatize(stream: TokenStream, dictionary: &LemmaDictionary) -> TokenStream {
    stream.map_normalized(|t| dictionary.get(&t.normalized).unwrap_or(&t.normalized).to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Art,
    Pron,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 6] =
        [PosTag::Noun, PosTag::Verb, PosTag::Adj, PosTag::Art, PosTag::Pron, PosTag::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Art => "ART",
            PosTag::Pron => "PRON",
            PosTag::Other => "OTHER",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PosTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown POS tag {s:?}"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct TagLexicon {
    entries: HashMap<String, PosTag>,
}

impl TagLexicon {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, PosTag)>) -> Self {
        TagLexicon { entries: pairs.into_iter().collect() }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ResourceError> {
        let mut entries = HashMap::new();
        for (line, (term, tag)) in resources::parse_pairs(text, origin)?.into_iter().enumerate() {
            let tag = tag.parse().map_err(|message| ResourceError::Malformed {
                origin: origin.to_string(),
                line: line + 1,
                message,
            })?;
            entries.insert(term, tag);
        }
        Ok(TagLexicon { entries })
    }

    pub fn bundled() -> Self {
        Self::parse(resources::bundled::POS_LEXICON, "bundled POS lexicon")
            .expect("bundled POS lexicon is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosTaggedStream {
    pub doc_id: String,
    pub pairs: Vec<(Token, PosTag)>,
}

/// Context-free tagging by lexicon lookup on the normalized form.
pub fn pos_tag(stream: &TokenStream, lexicon: &TagLexicon) -> PosTaggedStream {
    let pairs = stream
        .tokens
        .iter()
        .map(|t| (t.clone(), lexicon.entries.get(&t.normalized).copied().unwrap_or(PosTag::Other)))
        .collect();
    PosTaggedStream { doc_id: stream.doc_id.clone(), pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &TokenStream) -> Vec<&str> {
        s.surfaces()
    }

    #[test]
    fn tokenize_examples() {
        let s = tokenize("d", "we have collected data from twitter");
        assert_eq!(words(&s), ["we", "have", "collected", "data", "from", "twitter"]);
        assert!(tokenize("d", "").is_empty());
        assert_eq!(words(&tokenize("d", "Reopen NOW!!")), ["Reopen", "NOW"]);
    }

    #[test]
    fn tokenize_apostrophes_and_sigils() {
        let s = tokenize("d", "'Don't' #Reopen @gov state's, rock'n'roll ''x");
        assert_eq!(words(&s), ["Don't", "Reopen", "gov", "state's", "rock'n'roll", "x"]);
        let p: Vec<usize> = s.tokens.iter().map(|t| t.position).collect();
        assert_eq!(p, [0, 1, 2, 3, 4, 5]);
        assert_eq!(words(&tokenize("d", "café über«straße 3.5")), ["café", "über", "straße", "3", "5"]);
    }

    #[test]
    fn url_stripping() {
        assert_eq!(strip_urls("open now https://t.co/x HTTP://a.b ok"), "open now ok");
        assert_eq!(strip_urls("shttp stays"), "shttp stays");
    }

    #[test]
    fn lowercase_examples() {
        let s = lowercase(TokenStream::from_words("d", &["An", "an", "COVID19"]));
        assert_eq!(s.normalized(), ["an", "an", "covid19"]);
        assert_eq!(s.surfaces(), ["An", "an", "COVID19"]);
    }

    #[test]
    fn stopword_examples() {
        let stop: BTreeSet<String> = ["we", "have"].iter().map(|s| s.to_string()).collect();
        let s = remove_stopwords(TokenStream::from_words("d", &["we", "have", "data"]), &stop);
        assert_eq!(words(&s), ["data"]);
        assert_eq!(s.tokens[0].position, 2);
        let s = remove_stopwords(TokenStream::from_words("d", &["data"]), &BTreeSet::new());
        assert_eq!(words(&s), ["data"]);
        let the: BTreeSet<String> = ["the".to_string()].into();
        assert!(remove_stopwords(TokenStream::from_words("d", &["The", "the"]), &the).is_empty());
    }

    #[test]
    fn stemming_examples() {
        let rules = StemRules::bundled();
        for w in ["computes", "computing", "computed"] {
            assert_eq!(rules.stem_word(w), "comput", "{w}");
        }
        for w in ["read", "reading", "reads"] {
            assert_eq!(rules.stem_word(w), "read", "{w}");
        }
        assert_eq!(rules.stem_word("data"), "data");
        assert_eq!(rules.stem_word("business"), "business");
        assert_eq!(rules.stem_word("bed"), "bed");
        assert_eq!(rules.stem_word("studies"), "study");
    }

    #[test]
    fn lemma_examples() {
        let dict = LemmaDictionary::bundled();
        let s = lemmatize(
            TokenStream::from_words("d", &["computes", "computing", "computed", "reads", "reading", "zxqv"]),
            &dict,
        );
        assert_eq!(s.normalized(), ["compute", "compute", "compute", "read", "read", "zxqv"]);
    }

    #[test]
    fn pos_examples() {
        let lex = TagLexicon::from_pairs([("the".into(), PosTag::Art), ("economy".into(), PosTag::Noun)]);
        let tagged = pos_tag(&TokenStream::from_words("d", &["the", "economy", "zzz"]), &lex);
        let tags: Vec<PosTag> = tagged.pairs.iter().map(|p| p.1).collect();
        assert_eq!(tags, [PosTag::Art, PosTag::Noun, PosTag::Other]);
        assert!(pos_tag(&TokenStream::default(), &lex).pairs.is_empty());
        assert!(TagLexicon::parse("x\tFOO\n", "t").is_err());
        assert_eq!("adj".parse::<PosTag>(), Ok(PosTag::Adj));
    }
}
