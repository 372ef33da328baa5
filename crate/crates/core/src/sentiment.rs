//! Lexicon-based sentiment scoring with negation and amplification,
//! three-way classification and per-state aggregation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TokenStream;
use crate::par::{self, Execution};
use crate::resources::{self, ResourceError};

/// Scores are clamped to this symmetric bound.
pub const SCORE_BOUND: f64 = 2.0;
/// Tokens preceding a valence hit that are searched for negators and
/// amplifiers.
pub const SHIFTER_WINDOW: usize = 2;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("valence for {term:?} must be finite and within [-2, 2], got {value}")]
    ValenceOutOfRange { term: String, value: f64 },
    #[error("amplifier {term:?} must have a multiplier > 1, got {value}")]
    BadAmplifier { term: String, value: f64 },
    #[error("{term:?} is both a valence term and a {role}")]
    Overlap { term: String, role: &'static str },
    #[error("cannot classify a NaN score")]
    NanScore,
    #[error("unknown sentiment class {0:?}")]
    UnknownClass(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
    negators: BTreeSet<String>,
    amplifiers: HashMap<String, f64>,
}

impl Lexicon {
    pub fn new(
        valences: impl IntoIterator<Item = (String, f64)>,
        negators: impl IntoIterator<Item = String>,
        amplifiers: impl IntoIterator<Item = (String, f64)>,
    ) -> Result<Self, SentimentError> {
        let valences: HashMap<String, f64> = valences.into_iter().collect();
        for (term, &value) in &valences {
            if !value.is_finite() || value.abs() > SCORE_BOUND {
                return Err(SentimentError::ValenceOutOfRange { term: term.clone(), value });
            }
        }
        let negators: BTreeSet<String> = negators.into_iter().collect();
        let amplifiers: HashMap<String, f64> = amplifiers.into_iter().collect();
        for (term, &value) in &amplifiers {
            if !(value > 1.0 && value.is_finite()) {
                return Err(SentimentError::BadAmplifier { term: term.clone(), value });
            }
            if valences.contains_key(term) {
                return Err(SentimentError::Overlap { term: term.clone(), role: "amplifier" });
            }
        }
        if let Some(term) = negators.iter().find(|t| valences.contains_key(*t)) {
            return Err(SentimentError::Overlap { term: term.clone(), role: "negator" });
        }
        Ok(Lexicon { valences, negators, amplifiers })
    }

    /// Parses `term<TAB>valence`, one-column negator and
    /// `term<TAB>multiplier` amplifier files.
    pub fn parse(lexicon: &str, negators: &str, amplifiers: &str) -> Result<Self, SentimentError> {
        Lexicon::new(
            resources::parse_numeric_pairs(lexicon, "lexicon")?,
            resources::parse_word_list(negators),
            resources::parse_numeric_pairs(amplifiers, "amplifiers")?,
        )
    }

    pub fn bundled() -> Self {
        Lexicon::parse(
            resources::bundled::LEXICON,
            resources::bundled::NEGATORS,
            resources::bundled::AMPLIFIERS,
        )
        .expect("bundled lexicon is valid")
    }

    pub fn valence(&self, term: &str) -> Option<f64> {
        self.valences.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Positive,
    Negative,
    Neutral,
}

impl SentimentClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SentimentClass::Positive => "positive",
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
        }
    }
}

impl fmt::Display for SentimentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentClass {
    type Err = SentimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(SentimentClass::Positive),
            "negative" => Ok(SentimentClass::Negative),
            "neutral" => Ok(SentimentClass::Neutral),
            _ => Err(SentimentError::UnknownClass(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentScore {
    pub value: f64,
    pub class: SentimentClass,
    pub matched_count: usize,
}

/// Scores a lowercased stream.
///
/// Each valence hit contributes `valence * amplification * sign`, where the
/// two preceding tokens supply the amplifier product and the negation sign
/// (each negator flips it, so two cancel). The sum is divided by the square
/// root of the stream length and clamped to [-2, 2].
pub fn score(stream: &TokenStream, lexicon: &Lexicon) -> SentimentScore {
    let tokens = &stream.tokens;
    let mut raw = 0.0;
    let mut matched = 0;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(valence) = lexicon.valence(&tok.normalized) else {
            continue;
        };
        matched += 1;
        let mut sign = 1.0;
        let mut amp = 1.0;
        for prev in &tokens[i.saturating_sub(SHIFTER_WINDOW)..i] {
            if lexicon.negators.contains(&prev.normalized) {
                sign = -sign;
            }
            if let Some(m) = lexicon.amplifiers.get(&prev.normalized) {
                amp *= m;
            }
        }
        raw += valence * amp * sign;
    }
    let value = (raw / (tokens.len().max(1) as f64).sqrt()).clamp(-SCORE_BOUND, SCORE_BOUND);
    SentimentScore {
        value,
        class: classify(value).expect("score is finite"),
        matched_count: matched,
    }
}

/// Sign-based classification; only an exact zero is neutral.
pub fn classify(value: f64) -> Result<SentimentClass, SentimentError> {
    if value.is_nan() {
        Err(SentimentError::NanScore)
    } else if value > 0.0 {
        Ok(SentimentClass::Positive)
    } else if value < 0.0 {
        Ok(SentimentClass::Negative)
    } else {
        Ok(SentimentClass::Neutral)
    }
}

/// Positive → 1; negative and neutral → 0.
pub fn to_binary(class: SentimentClass) -> u8 {
    u8::from(class == SentimentClass::Positive)
}

/// Scores many streams; output order equals input order.
pub fn score_all(streams: &[TokenStream], lexicon: &Lexicon, exec: Execution) -> Vec<SentimentScore> {
    par::map(exec, streams, |s| score(s, lexicon))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSentimentSummary {
    pub state: String,
    pub n_docs: usize,
    pub mean_score: f64,
    pub share_positive: f64,
    pub share_negative: f64,
    pub share_neutral: f64,
}

/// Groups `(state, score)` pairs by state; output sorted by state code.
pub fn aggregate_by_state<'a, I>(scored: I) -> Vec<StateSentimentSummary>
where
    I: IntoIterator<Item = (&'a str, &'a SentimentScore)>,
{
    #[derive(Default)]
    struct Acc {
        sum: f64,
        n: usize,
        pos: usize,
        neg: usize,
        neu: usize,
    }
    let mut groups: BTreeMap<&str, Acc> = BTreeMap::new();
    for (state, s) in scored {
        let acc = groups.entry(state).or_default();
        acc.sum += s.value;
        acc.n += 1;
        match s.class {
            SentimentClass::Positive => acc.pos += 1,
            SentimentClass::Negative => acc.neg += 1,
            SentimentClass::Neutral => acc.neu += 1,
        }
    }
    groups
        .into_iter()
        .map(|(state, a)| {
            let n = a.n as f64;
            StateSentimentSummary {
                state: state.to_string(),
                n_docs: a.n,
                mean_score: a.sum / n,
                share_positive: a.pos as f64 / n,
                share_negative: a.neg as f64 / n,
                share_neutral: a.neu as f64 / n,
            }
        })
        .collect()
}
