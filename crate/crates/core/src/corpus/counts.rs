use std::collections::{BTreeMap, HashMap};

use super::text::TokenStream;
use super::CorpusError;

/// Term multiset over normalized tokens, in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BagOfWords {
    entries: Vec<(String, usize)>,
    index: HashMap<String, usize>,
}

impl BagOfWords {
    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| self.entries[i].1)
    }

    /// Number of distinct terms.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.entries.iter().map(|(t, c)| (t.as_str(), *c))
    }

    /// Count vector in first-occurrence order.
    pub fn counts(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn to_sorted_map(&self) -> BTreeMap<String, usize> {
        self.entries.iter().cloned().collect()
    }

    fn add(&mut self, term: &str, by: usize) {
        match self.index.get(term) {
            Some(&i) => self.entries[i].1 += by,
            None => {
                self.index.insert(term.to_string(), self.entries.len());
                self.entries.push((term.to_string(), by));
            }
        }
    }

    /// Merges `other` into `self`, keeping first-occurrence order.
    pub fn merge(&mut self, other: &BagOfWords) {
        for (t, c) in other.iter() {
            self.add(t, c);
        }
    }
}

pub fn bag_of_words(stream: &TokenStream) -> BagOfWords {
    let mut bow = BagOfWords::default();
    for t in &stream.tokens {
        bow.add(&t.normalized, 1);
    }
    bow
}

/// Sparse document-term counts in compressed-row form. Terms are sorted
/// lexicographically; only positive counts are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTermMatrix {
    pub doc_ids: Vec<String>,
    pub terms: Vec<String>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<usize>,
}

impl DocumentTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(term index, count)` pairs of row `i`, by ascending term.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, doc: usize, term: usize) -> usize {
        self.row(doc).find(|&(c, _)| c == term).map_or(0, |(_, v)| v)
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<usize>> {
        (0..self.n_docs())
            .map(|i| {
                let mut r = vec![0; self.n_terms()];
                for (c, v) in self.row(i) {
                    r[c] = v;
                }
                r
            })
            .collect()
    }

    /// `(doc_id, term, count)` for every stored cell, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (&str, &str, usize)> + '_ {
        (0..self.n_docs()).flat_map(move |i| {
            self.row(i).map(move |(c, v)| (self.doc_ids[i].as_str(), self.terms[c].as_str(), v))
        })
    }
}

pub fn build_dtm(corpus: &[TokenStream]) -> Result<DocumentTermMatrix, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let rows: Vec<BTreeMap<&str, usize>> = corpus
        .iter()
        .map(|s| {
            let mut m = BTreeMap::new();
            for t in &s.tokens {
                *m.entry(t.normalized.as_str()).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let vocab: BTreeMap<&str, usize> = {
        let mut all: Vec<&str> = rows.iter().flat_map(|r| r.keys().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all.into_iter().enumerate().map(|(i, t)| (t, i)).collect()
    };
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut values = Vec::new();
    for r in &rows {
        for (term, &count) in r {
            cols.push(vocab[term]);
            values.push(count);
        }
        row_ptr.push(cols.len());
    }
    Ok(DocumentTermMatrix {
        doc_ids: corpus.iter().map(|s| s.doc_id.clone()).collect(),
        terms: vocab.keys().map(|t| t.to_string()).collect(),
        row_ptr,
        cols,
        values,
    })
}

/// Contiguous windows of `n` normalized tokens, in stream order.
pub fn ngrams(stream: &TokenStream, n: usize) -> Result<Vec<Vec<String>>, CorpusError> {
    if n == 0 {
        return Err(CorpusError::InvalidNgramSize);
    }
    Ok(stream
        .tokens
        .windows(n)
        .map(|w| w.iter().map(|t| t.normalized.clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOW_SENTENCE: &str = "Although the order of the words is ignored, multiplicity is counted \
        and used to determine the focal point of the text analysis";

    #[test]
    fn bow_of_worked_sentence() {
        let s = crate::corpus::tokenize("d", BOW_SENTENCE);
        assert_eq!(s.len(), 22);
        let bow = bag_of_words(&s);
        assert_eq!(bow.len(), 17);
        assert_eq!(bow.counts(), [1, 4, 1, 2, 1, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!((bow.get("the"), bow.get("of"), bow.get("is")), (Some(4), Some(2), Some(2)));
        assert_eq!(bow.total(), 22);
    }

    #[test]
    fn bow_small_cases() {
        assert!(bag_of_words(&TokenStream::default()).is_empty());
        let bow = bag_of_words(&TokenStream::from_words("d", &["a", "a", "b"]));
        assert_eq!(bow.to_sorted_map(), BTreeMap::from([("a".into(), 2), ("b".into(), 1)]));
    }

    #[test]
    fn dtm_examples() {
        let docs = [
            TokenStream::from_words("1", &["a", "b"]),
            TokenStream::from_words("2", &["b", "b"]),
        ];
        let dtm = build_dtm(&docs).unwrap();
        assert_eq!(dtm.terms, ["a", "b"]);
        assert_eq!(dtm.to_dense(), [[1, 1], [0, 2]]);
        assert_eq!(dtm.nnz(), 3);

        let one = build_dtm(&[TokenStream::from_words("x", &["a"])]).unwrap();
        assert_eq!(one.to_dense(), [[1]]);
        assert!(matches!(build_dtm(&[]), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn ngram_examples() {
        let s = TokenStream::from_words("d", &["reopen", "the", "economy"]);
        let bi = ngrams(&s, 2).unwrap();
        assert_eq!(bi, [vec!["reopen", "the"], vec!["the", "economy"]]);
        let uni = ngrams(&s, 1).unwrap();
        assert_eq!(uni.concat(), ["reopen", "the", "economy"]);
        assert!(ngrams(&s, 4).unwrap().is_empty());
        assert!(matches!(ngrams(&s, 0), Err(CorpusError::InvalidNgramSize)));
    }
}
