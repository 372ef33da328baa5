use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sentilogit::corpus::{
    bag_of_words, build_dtm, lowercase, ngrams, remove_stopwords, stem, tokenize, Preprocessor,
    StemRules, TokenStream,
};

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,8}"
}

fn words(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(word(), 0..max)
}

proptest! {
    #[test]
    fn tokenize_round_trips_space_joined_words(ws in words(30)) {
        let text = ws.join(" ");
        let s = tokenize("d", &text);
        prop_assert_eq!(s.surfaces(), ws.iter().map(String::as_str).collect::<Vec<_>>());
        let positions: Vec<usize> = s.tokens.iter().map(|t| t.position).collect();
        prop_assert_eq!(positions, (0..ws.len()).collect::<Vec<_>>());
    }

    #[test]
    fn tokenize_ignores_punctuation_between_words(ws in words(20), sep in "[ ,.;:!?()\\-]{1,3}") {
        let text = ws.join(&sep);
        let s = tokenize("d", &text);
        prop_assert_eq!(s.len(), ws.len());
    }

    #[test]
    fn stopword_removal_count_identity(ws in words(40), stop in prop::collection::btree_set(word(), 0..10)) {
        let s = TokenStream::from_words("d", &ws);
        let kept = remove_stopwords(s, &stop);
        let n_stop = ws.iter().filter(|w| stop.contains(*w)).count();
        prop_assert_eq!(kept.len() + n_stop, ws.len());
        prop_assert!(kept.tokens.iter().all(|t| !stop.contains(&t.normalized)));
        prop_assert!(kept.tokens.windows(2).all(|w| w[0].position < w[1].position));
    }

    #[test]
    fn lowercase_is_idempotent(text in "[A-Za-z ]{0,60}") {
        let once = lowercase(tokenize("d", &text));
        let twice = lowercase(once.clone());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn stem_keeps_minimum_length(ws in words(20)) {
        let rules = StemRules::bundled();
        let s = stem(TokenStream::from_words("d", &ws), &rules);
        for (t, w) in s.tokens.iter().zip(&ws) {
            prop_assert!(t.normalized.len() >= StemRules::DEFAULT_MIN_STEM.min(w.len()));
        }
    }

    #[test]
    fn bag_of_words_totals(ws in words(50)) {
        let s = TokenStream::from_words("d", &ws);
        let bow = bag_of_words(&s);
        prop_assert_eq!(bow.total(), ws.len());
        prop_assert_eq!(bow.len(), ws.iter().collect::<BTreeSet<_>>().len());
        let mut oracle: BTreeMap<String, usize> = BTreeMap::new();
        for w in &ws {
            *oracle.entry(w.clone()).or_default() += 1;
        }
        prop_assert_eq!(bow.to_sorted_map(), oracle);
    }

    #[test]
    fn dtm_rows_match_bags(docs in prop::collection::vec(words(20), 1..8)) {
        let streams: Vec<TokenStream> =
            docs.iter().enumerate().map(|(i, ws)| TokenStream::from_words(format!("d{i}"), ws)).collect();
        let dtm = build_dtm(&streams).unwrap();
        prop_assert_eq!(dtm.n_docs(), docs.len());
        let vocab: BTreeSet<&String> = docs.iter().flatten().collect();
        prop_assert_eq!(dtm.n_terms(), vocab.len());
        let vocab: Vec<&String> = vocab.into_iter().collect();
        let dense = dtm.to_dense();
        for (i, ws) in docs.iter().enumerate() {
            prop_assert_eq!(dtm.row_sum(i), ws.len());
            for (j, term) in vocab.iter().enumerate() {
                let want = ws.iter().filter(|w| w == term).count();
                prop_assert_eq!(dense[i][j], want);
            }
        }
    }

    #[test]
    fn ngram_count(ws in words(30), n in 1usize..5) {
        let s = TokenStream::from_words("d", &ws);
        let grams = ngrams(&s, n).unwrap();
        prop_assert_eq!(grams.len(), ws.len().saturating_sub(n - 1));
        for (i, g) in grams.iter().enumerate() {
            prop_assert_eq!(g.as_slice(), &ws[i..i + n]);
        }
    }

    #[test]
    fn preprocessing_is_pure(text in "[A-Za-z ,.']{0,80}") {
        let p = Preprocessor::default();
        let d = sentilogit::corpus::Document::new("x", "NC", text);
        prop_assert_eq!(p.process(&d), p.process(&d));
    }
}

#[test]
fn disjoint_vocabularies_give_block_diagonal_dtm() {
    let a = TokenStream::from_words("a", &["apple", "banana", "apple"]);
    let b = TokenStream::from_words("b", &["xylophone", "yak"]);
    let dtm = build_dtm(&[a, b]).unwrap();
    assert_eq!(dtm.to_dense(), vec![vec![2, 1, 0, 0], vec![0, 0, 1, 1]]);
    assert_eq!(dtm.nnz(), 4);
}
