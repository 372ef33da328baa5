use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sentilogit::corpus::{lowercase, tokenize, TokenStream};
use sentilogit::diagnostics::{marginal_effects, VariableKind};
use sentilogit::logit::{fit, information, logistic, DesignMatrix, FitOptions};
use sentilogit::sentiment::{score_all, Lexicon};
use sentilogit::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

const WORDS: &[&str] = &[
    "good", "bad", "not", "very", "happy", "sad", "mask", "virus", "great", "terrible", "stay", "home",
    "never", "really", "safe", "awful", "love", "hate", "today", "news",
];

fn streams(n: usize) -> Vec<TokenStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|i| {
            let len = rng.gen_range(5..40);
            let text: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
            lowercase(tokenize(&i.to_string(), &text.join(" ")))
        })
        .collect()
}

fn design(n: usize, k: usize) -> DesignMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut r: Vec<f64> = (0..k - 1).map(|_| StandardNormal.sample(&mut rng)).collect();
            r.push(f64::from(rng.gen_range(0..2u8)));
            r
        })
        .collect();
    let y = rows
        .iter()
        .map(|r| {
            let eta = -0.2 + r.iter().enumerate().map(|(j, x)| x * 0.3 / (j + 1) as f64).sum::<f64>();
            f64::from(u8::from(rng.gen::<f64>() < logistic(eta)))
        })
        .collect();
    let names: Vec<String> = (1..=k).map(|j| format!("x{j}")).collect();
    DesignMatrix::with_intercept(&rows, &names, y).unwrap()
}

fn bench_scoring(c: &mut Criterion) {
    let docs = streams(20_000);
    let lexicon = Lexicon::bundled();
    let mut group = c.benchmark_group("score_all");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| score_all(&docs, &lexicon, exec)));
    }
    group.finish();
}

fn bench_logit(c: &mut Criterion) {
    let data = design(50_000, 18);
    let beta = vec![0.05; data.n_params()];
    let mut group = c.benchmark_group("logit");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new("information", name), |b| {
            b.iter(|| information(&beta, &data, exec).unwrap())
        });
        let opts = FitOptions { exec, ..FitOptions::default() };
        group.bench_function(BenchmarkId::new("fit", name), |b| b.iter(|| fit(&data, &opts).unwrap()));
    }
    group.finish();
}

fn bench_margins(c: &mut Criterion) {
    let data = design(20_000, 8);
    let fitted = fit(&data, &FitOptions::default()).unwrap();
    let kinds: BTreeMap<String, VariableKind> = (1..=8)
        .map(|j| (format!("x{j}"), if j == 8 { VariableKind::Discrete } else { VariableKind::Continuous }))
        .collect();
    let mut group = c.benchmark_group("marginal_effects");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| marginal_effects(&fitted, &data, &kinds, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_scoring, bench_logit, bench_margins);
criterion_main!(benches);
