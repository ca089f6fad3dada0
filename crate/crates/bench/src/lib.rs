//! Fixtures shared by the criterion benches.

use modshift_core::corpus::TokenStream;
use modshift_core::lexshift::CountTable;
use modshift_core::tempograph::{TemporalEdge, TemporalEdgeList};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random temporal graph with `n` users and `m` edges spread over `days`.
pub fn random_edges(n: usize, m: usize, days: u32, seed: u64) -> TemporalEdgeList {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|_| {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            TemporalEdge::new(format!("u{a}"), format!("u{b}"), rng.random_range(0..days))
        })
        .collect();
    TemporalEdgeList::new(edges, true, days - 1, false).expect("days are in range")
}

/// Sentences of `len` tokens over a Zipf-ish vocabulary of `vocab` words.
pub fn random_corpus(sentences: usize, len: usize, vocab: usize, seed: u64) -> Vec<TokenStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sentences)
        .map(|i| TokenStream {
            tweet_id: i.to_string(),
            tokens: (0..len)
                .map(|_| {
                    let r: f64 = rng.random();
                    format!("w{}", ((vocab as f64).powf(r) as usize).min(vocab - 1))
                })
                .collect(),
        })
        .collect()
}

/// Two count tables over the same `vocab` words with independent counts.
pub fn random_tables(vocab: usize, seed: u64) -> (CountTable, CountTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = || CountTable::from_counts((0..vocab).map(|i| (format!("w{i}"), rng.random_range(1..500u64))));
    (table(), table())
}
