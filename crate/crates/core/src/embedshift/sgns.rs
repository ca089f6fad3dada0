//! Skip-gram with negative sampling.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Maximum context distance; each center draws its own width in `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    /// Frequent-word subsampling threshold; 0 disables it.
    pub subsample: f64,
    pub learning_rate: f64,
    /// Learning rate never decays below `learning_rate * min_lr_fraction`.
    pub min_lr_fraction: f64,
    /// Reshuffle sentences every epoch with the seeded generator. Sentences are
    /// always put into canonical order first, so the input order never matters.
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 5,
            subsample: 1e-3,
            learning_rate: 0.025,
            min_lr_fraction: 1e-4,
            shuffle: true,
            seed: 1,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 || self.epochs == 0 {
            return Err(Error::invalid(
                "dim, window, negatives and epochs must all be at least 1",
            ));
        }
        if !(self.learning_rate > 0.0) || self.subsample < 0.0 {
            return Err(Error::invalid(
                "learning_rate must be positive and subsample non-negative",
            ));
        }
        Ok(())
    }
}

/// Trained word vectors. Input (center) vectors are the embeddings; output
/// (context) vectors are kept for continued training and gradient checks.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    words: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    input: Vec<f64>,
    output: Vec<f64>,
    dim: usize,
    pub config: SgnsConfig,
}

impl EmbeddingModel {
    pub(crate) fn from_parts(
        words: Vec<String>,
        counts: Vec<u64>,
        input: Vec<f64>,
        output: Vec<f64>,
        dim: usize,
        config: SgnsConfig,
    ) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        EmbeddingModel {
            words,
            index,
            counts,
            input,
            output,
            dim,
            config,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn input_vector(&self, idx: usize) -> &[f64] {
        &self.input[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn output_vector(&self, idx: usize) -> &[f64] {
        &self.output[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.input_vector(i))
    }

    /// One SGD step on the loss of `(center, context)` with the given
    /// negatives. All gradients are taken at the current parameters and
    /// applied together. Returns the loss before the update.
    pub fn sgd_step(&mut self, center: usize, context: usize, negatives: &[usize], lr: f64) -> f64 {
        let d = self.dim;
        let v = self.input_vector(center).to_vec();
        let mut d_center = vec![0.0; d];
        let mut loss = 0.0;
        let mut out_updates: Vec<(usize, f64)> = Vec::with_capacity(negatives.len() + 1);
        for (target, label) in std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0))) {
            let u = self.output_vector(target);
            let score = dot(u, &v);
            let sig = sigmoid(score);
            loss -= if label == 1.0 {
                log_sigmoid(score)
            } else {
                log_sigmoid(-score)
            };
            let g = sig - label;
            for (dc, ui) in d_center.iter_mut().zip(u) {
                *dc += g * ui;
            }
            out_updates.push((target, g));
        }
        for (target, g) in out_updates {
            let row = &mut self.output[target * d..(target + 1) * d];
            for (ui, vi) in row.iter_mut().zip(&v) {
                *ui -= lr * g * vi;
            }
        }
        let row = &mut self.input[center * d..(center + 1) * d];
        for (vi, dc) in row.iter_mut().zip(&d_center) {
            *vi -= lr * dc;
        }
        loss
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// `-log σ(u_o·v_c) - Σ_k log σ(-u_k·v_c)`.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    -log_sigmoid(dot(context, center)) - negatives.iter().map(|u| log_sigmoid(-dot(u, center))).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`sgns_loss`] with respect to each argument.
pub fn sgns_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradient {
    let g_pos = sigmoid(dot(context, center)) - 1.0;
    let mut d_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let d_context = center.iter().map(|v| g_pos * v).collect();
    let mut d_neg = Vec::with_capacity(negatives.len());
    for u in negatives {
        let g = sigmoid(dot(u, center));
        for (dc, ui) in d_center.iter_mut().zip(*u) {
            *dc += g * ui;
        }
        d_neg.push(center.iter().map(|v| g * v).collect());
    }
    SgnsGradient {
        center: d_center,
        context: d_context,
        negatives: d_neg,
    }
}

/// Trains a fresh model on `corpus`. Single-threaded and bitwise
/// reproducible for a given config.
pub fn train_sgns(corpus: &[TokenStream], config: &SgnsConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    let mut raw: HashMap<&str, u64> = HashMap::new();
    for s in corpus {
        for t in &s.tokens {
            *raw.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = raw.into_iter().filter(|&(_, c)| c >= config.min_count).collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, &(w, _))| (w, i)).collect();
    let counts: Vec<u64> = vocab.iter().map(|v| v.1).collect();
    let total: u64 = counts.iter().sum();

    let mut sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .filter_map(|t| index.get(t.as_str()).copied())
                .collect::<Vec<_>>()
        })
        .filter(|s| s.len() > 1)
        .collect();
    sentences.sort();

    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let input: Vec<f64> = (0..counts.len() * dim)
        .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    let output = vec![0.0; counts.len() * dim];
    let mut model = EmbeddingModel::from_parts(
        vocab.iter().map(|v| v.0.to_string()).collect(),
        counts.clone(),
        input,
        output,
        dim,
        config.clone(),
    );

    let noise =
        WeightedIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75))).map_err(|e| Error::invalid(e.to_string()))?;
    let keep_prob: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if config.subsample <= 0.0 {
                return 1.0;
            }
            let f = c as f64;
            let t = config.subsample * total as f64;
            ((f / t).sqrt() + 1.0) * t / f
        })
        .collect();

    let planned = (total as f64) * config.epochs as f64;
    let mut processed = 0u64;
    let mut negs = Vec::with_capacity(config.negatives);
    for _ in 0..config.epochs {
        if config.shuffle {
            sentences.shuffle(&mut rng);
        }
        for sent in &sentences {
            processed += sent.len() as u64;
            let lr = config.learning_rate * (1.0 - processed as f64 / (planned + 1.0)).max(config.min_lr_fraction);
            let kept: Vec<usize> = sent
                .iter()
                .copied()
                .filter(|&w| keep_prob[w] >= 1.0 || rng.random::<f64>() < keep_prob[w])
                .collect();
            for (i, &center) in kept.iter().enumerate() {
                let width = rng.random_range(1..=config.window);
                let lo = i.saturating_sub(width);
                let hi = (i + width).min(kept.len() - 1);
                for (j, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negs.clear();
                    for _ in 0..config.negatives {
                        let n = noise.sample(&mut rng);
                        if n != context {
                            negs.push(n);
                        }
                    }
                    model.sgd_step(center, context, &negs, lr);
                }
            }
        }
    }
    Ok(model)
}
