//! Per-period word embeddings and topic/keyword association shifts.
//!
//! Each period gets its own independently trained model, so cosines from the
//! two models are only comparable qualitatively: the spaces are not aligned.

mod sgns;

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::corpus::tokenize;
use crate::error::{Error, Result};

pub use sgns::{sgns_gradient, sgns_loss, train_sgns, EmbeddingModel, SgnsConfig, SgnsGradient};

/// Caveat attached to every similarity report.
pub const CROSS_MODEL_NOTE: &str =
    "before/after cosines come from separately trained, unaligned embedding spaces; compare directions, not magnitudes";

/// Mean input vector of the phrase's in-vocabulary tokens.
pub fn phrase_vector(model: &EmbeddingModel, phrase: &str) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; model.dim()];
    let mut n = 0usize;
    for tok in tokenize(phrase) {
        if let Some(v) = model.vector(&tok) {
            acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
            n += 1;
        }
    }
    (n > 0).then(|| acc.into_iter().map(|a| a / n as f64).collect())
}

/// Cosine similarity, `None` if either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = sgns::dot(a, a).sqrt();
    let nb = sgns::dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
        return None;
    }
    Some((sgns::dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn phrase_similarity(model: &EmbeddingModel, a: &str, b: &str) -> Option<f64> {
    cosine(&phrase_vector(model, a)?, &phrase_vector(model, b)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityPair {
    pub topic: String,
    pub keyword: String,
    /// `None` when either term is out of vocabulary.
    pub cos_before: Option<f64>,
    pub cos_after: Option<f64>,
}

pub fn similarity_shift(
    pre: &EmbeddingModel,
    post: &EmbeddingModel,
    pairs: &[(String, String)],
) -> Vec<SimilarityPair> {
    pairs
        .iter()
        .map(|(topic, keyword)| SimilarityPair {
            topic: topic.clone(),
            keyword: keyword.clone(),
            cos_before: phrase_similarity(pre, topic, keyword),
            cos_after: phrase_similarity(post, topic, keyword),
        })
        .collect()
}

/// `topic,keyword` rows; a leading `topic,keyword` header is skipped.
pub fn parse_pairs(src: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("topic,keyword")) {
            continue;
        }
        let (t, k) = line.split_once(',').ok_or_else(|| Error::Parse {
            context: "pairs.csv".into(),
            message: format!("line {}: expected topic,keyword", i + 1),
        })?;
        out.push((t.trim().to_string(), k.trim().to_string()));
    }
    Ok(out)
}

pub fn write_similarity_csv(path: &Path, rows: &[SimilarityPair]) -> Result<()> {
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
    let mut out = String::from("topic,keyword,cos_before,cos_after\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.topic,
            r.keyword,
            fmt(r.cos_before),
            fmt(r.cos_after)
        );
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Text format: a `vocab_size dim` header line, then `word v1 .. vd` per word.
pub fn write_model(path: &Path, model: &EmbeddingModel) -> Result<()> {
    let mut out = format!("{} {}\n", model.vocab_size(), model.dim());
    for (i, w) in model.words().iter().enumerate() {
        out.push_str(w);
        for x in model.input_vector(i) {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a model written by [`write_model`]. Output vectors are not stored
/// in the file and come back as zeros.
pub fn read_model(src: &str) -> Result<EmbeddingModel> {
    let bad = |msg: String| Error::Parse {
        context: "embedding model".into(),
        message: msg,
    };
    let mut lines = src.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad(format!("bad header {header:?}"))))
        .collect::<Result<_>>()?;
    let [n, dim] = nums[..] else {
        return Err(bad(format!("bad header {header:?}")));
    };
    let mut words = Vec::with_capacity(n);
    let mut input = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate().take(n) {
        let mut parts = line.split(' ');
        let w = parts.next().unwrap_or_default();
        let vals: Vec<f64> = parts
            .map(|s| s.parse().map_err(|_| bad(format!("line {}: bad number {s:?}", i + 2))))
            .collect::<Result<_>>()?;
        if vals.len() != dim {
            return Err(bad(format!("line {}: {} values, expected {dim}", i + 2, vals.len())));
        }
        words.push(w.to_string());
        input.extend(vals);
    }
    if words.len() != n {
        return Err(bad(format!("expected {n} words, found {}", words.len())));
    }
    Ok(EmbeddingModel::from_parts(
        words,
        vec![0; n],
        input,
        vec![0.0; n * dim],
        dim,
        SgnsConfig {
            dim,
            ..Default::default()
        },
    ))
}

pub fn load_model(path: &Path) -> Result<EmbeddingModel> {
    read_model(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
