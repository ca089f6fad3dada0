//! Word-level comparison of two corpora using log-odds ratios smoothed by an
//! informative Dirichlet prior, plus category composition shifts.

mod composition;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use composition::{composition_shift, write_category_csv, CategoryShift};

/// Prior mass given to words the background file has never seen.
pub const DEFAULT_ALPHA_FLOOR: f64 = 0.01;
pub const DEFAULT_TOP_K: usize = 50;
pub const DEFAULT_MIN_FREQ_FRAC: f64 = 0.01;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut t = CountTable::new();
        for tok in tokens {
            t.add(tok.as_ref(), 1);
        }
        t
    }

    pub fn from_counts<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut t = CountTable::new();
        for (w, c) in pairs {
            t.add(&w.into(), c);
        }
        t
    }

    pub fn add(&mut self, word: &str, count: u64) {
        *self.counts.entry(word.to_string()).or_default() += count;
        self.total += count;
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `word<TAB>count` lines.
    pub fn parse_tsv(src: &str) -> Result<Self> {
        let mut t = CountTable::new();
        for (i, line) in src.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = || Error::Parse {
                context: "background frequencies".into(),
                message: format!("line {}: expected word<TAB>count", i + 1),
            };
            let (w, c) = line.split_once('\t').ok_or_else(parse_err)?;
            let c: u64 = c.trim().parse().map_err(|_| parse_err())?;
            t.add(&w.trim().to_lowercase(), c);
        }
        Ok(t)
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&src)
    }
}

/// Dirichlet pseudo-counts per word. Words outside the table get `floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorTable {
    alpha: BTreeMap<String, f64>,
    alpha0: f64,
    floor: f64,
}

impl PriorTable {
    pub fn new(alpha: BTreeMap<String, f64>, alpha0: f64) -> Result<Self> {
        if let Some((w, a)) = alpha.iter().find(|(_, a)| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::invalid(format!("alpha for {w:?} is {a}, must be positive")));
        }
        if !(alpha0 > 0.0) {
            return Err(Error::invalid("alpha0 must be positive"));
        }
        Ok(PriorTable {
            alpha,
            alpha0,
            floor: DEFAULT_ALPHA_FLOOR,
        })
    }

    /// Same pseudo-count for every word of `vocab`; `alpha0` is their sum.
    pub fn uniform<'a>(vocab: impl IntoIterator<Item = &'a str>, alpha: f64) -> Result<Self> {
        let alpha: BTreeMap<String, f64> = vocab.into_iter().map(|w| (w.to_string(), alpha)).collect();
        let alpha0 = alpha.values().sum();
        Self::new(alpha, alpha0)
    }

    /// `alpha_w = scale * bg_w / bg_total`, floored for unseen words, over `vocab`.
    /// `scale` defaults to the vocabulary size.
    pub fn from_background<'a>(
        background: &CountTable,
        vocab: impl IntoIterator<Item = &'a str>,
        scale: Option<f64>,
    ) -> Result<Self> {
        let vocab: Vec<&str> = vocab.into_iter().collect();
        let scale = scale.unwrap_or(vocab.len() as f64);
        let bg_total = background.total() as f64;
        let mut alpha = BTreeMap::new();
        for w in vocab {
            let bg = background.get(w) as f64;
            let a = if bg > 0.0 && bg_total > 0.0 {
                (scale * bg / bg_total).max(DEFAULT_ALPHA_FLOOR)
            } else {
                DEFAULT_ALPHA_FLOOR
            };
            alpha.insert(w.to_string(), a);
        }
        let alpha0: f64 = alpha.values().sum();
        if alpha.is_empty() {
            return Ok(PriorTable {
                alpha,
                alpha0: DEFAULT_ALPHA_FLOOR,
                floor: DEFAULT_ALPHA_FLOOR,
            });
        }
        Self::new(alpha, alpha0)
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn alpha(&self, word: &str) -> f64 {
        self.alpha.get(word).copied().unwrap_or(self.floor)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// Multiplies every pseudo-count (and the floor) by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        PriorTable {
            alpha: self.alpha.iter().map(|(w, a)| (w.clone(), a * t)).collect(),
            alpha0: self.alpha0 * t,
            floor: self.floor * t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredWord {
    pub word: String,
    pub zscore: f64,
    pub freq_i: u64,
    pub freq_j: u64,
}

/// Log-odds ratio of every word in `ci ∪ cj` with its prior-derived variance.
///
/// Positive scores lean towards `ci`. Output is sorted by word.
pub fn log_odds_dirichlet(ci: &CountTable, cj: &CountTable, prior: &PriorTable) -> Result<Vec<ScoredWord>> {
    let mut vocab: Vec<&str> = ci.words().chain(cj.words()).collect();
    vocab.sort_unstable();
    vocab.dedup();

    let ni = ci.total() as f64;
    let nj = cj.total() as f64;
    let a0 = prior.alpha0();
    vocab
        .into_iter()
        .map(|w| {
            let a = prior.alpha(w);
            let (yi, yj) = (ci.get(w), cj.get(w));
            let (num_i, num_j) = (yi as f64 + a, yj as f64 + a);
            let den_i = ni + a0 - num_i;
            let den_j = nj + a0 - num_j;
            if !(den_i > 0.0 && den_j > 0.0) {
                return Err(Error::DegeneratePrior { word: w.to_string() });
            }
            let delta = (num_i / den_i).ln() - (num_j / den_j).ln();
            let var = 1.0 / num_i + 1.0 / num_j;
            Ok(ScoredWord {
                word: w.to_string(),
                zscore: delta / var.sqrt(),
                freq_i: yi,
                freq_j: yj,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Highest scores, characteristic of the first corpus.
    Top,
    /// Lowest scores, characteristic of the second corpus.
    Bottom,
}

/// Picks the `k` most extreme words on one side, after requiring the word to
/// make up at least `min_freq_frac` of that side's corpus.
pub fn representative_words(
    scored: &[ScoredWord],
    k: usize,
    min_freq_frac: f64,
    side: Side,
    totals: (u64, u64),
) -> Result<Vec<ScoredWord>> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if !(min_freq_frac > 0.0 && min_freq_frac < 1.0) {
        return Err(Error::invalid(format!("min_freq_frac {min_freq_frac} outside (0, 1)")));
    }
    let (freq, total): (fn(&ScoredWord) -> u64, u64) = match side {
        Side::Top => (|s| s.freq_i, totals.0),
        Side::Bottom => (|s| s.freq_j, totals.1),
    };
    let floor = min_freq_frac * total as f64;
    let mut kept: Vec<ScoredWord> = scored.iter().filter(|s| freq(s) as f64 >= floor).cloned().collect();
    kept.sort_by(|a, b| {
        let by_score = match side {
            Side::Top => b.zscore.total_cmp(&a.zscore),
            Side::Bottom => a.zscore.total_cmp(&b.zscore),
        };
        by_score.then_with(|| a.word.cmp(&b.word))
    });
    kept.truncate(k);
    Ok(kept)
}

pub fn write_scored_csv(path: &Path, words: &[ScoredWord]) -> Result<()> {
    let mut out = String::from("word,zscore,freq_i,freq_j\n");
    for w in words {
        out.push_str(&format!("{},{:.6},{},{}\n", w.word, w.zscore, w.freq_i, w.freq_j));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
