use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::load_keywords;
use crate::earlydetect::{MprTarget, DEFAULT_HASH_DIM, DEFAULT_TRAIN_FRACTION};
use crate::embedshift::SgnsConfig;
use crate::error::{Error, Result};
use crate::influence::{F3Window, PageRankConfig, DEFAULT_TOP_K};
use crate::tempograph::{EdgeMode, DEFAULT_P_FORWARD};

/// Full run configuration, read from TOML. Relative paths are resolved
/// against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub paths: PathsConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub lexshift: LexshiftConfig,
    #[serde(default)]
    pub embedshift: EmbedshiftConfig,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub influence: InfluenceConfig,
    #[serde(default)]
    pub earlydetect: EarlydetectConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub tweets: PathBuf,
    pub users: PathBuf,
    pub keywords: PathBuf,
    /// `word<TAB>lemma` lines for the lexical comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<PathBuf>,
    /// `word<TAB>count` background corpus for the Dirichlet prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<PathBuf>,
    /// Precomputed embeddings for F2: tab-separated `tweet_id v1 ... vd` lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    /// `topic,keyword` pairs for the embedding comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<PathBuf>,
    /// User ids to drop from the influencer set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusions: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub start_date: NaiveDate,
    pub takeover_day_index: u32,
    pub end_day_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub hate_threshold: f64,
    pub min_hateful: usize,
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
    /// Score tweets lacking `hate_score` with the keyword-count stand-in.
    pub fallback_scorer: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            hate_threshold: 0.5,
            min_hateful: 3,
            strict: false,
            fallback_scorer: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexshiftConfig {
    pub enabled: bool,
    pub top_k: usize,
    pub min_freq_frac: f64,
    /// Prior strength; defaults to the vocabulary size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_scale: Option<f64>,
    /// Pseudo-count for words the prior has never seen.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_floor: Option<f64>,
}

impl Default for LexshiftConfig {
    fn default() -> Self {
        LexshiftConfig {
            enabled: true,
            top_k: 50,
            min_freq_frac: 0.01,
            prior_scale: None,
            prior_floor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedshiftConfig {
    pub enabled: bool,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub subsample: f64,
    pub learning_rate: f64,
    pub min_lr_fraction: f64,
    pub shuffle: bool,
}

impl Default for EmbedshiftConfig {
    fn default() -> Self {
        let s = SgnsConfig::default();
        EmbedshiftConfig {
            enabled: true,
            dim: s.dim,
            window: s.window,
            negatives: s.negatives,
            epochs: s.epochs,
            min_count: s.min_count,
            subsample: s.subsample,
            learning_rate: s.learning_rate,
            min_lr_fraction: s.min_lr_fraction,
            shuffle: s.shuffle,
        }
    }
}

impl EmbedshiftConfig {
    pub fn sgns(&self, seed: u64) -> SgnsConfig {
        SgnsConfig {
            dim: self.dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            min_count: self.min_count,
            subsample: self.subsample,
            learning_rate: self.learning_rate,
            min_lr_fraction: self.min_lr_fraction,
            shuffle: self.shuffle,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub enabled: bool,
    pub mode: EdgeMode,
    pub directed: bool,
    /// Node count of the forest-fire samples written for plotting.
    pub forest_fire_nodes: usize,
    pub p_forward: f64,
    /// The early sample is taken this many days before the takeover.
    pub sample_offset_days: u32,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            enabled: true,
            mode: EdgeMode::RetweetOnly,
            directed: true,
            forest_fire_nodes: 1000,
            p_forward: DEFAULT_P_FORWARD,
            sample_offset_days: 14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfluenceConfig {
    pub enabled: bool,
    pub top_k: usize,
    pub f3_window: F3Window,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for InfluenceConfig {
    fn default() -> Self {
        let pr = PageRankConfig::default();
        InfluenceConfig {
            enabled: true,
            top_k: DEFAULT_TOP_K,
            f3_window: F3Window::default(),
            damping: pr.damping,
            tolerance: pr.tolerance,
            max_iter: pr.max_iter,
        }
    }
}

impl InfluenceConfig {
    pub fn pagerank(&self) -> PageRankConfig {
        PageRankConfig {
            damping: self.damping,
            tolerance: self.tolerance,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarlydetectConfig {
    pub enabled: bool,
    pub target: MprTarget,
    pub train_fraction: f64,
    pub rounds: usize,
    pub max_depth: usize,
    /// Dimension of the hashing embedder used when no embeddings file is given.
    pub hash_dim: usize,
}

impl Default for EarlydetectConfig {
    fn default() -> Self {
        EarlydetectConfig {
            enabled: true,
            target: MprTarget::default(),
            train_fraction: DEFAULT_TRAIN_FRACTION,
            rounds: 50,
            max_depth: 3,
            hash_dim: DEFAULT_HASH_DIM,
        }
    }
}

impl PipelineConfig {
    /// Minimal config for a data directory holding `tweets.jsonl`,
    /// `users.jsonl` and `keywords.txt`.
    pub fn for_data_dir(dir: &Path, start_date: NaiveDate, takeover_day_index: u32, end_day_index: u32) -> Self {
        let pairs = dir.join("pairs.csv");
        PipelineConfig {
            seed: 0,
            paths: PathsConfig {
                tweets: dir.join("tweets.jsonl"),
                users: dir.join("users.jsonl"),
                keywords: dir.join("keywords.txt"),
                lemmas: None,
                background: None,
                embeddings: None,
                pairs: pairs.is_file().then_some(pairs),
                exclusions: None,
                output: dir.join("out"),
            },
            window: WindowConfig {
                start_date,
                takeover_day_index,
                end_day_index,
            },
            corpus: CorpusConfig::default(),
            lexshift: LexshiftConfig::default(),
            embedshift: EmbedshiftConfig::default(),
            graph: GraphConfig::default(),
            influence: InfluenceConfig::default(),
            earlydetect: EarlydetectConfig::default(),
        }
    }

    /// Parses TOML and resolves relative paths against `base_dir`.
    pub fn from_toml(src: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&src, base)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for path in [&mut p.tweets, &mut p.users, &mut p.keywords, &mut p.output] {
            fix(path);
        }
        for path in [
            &mut p.lemmas,
            &mut p.background,
            &mut p.embeddings,
            &mut p.pairs,
            &mut p.exclusions,
        ]
        .into_iter()
        .flatten()
        {
            fix(path);
        }
    }

    /// Named input files, optional ones only when set.
    pub fn inputs(&self) -> Vec<(&'static str, &Path)> {
        let p = &self.paths;
        let mut v: Vec<(&'static str, &Path)> =
            vec![("tweets", &p.tweets), ("users", &p.users), ("keywords", &p.keywords)];
        let optional = [
            ("lemmas", &p.lemmas),
            ("background", &p.background),
            ("embeddings", &p.embeddings),
            ("pairs", &p.pairs),
            ("exclusions", &p.exclusions),
        ];
        v.extend(
            optional
                .into_iter()
                .filter_map(|(n, o)| o.as_deref().map(|path| (n, path))),
        );
        v
    }

    /// Checks every setting and input file before any stage runs. All
    /// problems are reported together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, path) in self.inputs() {
            if !path.is_file() {
                problems.push(format!("{name} file {} not found", path.display()));
            }
        }
        if self.paths.keywords.is_file() {
            match load_keywords(&self.paths.keywords) {
                Ok(k) if k.is_empty() => problems.push("keyword list is empty".into()),
                Ok(_) => {}
                Err(e) => problems.push(e.to_string()),
            }
        }
        let w = &self.window;
        if w.takeover_day_index == 0 || w.takeover_day_index >= w.end_day_index {
            problems.push(format!(
                "takeover_day_index {} must lie strictly between 0 and end_day_index {}",
                w.takeover_day_index, w.end_day_index
            ));
        }
        let c = &self.corpus;
        if !(0.0..=1.0).contains(&c.hate_threshold) {
            problems.push(format!("hate_threshold {} outside [0, 1]", c.hate_threshold));
        }
        if c.min_hateful == 0 {
            problems.push("min_hateful must be at least 1".into());
        }
        let l = &self.lexshift;
        if l.top_k == 0 {
            problems.push("lexshift.top_k must be at least 1".into());
        }
        if !(l.min_freq_frac > 0.0 && l.min_freq_frac < 1.0) {
            problems.push(format!("lexshift.min_freq_frac {} outside (0, 1)", l.min_freq_frac));
        }
        if l.prior_scale.is_some_and(|s| !(s > 0.0)) || l.prior_floor.is_some_and(|s| !(s > 0.0)) {
            problems.push("lexshift prior_scale and prior_floor must be positive".into());
        }
        if let Err(e) = self.embedshift.sgns(0).validate() {
            problems.push(format!("embedshift: {e}"));
        }
        let g = &self.graph;
        if g.forest_fire_nodes == 0 {
            problems.push("graph.forest_fire_nodes must be at least 1".into());
        }
        if !(g.p_forward > 0.0 && g.p_forward < 1.0) {
            problems.push(format!("graph.p_forward {} outside (0, 1)", g.p_forward));
        }
        if self.influence.top_k == 0 {
            problems.push("influence.top_k must be at least 1".into());
        }
        if let Err(e) = self.influence.pagerank().validate() {
            problems.push(format!("influence: {e}"));
        }
        let e = &self.earlydetect;
        if !(e.train_fraction > 0.0 && e.train_fraction <= 1.0) {
            problems.push(format!(
                "earlydetect.train_fraction {} outside (0, 1]",
                e.train_fraction
            ));
        }
        if e.rounds == 0 || e.max_depth == 0 || e.hash_dim == 0 {
            problems.push("earlydetect rounds, max_depth and hash_dim must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}
