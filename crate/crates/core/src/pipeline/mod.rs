//! End-to-end runner: corpus selection, then the lexical, embedding and
//! graph stages side by side, then influence and early detection on top of
//! the graph.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::corpus::{
    fallback_scorer, hate_threshold_filter, key_contributors, keyword_filter, load_keywords, load_tweets, load_users,
    write_jsonl, AnalysisWindow, LemmaDict, LoadOptions, MalformedPolicy, Preprocessor, TweetKind, TweetRecord,
    UserProfile,
};
use crate::earlydetect::{
    build_f1, build_f2, combine, feature_correlations, fit_adaboost, fit_linear, load_embeddings, mpr_target,
    write_correlations_csv, AdaBoostConfig, EvalOptions, FeatureMatrix, HashingEmbedder,
};
use crate::embedshift::{
    parse_pairs, similarity_shift, train_sgns, write_model, write_similarity_csv, CROSS_MODEL_NOTE,
};
use crate::error::{Error, Result};
use crate::influence::{
    bio_profile, influencer_intersection, load_exclusions, mpr_scores, write_mpr_csv, InfluencerSet, MprScore,
    PageRankSeries,
};
use crate::lexshift::{
    composition_shift, log_odds_dirichlet, representative_words, write_category_csv, write_scored_csv, CountTable,
    PriorTable, Side,
};
use crate::tempograph::{
    avg_degree_centrality_series, build_edges, component_count_series, edge_influx, edge_influx_series,
    forest_fire_sample, growth_rate_comparison, write_metrics_csv, BuildOptions, EdgeMode, MetricSeries,
    TemporalEdgeList,
};

pub use config::{
    CorpusConfig, EarlydetectConfig, EmbedshiftConfig, GraphConfig, InfluenceConfig, LexshiftConfig, PathsConfig,
    PipelineConfig, WindowConfig,
};

/// Fewer MPR users than this and the regressions are not attempted.
pub const MIN_REGRESSION_USERS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Corpus,
    Lexshift,
    Embedshift,
    Graph,
    Influence,
    Earlydetect,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Corpus,
        Stage::Lexshift,
        Stage::Embedshift,
        Stage::Graph,
        Stage::Influence,
        Stage::Earlydetect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Corpus => "corpus",
            Stage::Lexshift => "lexshift",
            Stage::Embedshift => "embedshift",
            Stage::Graph => "graph",
            Stage::Influence => "influence",
            Stage::Earlydetect => "earlydetect",
        }
    }

    /// Stages whose outputs this one consumes directly.
    pub fn dependencies(self) -> &'static [Stage] {
        match self {
            Stage::Corpus => &[],
            Stage::Lexshift | Stage::Embedshift | Stage::Graph => &[Stage::Corpus],
            Stage::Influence => &[Stage::Graph],
            Stage::Earlydetect => &[Stage::Influence],
        }
    }

    fn requires(self, other: Stage) -> bool {
        self == other || self.dependencies().iter().any(|d| d.requires(other))
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "FAILED")]
    Failed,
    #[serde(rename = "skipped")]
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    #[serde(skip)]
    pub io_failure: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Run only this stage and the stages it depends on.
    pub only: Option<Stage>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub stages: Vec<StageReport>,
}

impl RunSummary {
    pub fn report(&self, stage: Stage) -> Option<&StageReport> {
        self.stages.iter().find(|r| r.stage == stage)
    }

    pub fn any_failed(&self) -> bool {
        self.stages.iter().any(|r| r.status == StageStatus::Failed)
    }

    /// 0 when every selected stage succeeded, 3 when a stage failed on I/O,
    /// 2 for any other stage failure.
    pub fn exit_code(&self) -> i32 {
        let failed = self.stages.iter().filter(|r| r.status == StageStatus::Failed);
        let mut code = 0;
        for r in failed {
            code = code.max(if r.io_failure { 3 } else { 2 });
        }
        code
    }
}

/// Stage seed: the first eight bytes of SHA-256 over the root seed and the
/// stage name.
pub fn derive_seed(root: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update(stage.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Outputs of the corpus stage shared by everything downstream.
pub struct CorpusData {
    pub window: AnalysisWindow,
    pub tweets: Vec<TweetRecord>,
    pub users: Vec<UserProfile>,
    /// Keyword-matching tweets at or above the hate threshold.
    pub hateful: Vec<TweetRecord>,
    pub contributors: BTreeSet<String>,
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    out: &'a Path,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, contents).map_err(|e| Error::io(&p, e))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    fn seed(&self, stage: Stage) -> u64 {
        derive_seed(self.cfg.seed, stage.as_str())
    }
}

/// What a stage hands back on success.
struct Done<T> {
    value: T,
    outputs: Vec<String>,
    message: Option<String>,
}

impl<T> Done<T> {
    fn new(value: T, outputs: &[&str]) -> Self {
        Done {
            value,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            message: None,
        }
    }

    fn note(mut self, message: Option<String>) -> Self {
        self.message = message;
        self
    }
}

fn finish<T>(stage: Stage, res: Result<Done<T>>) -> (Option<T>, StageReport) {
    match res {
        Ok(d) => {
            log::info!("{stage}: ok ({} outputs)", d.outputs.len());
            (
                Some(d.value),
                StageReport {
                    stage,
                    status: StageStatus::Ok,
                    message: d.message,
                    outputs: d.outputs,
                    io_failure: false,
                },
            )
        }
        Err(e) => {
            log::error!("{stage} failed: {e}");
            (
                None,
                StageReport {
                    stage,
                    status: StageStatus::Failed,
                    message: Some(e.to_string()),
                    outputs: Vec::new(),
                    io_failure: matches!(e, Error::Io { .. }),
                },
            )
        }
    }
}

fn skipped(stage: Stage, why: &str) -> StageReport {
    StageReport {
        stage,
        status: StageStatus::Skipped,
        message: Some(why.to_string()),
        outputs: Vec::new(),
        io_failure: false,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    started_at: String,
    finished_at: String,
    config: &'a PipelineConfig,
    inputs: BTreeMap<&'static str, String>,
    seeds: BTreeMap<&'static str, u64>,
    stages: &'a [StageReport],
}

/// Runs the configured stages and writes `manifest.json` into the output
/// directory. Stage failures are recorded in the summary; only an invalid
/// config or an unwritable output directory is returned as an error.
pub fn run(cfg: &PipelineConfig, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let out = cfg.paths.output.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut inputs = BTreeMap::new();
    for (name, path) in cfg.inputs() {
        inputs.insert(name, sha256_file(path)?);
    }
    let ctx = Ctx { cfg, out: &out };

    let wanted = |s: Stage| -> bool {
        let enabled = match s {
            Stage::Corpus => true,
            Stage::Lexshift => cfg.lexshift.enabled,
            Stage::Embedshift => cfg.embedshift.enabled,
            Stage::Graph => cfg.graph.enabled,
            Stage::Influence => cfg.influence.enabled,
            Stage::Earlydetect => cfg.earlydetect.enabled,
        };
        match opts.only {
            Some(only) => only.requires(s),
            None => enabled,
        }
    };

    let mut reports = Vec::new();
    let (corpus, rep) = finish(Stage::Corpus, corpus_stage(&ctx));
    reports.push(rep);

    let Some(data) = corpus else {
        for s in &Stage::ALL[1..] {
            if wanted(*s) {
                reports.push(skipped(*s, "corpus stage failed"));
            }
        }
        return write_manifest(&ctx, started_at, inputs, reports);
    };

    let (lex, emb, chain) = std::thread::scope(|scope| {
        let lex =
            scope.spawn(|| wanted(Stage::Lexshift).then(|| finish(Stage::Lexshift, lexshift_stage(&ctx, &data)).1));
        let emb = scope
            .spawn(|| wanted(Stage::Embedshift).then(|| finish(Stage::Embedshift, embedshift_stage(&ctx, &data)).1));
        let chain = graph_chain(&ctx, &data, &wanted);
        (
            lex.join().expect("lexshift thread panicked"),
            emb.join().expect("embedshift thread panicked"),
            chain,
        )
    });
    reports.extend(lex);
    reports.extend(emb);
    reports.extend(chain);
    reports.sort_by_key(|r| r.stage);
    write_manifest(&ctx, started_at, inputs, reports)
}

fn write_manifest(
    ctx: &Ctx<'_>,
    started_at: String,
    inputs: BTreeMap<&'static str, String>,
    stages: Vec<StageReport>,
) -> Result<RunSummary> {
    let seeds = Stage::ALL.iter().map(|s| (s.as_str(), ctx.seed(*s))).collect();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        config: ctx.cfg,
        inputs,
        seeds,
        stages: &stages,
    };
    ctx.write_json("manifest.json", &manifest)?;
    Ok(RunSummary {
        out_dir: ctx.out.to_path_buf(),
        stages,
    })
}

fn graph_chain(ctx: &Ctx<'_>, data: &CorpusData, wanted: &dyn Fn(Stage) -> bool) -> Vec<StageReport> {
    let mut reports = Vec::new();
    if !wanted(Stage::Graph) {
        return reports;
    }
    let (edges, rep) = finish(Stage::Graph, graph_stage(ctx, data));
    reports.push(rep);
    let Some(edges) = edges else {
        for s in [Stage::Influence, Stage::Earlydetect] {
            if wanted(s) {
                reports.push(skipped(s, "graph stage failed"));
            }
        }
        return reports;
    };
    if !wanted(Stage::Influence) {
        return reports;
    }
    let (scores, rep) = finish(Stage::Influence, influence_stage(ctx, data, &edges));
    reports.push(rep);
    if wanted(Stage::Earlydetect) {
        match scores {
            Some(scores) => reports.push(finish(Stage::Earlydetect, earlydetect_stage(ctx, data, &scores)).1),
            None => reports.push(skipped(Stage::Earlydetect, "influence stage failed")),
        }
    }
    reports
}

fn corpus_stage(ctx: &Ctx<'_>) -> Result<Done<CorpusData>> {
    let cfg = ctx.cfg;
    let keywords = load_keywords(&cfg.paths.keywords)?;
    let w = &cfg.window;
    let window = AnalysisWindow::new(w.start_date, w.takeover_day_index, w.end_day_index, keywords)?;
    let load = LoadOptions {
        policy: if cfg.corpus.strict {
            MalformedPolicy::Abort
        } else {
            MalformedPolicy::SkipAndLog
        },
        window_length: Some(window.len()),
    };
    let tweets = load_tweets(&cfg.paths.tweets, &load)?;
    let users = load_users(
        &cfg.paths.users,
        &LoadOptions {
            window_length: None,
            ..load
        },
    )?;

    let matched = keyword_filter(&tweets.records, &window.keywords)?;
    let unscored = matched.iter().filter(|t| t.hate_score.is_none()).count();
    let scored = if unscored > 0 && cfg.corpus.fallback_scorer {
        let filled = fallback_scorer(&matched, &window.keywords)?;
        matched
            .into_iter()
            .zip(filled)
            .map(|(orig, fb)| if orig.hate_score.is_some() { orig } else { fb })
            .collect()
    } else {
        matched
    };
    let hateful = hate_threshold_filter(&scored, cfg.corpus.hate_threshold)?;
    let contributors = key_contributors(&hateful, cfg.corpus.min_hateful)?;

    let pre = hateful.iter().filter(|t| window.is_pre(t.day)).count();
    let summary = json!({
        "tweets": tweets.records.len(),
        "tweets_rejected": tweets.rejected.len(),
        "users": users.records.len(),
        "users_rejected": users.rejected.len(),
        "keyword_matches": scored.len(),
        "fallback_scored": if cfg.corpus.fallback_scorer { unscored } else { 0 },
        "hateful": hateful.len(),
        "hateful_pre": pre,
        "hateful_post": hateful.len() - pre,
        "key_contributors": contributors.len(),
        "hate_threshold": cfg.corpus.hate_threshold,
        "min_hateful": cfg.corpus.min_hateful,
        "window": {
            "start_date": window.start_day,
            "takeover_date": window.date_of(window.takeover_day_index),
            "end_date": window.date_of(window.end_day_index),
            "takeover_day_index": window.takeover_day_index,
            "end_day_index": window.end_day_index,
        },
    });
    ctx.write_json("corpus_summary.json", &summary)?;
    let kc: String = contributors.iter().map(|u| format!("{u}\n")).collect();
    ctx.write("key_contributors.txt", &kc)?;
    write_jsonl(&ctx.path("hateful_tweets.jsonl"), &hateful)?;
    let rejected = tweets.rejected.len() + users.rejected.len();
    Ok(Done::new(
        CorpusData {
            window,
            tweets: tweets.records,
            users: users.records,
            hateful,
            contributors,
        },
        &["corpus_summary.json", "key_contributors.txt", "hateful_tweets.jsonl"],
    )
    .note((rejected > 0).then(|| format!("{rejected} malformed line(s) skipped"))))
}

fn lexshift_stage(ctx: &Ctx<'_>, data: &CorpusData) -> Result<Done<()>> {
    let cfg = &ctx.cfg.lexshift;
    let lemmas = match &ctx.cfg.paths.lemmas {
        Some(p) => LemmaDict::load(p)?,
        None => LemmaDict::default(),
    };
    let pre_proc = Preprocessor::lexical(lemmas);
    let originals: Vec<&TweetRecord> = data.hateful.iter().filter(|t| t.kind != TweetKind::Retweet).collect();
    let (pre_t, post_t): (Vec<&TweetRecord>, Vec<&TweetRecord>) =
        originals.iter().partition(|t| data.window.is_pre(t.day));
    let count = |ts: &[&TweetRecord]| CountTable::from_tokens(ts.iter().flat_map(|t| pre_proc.tokens(&t.text)));
    let (pre, post) = (count(&pre_t), count(&post_t));

    let outputs = [
        "scored_words.csv",
        "representative_pre.csv",
        "representative_post.csv",
        "category_shift.csv",
        "lexshift_summary.json",
    ];
    let mut notes = Vec::new();
    if pre.total() == 0 || post.total() == 0 {
        notes.push("one period has no hateful tokens; no words scored".to_string());
        for f in &outputs[..3] {
            write_scored_csv(&ctx.path(f), &[])?;
        }
    } else {
        let mut vocab: BTreeSet<&str> = pre.words().collect();
        vocab.extend(post.words());
        let prior = match &ctx.cfg.paths.background {
            Some(p) => PriorTable::from_background(&CountTable::load_tsv(p)?, vocab.iter().copied(), cfg.prior_scale)?,
            None => {
                let mut both = pre.clone();
                for (w, c) in post.iter() {
                    both.add(w, c);
                }
                PriorTable::from_background(&both, vocab.iter().copied(), cfg.prior_scale)?
            }
        };
        let prior = match cfg.prior_floor {
            Some(f) => prior.with_floor(f),
            None => prior,
        };
        let scored = log_odds_dirichlet(&pre, &post, &prior)?;
        let totals = (pre.total(), post.total());
        write_scored_csv(&ctx.path(outputs[0]), &scored)?;
        let top = representative_words(&scored, cfg.top_k, cfg.min_freq_frac, Side::Top, totals)?;
        let bottom = representative_words(&scored, cfg.top_k, cfg.min_freq_frac, Side::Bottom, totals)?;
        write_scored_csv(&ctx.path(outputs[1]), &top)?;
        write_scored_csv(&ctx.path(outputs[2]), &bottom)?;
    }

    let labelled = |ts: &[&TweetRecord]| -> Vec<TweetRecord> {
        ts.iter()
            .filter(|t| t.category.is_some())
            .map(|t| (*t).clone())
            .collect()
    };
    let (pre_c, post_c) = (labelled(&pre_t), labelled(&post_t));
    let unlabelled = originals.len() - pre_c.len() - post_c.len();
    if unlabelled > 0 {
        notes.push(format!(
            "{unlabelled} tweet(s) without category left out of the composition test"
        ));
    }
    let shifts = if pre_c.is_empty() || post_c.is_empty() {
        Vec::new()
    } else {
        composition_shift(&pre_c, &post_c)?
    };
    write_category_csv(&ctx.path(outputs[3]), &shifts)?;
    ctx.write_json(
        outputs[4],
        &json!({
            "pre_tweets": pre_t.len(),
            "post_tweets": post_t.len(),
            "pre_tokens": pre.total(),
            "post_tokens": post.total(),
            "prior": if ctx.cfg.paths.background.is_some() { "background" } else { "pooled" },
        }),
    )?;
    Ok(Done::new((), &outputs).note((!notes.is_empty()).then(|| notes.join("; "))))
}

fn embedshift_stage(ctx: &Ctx<'_>, data: &CorpusData) -> Result<Done<()>> {
    let pairs = match &ctx.cfg.paths.pairs {
        Some(p) => parse_pairs(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => Vec::new(),
    };
    let pre_proc = Preprocessor::tweet();
    let (mut pre, mut post) = (Vec::new(), Vec::new());
    for t in &data.tweets {
        if t.kind == TweetKind::Retweet || !data.contributors.contains(&t.user_id) {
            continue;
        }
        let s = pre_proc.stream(&t.id, &t.text);
        if data.window.is_pre(t.day) {
            pre.push(s);
        } else {
            post.push(s);
        }
    }
    let seed = ctx.seed(Stage::Embedshift);
    let sgns = ctx.cfg.embedshift.sgns(seed);
    let train = |c| match train_sgns(c, &sgns) {
        Ok(m) => Ok(Some(m)),
        Err(Error::EmptyVocabulary) => Ok(None),
        Err(e) => Err(e),
    };
    let (m_pre, m_post) = (train(&pre)?, train(&post)?);
    let mut outputs = vec!["similarity_shift.csv", "embedshift_summary.json"];
    let mut note = None;
    let rows = match (&m_pre, &m_post) {
        (Some(a), Some(b)) => {
            write_model(&ctx.path("model_pre.txt"), a)?;
            write_model(&ctx.path("model_post.txt"), b)?;
            outputs.extend(["model_pre.txt", "model_post.txt"]);
            similarity_shift(a, b, &pairs)
        }
        _ => {
            note = Some("a period has no vocabulary after min_count pruning; no models trained".to_string());
            Vec::new()
        }
    };
    write_similarity_csv(&ctx.path("similarity_shift.csv"), &rows)?;
    ctx.write_json(
        "embedshift_summary.json",
        &json!({
            "note": CROSS_MODEL_NOTE,
            "seed": seed,
            "pre_sentences": pre.len(),
            "post_sentences": post.len(),
            "pre_vocab": m_pre.as_ref().map(|m| m.vocab_size()),
            "post_vocab": m_post.as_ref().map(|m| m.vocab_size()),
            "pairs": pairs.len(),
        }),
    )?;
    Ok(Done::new((), &outputs).note(note))
}

/// Hateful originals by key contributors plus the interactions pointing at
/// them, from the whole corpus.
pub fn graph_source(data: &CorpusData, mode: EdgeMode) -> Vec<TweetRecord> {
    let seeds: Vec<&TweetRecord> = data
        .hateful
        .iter()
        .filter(|t| t.kind != TweetKind::Retweet && data.contributors.contains(&t.user_id))
        .collect();
    let ids: BTreeSet<&str> = seeds.iter().map(|t| t.id.as_str()).collect();
    let wanted = |k: TweetKind| match mode {
        EdgeMode::RetweetOnly => k == TweetKind::Retweet,
        EdgeMode::AllInteractions => k.is_interaction(),
    };
    let mut out: Vec<TweetRecord> = seeds.into_iter().cloned().collect();
    out.extend(
        data.tweets
            .iter()
            .filter(|t| {
                wanted(t.kind) && t.ref_id.as_deref().is_some_and(|r| ids.contains(r)) && !ids.contains(t.id.as_str())
            })
            .cloned(),
    );
    out
}

fn slope_json(series: &MetricSeries, t1: u32) -> serde_json::Value {
    match growth_rate_comparison(series, t1) {
        Ok(g) => json!(g),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn graph_stage(ctx: &Ctx<'_>, data: &CorpusData) -> Result<Done<TemporalEdgeList>> {
    let g = &ctx.cfg.graph;
    let t1 = data.window.takeover_day_index;
    let end = data.window.end_day_index;
    let source = graph_source(data, g.mode);
    let built = build_edges(
        &source,
        &BuildOptions {
            mode: g.mode,
            directed: g.directed,
            allow_self_loops: false,
            end_day: end,
        },
    )?;
    let edges = built.edges;
    edges.write_csv(&ctx.path("edges.csv"))?;
    let influx = edge_influx_series(&edges);
    let degree = avg_degree_centrality_series(&edges);
    let components = component_count_series(&edges);
    write_metrics_csv(&ctx.path("metrics.csv"), &[&influx, &degree, &components])?;
    let growth = json!({
        "edges": edges.len(),
        "users": edges.users().len(),
        "unresolved": built.unresolved,
        "self_loops_dropped": built.self_loops,
        "edge_influx": edge_influx(&edges, t1)?,
        "avg_degree_centrality": slope_json(&degree, t1),
        "component_count": slope_json(&components, t1),
    });
    ctx.write_json("growth.json", &growth)?;

    let seed = ctx.seed(Stage::Graph);
    let early = t1.saturating_sub(g.sample_offset_days);
    let samples = [(early, "sample_pre"), (end, "sample_end")];
    let target = samples
        .iter()
        .map(|&(d, _)| edges.snapshot(d as i64).map(|s| s.node_count()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .unwrap_or(0)
        .min(g.forest_fire_nodes);
    let mut written = Vec::new();
    if target > 0 {
        for (i, &(day, stem)) in samples.iter().enumerate() {
            let snap = edges.snapshot(day as i64)?;
            let sample = forest_fire_sample(&snap, target, g.p_forward, seed.wrapping_add(i as u64))?;
            ctx.write(&format!("{stem}.dot"), &sample.to_dot())?;
            ctx.write_json(&format!("{stem}.json"), &sample.to_json())?;
            written.push(format!("{stem}.dot"));
            written.push(format!("{stem}.json"));
        }
    }
    let mut done = Done::new(edges, &["edges.csv", "metrics.csv", "growth.json"]);
    done.outputs.extend(written);
    Ok(done.note((target == 0).then(|| "snapshot is empty; no forest-fire samples".to_string())))
}

fn influence_stage(ctx: &Ctx<'_>, data: &CorpusData, edges: &TemporalEdgeList) -> Result<Done<Vec<MprScore>>> {
    let cfg = &ctx.cfg.influence;
    let series = PageRankSeries::compute(&edges.snapshots(), &cfg.pagerank())?;
    series.write_csv(&ctx.path("pagerank_series.csv"))?;
    let t1 = data.window.takeover_day_index as usize;
    let t2 = series.timesteps();
    let scores = mpr_scores(&series, t1, t2, cfg.f3_window)?;
    let excluded = match &ctx.cfg.paths.exclusions {
        Some(p) => load_exclusions(p)?,
        None => BTreeSet::new(),
    };
    let set = influencer_intersection(&scores, cfg.top_k).exclude(&excluded);
    write_mpr_csv(&ctx.path("mpr.csv"), &scores, &set)?;
    ctx.write(
        "influencers.txt",
        &set.users.iter().map(|u| format!("{u}\n")).collect::<String>(),
    )?;
    let note = write_bio_words(ctx, &set, &data.users)?;
    ctx.write_json(
        "influence_summary.json",
        &json!({
            "users": scores.len(),
            "top_k": cfg.top_k,
            "influencers": set.len(),
            "excluded": excluded.len(),
            "t1": t1,
            "t2": t2,
        }),
    )?;
    Ok(Done::new(
        scores,
        &[
            "pagerank_series.csv",
            "mpr.csv",
            "influencers.txt",
            "bio_words.csv",
            "influence_summary.json",
        ],
    )
    .note(note))
}

fn write_bio_words(ctx: &Ctx<'_>, set: &InfluencerSet, users: &[UserProfile]) -> Result<Option<String>> {
    let lemmas = match &ctx.cfg.paths.lemmas {
        Some(p) => LemmaDict::load(p)?,
        None => LemmaDict::default(),
    };
    let pre = Preprocessor::lexical(lemmas);
    let path = ctx.path("bio_words.csv");
    let mut all = CountTable::new();
    for u in users {
        for t in pre.tokens(&u.bio) {
            all.add(&t, 1);
        }
    }
    let has_bio = users
        .iter()
        .any(|u| set.contains(&u.user_id) && !pre.tokens(&u.bio).is_empty());
    if set.is_empty() || !has_bio {
        write_scored_csv(&path, &[])?;
        return Ok(Some("no influencer bios to profile".to_string()));
    }
    let prior = PriorTable::from_background(&all, all.words(), None)?;
    let scored = bio_profile(set, users, &prior, &pre)?;
    write_scored_csv(&path, &scored)?;
    Ok(None)
}

fn earlydetect_stage(ctx: &Ctx<'_>, data: &CorpusData, scores: &[MprScore]) -> Result<Done<()>> {
    let cfg = &ctx.cfg.earlydetect;
    let outputs = ["spearman.csv", "report.json"];
    let target = mpr_target(scores, cfg.target);
    let profiles: Vec<UserProfile> = data
        .users
        .iter()
        .filter(|u| target.contains_key(&u.user_id))
        .cloned()
        .collect();
    if profiles.len() < MIN_REGRESSION_USERS {
        write_correlations_csv(&ctx.path(outputs[0]), &[])?;
        ctx.write_json(
            outputs[1],
            &json!({ "target": cfg.target, "users": profiles.len(), "reports": [] }),
        )?;
        return Ok(Done::new((), &outputs).note(Some(format!(
            "{} MPR users with profiles, at least {MIN_REGRESSION_USERS} needed",
            profiles.len()
        ))));
    }
    let f1 = build_f1(&profiles)?;

    let t1 = data.window.takeover_day_index;
    let authorship: BTreeMap<String, String> = data
        .tweets
        .iter()
        .filter(|t| target.contains_key(&t.user_id))
        .map(|t| (t.id.clone(), t.user_id.clone()))
        .collect();
    let embeddings = match &ctx.cfg.paths.embeddings {
        Some(p) => load_embeddings(p)?,
        None => {
            let h = HashingEmbedder::new(cfg.hash_dim);
            data.tweets
                .iter()
                .filter(|t| t.day < t1 && target.contains_key(&t.user_id))
                .map(|t| (t.id.clone(), h.embed(&t.text)))
                .collect()
        }
    };
    let f2 = build_f2(&embeddings, &authorship, Some(&f1.users))?;
    let both = combine(&f1, &f2.matrix)?;

    let mut corr = feature_correlations(&f1, &target);
    corr.extend(feature_correlations(&f2.matrix, &target));
    write_correlations_csv(&ctx.path(outputs[0]), &corr)?;

    let opts = EvalOptions {
        train_fraction: cfg.train_fraction,
        seed: ctx.seed(Stage::Earlydetect),
    };
    let boost = AdaBoostConfig {
        rounds: cfg.rounds,
        max_depth: cfg.max_depth,
        seed: opts.seed,
    };
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    let sets: [&FeatureMatrix; 3] = [&f1, &f2.matrix, &both];
    for x in sets {
        if x.n_rows() == 0 {
            errors.push(json!({ "feature_set": x.feature_set, "error": "no users" }));
            continue;
        }
        match fit_linear(x, &target, &opts) {
            Ok((_, r)) => reports.push(r),
            Err(e) => errors.push(json!({ "model": "linear", "feature_set": x.feature_set, "error": e.to_string() })),
        }
        match fit_adaboost(x, &target, &boost, &opts) {
            Ok((_, r)) => reports.push(r),
            Err(e) => errors.push(json!({ "model": "adaboost", "feature_set": x.feature_set, "error": e.to_string() })),
        }
    }
    ctx.write_json(
        outputs[1],
        &json!({
            "target": cfg.target,
            "users": profiles.len(),
            "f2_excluded": f2.excluded.len(),
            "reports": reports,
            "errors": errors,
        }),
    )?;
    Ok(Done::new((), &outputs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_dependencies() {
        assert!(Stage::Earlydetect.requires(Stage::Corpus));
        assert!(Stage::Influence.requires(Stage::Graph));
        assert!(!Stage::Influence.requires(Stage::Lexshift));
        assert!(Stage::Lexshift.requires(Stage::Lexshift));
    }

    #[test]
    fn seeds_differ_by_stage() {
        assert_ne!(derive_seed(0, "graph"), derive_seed(0, "influence"));
        assert_ne!(derive_seed(0, "graph"), derive_seed(1, "graph"));
        assert_eq!(derive_seed(7, "graph"), derive_seed(7, "graph"));
    }

    #[test]
    fn exit_codes() {
        let rep = |status, io_failure| StageReport {
            stage: Stage::Graph,
            status,
            message: None,
            outputs: vec![],
            io_failure,
        };
        let s = |v| RunSummary {
            out_dir: PathBuf::new(),
            stages: v,
        };
        assert_eq!(
            s(vec![rep(StageStatus::Ok, false), rep(StageStatus::Skipped, false)]).exit_code(),
            0
        );
        assert_eq!(s(vec![rep(StageStatus::Failed, false)]).exit_code(), 2);
        assert_eq!(
            s(vec![rep(StageStatus::Failed, false), rep(StageStatus::Failed, true)]).exit_code(),
            3
        );
    }
}
