//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::time::{Duration, Instant};

use modshift_core::corpus::TokenStream;
use modshift_core::earlydetect::{ols, spearman, FeatureSet};
use modshift_core::embedshift::{
    phrase_similarity, sgns_gradient, sgns_loss, similarity_shift, train_sgns, SgnsConfig,
};
use modshift_core::influence::{mpr_scores, pagerank, F3Window, PageRankConfig, PageRankSeries};
use modshift_core::lexshift::{log_odds_dirichlet, CountTable, PriorTable};
use modshift_core::pipeline::{run, PipelineConfig, RunOptions, Stage, StageStatus};
use modshift_core::stats::{mean, r2_score, two_proportion_ztest, Continuity};
use modshift_core::synth::{generate_synthetic, scaled_top_k, SynthSpec};
use modshift_core::tempograph::{component_count_series, Snapshot, TemporalEdge, TemporalEdgeList};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what)
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("PageRank correctness", c1_pagerank),
        ("MPR oracle equivalence", c2_mpr_oracle),
        ("planted-influencer recovery", c3_recovery),
        ("regime-shift metrology", c4_regime_shift),
        ("connected components", c5_components),
        ("log-odds", c6_log_odds),
        ("SGNS", c7_sgns),
        ("statistics", c8_statistics),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("CRITERION {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("CRITERION {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn graph(edges: &[(&str, &str)]) -> Snapshot {
    let list: Vec<TemporalEdge> = edges.iter().map(|&(a, b)| TemporalEdge::new(a, b, 0)).collect();
    TemporalEdgeList::new(list, true, 0, false)
        .unwrap()
        .snapshot(0)
        .unwrap()
}

fn c1_pagerank() -> Outcome {
    let start = Instant::now();
    let cfg = PageRankConfig::default();
    let mut worst_sum: f64 = 0.0;
    for k in 2..=12 {
        let names: Vec<String> = (0..k).map(|i| format!("n{i}")).collect();
        let edges: Vec<(&str, &str)> = (0..k)
            .map(|i| (names[i].as_str(), names[(i + 1) % k].as_str()))
            .collect();
        let pr = pagerank(&graph(&edges), &cfg).map_err(|e| e.to_string())?;
        for (u, v) in &pr.scores {
            check((v - 1.0 / k as f64).abs() <= 1e-9, format!("{k}-cycle: {u} = {v}"))?;
        }
        worst_sum = worst_sum.max((pr.scores.values().sum::<f64>() - 1.0).abs());
    }

    // A and C point at B, B dangles. With x = PR(A) = PR(C) and PR(B) = 1 - 2x:
    // x = (1-d)/3 + d(1-2x)/3, so x = 1 / (3 + 2d).
    let d = cfg.damping;
    let x = 1.0 / (3.0 + 2.0 * d);
    let pr = pagerank(&graph(&[("A", "B"), ("C", "B")]), &cfg).map_err(|e| e.to_string())?;
    let got = (pr.scores["A"], pr.scores["B"], pr.scores["C"]);
    check(
        (x - 0.2128).abs() < 1e-3 && (1.0 - 2.0 * x - 0.5745).abs() < 1e-3,
        format!("oracle off: {x}"),
    )?;
    for (g, want) in [(got.0, x), (got.1, 1.0 - 2.0 * x), (got.2, x)] {
        check((g - want).abs() < 1e-3, format!("A->B,C->B gave {got:?}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let n = rng.random_range(2..40);
        let names: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
        let m = rng.random_range(1..120);
        let edges: Vec<(&str, &str)> = (0..m)
            .map(|_| {
                (
                    names[rng.random_range(0..n)].as_str(),
                    names[rng.random_range(0..n)].as_str(),
                )
            })
            .filter(|(a, b)| a != b)
            .collect();
        if edges.is_empty() {
            continue;
        }
        let pr = pagerank(&graph(&edges), &cfg).map_err(|e| e.to_string())?;
        worst_sum = worst_sum.max((pr.scores.values().sum::<f64>() - 1.0).abs());
    }
    check(worst_sum <= 1e-9, format!("sum off by {worst_sum:e}"))?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!(
        "cycles uniform, fixture ({:.4}, {:.4}, {:.4}), max |sum-1| {worst_sum:.1e}, {elapsed:.2?}",
        got.0, got.1, got.2
    ))
}

// f1, f2, f3 written out from the definitions over user -> PR maps.
fn mpr_oracle(maps: &[BTreeMap<String, f64>], user: &str, t1: usize, t2: usize) -> (f64, f64, f64) {
    let pr = |t: usize| maps[t - 1].get(user).copied().unwrap_or(0.0);
    let mut f1 = 0.0;
    let mut f2: f64 = 0.0;
    for t in 2..=t2 {
        f1 += (pr(t) - pr(t - 1)).abs();
        f2 = f2.max((pr(t) - pr(t - 1)).abs());
    }
    let before = (1..=t1).map(pr).fold(f64::MIN, f64::max);
    let after = (t1..=t2).map(pr).fold(f64::MIN, f64::max);
    (f1, f2, (before - after).abs())
}

fn c2_mpr_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = 0;
    for case in 0..100 {
        let t2 = rng.random_range(2..=10);
        let n_users = rng.random_range(1..=50);
        let maps: Vec<BTreeMap<String, f64>> = (0..t2)
            .map(|_| {
                let present: Vec<usize> = (0..n_users).filter(|_| rng.random_bool(0.7)).collect();
                let raw: Vec<f64> = present.iter().map(|_| rng.random_range(0.01..1.0)).collect();
                let total: f64 = raw.iter().sum();
                present
                    .iter()
                    .zip(raw)
                    .map(|(u, v)| (format!("u{u:02}"), v / total))
                    .collect()
            })
            .collect();
        let t1 = rng.random_range(1..t2);
        let series = PageRankSeries::from_maps(&maps);
        let scores = mpr_scores(&series, t1, t2, F3Window::Overlapping).map_err(|e| e.to_string())?;
        for s in &scores {
            let (f1, f2, f3) = mpr_oracle(&maps, &s.user, t1, t2);
            check(
                s.f1 == f1 && s.f2 == f2 && s.f3 == f3,
                format!(
                    "case {case} user {}: ({}, {}, {}) vs oracle ({f1}, {f2}, {f3})",
                    s.user, s.f1, s.f2, s.f3
                ),
            )?;
            check(s.f1 >= s.f2, format!("case {case} user {}: f1 < f2", s.user))?;
            compared += 1;
        }
    }
    Ok(format!(
        "100 random series, {compared} users match exactly, f1 >= f2 throughout"
    ))
}

fn synth_bundle(dir: &Path, spec: &SynthSpec) -> PipelineConfig {
    let corpus = generate_synthetic(spec).expect("valid spec");
    corpus.write(dir).expect("writable temp dir");
    let mut cfg = PipelineConfig::for_data_dir(dir, spec.start_date, spec.takeover_day, spec.days - 1);
    cfg.seed = spec.seed;
    cfg.influence.top_k = corpus.truth.suggested_top_k;
    cfg
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).expect("output exists")).expect("valid json")
}

fn c3_recovery() -> Outcome {
    let start = Instant::now();
    let k = scaled_top_k(2000);
    let mut per_seed = Vec::new();
    for seed in 0..10 {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let spec = SynthSpec {
            seed,
            ..Default::default()
        };
        check(
            spec.n_users == 2000 && spec.days == 63 && spec.n_planted_bridges == 20,
            "spec defaults changed".into(),
        )?;
        let cfg = synth_bundle(tmp.path(), &spec);
        check(
            cfg.influence.top_k == k,
            format!("top_k {} != {k}", cfg.influence.top_k),
        )?;
        let summary = run(
            &cfg,
            &RunOptions {
                only: Some(Stage::Influence),
            },
        )
        .map_err(|e| e.to_string())?;
        check(!summary.any_failed(), format!("seed {seed}: {:?}", summary.stages))?;
        let found: BTreeSet<String> = std::fs::read_to_string(cfg.paths.output.join("influencers.txt"))
            .map_err(|e| e.to_string())?
            .lines()
            .map(String::from)
            .collect();
        let truth = read_json(&tmp.path().join("ground_truth.json"));
        let planted: Vec<&str> = truth["planted_bridges"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        per_seed.push(planted.iter().filter(|u| found.contains(**u)).count());
    }
    let good = per_seed.iter().filter(|&&n| n * 5 >= 20 * 4).count();
    let elapsed = start.elapsed();
    let detail = format!("k={k}, recovered of 20 per seed {per_seed:?}, {good}/10 seeds >= 80%, {elapsed:.1?}");
    check(good >= 8 && elapsed < Duration::from_secs(120), detail.clone())?;
    Ok(detail)
}

fn growth_of(spec: &SynthSpec) -> Result<Value, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = synth_bundle(tmp.path(), spec);
    let summary = run(
        &cfg,
        &RunOptions {
            only: Some(Stage::Graph),
        },
    )
    .map_err(|e| e.to_string())?;
    check(!summary.any_failed(), format!("{:?}", summary.stages))?;
    Ok(read_json(&cfg.paths.output.join("growth.json")))
}

fn c4_regime_shift() -> Outcome {
    let mut influx = Vec::new();
    for seed in 0..10 {
        let spec = SynthSpec {
            seed,
            ..Default::default()
        };
        check(
            ((spec.post_edge_rate / spec.pre_edge_rate - 1.0) * 100.0 - 170.0).abs() < 1e-9,
            "generator not configured for +170%".into(),
        )?;
        let g = growth_of(&spec)?;
        let pct = g["edge_influx"]["pct_change"].as_f64().ok_or("no influx")?;
        check((pct - 170.0).abs() <= 10.0, format!("seed {seed}: influx {pct:.1}%"))?;
        let deg = &g["avg_degree_centrality"];
        let comp = &g["component_count"];
        let (dp, dq) = (
            deg["pre_slope"].as_f64().ok_or("no slope")?,
            deg["post_slope"].as_f64().ok_or("no slope")?,
        );
        let (cp, cq) = (
            comp["pre_slope"].as_f64().ok_or("no slope")?,
            comp["post_slope"].as_f64().ok_or("no slope")?,
        );
        check(dq > dp, format!("seed {seed}: degree slope {dp:e} -> {dq:e}"))?;
        check(cq < cp, format!("seed {seed}: component slope {cp} -> {cq}"))?;
        influx.push(pct);
    }
    let mut null = Vec::new();
    for seed in 0..10 {
        let g = growth_of(&SynthSpec::null_regime(seed))?;
        let pct = g["edge_influx"]["pct_change"].as_f64().ok_or("no influx")?;
        check(pct.abs() < 10.0, format!("null seed {seed}: influx {pct:.1}%"))?;
        null.push(pct);
    }
    let fmt = |v: &[f64]| v.iter().map(|p| format!("{p:.1}")).collect::<Vec<_>>().join(" ");
    Ok(format!(
        "influx % [{}], null % [{}], degree slope up and component slope down on 10/10 seeds",
        fmt(&influx),
        fmt(&null)
    ))
}

fn bfs_components(edges: &[TemporalEdge], seeds: &[String], day: u32) -> usize {
    let mut adj: BTreeMap<&str, Vec<&str>> = seeds.iter().map(|s| (s.as_str(), Vec::new())).collect();
    for e in edges.iter().filter(|e| e.day <= day) {
        adj.entry(&e.src).or_default().push(&e.dst);
        adj.entry(&e.dst).or_default().push(&e.src);
    }
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        count += 1;
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &m in &adj[n] {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
    }
    count
}

fn c5_components() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut snapshots = 0;
    for g in 0..50 {
        let n = rng.random_range(1..=200);
        let end = rng.random_range(1..30u32);
        let m = rng.random_range(0..2 * n);
        let edges: Vec<TemporalEdge> = (0..m)
            .map(|_| {
                TemporalEdge::new(
                    format!("v{}", rng.random_range(0..n)),
                    format!("v{}", rng.random_range(0..n)),
                    rng.random_range(0..=end),
                )
            })
            .filter(|e| e.src != e.dst)
            .collect();
        let seeds: Vec<String> = (0..n)
            .filter(|_| rng.random_bool(0.1))
            .map(|i| format!("v{i}"))
            .collect();
        let list = TemporalEdgeList::new(edges.clone(), rng.random_bool(0.5), end, false)
            .map_err(|e| e.to_string())?
            .with_seeds(seeds.clone());
        let series = component_count_series(&list);
        for &(day, v) in &series.values {
            let want = bfs_components(&edges, &seeds, day);
            check(
                v == want as f64,
                format!("graph {g} day {day}: union-find {v} vs BFS {want}"),
            )?;
            snapshots += 1;
        }
    }
    Ok(format!("50 random temporal graphs, {snapshots} snapshots agree"))
}

fn c6_log_odds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let words: Vec<String> = (0..rng.random_range(2..30)).map(|i| format!("w{i}")).collect();
        let table = |rng: &mut ChaCha8Rng| {
            CountTable::from_counts(words.iter().map(|w| (w.as_str(), rng.random_range(0..50u64))))
        };
        let (a, b) = (table(&mut rng), table(&mut rng));
        let prior = PriorTable::uniform(words.iter().map(String::as_str), rng.random_range(0.05..2.0))
            .map_err(|e| e.to_string())?;
        let ab = log_odds_dirichlet(&a, &b, &prior).map_err(|e| e.to_string())?;
        let ba: BTreeMap<String, f64> = log_odds_dirichlet(&b, &a, &prior)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|s| (s.word, s.zscore))
            .collect();
        for s in &ab {
            check(s.zscore == -ba[&s.word], format!("antisymmetry broken for {}", s.word))?;
        }
        for s in log_odds_dirichlet(&a, &a, &prior).map_err(|e| e.to_string())? {
            check(
                s.zscore == 0.0,
                format!("identical corpora gave {} for {}", s.zscore, s.word),
            )?;
        }
    }

    let ci = CountTable::from_counts([("bad", 5), ("good", 5)]);
    let cj = CountTable::from_counts([("bad", 1), ("good", 9)]);
    let alpha: BTreeMap<String, f64> = [("bad".to_string(), 0.5), ("good".to_string(), 0.5)].into();
    let prior = PriorTable::new(alpha, 1.0).map_err(|e| e.to_string())?;
    let z_bad = log_odds_dirichlet(&ci, &cj, &prior)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|s| s.word == "bad")
        .ok_or("bad not scored")?
        .zscore;
    // delta = ln(5.5/5.5) - ln(1.5/9.5); sigma^2 = 1/5.5 + 1/1.5
    let oracle = -(1.5f64 / 9.5).ln() / (1.0 / 5.5 + 1.0 / 1.5f64).sqrt();
    check(
        (z_bad - oracle).abs() < 1e-9 && (z_bad - 2.00).abs() < 1e-2,
        format!("z(bad) = {z_bad}, oracle {oracle}"),
    )?;

    let (z, p) = two_proportion_ztest(50, 1000, 80, 1000, Continuity::Yates);
    check((p - 0.0087).abs() < 1e-3, format!("z-test p = {p}"))?;
    Ok(format!("antisymmetry and zero-on-identical exact over 50 random tables, z(bad) = {z_bad:.4}, z-test z = {z:.3} p = {p:.5}"))
}

fn stream(id: usize, toks: &[&str]) -> TokenStream {
    TokenStream {
        tweet_id: id.to_string(),
        tokens: toks.iter().map(|s| s.to_string()).collect(),
    }
}

fn small_sgns(seed: u64) -> SgnsConfig {
    SgnsConfig {
        dim: 16,
        window: 3,
        negatives: 5,
        epochs: 10,
        min_count: 1,
        subsample: 0.0,
        learning_rate: 0.05,
        seed,
        ..Default::default()
    }
}

fn c7_sgns() -> Outcome {
    // Five word vectors: center, context and three negatives.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dim = 8;
    let mut vecs: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    let loss = |v: &[Vec<f64>]| sgns_loss(&v[0], &v[1], &[&v[2], &v[3], &v[4]]);
    let g = sgns_gradient(&vecs[0], &vecs[1], &[&vecs[2], &vecs[3], &vecs[4]]);
    let analytic = [
        g.center,
        g.context,
        g.negatives[0].clone(),
        g.negatives[1].clone(),
        g.negatives[2].clone(),
    ];
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for w in 0..5 {
        for k in 0..dim {
            let orig = vecs[w][k];
            vecs[w][k] = orig + h;
            let up = loss(&vecs);
            vecs[w][k] = orig - h;
            let down = loss(&vecs);
            vecs[w][k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[w][k];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
        }
    }
    check(worst < 1e-4, format!("gradient relative error {worst:e}"))?;

    let fruit = ["apple", "banana", "cherry", "grape", "mango"];
    let parts = ["engine", "wheel", "brake", "clutch", "piston"];
    let mut separated = 0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus: Vec<TokenStream> = (0..400)
            .map(|i| {
                let words = if i % 2 == 0 { &fruit } else { &parts };
                let toks: Vec<&str> = (0..8).map(|_| words[rng.random_range(0..5)]).collect();
                stream(i, &toks)
            })
            .collect();
        let model = train_sgns(&corpus, &small_sgns(seed)).map_err(|e| e.to_string())?;
        let sims = |xs: &[&str], ys: &[&str], same: bool| {
            let mut v = Vec::new();
            for (i, a) in xs.iter().enumerate() {
                for (j, b) in ys.iter().enumerate() {
                    if !same || i < j {
                        v.push(phrase_similarity(&model, a, b).unwrap());
                    }
                }
            }
            mean(&v)
        };
        let intra = (sims(&fruit, &fruit, true) + sims(&parts, &parts, true)) / 2.0;
        let inter = sims(&fruit, &parts, false);
        if intra > inter {
            separated += 1;
        }
    }
    check(separated == 10, format!("clusters separated on {separated}/10 seeds"))?;

    let politics = ["vote", "senate", "policy", "election", "congress", "ballot"];
    let mechanics = ["engine", "wheel", "brake", "clutch", "piston", "gearbox"];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sentence = |word: &str, ctx: &[&str], id: usize| {
        let mut toks: Vec<&str> = (0..6).map(|_| ctx[rng.random_range(0..ctx.len())]).collect();
        toks.insert(3, word);
        stream(id, &toks)
    };
    let (mut pre, mut post) = (Vec::new(), Vec::new());
    for i in 0..300 {
        pre.push(sentence("liberal", &politics, i));
        pre.push(sentence("commie", &mechanics, i));
        post.push(sentence("liberal", &politics, i));
        post.push(sentence("commie", &politics, i));
    }
    let before = train_sgns(&pre, &small_sgns(2)).map_err(|e| e.to_string())?;
    let after = train_sgns(&post, &small_sgns(2)).map_err(|e| e.to_string())?;
    let row = &similarity_shift(&before, &after, &[("liberal".into(), "commie".into())])[0];
    let (b, a) = (
        row.cos_before.ok_or("no cos_before")?,
        row.cos_after.ok_or("no cos_after")?,
    );
    check(a > b, format!("planted pair cos {b:.3} -> {a:.3}"))?;
    Ok(format!(
        "max gradient rel error {worst:.1e}, clusters separate on 10/10 seeds, planted pair cos {b:.3} -> {a:.3}"
    ))
}

fn c8_statistics() -> Outcome {
    let users: Vec<String> = (0..4).map(|i| format!("u{i}")).collect();
    let map = |v: &[f64]| -> BTreeMap<String, f64> { users.iter().cloned().zip(v.iter().copied()).collect() };
    let ranks = map(&[1.0, 2.0, 3.0, 4.0]);
    let rho = |v: &[f64]| spearman(&ranks, &map(v)).ok().flatten();
    let near = |r: Option<f64>, want: f64| r.is_some_and(|r| (r - want).abs() < 1e-12);
    check(near(rho(&[10.0, 20.0, 30.0, 40.0]), 1.0), "identity rho".into())?;
    check(near(rho(&[4.0, 3.0, 2.0, 1.0]), -1.0), "reversed rho".into())?;
    let tie = rho(&[1.0, 2.0, 2.0, 4.0]).ok_or("tie rho undefined")?;
    // average ranks (1, 2.5, 2.5, 4) against (1, 2, 3, 4): 4.5 / sqrt(4.5 * 5)
    let tie_oracle = 4.5 / (4.5f64 * 5.0).sqrt();
    check(
        (tie - tie_oracle).abs() < 1e-12 && (tie - 0.9487).abs() < 1e-4,
        format!("tie rho {tie}"),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let xs: Vec<f64> = (0..100).map(|_| rng.random_range(-10.0..10.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
    let m = ols(&xs, 1, &ys).map_err(|e| e.to_string())?;
    check(
        (m.coefficients[0] - 2.0).abs() < 1e-6 && (m.intercept - 3.0).abs() < 1e-6,
        format!("OLS gave {} x + {}", m.coefficients[0], m.intercept),
    )?;
    let y = [3.0, -1.0, 4.0, 1.5, 9.0, 2.6];
    let r2_mean = r2_score(&y, &[mean(&y); 6]).ok_or("R2 undefined")?;
    check(r2_mean.abs() < 1e-9, format!("mean predictor R2 {r2_mean}"))?;

    // Planted signal: bridges differ in profile and pre-takeover text.
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = synth_bundle(tmp.path(), &SynthSpec::default());
    let summary = run(
        &cfg,
        &RunOptions {
            only: Some(Stage::Earlydetect),
        },
    )
    .map_err(|e| e.to_string())?;
    check(!summary.any_failed(), format!("{:?}", summary.stages))?;
    let report = read_json(&cfg.paths.output.join("report.json"));
    let r2 = |fs: FeatureSet| -> Result<f64, String> {
        report["reports"]
            .as_array()
            .ok_or("no reports")?
            .iter()
            .find(|r| r["model"] == "linear" && r["feature_set"] == fs.to_string())
            .and_then(|r| r["r2_holdout"].as_f64())
            .ok_or_else(|| format!("no linear {fs} report"))
    };
    let (a, b, ab) = (r2(FeatureSet::F1)?, r2(FeatureSet::F2)?, r2(FeatureSet::F1F2)?);
    check(
        ab >= a.max(b) - 0.02,
        format!("holdout R2 F1 {a:.3} F2 {b:.3} F1+F2 {ab:.3}"),
    )?;
    Ok(format!(
        "spearman 1/-1/{tie:.4}, OLS exact, mean R2 {r2_mean:.0e}, holdout R2 F1 {a:.3} F2 {b:.3} F1+F2 {ab:.3}"
    ))
}

fn outputs_without_manifest(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = entry.map_err(|e| e.to_string())?.path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if name != "manifest.json" {
            out.insert(name, std::fs::read(&p).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn normalized_manifest(dir: &Path) -> Value {
    let mut m = read_json(&dir.join("manifest.json"));
    let obj = m.as_object_mut().unwrap();
    obj.remove("started_at");
    obj.remove("finished_at");
    obj["config"]["paths"].as_object_mut().unwrap().remove("output");
    m
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = synth_bundle(
        tmp.path(),
        &SynthSpec {
            seed: 9,
            ..Default::default()
        },
    );
    let mut times = Vec::new();
    for name in ["a", "b"] {
        cfg.paths.output = tmp.path().join(name);
        let start = Instant::now();
        let summary = run(&cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
        times.push(start.elapsed());
        check(
            summary.stages.iter().all(|r| r.status == StageStatus::Ok),
            format!("{:?}", summary.stages),
        )?;
    }
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let (fa, fb) = (outputs_without_manifest(&a)?, outputs_without_manifest(&b)?);
    check(fa.keys().eq(fb.keys()), "different file sets".into())?;
    for (name, bytes) in &fa {
        check(bytes == &fb[name], format!("{name} differs between runs"))?;
    }
    check(
        normalized_manifest(&a) == normalized_manifest(&b),
        "manifests differ beyond timestamps".into(),
    )?;
    let slowest = times.iter().max().copied().unwrap_or_default();
    check(slowest < Duration::from_secs(300), format!("full run took {slowest:?}"))?;
    Ok(format!(
        "{} output files byte-identical, manifest equal modulo timestamps, full run {slowest:.2?}",
        fa.len() + 1
    ))
}
