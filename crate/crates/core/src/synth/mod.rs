//! Synthetic two-regime retweet corpus with planted bridge users, lexical
//! shifts and a topic/keyword association shift. Stands in for the real
//! corpus in tests and demos.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;
use rand::distr::weighted::WeightedIndex;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{write_jsonl, Category, TweetKind, TweetRecord, UserProfile};
use crate::error::{Error, Result};

/// Population the default influencer cutoff of 1000 was chosen for.
pub const REFERENCE_POPULATION: usize = 6168;

/// The default top-k cutoff rescaled to a population of `n_users`.
pub fn scaled_top_k(n_users: usize) -> usize {
    (1000 * n_users).div_ceil(REFERENCE_POPULATION).max(1)
}

const FILLER: &[&str] = &[
    "people",
    "today",
    "think",
    "really",
    "going",
    "country",
    "world",
    "know",
    "time",
    "news",
    "right",
    "never",
    "again",
    "every",
    "thing",
    "about",
    "would",
    "could",
    "should",
    "these",
    "those",
    "always",
    "media",
    "truth",
    "twitter",
    "public",
    "speech",
    "watch",
    "video",
    "story",
    "week",
    "year",
    "night",
    "morning",
    "money",
    "power",
    "government",
    "school",
    "family",
    "children",
    "friends",
    "police",
    "city",
    "state",
    "nation",
    "history",
    "future",
    "change",
    "policy",
    "online",
    "account",
    "post",
    "reply",
    "follow",
    "thread",
    "read",
    "listen",
    "believe",
    "stop",
    "start",
];

const POLITICS: &[&str] = &[
    "vote",
    "senate",
    "election",
    "congress",
    "ballot",
    "campaign",
    "democrat",
    "republican",
];
const COLD_WAR: &[&str] = &[
    "soviet",
    "cuba",
    "kremlin",
    "stalin",
    "gulag",
    "propaganda",
    "regime",
    "bloc",
];
const BIO_WORDS: &[&str] = &[
    "music",
    "coffee",
    "travel",
    "father",
    "mother",
    "writer",
    "gamer",
    "sports",
    "fan",
    "proud",
    "veteran",
    "teacher",
    "nurse",
    "student",
    "dog",
    "lover",
    "faith",
    "tech",
    "photography",
    "reader",
];

/// Token-level plants: words whose rate changes at the takeover, and a topic
/// word that moves into a keyword's contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabSpec {
    /// Hate keywords; every hateful original contains one.
    pub keywords: Vec<String>,
    /// Words mostly used before the takeover.
    pub pre_words: Vec<String>,
    /// Words mostly used after it.
    pub post_words: Vec<String>,
    /// Probability that a tweet in the favoured period carries each shifted word.
    pub shift_rate: f64,
    /// (topic, keyword): the keyword shares the topic's contexts only after the takeover.
    pub similarity_pair: Option<(String, String)>,
    /// Bio word over-represented among planted bridges.
    pub bridge_bio_word: Option<String>,
}

impl Default for VocabSpec {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|w| w.to_string()).collect();
        VocabSpec {
            keywords: s(&[
                "vermin",
                "traitor",
                "scum",
                "parasite",
                "lowlife",
                "degenerate",
                "thug",
                "groomer",
            ]),
            pre_words: s(&["censorship", "banned", "shadowban"]),
            post_words: s(&["woke", "freedom", "elon", "unbanned"]),
            shift_rate: 0.3,
            similarity_pair: Some(("liberal".into(), "commie".into())),
            bridge_bio_word: Some("patriot".into()),
        }
    }
}

impl VocabSpec {
    /// No lexical plants: shifted word lists empty, no similarity pair.
    pub fn neutral() -> Self {
        VocabSpec {
            pre_words: Vec::new(),
            post_words: Vec::new(),
            similarity_pair: None,
            bridge_bio_word: None,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_users: usize,
    pub days: u32,
    pub takeover_day: u32,
    pub start_date: NaiveDate,
    /// Retweet edges per day before the takeover.
    pub pre_edge_rate: f64,
    /// Retweet edges per day from the takeover on.
    pub post_edge_rate: f64,
    pub n_planted_bridges: usize,
    pub community_count: usize,
    /// Fraction of community users who write originals.
    pub author_fraction: f64,
    /// Fraction of post-takeover edges that go through bridges.
    pub bridge_share: f64,
    /// Bridge edges land on the bridge's viral day with this relative weight.
    pub viral_weight: f64,
    /// Fraction of users reserved for isolated new pairs.
    pub fringe_fraction: f64,
    /// Probability an edge is an isolated new pair, per regime.
    pub fresh_pair_pre: f64,
    pub fresh_pair_post: f64,
    pub vocab: VocabSpec,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_users: 2000,
            days: 63,
            takeover_day: 31,
            start_date: NaiveDate::from_ymd_opt(2022, 9, 27).expect("valid date"),
            pre_edge_rate: 60.0,
            post_edge_rate: 162.0,
            n_planted_bridges: 20,
            community_count: 8,
            author_fraction: 0.3,
            bridge_share: 0.35,
            viral_weight: 40.0,
            fringe_fraction: 0.2,
            fresh_pair_pre: 0.1,
            fresh_pair_post: 0.01,
            vocab: VocabSpec::default(),
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Same edge rate on both sides, nothing planted.
    pub fn null_regime(seed: u64) -> Self {
        let base = SynthSpec::default();
        SynthSpec {
            post_edge_rate: base.pre_edge_rate,
            n_planted_bridges: 0,
            fresh_pair_post: base.fresh_pair_pre,
            vocab: VocabSpec::neutral(),
            seed,
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.days < 3 || self.takeover_day == 0 || self.takeover_day >= self.days - 1 {
            return bad(format!(
                "takeover_day {} must lie strictly inside a window of {} days",
                self.takeover_day, self.days
            ));
        }
        if self.n_planted_bridges >= self.n_users {
            return bad("planted bridges must be fewer than users".into());
        }
        if !(self.pre_edge_rate >= 0.0 && self.post_edge_rate >= 0.0) {
            return bad("edge rates must be non-negative".into());
        }
        if self.community_count == 0 {
            return bad("community_count must be at least 1".into());
        }
        for (name, v) in [
            ("author_fraction", self.author_fraction),
            ("bridge_share", self.bridge_share),
            ("fringe_fraction", self.fringe_fraction),
            ("fresh_pair_pre", self.fresh_pair_pre),
            ("fresh_pair_post", self.fresh_pair_post),
            ("shift_rate", self.vocab.shift_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.vocab.keywords.is_empty() {
            return bad("at least one keyword is needed".into());
        }
        let core = self.n_users - self.n_planted_bridges;
        let fringe = (core as f64 * self.fringe_fraction) as usize;
        if core - fringe < 2 * self.community_count {
            return bad("too few users for the requested communities".into());
        }
        Ok(())
    }

    /// Edges on `day`: whole-number increments of the running total, so each
    /// regime's mean daily count equals its rate up to rounding.
    pub fn edges_on(&self, day: u32) -> usize {
        let (rate, k) = if day < self.takeover_day {
            (self.pre_edge_rate, day)
        } else {
            (self.post_edge_rate, day - self.takeover_day)
        };
        ((k + 1) as f64 * rate).floor() as usize - (k as f64 * rate).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub planted_bridges: Vec<String>,
    pub pre_edge_rate: f64,
    pub post_edge_rate: f64,
    /// Percentage change implied by the two rates.
    pub expected_influx_pct: f64,
    pub pre_words: Vec<String>,
    pub post_words: Vec<String>,
    pub similarity_pair: Option<(String, String)>,
    pub bridge_bio_word: Option<String>,
    pub category_shift: Option<String>,
    pub suggested_top_k: usize,
    pub communities: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub tweets: Vec<TweetRecord>,
    pub users: Vec<UserProfile>,
    pub truth: GroundTruth,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Bridge,
    Author,
    Retweeter,
    FringeAuthor,
    FringeRetweeter,
}

struct User {
    id: String,
    role: Role,
    community: Option<usize>,
    activity: f64,
    indegree: usize,
}

struct Builder<'a> {
    spec: &'a SynthSpec,
    users: Vec<User>,
    tweets: Vec<TweetRecord>,
    // (user, day) -> id of that user's retweetable original
    originals: HashMap<(usize, u32), usize>,
    hateful: Vec<usize>,
    text_rng: ChaCha8Rng,
}

impl Builder<'_> {
    fn tweet_id(&self) -> String {
        format!("t{:07}", self.tweets.len())
    }

    fn text(&mut self, day: u32, hateful: bool) -> String {
        let v = &self.spec.vocab;
        let rng = &mut self.text_rng;
        let post = day >= self.spec.takeover_day;
        let n = rng.random_range(6..=10);
        let mut toks: Vec<String> = (0..n)
            .map(|_| FILLER.choose(rng).expect("filler").to_string())
            .collect();
        if hateful {
            toks.push(v.keywords.choose(rng).expect("keywords").clone());
        }
        let (favoured, other) = if post {
            (&v.post_words, &v.pre_words)
        } else {
            (&v.pre_words, &v.post_words)
        };
        for w in favoured {
            if rng.random::<f64>() < v.shift_rate {
                toks.push(w.clone());
            }
        }
        for w in other {
            if rng.random::<f64>() < v.shift_rate * 0.1 {
                toks.push(w.clone());
            }
        }
        if let Some((topic, kw)) = &v.similarity_pair {
            let roll: f64 = rng.random();
            if roll < 0.15 {
                toks.push(topic.clone());
                toks.extend((0..4).map(|_| POLITICS.choose(rng).expect("ctx").to_string()));
            } else if roll < 0.30 {
                toks.push(kw.clone());
                let ctx = if post { POLITICS } else { COLD_WAR };
                toks.extend((0..4).map(|_| ctx.choose(rng).expect("ctx").to_string()));
            }
        }
        toks.shuffle(rng);
        toks.join(" ")
    }

    fn category(&mut self, day: u32) -> Category {
        // planted composition shift: sexual-orientation hate grows after the takeover
        let post = day >= self.spec.takeover_day;
        let weights: [f64; 6] = if post {
            [0.15, 0.2, 0.05, 0.25, 0.1, 0.25]
        } else {
            [0.15, 0.2, 0.05, 0.1, 0.1, 0.4]
        };
        let dist = WeightedIndex::new(weights).expect("weights");
        Category::ALL[dist.sample(&mut self.text_rng)]
    }

    fn original(&mut self, user: usize, day: u32, hateful: bool) -> usize {
        let text = self.text(day, hateful);
        let (score, category) = if hateful {
            (self.text_rng.random_range(0.6..0.99), self.category(day))
        } else {
            (self.text_rng.random_range(0.01..0.4), Category::NotHate)
        };
        let idx = self.tweets.len();
        self.tweets.push(TweetRecord {
            id: self.tweet_id(),
            user_id: self.users[user].id.clone(),
            day,
            kind: TweetKind::Original,
            ref_id: None,
            text,
            hate_score: Some((score * 1000.0_f64).round() / 1000.0),
            category: Some(category),
        });
        if hateful {
            self.hateful.push(idx);
        }
        idx
    }

    fn retweetable(&mut self, author: usize, day: u32) -> usize {
        if let Some(&t) = self.originals.get(&(author, day)) {
            return t;
        }
        let t = self.original(author, day, true);
        self.originals.insert((author, day), t);
        t
    }

    fn retweet(&mut self, retweeter: usize, author: usize, day: u32, lag: u32) {
        let orig = self.retweetable(author, day);
        let o = &self.tweets[orig];
        let text = format!("RT @{}: {}", o.user_id, o.text);
        let rec = TweetRecord {
            id: self.tweet_id(),
            user_id: self.users[retweeter].id.clone(),
            day: (day + lag).min(self.spec.days - 1),
            kind: TweetKind::Retweet,
            ref_id: Some(o.id.clone()),
            text,
            hate_score: o.hate_score,
            category: o.category,
        };
        self.tweets.push(rec);
        self.users[author].indegree += 1;
    }
}

/// Generates the corpus. Fully determined by `spec` (including its seed).
pub fn generate_synthetic(spec: &SynthSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut role_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edge_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    edge_rng.set_stream(1);
    let mut text_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    text_rng.set_stream(2);
    let mut profile_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    profile_rng.set_stream(3);

    // roles assigned over a shuffled id order so ids carry no signal
    let mut ids: Vec<String> = (0..spec.n_users).map(|i| format!("u{i:05}")).collect();
    ids.shuffle(&mut role_rng);
    let core = spec.n_users - spec.n_planted_bridges;
    let fringe = (core as f64 * spec.fringe_fraction) as usize;
    let community_users = core - fringe;
    let n_authors = ((community_users as f64 * spec.author_fraction) as usize)
        .clamp(spec.community_count, community_users - spec.community_count);
    let activity = LogNormal::new(0.0, 1.0).expect("lognormal");
    let mut users: Vec<User> = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let (role, community) = if i < spec.n_planted_bridges {
                (Role::Bridge, Some(i % spec.community_count))
            } else if i < spec.n_planted_bridges + n_authors {
                (Role::Author, Some(i % spec.community_count))
            } else if i < spec.n_planted_bridges + community_users {
                (Role::Retweeter, Some(i % spec.community_count))
            } else if i < spec.n_planted_bridges + community_users + fringe / 2 {
                (Role::FringeAuthor, None)
            } else {
                (Role::FringeRetweeter, None)
            };
            User {
                id,
                role,
                community,
                activity: activity.sample(&mut role_rng),
                indegree: 0,
            }
        })
        .collect();
    let bridges: Vec<usize> = (0..users.len()).filter(|&i| users[i].role == Role::Bridge).collect();
    // one viral day per bridge, spread over the post-takeover period
    let post_days = spec.days - spec.takeover_day;
    let mut viral_day: Vec<u32> = (0..bridges.len())
        .map(|i| spec.takeover_day + (i as u32 * post_days) / bridges.len().max(1) as u32)
        .collect();
    viral_day.shuffle(&mut role_rng);
    let by_role =
        |role: Role, users: &[User]| -> Vec<usize> { (0..users.len()).filter(|&i| users[i].role == role).collect() };
    let mut fringe_authors = by_role(Role::FringeAuthor, &users);
    let mut fringe_retweeters = by_role(Role::FringeRetweeter, &users);
    fringe_authors.reverse();
    fringe_retweeters.reverse();
    let mut comm_authors: Vec<Vec<usize>> = vec![Vec::new(); spec.community_count];
    let mut comm_members: Vec<Vec<usize>> = vec![Vec::new(); spec.community_count];
    for (i, u) in users.iter().enumerate() {
        match (u.role, u.community) {
            (Role::Author, Some(c)) => {
                comm_authors[c].push(i);
                comm_members[c].push(i);
            }
            (Role::Retweeter, Some(c)) => comm_members[c].push(i),
            _ => {}
        }
    }
    let comm_weights: Vec<f64> = comm_members.iter().map(|m| m.len() as f64).collect();
    let comm_dist = WeightedIndex::new(&comm_weights).map_err(|e| Error::invalid(e.to_string()))?;
    let member_dists: Vec<WeightedIndex<f64>> = comm_members
        .iter()
        .map(|m| WeightedIndex::new(m.iter().map(|&i| users[i].activity)).expect("positive activity"))
        .collect();
    let all_members: Vec<usize> = comm_members.iter().flatten().copied().collect();

    let mut b = Builder {
        spec,
        users: std::mem::take(&mut users),
        tweets: Vec::new(),
        originals: HashMap::new(),
        hateful: Vec::new(),
        text_rng,
    };

    for day in 0..spec.days {
        let post = day >= spec.takeover_day;
        let fresh_p = if post {
            spec.fresh_pair_post
        } else {
            spec.fresh_pair_pre
        };
        let bridge_w: Vec<f64> = viral_day
            .iter()
            .map(|&v| if v == day { spec.viral_weight } else { 1.0 })
            .collect();
        let bridge_offset = if post && !bridges.is_empty() {
            spec.bridge_share
        } else {
            0.0
        };
        for _ in 0..spec.edges_on(day) {
            let lag = u32::from(edge_rng.random::<f64>() < 0.2);
            let roll: f64 = edge_rng.random();
            if post && !bridges.is_empty() && roll < spec.bridge_share {
                let k = WeightedIndex::new(&bridge_w).expect("weights").sample(&mut edge_rng);
                let bridge = bridges[k];
                let home = b.users[bridge].community;
                // someone from another community
                let other = loop {
                    let m = *all_members.choose(&mut edge_rng).expect("members");
                    if b.users[m].community != home || spec.community_count == 1 {
                        break m;
                    }
                };
                if edge_rng.random::<f64>() < 0.15 && b.users[other].role == Role::Author {
                    b.retweet(bridge, other, day, lag);
                } else {
                    b.retweet(other, bridge, day, lag);
                }
            } else if roll < bridge_offset + fresh_p && !fringe_authors.is_empty() && !fringe_retweeters.is_empty() {
                let a = fringe_authors.pop().expect("non-empty");
                let r = fringe_retweeters.pop().expect("non-empty");
                b.retweet(r, a, day, lag);
            } else {
                let c = comm_dist.sample(&mut edge_rng);
                let weights: Vec<f64> = comm_authors[c]
                    .iter()
                    .map(|&a| 1.0 + b.users[a].indegree as f64)
                    .collect();
                let a = comm_authors[c][WeightedIndex::new(&weights).expect("weights").sample(&mut edge_rng)];
                let r = loop {
                    let m = comm_members[c][member_dists[c].sample(&mut edge_rng)];
                    if m != a {
                        break m;
                    }
                };
                b.retweet(r, a, day, lag);
            }
        }
    }

    // every user who was retweeted is a key contributor: top up to three hateful originals
    let index: HashMap<&str, usize> = b.users.iter().enumerate().map(|(i, u)| (u.id.as_str(), i)).collect();
    let mut hateful_count: HashMap<usize, usize> = HashMap::new();
    for &t in &b.hateful {
        *hateful_count.entry(index[b.tweets[t].user_id.as_str()]).or_default() += 1;
    }
    let authors: Vec<usize> = (0..b.users.len()).filter(|&i| b.users[i].indegree > 0).collect();
    for a in authors {
        let have = hateful_count.get(&a).copied().unwrap_or(0);
        for _ in have..3 {
            let lo = if b.users[a].role == Role::Bridge {
                spec.takeover_day
            } else {
                0
            };
            let day = b.text_rng.random_range(lo..spec.days);
            b.original(a, day, true);
        }
    }
    // background chatter: non-hateful originals, a few with keywords
    for u in 0..b.users.len() {
        let n = b.text_rng.random_range(1..=3);
        for _ in 0..n {
            let day = b.text_rng.random_range(0..spec.days);
            b.original(u, day, false);
        }
    }

    let bio_word = spec.vocab.bridge_bio_word.clone();
    let mut tweet_counts: HashMap<&str, u64> = HashMap::new();
    for t in &b.tweets {
        *tweet_counts.entry(t.user_id.as_str()).or_default() += 1;
    }
    let followers = LogNormal::<f64>::new(5.0, 1.5).expect("lognormal");
    let following = LogNormal::<f64>::new(5.5, 1.0).expect("lognormal");
    let mut profiles: Vec<UserProfile> = b
        .users
        .iter()
        .map(|u| {
            let mut bio: Vec<String> = (0..profile_rng.random_range(0..6))
                .map(|_| BIO_WORDS.choose(&mut profile_rng).expect("bio").to_string())
                .collect();
            if let Some(w) = &bio_word {
                let p = if u.role == Role::Bridge { 0.8 } else { 0.03 };
                if profile_rng.random::<f64>() < p {
                    bio.push(w.clone());
                }
            }
            let base = followers.sample(&mut profile_rng) * (1.0 + u.indegree as f64 / 5.0);
            UserProfile::new(
                u.id.clone(),
                base.round() as u64,
                following.sample(&mut profile_rng).round() as u64,
                tweet_counts.get(u.id.as_str()).copied().unwrap_or(0) * profile_rng.random_range(5..50),
                profile_rng.random_range(30..5000),
                bio.join(" "),
            )
        })
        .collect();
    profiles.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    b.tweets.sort_by(|x, y| (x.day, &x.id).cmp(&(y.day, &y.id)));

    let mut planted: Vec<String> = bridges.iter().map(|&i| b.users[i].id.clone()).collect();
    planted.sort();
    let mut communities: BTreeMap<String, usize> = BTreeMap::new();
    for u in &b.users {
        if let Some(c) = u.community {
            communities.insert(u.id.clone(), c);
        }
    }
    let truth = GroundTruth {
        seed: spec.seed,
        planted_bridges: planted,
        pre_edge_rate: spec.pre_edge_rate,
        post_edge_rate: spec.post_edge_rate,
        expected_influx_pct: crate::stats::pct_change(spec.pre_edge_rate, spec.post_edge_rate).unwrap_or(0.0),
        pre_words: spec.vocab.pre_words.clone(),
        post_words: spec.vocab.post_words.clone(),
        similarity_pair: spec.vocab.similarity_pair.clone(),
        bridge_bio_word: bio_word,
        category_shift: Some(Category::SexualOrientation.as_str().to_string()),
        suggested_top_k: scaled_top_k(spec.n_users),
        communities,
    };
    Ok(SyntheticCorpus {
        tweets: b.tweets,
        users: profiles,
        truth,
        keywords: spec.vocab.keywords.clone(),
    })
}

impl SyntheticCorpus {
    /// Writes tweets.jsonl, users.jsonl, ground_truth.json, keywords.txt and
    /// (when a pair is planted) pairs.csv into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_jsonl(&dir.join("tweets.jsonl"), &self.tweets)?;
        write_jsonl(&dir.join("users.jsonl"), &self.users)?;
        let gt = dir.join("ground_truth.json");
        std::fs::write(&gt, serde_json::to_string_pretty(&self.truth)? + "\n").map_err(|e| Error::io(&gt, e))?;
        let kw = dir.join("keywords.txt");
        std::fs::write(&kw, self.keywords.join("\n") + "\n").map_err(|e| Error::io(&kw, e))?;
        if let Some((t, k)) = &self.truth.similarity_pair {
            let p = dir.join("pairs.csv");
            std::fs::write(&p, format!("topic,keyword\n{t},{k}\n")).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}
