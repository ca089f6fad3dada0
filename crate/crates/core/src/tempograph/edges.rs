use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::snapshot::Snapshot;
use crate::corpus::{TweetKind, TweetRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub src: String,
    pub dst: String,
    pub day: u32,
}

impl TemporalEdge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, day: u32) -> Self {
        TemporalEdge {
            src: src.into(),
            dst: dst.into(),
            day,
        }
    }
}

/// Interaction edges stamped with a day index, kept in canonical
/// `(day, src, dst)` order. Seed nodes are users present from day 0 even
/// without edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalEdgeList {
    edges: Vec<TemporalEdge>,
    directed: bool,
    end_day: u32,
    seeds: BTreeSet<String>,
}

impl TemporalEdgeList {
    /// Fails on edges past `end_day` and on self-loops unless allowed.
    pub fn new(mut edges: Vec<TemporalEdge>, directed: bool, end_day: u32, allow_self_loops: bool) -> Result<Self> {
        if let Some(e) = edges.iter().find(|e| e.day > end_day) {
            return Err(Error::DayOutOfWindow {
                day: e.day as i64,
                end: end_day,
            });
        }
        if !allow_self_loops {
            if let Some(e) = edges.iter().find(|e| e.src == e.dst) {
                return Err(Error::invalid(format!("self-loop on {:?} at day {}", e.src, e.day)));
            }
        }
        edges.sort_by(|a, b| (a.day, &a.src, &a.dst).cmp(&(b.day, &b.src, &b.dst)));
        Ok(TemporalEdgeList {
            edges,
            directed,
            end_day,
            seeds: BTreeSet::new(),
        })
    }

    pub fn with_seeds<I, S>(mut self, seeds: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.seeds.extend(seeds.into_iter().map(Into::into));
        self
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn end_day(&self) -> u32 {
        self.end_day
    }

    pub fn seeds(&self) -> &BTreeSet<String> {
        &self.seeds
    }

    /// Copy with every edge read as undirected.
    pub fn as_undirected(&self) -> Self {
        TemporalEdgeList {
            directed: false,
            ..self.clone()
        }
    }

    /// Every user appearing as an endpoint or seed, sorted.
    pub fn users(&self) -> BTreeSet<&str> {
        self.edges
            .iter()
            .flat_map(|e| [e.src.as_str(), e.dst.as_str()])
            .chain(self.seeds.iter().map(String::as_str))
            .collect()
    }

    /// New edges per day, indexed `0..=end_day`.
    pub fn daily_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.end_day as usize + 1];
        for e in &self.edges {
            counts[e.day as usize] += 1;
        }
        counts
    }

    /// Cumulative graph of all edges with `edge.day <= day`.
    pub fn snapshot(&self, day: i64) -> Result<Snapshot> {
        if day < 0 || day > self.end_day as i64 {
            return Err(Error::DayOutOfWindow { day, end: self.end_day });
        }
        let day = day as u32;
        let upto = self.edges.partition_point(|e| e.day <= day);
        Ok(Snapshot::from_edges(
            day,
            self.directed,
            self.seeds.iter().map(String::as_str),
            self.edges[..upto].iter().map(|e| (e.src.as_str(), e.dst.as_str())),
        ))
    }

    /// All snapshots `0..=end_day`.
    pub fn snapshots(&self) -> Vec<Snapshot> {
        (0..=self.end_day as i64)
            .map(|d| self.snapshot(d).expect("day in window"))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("src,dst,day\n");
        for e in &self.edges {
            out.push_str(&format!("{},{},{}\n", e.src, e.dst, e.day));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reads `src,dst,day` rows (header required). `end_day` defaults to the last edge day.
    pub fn parse_csv(src: &str, directed: bool, end_day: Option<u32>) -> Result<Self> {
        let mut lines = src.lines();
        match lines.next().map(str::trim) {
            Some("src,dst,day") => {}
            other => {
                return Err(Error::Parse {
                    context: "edges.csv".into(),
                    message: format!("expected header src,dst,day, got {other:?}"),
                })
            }
        }
        let mut edges = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse {
                context: "edges.csv".into(),
                message: format!("line {}: {line:?}", i + 2),
            };
            let mut parts = line.split(',');
            let (Some(s), Some(d), Some(day), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad());
            };
            let day: u32 = day.trim().parse().map_err(|_| bad())?;
            edges.push(TemporalEdge::new(s.trim(), d.trim(), day));
        }
        let end = end_day.unwrap_or_else(|| edges.iter().map(|e| e.day).max().unwrap_or(0));
        Self::new(edges, directed, end, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMode {
    #[default]
    RetweetOnly,
    /// Retweets, replies and quotes.
    AllInteractions,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub mode: EdgeMode,
    pub directed: bool,
    pub allow_self_loops: bool,
    pub end_day: u32,
}

impl BuildOptions {
    pub fn new(end_day: u32) -> Self {
        BuildOptions {
            mode: EdgeMode::RetweetOnly,
            directed: true,
            allow_self_loops: false,
            end_day,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub edges: TemporalEdgeList,
    /// Interactions whose `ref_id` is not in the corpus.
    pub unresolved: usize,
    /// Interactions dropped because a user referenced their own tweet.
    pub self_loops: usize,
}

/// One edge per interaction, from the interacting user to the author of the
/// referenced tweet, stamped with the referenced tweet's day.
pub fn build_edges(tweets: &[TweetRecord], opts: &BuildOptions) -> Result<BuildOutcome> {
    let by_id: HashMap<&str, &TweetRecord> = tweets.iter().map(|t| (t.id.as_str(), t)).collect();
    let wanted = |k: TweetKind| match opts.mode {
        EdgeMode::RetweetOnly => k == TweetKind::Retweet,
        EdgeMode::AllInteractions => k.is_interaction(),
    };
    let mut edges = Vec::new();
    let (mut unresolved, mut self_loops) = (0, 0);
    for t in tweets.iter().filter(|t| wanted(t.kind)) {
        let Some(orig) = t.ref_id.as_deref().and_then(|r| by_id.get(r)) else {
            unresolved += 1;
            continue;
        };
        if orig.user_id == t.user_id && !opts.allow_self_loops {
            self_loops += 1;
            continue;
        }
        if orig.day > opts.end_day {
            return Err(Error::DayOutOfWindow {
                day: orig.day as i64,
                end: opts.end_day,
            });
        }
        edges.push(TemporalEdge::new(t.user_id.clone(), orig.user_id.clone(), orig.day));
    }
    Ok(BuildOutcome {
        edges: TemporalEdgeList::new(edges, opts.directed, opts.end_day, opts.allow_self_loops)?,
        unresolved,
        self_loops,
    })
}
