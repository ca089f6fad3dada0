//! Moving PageRank: scores users by how their PageRank moves across the
//! daily snapshots, then intersects the top-k lists of three such scores.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pagerank::PageRankSeries;
use crate::error::{Error, Result};

/// Default per-score cutoff for the intersection.
pub const DEFAULT_TOP_K: usize = 1000;

/// Which timesteps the post-takeover maximum of `f3` ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F3Window {
    /// `max_{1..=t1}` vs `max_{t1..=t2}`: timestep `t1` is in both windows.
    #[default]
    Overlapping,
    /// `max_{1..=t1}` vs `max_{t1+1..=t2}`.
    Disjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MprScore {
    pub user: String,
    /// Total variation of PageRank over timesteps `1..=t2`.
    pub f1: f64,
    /// Largest single-step PageRank change.
    pub f2: f64,
    /// Gap between the pre- and post-takeover PageRank maxima.
    pub f3: f64,
    pub rank_f1: usize,
    pub rank_f2: usize,
    pub rank_f3: usize,
}

/// Scores every user of `series`. Timesteps are 1-based: timestep `t` is
/// `series.at(t - 1)`. `t1` is the last timestep before the takeover and `t2`
/// the final one.
pub fn mpr_scores(series: &PageRankSeries, t1: usize, t2: usize, window: F3Window) -> Result<Vec<MprScore>> {
    if t1 < 1 || t1 >= t2 {
        return Err(Error::invalid(format!("need 1 <= t1 < t2, got t1={t1} t2={t2}")));
    }
    if t2 > series.timesteps() {
        return Err(Error::invalid(format!(
            "t2={t2} exceeds the {} available timesteps",
            series.timesteps()
        )));
    }
    let pr = |t: usize, u: usize| series.at(t - 1)[u];
    let post_start = match window {
        F3Window::Overlapping => t1,
        F3Window::Disjoint => t1 + 1,
    };
    let mut scores: Vec<MprScore> = series
        .users()
        .iter()
        .enumerate()
        .map(|(u, name)| {
            let (mut f1, mut f2) = (0.0f64, 0.0f64);
            for t in 2..=t2 {
                let step = (pr(t, u) - pr(t - 1, u)).abs();
                f1 += step;
                f2 = f2.max(step);
            }
            let pre_max = (1..=t1).map(|t| pr(t, u)).fold(f64::NEG_INFINITY, f64::max);
            let post_max = (post_start..=t2).map(|t| pr(t, u)).fold(f64::NEG_INFINITY, f64::max);
            MprScore {
                user: name.clone(),
                f1,
                f2,
                f3: (pre_max - post_max).abs(),
                rank_f1: 0,
                rank_f2: 0,
                rank_f3: 0,
            }
        })
        .collect();
    assign_ranks(&mut scores, |s| s.f1, |s, r| s.rank_f1 = r);
    assign_ranks(&mut scores, |s| s.f2, |s, r| s.rank_f2 = r);
    assign_ranks(&mut scores, |s| s.f3, |s, r| s.rank_f3 = r);
    Ok(scores)
}

// 1-based, descending by value, ties broken by user id.
fn assign_ranks(scores: &mut [MprScore], key: fn(&MprScore) -> f64, set: fn(&mut MprScore, usize)) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| desc_then_user(key(&scores[a]), key(&scores[b]), &scores[a].user, &scores[b].user));
    for (rank, idx) in order.into_iter().enumerate() {
        set(&mut scores[idx], rank + 1);
    }
}

fn desc_then_user(a: f64, b: f64, ua: &str, ub: &str) -> Ordering {
    b.total_cmp(&a).then_with(|| ua.cmp(ub))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfluencerSet {
    pub users: BTreeSet<String>,
    pub k: usize,
}

impl InfluencerSet {
    /// Drops manually vetted false positives.
    pub fn exclude(mut self, excluded: &BTreeSet<String>) -> Self {
        self.users.retain(|u| !excluded.contains(u));
        self
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn contains(&self, user: &str) -> bool {
        self.users.contains(user)
    }
}

/// Users ranked within the top `k` by all of `f1`, `f2` and `f3`.
pub fn influencer_intersection(scores: &[MprScore], k: usize) -> InfluencerSet {
    let users = scores
        .iter()
        .filter(|s| s.rank_f1 <= k && s.rank_f2 <= k && s.rank_f3 <= k)
        .map(|s| s.user.clone())
        .collect();
    InfluencerSet { users, k }
}

/// Single MPR ordering: by `f1`, then `f2`, then `f3` (all descending), then
/// user id. Returns 1-based ranks.
pub fn composite_rank(scores: &[MprScore]) -> BTreeMap<String, usize> {
    let mut order: Vec<&MprScore> = scores.iter().collect();
    order.sort_by(|a, b| {
        b.f1.total_cmp(&a.f1)
            .then_with(|| b.f2.total_cmp(&a.f2))
            .then_with(|| b.f3.total_cmp(&a.f3))
            .then_with(|| a.user.cmp(&b.user))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s.user.clone(), i + 1))
        .collect()
}

/// One user id per line; blank lines and `#` comments skipped.
pub fn load_exclusions(path: &Path) -> Result<BTreeSet<String>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(src
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

pub fn write_mpr_csv(path: &Path, scores: &[MprScore], selected: &InfluencerSet) -> Result<()> {
    let mut rows: Vec<&MprScore> = scores.iter().collect();
    rows.sort_by_key(|s| s.rank_f1);
    let mut out = String::from("user,f1,f2,f3,rank_f1,rank_f2,rank_f3,selected\n");
    for s in rows {
        out.push_str(&format!(
            "{},{:.12},{:.12},{:.12},{},{},{},{}\n",
            s.user,
            s.f1,
            s.f2,
            s.f3,
            s.rank_f1,
            s.rank_f2,
            s.rank_f3,
            selected.contains(&s.user)
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
