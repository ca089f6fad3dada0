//! Per-snapshot PageRank, Moving PageRank influencer detection and
//! bio-word profiling of the detected users.

mod mpr;
mod pagerank;

use std::collections::HashSet;

use crate::corpus::{Preprocessor, UserProfile};
use crate::error::{Error, Result};
use crate::lexshift::{log_odds_dirichlet, CountTable, PriorTable, ScoredWord};

pub use mpr::{
    composite_rank, influencer_intersection, load_exclusions, mpr_scores, write_mpr_csv, F3Window, InfluencerSet,
    MprScore, DEFAULT_TOP_K,
};
pub use pagerank::{pagerank, PageRankConfig, PageRankResult, PageRankSeries};

/// Token counts of the influencer bios (`.0`) and of every bio (`.1`).
pub fn bio_counts(influencers: &InfluencerSet, users: &[UserProfile], pre: &Preprocessor) -> (CountTable, CountTable) {
    let mut inf = CountTable::new();
    let mut all = CountTable::new();
    for u in users {
        let toks = pre.tokens(&u.bio);
        if influencers.contains(&u.user_id) {
            toks.iter().for_each(|t| inf.add(t, 1));
        }
        toks.iter().for_each(|t| all.add(t, 1));
    }
    (inf, all)
}

/// Words over-represented in influencer bios relative to all bios, highest
/// z-score first.
pub fn bio_profile(
    influencers: &InfluencerSet,
    users: &[UserProfile],
    prior: &PriorTable,
    pre: &Preprocessor,
) -> Result<Vec<ScoredWord>> {
    let known: HashSet<&str> = users.iter().map(|u| u.user_id.as_str()).collect();
    let missing: Vec<&String> = influencers
        .users
        .iter()
        .filter(|u| !known.contains(u.as_str()))
        .collect();
    if !missing.is_empty() {
        log::warn!("{} influencer(s) without a profile", missing.len());
    }
    let (inf, all) = bio_counts(influencers, users, pre);
    if inf.total() == 0 {
        return Err(Error::invalid("all influencer bios are empty"));
    }
    let mut scored = log_odds_dirichlet(&inf, &all, prior)?;
    scored.sort_by(|a, b| b.zscore.total_cmp(&a.zscore).then_with(|| a.word.cmp(&b.word)));
    Ok(scored)
}
