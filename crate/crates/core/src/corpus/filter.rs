//! Keyword and hate-score selection rules for building the filtered corpora.

use std::collections::{BTreeMap, BTreeSet};

use super::record::TweetRecord;
use super::text::tokenize;
use crate::error::{Error, Result};

/// Default inclusive threshold on the classifier probability.
pub const DEFAULT_HATE_THRESHOLD: f64 = 0.5;
/// A user needs this many hateful tweets to count as a key contributor.
pub const DEFAULT_MIN_HATEFUL: usize = 3;

/// Keywords pre-tokenized with the tweet tokenizer. A keyword matches when its
/// token sequence occurs contiguously in the tweet's tokens, so single-word
/// keywords only ever match whole tokens.
#[derive(Debug, Clone)]
pub struct KeywordSet {
    keywords: Vec<(String, Vec<String>)>,
}

impl KeywordSet {
    pub fn new<I, S>(keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for k in keywords {
            let k = k.as_ref().trim().to_lowercase();
            let toks = tokenize(&k);
            if toks.is_empty() || !seen.insert(k.clone()) {
                continue;
            }
            out.push((k, toks));
        }
        if out.is_empty() {
            return Err(Error::invalid("keyword list is empty"));
        }
        Ok(KeywordSet { keywords: out })
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    /// Number of distinct keywords present in `tokens`.
    pub fn count_matches(&self, tokens: &[String]) -> usize {
        self.keywords.iter().filter(|(_, kw)| contains_run(tokens, kw)).count()
    }

    pub fn matches(&self, tokens: &[String]) -> bool {
        self.keywords.iter().any(|(_, kw)| contains_run(tokens, kw))
    }
}

fn contains_run(tokens: &[String], run: &[String]) -> bool {
    run.len() <= tokens.len() && tokens.windows(run.len()).any(|w| w == run)
}

/// Tweets whose text contains at least one keyword as a whole token. Order is kept.
pub fn keyword_filter<S: AsRef<str>>(tweets: &[TweetRecord], keywords: &[S]) -> Result<Vec<TweetRecord>> {
    let set = KeywordSet::new(keywords)?;
    Ok(tweets
        .iter()
        .filter(|t| set.matches(&tokenize(&t.text)))
        .cloned()
        .collect())
}

/// Keeps tweets with `hate_score >= threshold`.
pub fn hate_threshold_filter(tweets: &[TweetRecord], threshold: f64) -> Result<Vec<TweetRecord>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!("threshold {threshold} outside (0, 1)")));
    }
    let missing: Vec<String> = tweets
        .iter()
        .filter(|t| t.hate_score.is_none())
        .map(|t| t.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingHateScore(missing));
    }
    Ok(tweets
        .iter()
        .filter(|t| t.hate_score.is_some_and(|s| s >= threshold))
        .cloned()
        .collect())
}

/// Keyword-count stand-in for a hate classifier: `min(1, k / 2)` where `k` is
/// the number of distinct keywords in the tweet.
pub fn fallback_scorer<S: AsRef<str>>(tweets: &[TweetRecord], keywords: &[S]) -> Result<Vec<TweetRecord>> {
    let set = KeywordSet::new(keywords)?;
    Ok(tweets
        .iter()
        .map(|t| {
            let k = set.count_matches(&tokenize(&t.text));
            TweetRecord {
                hate_score: Some((k as f64 / 2.0).min(1.0)),
                ..t.clone()
            }
        })
        .collect())
}

pub fn key_contributors(tweets: &[TweetRecord], min_hateful: usize) -> Result<BTreeSet<String>> {
    if min_hateful < 1 {
        return Err(Error::invalid("min_hateful must be at least 1"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tweets {
        *counts.entry(&t.user_id).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .filter(|&(_, n)| n >= min_hateful)
        .map(|(u, _)| u.to_string())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TweetKind;
    use proptest::prelude::*;

    fn tw(id: &str, user: &str, text: &str, score: Option<f64>) -> TweetRecord {
        TweetRecord {
            id: id.into(),
            user_id: user.into(),
            day: 0,
            kind: TweetKind::Original,
            ref_id: None,
            text: text.into(),
            hate_score: score,
            category: None,
        }
    }

    #[test]
    fn keyword_whole_token() {
        assert!(keyword_filter(&[], &["slurA"]).unwrap().is_empty());
        let kept = keyword_filter(&[tw("1", "u", "x slurA y", None)], &["slura"]).unwrap();
        assert_eq!(kept.len(), 1);
        let dropped = keyword_filter(&[tw("1", "u", "slurAB", None)], &["slura"]).unwrap();
        assert!(dropped.is_empty());
        assert!(keyword_filter(&[tw("1", "u", "x", None)], &Vec::<String>::new()).is_err());
    }

    #[test]
    fn multiword_keyword_is_contiguous() {
        let ts = [
            tw("1", "u", "half-breed here", None),
            tw("2", "u", "half a breed", None),
        ];
        let kept = keyword_filter(&ts, &["half-breed"]).unwrap();
        assert_eq!(kept.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["1"]);
    }

    #[test]
    fn threshold_inclusive() {
        let ts = [
            tw("a", "u", "", Some(0.2)),
            tw("b", "u", "", Some(0.5)),
            tw("c", "u", "", Some(0.9)),
            tw("d", "u", "", Some(0.49)),
        ];
        let kept = hate_threshold_filter(&ts, 0.5).unwrap();
        assert_eq!(kept.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["b", "c"]);
        assert!(hate_threshold_filter(&ts, 1.0).is_err());
        match hate_threshold_filter(&[tw("x", "u", "", None)], 0.5) {
            Err(Error::MissingHateScore(ids)) => assert_eq!(ids, ["x"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fallback_scores() {
        let ts = [
            tw("0", "u", "nothing here", None),
            tw("1", "u", "one foo", None),
            tw("2", "u", "foo foo bar", None),
            tw("3", "u", "foo bar baz", None),
        ];
        let scored = fallback_scorer(&ts, &["foo", "bar", "baz"]).unwrap();
        let s: Vec<f64> = scored.iter().map(|t| t.hate_score.unwrap()).collect();
        assert_eq!(s, [0.0, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn contributors() {
        let mut ts = Vec::new();
        for i in 0..3 {
            ts.push(tw(&format!("a{i}"), "alice", "", Some(0.9)));
        }
        for i in 0..2 {
            ts.push(tw(&format!("b{i}"), "bob", "", Some(0.9)));
        }
        let k = key_contributors(&ts, DEFAULT_MIN_HATEFUL).unwrap();
        assert_eq!(k.into_iter().collect::<Vec<_>>(), ["alice"]);
        assert!(key_contributors(&[], 3).unwrap().is_empty());
        assert!(key_contributors(&ts, 0).is_err());
    }

    fn arb_tweets() -> impl Strategy<Value = Vec<TweetRecord>> {
        let words = prop::sample::select(vec!["foo", "bar", "baz", "qux", "zap"]);
        prop::collection::vec((prop::collection::vec(words, 0..6), 0.0f64..=1.0, 0usize..4), 0..30).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (ws, s, u))| tw(&i.to_string(), &format!("u{u}"), &ws.join(" "), Some(s)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn keyword_filter_subset_idempotent(ts in arb_tweets()) {
            let once = keyword_filter(&ts, &["foo", "zap"]).unwrap();
            let twice = keyword_filter(&once, &["foo", "zap"]).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.iter().all(|t| ts.contains(t)));
        }

        #[test]
        fn threshold_monotone(ts in arb_tweets(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let at_lo = hate_threshold_filter(&ts, lo).unwrap();
            let at_hi = hate_threshold_filter(&ts, hi).unwrap();
            prop_assert!(at_hi.iter().all(|t| at_lo.contains(t)));
        }

        #[test]
        fn contributors_nested(ts in arb_tweets(), m in 1usize..5) {
            let wide = key_contributors(&ts, m).unwrap();
            let narrow = key_contributors(&ts, m + 1).unwrap();
            prop_assert!(narrow.is_subset(&wide));
        }
    }
}
