use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{Category, TweetRecord};
use crate::error::{Error, Result};
use crate::stats::{two_proportion_ztest, Continuity};

/// Change in one category's share between the pre and post corpora.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryShift {
    pub category: Category,
    pub pre_count: u64,
    pub post_count: u64,
    pub pre_total: u64,
    pub post_total: u64,
    /// `None` when the category is absent before, so the relative change is undefined.
    pub pct_increase: Option<f64>,
    pub p_value: f64,
}

impl CategoryShift {
    pub fn share_pre(&self) -> f64 {
        share(self.pre_count, self.pre_total)
    }

    pub fn share_post(&self) -> f64 {
        share(self.post_count, self.post_total)
    }
}

fn share(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

fn tally(tweets: &[TweetRecord]) -> Result<BTreeMap<Category, u64>> {
    let missing: Vec<String> = tweets
        .iter()
        .filter(|t| t.category.is_none())
        .map(|t| t.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingCategory(missing));
    }
    let mut m = BTreeMap::new();
    for t in tweets {
        *m.entry(t.category.unwrap()).or_default() += 1;
    }
    Ok(m)
}

/// Per-category share change with a two-sided pooled two-proportion z-test
/// (continuity-corrected). Categories seen on either side are reported.
pub fn composition_shift(pre: &[TweetRecord], post: &[TweetRecord]) -> Result<Vec<CategoryShift>> {
    composition_shift_with(pre, post, Continuity::Yates)
}

pub fn composition_shift_with(
    pre: &[TweetRecord],
    post: &[TweetRecord],
    continuity: Continuity,
) -> Result<Vec<CategoryShift>> {
    let a = tally(pre)?;
    let b = tally(post)?;
    let (na, nb) = (pre.len() as u64, post.len() as u64);
    Ok(Category::ALL
        .into_iter()
        .filter(|c| a.contains_key(c) || b.contains_key(c))
        .map(|c| {
            from_counts(
                c,
                a.get(&c).copied().unwrap_or(0),
                na,
                b.get(&c).copied().unwrap_or(0),
                nb,
                continuity,
            )
        })
        .collect())
}

pub(crate) fn from_counts(
    category: Category,
    pre_count: u64,
    pre_total: u64,
    post_count: u64,
    post_total: u64,
    continuity: Continuity,
) -> CategoryShift {
    let sp = share(pre_count, pre_total);
    let sq = share(post_count, post_total);
    let pct_increase = (sp > 0.0).then(|| 100.0 * (sq - sp) / sp);
    let (_, p_value) = two_proportion_ztest(pre_count, pre_total, post_count, post_total, continuity);
    CategoryShift {
        category,
        pre_count,
        post_count,
        pre_total,
        post_total,
        pct_increase,
        p_value,
    }
}

pub fn write_category_csv(path: &Path, rows: &[CategoryShift]) -> Result<()> {
    let mut out = String::from("category,pre_count,post_count,pre_total,post_total,pct_increase,p_value\n");
    for r in rows {
        let pct = r.pct_increase.map_or("new".to_string(), |v| format!("{v:.4}"));
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6}\n",
            r.category, r.pre_count, r.post_count, r.pre_total, r.post_total, pct, r.p_value
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
