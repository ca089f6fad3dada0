use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::UserProfile;
use crate::error::{Error, Result};
use crate::stats::{average_ranks, mean, pearson};

/// Profile columns, in matrix order.
pub const F1_COLUMNS: [&str; 5] = [
    "followers",
    "following",
    "tweet_count",
    "account_age_days",
    "bio_length",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    F1,
    F2,
    F1F2,
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::F1 => "f1",
            FeatureSet::F2 => "f2",
            FeatureSet::F1F2 => "f1f2",
        })
    }
}

/// Dense row-major feature matrix, one row per user. There is no imputation:
/// F1 is complete by construction and F2 drops users without tweets, so every
/// cell holds an observed (possibly standardized) value.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub users: Vec<String>,
    pub columns: Vec<String>,
    values: Vec<f64>,
    pub feature_set: FeatureSet,
}

impl FeatureMatrix {
    pub fn new(users: Vec<String>, columns: Vec<String>, values: Vec<f64>, feature_set: FeatureSet) -> Result<Self> {
        if values.len() != users.len() * columns.len() {
            return Err(Error::invalid(format!(
                "{} values for a {}x{} matrix",
                values.len(),
                users.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = columns.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(Error::invalid(format!("duplicate column {dup:?}")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = users.iter().find(|u| !seen.insert(u.as_str())) {
            return Err(Error::invalid(format!("duplicate user {dup:?}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature matrix contains non-finite values"));
        }
        Ok(FeatureMatrix {
            users,
            columns,
            values,
            feature_set,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.users.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.values[i * self.n_cols() + j]).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rows for the listed users, in that order. Unknown users are an error.
    pub fn select(&self, users: &[String]) -> Result<FeatureMatrix> {
        let pos: BTreeMap<&str, usize> = self.users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
        let mut values = Vec::with_capacity(users.len() * self.n_cols());
        for u in users {
            let i = *pos
                .get(u.as_str())
                .ok_or_else(|| Error::invalid(format!("user {u:?} has no feature row")))?;
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix::new(users.to_vec(), self.columns.clone(), values, self.feature_set)
    }
}

/// Rescales each column to zero mean and unit population variance.
/// Constant columns become zeros.
pub fn standardize(values: &mut [f64], n_cols: usize) {
    if n_cols == 0 || values.is_empty() {
        return;
    }
    let n_rows = values.len() / n_cols;
    for j in 0..n_cols {
        let col: Vec<f64> = (0..n_rows).map(|i| values[i * n_cols + j]).collect();
        let m = mean(&col);
        let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n_rows as f64;
        let sd = var.sqrt();
        for i in 0..n_rows {
            let v = &mut values[i * n_cols + j];
            *v = if sd > 0.0 { (*v - m) / sd } else { 0.0 };
        }
    }
}

/// Standardized profile metrics, rows sorted by user id.
pub fn build_f1(profiles: &[UserProfile]) -> Result<FeatureMatrix> {
    if profiles.is_empty() {
        return Err(Error::invalid("no user profiles to build features from"));
    }
    let mut sorted: Vec<&UserProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    let mut values = Vec::with_capacity(sorted.len() * F1_COLUMNS.len());
    for p in &sorted {
        values.extend([
            p.followers as f64,
            p.following as f64,
            p.tweet_count as f64,
            p.account_age_days as f64,
            p.bio_length as f64,
        ]);
    }
    standardize(&mut values, F1_COLUMNS.len());
    FeatureMatrix::new(
        sorted.iter().map(|p| p.user_id.clone()).collect(),
        F1_COLUMNS.iter().map(|s| s.to_string()).collect(),
        values,
        FeatureSet::F1,
    )
}

#[derive(Debug, Clone)]
pub struct F2Features {
    pub matrix: FeatureMatrix,
    /// Requested users that had no embedded tweet.
    pub excluded: Vec<String>,
}

/// Mean tweet embedding per user. `authorship` maps tweet id to author;
/// tweets without an embedding are ignored. When `users` is given, rows
/// follow that list and users with nothing to pool are reported as excluded.
pub fn build_f2(
    embeddings: &BTreeMap<String, Vec<f64>>,
    authorship: &BTreeMap<String, String>,
    users: Option<&[String]>,
) -> Result<F2Features> {
    let dim = check_dimensions(embeddings)?;
    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for (tweet, author) in authorship {
        let Some(v) = embeddings.get(tweet) else {
            continue;
        };
        let (acc, n) = sums.entry(author.as_str()).or_insert_with(|| (vec![0.0; dim], 0));
        acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
        *n += 1;
    }
    let wanted: Vec<String> = match users {
        Some(u) => {
            let set: BTreeSet<&String> = u.iter().collect();
            set.into_iter().cloned().collect()
        }
        None => sums.keys().map(|s| s.to_string()).collect(),
    };
    let mut rows = Vec::new();
    let mut values = Vec::new();
    let mut excluded = Vec::new();
    for u in wanted {
        match sums.get(u.as_str()) {
            Some((acc, n)) => {
                values.extend(acc.iter().map(|a| a / *n as f64));
                rows.push(u);
            }
            None => excluded.push(u),
        }
    }
    let columns = (0..dim).map(|d| format!("emb_{d}")).collect();
    Ok(F2Features {
        matrix: FeatureMatrix::new(rows, columns, values, FeatureSet::F2)?,
        excluded,
    })
}

fn check_dimensions(embeddings: &BTreeMap<String, Vec<f64>>) -> Result<usize> {
    let mut iter = embeddings.iter();
    let Some((_, first)) = iter.next() else {
        return Ok(0);
    };
    let dim = first.len();
    for (tweet, v) in iter {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                tweet: tweet.clone(),
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(dim)
}

/// Column-wise concatenation over users present in both matrices, in the
/// row order of `a`.
pub fn combine(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix> {
    let pos_b: BTreeMap<&str, usize> = b.users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let mut users = Vec::new();
    let mut values = Vec::new();
    for (i, u) in a.users.iter().enumerate() {
        if let Some(&k) = pos_b.get(u.as_str()) {
            users.push(u.clone());
            values.extend_from_slice(a.row(i));
            values.extend_from_slice(b.row(k));
        }
    }
    let columns = a.columns.iter().chain(&b.columns).cloned().collect();
    FeatureMatrix::new(users, columns, values, FeatureSet::F1F2)
}

/// Rank correlation with tie-averaged ranks. `Ok(None)` when either side is
/// constant.
pub fn spearman(target: &BTreeMap<String, f64>, feature: &BTreeMap<String, f64>) -> Result<Option<f64>> {
    if target.len() != feature.len() || target.keys().any(|k| !feature.contains_key(k)) {
        return Err(Error::invalid("target and feature cover different users"));
    }
    if target.len() < 2 {
        return Err(Error::invalid("need at least two users for a rank correlation"));
    }
    let t: Vec<f64> = target.values().copied().collect();
    let f: Vec<f64> = target.keys().map(|k| feature[k]).collect();
    Ok(spearman_slices(&t, &f))
}

pub fn spearman_slices(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureCorrelation {
    pub feature: String,
    pub rho: Option<f64>,
    pub n_users: usize,
}

/// Spearman correlation of every column against the target, over the users
/// present in both.
pub fn feature_correlations(x: &FeatureMatrix, target: &BTreeMap<String, f64>) -> Vec<FeatureCorrelation> {
    let rows: Vec<usize> = (0..x.n_rows()).filter(|&i| target.contains_key(&x.users[i])).collect();
    let t: Vec<f64> = rows.iter().map(|&i| target[&x.users[i]]).collect();
    (0..x.n_cols())
        .map(|j| {
            let f: Vec<f64> = rows.iter().map(|&i| x.get(i, j)).collect();
            FeatureCorrelation {
                feature: x.columns[j].clone(),
                rho: if rows.len() >= 2 { spearman_slices(&t, &f) } else { None },
                n_users: rows.len(),
            }
        })
        .collect()
}

/// `tweet_id<TAB>v1<TAB>...<TAB>vd` per line; all rows must share `d`.
pub fn parse_embeddings(src: &str) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut out = BTreeMap::new();
    let mut dim = None;
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let id = parts.next().unwrap_or_default().trim().to_string();
        let v: Vec<f64> = parts
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| Error::Parse {
                    context: "embeddings.tsv".into(),
                    message: format!("line {}: bad number {s:?}", i + 1),
                })
            })
            .collect::<Result<_>>()?;
        let expected = *dim.get_or_insert(v.len());
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                tweet: id,
                expected,
                found: v.len(),
            });
        }
        out.insert(id, v);
    }
    Ok(out)
}

pub fn load_embeddings(path: &std::path::Path) -> Result<BTreeMap<String, Vec<f64>>> {
    parse_embeddings(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
