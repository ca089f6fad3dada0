//! Early detection: do profile metrics (F1) and pre-takeover text
//! embeddings (F2) predict a user's MPR rank?

mod boost;
mod features;
mod hashing;
mod linear;

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::{composite_rank, MprScore};
use crate::stats::r2_score;

pub use boost::{fit_adaboost_r2, AdaBoostConfig, AdaBoostModel, RegressionTree};
pub use features::{
    build_f1, build_f2, combine, feature_correlations, load_embeddings, parse_embeddings, spearman, spearman_slices,
    standardize, F2Features, FeatureCorrelation, FeatureMatrix, FeatureSet, F1_COLUMNS,
};
pub use hashing::{HashingEmbedder, DEFAULT_HASH_DIM};
pub use linear::{ols, LinearModel};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Which MPR ordering is the regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MprTarget {
    /// Rank by `f1`, ties broken by `f2`, then `f3`.
    #[default]
    Composite,
    RankF1,
    RankF2,
    RankF3,
}

pub fn mpr_target(scores: &[MprScore], target: MprTarget) -> BTreeMap<String, f64> {
    match target {
        MprTarget::Composite => composite_rank(scores).into_iter().map(|(u, r)| (u, r as f64)).collect(),
        _ => scores
            .iter()
            .map(|s| {
                let r = match target {
                    MprTarget::RankF1 => s.rank_f1,
                    MprTarget::RankF2 => s.rank_f2,
                    _ => s.rank_f3,
                };
                (s.user.clone(), r as f64)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Adaboost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: 0,
        }
    }
}

/// R2 values are `None` where undefined (constant truth or an empty split).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub model: ModelKind,
    pub feature_set: FeatureSet,
    pub r2_train: Option<f64>,
    pub r2_holdout: Option<f64>,
    pub train_fraction: f64,
    pub seed: u64,
    pub n_users: usize,
    pub n_train: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Seeded shuffle split into (train, holdout) row indices.
pub fn train_test_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "train_fraction must be in (0, 1], got {train_fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(n.min(1), n);
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

struct Prepared {
    users: Vec<String>,
    x: FeatureMatrix,
    y: Vec<f64>,
    train: Vec<usize>,
    test: Vec<usize>,
}

fn prepare(x: &FeatureMatrix, y: &BTreeMap<String, f64>, opts: &EvalOptions) -> Result<Prepared> {
    let users: Vec<String> = x.users.iter().filter(|u| y.contains_key(*u)).cloned().collect();
    if users.is_empty() {
        return Err(Error::invalid("no user has both features and a target"));
    }
    let x = x.select(&users)?;
    let yv = users.iter().map(|u| y[u]).collect();
    let (train, test) = train_test_split(users.len(), opts.train_fraction, opts.seed)?;
    Ok(Prepared {
        users,
        x,
        y: yv,
        train,
        test,
    })
}

impl Prepared {
    fn rows(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().flat_map(|&i| self.x.row(i).iter().copied()).collect()
    }

    fn targets(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.y[i]).collect()
    }

    fn r2(&self, idx: &[usize], predict: impl Fn(&[f64]) -> f64) -> Option<f64> {
        if idx.is_empty() {
            return None;
        }
        let pred: Vec<f64> = idx.iter().map(|&i| predict(self.x.row(i))).collect();
        r2_score(&self.targets(idx), &pred)
    }
}

/// OLS with intercept on the training split, scored on both splits.
pub fn fit_linear(
    x: &FeatureMatrix,
    y: &BTreeMap<String, f64>,
    opts: &EvalOptions,
) -> Result<(LinearModel, RegressionReport)> {
    let p = prepare(x, y, opts)?;
    let model = ols(&p.rows(&p.train), p.x.n_cols(), &p.targets(&p.train))?;
    let mut notes = Vec::new();
    if p.train.len() <= p.x.n_cols() {
        notes.push(format!(
            "{} training users for {} features: no unique least-squares solution",
            p.train.len(),
            p.x.n_cols()
        ));
    }
    if model.rank_deficient {
        notes.push("rank-deficient design, minimum-norm solution used".to_string());
    }
    let mut coefficients: BTreeMap<String, f64> =
        p.x.columns
            .iter()
            .cloned()
            .zip(model.coefficients.iter().copied())
            .collect();
    coefficients.insert("intercept".into(), model.intercept);
    let report = RegressionReport {
        model: ModelKind::Linear,
        feature_set: x.feature_set,
        r2_train: p.r2(&p.train, |r| model.predict_row(r)),
        r2_holdout: p.r2(&p.test, |r| model.predict_row(r)),
        train_fraction: opts.train_fraction,
        seed: opts.seed,
        n_users: p.users.len(),
        n_train: p.train.len(),
        coefficients: Some(coefficients),
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    };
    Ok((model, report))
}

/// AdaBoost.R2 on the training split, scored on both splits. The boosting
/// seed is `opts.seed`.
pub fn fit_adaboost(
    x: &FeatureMatrix,
    y: &BTreeMap<String, f64>,
    config: &AdaBoostConfig,
    opts: &EvalOptions,
) -> Result<(AdaBoostModel, RegressionReport)> {
    let p = prepare(x, y, opts)?;
    let cfg = AdaBoostConfig {
        seed: opts.seed,
        ..*config
    };
    let model = fit_adaboost_r2(&p.rows(&p.train), p.x.n_cols(), &p.targets(&p.train), &cfg)?;
    let report = RegressionReport {
        model: ModelKind::Adaboost,
        feature_set: x.feature_set,
        r2_train: p.r2(&p.train, |r| model.predict_row(r)),
        r2_holdout: p.r2(&p.test, |r| model.predict_row(r)),
        train_fraction: opts.train_fraction,
        seed: opts.seed,
        n_users: p.users.len(),
        n_train: p.train.len(),
        coefficients: None,
        note: Some(format!("{} boosting rounds kept", model.n_rounds())),
    };
    Ok((model, report))
}

pub fn write_correlations_csv(path: &Path, rows: &[FeatureCorrelation]) -> Result<()> {
    let mut out = String::from("feature,rho,n_users\n");
    for r in rows {
        let rho = r.rho.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
        out.push_str(&format!("{},{},{}\n", r.feature, rho, r.n_users));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
