use std::collections::BTreeMap;

use modshift_core::earlydetect::{
    fit_adaboost, fit_adaboost_r2, fit_linear, ols, spearman, AdaBoostConfig, EvalOptions, FeatureMatrix, FeatureSet,
};
use modshift_core::stats::{mean, r2_score};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Normal equations (X'X) b = X'y solved by Gauss-Jordan with partial pivoting.
fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len() + 1;
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (r, &t) in design.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += r[i] * r[j];
            }
            a[i][p] += r[i] * t;
        }
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        let pivot = a[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != c {
                let f = row[c] / pivot[c];
                for (x, pv) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * pv;
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

fn to_matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    FeatureMatrix::new(
        (0..rows.len()).map(|i| format!("u{i:05}")).collect(),
        (0..rows[0].len()).map(|j| format!("x{j}")).collect(),
        rows.concat(),
        FeatureSet::F1,
    )
    .unwrap()
}

fn target(x: &FeatureMatrix, y: &[f64]) -> BTreeMap<String, f64> {
    x.users.iter().cloned().zip(y.iter().copied()).collect()
}

#[test]
fn ols_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<Vec<f64>> = (0..100).map(|_| vec![rng.random_range(-5.0..5.0)]).collect();
    let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 3.0).collect();
    let m = ols(&rows.concat(), 1, &y).unwrap();
    let oracle = normal_equations(&rows, &y);
    assert!((m.intercept - oracle[0]).abs() < 1e-6 && (m.intercept - 3.0).abs() < 1e-6);
    assert!((m.coefficients[0] - oracle[1]).abs() < 1e-6 && (m.coefficients[0] - 2.0).abs() < 1e-6);

    let rows: Vec<Vec<f64>> = (0..80)
        .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let y: Vec<f64> = (0..80).map(|_| rng.random_range(-1.0..1.0)).collect();
    let m = ols(&rows.concat(), 4, &y).unwrap();
    let oracle = normal_equations(&rows, &y);
    assert!((m.intercept - oracle[0]).abs() < 1e-9);
    for j in 0..4 {
        assert!((m.coefficients[j] - oracle[j + 1]).abs() < 1e-9);
    }
}

#[test]
fn residuals_orthogonal_to_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r[0] - r[1] * r[2] + rng.random_range(-0.5..0.5))
        .collect();
    let m = ols(&rows.concat(), 3, &y).unwrap();
    let resid: Vec<f64> = rows.iter().zip(&y).map(|(r, t)| t - m.predict_row(r)).collect();
    assert!(resid.iter().sum::<f64>().abs() < 1e-8);
    for j in 0..3 {
        let dot: f64 = rows.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
        assert!(dot.abs() < 1e-8, "column {j}: {dot}");
    }
}

#[test]
fn mean_predictor_scores_zero() {
    let y = [3.0, -1.0, 4.0, 1.5, 9.0];
    let m = mean(&y);
    assert!(r2_score(&y, &[m; 5]).unwrap().abs() < 1e-9);
}

#[test]
fn noise_target_has_no_skill() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let rows: Vec<Vec<f64>> = (0..2000)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = to_matrix(&rows);
        let (_, rep) = fit_linear(
            &x,
            &target(&x, &y),
            &EvalOptions {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        let r2 = rep.r2_holdout.unwrap();
        assert!(r2.abs() < 0.1, "seed {seed}: {r2}");
    }
}

#[test]
fn boosting_loss_nonincreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| (r[0] * 0.8).sin() * 3.0 + r[1]).collect();
    let x = rows.concat();
    let model = fit_adaboost_r2(
        &x,
        2,
        &y,
        &AdaBoostConfig {
            rounds: 30,
            max_depth: 3,
            seed: 2,
        },
    )
    .unwrap();
    assert!(model.round_losses.iter().all(|&l| l < 0.5));
    let loss = model.training_loss();
    assert_eq!(loss.len(), model.n_rounds());
    let mut prev = 1.0;
    for (k, &l) in loss.iter().enumerate() {
        assert!(l <= prev, "round {}: {l} > {prev}", k + 1);
        prev = l;
    }
    assert!(prev < 1.0);
}

#[test]
fn boosting_beats_ols_on_piecewise_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rows: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(-3.0..3.0)]).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| match r[0] {
            v if v < -1.0 => 5.0,
            v if v < 1.0 => -2.0,
            _ => 4.0,
        })
        .collect();
    let x = to_matrix(&rows);
    let y = target(&x, &y);
    let opts = EvalOptions {
        train_fraction: 1.0,
        seed: 3,
    };
    let (_, lin) = fit_linear(&x, &y, &opts).unwrap();
    let (_, ada) = fit_adaboost(&x, &y, &AdaBoostConfig::default(), &opts).unwrap();
    assert!(ada.r2_train.unwrap() > lin.r2_train.unwrap(), "{ada:?} vs {lin:?}");
}

#[test]
fn adaboost_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0].abs() + r[1]).collect();
    let x = to_matrix(&rows);
    let y = target(&x, &y);
    let a = fit_adaboost(&x, &y, &AdaBoostConfig::default(), &EvalOptions::default())
        .unwrap()
        .1;
    let b = fit_adaboost(&x, &y, &AdaBoostConfig::default(), &EvalOptions::default())
        .unwrap()
        .1;
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn spearman_monotone_invariant(vals in prop::collection::vec(-100.0f64..100.0, 3..30)) {
        let t: BTreeMap<String, f64> = vals.iter().enumerate().map(|(i, _)| (format!("u{i:03}"), i as f64)).collect();
        let f: BTreeMap<String, f64> = vals.iter().enumerate().map(|(i, &v)| (format!("u{i:03}"), v)).collect();
        let g: BTreeMap<String, f64> = f.iter().map(|(k, &v)| (k.clone(), (v / 50.0).exp() * 3.0 + 1.0)).collect();
        let neg: BTreeMap<String, f64> = f.iter().map(|(k, &v)| (k.clone(), -v)).collect();
        let a = spearman(&t, &f).unwrap();
        let b = spearman(&t, &g).unwrap();
        prop_assert_eq!(a.is_some(), b.is_some());
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
            prop_assert!((spearman(&t, &neg).unwrap().unwrap() + a).abs() < 1e-12);
        }
        prop_assert!((spearman(&f, &f).unwrap().unwrap_or(1.0) - 1.0).abs() < 1e-12);
    }
}
