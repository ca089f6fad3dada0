use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// The design matrix (with intercept column) was rank deficient and the
    /// minimum-norm least-squares solution was used.
    pub rank_deficient: bool,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>()
    }
}

/// Ordinary least squares with an intercept, via SVD. `rows` is row-major
/// with `n_cols` columns.
pub fn ols(rows: &[f64], n_cols: usize, y: &[f64]) -> Result<LinearModel> {
    let n = y.len();
    if n == 0 || rows.len() != n * n_cols {
        return Err(Error::invalid(format!(
            "{} targets for {} feature values",
            n,
            rows.len()
        )));
    }
    let p = n_cols + 1;
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { rows[i * n_cols + j - 1] });
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * n.max(p) as f64 * f64::EPSILON;
    let rank = svd.rank(eps);
    let beta = svd
        .solve(&DVector::from_column_slice(y), eps)
        .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?;
    Ok(LinearModel {
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        rank_deficient: rank < p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let m = ols(&x, 1, &y).unwrap();
        assert_abs_diff_eq!(m.intercept, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m.coefficients[0], 2.0, epsilon = 1e-10);
        assert!(!m.rank_deficient);
    }

    #[test]
    fn duplicated_column_takes_min_norm() {
        let x: Vec<f64> = (0..10).flat_map(|i| [i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 4.0 * i as f64).collect();
        let m = ols(&x, 2, &y).unwrap();
        assert!(m.rank_deficient);
        assert_abs_diff_eq!(m.coefficients[0], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.coefficients[1], 2.0, epsilon = 1e-8);
    }
}
