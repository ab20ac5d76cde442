use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::features::geometric_features;
use super::EvalError;
use crate::motion::MotionClip;

/// Added to both covariance diagonals when either is singular.
pub const RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetResult {
    pub distance: f64,
    pub ridge_applied: bool,
}

fn mean_cov(rows: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let n = rows.len();
    let d = rows[0].len();
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let mean = x.row_mean().transpose();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    (mean, cov)
}

fn sym_eigen(m: &DMatrix<f64>) -> nalgebra::SymmetricEigen<f64, nalgebra::Dyn> {
    // symmetrize first; products of rounding are not exactly symmetric
    ((m + m.transpose()) * 0.5).symmetric_eigen()
}

fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = sym_eigen(m);
    let root = e.eigenvalues.map(|l| l.max(0.0).sqrt());
    &e.eigenvectors * DMatrix::from_diagonal(&root) * e.eigenvectors.transpose()
}

fn is_singular(m: &DMatrix<f64>) -> bool {
    let e = sym_eigen(m).eigenvalues;
    let max = e.max().abs().max(1.0);
    e.min() <= 1e-12 * max
}

/// Frechet distance between Gaussians fitted to two feature matrices (one
/// row per sample). Covariances use the unbiased estimator.
pub fn frechet_from_features(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<FrechetResult, EvalError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvalError::TooFewClips(a.len().min(b.len())));
    }
    let d = a[0].len();
    if a.iter().chain(b).any(|r| r.len() != d) {
        return Err(EvalError::Shape("feature rows differ in length".into()));
    }
    let (mu_a, mut cov_a) = mean_cov(a);
    let (mu_b, mut cov_b) = mean_cov(b);
    let ridge_applied = is_singular(&cov_a) || is_singular(&cov_b);
    if ridge_applied {
        let eps = DMatrix::identity(d, d) * RIDGE;
        cov_a += &eps;
        cov_b += eps;
    }
    // tr sqrt(A B) = tr sqrt(A^1/2 B A^1/2), and the latter is symmetric
    let sa = sqrt_psd(&cov_a);
    let inner = &sa * &cov_b * &sa;
    let tr_sqrt: f64 = sym_eigen(&inner).eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    let distance = (mu_a - mu_b).norm_squared() + cov_a.trace() + cov_b.trace() - 2.0 * tr_sqrt;
    Ok(FrechetResult { distance: distance.max(0.0), ridge_applied })
}

pub fn frechet_feature_distance(a: &[MotionClip], b: &[MotionClip]) -> Result<FrechetResult, EvalError> {
    let feats = |clips: &[MotionClip]| clips.iter().map(|c| geometric_features(c).to_vec()).collect::<Vec<_>>();
    frechet_from_features(&feats(a), &feats(b))
}
