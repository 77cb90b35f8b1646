//! Greedy forward feature selection driven by single-column trial updates,
//! plus classic forward stepwise regression as an (expensive) reference.
//!
//! A single coordinate step on column `j` reduces the squared residual by
//! exactly `<x_j, e>² / <x_j, x_j>`, so the trial residual of every candidate
//! can be scored with one dot product and without materializing it.

use std::time::{Duration, Instant};

use crate::bak::{solve_bak_from, SolveConfig};
use crate::error::{check_len, Result, SolveError};
use crate::linalg::{dot_unchecked, residual, sum_squares, DenseMatrix, DenseVector, Scalar};
use crate::qr::qr_least_squares;

/// How coefficients are re-fit on the selected columns after each addition.
#[derive(Debug, Clone, PartialEq)]
pub enum Refit {
    Qr,
    /// Coordinate-update solve warm-started from the previous step's coefficients.
    Bak(SolveConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSelectConfig {
    pub max_feat: usize,
    pub refit: Refit,
    /// Stop once `|e| / |y| <= stop_tol`; zero disables.
    pub stop_tol: f64,
}

impl FeatureSelectConfig {
    pub fn new(max_feat: usize) -> Self {
        FeatureSelectConfig {
            max_feat,
            refit: Refit::Qr,
            stop_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureSelectionReport<T> {
    /// Column indices in the order they were added.
    pub selected: Vec<usize>,
    /// `Σe²` after each step.
    pub residual_norms: Vec<T>,
    /// Coefficients for `selected`, in the same order.
    pub final_coeffs: DenseVector<T>,
    pub wall_time: Duration,
}

/// Scores every column by the squared norm of its one-step trial residual.
///
/// Excluded and zero-norm columns score `+∞`. Returns the best column (lowest
/// index on ties) and the full score vector.
pub fn score_all_columns<T: Scalar>(x: &DenseMatrix<T>, e: &[T], excluded: &[usize]) -> Result<(usize, DenseVector<T>)> {
    check_len("score_all_columns residual", x.rows(), e.len())?;
    let e_sq = sum_squares(e);
    let mut scores = DenseVector::from_vec(vec![T::infinity(); x.cols()]);
    let mut best: Option<usize> = None;
    for (j, col) in x.columns().enumerate() {
        if excluded.contains(&j) {
            continue;
        }
        let norm_sq = sum_squares(col);
        if norm_sq == T::zero() {
            continue;
        }
        let c = dot_unchecked(col, e);
        let da = c / norm_sq;
        let s = (e_sq - da * c).max(T::zero());
        scores[j] = s;
        if best.is_none_or(|b| s < scores[b]) {
            best = Some(j);
        }
    }
    best.map(|b| (b, scores)).ok_or(SolveError::SelectionExhausted)
}

fn check_inputs<T: Scalar>(x: &DenseMatrix<T>, y: &[T], max_feat: usize) -> Result<()> {
    check_len("target length vs matrix rows", x.rows(), y.len())?;
    if max_feat == 0 || max_feat > x.cols() {
        return Err(SolveError::Config(format!(
            "max_feat={max_feat} must lie in 1..={}",
            x.cols()
        )));
    }
    Ok(())
}

/// Greedy forward selection: score, append the best column, refit, repeat.
///
/// Stops after `max_feat` columns, when the relative residual reaches
/// `stop_tol`, or when no admissible column remains.
pub fn select_features<T: Scalar>(x: &DenseMatrix<T>, y: &[T], cfg: &FeatureSelectConfig) -> Result<FeatureSelectionReport<T>> {
    let start = Instant::now();
    check_inputs(x, y, cfg.max_feat)?;
    if let Refit::Bak(c) = &cfg.refit {
        c.validate()?;
    }
    let y_sq = sum_squares(y).to_f64_lossy();

    let mut selected = Vec::with_capacity(cfg.max_feat);
    let mut residual_norms = Vec::with_capacity(cfg.max_feat);
    let mut coeffs: Vec<T> = Vec::with_capacity(cfg.max_feat);
    let mut e = DenseVector::from_slice(y);

    while selected.len() < cfg.max_feat {
        let best = match score_all_columns(x, &e, &selected) {
            Ok((best, _)) => best,
            Err(SolveError::SelectionExhausted) => break,
            Err(err) => return Err(err),
        };
        selected.push(best);
        let sub = x.select_columns(&selected)?;
        coeffs = match &cfg.refit {
            Refit::Qr => qr_least_squares(&sub, y)?.coeffs.into_vec(),
            Refit::Bak(c) => {
                coeffs.push(T::zero());
                solve_bak_from(&sub, y, c, Some(&coeffs))?.a_hat.into_vec()
            }
        };
        e = residual(&sub, y, &coeffs)?;
        let e_sq = sum_squares(&e);
        residual_norms.push(e_sq);
        if cfg.stop_tol > 0.0 && e_sq.to_f64_lossy() <= cfg.stop_tol * cfg.stop_tol * y_sq {
            break;
        }
    }

    Ok(FeatureSelectionReport {
        selected,
        residual_norms,
        final_coeffs: DenseVector::from_vec(coeffs),
        wall_time: start.elapsed(),
    })
}

/// Classic forward stepwise regression: every candidate is tried by a full
/// QR refit on `selected ∪ {candidate}` and the lowest residual wins.
pub fn stepwise_baseline<T: Scalar>(x: &DenseMatrix<T>, y: &[T], max_feat: usize) -> Result<FeatureSelectionReport<T>> {
    let start = Instant::now();
    check_inputs(x, y, max_feat)?;

    let mut selected: Vec<usize> = Vec::with_capacity(max_feat);
    let mut residual_norms = Vec::with_capacity(max_feat);
    let mut coeffs = DenseVector::zeros(0);
    let mut trial = Vec::with_capacity(max_feat);

    while selected.len() < max_feat {
        let mut best: Option<(usize, T, DenseVector<T>)> = None;
        for (j, col) in x.columns().enumerate() {
            if selected.contains(&j) || sum_squares(col) == T::zero() {
                continue;
            }
            trial.clear();
            trial.extend_from_slice(&selected);
            trial.push(j);
            let sub = x.select_columns(&trial)?;
            let a = qr_least_squares(&sub, y)?.coeffs;
            let score = sum_squares(&residual(&sub, y, &a)?);
            if best.as_ref().is_none_or(|(_, s, _)| score < *s) {
                best = Some((j, score, a));
            }
        }
        let Some((j, score, a)) = best else { break };
        selected.push(j);
        residual_norms.push(score);
        coeffs = a;
    }

    Ok(FeatureSelectionReport {
        selected,
        residual_norms,
        final_coeffs: coeffs,
        wall_time: start.elapsed(),
    })
}
