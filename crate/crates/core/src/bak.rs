//! Sequential coordinate-update solver.
//!
//! Each step projects the current residual `e` onto a single column `x_j`:
//!
//! ```text
//! da  = <x_j, e> / <x_j, x_j>
//! e  <- e - da * x_j
//! a_j <- a_j + da
//! ```
//!
//! After the step `e` is orthogonal to `x_j`, so
//! `|e|² - |e_next|² = da² |x_j|²` and the squared residual never grows.
//! A sweep visits every column once; sweeps repeat until the relative
//! residual `|e| / |y|` drops to `tol` or `max_iter` sweeps have run.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Result, SolveError};
use crate::linalg::{axpy_sub_unchecked, dot_unchecked, residual, sum_squares, DenseMatrix, DenseVector, Scalar};

/// Maximum tolerated disagreement, relative to `|y|`, between the
/// incrementally maintained residual and one recomputed from scratch.
pub const DRIFT_TOLERANCE: f64 = 1e-4;

/// Order in which a sweep visits the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnOrder {
    Cyclic,
    /// A fresh permutation of all columns every sweep, drawn from a seeded stream.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Maximum number of sweeps; at least one.
    pub max_iter: usize,
    /// Relative residual threshold `|e| / |y|`, checked after each sweep. Zero disables early stopping.
    pub tol: f64,
    pub ordering: ColumnOrder,
    /// Keep the squared residual norm after every sweep.
    pub record_history: bool,
    /// Stop when a sweep fails to lower `Σe²`, keeping the coefficients from
    /// before that sweep. This only triggers at the rounding floor of the
    /// working precision, where further sweeps shuffle rounding noise.
    pub stop_on_stagnation: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iter: 1000,
            tol: 1e-6,
            ordering: ColumnOrder::Cyclic,
            record_history: true,
            stop_on_stagnation: true,
        }
    }
}

impl SolveConfig {
    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_ordering(mut self, ordering: ColumnOrder) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn with_stagnation_stop(mut self, enabled: bool) -> Self {
        self.stop_on_stagnation = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(SolveError::Config("max_iter must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(SolveError::Config(format!("tol must be finite and nonnegative, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Result of a solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub a_hat: DenseVector<T>,
    /// `y - x·a_hat`, recomputed from scratch after the last sweep.
    pub residual: DenseVector<T>,
    /// Squared residual norm after each accepted sweep; `None` unless history was requested.
    pub residual_norm_history: Option<Vec<T>>,
    /// Accepted sweeps. A sweep discarded by the stagnation stop is not counted.
    pub sweeps_run: usize,
    pub converged: bool,
    /// The stagnation stop fired: the last sweep did not lower `Σe²` and was rolled back.
    pub stagnated: bool,
    /// The maintained residual drifted from the recomputed one by more than [`DRIFT_TOLERANCE`].
    pub residual_drift: bool,
    pub wall_time: Duration,
}

impl<T: Scalar> SolveReport<T> {
    /// `|residual| / |y|`, or `|residual|` when `y` is zero.
    pub fn relative_residual(&self, y: &[T]) -> f64 {
        let r = sum_squares(&self.residual).to_f64_lossy().sqrt();
        let yn = sum_squares(y).to_f64_lossy().sqrt();
        if yn > 0.0 {
            r / yn
        } else {
            r
        }
    }

    /// Bitwise equality of every field except `wall_time`.
    pub fn numerically_identical(&self, other: &Self) -> bool {
        fn same<T: Scalar>(a: &[T], b: &[T]) -> bool {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(p, q)| p.to_f64_lossy().to_bits() == q.to_f64_lossy().to_bits())
        }
        same(&self.a_hat, &other.a_hat)
            && same(&self.residual, &other.residual)
            && match (&self.residual_norm_history, &other.residual_norm_history) {
                (Some(h), Some(g)) => same(h, g),
                (None, None) => true,
                _ => false,
            }
            && self.sweeps_run == other.sweeps_run
            && self.converged == other.converged
            && self.stagnated == other.stagnated
            && self.residual_drift == other.residual_drift
    }
}

/// Outcome of a single [`coordinate_update`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateStep<T> {
    /// The residual was updated by `e ← e − da·col`.
    Applied { da: T },
    /// The column has zero norm; the residual is untouched and the coefficient stays frozen.
    SkippedZeroColumn,
}

/// One coordinate step on `e`, in place.
pub fn coordinate_update<T: Scalar>(col: &[T], e: &mut [T]) -> Result<CoordinateStep<T>> {
    check_len("coordinate_update", col.len(), e.len())?;
    let norm_sq = sum_squares(col);
    if norm_sq == T::zero() {
        return Ok(CoordinateStep::SkippedZeroColumn);
    }
    Ok(CoordinateStep::Applied {
        da: step_in_place(col, e, norm_sq),
    })
}

/// Projection step with a precomputed `|col|² > 0`. Returns `da`.
#[inline]
pub(crate) fn step_in_place<T: Scalar>(col: &[T], e: &mut [T], norm_sq: T) -> T {
    let da = dot_unchecked(col, e) / norm_sq;
    axpy_sub_unchecked(e, col, da);
    da
}

/// Sum of squared residuals `Σ e_i²`.
pub fn residual_norm<T: Scalar>(e: &[T]) -> T {
    sum_squares(e)
}

/// Setup shared by the sequential and block solvers.
pub(crate) struct Prepared<T> {
    pub col_norms: Vec<T>,
    pub y_norm_sq: T,
}

pub(crate) fn prepare<T: Scalar>(x: &DenseMatrix<T>, y: &[T], cfg: &SolveConfig) -> Result<Prepared<T>> {
    cfg.validate()?;
    check_len("target length vs matrix rows", x.rows(), y.len())?;
    let col_norms: Vec<T> = x.columns().map(sum_squares).collect();
    if col_norms.iter().all(|&n| n == T::zero()) {
        return Err(SolveError::DegenerateInput("every column of x is zero"));
    }
    Ok(Prepared {
        col_norms,
        y_norm_sq: sum_squares(y),
    })
}

pub(crate) fn zero_target_report<T: Scalar>(x: &DenseMatrix<T>, y: &[T], cfg: &SolveConfig, start: Instant) -> SolveReport<T> {
    SolveReport {
        a_hat: DenseVector::zeros(x.cols()),
        residual: DenseVector::from_slice(y),
        residual_norm_history: cfg.record_history.then(Vec::new),
        sweeps_run: 0,
        converged: true,
        stagnated: false,
        residual_drift: false,
        wall_time: start.elapsed(),
    }
}

/// What a finished sweep means for the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SweepOutcome {
    Continue,
    Converged,
    /// `Σe²` did not decrease; the caller must restore the snapshot.
    Stagnated,
}

/// Per-sweep bookkeeping shared by the sequential and block solvers:
/// history, the relative-residual stop, and the stagnation snapshot.
pub(crate) struct SweepTracker<T> {
    history: Option<Vec<T>>,
    snapshot: Vec<T>,
    prev_norm_sq: T,
    y_norm_sq: T,
    tol: f64,
    guard: bool,
    pub sweeps_run: usize,
    pub converged: bool,
    pub stagnated: bool,
}

impl<T: Scalar> SweepTracker<T> {
    pub fn new(cfg: &SolveConfig, vars: usize, y_norm_sq: T, start_norm_sq: T) -> Self {
        SweepTracker {
            history: cfg.record_history.then(|| Vec::with_capacity(cfg.max_iter)),
            snapshot: if cfg.stop_on_stagnation { vec![T::zero(); vars] } else { Vec::new() },
            prev_norm_sq: start_norm_sq,
            y_norm_sq,
            tol: cfg.tol,
            guard: cfg.stop_on_stagnation,
            sweeps_run: 0,
            converged: false,
            stagnated: false,
        }
    }

    pub fn prev_norm_sq(&self) -> T {
        self.prev_norm_sq
    }

    #[inline]
    pub fn begin_sweep(&mut self, a: &[T]) {
        if self.guard {
            self.snapshot.copy_from_slice(a);
        }
    }

    pub fn end_sweep(&mut self, e_norm_sq: T) -> SweepOutcome {
        if self.guard && !(e_norm_sq < self.prev_norm_sq) {
            self.stagnated = true;
            return SweepOutcome::Stagnated;
        }
        self.sweeps_run += 1;
        self.prev_norm_sq = e_norm_sq;
        if let Some(h) = self.history.as_mut() {
            h.push(e_norm_sq);
        }
        if self.tol > 0.0 && e_norm_sq.to_f64_lossy() <= self.tol * self.tol * self.y_norm_sq.to_f64_lossy() {
            self.converged = true;
            return SweepOutcome::Converged;
        }
        SweepOutcome::Continue
    }

    /// Puts the pre-sweep coefficients back into `a`.
    pub fn restore(&self, a: &mut [T]) {
        a.copy_from_slice(&self.snapshot);
    }

    /// Builds the report, recomputing the residual from scratch and
    /// comparing it with the maintained one.
    pub fn finish(self, x: &DenseMatrix<T>, y: &[T], a: DenseVector<T>, e: &[T], start: Instant) -> Result<SolveReport<T>> {
        let fresh = residual(x, y, &a)?;
        let residual_drift = if self.stagnated {
            // The maintained residual belongs to the discarded sweep.
            false
        } else {
            let gap: f64 = fresh
                .iter()
                .zip(e)
                .map(|(&f, &m)| (f - m).to_f64_lossy().powi(2))
                .sum::<f64>()
                .sqrt();
            gap > DRIFT_TOLERANCE * self.y_norm_sq.to_f64_lossy().sqrt()
        };
        Ok(SolveReport {
            a_hat: a,
            residual: fresh,
            residual_norm_history: self.history,
            sweeps_run: self.sweeps_run,
            converged: self.converged,
            stagnated: self.stagnated,
            residual_drift,
            wall_time: start.elapsed(),
        })
    }
}

/// Solves `x·a ≈ y` in the least-squares sense starting from `a = 0`.
pub fn solve_bak<T: Scalar>(x: &DenseMatrix<T>, y: &[T], cfg: &SolveConfig) -> Result<SolveReport<T>> {
    solve_bak_from(x, y, cfg, None)
}

/// [`solve_bak`] with an optional warm start.
pub fn solve_bak_from<T: Scalar>(
    x: &DenseMatrix<T>,
    y: &[T],
    cfg: &SolveConfig,
    initial: Option<&[T]>,
) -> Result<SolveReport<T>> {
    let start = Instant::now();
    let Prepared { col_norms, y_norm_sq } = prepare(x, y, cfg)?;
    if y_norm_sq == T::zero() {
        return Ok(zero_target_report(x, y, cfg, start));
    }

    let (mut a, mut e) = match initial {
        Some(a0) => {
            check_len("initial guess", x.cols(), a0.len())?;
            let a = DenseVector::from_slice(a0);
            let e = residual(x, y, &a)?;
            (a, e)
        }
        None => (DenseVector::zeros(x.cols()), DenseVector::from_slice(y)),
    };

    let mut order: Vec<usize> = (0..x.cols()).collect();
    let mut rng = match cfg.ordering {
        ColumnOrder::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        ColumnOrder::Cyclic => None,
    };
    let mut tracker = SweepTracker::new(cfg, x.cols(), y_norm_sq, sum_squares(&e));

    for _ in 0..cfg.max_iter {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        tracker.begin_sweep(&a);
        for &j in &order {
            let norm_sq = col_norms[j];
            if norm_sq == T::zero() {
                continue;
            }
            let da = step_in_place(x.col(j), &mut e, norm_sq);
            a[j] = a[j] + da;
        }
        match tracker.end_sweep(sum_squares(&e)) {
            SweepOutcome::Continue => {}
            SweepOutcome::Converged => break,
            SweepOutcome::Stagnated => {
                tracker.restore(&mut a);
                break;
            }
        }
    }

    tracker.finish(x, y, a, &e, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{generate_system, SystemSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coordinate_update_examples() {
        let mut e = [3.0, 4.0];
        let step = coordinate_update(&[1.0, 2.0], &mut e).unwrap();
        let CoordinateStep::Applied { da } = step else { panic!("expected step") };
        assert!(close(da, 2.2, 1e-15));
        assert!(close(e[0], 0.8, 1e-12) && close(e[1], -0.4, 1e-12));

        let mut e = [0.0, 5.0];
        assert_eq!(coordinate_update(&[1.0, 0.0], &mut e).unwrap(), CoordinateStep::Applied { da: 0.0 });
        assert_eq!(e, [0.0, 5.0]);

        let col = [0.5, -1.5, 2.0];
        let mut e = col;
        assert_eq!(coordinate_update(&col, &mut e).unwrap(), CoordinateStep::Applied { da: 1.0 });
        assert_eq!(e, [0.0; 3]);
    }

    #[test]
    fn coordinate_update_zero_column_is_skipped() {
        let mut e = [1.0, 2.0];
        assert_eq!(coordinate_update(&[0.0, 0.0], &mut e).unwrap(), CoordinateStep::SkippedZeroColumn);
        assert_eq!(e, [1.0, 2.0]);
        assert!(coordinate_update(&[1.0], &mut e).is_err());
    }

    #[test]
    fn residual_norm_examples() {
        assert!(close(residual_norm(&[0.8, -0.4]), 0.8, 1e-15));
        assert_eq!(residual_norm(&[0.0f32; 4]), 0.0);
        assert_eq!(residual_norm(&[1.0, 1.0, 1.0]), 3.0);
    }

    #[test]
    fn identity_system_solved_in_one_sweep() {
        let x = DenseMatrix::<f64>::identity(3).unwrap();
        let cfg = SolveConfig::default().with_tol(0.0).with_max_iter(1);
        let r = solve_bak(&x, &[1.0, 2.0, 3.0], &cfg).unwrap();
        assert_eq!(r.a_hat.as_slice(), &[1.0, 2.0, 3.0]);
        assert!(r.residual.iter().all(|&v| v == 0.0));
        assert_eq!(r.sweeps_run, 1);
        assert!(!r.converged);
    }

    #[test]
    fn orthogonal_columns_reach_least_squares_in_one_sweep() {
        // Columns (1,1,0,0), (1,-1,0,0), (0,0,2,0); row 4 is unreachable.
        let x = DenseMatrix::from_col_major(
            4,
            3,
            vec![1.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0],
        )
        .unwrap();
        let y = [3.0, 1.0, 4.0, 7.0];
        let r = solve_bak(&x, &y, &SolveConfig::default().with_tol(0.0).with_max_iter(1)).unwrap();
        // Closed form: a_j = <x_j, y> / |x_j|², residual = (0, 0, 0, 7).
        assert_eq!(r.a_hat.as_slice(), &[2.0, 1.0, 2.0]);
        assert_eq!(r.residual.as_slice(), &[0.0, 0.0, 0.0, 7.0]);
    }

    #[test]
    fn zero_columns_keep_their_coefficient() {
        let x = DenseMatrix::from_col_major(3, 2, vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0]).unwrap();
        let r = solve_bak(&x, &[2.0, 4.0, 6.0], &SolveConfig::default()).unwrap();
        assert_eq!(r.a_hat[0], 0.0);
        assert!(close(r.a_hat[1], 2.0, 1e-12));
        assert!(r.converged);
    }

    #[test]
    fn warm_start_keeps_frozen_coefficients() {
        let x = DenseMatrix::from_col_major(2, 2, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let r = solve_bak_from(&x, &[1.0, 1.0], &SolveConfig::default(), Some(&[5.0, 0.5])).unwrap();
        assert_eq!(r.a_hat[0], 5.0);
        assert!(close(r.a_hat[1], 1.0, 1e-12));
    }

    #[test]
    fn degenerate_inputs() {
        let zeros = DenseMatrix::<f64>::zeros(3, 2).unwrap();
        assert!(matches!(
            solve_bak(&zeros, &[1.0, 2.0, 3.0], &SolveConfig::default()),
            Err(SolveError::DegenerateInput(_))
        ));
        let x = DenseMatrix::<f64>::identity(3).unwrap();
        assert!(matches!(
            solve_bak(&x, &[1.0, 2.0], &SolveConfig::default()),
            Err(SolveError::DimensionMismatch { .. })
        ));
        assert!(solve_bak(&x, &[1.0; 3], &SolveConfig::default().with_max_iter(0)).is_err());
        assert!(solve_bak(&x, &[1.0; 3], &SolveConfig::default().with_tol(-1.0)).is_err());

        let r = solve_bak(&x, &[0.0; 3], &SolveConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.sweeps_run, 0);
        assert!(r.a_hat.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn random_ordering_is_seeded() {
        let s = generate_system::<f64>(&SystemSpec::new(60, 12, 4).with_noise(0.1)).unwrap();
        let cfg = SolveConfig::default()
            .with_max_iter(3)
            .with_tol(0.0)
            .with_ordering(ColumnOrder::Random { seed: 9 });
        let a = solve_bak(&s.x, &s.y, &cfg).unwrap();
        let b = solve_bak(&s.x, &s.y, &cfg).unwrap();
        assert!(a.numerically_identical(&b));
        let cyclic = solve_bak(&s.x, &s.y, &cfg.clone().with_ordering(ColumnOrder::Cyclic)).unwrap();
        assert!(!a.numerically_identical(&cyclic));
    }

    #[test]
    fn history_only_when_requested() {
        let s = generate_system::<f64>(&SystemSpec::new(30, 5, 2)).unwrap();
        let mut cfg = SolveConfig::default();
        let with = solve_bak(&s.x, &s.y, &cfg).unwrap();
        assert_eq!(with.residual_norm_history.as_ref().unwrap().len(), with.sweeps_run);
        cfg.record_history = false;
        assert!(solve_bak(&s.x, &s.y, &cfg).unwrap().residual_norm_history.is_none());
    }

    #[test]
    fn stagnation_stop_rolls_back_the_last_sweep() {
        let s = generate_system::<f64>(&SystemSpec::new(200, 20, 0).with_noise(0.1)).unwrap();
        let cfg = SolveConfig::default().with_tol(0.0).with_max_iter(500);
        let guarded = solve_bak(&s.x, &s.y, &cfg).unwrap();
        assert!(guarded.stagnated && !guarded.converged);
        let h = guarded.residual_norm_history.as_ref().unwrap();
        assert_eq!(h.len(), guarded.sweeps_run);
        assert!(h.windows(2).all(|w| w[1] < w[0]));

        // Without the guard the same run keeps sweeping through rounding noise.
        let raw = solve_bak(&s.x, &s.y, &cfg.clone().with_stagnation_stop(false)).unwrap();
        assert_eq!(raw.sweeps_run, 500);
        let raw_h = raw.residual_norm_history.unwrap();
        assert!(raw_h.windows(2).any(|w| w[1] > w[0]));
        // Both sit at the least-squares floor.
        let (g, r) = (residual_norm(&guarded.residual), residual_norm(&raw.residual));
        assert!((g - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn consistent_single_precision_system_converges() {
        let s = generate_system::<f32>(&SystemSpec::new(1000, 100, 1)).unwrap();
        let r = solve_bak(&s.x, &s.y, &SolveConfig::default()).unwrap();
        assert!(!r.residual_drift);
        assert!(r.relative_residual(&s.y) < 1e-5, "rel {}", r.relative_residual(&s.y));
    }
}
