//! Block-parallel variant of the coordinate-update solver.
//!
//! Columns are processed in consecutive blocks of width `thr` (consecutive in
//! the sweep's visiting order, which is shuffled per sweep for random ordering). Every delta in
//! a block is computed against the residual as it stood at the start of the
//! block (the "stale" residual), so the deltas are independent and can be
//! computed on separate workers. The residual is then corrected once with all
//! of the block's deltas.
//!
//! With `thr = 1` this is exactly the sequential solver. Large `thr` relative
//! to the number of columns can overshoot when columns are correlated, hence
//! the divergence guard.

use std::ops::Range;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bak::{prepare, zero_target_report, ColumnOrder, Prepared, SolveConfig, SolveReport, SweepOutcome, SweepTracker};
use crate::error::{check_len, Result, SolveError};
use crate::linalg::{axpy_sub_unchecked, dot_unchecked, sum_squares, DenseMatrix, DenseVector, Scalar};

/// A sweep that multiplies the squared residual by more than this aborts the solve.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockConfig {
    pub base: SolveConfig,
    /// Block width; `1 <= thr <= vars`.
    pub thr: usize,
    /// Worker threads for the per-block deltas; 0 picks the available parallelism.
    pub worker_count: usize,
}

impl BlockConfig {
    pub fn new(base: SolveConfig, thr: usize) -> Self {
        BlockConfig {
            base,
            thr,
            worker_count: 1,
        }
    }

    pub fn with_workers(mut self, worker_count: usize) -> Self {
        self.worker_count = worker_count;
        self
    }

    fn resolved_workers(&self) -> usize {
        match self.worker_count {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        }
    }
}

#[inline]
fn delta<T: Scalar>(col: &[T], e: &[T], norm_sq: T) -> T {
    if norm_sq == T::zero() {
        T::zero()
    } else {
        dot_unchecked(col, e) / norm_sq
    }
}

/// Fills `out[i]` with the delta of column `cols[i]`. With `parallel` set the
/// slots are filled by the workers of the current rayon pool.
fn block_deltas_into<T: Scalar>(x: &DenseMatrix<T>, cols: &[usize], col_norms: &[T], e: &[T], out: &mut [T], parallel: bool) {
    if parallel {
        out.par_iter_mut().zip(cols).for_each(|(d, &j)| {
            *d = delta(x.col(j), e, col_norms[j]);
        });
    } else {
        for (d, &j) in out.iter_mut().zip(cols) {
            *d = delta(x.col(j), e, col_norms[j]);
        }
    }
}

/// Per-column deltas `<x_k, e> / <x_k, x_k>` for every `k` in `block`, all
/// against the same `e`. Zero-norm columns get a zero delta.
pub fn block_deltas<T: Scalar>(x: &DenseMatrix<T>, block: Range<usize>, e: &[T]) -> Result<DenseVector<T>> {
    check_len("block_deltas residual", x.rows(), e.len())?;
    if block.start > block.end || block.end > x.cols() {
        return Err(SolveError::IndexOutOfRange {
            index: block.end.max(block.start),
            len: x.cols(),
        });
    }
    let norms: Vec<T> = block.clone().map(|j| sum_squares(x.col(j))).collect();
    let mut out = DenseVector::zeros(block.len());
    for (i, d) in out.iter_mut().enumerate() {
        *d = delta(x.col(block.start + i), e, norms[i]);
    }
    Ok(out)
}

/// Block-parallel least-squares solve starting from `a = 0`.
///
/// The output is bit-identical for every `worker_count`: each delta is a
/// sequential dot product written to its own slot, and the residual
/// correction runs in column order after all deltas of the block are in.
pub fn solve_bakp<T: Scalar>(x: &DenseMatrix<T>, y: &[T], cfg: &BlockConfig) -> Result<SolveReport<T>> {
    let start = Instant::now();
    if cfg.thr == 0 || cfg.thr > x.cols() {
        return Err(SolveError::Config(format!(
            "block width thr={} must lie in 1..={} (number of columns)",
            cfg.thr,
            x.cols()
        )));
    }
    let Prepared { col_norms, y_norm_sq } = prepare(x, y, &cfg.base)?;
    if y_norm_sq == T::zero() {
        return Ok(zero_target_report(x, y, &cfg.base, start));
    }

    let workers = cfg.resolved_workers();
    let pool = if workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|err| SolveError::Config(format!("cannot start {workers} workers: {err}")))?,
        )
    } else {
        None
    };

    let run = |parallel: bool| -> Result<SolveReport<T>> {
        let vars = x.cols();
        let mut a = DenseVector::zeros(vars);
        let mut e = DenseVector::from_slice(y);
        let mut deltas = vec![T::zero(); cfg.thr];
        let mut order: Vec<usize> = (0..vars).collect();
        let mut rng = match cfg.base.ordering {
            ColumnOrder::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            ColumnOrder::Cyclic => None,
        };
        let mut tracker = SweepTracker::new(&cfg.base, vars, y_norm_sq, y_norm_sq);

        for sweep in 1..=cfg.base.max_iter {
            let before = tracker.prev_norm_sq();
            if let Some(rng) = rng.as_mut() {
                order.shuffle(rng);
            }
            tracker.begin_sweep(&a);
            // Blocks are consecutive runs of the visiting order; the last may be narrower than thr.
            for cols in order.chunks(cfg.thr) {
                let block = &mut deltas[..cols.len()];
                block_deltas_into(x, cols, &col_norms, &e, block, parallel);
                for (&j, &d) in cols.iter().zip(block.iter()) {
                    if col_norms[j] == T::zero() {
                        continue;
                    }
                    a[j] = a[j] + d;
                    axpy_sub_unchecked(&mut e, x.col(j), d);
                }
            }
            let e_norm_sq = sum_squares(&e);
            let (b, n) = (before.to_f64_lossy(), e_norm_sq.to_f64_lossy());
            if !n.is_finite() || n > DIVERGENCE_FACTOR * b {
                return Err(SolveError::Divergence {
                    thr: cfg.thr,
                    sweep,
                    before: b,
                    after: n,
                });
            }
            match tracker.end_sweep(e_norm_sq) {
                SweepOutcome::Continue => {}
                SweepOutcome::Converged => break,
                SweepOutcome::Stagnated => {
                    tracker.restore(&mut a);
                    break;
                }
            }
        }

        tracker.finish(x, y, a, &e, start)
    };

    // One install for the whole solve keeps block jobs on the workers' local queues.
    match &pool {
        Some(pool) => pool.install(|| run(true)),
        None => run(false),
    }
}
