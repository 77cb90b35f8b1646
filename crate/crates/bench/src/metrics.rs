use bak_core::{Scalar, SolveError};

/// Denominators at or below this magnitude are left out of the percentage mean.
pub const MAPE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mape {
    pub value: f64,
    /// Every reference entry was below the floor; `value` is the mean absolute error instead.
    pub fallback: bool,
}

/// Mean absolute percentage error of `pred` against `truth`, as a fraction
/// (0.01 = 1 %).
pub fn mape<T: Scalar>(pred: &[T], truth: &[T]) -> Result<Mape, SolveError> {
    if pred.len() != truth.len() {
        return Err(SolveError::DimensionMismatch {
            context: "mape",
            expected: truth.len(),
            found: pred.len(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        let t = t.to_f64_lossy();
        if t.abs() > MAPE_FLOOR {
            sum += (p.to_f64_lossy() - t).abs() / t.abs();
            count += 1;
        }
    }
    if count > 0 {
        return Ok(Mape {
            value: sum / count as f64,
            fallback: false,
        });
    }
    let mae = if pred.is_empty() {
        0.0
    } else {
        pred.iter()
            .zip(truth)
            .map(|(&p, &t)| (p.to_f64_lossy() - t.to_f64_lossy()).abs())
            .sum::<f64>()
            / pred.len() as f64
    };
    Ok(Mape {
        value: mae,
        fallback: true,
    })
}
