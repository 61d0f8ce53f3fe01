use crate::error::{Error, Result};
use crate::scalar::Real;

/// `start, start + step, …` up to `end`, inclusive of `end` when it lies
/// within `step·1e-9` of a grid point. Points are `start + i·step`, never
/// accumulated sums.
pub fn inclusive_range<T: Real>(start: T, end: T, step: T) -> Result<Vec<T>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) {
        return Err(Error::InvalidArgument("range bounds must be finite".into()));
    }
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument(format!("range step must be positive, got {step}")));
    }
    if end < start {
        return Err(Error::InvalidArgument(format!("range end {end} is below start {start}")));
    }
    let count = ((end - start) / step + T::lit(1e-9))
        .floor()
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("range too long".into()))?
        + 1;
    Ok((0..count).map(|i| start + T::from_usize_lossy(i) * step).collect())
}

/// Parses `A:B:STEP` into an inclusive grid, or a bare number into a
/// one-point grid.
pub fn parse_range<T: Real>(text: &str) -> Result<Vec<T>> {
    let num = |s: &str| -> Result<T> {
        s.trim()
            .parse::<f64>()
            .map(T::lit)
            .map_err(|_| Error::InvalidArgument(format!("not a number: {s:?}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [a, b, step] => inclusive_range(num(a)?, num(b)?, num(step)?),
        _ => Err(Error::InvalidArgument(format!(
            "expected A:B:STEP or a single value, got {text:?}"
        ))),
    }
}
