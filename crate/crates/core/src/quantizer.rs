//! Nearest-neighbor scalar quantizers for zero-mean Gaussian inputs.

use std::any::TypeId;
use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{cell_moments, std_normal_quantile, truncated_mean, SourceBiasModel};
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// A k-level quantizer: cells `[b_{i-1}, b_i)` with `b_0 = -∞`, `b_k = +∞`,
/// and one reconstruction level per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuantizerRepr<T>", into = "QuantizerRepr<T>")]
#[serde(bound = "T: Real")]
pub struct ScalarQuantizer<T> {
    boundaries: Vec<T>,
    levels: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct QuantizerRepr<T> {
    k: usize,
    boundaries: Vec<T>,
    levels: Vec<T>,
}

impl<T: Real> TryFrom<QuantizerRepr<T>> for ScalarQuantizer<T> {
    type Error = Error;

    fn try_from(repr: QuantizerRepr<T>) -> Result<Self> {
        if repr.k != repr.levels.len() {
            return Err(Error::InvalidQuantizer(format!(
                "k = {} but {} levels given",
                repr.k,
                repr.levels.len()
            )));
        }
        Self::new(repr.boundaries, repr.levels)
    }
}

impl<T: Real> From<ScalarQuantizer<T>> for QuantizerRepr<T> {
    fn from(q: ScalarQuantizer<T>) -> Self {
        Self {
            k: q.levels.len(),
            boundaries: q.boundaries,
            levels: q.levels,
        }
    }
}

impl<T: Real> ScalarQuantizer<T> {
    pub fn new(boundaries: Vec<T>, levels: Vec<T>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidQuantizer(msg));
        if levels.is_empty() {
            return bad("at least one level required".into());
        }
        if boundaries.len() + 1 != levels.len() {
            return bad(format!(
                "{} levels need {} boundaries, got {}",
                levels.len(),
                levels.len() - 1,
                boundaries.len()
            ));
        }
        if boundaries.iter().chain(&levels).any(|v| !v.is_finite()) {
            return bad("boundaries and levels must be finite".into());
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("levels must be strictly increasing".into());
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("boundaries must be strictly increasing".into());
        }
        for (i, b) in boundaries.iter().enumerate() {
            if !(levels[i] < *b && *b < levels[i + 1]) {
                return bad(format!("boundary {i} does not separate its neighboring levels"));
            }
        }
        Ok(Self { boundaries, levels })
    }

    /// The one-level quantizer that maps everything to `level`.
    pub fn constant(level: T) -> Self {
        Self {
            boundaries: Vec::new(),
            levels: vec![level],
        }
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    /// Index of the cell containing `x`. A point on a boundary belongs to the
    /// cell on its right.
    #[inline]
    pub fn cell_index(&self, x: T) -> usize {
        self.boundaries.partition_point(|b| *b <= x)
    }

    #[inline]
    pub fn encode(&self, x: T) -> T {
        self.levels[self.cell_index(x)]
    }

    /// Cell `i` as an open interval with explicit infinite outer edges.
    pub fn cell(&self, i: usize) -> (T, T) {
        let lo = if i == 0 {
            T::neg_infinity()
        } else {
            self.boundaries[i - 1]
        };
        let hi = self.boundaries.get(i).copied().unwrap_or_else(T::infinity);
        (lo, hi)
    }

    /// The quantizer for `c·X` given the one for `X` (`c > 0`).
    pub fn scaled(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {c}")));
        }
        Self::new(
            self.boundaries.iter().map(|b| *b * c).collect(),
            self.levels.iter().map(|l| *l * c).collect(),
        )
    }
}

/// Per-cell moments of N(0, σ²) under `q`: Σ r·m1 and Σ r²·p, plus the
/// exact MSE.
struct CellSums<T> {
    level_first: T,
    level_sq_mass: T,
    mse: T,
}

fn cell_sums<T: Real>(q: &ScalarQuantizer<T>, sigma2: T) -> CellSums<T> {
    let mut sums = CellSums {
        level_first: T::zero(),
        level_sq_mass: T::zero(),
        mse: T::zero(),
    };
    for (i, &level) in q.levels.iter().enumerate() {
        let (a, b) = q.cell(i);
        let m = cell_moments(a, b, sigma2);
        sums.level_first += level * m.first;
        sums.level_sq_mass += level * level * m.mass;
        sums.mse += m.second - T::lit(2.0) * level * m.first + level * level * m.mass;
    }
    sums
}

/// E[(X − Q(X))²] for X ~ N(0, σ²), in closed form.
pub fn quantizer_distortion<T: Real>(q: &ScalarQuantizer<T>, sigma2: T) -> T {
    cell_sums(q, sigma2).mse
}

/// Outcome of a Lloyd-Max run.
#[derive(Debug, Clone)]
pub struct LloydMaxRun<T> {
    pub quantizer: ScalarQuantizer<T>,
    pub distortion: T,
    pub iterations: usize,
    /// Distortion of the initial quantizer followed by one entry per iteration.
    pub trace: Vec<T>,
}

fn midpoints<T: Real>(levels: &[T]) -> Vec<T> {
    levels
        .windows(2)
        .map(|w| (w[0] + w[1]) * T::lit(0.5))
        .collect()
}

/// Levels at the Gaussian quantiles (2i − 1)/(2k), mirrored so the start is
/// exactly antisymmetric.
fn initial_levels<T: Real>(sigma: T, k: usize) -> Vec<T> {
    let mut levels = vec![T::zero(); k];
    for i in 0..k / 2 {
        let p = T::lit((2 * i + 1) as f64 / (2 * k) as f64);
        let z = std_normal_quantile(p) * sigma;
        levels[i] = z;
        levels[k - 1 - i] = -z;
    }
    levels
}

fn centroids<T: Real>(boundaries: &[T], sigma2: T) -> Result<Vec<T>> {
    let k = boundaries.len() + 1;
    (0..k)
        .map(|i| {
            let lo = if i == 0 {
                T::neg_infinity()
            } else {
                boundaries[i - 1]
            };
            let hi = boundaries.get(i).copied().unwrap_or_else(T::infinity);
            truncated_mean(lo, hi, sigma2)
        })
        .collect()
}

/// One Newton step on the fixed-point equations b_j = (c_j(b) + c_{j+1}(b))/2,
/// where c_i(b) is the centroid of cell i. The Jacobian is tridiagonal since
/// each centroid depends only on its own two edges:
/// ∂c/∂hi = f(hi)(hi − c)/P and ∂c/∂lo = f(lo)(c − lo)/P.
fn newton_boundaries<T: Real>(boundaries: &[T], sigma2: T) -> Option<Vec<T>> {
    let m = boundaries.len();
    if m == 0 {
        return None;
    }
    let sigma = sigma2.sqrt();
    let density = |x: T| crate::gauss::std_normal_pdf(x / sigma) / sigma;
    let half = T::lit(0.5);

    // per cell: centroid, ∂c/∂lo, ∂c/∂hi
    let mut cells = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let lo = if i == 0 { T::neg_infinity() } else { boundaries[i - 1] };
        let hi = if i == m { T::infinity() } else { boundaries[i] };
        let mom = cell_moments(lo, hi, sigma2);
        if !(mom.mass.as_f64() > 1e-300) {
            return None;
        }
        let c = mom.first / mom.mass;
        let d_lo = if lo.is_finite() { density(lo) * (c - lo) / mom.mass } else { T::zero() };
        let d_hi = if hi.is_finite() { density(hi) * (hi - c) / mom.mass } else { T::zero() };
        cells.push((c, d_lo, d_hi));
    }

    let mut sub = vec![T::zero(); m];
    let mut diag = vec![T::zero(); m];
    let mut sup = vec![T::zero(); m];
    let mut rhs = vec![T::zero(); m];
    for j in 0..m {
        let (left, right) = (cells[j], cells[j + 1]);
        rhs[j] = boundaries[j] - half * (left.0 + right.0);
        diag[j] = T::one() - half * (left.2 + right.1);
        sub[j] = -half * left.1;
        sup[j] = -half * right.2;
    }

    // Thomas algorithm
    for j in 1..m {
        if diag[j - 1] == T::zero() {
            return None;
        }
        let w = sub[j] / diag[j - 1];
        diag[j] = diag[j] - w * sup[j - 1];
        rhs[j] = rhs[j] - w * rhs[j - 1];
    }
    let mut step = vec![T::zero(); m];
    for j in (0..m).rev() {
        let tail = if j + 1 < m { sup[j] * step[j + 1] } else { T::zero() };
        if diag[j] == T::zero() {
            return None;
        }
        step[j] = (rhs[j] - tail) / diag[j];
    }

    let next: Vec<T> = boundaries.iter().zip(&step).map(|(b, d)| *b - *d).collect();
    let next = mirror_average(&next);
    let ordered = next.iter().all(|b| b.is_finite()) && next.windows(2).all(|w| w[0] < w[1]);
    ordered.then_some(next)
}

/// Replaces v_i by (v_i − v_{n−1−i})/2 so the vector is exactly odd; the
/// Gaussian fixed point is symmetric and the linear solve is not bitwise so.
fn mirror_average<T: Real>(v: &[T]) -> Vec<T> {
    let n = v.len();
    let half = T::lit(0.5);
    (0..n)
        .map(|i| {
            if 2 * i + 1 == n {
                T::zero()
            } else {
                (v[i] - v[n - 1 - i]) * half
            }
        })
        .collect()
}

/// Newton candidate for the boundaries, kept only if the quantizer it
/// induces (centroid levels) does not raise the distortion.
fn accelerated_boundaries<T: Real>(boundaries: &[T], sigma2: T, current: T) -> Option<Vec<T>> {
    let candidate = newton_boundaries(boundaries, sigma2)?;
    let levels = centroids(&candidate, sigma2).ok()?;
    let q = ScalarQuantizer::new(candidate, levels).ok()?;
    (quantizer_distortion(&q, sigma2) <= current).then(|| q.boundaries)
}

/// Lloyd-Max design with the full distortion trace.
///
/// Each iteration is a centroid step followed by a midpoint step, preceded by
/// a Newton step on the boundaries whenever that step lowers the distortion.
/// Both steps preserve the fixed point; the Newton step only shortens the
/// linear tail of plain Lloyd iteration.
pub fn lloyd_max_run<T: Real>(sigma2: T, k: usize, tol: T, max_iter: usize) -> Result<LloydMaxRun<T>> {
    if !(sigma2 > T::zero()) || !sigma2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "variance must be positive and finite, got {sigma2}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("level count must be at least 1".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }

    let mut levels = initial_levels(sigma2.sqrt(), k);
    let mut boundaries = midpoints(&levels);
    let mut q = ScalarQuantizer::new(boundaries.clone(), levels.clone())?;
    let mut distortion = quantizer_distortion(&q, sigma2);
    let mut trace = vec![distortion];
    let mut rel_change = T::infinity();

    for iter in 1..=max_iter {
        if let Some(candidate) = accelerated_boundaries(&boundaries, sigma2, distortion) {
            boundaries = candidate;
        }
        levels = centroids(&boundaries, sigma2)?;
        boundaries = midpoints(&levels);
        q = ScalarQuantizer::new(boundaries.clone(), levels.clone())?;
        let next = quantizer_distortion(&q, sigma2);
        trace.push(next);
        rel_change = (distortion - next) / next;
        distortion = next;
        if rel_change < tol {
            return Ok(LloydMaxRun {
                quantizer: q,
                distortion,
                iterations: iter,
                trace,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        rel_change: rel_change.as_f64(),
        last_boundaries: boundaries.iter().map(|b| b.as_f64()).collect(),
        last_levels: levels.iter().map(|l| l.as_f64()).collect(),
    })
}

/// Optimal (nearest-neighbor, centroid) k-level quantizer for N(0, σ²).
pub fn lloyd_max<T: Real>(sigma2: T, k: usize, tol: T, max_iter: usize) -> Result<ScalarQuantizer<T>> {
    lloyd_max_run(sigma2, k, tol, max_iter).map(|run| run.quantizer)
}

/// [`lloyd_max`] with the default tolerance and iteration cap.
pub fn lloyd_max_default<T: Real>(sigma2: T, k: usize) -> Result<ScalarQuantizer<T>> {
    lloyd_max(sigma2, k, T::lit(DEFAULT_TOL), DEFAULT_MAX_ITER)
}

fn dk_cache() -> &'static RwLock<HashMap<(TypeId, usize), f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(TypeId, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// d_k: minimum k-level distortion of the unit-variance Gaussian, so that the
/// optimum for N(0, σ²) is σ²·d_k. Memoized per scalar type.
pub fn normalized_distortion<T: Real>(k: usize) -> Result<T> {
    let key = (TypeId::of::<T>(), k);
    if let Some(v) = dk_cache().read().expect("d_k cache poisoned").get(&key) {
        return Ok(T::lit(*v));
    }
    // computed outside the lock; concurrent fills write the same value
    let run = lloyd_max_run(T::one(), k, T::lit(DEFAULT_TOL), DEFAULT_MAX_ITER)?;
    dk_cache()
        .write()
        .expect("d_k cache poisoned")
        .insert(key, run.distortion.as_f64());
    Ok(run.distortion)
}

/// Components of E[(X − Q(X̂))²] for X̂ = κ(X + αΘ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionReport<T> {
    /// E[(X − Q(X̂))²]
    pub total: T,
    /// E[(X − X̂)²]
    pub estimation: T,
    /// E[(X̂ − Q(X̂))²]
    pub quantization: T,
}

/// Closed-form estimation/quantization split of the receiver's distortion.
///
/// The total is evaluated directly, using E[X | X̂] = β·X̂ with
/// β = Cov(X, X̂)/Var(X̂), so it equals `estimation + quantization` only
/// when `estimator_gain` is the MMSE gain for `sender_alpha`.
pub fn decompose_distortion<T: Real>(
    model: &SourceBiasModel<T>,
    estimator_gain: T,
    sender_alpha: T,
    q: &ScalarQuantizer<T>,
) -> Result<DistortionReport<T>> {
    let model = SourceBiasModel::new(model.sigma2(), model.rho(), model.r())?;
    let (s2, rho, r) = (model.sigma2(), model.rho(), model.r());
    let (gain, alpha) = (estimator_gain, sender_alpha);
    let two = T::lit(2.0);

    let var_y = s2 * (T::one() + two * alpha * rho + alpha * alpha * r);
    let cov_xy = s2 * (T::one() + alpha * rho);
    let est_variance = gain * gain * var_y;
    let cov_x_est = gain * cov_xy;
    let estimation = s2 - two * cov_x_est + est_variance;

    if est_variance > T::zero() {
        let sums = cell_sums(q, est_variance);
        let beta = cov_x_est / est_variance;
        Ok(DistortionReport {
            total: s2 - two * beta * sums.level_first + sums.level_sq_mass,
            estimation,
            quantization: sums.mse,
        })
    } else {
        // X̂ ≡ 0
        let at_zero = q.encode(T::zero());
        Ok(DistortionReport {
            total: s2 + at_zero * at_zero,
            estimation,
            quantization: at_zero * at_zero,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::std_normal_cdf;
    use approx::assert_abs_diff_eq;

    const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

    fn two_level() -> ScalarQuantizer<f64> {
        ScalarQuantizer::new(vec![0.0], vec![-HALF_NORMAL_MEAN, HALF_NORMAL_MEAN]).unwrap()
    }

    #[test]
    fn encode_examples() {
        let q1 = ScalarQuantizer::constant(0.0);
        assert_eq!(q1.encode(5.3), 0.0);
        let q2 = two_level();
        assert_eq!(q2.encode(-0.1), -HALF_NORMAL_MEAN);
        assert_eq!(q2.encode(0.0), HALF_NORMAL_MEAN);
        assert_eq!(q2.encode(f64::NEG_INFINITY), -HALF_NORMAL_MEAN);
    }

    #[test]
    fn constructor_rejects_bad_layouts() {
        assert!(ScalarQuantizer::<f64>::new(vec![], vec![]).is_err());
        assert!(ScalarQuantizer::new(vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(ScalarQuantizer::new(vec![0.0], vec![1.0, -1.0]).is_err());
        // boundary outside (r_1, r_2)
        assert!(ScalarQuantizer::new(vec![2.0], vec![-1.0, 1.0]).is_err());
        assert!(ScalarQuantizer::new(vec![0.0], vec![-1.0, f64::INFINITY]).is_err());
        assert!(ScalarQuantizer::new(vec![-0.5, 0.5], vec![-1.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn json_shape_and_validation() {
        let q = two_level();
        let v: serde_json::Value = serde_json::to_value(&q).unwrap();
        assert_eq!(v["k"], 2);
        assert_eq!(v["boundaries"].as_array().unwrap().len(), 1);
        let back: ScalarQuantizer<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, q);
        let bad = r#"{"k":3,"boundaries":[0.0],"levels":[-1.0,1.0]}"#;
        assert!(serde_json::from_str::<ScalarQuantizer<f64>>(bad).is_err());
    }

    #[test]
    fn lloyd_max_one_level() {
        let run = lloyd_max_run(1.0, 1, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(run.quantizer.levels(), &[0.0]);
        assert_eq!(run.distortion, 1.0);
    }

    #[test]
    fn lloyd_max_two_levels() {
        let run = lloyd_max_run(1.0, 2, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(run.quantizer.boundaries(), &[0.0]);
        assert_abs_diff_eq!(run.quantizer.levels()[1], HALF_NORMAL_MEAN, epsilon = 1e-12);
        assert_abs_diff_eq!(run.distortion, 1.0 - 2.0 / std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn lloyd_max_four_and_eight_levels() {
        // 30-digit fixed-point reference values
        let d4: f64 = normalized_distortion(4).unwrap();
        assert_abs_diff_eq!(d4, 0.117481847829329, epsilon = 1e-11);
        let d8: f64 = normalized_distortion(8).unwrap();
        assert_abs_diff_eq!(d8, 0.0345477607885037, epsilon = 1e-11);
        let q8 = lloyd_max_default(1.0, 8).unwrap();
        let expected = [0.245094178944, 0.756005281206, 1.3439092785, 2.15194570454];
        for (l, e) in q8.levels()[4..].iter().zip(expected) {
            assert_abs_diff_eq!(*l, e, epsilon = 1e-6);
        }
    }

    #[test]
    fn lloyd_max_trace_nonincreasing() {
        for k in [2, 3, 5, 8, 16] {
            let run = lloyd_max_run(2.0, k, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            for w in run.trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-14), "k={k}: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn lloyd_max_fixed_point_properties() {
        for k in [2, 3, 4, 7, 8] {
            let q: ScalarQuantizer<f64> = lloyd_max_default(1.0, k).unwrap();
            let (b, l) = (q.boundaries(), q.levels());
            for i in 0..k {
                assert!((l[i] + l[k - 1 - i]).abs() < 1e-8, "levels antisymmetric");
            }
            for i in 0..k - 1 {
                assert!((b[i] + b[k - 2 - i]).abs() < 1e-8, "boundaries antisymmetric");
            }
            // centroid condition per cell and overall unbiasedness
            let mut mean_q = 0.0f64;
            for i in 0..k {
                let (lo, hi) = q.cell(i);
                let m = cell_moments(lo, hi, 1.0);
                assert!((m.first / m.mass - l[i]).abs() < 1e-8, "k={k} cell {i}");
                mean_q += l[i] * m.mass;
            }
            assert!(mean_q.abs() < 1e-8);
        }
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        match lloyd_max_run(1.0, 8, 1e-15, 3) {
            Err(Error::NoConvergence {
                iterations,
                last_levels,
                last_boundaries,
                ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(last_levels.len(), 8);
                assert_eq!(last_boundaries.len(), 7);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn lloyd_max_rejects_bad_arguments() {
        assert!(lloyd_max_default(0.0, 2).is_err());
        assert!(lloyd_max_default(1.0, 0).is_err());
        assert!(lloyd_max(1.0, 2, 0.0, 10).is_err());
    }

    #[test]
    fn distortion_examples() {
        assert_eq!(quantizer_distortion(&ScalarQuantizer::constant(0.0), 3.0), 3.0);
        assert_abs_diff_eq!(
            quantizer_distortion(&two_level(), 1.0),
            1.0 - 2.0 / std::f64::consts::PI,
            epsilon = 1e-14
        );
        // change of variables: (cQ)(cX) has c² times the distortion
        let q: ScalarQuantizer<f64> = lloyd_max_default(1.0, 5).unwrap();
        let base = quantizer_distortion(&q, 1.0);
        for c in [0.5f64, 2.0, 10.0] {
            let scaled = quantizer_distortion(&q.scaled(c).unwrap(), c * c);
            assert!((scaled - c * c * base).abs() < 1e-12 * c * c);
        }
    }

    #[test]
    fn distortion_matches_quadrature_for_arbitrary_quantizer() {
        // composite Simpson per cell, tails cut at ±14σ
        let q: ScalarQuantizer<f64> = ScalarQuantizer::new(vec![-1.1, 0.3, 0.4, 2.0], vec![-2.0, -0.2, 0.35, 1.0, 2.5]).unwrap();
        let sigma2: f64 = 1.7;
        let sigma = sigma2.sqrt();
        let dens = |x: f64| (-x * x / (2.0 * sigma2)).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt();
        let mut acc = 0.0;
        for i in 0..q.k() {
            let (lo, hi): (f64, f64) = q.cell(i);
            let (lo, hi) = (lo.max(-14.0 * sigma), hi.min(14.0 * sigma));
            let level = q.levels()[i];
            let f = |x: f64| (x - level) * (x - level) * dens(x);
            let n = 20_000;
            let h = (hi - lo) / n as f64;
            let mut s = f(lo) + f(hi);
            for j in 1..n {
                s += f(lo + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc += s * h / 3.0;
        }
        assert_abs_diff_eq!(quantizer_distortion(&q, sigma2), acc, epsilon = 1e-11);
    }

    #[test]
    fn dk_strictly_decreasing_to_64() {
        let mut prev: f64 = normalized_distortion(1).unwrap();
        assert_eq!(prev, 1.0);
        for k in 2..=64 {
            let d: f64 = normalized_distortion(k).unwrap();
            assert!(d < prev, "d_{k} = {d} not below d_{} = {prev}", k - 1);
            prev = d;
        }
    }

    #[test]
    fn exact_variance_scaling() {
        for k in [1, 2, 4, 8] {
            let dk: f64 = normalized_distortion(k).unwrap();
            let unit = lloyd_max_default(1.0, k).unwrap();
            for sigma2 in [0.25, 1.0, 4.0] {
                let q = lloyd_max_default(sigma2, k).unwrap();
                let d = quantizer_distortion(&q, sigma2);
                assert!((d - sigma2 * dk).abs() <= 1e-8 * sigma2 * dk);
                let expect = unit.scaled(sigma2.sqrt()).unwrap();
                for (a, b) in q.levels().iter().zip(expect.levels()) {
                    assert!((a - b).abs() < 1e-10 * sigma2.sqrt().max(1.0));
                }
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let model = SourceBiasModel::new(1.0, 0.0, 1.0).unwrap();
        // Y = X and no estimation error
        let q = lloyd_max_default(1.0, 256).unwrap();
        let rep = decompose_distortion(&model, 1.0, 0.0, &q).unwrap();
        assert_abs_diff_eq!(rep.estimation, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.total, rep.quantization, epsilon = 1e-12);

        let alpha = 0.618_033_988_749_894_8;
        let kappa = 0.723_606_797_749_979;
        let rep = decompose_distortion(&model, kappa, alpha, &ScalarQuantizer::constant(0.0)).unwrap();
        assert_abs_diff_eq!(rep.estimation, 0.276_393_202_250_021, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.quantization, 0.723_606_797_749_979, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decomposition_non_mmse_gain_keeps_cross_term() {
        let model = SourceBiasModel::new(1.0, 0.0, 1.0).unwrap();
        let q = two_level();
        let rep = decompose_distortion(&model, 0.5, 0.0, &q).unwrap();
        // X̂ = X/2; total = E[(X − Q(X/2))²] = E[(X − Q(X))²] since Q(X/2) = Q(X)
        assert_abs_diff_eq!(rep.total, 1.0 - 2.0 / std::f64::consts::PI, epsilon = 1e-12);
        assert!((rep.total - rep.estimation - rep.quantization).abs() > 1e-3);
        // zero gain: X̂ ≡ 0 lands in the right cell
        let rep = decompose_distortion(&model, 0.0, 0.0, &q).unwrap();
        assert_abs_diff_eq!(rep.quantization, HALF_NORMAL_MEAN * HALF_NORMAL_MEAN, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.total, 1.0 + HALF_NORMAL_MEAN * HALF_NORMAL_MEAN, epsilon = 1e-15);
    }

    #[test]
    fn f32_instantiation() {
        let q = lloyd_max(1.0f32, 4, 1e-6, 10_000).unwrap();
        let d = quantizer_distortion(&q, 1.0f32);
        assert!((d - 0.117_481_85).abs() < 1e-5, "{d}");
        assert!(std_normal_cdf(0.0f32) == 0.5);
    }
}
