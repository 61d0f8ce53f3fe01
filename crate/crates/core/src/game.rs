//! The strategic classification pipeline at equilibrium (sender map, MMSE
//! estimate, nearest-neighbor quantizer) and the price of transparency.

use std::io;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{solve_equilibrium, EquilibriumSolution};
use crate::error::{Error, InvalidModelReason, Result};
use crate::gauss::SourceBiasModel;
use crate::numfmt;
use crate::quantizer::{lloyd_max_default, normalized_distortion, quantizer_distortion, ScalarQuantizer};
use crate::scalar::Real;

/// Receiver cost with and without strategic reporting, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotReport<T> {
    /// J_R* = D_R + D_Q(σ_X̂²): cost against the equilibrium report.
    pub j_r_star: T,
    /// J_R** = D_Q(σ_X²): cost against truthful data.
    pub j_r_starstar: T,
    pub pot: T,
    pub d_r: T,
    pub d_q_est: T,
    pub d_q_src: T,
    pub k: usize,
}

/// Sender map, MMSE estimator and the quantizer designed for the estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GamePipeline<T> {
    pub model: SourceBiasModel<T>,
    pub equilibrium: EquilibriumSolution<T>,
    /// Optimal quantizer for N(0, est_variance).
    pub classifier: ScalarQuantizer<T>,
}

pub fn build_pipeline<T: Real>(model: &SourceBiasModel<T>, k: usize) -> Result<GamePipeline<T>> {
    let equilibrium = solve_equilibrium(model)?;
    let classifier = lloyd_max_default(equilibrium.est_variance, k)?;
    Ok(GamePipeline {
        model: *model,
        equilibrium,
        classifier,
    })
}

impl<T: Real> GamePipeline<T> {
    /// h(y) = Q(κy).
    #[inline]
    pub fn receive(&self, y: T) -> T {
        self.classifier.encode(self.equilibrium.receiver_estimate(y))
    }

    /// Full pipeline on one datum: Q(κ(x + αθ)).
    #[inline]
    pub fn classify(&self, x: T, theta: T) -> T {
        self.receive(self.equilibrium.sender_map(x, theta))
    }

    /// D_R + D_Q(σ_X̂²), the receiver's expected cost.
    pub fn analytic_receiver_cost(&self) -> T {
        self.equilibrium.d_r + quantizer_distortion(&self.classifier, self.equilibrium.est_variance)
    }
}

pub fn classify<T: Real>(p: &GamePipeline<T>, x: T, theta: T) -> T {
    p.classify(x, theta)
}

pub fn analytic_receiver_cost<T: Real>(p: &GamePipeline<T>) -> T {
    p.analytic_receiver_cost()
}

/// Price of transparency at `k` levels. Quantization terms use the exact
/// Gaussian scaling D_Q(σ²) = σ²·d_k.
pub fn compute_pot<T: Real>(model: &SourceBiasModel<T>, k: usize) -> Result<PotReport<T>> {
    let eq = solve_equilibrium(model)?;
    let d_k = normalized_distortion::<T>(k)?;
    Ok(pot_from_parts(model.sigma2(), &eq, d_k, k))
}

fn pot_from_parts<T: Real>(sigma2: T, eq: &EquilibriumSolution<T>, d_k: T, k: usize) -> PotReport<T> {
    let d_q_est = eq.est_variance * d_k;
    let d_q_src = sigma2 * d_k;
    let j_r_star = eq.d_r + d_q_est;
    PotReport {
        j_r_star,
        j_r_starstar: d_q_src,
        pot: j_r_star / d_q_src,
        d_r: eq.d_r,
        d_q_est,
        d_q_src,
        k,
    }
}

/// The sender's expected cost when reporting `X + α′Θ` to a receiver that
/// best-responds (MMSE gain, then the optimal k-level quantizer for the
/// estimate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SenderCost<T> {
    pub alpha: T,
    /// MMSE gain for this report.
    pub kappa: T,
    /// E[(X + Θ − X̂)²]
    pub d_s: T,
    pub est_variance: T,
    /// E[(X̂ − Q(X̂))²] = d_k·Var(X̂)
    pub quantization: T,
    /// E[Θ(X̂ − Q(X̂))]. Equals Cov(Θ, X̂)·d_k: the quantization error is
    /// orthogonal to functions of Y but not to Θ.
    pub bias_cross: T,
    /// E[(X + Θ − Q(X̂))²] = d_s + quantization + 2·bias_cross.
    pub j_s: T,
    /// d_s + quantization, i.e. the cost with both cross terms dropped.
    pub j_s_decomposed: T,
}

pub fn sender_cost<T: Real>(model: &SourceBiasModel<T>, alpha: T, k: usize) -> Result<SenderCost<T>> {
    let d_k = normalized_distortion::<T>(k)?;
    Ok(sender_cost_with(model, alpha, d_k))
}

pub(crate) fn sender_cost_with<T: Real>(model: &SourceBiasModel<T>, alpha: T, d_k: T) -> SenderCost<T> {
    let (s2, rho, r) = (model.sigma2(), model.rho(), model.r());
    let (one, two) = (T::one(), T::lit(2.0));
    let var_y = s2 * (one + two * alpha * rho + alpha * alpha * r);
    let cov_xy = s2 * (one + alpha * rho);
    let cov_ty = s2 * (rho + alpha * r);
    let kappa = cov_xy / var_y;
    let est_variance = kappa * cov_xy;
    let u = one - kappa;
    let v = one - kappa * alpha;
    let d_s = s2 * (u * u + two * u * v * rho + v * v * r);
    let quantization = d_k * est_variance;
    let bias_cross = d_k * kappa * cov_ty;
    SenderCost {
        alpha,
        kappa,
        d_s,
        est_variance,
        quantization,
        bias_cross,
        j_s: d_s + quantization + two * bias_cross,
        j_s_decomposed: d_s + quantization,
    }
}

/// Outcome of one sweep grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Ok,
    #[serde(rename = "invalid_r_le_rho2")]
    InvalidRLeRho2,
    #[serde(rename = "invalid_A_domain")]
    InvalidADomain,
    NoConvergence,
}

impl SweepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::InvalidRLeRho2 => "invalid_r_le_rho2",
            Self::InvalidADomain => "invalid_A_domain",
            Self::NoConvergence => "no_convergence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub sigma2: T,
    pub rho: T,
    pub r: T,
    pub k: usize,
    pub status: SweepStatus,
    pub equilibrium: Option<EquilibriumSolution<T>>,
    pub d_k: Option<T>,
    pub report: Option<PotReport<T>>,
}

fn sweep_cell<T: Real>(sigma2: T, rho: T, r: T, k: usize) -> SweepRow<T> {
    let mut row = SweepRow {
        sigma2,
        rho,
        r,
        k,
        status: SweepStatus::Ok,
        equilibrium: None,
        d_k: None,
        report: None,
    };
    let eq = match SourceBiasModel::new(sigma2, rho, r).and_then(|m| solve_equilibrium(&m)) {
        Ok(eq) => eq,
        Err(Error::InvalidModel {
            reason: InvalidModelReason::ADomain,
            ..
        }) => {
            row.status = SweepStatus::InvalidADomain;
            return row;
        }
        Err(_) => {
            row.status = SweepStatus::InvalidRLeRho2;
            return row;
        }
    };
    row.equilibrium = Some(eq);
    match normalized_distortion::<T>(k) {
        Ok(d_k) => {
            row.d_k = Some(d_k);
            row.report = Some(pot_from_parts(sigma2, &eq, d_k, k));
        }
        Err(_) => row.status = SweepStatus::NoConvergence,
    }
    row
}

/// PoT over a (ρ, r, k) grid. Rows come out ρ-major, then r, then k,
/// whatever the evaluation order. Invalid (ρ, r) cells become skipped rows.
pub fn sweep_pot<T: Real>(sigma2: T, rho_grid: &[T], r_grid: &[T], k_list: &[usize]) -> Result<Vec<SweepRow<T>>> {
    if !(sigma2 > T::zero()) || !sigma2.is_finite() {
        return Err(Error::InvalidModel {
            sigma2: sigma2.as_f64(),
            rho: f64::NAN,
            r: f64::NAN,
            reason: InvalidModelReason::NonPositiveVariance,
        });
    }
    if let Some(bad) = rho_grid.iter().chain(r_grid).find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite grid value {bad}")));
    }
    if k_list.contains(&0) {
        return Err(Error::InvalidArgument("level counts must be at least 1".into()));
    }
    let cells: Vec<(T, T, usize)> = rho_grid
        .iter()
        .flat_map(|&rho| r_grid.iter().flat_map(move |&r| k_list.iter().map(move |&k| (rho, r, k))))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(rho, r, k)| sweep_cell(sigma2, rho, r, k))
        .collect())
}

pub const SWEEP_CSV_HEADER: [&str; 14] = [
    "sigma2",
    "rho",
    "r",
    "k",
    "alpha",
    "kappa",
    "D_R",
    "D_S",
    "est_variance",
    "d_k",
    "J_R_star",
    "J_R_starstar",
    "PoT",
    "status",
];

/// Writes sweep rows as CSV, numbers with 12 significant digits. Skipped
/// rows leave the computed columns empty.
pub fn write_sweep_csv<T: Real, W: io::Write>(rows: &[SweepRow<T>], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    let num = |v: Option<T>| v.map(|v| numfmt::sig(v.as_f64(), 12)).unwrap_or_default();
    for row in rows {
        let eq = row.equilibrium.filter(|_| row.status == SweepStatus::Ok);
        let rep = row.report.as_ref();
        w.write_record([
            num(Some(row.sigma2)),
            num(Some(row.rho)),
            num(Some(row.r)),
            row.k.to_string(),
            num(eq.map(|e| e.alpha)),
            num(eq.map(|e| e.kappa)),
            num(eq.map(|e| e.d_r)),
            num(eq.map(|e| e.d_s)),
            num(eq.map(|e| e.est_variance)),
            num(row.d_k),
            num(rep.map(|p| p.j_r_star)),
            num(rep.map(|p| p.j_r_starstar)),
            num(rep.map(|p| p.pot)),
            row.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
