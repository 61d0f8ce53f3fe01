//! Monte Carlo validation of the equilibrium pipeline.
//!
//! Samples are generated in fixed-size shards, each with its own RNG
//! substream derived from (seed, shard index). Shard statistics are merged in
//! shard order, so reports are bit-identical for any thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::solve_equilibrium;
use crate::error::{Error, Result};
use crate::game::{build_pipeline, compute_pot, sender_cost_with, GamePipeline, SenderCost};
use crate::gauss::{chunk_lengths, PairStream, SourceBiasModel};
use crate::quantizer::{lloyd_max_default, normalized_distortion, ScalarQuantizer};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig<T> {
    pub n: usize,
    pub seed: u64,
    pub model: SourceBiasModel<T>,
    pub k: usize,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub mean: T,
    pub std_error: T,
}

impl<T: Real> Estimate<T> {
    /// (mean − target)/SE.
    pub fn z_score(&self, target: T) -> T {
        (self.mean - target) / self.std_error
    }

    /// |mean − target| ≤ `bands`·SE.
    pub fn within(&self, target: T, bands: T) -> bool {
        (self.mean - target).abs() <= bands * self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationReport<T> {
    /// (X − h(Y))²
    pub j_r_hat: Estimate<T>,
    /// (X + Θ − h(Y))²
    pub j_s_hat: Estimate<T>,
    /// (X + Θ − X̂)²
    pub d_est_hat: Estimate<T>,
    /// (X̂ − Q(X̂))(X − X̂)
    pub cross1_hat: Estimate<T>,
    /// Θ(X̂ − Q(X̂))
    pub cross2_hat: Estimate<T>,
    pub n: usize,
    pub seed: u64,
}

/// Per-sample observables; index order matches the report fields, with the
/// truthful-pipeline cost (X − Q_src(X))² last.
const J_R: usize = 0;
const J_S: usize = 1;
const D_EST: usize = 2;
const CROSS1: usize = 3;
const CROSS2: usize = 4;
const J_R_TRUTHFUL: usize = 5;
const N_OBS: usize = 6;

/// Welford moments of each observable plus the co-moment of the strategic
/// and truthful receiver costs.
#[derive(Debug, Clone, Copy)]
struct Moments<T> {
    n: usize,
    mean: [T; N_OBS],
    m2: [T; N_OBS],
    co_jr: T,
}

impl<T: Real> Moments<T> {
    fn new() -> Self {
        Self {
            n: 0,
            mean: [T::zero(); N_OBS],
            m2: [T::zero(); N_OBS],
            co_jr: T::zero(),
        }
    }

    fn push(&mut self, obs: &[T; N_OBS]) {
        self.n += 1;
        let n = T::from_usize_lossy(self.n);
        let d_jr_before = obs[J_R] - self.mean[J_R];
        for i in 0..N_OBS {
            let delta = obs[i] - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (obs[i] - self.mean[i]);
        }
        self.co_jr += d_jr_before * (obs[J_R_TRUTHFUL] - self.mean[J_R_TRUTHFUL]);
    }

    fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (T::from_usize_lossy(self.n), T::from_usize_lossy(other.n));
        let n = na + nb;
        let w = na * nb / n;
        let d_jr = other.mean[J_R] - self.mean[J_R];
        let d_tr = other.mean[J_R_TRUTHFUL] - self.mean[J_R_TRUTHFUL];
        for i in 0..N_OBS {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * w;
        }
        self.co_jr += other.co_jr + d_jr * d_tr * w;
        self.n += other.n;
    }

    fn sample_variance(&self, m2: T) -> T {
        m2 / T::from_usize_lossy(self.n.saturating_sub(1).max(1))
    }

    fn estimate(&self, i: usize) -> Estimate<T> {
        let var = self.sample_variance(self.m2[i]);
        Estimate {
            mean: self.mean[i],
            std_error: (var / T::from_usize_lossy(self.n)).sqrt(),
        }
    }

    /// Ratio of strategic to truthful mean cost, with a delta-method SE that
    /// uses the pairing of the two costs.
    fn cost_ratio(&self) -> Estimate<T> {
        let (a, b) = (self.mean[J_R], self.mean[J_R_TRUTHFUL]);
        let ratio = a / b;
        let var_a = self.sample_variance(self.m2[J_R]);
        let var_b = self.sample_variance(self.m2[J_R_TRUTHFUL]);
        let cov = self.sample_variance(self.co_jr);
        let two = T::lit(2.0);
        let var = (var_a - two * ratio * cov + ratio * ratio * var_b).max(T::zero());
        Estimate {
            mean: ratio,
            std_error: (var / T::from_usize_lossy(self.n)).sqrt() / b.abs(),
        }
    }
}

struct Harness<T> {
    pipeline: GamePipeline<T>,
    truthful: ScalarQuantizer<T>,
}

fn harness<T: Real>(config: &SimulationConfig<T>) -> Result<Harness<T>> {
    if config.n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let pipeline = build_pipeline(&config.model, config.k)?;
    let truthful = lloyd_max_default(config.model.sigma2(), config.k)?;
    Ok(Harness { pipeline, truthful })
}

fn accumulate<T: Real>(config: &SimulationConfig<T>, h: &Harness<T>) -> Moments<T> {
    let shards: Vec<(u64, usize)> = chunk_lengths(config.n).collect();
    let eq = h.pipeline.equilibrium;
    let q = &h.pipeline.classifier;
    let partials: Vec<Moments<T>> = shards
        .par_iter()
        .map(|&(idx, len)| {
            let mut stream = PairStream::new(&config.model, config.seed, idx);
            let mut m = Moments::new();
            for _ in 0..len {
                let s = stream.next_pair::<T>();
                let est = eq.receiver_estimate(eq.sender_map(s.x, s.theta));
                let out = q.encode(est);
                let target = s.x + s.theta;
                let truthful = s.x - h.truthful.encode(s.x);
                m.push(&[
                    (s.x - out) * (s.x - out),
                    (target - out) * (target - out),
                    (target - est) * (target - est),
                    (est - out) * (s.x - est),
                    s.theta * (est - out),
                    truthful * truthful,
                ]);
            }
            m
        })
        .collect();
    partials.iter().fold(Moments::new(), |mut acc, part| {
        acc.merge(part);
        acc
    })
}

/// Simulates the equilibrium pipeline on `n` draws and estimates its costs
/// and the two cross terms of the sender-cost expansion.
pub fn simulate_pipeline<T: Real>(config: &SimulationConfig<T>) -> Result<SimulationReport<T>> {
    let h = harness(config)?;
    let m = accumulate(config, &h);
    Ok(SimulationReport {
        j_r_hat: m.estimate(J_R),
        j_s_hat: m.estimate(J_S),
        d_est_hat: m.estimate(D_EST),
        cross1_hat: m.estimate(CROSS1),
        cross2_hat: m.estimate(CROSS2),
        n: config.n,
        seed: config.seed,
    })
}

/// Empirical price of transparency: strategic over truthful receiver cost,
/// both evaluated on the same draws of X.
pub fn empirical_pot<T: Real>(config: &SimulationConfig<T>) -> Result<Estimate<T>> {
    let h = harness(config)?;
    Ok(accumulate(config, &h).cost_ratio())
}

/// Report and empirical PoT from a single pass over the samples.
pub fn simulate_with_pot<T: Real>(config: &SimulationConfig<T>) -> Result<(SimulationReport<T>, Estimate<T>)> {
    let h = harness(config)?;
    let m = accumulate(config, &h);
    let report = SimulationReport {
        j_r_hat: m.estimate(J_R),
        j_s_hat: m.estimate(J_S),
        d_est_hat: m.estimate(D_EST),
        cross1_hat: m.estimate(CROSS1),
        cross2_hat: m.estimate(CROSS2),
        n: config.n,
        seed: config.seed,
    };
    Ok((report, m.cost_ratio()))
}

/// Closed-form values of every quantity the simulation estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticExpectations<T> {
    pub j_r: T,
    pub j_s: T,
    pub d_est: T,
    /// Zero by orthogonality of the MMSE error to functions of Y.
    pub cross1: T,
    /// Cov(Θ, X̂)·d_k; nonzero unless Θ is uncorrelated with the estimate.
    pub cross2: T,
    pub pot: T,
}

pub fn analytic_expectations<T: Real>(model: &SourceBiasModel<T>, k: usize) -> Result<AnalyticExpectations<T>> {
    let eq = solve_equilibrium(model)?;
    let d_k = normalized_distortion::<T>(k)?;
    let sender = sender_cost_with(model, eq.alpha, d_k);
    let pot = compute_pot(model, k)?;
    Ok(AnalyticExpectations {
        j_r: pot.j_r_star,
        j_s: sender.j_s,
        d_est: eq.d_s,
        cross1: T::zero(),
        cross2: sender.bias_cross,
        pot: pot.pot,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponseScan<T> {
    pub rows: Vec<SenderCost<T>>,
    /// Candidate minimizing the exact sender cost `j_s`.
    pub argmin: T,
    /// Candidate minimizing `j_s_decomposed` (cross terms dropped).
    pub argmin_decomposed: T,
    /// α from the closed-form equilibrium.
    pub equilibrium_alpha: T,
}

fn first_argmin<T: Real>(rows: &[SenderCost<T>], key: impl Fn(&SenderCost<T>) -> T) -> T {
    let mut best = &rows[0];
    for row in &rows[1..] {
        if key(row) < key(best) {
            best = row;
        }
    }
    best.alpha
}

/// Sender cost for each candidate α′ against the receiver's best response,
/// evaluated in closed form.
pub fn best_response_scan<T: Real>(
    model: &SourceBiasModel<T>,
    k: usize,
    alpha_grid: &[T],
) -> Result<BestResponseScan<T>> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidArgument("alpha grid is empty".into()));
    }
    let eq = solve_equilibrium(model)?;
    let d_k = normalized_distortion::<T>(k)?;
    let rows: Vec<SenderCost<T>> = alpha_grid.iter().map(|&a| sender_cost_with(model, a, d_k)).collect();
    Ok(BestResponseScan {
        argmin: first_argmin(&rows, |r| r.j_s),
        argmin_decomposed: first_argmin(&rows, |r| r.j_s_decomposed),
        equilibrium_alpha: eq.alpha,
        rows,
    })
}
