//! Stackelberg equilibrium and price of transparency for strategic scalar
//! classification with a jointly Gaussian source and bias.
//!
//! A sender observes a source `X` and a correlated bias `Θ` and reports
//! `Y = X + αΘ`; the receiver clusters `Y` with a k-level quantizer. The
//! crate provides the closed-form equilibrium, optimal (Lloyd-Max)
//! quantizers, the price of transparency `J_R* / J_R**`, parameter sweeps and
//! a Monte Carlo harness that checks the closed forms.
//!
//! Every numerical routine is generic over [`Real`] (`f32`, `f64`). The
//! aliases below fix the scalar to `f64`.

pub mod equilibrium;
pub mod error;
pub mod game;
pub mod gauss;
pub mod grid;
pub mod montecarlo;
pub mod numfmt;
pub mod quantizer;
pub mod scalar;

pub use equilibrium::{receiver_estimate, sender_map, solve_equilibrium, EquilibriumSolution};
pub use error::{Error, InvalidModelReason, Result};
pub use game::{
    analytic_receiver_cost, build_pipeline, classify, compute_pot, sender_cost, sweep_pot, write_sweep_csv,
    GamePipeline, PotReport, SenderCost, SweepRow, SweepStatus,
};
pub use gauss::{
    sample_pairs, std_normal_cdf, std_normal_pdf, std_normal_quantile, truncated_mean, truncated_second_moment,
    SamplePair, SourceBiasModel,
};
pub use montecarlo::{
    analytic_expectations, best_response_scan, empirical_pot, simulate_pipeline, simulate_with_pot,
    AnalyticExpectations, BestResponseScan, Estimate, SimulationConfig, SimulationReport,
};
pub use quantizer::{
    decompose_distortion, lloyd_max, lloyd_max_default, lloyd_max_run, normalized_distortion, quantizer_distortion,
    DistortionReport, LloydMaxRun, ScalarQuantizer,
};
pub use scalar::Real;

pub type Model = SourceBiasModel<f64>;
pub type Equilibrium = EquilibriumSolution<f64>;
pub type Quantizer = ScalarQuantizer<f64>;
pub type Distortion = DistortionReport<f64>;
pub type Pipeline = GamePipeline<f64>;
pub type Pot = PotReport<f64>;
pub type Simulation = SimulationConfig<f64>;
pub type Report = SimulationReport<f64>;
pub type Scan = BestResponseScan<f64>;
