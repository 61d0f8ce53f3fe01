//! Closed-form Stackelberg equilibrium of the Gaussian strategic
//! communication game: the sender reports `Y = X + αΘ`, the receiver answers
//! with the MMSE estimate `κY`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gauss::{SourceBiasModel, SINGULAR_EPS};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution<T> {
    /// A = √(1 + 4(r + ρ))
    #[serde(rename = "A")]
    pub a_const: T,
    pub alpha: T,
    pub kappa: T,
    /// Sender cost E[(X + Θ − κY)²].
    #[serde(rename = "D_S")]
    pub d_s: T,
    /// Receiver cost E[(X − κY)²].
    #[serde(rename = "D_R")]
    pub d_r: T,
    /// Var(κY) = σ² − D_R.
    pub est_variance: T,
}

impl<T: Real> EquilibriumSolution<T> {
    /// Sender's report `x + αθ`.
    #[inline]
    pub fn sender_map(&self, x: T, theta: T) -> T {
        x + self.alpha * theta
    }

    /// Receiver's MMSE estimate `κy`.
    #[inline]
    pub fn receiver_estimate(&self, y: T) -> T {
        self.kappa * y
    }
}

/// Solves for the equilibrium gains and costs.
///
/// α = (A − 1)/(2(r + ρ)) is evaluated as 2/(A + 1), and the (A − 1) factor
/// is cancelled out of both cost formulas:
///
/// D_S = σ²(1 + (A − 3)(A + 1)/4), D_R = 2σ²(r − ρ²)/(A(A + 1 + 2ρ)).
///
/// Both are continuous through r + ρ = 0, where α = 1.
pub fn solve_equilibrium<T: Real>(model: &SourceBiasModel<T>) -> Result<EquilibriumSolution<T>> {
    let model = SourceBiasModel::new(model.sigma2(), model.rho(), model.r())?;
    let (s2, rho, r) = (model.sigma2(), model.rho(), model.r());
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));

    let sum = r + rho;
    let a = (one + four * sum).sqrt();
    let alpha = if sum.abs() < T::lit(SINGULAR_EPS) {
        one
    } else {
        two / (a + one)
    };
    let kappa = (one + alpha * rho) / (one + alpha * alpha * r + two * alpha * rho);
    let d_s = s2 * (one + (a - T::lit(3.0)) * (a + one) / four);
    let d_r = s2 * two * (r - rho * rho) / (a * (a + one + two * rho));

    Ok(EquilibriumSolution {
        a_const: a,
        alpha,
        kappa,
        d_s,
        d_r,
        est_variance: s2 - d_r,
    })
}

#[inline]
pub fn sender_map<T: Real>(sol: &EquilibriumSolution<T>, x: T, theta: T) -> T {
    sol.sender_map(x, theta)
}

#[inline]
pub fn receiver_estimate<T: Real>(sol: &EquilibriumSolution<T>, y: T) -> T {
    sol.receiver_estimate(y)
}
