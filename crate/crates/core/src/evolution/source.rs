use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::field::{weighted_norm, ScalarField, WeightedNormSpec};

/// Time factor of a separable source `g(t, v) = tau(t) phi(v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFactor {
    /// `exp(-rate t)`
    Exp { rate: f64 },
    /// `sum_i coeffs[i] t^i`
    Polynomial { coeffs: Vec<f64> },
    /// `cos(omega t)`
    Cos { omega: f64 },
    /// `0`
    Zero,
}

impl TimeFactor {
    /// `tau^{(m)}(t)` in closed form.
    pub fn derivative(&self, m: usize, t: f64) -> f64 {
        match self {
            TimeFactor::Exp { rate } => (-rate).powi(m as i32) * (-rate * t).exp(),
            TimeFactor::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(m)
                .map(|(i, c)| {
                    let falling: f64 = ((i - m + 1)..=i).map(|x| x as f64).product();
                    c * falling * t.powi((i - m) as i32)
                })
                .sum(),
            TimeFactor::Cos { omega } => {
                omega.powi(m as i32) * (omega * t + m as f64 * std::f64::consts::FRAC_PI_2).cos()
            }
            TimeFactor::Zero => 0.0,
        }
    }
}

/// Separable analytic forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    phi: ScalarField,
    tau: TimeFactor,
    max_order: usize,
}

impl SourceModel {
    pub const DEFAULT_MAX_ORDER: usize = 16;

    pub fn new(phi: ScalarField, tau: TimeFactor) -> Self {
        Self {
            phi,
            tau,
            max_order: Self::DEFAULT_MAX_ORDER,
        }
    }

    /// No forcing.
    pub fn zero(grid: crate::field::VelocityGrid) -> Self {
        Self::new(ScalarField::zeros(grid), TimeFactor::Zero)
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    #[inline]
    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    #[inline]
    pub fn tau(&self) -> &TimeFactor {
        &self.tau
    }

    #[inline]
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `d_t^m g(t) = tau^{(m)}(t) phi`.
    pub fn source_eval(&self, m: usize, t: f64) -> Result<ScalarField> {
        if m > self.max_order {
            return Err(LandauError::UnsupportedOrder {
                order: m,
                max: self.max_order,
            });
        }
        Ok(self.phi.scaled(self.tau.derivative(m, t)))
    }

    /// `||d_t^m g(t)||_{L^2}` without building the field.
    pub fn derivative_norm(&self, m: usize, t: f64) -> f64 {
        self.tau.derivative(m, t).abs() * weighted_norm(&self.phi, WeightedNormSpec::l2(0.0))
    }

    /// Smallest `A_g` with `||d_t^m g(t)|| <= A_g^{m+1} m!` over the
    /// sampled times and `m <= kmax`.
    pub fn analytic_constant(&self, kmax: usize, times: &[f64]) -> f64 {
        let mut best: f64 = 0.0;
        let mut fact = 1.0;
        for m in 0..=kmax {
            if m > 0 {
                fact *= m as f64;
            }
            for &t in times {
                let r = (self.derivative_norm(m, t) / fact).powf(1.0 / (m as f64 + 1.0));
                best = best.max(r);
            }
        }
        best
    }

    /// `sup (t^k ||d_t^k g(t)|| / k!)^{1/(k+1)}` over the samples.
    pub fn scaled_analytic_constant(&self, kmax: usize, times: &[f64]) -> f64 {
        let mut best: f64 = 0.0;
        let mut fact = 1.0;
        for k in 0..=kmax {
            if k > 0 {
                fact *= k as f64;
            }
            for &t in times {
                let r = (t.powi(k as i32) * self.derivative_norm(k, t) / fact).powf(1.0 / (k as f64 + 1.0));
                best = best.max(r);
            }
        }
        best
    }
}
