//! Empirical measurement of the constants in the coercivity, bilinear,
//! energy and smoothing estimates, with pass/fail reports.

mod bilinear;
mod bounds;
mod energy;
mod ensemble;
mod smoothing;

pub use bilinear::{
    check_l3_embedding, coercivity_denominator, estimate_bilinear_constants, estimate_coercivity,
    recheck_bilinear, BilinearConstants, CoercivityEstimate, EPSILON_1, EPSILON_2,
};
pub use bounds::{
    check_convolution_bound, check_coefficient_bounds, check_kernel_identities, kernel_second_derivative,
    radial_power_convolution,
};
pub use energy::{check_energy, energy_constants, energy_residual, EnergyConstants};
pub use ensemble::{Ensemble, Member};
pub use smoothing::{check_smoothing, smoothing_fit, SmoothingFit, RESIDUAL_TOL, ROOT_VARIATION_TOL};

use serde::{Deserialize, Serialize};

use crate::field::VelocityGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(rename = "R")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl From<&VelocityGrid> for GridParams {
    fn from(g: &VelocityGrid) -> Self {
        Self {
            half_width: g.half_width(),
            n: g.n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub name: String,
    pub value: f64,
    pub ensemble_size: usize,
    pub grid: GridParams,
    /// Relative change against a coarser grid, when one was run.
    pub stability: Option<f64>,
}

impl ConstantEstimate {
    pub fn new(name: impl Into<String>, value: f64, ensemble_size: usize, grid: &VelocityGrid) -> Self {
        Self {
            name: name.into(),
            value,
            ensemble_size,
            grid: grid.into(),
            stability: None,
        }
    }

    /// Records `|self - coarse| / |coarse|`.
    pub fn compare(&mut self, coarse: &ConstantEstimate) -> f64 {
        let s = relative_change(self.value, coarse.value);
        self.stability = Some(s);
        s
    }
}

pub fn relative_change(fine: f64, coarse: f64) -> f64 {
    if fine == coarse {
        return 0.0;
    }
    (fine - coarse).abs() / coarse.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub value: f64,
    pub tol: f64,
    pub verdict: bool,
}

impl Check {
    /// Passes when `value <= tol` (and `value` is a number).
    pub fn at_most(id: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            id: id.into(),
            value,
            tol,
            verdict: value <= tol,
        }
    }

    /// Passes when `value >= tol`.
    pub fn at_least(id: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            id: id.into(),
            value,
            tol,
            verdict: value >= tol,
        }
    }

    /// Passes when `value` is finite; `tol` is informational.
    pub fn finite(id: impl Into<String>, value: f64) -> Self {
        Self {
            id: id.into(),
            value,
            tol: f64::INFINITY,
            verdict: value.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub config_fingerprint: String,
    pub checks: Vec<Check>,
    pub constants: Vec<ConstantEstimate>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            config_fingerprint: String::new(),
            checks: Vec::new(),
            constants: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict)
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn constant(&self, name: &str) -> Option<&ConstantEstimate> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.constants.extend(other.constants);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
