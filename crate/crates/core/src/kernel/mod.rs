//! The Landau kernel `a_jk(v) = (delta_jk |v|^2 - v_j v_k) |v|^gamma`, the
//! Maxwellian background, and the coefficient fields derived from them.

pub(crate) mod coefficients;
mod quadrature;
mod tables;

pub use coefficients::{compute_abar_field, compute_scalar_weights, LandauCoefficients};
pub use quadrature::{gauss_legendre, AbarQuadrature, QuadratureSpec};
pub use tables::{cube_power_average, tabulate_fft_kernels, KernelId, KernelTables};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{LandauError, Result};
use crate::field::VelocityGrid;

/// Interaction exponent and Maxwellian normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    gamma: f64,
    mu_normalized: bool,
}

impl KernelParams {
    /// Soft potentials only: `-3 < gamma < 0`.
    pub fn new(gamma: f64, mu_normalized: bool) -> Result<Self> {
        if !(gamma > -3.0 && gamma < 0.0) {
            return Err(LandauError::GammaOutOfRange(gamma));
        }
        Ok(Self {
            gamma,
            mu_normalized,
        })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn mu_normalized(&self) -> bool {
        self.mu_normalized
    }

    /// Prefactor of the Maxwellian: `(2 pi)^{-3/2}` when normalized,
    /// `(2 pi)^{3/2}` otherwise.
    #[inline]
    pub fn mu_prefactor(&self) -> f64 {
        let c = (2.0 * std::f64::consts::PI).powf(1.5);
        if self.mu_normalized {
            1.0 / c
        } else {
            c
        }
    }
}

/// Symmetric 3x3 matrix stored as `[xx, yy, zz, xy, xz, yz]`.
pub type Sym3 = [f64; 6];

/// Position of `(j, k)` in the packed [`Sym3`] layout.
#[inline]
pub const fn sym_index(j: usize, k: usize) -> usize {
    match (j, k) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (0, 2) | (2, 0) => 4,
        _ => 5,
    }
}

/// The `(j, k)` pairs in packed order.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

pub fn sym_to_matrix(s: &Sym3) -> Matrix3<f64> {
    Matrix3::new(s[0], s[3], s[4], s[3], s[1], s[5], s[4], s[5], s[2])
}

/// `a(v) = |v|^{gamma + 2} (I - v v^T / |v|^2)`.
pub fn eval_kernel_matrix(v: [f64; 3], params: &KernelParams) -> Result<Sym3> {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if r2 == 0.0 {
        return Err(LandauError::SingularPoint);
    }
    Ok(kernel_matrix_unchecked(v, r2, params.gamma))
}

#[inline]
pub(crate) fn kernel_matrix_unchecked(v: [f64; 3], r2: f64, gamma: f64) -> Sym3 {
    let rg = r2.powf(0.5 * gamma);
    let d = r2 * rg;
    [
        d - v[0] * v[0] * rg,
        d - v[1] * v[1] * rg,
        d - v[2] * v[2] * rg,
        -v[0] * v[1] * rg,
        -v[0] * v[2] * rg,
        -v[1] * v[2] * rg,
    ]
}

/// `b_j(v) = sum_k d_k a_jk(v) = -2 |v|^gamma v_j`.
pub fn eval_kernel_divergence(v: [f64; 3], params: &KernelParams) -> Result<[f64; 3]> {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if r2 == 0.0 {
        return Err(LandauError::SingularPoint);
    }
    Ok(kernel_divergence_unchecked(v, r2, params.gamma))
}

#[inline]
pub(crate) fn kernel_divergence_unchecked(v: [f64; 3], r2: f64, gamma: f64) -> [f64; 3] {
    let s = -2.0 * r2.powf(0.5 * gamma);
    [s * v[0], s * v[1], s * v[2]]
}

pub fn eval_maxwellian(v: [f64; 3], params: &KernelParams) -> f64 {
    params.mu_prefactor() * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()
}

/// A symmetric-matrix valued function sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrixField {
    grid: VelocityGrid,
    comps: [Vec<f64>; 6],
}

impl SymMatrixField {
    pub fn from_comps(grid: VelocityGrid, comps: [Vec<f64>; 6]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(LandauError::InvalidArgument("matrix component length mismatch".into()));
        }
        Ok(Self { grid, comps })
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    /// Packed component `c` (see [`sym_index`]).
    #[inline]
    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    #[inline]
    pub fn comps(&self) -> &[Vec<f64>; 6] {
        &self.comps
    }

    #[inline]
    pub fn get(&self, idx: usize, j: usize, k: usize) -> f64 {
        self.comps[sym_index(j, k)][idx]
    }

    #[inline]
    pub fn packed(&self, idx: usize) -> Sym3 {
        std::array::from_fn(|c| self.comps[c][idx])
    }

    pub fn matrix(&self, idx: usize) -> Matrix3<f64> {
        sym_to_matrix(&self.packed(idx))
    }

    /// Largest eigenvalue over the grid.
    pub fn max_eigenvalue(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.matrix(i).symmetric_eigenvalues().max())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest `lambda_min / trace` over the grid (PSD check).
    pub fn min_relative_eigenvalue(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let m = self.matrix(i);
                m.symmetric_eigenvalues().min() / m.trace().abs().max(f64::MIN_POSITIVE)
            })
            .fold(f64::INFINITY, f64::min)
    }
}
