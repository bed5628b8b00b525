//! Sampled fields on the velocity grid, discrete calculus and norms.

pub(crate) mod calculus;
pub(crate) mod energy;
mod grid;
mod norms;
mod random;

pub use calculus::{centered_diff, gradient, project_parallel};
pub use energy::{a_norm, a_norm_sq, energy_bilinear, energy_bilinear_per_face, FaceCoefficients};
pub use grid::{bracket, norm3, VelocityGrid};
pub use norms::{inner_product, weighted_norm, weighted_norm_vec, NormKind, WeightedNormSpec};
pub use random::{packet_field, random_field, FieldProfile};

use crate::error::{LandauError, Result};

/// A real function of `v` sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: VelocityGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LandauError::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(v)` at every node.
    pub fn from_fn<F>(grid: VelocityGrid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.coords(i)))
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_grid(&self, other: &VelocityGrid) -> Result<()> {
        if &self.grid == other {
            Ok(())
        } else {
            Err(LandauError::GridMismatch)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &ScalarField) -> Result<()> {
        other.check_grid(&self.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// `alpha * self + beta * other`
    pub fn lin_comb(&self, alpha: f64, other: &ScalarField, beta: f64) -> Result<Self> {
        other.check_grid(&self.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    /// Pointwise product with another field.
    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        other.check_grid(&self.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest `|f|` over the outermost cell shell, relative to `max |f|`.
    /// Admissible fields keep this below `1e-8`.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let bmax = (0..self.grid.len())
            .filter(|&i| self.grid.is_boundary(i))
            .fold(0.0f64, |m, i| m.max(self.values[i].abs()));
        bmax / max
    }
}

/// A three-component vector field on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: VelocityGrid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_comps(grid: VelocityGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(LandauError::InvalidArgument(
                "vector component length mismatch".into(),
            ));
        }
        Ok(Self { grid, comps })
    }

    /// Samples `G(v)` at every node.
    pub fn from_fn<F>(grid: VelocityGrid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3],
    {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let g = f(grid.coords(i));
            for d in 0..3 {
                out.comps[d][i] = g[d];
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    #[inline]
    pub fn comp(&self, d: usize) -> &[f64] {
        &self.comps[d]
    }

    #[inline]
    pub fn comps(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LandauError::GridMismatch);
        }
        let comps = std::array::from_fn(|d| {
            self.comps[d]
                .iter()
                .zip(&other.comps[d])
                .map(|(a, b)| a + b)
                .collect()
        });
        Ok(Self {
            grid: self.grid,
            comps,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}
