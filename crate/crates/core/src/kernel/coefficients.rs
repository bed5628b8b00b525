use std::collections::BTreeMap;

use rayon::prelude::*;

use super::quadrature::{AbarQuadrature, QuadratureSpec};
use super::tables::{tabulate_fft_kernels, KernelId, KernelTables};
use super::{eval_maxwellian, KernelParams, SymMatrixField};
use crate::error::{LandauError, Result};
use crate::field::{FaceCoefficients, ScalarField, VelocityGrid};
use crate::operator::ConvolutionEngine;
use crate::summation::pairwise_sum;

/// `|v|^2 = (h/2)^2 * key` with `key` a sum of three odd squares, so nodes
/// at equal radius share one quadrature.
fn radius_key(grid: &VelocityGrid, idx: usize) -> u64 {
    grid.unravel(idx)
        .iter()
        .map(|&i| {
            let o = grid.odd_coord(i);
            (o * o) as u64
        })
        .sum()
}

/// Eigenvalue profiles of `A` at the given radii, with the doubling check.
pub(crate) fn eigen_profiles(
    radii: &[f64],
    params: &KernelParams,
    quad: &QuadratureSpec,
) -> Result<Vec<(f64, f64)>> {
    quad.validate()?;
    let base = AbarQuadrature::new(params, quad);
    let fine = AbarQuadrature::new(params, &quad.doubled());
    let results: Vec<((f64, f64), f64)> = radii
        .par_iter()
        .map(|&rho| {
            let (p0, t0) = base.eigenvalues(rho);
            let (p1, t1) = fine.eigenvalues(rho);
            let scale = p1.abs().max(t1.abs());
            let change = ((p1 - p0).abs().max((t1 - t0).abs())) / scale;
            ((p1, t1), change)
        })
        .collect();
    for (&rho, (_, change)) in radii.iter().zip(&results) {
        if !(*change <= quad.rtol) {
            return Err(LandauError::QuadratureNonConvergence {
                change: *change,
                rtol: quad.rtol,
                radius: rho,
            });
        }
    }
    Ok(results.into_iter().map(|(l, _)| l).collect())
}

/// `A(v) = (a * mu)(v)` at every node.
pub fn compute_abar_field(
    grid: &VelocityGrid,
    params: &KernelParams,
    quad: &QuadratureSpec,
) -> Result<SymMatrixField> {
    let mut keys: BTreeMap<u64, usize> = BTreeMap::new();
    for idx in 0..grid.len() {
        keys.entry(radius_key(grid, idx)).or_insert(0);
    }
    let half_h = 0.5 * grid.h();
    let radii: Vec<f64> = keys.keys().map(|&k| half_h * (k as f64).sqrt()).collect();
    let profiles = eigen_profiles(&radii, params, quad)?;
    for (slot, pos) in keys.values_mut().zip(0..) {
        *slot = pos;
    }
    let packed: Vec<[f64; 6]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (lp, lt) = profiles[keys[&radius_key(grid, idx)]];
            let v = grid.coords(idx);
            let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let d = lp - lt;
            // lt I + (lp - lt) v v^T / |v|^2
            [
                lt + d * v[0] * v[0] / r2,
                lt + d * v[1] * v[1] / r2,
                lt + d * v[2] * v[2] / r2,
                d * v[0] * v[1] / r2,
                d * v[0] * v[2] / r2,
                d * v[1] * v[2] / r2,
            ]
        })
        .collect();
    let comps = std::array::from_fn(|c| packed.iter().map(|m| m[c]).collect());
    SymMatrixField::from_comps(*grid, comps)
}

/// Second-order derivative along `axis` without wrap: centered in the
/// interior, one-sided three-point at the two outer layers.
pub(crate) fn open_diff(grid: &VelocityGrid, u: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let s = grid.stride(axis);
    let h = grid.h();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let i = (idx / s) % n;
            if i == 0 {
                (-3.0 * u[idx] + 4.0 * u[idx + s] - u[idx + 2 * s]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * u[idx] - 4.0 * u[idx - s] + u[idx - 2 * s]) / (2.0 * h)
            } else {
                (u[idx + s] - u[idx - s]) / (2.0 * h)
            }
        })
        .collect()
}

/// `c1 = (1/4) v^T A v` and `c2 = (1/2) div(A v)` (finite differences).
pub fn compute_scalar_weights(abar: &SymMatrixField) -> (Vec<f64>, Vec<f64>) {
    let grid = *abar.grid();
    let n = grid.len();
    let av: [Vec<f64>; 3] = std::array::from_fn(|j| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let v = grid.coords(i);
                (0..3).map(|k| abar.get(i, j, k) * v[k]).sum()
            })
            .collect()
    });
    let c1 = (0..n)
        .into_par_iter()
        .map(|i| {
            let v = grid.coords(i);
            0.25 * (0..3).map(|j| av[j][i] * v[j]).sum::<f64>()
        })
        .collect();
    let divs: [Vec<f64>; 3] = std::array::from_fn(|j| open_diff(&grid, &av[j], j));
    let c2 = (0..n).map(|i| 0.5 * (divs[0][i] + divs[1][i] + divs[2][i])).collect();
    (c1, c2)
}

/// Every coefficient the linearized operator needs, precomputed once.
#[derive(Debug, Clone)]
pub struct LandauCoefficients {
    grid: VelocityGrid,
    params: KernelParams,
    quad: QuadratureSpec,
    abar: SymMatrixField,
    c1: Vec<f64>,
    c2: Vec<f64>,
    c2_conv: Vec<f64>,
    c2_rel_diff: f64,
    mu: Vec<f64>,
    sqrt_mu: Vec<f64>,
    faces: FaceCoefficients,
    tables: KernelTables,
}

impl LandauCoefficients {
    /// Runs the quadrature and assembles everything; `pad` is the
    /// convolution lattice factor (1 periodic, 2 linear).
    pub fn compute(grid: &VelocityGrid, params: &KernelParams, quad: &QuadratureSpec, pad: usize) -> Result<Self> {
        let abar = compute_abar_field(grid, params, quad)?;
        let (c1, c2) = compute_scalar_weights(&abar);
        Self::from_parts(*params, *quad, abar, c1, c2, pad)
    }

    /// Rebuilds the derived data from stored `A`, `c1`, `c2`.
    pub fn from_parts(
        params: KernelParams,
        quad: QuadratureSpec,
        abar: SymMatrixField,
        c1: Vec<f64>,
        c2: Vec<f64>,
        pad: usize,
    ) -> Result<Self> {
        let grid = *abar.grid();
        if c1.len() != grid.len() || c2.len() != grid.len() {
            return Err(LandauError::InvalidArgument("coefficient length mismatch".into()));
        }
        if abar.comps().iter().flatten().chain(&c1).chain(&c2).any(|x| !x.is_finite()) {
            return Err(LandauError::NonFinite("coefficient fields"));
        }
        let mu: Vec<f64> = (0..grid.len()).map(|i| eval_maxwellian(grid.coords(i), &params)).collect();
        let sqrt_mu = mu.iter().map(|m| m.sqrt()).collect();
        let faces = FaceCoefficients::from_nodes(&abar);
        let tables = tabulate_fft_kernels(&grid, &params, pad);
        // b does not decay for gamma >= -1, so the check always uses the
        // linear (padded) convolution
        let c2_conv = if pad >= 2 {
            c2_by_convolution(&grid, &tables, &mu)?
        } else {
            c2_by_convolution(&grid, &tabulate_fft_kernels(&grid, &params, 2), &mu)?
        };
        let c2_rel_diff = relative_l2(&c2, &c2_conv);
        let out = Self {
            grid,
            params,
            quad,
            abar,
            c1,
            c2,
            c2_conv,
            c2_rel_diff,
            mu,
            sqrt_mu,
            faces,
            tables,
        };
        let tol = out.c2_tolerance();
        if !(c2_rel_diff <= tol) {
            return Err(LandauError::CrossCheck {
                rel: c2_rel_diff,
                tol,
            });
        }
        Ok(out)
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    #[inline]
    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    #[inline]
    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    #[inline]
    pub fn abar(&self) -> &SymMatrixField {
        &self.abar
    }

    #[inline]
    pub fn c1(&self) -> &[f64] {
        &self.c1
    }

    #[inline]
    pub fn c2(&self) -> &[f64] {
        &self.c2
    }

    /// `c2` by the convolution route `(1/2) sum_k b_k * (v_k mu)`.
    #[inline]
    pub fn c2_convolution(&self) -> &[f64] {
        &self.c2_conv
    }

    /// Relative `L^2` gap between the two `c2` routes.
    #[inline]
    pub fn c2_relative_difference(&self) -> f64 {
        self.c2_rel_diff
    }

    /// Allowed gap between the two `c2` routes: quadrature tolerance or the
    /// stencil error `h^2 / 4`, whichever is larger.
    pub fn c2_tolerance(&self) -> f64 {
        self.quad.rtol.max(0.25 * self.grid.h() * self.grid.h())
    }

    #[inline]
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    #[inline]
    pub fn sqrt_mu(&self) -> &[f64] {
        &self.sqrt_mu
    }

    #[inline]
    pub fn faces(&self) -> &FaceCoefficients {
        &self.faces
    }

    #[inline]
    pub fn tables(&self) -> &KernelTables {
        &self.tables
    }

    /// Largest eigenvalue of `A` over the grid (time-step bound).
    pub fn max_abar_eigenvalue(&self) -> f64 {
        self.abar.max_eigenvalue()
    }
}

fn c2_by_convolution(grid: &VelocityGrid, tables: &KernelTables, mu: &[f64]) -> Result<Vec<f64>> {
    let engine = ConvolutionEngine::new(tables.clone());
    let mut out = vec![0.0; grid.len()];
    for k in 0..3 {
        let density: Vec<f64> = (0..grid.len()).map(|i| grid.coords(i)[k] * mu[i]).collect();
        let density = ScalarField::from_values(*grid, density)?;
        let conv = engine.convolve(KernelId::B(k), &density)?;
        for (o, c) in out.iter_mut().zip(conv.values()) {
            *o += 0.5 * c;
        }
    }
    Ok(out)
}

pub(crate) fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    let base: Vec<f64> = b.iter().map(|y| y * y).collect();
    (pairwise_sum(&diff) / pairwise_sum(&base)).sqrt()
}
