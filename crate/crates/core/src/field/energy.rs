//! Discrete anisotropic energy `||f||_A^2`.
//!
//! The gradient part is assembled on the three face sets of the grid. On
//! faces normal to axis `d` the gradient uses the compact difference along
//! `d` and face-averaged centered differences along the other two axes; the
//! matrix `A` is the average of its two node values. The three face sets are
//! averaged with weight 1/3. The diffusion part of `L_1` is the exact
//! adjoint of this form, so `(L_1 f, f) = ||f||_A^2 - (c_2 f, f)` holds to
//! round-off.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use super::calculus::{centered_diff, face_average, forward_diff};
use super::{ScalarField, VelocityGrid};
use crate::error::{LandauError, Result};
use crate::kernel::{LandauCoefficients, SymMatrixField};
use crate::summation::pairwise_sum;

/// Face-averaged copies of `A`, one per face orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceCoefficients {
    pub(crate) faces: [SymMatrixField; 3],
}

impl FaceCoefficients {
    pub fn from_nodes(abar: &SymMatrixField) -> Self {
        let grid = *abar.grid();
        let faces = std::array::from_fn(|d| {
            let comps = std::array::from_fn(|c| face_average(&grid, abar.comp(c), d));
            SymMatrixField::from_comps(grid, comps).expect("lengths")
        });
        Self { faces }
    }

    pub fn orientation(&self, d: usize) -> &SymMatrixField {
        &self.faces[d]
    }
}

/// Gradient vector on the faces normal to `d`.
pub(crate) fn face_gradient(grid: &VelocityGrid, f: &[f64], d: usize) -> [Vec<f64>; 3] {
    std::array::from_fn(|e| {
        if e == d {
            forward_diff(grid, f, d)
        } else {
            face_average(grid, &centered_diff(grid, f, e), d)
        }
    })
}

/// `q = A g` on one face set.
pub(crate) fn face_flux(a: &SymMatrixField, g: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let n = a.grid().len();
    std::array::from_fn(|j| {
        (0..n)
            .into_par_iter()
            .map(|i| (0..3).map(|k| a.get(i, j, k) * g[k][i]).sum())
            .collect()
    })
}

/// Gradient part `E(f, g)` of the energy, assembled from component arrays.
pub fn energy_bilinear(f: &ScalarField, g: &ScalarField, faces: &FaceCoefficients) -> Result<f64> {
    let grid = *f.grid();
    g.check_grid(&grid)?;
    faces.faces[0].grid().eq(&grid).then_some(()).ok_or(LandauError::GridMismatch)?;
    let mut total = 0.0;
    for d in 0..3 {
        let gf = face_gradient(&grid, f.values(), d);
        let gg = face_gradient(&grid, g.values(), d);
        let q = face_flux(&faces.faces[d], &gf);
        let terms: Vec<f64> = (0..grid.len())
            .map(|i| q[0][i] * gg[0][i] + q[1][i] * gg[1][i] + q[2][i] * gg[2][i])
            .collect();
        total += pairwise_sum(&terms);
    }
    Ok(total * grid.cell_volume() / 3.0)
}

/// Same quantity as [`energy_bilinear`], assembled face by face from 3x3
/// matrices. Used as an independent assembly route.
pub fn energy_bilinear_per_face(f: &ScalarField, g: &ScalarField, faces: &FaceCoefficients) -> Result<f64> {
    let grid = *f.grid();
    g.check_grid(&grid)?;
    let mut total = 0.0;
    for d in 0..3 {
        let gf = face_gradient(&grid, f.values(), d);
        let gg = face_gradient(&grid, g.values(), d);
        let terms: Vec<f64> = (0..grid.len())
            .map(|i| {
                let m: Matrix3<f64> = faces.faces[d].matrix(i);
                let x = Vector3::new(gf[0][i], gf[1][i], gf[2][i]);
                let y = Vector3::new(gg[0][i], gg[1][i], gg[2][i]);
                y.dot(&(m * x))
            })
            .collect();
        total += pairwise_sum(&terms);
    }
    Ok(total * grid.cell_volume() / 3.0)
}

/// `||f||_A^2 = E(f, f) + (c_1 f, f)`.
pub fn a_norm_sq(f: &ScalarField, coeffs: &LandauCoefficients) -> Result<f64> {
    f.check_grid(coeffs.grid())?;
    let e = energy_bilinear(f, f, coeffs.faces())?;
    let c1 = coeffs.c1();
    let terms: Vec<f64> = f.values().iter().zip(c1).map(|(x, c)| c * x * x).collect();
    Ok(e + pairwise_sum(&terms) * f.grid().cell_volume())
}

pub fn a_norm(f: &ScalarField, coeffs: &LandauCoefficients) -> Result<f64> {
    Ok(a_norm_sq(f, coeffs)?.max(0.0).sqrt())
}
