use std::sync::Arc;

use rayon::prelude::*;

use super::ConvolutionEngine;
use crate::error::{LandauError, Result};
use crate::field::calculus::{centered_diff, face_average_adjoint, forward_diff_adjoint};
use crate::field::energy::{face_flux, face_gradient};
use crate::field::{inner_product, ScalarField, VelocityGrid};
use crate::kernel::coefficients::open_diff;
use crate::kernel::{KernelId, LandauCoefficients};

/// Which part of `L` is applied by [`LandauOperator::l`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMode {
    #[default]
    Full,
    L1Only,
    /// `L = 0`; used to calibrate the fitting pipeline.
    Disabled,
}

/// The coefficient set together with a convolution engine built from its
/// kernel tables. Cheap to clone and safe to share across threads.
#[derive(Debug, Clone)]
pub struct LandauOperator {
    coeffs: Arc<LandauCoefficients>,
    engine: Arc<ConvolutionEngine>,
    mode: OperatorMode,
}

impl LandauOperator {
    pub fn new(coeffs: LandauCoefficients) -> Self {
        let engine = ConvolutionEngine::new(coeffs.tables().clone());
        Self {
            coeffs: Arc::new(coeffs),
            engine: Arc::new(engine),
            mode: OperatorMode::Full,
        }
    }

    pub fn with_mode(&self, mode: OperatorMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    #[inline]
    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    #[inline]
    pub fn coeffs(&self) -> &LandauCoefficients {
        &self.coeffs
    }

    #[inline]
    pub fn engine(&self) -> &ConvolutionEngine {
        &self.engine
    }

    pub fn l1(&self, f: &ScalarField) -> Result<ScalarField> {
        apply_l1(f, &self.coeffs)
    }

    pub fn l2(&self, f: &ScalarField) -> Result<ScalarField> {
        apply_l2(f, &self.engine, &self.coeffs)
    }

    pub fn l(&self, f: &ScalarField) -> Result<ScalarField> {
        match self.mode {
            OperatorMode::Full => apply_l(f, &self.engine, &self.coeffs),
            OperatorMode::L1Only => apply_l1(f, &self.coeffs),
            OperatorMode::Disabled => {
                f.check_grid(self.coeffs.grid())?;
                Ok(ScalarField::zeros(*f.grid()))
            }
        }
    }
}

/// Flux-form `-div(A grad f)`: adjoint of the face-set energy, so that
/// `(apply_diffusion(f), g) = E(f, g)` exactly.
pub fn apply_diffusion(f: &ScalarField, coeffs: &LandauCoefficients) -> Result<ScalarField> {
    let grid = *coeffs.grid();
    f.check_grid(&grid)?;
    let n = grid.len();
    let mut out = vec![0.0; n];
    for d in 0..3 {
        let g = face_gradient(&grid, f.values(), d);
        let q = face_flux(coeffs.faces().orientation(d), &g);
        let normal = forward_diff_adjoint(&grid, &q[d], d);
        for (o, x) in out.iter_mut().zip(&normal) {
            *o += x;
        }
        for e in (0..3).filter(|&e| e != d) {
            let back = face_average_adjoint(&grid, &q[e], d);
            let tang = centered_diff(&grid, &back, e);
            // centered difference is antisymmetric: its adjoint is its negative
            for (o, x) in out.iter_mut().zip(&tang) {
                *o -= x;
            }
        }
    }
    for o in out.iter_mut() {
        *o /= 3.0;
    }
    ScalarField::from_values(grid, out)
}

/// `L_1 f = -div(A grad f) + c_1 f - c_2 f`.
pub fn apply_l1(f: &ScalarField, coeffs: &LandauCoefficients) -> Result<ScalarField> {
    let mut out = apply_diffusion(f, coeffs)?;
    let c1 = coeffs.c1();
    let c2 = coeffs.c2();
    out.values_mut()
        .par_iter_mut()
        .zip(f.values().par_iter())
        .enumerate()
        .for_each(|(i, (o, x))| *o += (c1[i] - c2[i]) * x);
    finite(out, "L1")
}

/// `L_2 f = mu^{-1/2} d_j [mu X_j]` with
/// `X_j = a_jk * (v_k mu^{1/2} f) + b_j * (mu^{1/2} f)`, expanded as
/// `mu^{1/2} (d_j X_j - v_j X_j)` so that nothing is divided by `mu`.
pub fn apply_l2(f: &ScalarField, engine: &ConvolutionEngine, coeffs: &LandauCoefficients) -> Result<ScalarField> {
    let grid = *coeffs.grid();
    f.check_grid(&grid)?;
    if engine.grid() != &grid {
        return Err(LandauError::GridMismatch);
    }
    let sm = coeffs.sqrt_mu();
    let s: Vec<f64> = f.values().iter().zip(sm).map(|(x, m)| x * m).collect();
    let w: [Vec<f64>; 3] = std::array::from_fn(|k| (0..grid.len()).map(|i| grid.coords(i)[k] * s[i]).collect());
    let s_hat = engine.forward(&s);
    let w_hat: Vec<_> = w.iter().map(|wk| engine.forward(wk)).collect();
    let x: Vec<Vec<f64>> = (0..3)
        .map(|j| {
            engine.combine(&[
                (KernelId::A(crate::kernel::sym_index(j, 0)), &w_hat[0]),
                (KernelId::A(crate::kernel::sym_index(j, 1)), &w_hat[1]),
                (KernelId::A(crate::kernel::sym_index(j, 2)), &w_hat[2]),
                (KernelId::B(j), &s_hat),
            ])
        })
        .collect();
    let dx: Vec<Vec<f64>> = (0..3).map(|j| open_diff(&grid, &x[j], j)).collect();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let v = grid.coords(i);
            let mut acc = 0.0;
            for j in 0..3 {
                acc += dx[j][i] - v[j] * x[j][i];
            }
            sm[i] * acc
        })
        .collect();
    finite(ScalarField::from_values(grid, out)?, "L2")
}

pub fn apply_l(f: &ScalarField, engine: &ConvolutionEngine, coeffs: &LandauCoefficients) -> Result<ScalarField> {
    let mut out = apply_l1(f, coeffs)?;
    out.axpy(1.0, &apply_l2(f, engine, coeffs)?)?;
    Ok(out)
}

fn finite(f: ScalarField, what: &'static str) -> Result<ScalarField> {
    if f.is_finite() {
        Ok(f)
    } else {
        Err(LandauError::NonFinite(what))
    }
}

/// Orthonormal basis (discrete `L^2`) of the collision invariants
/// `mu^{1/2} {1, v_1, v_2, v_3, |v|^2}`, the null space of the continuous `L`.
pub fn collision_invariants(grid: &VelocityGrid) -> Vec<ScalarField> {
    let mut basis: Vec<ScalarField> = Vec::with_capacity(5);
    for m in 0..5 {
        let raw = ScalarField::from_fn(*grid, |v| {
            let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let e = (-0.25 * r2).exp();
            match m {
                0 => e,
                4 => r2 * e,
                _ => v[m - 1] * e,
            }
        });
        let mut b = remove_components(&raw, &basis);
        let norm = inner_product(&b, &b).expect("same grid").sqrt();
        b = b.scaled(1.0 / norm);
        basis.push(b);
    }
    basis
}

/// `f` minus its projection on the collision invariants: a forcing with
/// zero mass, momentum and energy.
pub fn remove_invariants(f: &ScalarField) -> ScalarField {
    remove_components(f, &collision_invariants(f.grid()))
}

fn remove_components(f: &ScalarField, basis: &[ScalarField]) -> ScalarField {
    let mut out = f.clone();
    for b in basis {
        let c = inner_product(&out, b).expect("same grid");
        out.axpy(-c, b).expect("same grid");
    }
    out
}
