use super::ConvolutionEngine;
use crate::error::{LandauError, Result};
use crate::field::ScalarField;
use crate::kernel::{sym_index, KernelId};

/// `Q(G, F) = d_j [ (a_jk * G) d_k F - (a_jk * d_k G) F ]`, divergence and
/// gradients by Fourier differentiation on the periodic grid. With exact
/// derivatives the lattice sum inherits `a(u) u = 0`, so `Q(mu, mu)` is
/// left with aliasing error only.
pub fn apply_q(g: &ScalarField, f: &ScalarField, engine: &ConvolutionEngine) -> Result<ScalarField> {
    let grid = *engine.grid();
    if g.grid() != &grid || f.grid() != &grid {
        return Err(LandauError::GridMismatch);
    }
    let g_hat = engine.forward(g.values());
    let ag: Vec<Vec<f64>> = (0..6).map(|c| engine.combine(&[(KernelId::A(c), &g_hat)])).collect();
    let dg_hat: Vec<_> = engine
        .spectral_derivatives(g.values(), &[0, 1, 2])
        .iter()
        .map(|d| engine.forward(d))
        .collect();
    let adg: Vec<Vec<f64>> = (0..3)
        .map(|j| {
            engine.combine(&[
                (KernelId::A(sym_index(j, 0)), &dg_hat[0]),
                (KernelId::A(sym_index(j, 1)), &dg_hat[1]),
                (KernelId::A(sym_index(j, 2)), &dg_hat[2]),
            ])
        })
        .collect();
    let df = engine.spectral_derivatives(f.values(), &[0, 1, 2]);
    let fv = f.values();
    let mut out = vec![0.0; grid.len()];
    for j in 0..3 {
        let flux: Vec<f64> = (0..grid.len())
            .map(|i| {
                let mut s = -adg[j][i] * fv[i];
                for k in 0..3 {
                    s += ag[sym_index(j, k)][i] * df[k][i];
                }
                s
            })
            .collect();
        for (o, d) in out.iter_mut().zip(&engine.spectral_derivatives(&flux, &[j])[0]) {
            *o += d;
        }
    }
    ScalarField::from_values(grid, out)
}
