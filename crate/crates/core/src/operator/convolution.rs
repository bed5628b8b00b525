use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::Fft3;
use crate::error::{LandauError, Result};
use crate::field::{ScalarField, VelocityGrid};
use crate::kernel::{KernelId, KernelTables};

/// FFT-backed discrete convolution `h^3 sum_m K(v_i - v_m) rho_m` with the
/// tabulated kernels. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ConvolutionEngine {
    tables: KernelTables,
    fft: Fft3,
    grid_fft: Fft3,
    spectra: Vec<Vec<Complex64>>,
}

impl ConvolutionEngine {
    pub fn new(tables: KernelTables) -> Self {
        let fft = Fft3::new(tables.lattice());
        let spectra = KernelId::ALL
            .iter()
            .map(|&id| {
                let mut s: Vec<Complex64> = tables.table(id).iter().map(|&x| Complex64::new(x, 0.0)).collect();
                fft.process(&mut s, false);
                s
            })
            .collect();
        let grid_fft = Fft3::new(tables.grid().n());
        Self {
            tables,
            fft,
            grid_fft,
            spectra,
        }
    }

    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        self.tables.grid()
    }

    #[inline]
    pub fn tables(&self) -> &KernelTables {
        &self.tables
    }

    pub(crate) fn spectrum(&self, id: KernelId) -> &[Complex64] {
        &self.spectra[id.slot()]
    }

    /// Embeds grid values in the lattice and transforms.
    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let grid = self.grid();
        let n = grid.n();
        let m = self.tables.lattice();
        let mut buf = vec![Complex64::default(); m * m * m];
        if m == n {
            for (b, &v) in buf.iter_mut().zip(values) {
                *b = Complex64::new(v, 0.0);
            }
        } else {
            for (idx, &v) in values.iter().enumerate() {
                let [x, y, z] = grid.unravel(idx);
                buf[(z * m + y) * m + x] = Complex64::new(v, 0.0);
            }
        }
        self.fft.process(&mut buf, false);
        buf
    }

    /// Inverse transform, normalization, restriction to the grid and the
    /// `h^3` quadrature weight.
    pub(crate) fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        let grid = self.grid();
        let m = self.tables.lattice();
        self.fft.process(&mut spec, true);
        let scale = grid.cell_volume() / (m * m * m) as f64;
        let n = grid.n();
        (0..grid.len())
            .map(|idx| {
                if m == n {
                    spec[idx].re * scale
                } else {
                    let [x, y, z] = grid.unravel(idx);
                    spec[(z * m + y) * m + x].re * scale
                }
            })
            .collect()
    }

    /// `sum_t spectrum(id_t) * rho_hat_t`, transformed back.
    pub(crate) fn combine(&self, terms: &[(KernelId, &[Complex64])]) -> Vec<f64> {
        let len = self.fft.len();
        let acc: Vec<Complex64> = (0..len)
            .into_par_iter()
            .map(|i| {
                terms
                    .iter()
                    .map(|(id, rho)| self.spectrum(*id)[i] * rho[i])
                    .sum()
            })
            .collect();
        self.inverse(acc)
    }

    /// Fourier derivatives `d_d u` on the periodic grid for each axis in
    /// `axes`; the Nyquist mode is dropped so the result stays real.
    pub(crate) fn spectral_derivatives(&self, values: &[f64], axes: &[usize]) -> Vec<Vec<f64>> {
        let grid = *self.grid();
        let n = grid.n();
        let mut hat: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid_fft.process(&mut hat, false);
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * grid.h());
        let wave = |j: usize| -> f64 {
            if j < n / 2 {
                j as f64 * dk
            } else if j == n / 2 {
                0.0
            } else {
                (j as f64 - n as f64) * dk
            }
        };
        let scale = 1.0 / grid.len() as f64;
        axes.iter()
            .map(|&d| {
                let mut buf: Vec<Complex64> = hat
                    .par_iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        let k = wave(grid.unravel(i)[d]);
                        Complex64::new(-c.im * k, c.re * k)
                    })
                    .collect();
                self.grid_fft.process(&mut buf, true);
                buf.iter().map(|c| c.re * scale).collect()
            })
            .collect()
    }

    pub fn convolve(&self, id: KernelId, density: &ScalarField) -> Result<ScalarField> {
        if density.grid() != self.grid() {
            return Err(LandauError::GridMismatch);
        }
        let rho = self.forward(density.values());
        let out = self.combine(&[(id, &rho)]);
        ScalarField::from_values(*self.grid(), out)
    }
}
