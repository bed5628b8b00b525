use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// In-place 3D complex FFT on an `m^3` cube stored `x` fastest.
#[derive(Clone)]
pub(crate) struct Fft3 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("m", &self.m).finish()
    }
}

impl Fft3 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    /// Unnormalized transform; the inverse carries no `1/m^3`.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m);
        let plan = if inverse { &self.inv } else { &self.fwd };
        // x: contiguous lines, batched per plane
        data.par_chunks_mut(m * m).for_each(|plane| plan.process(plane));
        // y: transpose each plane
        data.par_chunks_mut(m * m).for_each(|plane| {
            let mut t = vec![Complex64::default(); m * m];
            for y in 0..m {
                for x in 0..m {
                    t[x * m + y] = plane[y * m + x];
                }
            }
            plan.process(&mut t);
            for y in 0..m {
                for x in 0..m {
                    plane[y * m + x] = t[x * m + y];
                }
            }
        });
        // z: gather into z-fastest layout
        let mut t: Vec<Complex64> = (0..m * m * m)
            .into_par_iter()
            .map(|j| {
                let z = j % m;
                let xy = j / m;
                data[z * m * m + xy]
            })
            .collect();
        t.par_chunks_mut(m * m).for_each(|chunk| plan.process(chunk));
        data.par_iter_mut().enumerate().for_each(|(i, d)| {
            let z = i / (m * m);
            let xy = i % (m * m);
            *d = t[xy * m + z];
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_single_mode() {
        let m = 8;
        let fft = Fft3::new(m);
        let orig: Vec<Complex64> = (0..m * m * m)
            .map(|i| Complex64::new((i as f64 * 0.31).sin(), (i as f64 * 0.17).cos()))
            .collect();
        let mut d = orig.clone();
        fft.process(&mut d, false);
        fft.process(&mut d, true);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / (m * m * m) as f64 - b).norm() < 1e-13);
        }
        // plane wave exp(2 pi i (x + 2y + 3z)/m) lands in bin (1, 2, 3)
        let mut w: Vec<Complex64> = (0..m * m * m)
            .map(|i| {
                let (x, y, z) = (i % m, (i / m) % m, i / (m * m));
                let ph = 2.0 * std::f64::consts::PI * (x + 2 * y + 3 * z) as f64 / m as f64;
                Complex64::from_polar(1.0, ph)
            })
            .collect();
        fft.process(&mut w, false);
        let peak = (3 * m + 2) * m + 1;
        for (i, c) in w.iter().enumerate() {
            let expected = if i == peak { (m * m * m) as f64 } else { 0.0 };
            assert!((c.re - expected).abs() < 1e-9 && c.im.abs() < 1e-9, "bin {i}: {c}");
        }
    }
}
