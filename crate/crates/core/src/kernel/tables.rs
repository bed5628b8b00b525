use rayon::prelude::*;

use super::quadrature::gauss_legendre;
use super::{kernel_divergence_unchecked, kernel_matrix_unchecked, KernelParams};
use crate::field::VelocityGrid;

/// Which tabulated kernel a convolution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelId {
    /// `a_jk`, packed symmetric index (see [`super::sym_index`]).
    A(usize),
    /// `b_j = sum_k d_k a_jk`.
    B(usize),
    /// `|u|^gamma`.
    Power,
}

impl KernelId {
    pub const ALL: [KernelId; 10] = [
        KernelId::A(0),
        KernelId::A(1),
        KernelId::A(2),
        KernelId::A(3),
        KernelId::A(4),
        KernelId::A(5),
        KernelId::B(0),
        KernelId::B(1),
        KernelId::B(2),
        KernelId::Power,
    ];

    pub fn slot(&self) -> usize {
        match *self {
            KernelId::A(c) => c,
            KernelId::B(j) => 6 + j,
            KernelId::Power => 9,
        }
    }
}

/// Kernels sampled on the shift lattice `s h`, `s in [-M/2, M/2)^3`, stored
/// at `s mod M` in the grid index order. `M = pad * N`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTables {
    grid: VelocityGrid,
    pad: usize,
    tables: Vec<Vec<f64>>,
}

impl KernelTables {
    #[inline]
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    #[inline]
    pub fn pad(&self) -> usize {
        self.pad
    }

    #[inline]
    pub fn lattice(&self) -> usize {
        self.pad * self.grid.n()
    }

    pub fn table(&self, id: KernelId) -> &[f64] {
        &self.tables[id.slot()]
    }

    /// Lattice index of the integer shift `s`.
    pub fn shift_index(&self, s: [i64; 3]) -> usize {
        let m = self.lattice() as i64;
        let w = |x: i64| x.rem_euclid(m) as usize;
        (w(s[2]) * self.lattice() + w(s[1])) * self.lattice() + w(s[0])
    }
}

/// Samples `a_jk`, `b_j` and `|u|^gamma` on the shift lattice. The zero
/// shift holds the exact cell average over `[-h/2, h/2]^3`.
pub fn tabulate_fft_kernels(grid: &VelocityGrid, params: &KernelParams, pad: usize) -> KernelTables {
    let pad = pad.max(1);
    let m = pad * grid.n();
    let h = grid.h();
    let gamma = params.gamma();
    let total = m * m * m;
    let signed = |j: usize| -> f64 {
        if j < m / 2 {
            j as f64
        } else {
            j as f64 - m as f64
        }
    };
    let samples: Vec<([f64; 6], [f64; 3], f64)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            if idx == 0 {
                return ([0.0; 6], [0.0; 3], 0.0);
            }
            let u = [
                signed(idx % m) * h,
                signed((idx / m) % m) * h,
                signed(idx / (m * m)) * h,
            ];
            let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
            (
                kernel_matrix_unchecked(u, r2, gamma),
                kernel_divergence_unchecked(u, r2, gamma),
                r2.powf(0.5 * gamma),
            )
        })
        .collect();
    let mut tables = vec![vec![0.0; total]; 10];
    for (idx, (a, b, p)) in samples.into_iter().enumerate() {
        for c in 0..6 {
            tables[c][idx] = a[c];
        }
        for j in 0..3 {
            tables[6 + j][idx] = b[j];
        }
        tables[9][idx] = p;
    }
    // Origin cell: by cubic symmetry the off-diagonal averages and b vanish;
    // each diagonal entry is 2/3 of the averaged |u|^{gamma+2}.
    let diag = (2.0 / 3.0) * h.powf(gamma + 2.0) * cube_power_average(gamma + 2.0);
    for c in 0..3 {
        tables[c][0] = diag;
    }
    tables[9][0] = h.powf(gamma) * cube_power_average(gamma);
    KernelTables { grid: *grid, pad, tables }
}

/// Mean of `|x|^p` over the unit cube `[-1/2, 1/2]^3`, `p > -3`.
///
/// Splits the cube into six pyramids with apex at the origin; the radial
/// factor integrates exactly and the face integral is smooth.
pub fn cube_power_average(p: f64) -> f64 {
    assert!(p > -3.0);
    let (x, w) = gauss_legendre(48);
    let mut face = 0.0;
    for (a, wa) in x.iter().zip(&w) {
        for (b, wb) in x.iter().zip(&w) {
            face += wa * wb * (1.0 + a * a + b * b).powf(0.5 * p);
        }
    }
    6.0 * face / (8.0 * 2f64.powf(p) * (p + 3.0))
}
