use serde::{Deserialize, Serialize};

use super::{bracket, ScalarField, VectorField};
use crate::error::{LandauError, Result};
use crate::summation::{pairwise_sum, pairwise_sum_by};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    L3,
    LInf,
}

/// `||<v>^weight f||_{L^p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub p: NormKind,
    pub weight: f64,
}

impl WeightedNormSpec {
    pub fn l2(weight: f64) -> Self {
        Self {
            p: NormKind::L2,
            weight,
        }
    }

    pub fn l3(weight: f64) -> Self {
        Self {
            p: NormKind::L3,
            weight,
        }
    }

    pub fn linf(weight: f64) -> Self {
        Self {
            p: NormKind::LInf,
            weight,
        }
    }
}

pub fn weighted_norm(f: &ScalarField, spec: WeightedNormSpec) -> f64 {
    let grid = f.grid();
    let vals = f.values();
    let w = |i: usize| bracket(grid.coords(i)).powf(spec.weight);
    match spec.p {
        NormKind::L2 => {
            let s = pairwise_sum_by(vals.len(), |i| {
                let x = w(i) * vals[i];
                x * x
            });
            (s * grid.cell_volume()).sqrt()
        }
        NormKind::L3 => {
            let s = pairwise_sum_by(vals.len(), |i| (w(i) * vals[i]).abs().powi(3));
            (s * grid.cell_volume()).cbrt()
        }
        NormKind::LInf => (0..vals.len()).fold(0.0, |m, i| m.max(w(i) * vals[i].abs())),
    }
}

/// `||<v>^weight |G| ||_{L^2}` for a vector field.
pub fn weighted_norm_vec(g: &VectorField, weight: f64) -> f64 {
    let grid = g.grid();
    let s = pairwise_sum_by(grid.len(), |i| {
        let w = bracket(grid.coords(i)).powf(2.0 * weight);
        let x = g.at(i);
        w * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    });
    (s * grid.cell_volume()).sqrt()
}

/// Discrete `L^2` inner product `sum f_i g_i h^3`.
pub fn inner_product(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(LandauError::GridMismatch);
    }
    let terms: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
    Ok(pairwise_sum(&terms) * f.grid().cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_field, FieldProfile, VelocityGrid};
    use proptest::prelude::*;

    #[test]
    fn gaussian_l2_norm() {
        // int e^{-|v|^2} dv = pi^{3/2}
        let grid = VelocityGrid::new(8.0, 64).unwrap();
        let f = ScalarField::from_fn(grid, |v| (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
        let n = weighted_norm(&f, WeightedNormSpec::l2(0.0));
        let exact = std::f64::consts::PI.powf(0.75);
        assert!((n - exact).abs() < 1e-4, "{n} vs {exact}");
    }

    #[test]
    fn zero_field_norms() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let f = ScalarField::zeros(grid);
        for spec in [
            WeightedNormSpec::l2(0.5),
            WeightedNormSpec::l3(-0.5),
            WeightedNormSpec::linf(1.0),
        ] {
            assert_eq!(weighted_norm(&f, spec), 0.0);
        }
    }

    #[test]
    fn inner_product_matches_norm_and_grid_mismatch() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let f = random_field(grid, 3, FieldProfile::default()).unwrap();
        let n = weighted_norm(&f, WeightedNormSpec::l2(0.0));
        let ip = inner_product(&f, &f).unwrap();
        assert!((ip - n * n).abs() < 1e-14);
        let other = ScalarField::zeros(VelocityGrid::new(8.0, 18).unwrap());
        assert_eq!(inner_product(&f, &other), Err(LandauError::GridMismatch));
    }

    #[test]
    fn odd_even_orthogonal() {
        let grid = VelocityGrid::new(8.0, 16).unwrap();
        let even = ScalarField::from_fn(grid, |v| (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 4.0).exp());
        let odd = ScalarField::from_fn(grid, |v| v[1] * (-(v[0] * v[0] + v[1] * v[1]) / 3.0).exp());
        assert!(inner_product(&even, &odd).unwrap().abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norm_properties(seed_a in 0u64..1000, seed_b in 0u64..1000, seed_c in 0u64..1000,
                           lam in -5.0f64..5.0, l1 in -2.0f64..1.0, dl in 0.0f64..2.0) {
            let grid = VelocityGrid::new(8.0, 16).unwrap();
            let p = FieldProfile::default();
            let f = random_field(grid, seed_a, p).unwrap();
            let g = random_field(grid, seed_b, p).unwrap();
            let h = random_field(grid, seed_c, p).unwrap();
            let n = |x: &ScalarField, w: f64| weighted_norm(x, WeightedNormSpec::l2(w));
            // homogeneity
            let scaled = f.scaled(lam);
            prop_assert!((n(&scaled, l1) - lam.abs() * n(&f, l1)).abs() <= 1e-12 * n(&f, l1).max(1.0) * lam.abs().max(1.0));
            // triangle
            let fg = f.lin_comb(1.0, &g, 1.0).unwrap();
            let fgh = fg.lin_comb(1.0, &h, 1.0).unwrap();
            prop_assert!(n(&fgh, l1) <= (n(&f, l1) + n(&g, l1) + n(&h, l1)) * (1.0 + 1e-12));
            // weight monotonicity
            prop_assert!(n(&f, l1) <= n(&f, l1 + dl) * (1.0 + 1e-12));
            // Cauchy-Schwarz
            let ip = inner_product(&f, &g).unwrap();
            prop_assert!(ip.abs() <= n(&f, 0.0) * n(&g, 0.0) * (1.0 + 1e-12));
        }
    }
}
