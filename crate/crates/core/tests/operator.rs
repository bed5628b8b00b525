use std::sync::OnceLock;

use proptest::prelude::*;

use landau_core::field::*;
use landau_core::kernel::*;
use landau_core::operator::*;

fn operator(n: usize) -> LandauOperator {
    let grid = VelocityGrid::new(8.0, n).unwrap();
    let params = KernelParams::new(-1.0, true).unwrap();
    LandauOperator::new(LandauCoefficients::compute(&grid, &params, &QuadratureSpec::default(), 1).unwrap())
}

fn op16() -> &'static LandauOperator {
    static OP: OnceLock<LandauOperator> = OnceLock::new();
    OP.get_or_init(|| operator(16))
}

fn gaussian(grid: VelocityGrid, center: [f64; 3], width: f64) -> ScalarField {
    ScalarField::from_fn(grid, |v| {
        let r2: f64 = (0..3).map(|d| (v[d] - center[d]).powi(2)).sum();
        (-r2 / (2.0 * width * width)).exp()
    })
}

fn rel_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    let d = a.lin_comb(1.0, b, -1.0).unwrap();
    d.max_abs() / a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE)
}

fn mu(grid: VelocityGrid) -> ScalarField {
    let params = KernelParams::new(-1.0, true).unwrap();
    ScalarField::from_fn(grid, |v| eval_maxwellian(v, &params))
}

fn q_residual(n: usize) -> f64 {
    let op = operator(n);
    let m = mu(*op.coeffs().grid());
    weighted_norm(&apply_q(&m, &m, op.engine()).unwrap(), WeightedNormSpec::l2(0.0))
}

#[test]
fn zero_maps_to_zero() {
    let op = op16();
    let z = ScalarField::zeros(*op.coeffs().grid());
    for out in [op.l1(&z).unwrap(), op.l2(&z).unwrap(), op.l(&z).unwrap()] {
        assert_eq!(out.max_abs(), 0.0);
    }
}

#[test]
fn l_is_the_sum_of_its_parts() {
    let op = op16();
    let f = random_field(*op.coeffs().grid(), 3, FieldProfile::default()).unwrap();
    let sum = op.l1(&f).unwrap().lin_comb(1.0, &op.l2(&f).unwrap(), 1.0).unwrap();
    assert!(rel_diff(&op.l(&f).unwrap(), &sum) < 1e-14);
    let only = op.with_mode(OperatorMode::L1Only);
    assert_eq!(only.l(&f).unwrap(), op.l1(&f).unwrap());
}

#[test]
fn diffusion_is_self_adjoint() {
    let op = op16();
    let grid = *op.coeffs().grid();
    for seed in 0..4 {
        let f = random_field(grid, seed, FieldProfile::default()).unwrap();
        let g = random_field(grid, seed + 100, FieldProfile::default()).unwrap();
        let fg = inner_product(&apply_diffusion(&f, op.coeffs()).unwrap(), &g).unwrap();
        let gf = inner_product(&apply_diffusion(&g, op.coeffs()).unwrap(), &f).unwrap();
        assert!((fg - gf).abs() <= 1e-10 * fg.abs().max(gf.abs()), "{fg} vs {gf}");
        let e = energy_bilinear(&f, &g, op.coeffs().faces()).unwrap();
        assert!((fg - e).abs() <= 1e-10 * e.abs(), "{fg} vs {e}");
    }
}

#[test]
fn l1_converges_under_refinement() {
    // (L1 f, g) on smooth fields; three grids give the observed order
    let values: Vec<f64> = [24, 32, 48]
        .iter()
        .map(|&n| {
            let op = operator(n);
            let grid = *op.coeffs().grid();
            let f = gaussian(grid, [0.5, -0.25, 0.0], 1.0);
            let g = gaussian(grid, [-0.25, 0.0, 0.5], 1.25);
            inner_product(&op.l1(&f).unwrap(), &g).unwrap()
        })
        .collect();
    let ratio = (values[0] - values[1]) / (values[1] - values[2]);
    let model = |p: f64| (24f64.powf(-p) - 32f64.powf(-p)) / (32f64.powf(-p) - 48f64.powf(-p));
    // model is increasing in p: 1.18 at p = 1.5, 1.4 at p = 2. The observed
    // order is about 1.7, still short of the asymptotic regime.
    assert!(ratio > model(1.5), "values {values:?}, ratio {ratio}");
}

#[test]
fn maxwellian_is_an_equilibrium_of_q() {
    let (coarse, fine) = (q_residual(16), q_residual(32));
    let order = (coarse / fine).log2();
    assert!(order >= 1.8, "{coarse:e} -> {fine:e}");
}

#[test]
fn q_conserves_mass() {
    let op = op16();
    let grid = *op.coeffs().grid();
    let g = random_field(grid, 1, FieldProfile::default()).unwrap();
    let f = random_field(grid, 2, FieldProfile::default()).unwrap();
    let q = apply_q(&g, &f, op.engine()).unwrap();
    let mass: f64 = q.values().iter().sum();
    let scale: f64 = q.values().iter().map(|x| x.abs()).sum();
    assert!(mass.abs() <= 1e-12 * scale, "{mass} against {scale}");
}

#[test]
fn q_grid_mismatch() {
    let op = op16();
    let other = ScalarField::zeros(VelocityGrid::new(8.0, 18).unwrap());
    let f = ScalarField::zeros(*op.coeffs().grid());
    assert!(apply_q(&other, &f, op.engine()).is_err());
    assert!(apply_l1(&other, op.coeffs()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn l_is_linear(s1 in 0u64..1000, s2 in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let op = op16();
        let grid = *op.coeffs().grid();
        let f1 = random_field(grid, s1, FieldProfile::default()).unwrap();
        let f2 = random_field(grid, s2 + 1000, FieldProfile::default()).unwrap();
        let lhs = op.l(&f1.lin_comb(a, &f2, b).unwrap()).unwrap();
        let rhs = op.l(&f1).unwrap().lin_comb(a, &op.l(&f2).unwrap(), b).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn q_is_bilinear(s1 in 0u64..1000, s2 in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let op = op16();
        let grid = *op.coeffs().grid();
        let g = random_field(grid, s1, FieldProfile::default()).unwrap();
        let f1 = random_field(grid, s2 + 1000, FieldProfile::default()).unwrap();
        let f2 = gaussian(grid, [0.0; 3], 1.5);
        let e = op.engine();
        let mix = f1.lin_comb(a, &f2, b).unwrap();
        let right = apply_q(&g, &mix, e).unwrap();
        let split = apply_q(&g, &f1, e).unwrap().lin_comb(a, &apply_q(&g, &f2, e).unwrap(), b).unwrap();
        prop_assert!(rel_diff(&right, &split) < 1e-12);
        let left = apply_q(&mix, &g, e).unwrap();
        let split = apply_q(&f1, &g, e).unwrap().lin_comb(a, &apply_q(&f2, &g, e).unwrap(), b).unwrap();
        prop_assert!(rel_diff(&left, &split) < 1e-12);
    }
}
