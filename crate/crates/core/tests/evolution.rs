use landau_core::evolution::*;
use landau_core::field::*;
use landau_core::kernel::*;
use landau_core::operator::*;
use landau_core::LandauError;

fn operator(r: f64, n: usize) -> LandauOperator {
    let grid = VelocityGrid::new(r, n).unwrap();
    let params = KernelParams::new(-1.0, true).unwrap();
    LandauOperator::new(LandauCoefficients::compute(&grid, &params, &QuadratureSpec::default(), 1).unwrap())
}

fn gaussian(grid: VelocityGrid) -> ScalarField {
    ScalarField::from_fn(grid, |v| (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 2.0).exp())
}

fn distance(a: &ScalarField, b: &ScalarField) -> f64 {
    let d = a.lin_comb(1.0, b, -1.0).unwrap();
    inner_product(&d, &d).unwrap().sqrt()
}

#[test]
fn zero_data_stays_zero() {
    let op = operator(8.0, 16);
    let grid = *op.coeffs().grid();
    let tr = evolve(ScalarField::zeros(grid), &SourceModel::zero(grid), 0.1, &TimePolicy::default(), &[0.05], &op).unwrap();
    assert_eq!(tr.state.f.max_abs(), 0.0);
    assert!(tr.state.energy_log.iter().all(|r| r.l2sq == 0.0 && r.asq == 0.0));
    assert_eq!(tr.snapshot_at(0.05).unwrap().max_abs(), 0.0);
}

/// With `L = 0` one RK4 step integrates `e^{-t}` by Simpson's rule:
/// local error `dt^5 / 2880`.
#[test]
fn single_step_without_operator_matches_quadrature() {
    let op = operator(8.0, 16).with_mode(OperatorMode::Disabled);
    let grid = *op.coeffs().grid();
    let phi = gaussian(grid);
    let model = SourceModel::new(phi.clone(), TimeFactor::Exp { rate: 1.0 });
    let t0 = 0.3;
    let err = |dt: f64| {
        let mut s = EvolutionState::new(ScalarField::zeros(grid));
        s.t = t0;
        step(&mut s, dt, &op, &model).unwrap();
        let exact = phi.scaled((-t0 as f64).exp() - (-(t0 + dt)).exp());
        distance(&s.f, &exact) / inner_product(&phi, &phi).unwrap().sqrt()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    assert!(e1 < 0.1f64.powi(5) / 2880.0, "{e1}");
    let slope = (e1 / e2).log2();
    assert!((slope - 5.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn step_halving_is_fourth_order() {
    let op = operator(8.0, 16);
    let grid = *op.coeffs().grid();
    let f0 = packet_field(grid, [0.5, 0.0, -0.5], 1.2, [0.8, 0.0, 0.0]).unwrap();
    let model = SourceModel::new(gaussian(grid), TimeFactor::Cos { omega: 2.0 });
    let run = |refine: u32| {
        let policy = TimePolicy { safety: 0.4, refine };
        evolve(f0.clone(), &model, 0.1, &policy, &[], &op).unwrap().state.f
    };
    let (a, b, c) = (run(1), run(2), run(4));
    let slope = (distance(&a, &b) / distance(&b, &c)).log2();
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn oversized_step_is_reported_as_instability() {
    let op = operator(8.0, 16);
    let grid = *op.coeffs().grid();
    let f0 = random_field(grid, 3, FieldProfile::default()).unwrap();
    let mut s = EvolutionState::new(f0);
    let dt = 200.0 * stable_dt(op.coeffs(), 0.4);
    let err = step(&mut s, dt, &op, &SourceModel::zero(grid)).unwrap_err();
    assert!(matches!(err, LandauError::Instability { .. }), "{err:?}");
}

#[test]
fn evolve_hits_snapshot_times_and_logs_uniformly() {
    let op = operator(8.0, 16);
    let grid = *op.coeffs().grid();
    let f0 = random_field(grid, 5, FieldProfile::default()).unwrap();
    let times = [0.05, 0.1, 0.2];
    let tr = evolve(f0, &SourceModel::zero(grid), 0.2, &TimePolicy::default(), &times, &op).unwrap();
    let steps = tr.state.step_index;
    assert_eq!(steps % 4, 0);
    assert!(tr.dt <= stable_dt(op.coeffs(), 0.4));
    assert_eq!(tr.state.energy_log.len() as u64, steps + 1);
    for (i, row) in tr.state.energy_log.iter().enumerate() {
        assert!((row.t - i as f64 * tr.dt).abs() < 1e-12);
    }
    for &t in &times {
        let (m, ts, _) = tr.snapshots.iter().find(|s| s.1 == t).unwrap();
        assert!((*m as f64 * tr.dt - ts).abs() < 1e-12);
    }
    // L^2 decay in the absence of forcing
    let log = &tr.state.energy_log;
    assert!(log.last().unwrap().l2sq < log[0].l2sq);
    assert!(evolve(ScalarField::zeros(grid), &SourceModel::zero(grid), 0.2, &TimePolicy::default(), &[0.0], &op).is_err());
}

#[test]
fn ladder_base_case() {
    let op = operator(8.0, 16);
    let grid = *op.coeffs().grid();
    let f = random_field(grid, 9, FieldProfile::default()).unwrap();
    let t = 0.7;
    let ladder = derivative_ladder(&f, t, 1, &SourceModel::zero(grid), &op).unwrap();
    let lf = op.l(&f).unwrap();
    let expected = t * inner_product(&lf, &lf).unwrap().sqrt();
    let got = ladder.scaled()[1];
    assert!((got - expected).abs() <= 1e-14 * expected);
    assert_eq!(ladder.entries[1], lf.scaled(-1.0));
}

#[test]
fn ladder_is_linear_without_forcing() {
    let op = operator(8.0, 16);
    let grid = *op.coeffs().grid();
    let f1 = random_field(grid, 1, FieldProfile::default()).unwrap();
    let f2 = random_field(grid, 2, FieldProfile::default()).unwrap();
    let (alpha, beta) = (0.75, -1.5);
    let zero = SourceModel::zero(grid);
    let l1 = derivative_ladder(&f1, 1.0, 6, &zero, &op).unwrap();
    let l2 = derivative_ladder(&f2, 1.0, 6, &zero, &op).unwrap();
    let mix = derivative_ladder(&f1.lin_comb(alpha, &f2, beta).unwrap(), 1.0, 6, &zero, &op).unwrap();
    for k in 0..=6 {
        let combined = l1.entries[k].lin_comb(alpha, &l2.entries[k], beta).unwrap();
        let scale = inner_product(&combined, &combined).unwrap().sqrt();
        assert!(distance(&mix.entries[k], &combined) <= 1e-12 * scale, "k = {k}");
    }
}

#[test]
fn ladder_without_operator_is_the_source_chain() {
    let op = operator(8.0, 16).with_mode(OperatorMode::Disabled);
    let grid = *op.coeffs().grid();
    let phi = packet_field(grid, [0.0; 3], 1.0, [0.0; 3]).unwrap();
    let model = SourceModel::new(phi.clone(), TimeFactor::Exp { rate: 1.0 });
    let t = 1.5;
    let ladder = derivative_ladder(&phi, t, 6, &model, &op).unwrap();
    // ||phi|| = 1: a_k = t^k e^{-t} / k! for k >= 1
    let mut fact = 1.0;
    for (k, a) in ladder.scaled().iter().enumerate().skip(1) {
        fact *= k as f64;
        let expected = t.powi(k as i32) * (-t as f64).exp() / fact;
        assert!((a - expected).abs() <= 1e-13 * expected, "k = {k}");
    }
}

#[test]
fn ladder_argument_errors() {
    let op = operator(8.0, 16);
    let grid = *op.coeffs().grid();
    let f = gaussian(grid);
    let zero = SourceModel::zero(grid);
    assert!(matches!(derivative_ladder(&f, 0.0, 3, &zero, &op), Err(LandauError::InvalidArgument(_))));
    assert!(matches!(
        derivative_ladder(&f, 1.0, 11, &zero, &op),
        Err(LandauError::UnsupportedOrder { order: 11, max: 10 })
    ));
    // second derivative of cos(1e60 t) is ~1e120
    let huge = SourceModel::new(f.clone(), TimeFactor::Cos { omega: 1e60 });
    let err = derivative_ladder(&f, 1.0, 5, &huge, &op).unwrap_err();
    assert!(matches!(err, LandauError::LadderOverflow { depth: 3, .. }), "{err:?}");
}

#[test]
fn collision_invariants_are_orthonormal_and_removable() {
    let grid = VelocityGrid::new(8.0, 16).unwrap();
    let basis = collision_invariants(&grid);
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let ip = inner_product(a, b).unwrap();
            assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    let phi = packet_field(grid, [0.3, 0.0, 0.0], 1.0, [0.0; 3]).unwrap();
    let clean = remove_invariants(&phi);
    for b in &basis {
        assert!(inner_product(&clean, b).unwrap().abs() < 1e-12);
    }
}
