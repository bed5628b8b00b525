use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::{Check, ConstantEstimate, VerificationReport};
use crate::error::{LandauError, Result};
use crate::field::{bracket, norm3, ScalarField, VelocityGrid};
use crate::kernel::{
    eval_kernel_divergence, eval_kernel_matrix, gauss_legendre, sym_index, KernelId, KernelParams,
    LandauCoefficients, SYM_PAIRS,
};
use crate::operator::ConvolutionEngine;

pub const IDENTITY_TOL: f64 = 1e-12;

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Kernel entry at a complex point, for complex-step differentiation.
fn kernel_entry_complex(v: [Complex64; 3], j: usize, k: usize, gamma: f64) -> Complex64 {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let rg = r2.powf(0.5 * gamma);
    (r2 * delta(j, k) - v[j] * v[k]) * rg
}

/// `sum_k d_k a_jk` by complex-step differentiation.
fn divergence_complex_step(v: [f64; 3], gamma: f64) -> [f64; 3] {
    let eps = 1e-30 * norm3(v).max(1e-300);
    std::array::from_fn(|j| {
        (0..3)
            .map(|k| {
                let mut z = v.map(|x| Complex64::new(x, 0.0));
                z[k].im = eps;
                kernel_entry_complex(z, j, k, gamma).im / eps
            })
            .sum()
    })
}

/// `d_l a_jk(v)`.
pub fn kernel_first_derivative(v: [f64; 3], gamma: f64, j: usize, k: usize, l: usize) -> f64 {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let rg = r2.powf(0.5 * gamma);
    delta(j, k) * (gamma + 2.0) * rg * v[l]
        - (delta(j, l) * v[k] + delta(k, l) * v[j]) * rg
        - gamma * v[j] * v[k] * v[l] * rg / r2
}

/// `d_m d_l a_jk(v)`.
pub fn kernel_second_derivative(v: [f64; 3], gamma: f64, j: usize, k: usize, l: usize, m: usize) -> f64 {
    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let rg = r2.powf(0.5 * gamma);
    let rg2 = rg / r2;
    delta(j, k) * (gamma + 2.0) * (gamma * rg2 * v[l] * v[m] + rg * delta(l, m))
        - (delta(j, l) * delta(k, m) + delta(k, l) * delta(j, m)) * rg
        - gamma * rg2 * v[m] * (delta(j, l) * v[k] + delta(k, l) * v[j])
        - gamma * rg2 * (delta(j, m) * v[k] * v[l] + delta(k, m) * v[j] * v[l] + delta(l, m) * v[j] * v[k])
        - gamma * (gamma - 2.0) * v[j] * v[k] * v[l] * v[m] * rg2 / r2
}

/// Null identities and the divergence closed form at random points,
/// relative to the natural scale `|v|^{gamma+2}` of the kernel.
pub fn check_kernel_identities(params: &KernelParams, sample_count: usize, seed: u64) -> Result<VerificationReport> {
    if sample_count < 100 {
        return Err(LandauError::InvalidArgument(format!(
            "kernel identity check needs at least 100 samples, got {sample_count}"
        )));
    }
    let gamma = params.gamma();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 3]> = (0..sample_count)
        .map(|_| {
            let d: [f64; 3] = [0; 3].map(|_: i32| rng.sample(StandardNormal));
            let r = 10f64.powf(rng.random_range(-2.0..1.5)) / norm3(d);
            d.map(|x| x * r)
        })
        .collect();
    let mut quad = 0.0f64;
    let mut row = 0.0f64;
    let mut col = 0.0f64;
    let mut div = 0.0f64;
    for &v in &points {
        let a = eval_kernel_matrix(v, params)?;
        let r = norm3(v);
        let scale = r.powf(gamma + 2.0);
        let q: f64 = (0..3)
            .flat_map(|j| (0..3).map(move |k| (j, k)))
            .map(|(j, k)| a[sym_index(j, k)] * v[j] * v[k])
            .sum();
        quad = quad.max(q.abs() / (scale * r * r));
        for k in 0..3 {
            let s: f64 = (0..3).map(|j| a[sym_index(j, k)] * v[j]).sum();
            row = row.max(s.abs() / (scale * r));
            let s: f64 = (0..3).map(|j| a[sym_index(k, j)] * v[j]).sum();
            col = col.max(s.abs() / (scale * r));
        }
        let b = eval_kernel_divergence(v, params)?;
        let oracle = divergence_complex_step(v, gamma);
        let bscale = 2.0 * r.powf(gamma + 1.0);
        for j in 0..3 {
            div = div.max((b[j] - oracle[j]).abs() / bscale);
        }
    }
    let mut report = VerificationReport::new("kernel");
    report.push(Check::at_most("quadratic_form_null", quad, IDENTITY_TOL));
    report.push(Check::at_most("row_null", row, IDENTITY_TOL));
    report.push(Check::at_most("column_null", col, IDENTITY_TOL));
    report.push(Check::at_most("divergence_closed_form", div, IDENTITY_TOL));
    Ok(report)
}

/// Interior-node centered differences of `u` for the multi-index `beta`
/// (`|beta| <= 2`); boundary nodes get `NaN`.
fn interior_derivative(grid: &VelocityGrid, u: &[f64], beta: [usize; 3]) -> Vec<f64> {
    let n = grid.n();
    let h = grid.h();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let ijk = grid.unravel(idx);
            if ijk.iter().any(|&i| i == 0 || i == n - 1) {
                return f64::NAN;
            }
            let at = |off: [isize; 3]| {
                let mut j = idx;
                for (d, &o) in off.iter().enumerate() {
                    if o != 0 {
                        j = grid.neighbor(j, d, o);
                    }
                }
                u[j]
            };
            let axes: Vec<usize> = (0..3).flat_map(|d| std::iter::repeat_n(d, beta[d])).collect();
            let unit = |d: usize, s: isize| {
                let mut o = [0isize; 3];
                o[d] = s;
                o
            };
            match axes.as_slice() {
                [] => u[idx],
                [d] => (at(unit(*d, 1)) - at(unit(*d, -1))) / (2.0 * h),
                [d, e] if d == e => (at(unit(*d, 1)) - 2.0 * u[idx] + at(unit(*d, -1))) / (h * h),
                [d, e] => {
                    let pp = at(add(unit(*d, 1), unit(*e, 1)));
                    let pm = at(add(unit(*d, 1), unit(*e, -1)));
                    let mp = at(add(unit(*d, -1), unit(*e, 1)));
                    let mm = at(add(unit(*d, -1), unit(*e, -1)));
                    (pp - pm - mp + mm) / (4.0 * h * h)
                }
                _ => unreachable!("order at most 2"),
            }
        })
        .collect()
}

fn add(a: [isize; 3], b: [isize; 3]) -> [isize; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn multi_indices(order: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..=order {
        for b in 0..=order - a {
            out.push([a, b, order - a - b]);
        }
    }
    out
}

fn beta_factorial(beta: [usize; 3]) -> f64 {
    beta.iter().map(|&b| (1..=b).product::<usize>() as f64).product()
}

fn max_ratio(grid: &VelocityGrid, d: &[f64], weight: impl Fn([f64; 3]) -> f64 + Sync) -> f64 {
    (0..grid.len())
        .into_par_iter()
        .filter(|&i| d[i].is_finite())
        .map(|i| d[i].abs() / weight(grid.coords(i)))
        .reduce(|| 0.0, f64::max)
}

/// Normalized derivative bounds of the smoothed coefficients (finite
/// differences) and of the kernel itself (analytic). `K_coef` is the
/// largest normalized ratio of the smoothed-coefficient bounds.
pub fn check_coefficient_bounds(coeffs: &LandauCoefficients) -> Result<VerificationReport> {
    let grid = *coeffs.grid();
    let gamma = coeffs.params().gamma();
    let mut report = VerificationReport::new("coefficients");
    let bracket_pow = move |p: f64| move |v: [f64; 3]| bracket(v).powf(p);

    let mut k_a: f64 = 0.0;
    for order in 1..=2 {
        for beta in multi_indices(order) {
            let bf = beta_factorial(beta).sqrt();
            for c in 0..6 {
                let d = interior_derivative(&grid, coeffs.abar().comp(c), beta);
                let r = max_ratio(&grid, &d, bracket_pow(gamma + 1.0)) / bf;
                k_a = k_a.max(r);
            }
        }
    }
    report.push(Check::finite("abar_derivative_bound", k_a));

    // the two scalar fields of the second lemma: 2 c2 and 4 c1
    let two_c2: Vec<f64> = coeffs.c2().iter().map(|x| 2.0 * x).collect();
    let four_c1: Vec<f64> = coeffs.c1().iter().map(|x| 4.0 * x).collect();
    let mut k_cap: f64 = 0.0;
    let mut quadratic0 = 0.0;
    for (name, field) in [("divergence_field_bound", &two_c2), ("quadratic_field_bound", &four_c1)] {
        let mut k: f64 = 0.0;
        // v^T A v itself grows like <v>^{gamma+2}, so its beta = 0 ratio is
        // reported on its own
        let first = if name == "quadratic_field_bound" {
            let d = interior_derivative(&grid, field, [0; 3]);
            quadratic0 = max_ratio(&grid, &d, bracket_pow(gamma + 1.0));
            1
        } else {
            0
        };
        for order in first..=2 {
            for beta in multi_indices(order) {
                let bf = (order as f64 + 1.0) * beta_factorial(beta).sqrt();
                let d = interior_derivative(&grid, field, beta);
                k = k.max(max_ratio(&grid, &d, bracket_pow(gamma + 1.0)) / bf);
            }
        }
        report.push(Check::finite(name, k));
        k_cap = k_cap.max(k);
    }

    let mut k_alpha = [0.0f64; 3];
    let kernel_ratio: Vec<[f64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let v = grid.coords(i);
            let r = norm3(v);
            let mut m = [0.0f64; 3];
            for &(j, k) in &SYM_PAIRS {
                let a = r.powf(gamma) * (delta(j, k) * r * r - v[j] * v[k]);
                m[0] = m[0].max(a.abs() / r.powf(gamma + 2.0));
                for l in 0..3 {
                    let d = kernel_first_derivative(v, gamma, j, k, l);
                    m[1] = m[1].max(d.abs() / r.powf(gamma + 1.0));
                    for mm in 0..3 {
                        let d = kernel_second_derivative(v, gamma, j, k, l, mm);
                        m[2] = m[2].max(d.abs() / r.powf(gamma));
                    }
                }
            }
            m
        })
        .collect();
    for m in kernel_ratio {
        for o in 0..3 {
            k_alpha[o] = k_alpha[o].max(m[o]);
        }
    }
    report.push(Check::at_most("kernel_bound_order0", k_alpha[0], 1.0 + IDENTITY_TOL));
    report.push(Check::finite("kernel_bound_order1", k_alpha[1]));
    report.push(Check::finite("kernel_bound_order2", k_alpha[2]));

    let k_coef = k_a.max(k_cap);
    report.push(Check::finite("K_coef", k_coef));
    report.constants.push(ConstantEstimate::new("K_coef", k_coef, 0, &grid));
    report.constants.push(ConstantEstimate::new("K_coef_abar", k_a, 0, &grid));
    report.constants.push(ConstantEstimate::new("K_coef_fields", k_cap, 0, &grid));
    report
        .constants
        .push(ConstantEstimate::new("K_kernel", k_alpha[1].max(k_alpha[2]), 0, &grid));
    report.push(Check::finite("quadratic_field_order0", quadratic0));
    report
        .constants
        .push(ConstantEstimate::new("K_quadratic_order0", quadratic0, 0, &grid));
    Ok(report)
}

/// `int |v - w|^gamma exp(-delta |w|^2) dw` at `|v| = rho` by 1-D
/// quadrature after the exact angular integration.
pub fn radial_power_convolution(rho: f64, delta: f64, gamma: f64) -> f64 {
    let (x, w) = gauss_legendre(32);
    let p = gamma + 2.0;
    let tail = rho + 12.0 / delta.sqrt();
    let integrand = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let angular = if rho < 1e-12 {
            2.0 * r.powf(gamma)
        } else {
            ((rho + r).powf(p) - (rho - r).abs().powf(p)) / (rho * r * p)
        };
        2.0 * std::f64::consts::PI * r * r * (-delta * r * r).exp() * angular
    };
    // graded panels ending at the kink r = rho
    let graded = |a: f64, b: f64, toward_b: bool| -> f64 {
        x.iter()
            .zip(&w)
            .map(|(&xi, &wi)| {
                let s = 0.5 * (xi + 1.0);
                let (r, jac) = if toward_b {
                    (b - (b - a) * s * s, (b - a) * 2.0 * s)
                } else {
                    (a + (b - a) * s * s, (b - a) * 2.0 * s)
                };
                0.5 * wi * jac * integrand(r)
            })
            .sum()
    };
    let plain = |a: f64, b: f64| -> f64 {
        x.iter()
            .zip(&w)
            .map(|(&xi, &wi)| 0.5 * (b - a) * wi * integrand(a + 0.5 * (b - a) * (xi + 1.0)))
            .sum()
    };
    let mut total = 0.0;
    if rho > 0.0 {
        let inner = rho.min(1.0);
        total += graded(rho - inner, rho, true);
        let panels = ((rho - inner) / 1.0).ceil() as usize;
        for i in 0..panels {
            let a = (rho - inner) * i as f64 / panels as f64;
            let b = (rho - inner) * (i + 1) as f64 / panels as f64;
            total += if i == 0 { graded(a, b, false) } else { plain(a, b) };
        }
    }
    let start = rho + 1.0;
    total += if rho > 0.0 { graded(rho, start, false) } else { graded(0.0, start, false) };
    let panels = (tail - start).ceil().max(1.0) as usize;
    for i in 0..panels {
        let a = start + (tail - start) * i as f64 / panels as f64;
        let b = start + (tail - start) * (i + 1) as f64 / panels as f64;
        total += plain(a, b);
    }
    total
}

pub const PLATEAU_RADIUS: f64 = 4.0;
pub const PLATEAU_SPREAD_TOL: f64 = 0.15;
pub const LIMIT_TOL: f64 = 0.05;

/// Ratio of the discrete `|u|^gamma` convolution of `exp(-delta |w|^2)` to
/// `<v>^gamma`. Meant for a linear-convolution (padded) engine.
pub fn check_convolution_bound(engine: &ConvolutionEngine, params: &KernelParams, deltas: &[f64]) -> Result<VerificationReport> {
    let grid = *engine.grid();
    let gamma = params.gamma();
    let r = grid.half_width();
    let mut report = VerificationReport::new("convolution");
    let mut k_conv: f64 = 0.0;
    for &d in deltas {
        if !(d > 0.0) {
            return Err(LandauError::InvalidArgument(format!("delta must be positive, got {d}")));
        }
        let density = ScalarField::from_fn(grid, |w| (-d * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2])).exp());
        let conv = engine.convolve(KernelId::Power, &density)?;
        let ratio: Vec<f64> = (0..grid.len())
            .map(|i| conv.values()[i] / bracket(grid.coords(i)).powf(gamma))
            .collect();
        let kmax = ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        k_conv = k_conv.max(kmax);
        report.push(Check::finite(format!("K_conv[delta={d}]"), kmax));

        let shell: Vec<f64> = (0..grid.len())
            .filter(|&i| {
                let s = norm3(grid.coords(i));
                (PLATEAU_RADIUS..=r - 1.0).contains(&s)
            })
            .map(|i| ratio[i])
            .collect();
        let hi = shell.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = shell.iter().cloned().fold(f64::INFINITY, f64::min);
        report.push(Check::at_most(format!("plateau_spread[delta={d}]"), (hi - lo) / hi, PLATEAU_SPREAD_TOL));

        // the node closest to R - 1 on the positive x half-axis
        let near_axis = grid.n() / 2;
        let ix = (near_axis..grid.n())
            .min_by(|&a, &b| {
                let da = (grid.node(a) - (r - 1.0)).abs();
                let db = (grid.node(b) - (r - 1.0)).abs();
                da.total_cmp(&db)
            })
            .unwrap_or(near_axis);
        let i = grid.index(ix, near_axis, near_axis);
        let limit = (std::f64::consts::PI / d).powf(1.5);
        report.push(Check::at_most(
            format!("far_field_limit[delta={d}]"),
            (ratio[i] - limit).abs() / limit,
            LIMIT_TOL,
        ));

        let c = grid.index(near_axis, near_axis, near_axis);
        let rho = norm3(grid.coords(c));
        let oracle = radial_power_convolution(rho, d, gamma);
        report.push(Check::finite(
            format!("origin_cell_relative_error[delta={d}]"),
            (conv.values()[c] - oracle).abs() / oracle,
        ));
    }
    report.push(Check::finite("K_conv", k_conv));
    report.constants.push(ConstantEstimate::new("K_conv", k_conv, 0, &grid));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex_step_first(v: [f64; 3], gamma: f64, j: usize, k: usize, l: usize) -> f64 {
        let eps = 1e-30;
        let mut z = v.map(|x| Complex64::new(x, 0.0));
        z[l].im = eps;
        kernel_entry_complex(z, j, k, gamma).im / eps
    }

    #[test]
    fn analytic_derivatives_match_complex_step() {
        let v = [0.7, -1.3, 0.4];
        for &gamma in &[-2.5, -1.0, -0.3] {
            for &(j, k) in &SYM_PAIRS {
                for l in 0..3 {
                    let a = kernel_first_derivative(v, gamma, j, k, l);
                    let b = complex_step_first(v, gamma, j, k, l);
                    assert!((a - b).abs() < 1e-13, "{a} {b}");
                    for m in 0..3 {
                        // complex step of the analytic first derivative
                        let eps = 1e-7;
                        let mut vp = v;
                        let mut vm = v;
                        vp[m] += eps;
                        vm[m] -= eps;
                        let fd = (kernel_first_derivative(vp, gamma, j, k, l) - kernel_first_derivative(vm, gamma, j, k, l))
                            / (2.0 * eps);
                        let an = kernel_second_derivative(v, gamma, j, k, l, m);
                        assert!((fd - an).abs() < 1e-6, "{fd} {an}");
                    }
                }
            }
        }
    }

    #[test]
    fn identities_pass_and_need_samples() {
        let params = KernelParams::new(-1.7, true).unwrap();
        assert!(check_kernel_identities(&params, 50, 1).is_err());
        let r = check_kernel_identities(&params, 1000, 1).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn radial_oracle_matches_newton_potential() {
        // for gamma = -1 the convolution is the Gaussian's Newton potential
        for &(rho, d) in &[(0.0, 0.5), (0.3, 0.5), (2.0, 1.0), (6.5, 0.25)] {
            let got = radial_power_convolution(rho, d, -1.0);
            let mass = (std::f64::consts::PI / d).powf(1.5);
            let exact = if rho == 0.0 {
                2.0 * std::f64::consts::PI / d
            } else {
                mass * erf(d.sqrt() * rho) / rho
            };
            assert!((got - exact).abs() < 1e-10 * exact, "rho={rho}: {got} vs {exact}");
        }
    }

    #[test]
    fn radial_oracle_far_field() {
        let d = 0.5;
        let rho = 40.0;
        let got = radial_power_convolution(rho, d, -2.2);
        let lim = (std::f64::consts::PI / d).powf(1.5) * rho.powf(-2.2);
        assert!((got / lim - 1.0).abs() < 5e-3);
    }

    fn erf(x: f64) -> f64 {
        // midpoint sum of the defining integral, fine enough for the test
        let n = 200_000;
        let h = x / n as f64;
        let s: f64 = (0..n).map(|i| (-((i as f64 + 0.5) * h).powi(2)).exp()).sum();
        2.0 / std::f64::consts::PI.sqrt() * s * h
    }
}
