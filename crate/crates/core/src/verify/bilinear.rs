use rayon::prelude::*;

use super::{Check, ConstantEstimate, Ensemble};
use crate::error::{LandauError, Result};
use crate::field::{
    a_norm_sq, bracket, centered_diff, energy_bilinear, gradient, inner_product, project_parallel, weighted_norm,
    weighted_norm_vec, ScalarField, WeightedNormSpec,
};
use crate::kernel::LandauCoefficients;
use crate::operator::{apply_diffusion, LandauOperator};

pub const EPSILON_1: f64 = 0.25;
pub const EPSILON_2: f64 = 0.25;
pub const DENOMINATOR_FLOOR: f64 = 1e-14;
pub const DESCENT_STEPS: usize = 50;

fn require(value: f64, context: &str) -> Result<f64> {
    if !(value >= DENOMINATOR_FLOOR) {
        return Err(LandauError::Degenerate {
            context: context.to_string(),
            value,
        });
    }
    Ok(value)
}

/// Squared terms `(||P grad f||^2_{2,g/2}, ||(I-P) grad f||^2_{2,1+g/2},
/// ||f||^2_{2,1+g/2})` of the coercivity lower bound.
pub fn coercivity_denominator(f: &ScalarField, gamma: f64) -> [f64; 3] {
    let (par, perp) = project_parallel(&gradient(f));
    [
        weighted_norm_vec(&par, 0.5 * gamma).powi(2),
        weighted_norm_vec(&perp, 1.0 + 0.5 * gamma).powi(2),
        weighted_norm(f, WeightedNormSpec::l2(1.0 + 0.5 * gamma)).powi(2),
    ]
}

/// `M f` with `(M f, f) = ||f||_A^2`.
fn a_form(f: &ScalarField, coeffs: &LandauCoefficients) -> Result<ScalarField> {
    let mut out = apply_diffusion(f, coeffs)?;
    for ((o, x), c) in out.values_mut().iter_mut().zip(f.values()).zip(coeffs.c1()) {
        *o += c * x;
    }
    Ok(out)
}

/// `W f` with `(W f, f)` equal to the sum of the coercivity denominator.
fn denominator_form(f: &ScalarField, gamma: f64) -> Result<ScalarField> {
    let grid = *f.grid();
    let g = gradient(f);
    let n = grid.len();
    let mut flux: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    let mut zeroth = vec![0.0; n];
    for i in 0..n {
        let v = grid.coords(i);
        let b = bracket(v);
        let w1 = b.powf(gamma);
        let w2 = b.powf(gamma + 2.0);
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let gi = g.at(i);
        let vg = (v[0] * gi[0] + v[1] * gi[1] + v[2] * gi[2]) / r2;
        for d in 0..3 {
            let par = vg * v[d];
            flux[d][i] = w1 * par + w2 * (gi[d] - par);
        }
        zeroth[i] = w2 * f.values()[i];
    }
    for (d, fl) in flux.iter().enumerate() {
        // centered difference is antisymmetric
        for (z, x) in zeroth.iter_mut().zip(centered_diff(&grid, fl, d)) {
            *z -= x;
        }
    }
    ScalarField::from_values(grid, zeroth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityEstimate {
    pub quotients: Vec<f64>,
    pub sample_min: f64,
    pub argmin: String,
    pub descent_min: f64,
    pub ensemble_size: usize,
}

impl CoercivityEstimate {
    pub fn constants(&self, grid: &crate::field::VelocityGrid) -> Vec<ConstantEstimate> {
        vec![
            ConstantEstimate::new("C1", self.sample_min, self.ensemble_size, grid),
            ConstantEstimate::new("C1_descent", self.descent_min, self.ensemble_size, grid),
        ]
    }
}

/// Smallest eigenpair of the 2x2 pencil `(n, d)`.
fn pencil_min(n: [[f64; 2]; 2], d: [[f64; 2]; 2]) -> (f64, [f64; 2]) {
    let a = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    let b = -(n[0][0] * d[1][1] + n[1][1] * d[0][0] - n[0][1] * d[1][0] - n[1][0] * d[0][1]);
    let c = n[0][0] * n[1][1] - n[0][1] * n[1][0];
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // numerically stable smaller root
    let q = -0.5 * (b + b.signum() * disc);
    let lam = if q != 0.0 { (c / q).min(q / a) } else { 0.0 };
    let m00 = n[0][0] - lam * d[0][0];
    let m01 = n[0][1] - lam * d[0][1];
    let m11 = n[1][1] - lam * d[1][1];
    let x = if m00.abs() >= m11.abs() { [-m01, m00] } else { [m11, -m01] };
    (lam, x)
}

/// Rayleigh quotient of `||f||_A^2` against the coercivity denominator:
/// ensemble minimum, then Rayleigh-Ritz steepest descent from the worst
/// member.
pub fn estimate_coercivity(coeffs: &LandauCoefficients, ensemble: &Ensemble) -> Result<CoercivityEstimate> {
    let gamma = coeffs.params().gamma();
    let quotients = ensemble
        .members
        .par_iter()
        .map(|m| {
            let num = a_norm_sq(&m.field, coeffs)?;
            let den: f64 = coercivity_denominator(&m.field, gamma).iter().sum();
            Ok(num / require(den, &format!("coercivity denominator of {}", m.label))?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (imin, &sample_min) = quotients
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| LandauError::InvalidArgument("empty ensemble".into()))?;

    let mut f = ensemble.members[imin].field.clone();
    let mut best = sample_min;
    for _ in 0..DESCENT_STEPS {
        let mf = a_form(&f, coeffs)?;
        let wf = denominator_form(&f, gamma)?;
        let nff = inner_product(&mf, &f)?;
        let dff = inner_product(&wf, &f)?;
        let rq = nff / dff;
        let r = mf.lin_comb(1.0, &wf, -rq)?;
        let rn = inner_product(&r, &r)?.sqrt();
        if !(rn > 0.0) {
            break;
        }
        let r = r.scaled(1.0 / rn);
        let mr = a_form(&r, coeffs)?;
        let wr = denominator_form(&r, gamma)?;
        let nfr = inner_product(&mf, &r)?;
        let dfr = inner_product(&wf, &r)?;
        let n2 = [[nff, nfr], [nfr, inner_product(&mr, &r)?]];
        let d2 = [[dff, dfr], [dfr, inner_product(&wr, &r)?]];
        let (lam, x) = pencil_min(n2, d2);
        if !(lam < best) {
            break;
        }
        let g = f.lin_comb(x[0], &r, x[1])?;
        let norm = inner_product(&g, &g)?.sqrt();
        f = g.scaled(1.0 / norm);
        let num = a_norm_sq(&f, coeffs)?;
        let den: f64 = coercivity_denominator(&f, gamma).iter().sum();
        best = best.min(num / require(den, "coercivity descent")?);
    }
    Ok(CoercivityEstimate {
        argmin: ensemble.members[imin].label.clone(),
        quotients,
        sample_min,
        descent_min: best,
        ensemble_size: ensemble.len(),
    })
}

/// Per-member data reused by every pair.
struct MemberData {
    f: ScalarField,
    l1f: ScalarField,
    l2f: ScalarField,
    a: f64,
    w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearConstants {
    /// `|(L1 f1, f2)| / (||f1||_A ||f2||_A)`
    pub c2: f64,
    /// `|(L2 f1, f2)| / (||f1||_{2,g/2} ||f2||_A + ||f1||_A ||f2||_{2,g/2})`
    pub c3: f64,
    /// `|(L2 f1, f2)| / (||f1||_A ||f2||_A)`
    pub c4: f64,
    /// gradient part of the energy form against `||f1||_A ||f2||_A`
    pub k_grad: f64,
    /// `((1 - eps1) ||f||_A^2 - (L1 f, f)) / ||f||^2_{2,g/2}`, clipped at 0
    pub c_eps1: f64,
    /// `(|(L2 f, f)| - eps2 ||f||_A^2) / ||f||^2_{2,g/2}`, clipped at 0
    pub c_eps2: f64,
    /// `-(L f, f) / ||f||^2_{2,g/2}`, clipped at 0
    pub c_l: f64,
    pub ensemble_size: usize,
}

impl BilinearConstants {
    pub fn constants(&self, grid: &crate::field::VelocityGrid) -> Vec<ConstantEstimate> {
        let n = self.ensemble_size;
        vec![
            ConstantEstimate::new("C2", self.c2, n, grid),
            ConstantEstimate::new("C3", self.c3, n, grid),
            ConstantEstimate::new("C4", self.c4, n, grid),
            ConstantEstimate::new("K_grad", self.k_grad, n, grid),
            ConstantEstimate::new("C_eps1", self.c_eps1, n, grid),
            ConstantEstimate::new("C_eps2", self.c_eps2, n, grid),
            ConstantEstimate::new("c_L", self.c_l, n, grid),
        ]
    }
}

pub fn estimate_bilinear_constants(op: &LandauOperator, ensemble: &Ensemble) -> Result<BilinearConstants> {
    let coeffs = op.coeffs();
    let gamma = coeffs.params().gamma();
    let data = ensemble
        .members
        .iter()
        .map(|m| {
            let f = m.field.clone();
            let a = require(a_norm_sq(&f, coeffs)?.sqrt(), &format!("A-norm of {}", m.label))?;
            let w = require(
                weighted_norm(&f, WeightedNormSpec::l2(0.5 * gamma)),
                &format!("weighted norm of {}", m.label),
            )?;
            Ok(MemberData {
                l1f: op.l1(&f)?,
                l2f: op.l2(&f)?,
                f,
                a,
                w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = ensemble.pairs();
    let ratios = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (p, q) = (&data[i], &data[j]);
            let l1 = inner_product(&p.l1f, &q.f)?;
            let l2 = inner_product(&p.l2f, &q.f)?;
            let e = energy_bilinear(&p.f, &q.f, coeffs.faces())?;
            let aa = p.a * q.a;
            Ok([l1.abs() / aa, l2.abs() / (p.w * q.a + p.a * q.w), l2.abs() / aa, e.abs() / aa])
        })
        .collect::<Result<Vec<[f64; 4]>>>()?;
    let mut out = [0.0f64; 4];
    for r in &ratios {
        for (o, x) in out.iter_mut().zip(r) {
            if !x.is_finite() {
                return Err(LandauError::NonFinite("bilinear ratio"));
            }
            *o = o.max(*x);
        }
    }
    let mut c_eps1: f64 = 0.0;
    let mut c_eps2: f64 = 0.0;
    let mut c_l: f64 = 0.0;
    for d in &data {
        let l1 = inner_product(&d.l1f, &d.f)?;
        let l2 = inner_product(&d.l2f, &d.f)?;
        let w2 = d.w * d.w;
        let a2 = d.a * d.a;
        c_eps1 = c_eps1.max(((1.0 - EPSILON_1) * a2 - l1) / w2);
        c_eps2 = c_eps2.max((l2.abs() - EPSILON_2 * a2) / w2);
        c_l = c_l.max(-(l1 + l2) / w2);
    }
    Ok(BilinearConstants {
        c2: out[0],
        c3: out[1],
        c4: out[2],
        k_grad: out[3],
        c_eps1,
        c_eps2,
        c_l,
        ensemble_size: ensemble.len(),
    })
}

/// `K_L3 = max ||f||_{3,g/2} / ||f||_A`, plus the ratio of each member.
pub fn check_l3_embedding(coeffs: &LandauCoefficients, ensemble: &Ensemble) -> Result<(ConstantEstimate, Vec<f64>)> {
    let gamma = coeffs.params().gamma();
    let ratios = ensemble
        .members
        .par_iter()
        .map(|m| {
            let a = require(a_norm_sq(&m.field, coeffs)?.sqrt(), &format!("A-norm of {}", m.label))?;
            Ok(weighted_norm(&m.field, WeightedNormSpec::l3(0.5 * gamma)) / a)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = ratios.iter().cloned().fold(0.0, f64::max);
    Ok((
        ConstantEstimate::new("K_L3", k, ensemble.len(), coeffs.grid()),
        ratios,
    ))
}

/// Fresh-ensemble maxima against the measured constants with relative
/// `slack`; constants missing from `fresh` are skipped.
pub fn recheck_bilinear(measured: &[ConstantEstimate], fresh: &[ConstantEstimate], slack: f64) -> Vec<Check> {
    measured
        .iter()
        .filter_map(|m| {
            let f = fresh.iter().find(|f| f.name == m.name)?;
            Some(Check::at_most(format!("recheck_{}", m.name), f.value, (1.0 + slack) * m.value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pencil_of_diagonal_pair() {
        let (l, x) = pencil_min([[3.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 2.0]]);
        assert!((l - 0.5).abs() < 1e-14);
        assert!(x[0].abs() < 1e-14 && x[1].abs() > 0.0);
    }

    #[test]
    fn pencil_general() {
        let n = [[2.0, 0.5], [0.5, 1.0]];
        let d = [[1.0, 0.2], [0.2, 1.5]];
        let (l, x) = pencil_min(n, d);
        // residual of the generalized problem
        for r in 0..2 {
            let res = (n[r][0] - l * d[r][0]) * x[0] + (n[r][1] - l * d[r][1]) * x[1];
            assert!(res.abs() < 1e-12);
        }
        // it is the smaller root: the quotient of any vector is larger
        for t in 0..50 {
            let a = (t as f64 * 0.3).cos();
            let b = (t as f64 * 0.3).sin();
            let q = (n[0][0] * a * a + 2.0 * n[0][1] * a * b + n[1][1] * b * b)
                / (d[0][0] * a * a + 2.0 * d[0][1] * a * b + d[1][1] * b * b);
            assert!(q >= l - 1e-12);
        }
    }
}
