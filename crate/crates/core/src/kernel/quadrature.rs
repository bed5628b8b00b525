//! Singularity-centered spherical quadrature for `A(v) = (a * mu)(v)`.
//!
//! In a frame whose polar axis is `v / |v|`, write `u = r w` with polar
//! cosine `s = w . v / |v|`. Then
//!
//! ```text
//! mu(v - r w) = c_mu exp(-(r - |v|)^2 / 2) exp(-|v| r (1 - s))
//! ```
//!
//! and the azimuthal average of `I - w w^T` is `diag((1+s^2)/2, (1+s^2)/2, 1-s^2)`.
//! So `A(v) = l_par(|v|) P_v + l_perp(|v|) (I - P_v)` with
//!
//! ```text
//! l_par  = 2 pi c_mu int_0^rmax r^{gamma+4} e^{-(r-|v|)^2/2} int_{-1}^{1} (1 - s^2)   e^{-k(1-s)} ds dr
//! l_perp = 2 pi c_mu int_0^rmax r^{gamma+4} e^{-(r-|v|)^2/2} int_{-1}^{1} (1+s^2)/2 e^{-k(1-s)} ds dr
//! ```
//!
//! where `k = |v| r`. The radial integral uses composite Gauss-Legendre
//! panels (the first one with `r = r_1 x^2` to smooth the `r^{gamma+4}`
//! endpoint). The polar integral maps `t = 1 - s` through the exponential
//! weight so that Gauss-Legendre nodes follow the concentration at `s = 1`.

use serde::{Deserialize, Serialize};

use super::KernelParams;
use crate::error::{LandauError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Orders and tolerance of the `A` quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per radial panel.
    pub radial_order: usize,
    /// Polar nodes of the angular rule.
    pub angular_order: usize,
    /// Allowed relative change when both orders are doubled.
    pub rtol: f64,
}

impl QuadratureSpec {
    pub const MIN_RADIAL: usize = 32;
    pub const MIN_ANGULAR: usize = 26;

    pub fn validate(&self) -> Result<()> {
        if self.radial_order < Self::MIN_RADIAL {
            return Err(LandauError::QuadratureOrder(format!(
                "radial order {} < {}",
                self.radial_order,
                Self::MIN_RADIAL
            )));
        }
        if self.angular_order < Self::MIN_ANGULAR {
            return Err(LandauError::QuadratureOrder(format!(
                "angular order {} < {}",
                self.angular_order,
                Self::MIN_ANGULAR
            )));
        }
        if !(self.rtol > 0.0) {
            return Err(LandauError::QuadratureOrder("rtol must be positive".into()));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self {
            radial_order: 2 * self.radial_order,
            angular_order: 2 * self.angular_order,
            rtol: self.rtol,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_order: 32,
            angular_order: 26,
            rtol: 1e-8,
        }
    }
}

/// Gaussian tail cut: the radial integral stops at `|v| + 8`.
pub const RADIAL_TAIL: f64 = 8.0;
const PANEL_WIDTH: f64 = 1.0;
/// Below this `k = |v| r` the polar weight is smooth enough for plain GL.
const MAP_THRESHOLD: f64 = 0.5;

/// Precomputed rule for the eigenvalue profiles of `A`.
#[derive(Debug, Clone)]
pub struct AbarQuadrature {
    gamma: f64,
    prefactor: f64,
    radial: (Vec<f64>, Vec<f64>),
    polar: (Vec<f64>, Vec<f64>),
}

impl AbarQuadrature {
    pub fn new(params: &KernelParams, spec: &QuadratureSpec) -> Self {
        Self {
            gamma: params.gamma(),
            prefactor: params.mu_prefactor(),
            radial: gauss_legendre(spec.radial_order),
            polar: gauss_legendre(spec.angular_order),
        }
    }

    /// `(int (1-s^2) e^{-k(1-s)} ds, int (1+s^2)/2 e^{-k(1-s)} ds)` over `[-1, 1]`.
    fn polar_moments(&self, k: f64) -> (f64, f64) {
        let (xs, ws) = &self.polar;
        let mut par = 0.0;
        let mut perp = 0.0;
        if k < MAP_THRESHOLD {
            for (&x, &w) in xs.iter().zip(ws) {
                let e = w * (-k * (1.0 - x)).exp();
                par += e * (1.0 - x * x);
                perp += e * 0.5 * (1.0 + x * x);
            }
        } else {
            // closed form; the recursion loses at most a digit for k >= 1/2
            let c = -(-2.0 * k).exp_m1();
            let e = 1.0 - c;
            let m0 = c / k;
            let m1 = (1.0 + e) / k - m0 / k;
            let m2 = c / k - 2.0 * m1 / k;
            par = m0 - m2;
            perp = 0.5 * (m0 + m2);
        }
        (par, perp)
    }

    /// Eigenvalues `(l_par, l_perp)` of `A(v)` at `|v| = rho`.
    pub fn eigenvalues(&self, rho: f64) -> (f64, f64) {
        let r_max = rho + RADIAL_TAIL;
        let panels = (r_max / PANEL_WIDTH).ceil().max(1.0) as usize;
        let width = r_max / panels as f64;
        let (xs, ws) = &self.radial;
        let mut par = 0.0;
        let mut perp = 0.0;
        let mut integrand = |r: f64, w: f64| {
            if r <= 0.0 {
                return;
            }
            let radial = r.powf(self.gamma + 4.0) * (-0.5 * (r - rho) * (r - rho)).exp();
            let (mp, mt) = self.polar_moments(rho * r);
            par += w * radial * mp;
            perp += w * radial * mt;
        };
        // first panel: r = width * x^2
        for (&x, &w) in xs.iter().zip(ws) {
            let xi = 0.5 * (x + 1.0);
            let r = width * xi * xi;
            integrand(r, 0.5 * w * 2.0 * width * xi);
        }
        for p in 1..panels {
            let a = p as f64 * width;
            for (&x, &w) in xs.iter().zip(ws) {
                integrand(a + 0.5 * width * (x + 1.0), 0.5 * width * w);
            }
        }
        let c = 2.0 * std::f64::consts::PI * self.prefactor;
        (c * par, c * perp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1usize, 2, 5, 26, 32, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n).min(40) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn polar_moments_closed_form() {
        // int_{-1}^{1} e^{-k(1-s)} (1 - s^2) ds in closed form
        let params = KernelParams::new(-1.0, true).unwrap();
        let q = AbarQuadrature::new(&params, &QuadratureSpec::default());
        for &k in &[0.1f64, 0.49, 0.51, 3.0, 40.0, 300.0] {
            let e = (-2.0 * k).exp();
            let m0 = (1.0 - e) / k;
            // int s e^{-k(1-s)} ds and int s^2 e^{-k(1-s)} ds
            let m1 = (1.0 + e) / k - m0 / k;
            let m2 = (1.0 - e) / k - 2.0 * m1 / k;
            let (par, perp) = q.polar_moments(k);
            let epar = m0 - m2;
            let eperp = 0.5 * (m0 + m2);
            assert!((par - epar).abs() < 1e-10 * epar.abs().max(1e-3), "k={k}: {par} vs {epar}");
            assert!((perp - eperp).abs() < 1e-10 * eperp, "k={k}: {perp} vs {eperp}");
        }
    }

    #[test]
    fn origin_value_matches_radial_oracle() {
        // A(0) = (2/3) c_mu 4 pi int_0^inf r^{gamma+4} e^{-r^2/2} dr; for
        // gamma = -1 the radial integral is exactly 2.
        let params = KernelParams::new(-1.0, true).unwrap();
        let q = AbarQuadrature::new(&params, &QuadratureSpec::default());
        let (lp, lt) = q.eigenvalues(0.0);
        let expected = (2.0 / 3.0) * params.mu_prefactor() * 4.0 * std::f64::consts::PI * 2.0;
        assert!((lp - expected).abs() < 1e-10);
        assert!((lt - expected).abs() < 1e-10);
        assert!((expected - 1.0640).abs() < 1e-3);
    }
}
