use super::{Check, ConstantEstimate, VerificationReport};
use crate::error::{LandauError, Result};
use crate::evolution::Trajectory;

pub const SLOPE_TARGET: f64 = 4.0;
pub const SLOPE_TOL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConstants {
    /// `sup_t (||f(t)||^2 + int_0^t ||f||_A^2)^{1/2}`
    pub c5: f64,
    /// `(sup_t ||t d_t f||^2 + int_0^T ||t d_t f||_A^2)^{1/2}`
    pub c6: f64,
}

fn trapezoid_cumulative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..t.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Time integrals by the trapezoid rule over the logged rows.
pub fn energy_constants(traj: &Trajectory) -> Result<EnergyConstants> {
    let log = &traj.state.energy_log;
    let rates = &traj.state.rate_log;
    if log.is_empty() || rates.len() != log.len() {
        return Err(LandauError::InvalidArgument("trajectory has no energy log".into()));
    }
    let t: Vec<f64> = log.iter().map(|r| r.t).collect();
    let asq: Vec<f64> = log.iter().map(|r| r.asq).collect();
    let int_a = trapezoid_cumulative(&t, &asq);
    let c5sq = log
        .iter()
        .zip(&int_a)
        .map(|(r, i)| r.l2sq + i)
        .fold(0.0, f64::max);
    let scaled_a: Vec<f64> = rates.iter().map(|r| r.t * r.t * r.asq).collect();
    let int_rate = trapezoid_cumulative(&t, &scaled_a).last().copied().unwrap_or(0.0);
    let sup_rate = rates.iter().map(|r| r.t * r.t * r.l2sq).fold(0.0, f64::max);
    Ok(EnergyConstants {
        c5: c5sq.sqrt(),
        c6: (sup_rate + int_rate).sqrt(),
    })
}

/// `| ||f(T)||^2 - ||f(0)||^2 - int_0^T 2 ((g, f) - (L f, f)) dt |`, the
/// integral by composite Simpson over the uniform log.
pub fn energy_residual(traj: &Trajectory) -> Result<f64> {
    let log = &traj.state.energy_log;
    let n = log.len().saturating_sub(1);
    if n < 2 || n % 2 != 0 {
        return Err(LandauError::InvalidArgument(format!(
            "Simpson rule needs an even number of intervals, got {n}"
        )));
    }
    let dt = traj.dt;
    for (i, r) in log.iter().enumerate() {
        if (r.t - i as f64 * dt).abs() > 1e-9 * dt.max(r.t) {
            return Err(LandauError::InvalidArgument("energy log is not uniform".into()));
        }
    }
    let rate: Vec<f64> = log.iter().map(|r| 2.0 * (r.gf - r.lff)).collect();
    let mut s = rate[0] + rate[n];
    for (i, x) in rate.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    let integral = s * dt / 3.0;
    Ok((log[n].l2sq - log[0].l2sq - integral).abs())
}

/// Energy constants of `reference`, and the convergence slope of the
/// energy-identity residual over `halving` (successively halved steps).
pub fn check_energy(reference: &Trajectory, halving: &[Trajectory]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("energy");
    let consts = energy_constants(reference)?;
    let grid = *reference.state.f.grid();
    report.push(Check::finite("C5", consts.c5));
    report.push(Check::finite("C6", consts.c6));
    report.constants.push(ConstantEstimate::new("C5", consts.c5, 1, &grid));
    report.constants.push(ConstantEstimate::new("C6", consts.c6, 1, &grid));
    if halving.len() >= 2 {
        let res = halving.iter().map(energy_residual).collect::<Result<Vec<f64>>>()?;
        for (i, r) in res.iter().enumerate() {
            report.push(Check::finite(format!("energy_residual[dt={:e}]", halving[i].dt), *r));
        }
        let last = res.len() - 1;
        let slope = (res[last - 1] / res[last]).ln() / (halving[last - 1].dt / halving[last].dt).ln();
        report.push(Check::at_most(
            "energy_residual_slope_error",
            (slope - SLOPE_TARGET).abs(),
            SLOPE_TOL,
        ));
    }
    Ok(report)
}
