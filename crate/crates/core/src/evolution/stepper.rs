use serde::{Deserialize, Serialize};

use super::SourceModel;
use crate::error::{LandauError, Result};
use crate::field::{a_norm_sq, inner_product, ScalarField};
use crate::kernel::LandauCoefficients;
use crate::operator::LandauOperator;

/// One row of the energy log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    /// `||f||^2`
    pub l2sq: f64,
    /// `||f||_A^2`
    pub asq: f64,
    /// `(g, f)`
    pub gf: f64,
    /// `(L f, f)`
    pub lff: f64,
}

/// Norms of the time derivative `d_t f = g - L f` at a logged time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub t: f64,
    pub l2sq: f64,
    pub asq: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub f: ScalarField,
    pub t: f64,
    pub step_index: u64,
    pub energy_log: Vec<EnergyRow>,
    pub rate_log: Vec<RateRow>,
}

impl EvolutionState {
    pub fn new(f0: ScalarField) -> Self {
        Self {
            f: f0,
            t: 0.0,
            step_index: 0,
            energy_log: Vec::new(),
            rate_log: Vec::new(),
        }
    }

    /// Logs the current time unless it is already the last row.
    pub fn record(&mut self, op: &LandauOperator, model: &SourceModel) -> Result<()> {
        if self.energy_log.last().is_some_and(|r| r.t >= self.t) {
            return Ok(());
        }
        let g = model.source_eval(0, self.t)?;
        let lf = op.l(&self.f)?;
        let rate = g.lin_comb(1.0, &lf, -1.0)?;
        self.push_rows(op.coeffs(), &g, &lf, &rate)
    }

    fn push_rows(&mut self, coeffs: &LandauCoefficients, g: &ScalarField, lf: &ScalarField, rate: &ScalarField) -> Result<()> {
        let row = EnergyRow {
            t: self.t,
            l2sq: inner_product(&self.f, &self.f)?,
            asq: a_norm_sq(&self.f, coeffs)?,
            gf: inner_product(g, &self.f)?,
            lff: inner_product(lf, &self.f)?,
        };
        let rrow = RateRow {
            t: self.t,
            l2sq: inner_product(rate, rate)?,
            asq: a_norm_sq(rate, coeffs)?,
        };
        if [row.l2sq, row.asq, row.gf, row.lff, rrow.l2sq, rrow.asq]
            .iter()
            .any(|x| !x.is_finite())
        {
            return Err(LandauError::NonFinite("energy log"));
        }
        self.energy_log.push(row);
        self.rate_log.push(rrow);
        Ok(())
    }
}

/// Explicit step size rule `dt = safety h^2 / (6 max lambda(A))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePolicy {
    pub safety: f64,
    /// Further divides the stable step (for step-halving studies).
    pub refine: u32,
}

impl Default for TimePolicy {
    fn default() -> Self {
        Self {
            safety: 0.4,
            refine: 1,
        }
    }
}

pub fn stable_dt(coeffs: &LandauCoefficients, safety: f64) -> f64 {
    let h = coeffs.grid().h();
    safety * h * h / (6.0 * coeffs.max_abar_eigenvalue())
}

/// One classical RK4 step of `f' = g(t) - L f`, logging the pre-step state.
pub fn step(state: &mut EvolutionState, dt: f64, op: &LandauOperator, model: &SourceModel) -> Result<()> {
    let t = state.t;
    let rhs = |f: &ScalarField, t: f64| -> Result<(ScalarField, ScalarField, ScalarField)> {
        let g = model.source_eval(0, t)?;
        let lf = op.l(f)?;
        let r = g.lin_comb(1.0, &lf, -1.0)?;
        Ok((r, g, lf))
    };
    let (k1, g0, lf0) = rhs(&state.f, t)?;
    if state.energy_log.last().is_none_or(|r| r.t < t) {
        state.push_rows(op.coeffs(), &g0, &lf0, &k1)?;
    }
    let f = &state.f;
    let (k2, _, _) = rhs(&f.lin_comb(1.0, &k1, 0.5 * dt)?, t + 0.5 * dt)?;
    let (k3, _, _) = rhs(&f.lin_comb(1.0, &k2, 0.5 * dt)?, t + 0.5 * dt)?;
    let (k4, _, _) = rhs(&f.lin_comb(1.0, &k3, dt)?, t + dt)?;
    let before = f.max_abs();
    let mut next = f.clone();
    let w = dt / 6.0;
    {
        let out = next.values_mut();
        let (a, b, c, d) = (k1.values(), k2.values(), k3.values(), k4.values());
        for i in 0..out.len() {
            out[i] += w * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
        }
    }
    let n_before = inner_product(f, f)?.sqrt();
    let n_after = inner_product(&next, &next)?.sqrt();
    if !next.is_finite() || (n_before > 0.0 && n_after > 10.0 * n_before) || (before == 0.0 && !n_after.is_finite()) {
        return Err(LandauError::Instability {
            before: n_before,
            after: n_after,
            t,
        });
    }
    state.f = next;
    state.t = t + dt;
    state.step_index += 1;
    Ok(())
}

/// A completed run: final state (with the full logs) and snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub state: EvolutionState,
    pub dt: f64,
    pub snapshots: Vec<(u64, f64, ScalarField)>,
}

impl Trajectory {
    pub fn snapshot_at(&self, t: f64) -> Option<&ScalarField> {
        self.snapshots
            .iter()
            .find(|(_, ts, _)| (ts - t).abs() <= 1e-9 * t.abs().max(1.0))
            .map(|(_, _, f)| f)
    }
}

/// Smallest `q` with `x q` integral (up to rounding).
fn denominator(x: f64) -> Option<u64> {
    (1..=100_000u64).find(|&q| {
        let y = x * q as f64;
        (y - y.round()).abs() < 1e-9 * q as f64
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integrates to `horizon` with a uniform step no larger than the stable
/// one, chosen so that every snapshot time (and the horizon) is hit
/// exactly and the step count is even.
pub fn evolve(
    f0: ScalarField,
    model: &SourceModel,
    horizon: f64,
    policy: &TimePolicy,
    snapshot_times: &[f64],
    op: &LandauOperator,
) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(LandauError::InvalidArgument("horizon must be positive".into()));
    }
    f0.check_grid(op.coeffs().grid())?;
    let dt_max = stable_dt(op.coeffs(), policy.safety);
    let mut lcm: u64 = 2;
    for &ts in snapshot_times {
        if !(ts > 0.0 && ts <= horizon) {
            return Err(LandauError::InvalidArgument(format!(
                "snapshot time {ts} outside ]0, {horizon}]"
            )));
        }
        let q = denominator(ts / horizon).ok_or_else(|| {
            LandauError::InvalidArgument(format!("snapshot time {ts} not commensurate with {horizon}"))
        })?;
        lcm = lcm / gcd(lcm, q) * q;
    }
    let mut steps = (horizon / dt_max).ceil() as u64;
    steps = steps.div_ceil(lcm) * lcm * policy.refine.max(1) as u64;
    let dt = horizon / steps as f64;
    let mut state = EvolutionState::new(f0);
    let mut snapshots = Vec::new();
    let marks: Vec<(u64, f64)> = snapshot_times
        .iter()
        .map(|&ts| (((ts / horizon) * steps as f64).round() as u64, ts))
        .collect();
    for n in 0..steps {
        step(&mut state, dt, op, model)?;
        // land exactly on the grid of times
        state.t = (n + 1) as f64 * dt;
        for &(m, ts) in &marks {
            if m == n + 1 {
                snapshots.push((m, ts, state.f.clone()));
            }
        }
    }
    state.t = horizon;
    state.record(op, model)?;
    Ok(Trajectory {
        state,
        dt,
        snapshots,
    })
}
