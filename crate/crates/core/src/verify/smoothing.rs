use serde::{Deserialize, Serialize};

use super::{relative_change, Check, ConstantEstimate, VerificationReport};
use crate::error::{LandauError, Result};
use crate::evolution::DerivativeLadder;
use crate::field::VelocityGrid;

pub const MIN_FIT_TIMES: usize = 3;
pub const MIN_FIT_DEPTH: usize = 6;
/// Largest allowed positive residual of the fit, in log units.
pub const RESIDUAL_TOL: f64 = 0.5;
/// Largest allowed relative change of `max_k a_k^{1/(k+1)}` as `t` doubles.
pub const ROOT_VARIATION_TOL: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingFit {
    /// `C` in `log a_k ~ (k + 1) log C`.
    pub c: f64,
    pub max_residual: f64,
    /// Smallest `B` with the sampled form of `(B^{k+1} k!)^2` bounds.
    pub b: f64,
    pub times: Vec<f64>,
    /// `max_k a_k^{1/(k+1)}` per ladder.
    pub max_roots: Vec<f64>,
    pub depth: usize,
}

impl SmoothingFit {
    pub fn constants(&self, grid: &VelocityGrid) -> Vec<ConstantEstimate> {
        let n = self.times.len();
        vec![
            ConstantEstimate::new("C", self.c, n, grid),
            ConstantEstimate::new("B", self.b, n, grid),
        ]
    }
}

/// Residual and root-variation checks of a fit. Root variation is compared
/// between every pair of fitted times with ratio exactly 2.
pub fn check_smoothing(fit: &SmoothingFit, grid: &VelocityGrid) -> VerificationReport {
    let mut report = VerificationReport::new("smoothing");
    report.push(Check::at_most("fit_max_residual", fit.max_residual, RESIDUAL_TOL));
    for (i, &ti) in fit.times.iter().enumerate() {
        for (j, &tj) in fit.times.iter().enumerate() {
            if (tj - 2.0 * ti).abs() <= 1e-12 * tj {
                let change = relative_change(fit.max_roots[j], fit.max_roots[i]);
                report.push(Check::at_most(format!("max_root_change[{ti}->{tj}]"), change, ROOT_VARIATION_TOL));
            }
        }
    }
    report.constants.extend(fit.constants(grid));
    report
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Least-squares fit through the origin of `log a_k` against `k + 1`,
/// pooled over the ladders and truncated at the shallowest depth.
pub fn smoothing_fit(ladders: &[DerivativeLadder]) -> Result<SmoothingFit> {
    let mut times: Vec<f64> = ladders.iter().map(|l| l.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.len() < MIN_FIT_TIMES {
        return Err(LandauError::InvalidArgument(format!(
            "smoothing fit needs ladders at {MIN_FIT_TIMES} distinct times, got {}",
            times.len()
        )));
    }
    let depth = ladders.iter().map(|l| l.depth()).min().unwrap_or(0);
    if depth < MIN_FIT_DEPTH {
        return Err(LandauError::InvalidArgument(format!(
            "smoothing fit needs depth {MIN_FIT_DEPTH}, got {depth}"
        )));
    }
    let mut order: Vec<&DerivativeLadder> = ladders.iter().collect();
    order.sort_by(|a, b| a.t.total_cmp(&b.t));
    let scaled: Vec<Vec<f64>> = order.iter().map(|l| l.scaled()[..=depth].to_vec()).collect();
    for a in &scaled {
        if let Some(k) = a.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(LandauError::FitDegenerate { k });
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for a in &scaled {
        for (k, x) in a.iter().enumerate() {
            let w = k as f64 + 1.0;
            num += w * x.ln();
            den += w * w;
        }
    }
    let log_c = num / den;
    let max_residual = scaled
        .iter()
        .flat_map(|a| a.iter().enumerate().map(|(k, x)| x.ln() - (k as f64 + 1.0) * log_c))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_roots = scaled
        .iter()
        .map(|a| {
            a.iter()
                .enumerate()
                .map(|(k, x)| x.powf(1.0 / (k as f64 + 1.0)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let mut b: f64 = 0.0;
    for k in 0..=depth {
        let sup = order
            .iter()
            .map(|l| (l.t.powi(k as i32) * l.norm_l2[k]).powi(2))
            .fold(0.0, f64::max);
        let mut pts: Vec<(f64, f64)> = order
            .iter()
            .map(|l| (l.t, (l.t.powi(k as i32) * l.norm_a[k]).powi(2)))
            .collect();
        if k >= 1 {
            pts.insert(0, (0.0, 0.0));
        }
        let integral: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[1].1 + w[0].1)).sum();
        let bk = ((sup + integral).sqrt() / factorial(k)).powf(1.0 / (k as f64 + 1.0));
        b = b.max(bk);
    }
    Ok(SmoothingFit {
        c: log_c.exp(),
        max_residual,
        b,
        times: order.iter().map(|l| l.t).collect(),
        max_roots,
        depth,
    })
}
