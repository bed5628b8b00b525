use serde::{Deserialize, Serialize};

use super::SourceModel;
use crate::error::{LandauError, Result};
use crate::field::{a_norm, inner_product, ScalarField};
use crate::operator::LandauOperator;

pub const MAX_LADDER_DEPTH: usize = 10;

const OVERFLOW: f64 = 1e100;

/// `D^0 = f(t)`, `D^m = -L D^{m-1} + d_t^{m-1} g(t)`.
#[derive(Debug, Clone)]
pub struct DerivativeLadder {
    pub t: f64,
    pub entries: Vec<ScalarField>,
    pub norm_l2: Vec<f64>,
    pub norm_a: Vec<f64>,
}

/// One line of the ladder CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub k: usize,
    pub norm_l2: f64,
    pub norm_a: f64,
    pub a_k: f64,
    pub a_k_root: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl DerivativeLadder {
    pub fn depth(&self) -> usize {
        self.entries.len() - 1
    }

    /// `t^k ||D^k|| / k!`
    pub fn scaled(&self) -> Vec<f64> {
        self.norm_l2
            .iter()
            .enumerate()
            .map(|(k, n)| self.t.powi(k as i32) * n / factorial(k))
            .collect()
    }

    /// `t^k ||D^k||_A / k!`
    pub fn scaled_a(&self) -> Vec<f64> {
        self.norm_a
            .iter()
            .enumerate()
            .map(|(k, n)| self.t.powi(k as i32) * n / factorial(k))
            .collect()
    }

    pub fn rows(&self) -> Vec<LadderRow> {
        self.scaled()
            .into_iter()
            .enumerate()
            .map(|(k, a_k)| LadderRow {
                k,
                norm_l2: self.norm_l2[k],
                norm_a: self.norm_a[k],
                a_k,
                a_k_root: a_k.powf(1.0 / (k as f64 + 1.0)),
            })
            .collect()
    }

    pub fn max_root(&self) -> f64 {
        self.rows()
            .iter()
            .map(|r| r.a_k_root)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn derivative_ladder(
    f_t: &ScalarField,
    t: f64,
    kmax: usize,
    model: &SourceModel,
    op: &LandauOperator,
) -> Result<DerivativeLadder> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LandauError::InvalidArgument(format!(
            "ladder time must be positive, got {t}"
        )));
    }
    if kmax > MAX_LADDER_DEPTH {
        return Err(LandauError::UnsupportedOrder {
            order: kmax,
            max: MAX_LADDER_DEPTH,
        });
    }
    f_t.check_grid(op.coeffs().grid())?;
    let norms = |d: &ScalarField| -> Result<(f64, f64)> {
        Ok((inner_product(d, d)?.sqrt(), a_norm(d, op.coeffs())?))
    };
    let (n0, a0) = norms(f_t)?;
    let mut ladder = DerivativeLadder {
        t,
        entries: vec![f_t.clone()],
        norm_l2: vec![n0],
        norm_a: vec![a0],
    };
    for m in 1..=kmax {
        let prev = &ladder.entries[m - 1];
        let lf = op.l(prev)?;
        let g = model.source_eval(m - 1, t)?;
        let d = g.lin_comb(1.0, &lf, -1.0)?;
        let (nl, na) = norms(&d)?;
        if !(nl.is_finite() && na.is_finite()) || nl > OVERFLOW || na > OVERFLOW {
            return Err(LandauError::LadderOverflow {
                depth: m,
                norm: nl.max(na),
            });
        }
        ladder.entries.push(d);
        ladder.norm_l2.push(nl);
        ladder.norm_a.push(na);
    }
    Ok(ladder)
}
