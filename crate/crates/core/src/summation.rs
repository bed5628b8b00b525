//! Deterministic reductions.
//!
//! Every reduction in the crate goes through [`pairwise_sum`], whose
//! summation tree depends only on the input length. Results are therefore
//! bit-identical across runs and thread counts.

use rayon::prelude::*;

const LEAF: usize = 128;
const PAR_THRESHOLD: usize = 1 << 14;

/// Pairwise (cascade) sum with a fixed tree: split at `len / 2` until the
/// block fits in a leaf, then sum sequentially.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, &x| acc + x);
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    if values.len() >= PAR_THRESHOLD {
        let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
        a + b
    } else {
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Pairwise sum of `f(i)` for `i in 0..len`, same tree as [`pairwise_sum`].
pub fn pairwise_sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let terms: Vec<f64> = (0..len).into_par_iter().map(&f).collect();
    pairwise_sum(&terms)
}

/// Deterministic maximum (order-independent, NaN-propagating).
pub fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, |m, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_for_small_input() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 55.0);
    }

    #[test]
    fn more_accurate_than_naive_on_long_sums() {
        let n = 1_000_000;
        let v = vec![0.1; n];
        let exact = 0.1 * n as f64;
        let naive: f64 = v.iter().sum();
        let pw = pairwise_sum(&v);
        assert!((pw - exact).abs() <= (naive - exact).abs());
        assert!((pw - exact).abs() / exact < 1e-13);
    }

    #[test]
    fn repeated_calls_bit_identical() {
        let v: Vec<f64> = (0..100_000).map(|i| ((i as f64) * 0.37).sin()).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum(&v);
        assert_eq!(a.to_bits(), b.to_bits());
        let c = pairwise_sum_by(v.len(), |i| v[i]);
        assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn max_propagates_nan() {
        assert!(max_of([1.0, f64::NAN, 2.0]).is_nan());
        assert_eq!(max_of([1.0, 3.0, 2.0]), 3.0);
    }
}
