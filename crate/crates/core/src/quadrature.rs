//! Deterministic reductions.
//!
//! Every sum over grid nodes goes through [`pairwise_sum`], a fixed binary
//! tree over the input order. Results therefore do not depend on how many
//! threads produced the summands.

const LEAF: usize = 16;

/// Pairwise (tree) summation in input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i` in `0..len`.
pub fn pairwise_sum_by(len: usize, f: impl Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        if hi - lo <= LEAF {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, len, &f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_small_input() {
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 45.0);
    }

    #[test]
    fn by_index_agrees_with_slice_version() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum_by(v.len(), |i| v[i]));
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
