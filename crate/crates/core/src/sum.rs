//! Pairwise (tree) summation.
//!
//! Rounding error grows as O(log n) instead of O(n), which matters for the
//! million-term amplitude sums in the exact pseudo-1D solution.

use num_complex::Complex64;

const LEAF: usize = 64;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_for_short_input() {
        let v = [1.0, 2.0, 3.5];
        assert_eq!(pairwise_sum(&v), 6.5);
    }

    #[test]
    fn beats_naive_accumulation() {
        let v = vec![0.1_f64; 1_000_000];
        let naive: f64 = v.iter().sum();
        let tree = pairwise_sum(&v);
        assert!((tree - 100_000.0).abs() < (naive - 100_000.0).abs());
        assert!((tree - 100_000.0).abs() < 1e-8);
    }

    #[test]
    fn complex_sum() {
        let v = vec![Complex64::new(1.0, -1.0); 1000];
        let s = pairwise_sum_complex(&v);
        assert_eq!(s, Complex64::new(1000.0, -1000.0));
    }
}
