//! Deterministic summation helpers.
//!
//! Parallel integration maps chunks in index order and reduces them with
//! pairwise summation, so results are identical run to run regardless of
//! thread scheduling.

use num_complex::Complex64;

/// Pairwise (cascade) summation; O(log n) error growth, order-deterministic.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n if n <= 32 => {
            let mut acc = KahanSum::new();
            for &x in xs {
                acc.add(x);
            }
            acc.value()
        }
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
        }
    }
}

/// Compensated (Kahan-Babuska) accumulator for long sequential sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_cancellation() {
        let mut acc = KahanSum::new();
        for _ in 0..10_000 {
            acc.add(0.1);
        }
        assert!((acc.value() - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_matches_exact() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let slow: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - slow).abs() < 1e-12);
    }
}
