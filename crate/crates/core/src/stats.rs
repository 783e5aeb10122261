//! Small estimators shared by the simulators.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `count` successes out of `n`.
pub fn wilson(count: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Exact integer moments of a sample of step counts. Merging is
/// associative and commutative, so parallel reductions are deterministic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Moments {
    pub n: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl Moments {
    pub fn push(&mut self, x: u64) {
        self.n += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    pub fn merge(self, o: Self) -> Self {
        Self { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum as f64 / self.n as f64)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let n = self.n as f64;
        let mean = self.sum as f64 / n;
        Some(((self.sum_sq as f64 - n * mean * mean) / (n - 1.0)).max(0.0))
    }

    /// Normal-approximation 95% half-width of the mean.
    pub fn half_width(&self) -> f64 {
        match self.variance() {
            Some(v) => Z95 * (v / self.n as f64).sqrt(),
            None => f64::INFINITY,
        }
    }
}

/// An estimated probability with its Wilson interval and binomial standard
/// error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub count: u64,
    pub n: u64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    pub sigma: f64,
}

impl Proportion {
    pub fn new(count: u64, n: u64) -> Self {
        let p = if n == 0 { 0.0 } else { count as f64 / n as f64 };
        let (lo, hi) = wilson(count, n, Z95);
        let sigma = if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() };
        Self { count, n, p, lo, hi, sigma }
    }

    /// `|p̂ - p| ≤ k·σ`, with σ computed at the reference value `p`.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        let sigma = (p * (1.0 - p) / self.n as f64).sqrt();
        (self.p - p).abs() <= k * sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_value() {
        // 10 of 100 at z = 1.96: (0.0552, 0.1744)
        let (lo, hi) = wilson(10, 100, 1.96);
        assert!((lo - 0.0552).abs() < 1e-3 && (hi - 0.1744).abs() < 1e-3, "{lo} {hi}");
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
        let (lo, hi) = wilson(0, 50, Z95);
        assert!(lo < 1e-12);
        assert!(hi > 0.0);
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [2, 4, 4, 4, 5, 5, 7, 9] {
            m.push(x);
        }
        assert_eq!(m.mean(), Some(5.0));
        assert!((m.variance().unwrap() - 32.0 / 7.0).abs() < 1e-12);
        let (a, b) = (Moments { n: 1, sum: 3, sum_sq: 9 }, Moments { n: 2, sum: 5, sum_sq: 13 });
        assert_eq!(a.merge(b), b.merge(a));
    }
}
