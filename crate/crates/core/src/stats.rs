//! Point estimates with confidence intervals and seed provenance.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub replicates: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    pub config_digest: String,
}

impl Estimate {
    /// Proportion `successes / replicates` with a 95% Wilson interval.
    pub fn proportion(successes: u64, replicates: u64, master_seed: u64, config_digest: &str) -> Self {
        let value = successes as f64 / replicates as f64;
        let (ci_low, ci_high) = wilson(successes, replicates);
        Estimate { value, replicates, ci_low, ci_high, master_seed, config_digest: config_digest.into() }
    }

    /// `a - b` for two independent proportions with a normal interval.
    pub fn difference(a: &Estimate, b: &Estimate, master_seed: u64, config_digest: &str) -> Self {
        let value = a.value - b.value;
        let var = bernoulli_var(a.value, a.replicates) + bernoulli_var(b.value, b.replicates);
        let half = Z95 * var.sqrt();
        Estimate {
            value,
            replicates: a.replicates,
            ci_low: value - half,
            ci_high: value + half,
            master_seed,
            config_digest: config_digest.into(),
        }
    }

    /// An exact value with a degenerate interval.
    pub fn exact(value: f64, replicates: u64, master_seed: u64, config_digest: &str) -> Self {
        Estimate { value, replicates, ci_low: value, ci_high: value, master_seed, config_digest: config_digest.into() }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    /// Normal-approximation standard error `sqrt(v (1 - v) / n)`.
    pub fn std_error(&self) -> f64 {
        bernoulli_var(self.value, self.replicates).sqrt()
    }

    /// Whether `target` lies within `k` half-widths of the value.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.half_width()
    }
}

fn bernoulli_var(v: f64, n: u64) -> f64 {
    (v * (1.0 - v) / n as f64).max(0.0)
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(phat), (center + half).min(1.0).max(phat))
}

/// Stable short digest of a serializable description of the inputs.
pub fn config_digest<T: Serialize>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize");
    let hash = Sha256::digest(&bytes);
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0, 10), (10, 10), (3, 10), (500, 1000), (1, 100_000)] {
            let (lo, hi) = wilson(k, n);
            let v = k as f64 / n as f64;
            assert!(lo <= v && v <= hi && lo >= 0.0 && hi <= 1.0, "{k}/{n}: [{lo}, {hi}]");
        }
        let (lo, hi) = wilson(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }

    #[test]
    fn wilson_known_value() {
        // 50/100: center 0.5, half-width z sqrt(0.25/100 + z^2/40000) / (1 + z^2/100).
        let (lo, hi) = wilson(50, 100);
        assert!((lo - 0.403_831_7).abs() < 1e-6);
        assert!((hi - 0.596_168_3).abs() < 1e-6);
    }

    #[test]
    fn difference_of_equal_estimates() {
        let a = Estimate::proportion(40, 100, 1, "x");
        let d = Estimate::difference(&a, &a, 1, "x");
        assert_eq!(d.value, 0.0);
        assert!(d.ci_low < 0.0 && d.ci_high > 0.0);
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = config_digest(&serde_json::json!({"p": 0.5, "n": 3}));
        assert_eq!(a, config_digest(&serde_json::json!({"p": 0.5, "n": 3})));
        assert_ne!(a, config_digest(&serde_json::json!({"p": 0.5, "n": 4})));
        assert_eq!(a.len(), 16);
    }
}
