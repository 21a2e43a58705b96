//! Native-token USD price as a geometric random walk.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

/// Per-block log-normal token price process:
///
/// ```text
/// price[k+1] = price[k] * exp(drift + log_vol * z[k]),  z[k] ~ N(0,1)
/// ```
///
/// The sampled path is strictly positive everywhere; with zero drift and
/// volatility it is constant at `initial_usd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenPriceModel {
    initial_usd: f64,
    log_vol: f64,
    drift: f64,
}

impl TokenPriceModel {
    pub fn new(initial_usd: f64, log_vol: f64, drift: f64) -> Result<Self> {
        if !(initial_usd > 0.0) || !initial_usd.is_finite() {
            return Err(Error::Construction(format!(
                "initial_usd must be positive and finite, got {initial_usd}"
            )));
        }
        if !(log_vol >= 0.0) || !log_vol.is_finite() {
            return Err(Error::Construction(format!(
                "log_vol must be nonnegative and finite, got {log_vol}"
            )));
        }
        if !drift.is_finite() {
            return Err(Error::Construction(format!("drift must be finite, got {drift}")));
        }
        Ok(Self {
            initial_usd,
            log_vol,
            drift,
        })
    }

    /// Constant price model.
    pub fn constant(initial_usd: f64) -> Result<Self> {
        Self::new(initial_usd, 0.0, 0.0)
    }

    pub fn initial_usd(&self) -> f64 {
        self.initial_usd
    }

    pub fn log_vol(&self) -> f64 {
        self.log_vol
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Sample a price path of length `t` (the initial price is element 0,
    /// followed by `t - 1` updates). Deterministic per seed.
    pub fn sample_path(&self, seed: u64, t: usize) -> Result<Vec<f64>> {
        if t < 1 {
            return Err(Error::Domain("path length must be at least 1".into()));
        }
        let mut rng = substream(seed, Purpose::TokenPath, 0);
        let mut path = Vec::with_capacity(t);
        let mut price = self.initial_usd;
        path.push(price);
        for _ in 1..t {
            let z: f64 = StandardNormal.sample(&mut rng);
            price *= (self.drift + self.log_vol * z).exp();
            path.push(price);
        }
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vol_zero_drift_is_constant() {
        let m = TokenPriceModel::new(2000.0, 0.0, 0.0).unwrap();
        let path = m.sample_path(3, 100).unwrap();
        assert_eq!(path.len(), 100);
        assert!(path.iter().all(|&p| p == 2000.0));
    }

    #[test]
    fn deterministic_drift_doubles_per_block() {
        let m = TokenPriceModel::new(1.0, 0.0, std::f64::consts::LN_2).unwrap();
        let path = m.sample_path(0, 3).unwrap();
        assert_eq!(path.len(), 3);
        assert!((path[0] - 1.0).abs() < 1e-15);
        assert!((path[1] - 2.0).abs() < 1e-12);
        assert!((path[2] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn path_is_strictly_positive() {
        let m = TokenPriceModel::new(0.001, 0.3, -0.01).unwrap();
        let path = m.sample_path(11, 2000).unwrap();
        assert!(path.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn log_return_sample_variance_within_four_sigma() {
        // chi-square bound: 4 * sqrt(2 sigma^4 / (n-1)) = 1.4144e-4 for
        // sigma^2 = 0.0025 and n = 9999 returns.
        let m = TokenPriceModel::new(2000.0, 0.05, 0.0).unwrap();
        let t = 10_000;
        let path = m.sample_path(4242, t).unwrap();
        let returns: Vec<f64> = path.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let target = 0.05f64 * 0.05;
        let band = 4.0 * (2.0 * target * target / (n - 1.0)).sqrt();
        assert!((var - target).abs() <= band, "var {var}, band {band}");
    }

    #[test]
    fn zero_length_path_is_domain_error() {
        let m = TokenPriceModel::constant(1.0).unwrap();
        assert!(matches!(m.sample_path(0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(TokenPriceModel::new(0.0, 0.0, 0.0).is_err());
        assert!(TokenPriceModel::new(1.0, -0.1, 0.0).is_err());
        assert!(TokenPriceModel::new(1.0, 0.1, f64::NAN).is_err());
    }
}
