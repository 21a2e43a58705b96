//! Joint demand/cost shock distributions.
//!
//! Two families cover the analysis: a mean-zero bivariate Gaussian and a
//! symmetric two-point distribution (the 50/50 high/low-demand example).
//! Both are parameterized by (Var[demand], Var[cost], Cov) and gated on
//! positive semidefiniteness of that covariance matrix.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockKind {
    Gaussian,
    TwoPoint,
}

/// Joint distribution of the demand shock and the cost shock.
///
/// Every sampled pair is mean zero with the configured second moments.
/// Sampling always consumes exactly two primitive draws per pair, so
/// stream positions line up across configurations sharing a substream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockModel {
    kind: ShockKind,
    var_demand: f64,
    var_cost: f64,
    cov: f64,
    two_point_prob: f64,
}

impl ShockModel {
    /// Mean-zero bivariate Gaussian shocks.
    pub fn gaussian(var_demand: f64, var_cost: f64, cov: f64) -> Result<Self> {
        Self::validated(ShockKind::Gaussian, var_demand, var_cost, cov, 0.5)
    }

    /// Symmetric two-point shocks with 50% chance of the high state.
    pub fn two_point(var_demand: f64, var_cost: f64, cov: f64) -> Result<Self> {
        Self::validated(ShockKind::TwoPoint, var_demand, var_cost, cov, 0.5)
    }

    /// Two-point shocks where demand is high with probability `prob`.
    ///
    /// For `prob != 0.5` the two demand values are asymmetric so the mean
    /// stays zero; a correlated cost shock is only defined at `prob = 0.5`.
    pub fn two_point_with_prob(
        var_demand: f64,
        var_cost: f64,
        cov: f64,
        prob: f64,
    ) -> Result<Self> {
        Self::validated(ShockKind::TwoPoint, var_demand, var_cost, cov, prob)
    }

    fn validated(
        kind: ShockKind,
        var_demand: f64,
        var_cost: f64,
        cov: f64,
        two_point_prob: f64,
    ) -> Result<Self> {
        if !var_demand.is_finite() || var_demand < 0.0 {
            return Err(Error::Construction(format!(
                "var_demand must be finite and nonnegative, got {var_demand}"
            )));
        }
        if !var_cost.is_finite() || var_cost < 0.0 {
            return Err(Error::Construction(format!(
                "var_cost must be finite and nonnegative, got {var_cost}"
            )));
        }
        if !cov.is_finite() || cov * cov > var_demand * var_cost {
            return Err(Error::Construction(format!(
                "covariance matrix [[{var_demand}, {cov}], [{cov}, {var_cost}]] is not positive semidefinite"
            )));
        }
        if kind == ShockKind::TwoPoint {
            if !(two_point_prob > 0.0 && two_point_prob < 1.0) {
                return Err(Error::Construction(format!(
                    "two_point_prob must lie in (0, 1), got {two_point_prob}"
                )));
            }
            if two_point_prob != 0.5 && var_cost > 0.0 {
                return Err(Error::Construction(
                    "two-point cost shocks are only defined for two_point_prob = 0.5 \
                     (asymmetric sign coupling would bias the cost mean)"
                        .into(),
                ));
            }
        }
        Ok(Self {
            kind,
            var_demand,
            var_cost,
            cov,
            two_point_prob,
        })
    }

    pub fn kind(&self) -> ShockKind {
        self.kind
    }

    pub fn var_demand(&self) -> f64 {
        self.var_demand
    }

    pub fn var_cost(&self) -> f64 {
        self.var_cost
    }

    pub fn cov(&self) -> f64 {
        self.cov
    }

    pub fn two_point_prob(&self) -> f64 {
        self.two_point_prob
    }

    /// Variance of the difference (demand shock - cost shock).
    pub fn var_diff(&self) -> f64 {
        self.var_demand + self.var_cost - 2.0 * self.cov
    }

    /// Draw one (demand, cost) pair. Consumes exactly two draws from `rng`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match self.kind {
            ShockKind::Gaussian => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let sd = self.var_demand.sqrt();
                let sc = self.var_cost.sqrt();
                let rho = if sd > 0.0 && sc > 0.0 {
                    self.cov / (sd * sc)
                } else {
                    0.0
                };
                let beta = sd * z1;
                let eta = sc * (rho * z1 + (1.0 - rho * rho).max(0.0).sqrt() * z2);
                (beta, eta)
            }
            ShockKind::TwoPoint => {
                let u1: f64 = rng.random();
                let u2: f64 = rng.random();
                let (hi, lo) = self.two_point_demand_values();
                let demand_high = u1 < self.two_point_prob;
                let beta = if demand_high { hi } else { lo };
                let eta = if self.var_cost > 0.0 {
                    let comonotone = u2 < self.comonotone_prob();
                    let mag = self.var_cost.sqrt();
                    match (demand_high, comonotone) {
                        (true, true) | (false, false) => mag,
                        _ => -mag,
                    }
                } else {
                    0.0
                };
                (beta, eta)
            }
        }
    }

    /// Deterministic sequence of `n` shock pairs for `(seed, n)`.
    pub fn sample_shocks(&self, seed: u64, n: usize) -> Vec<(f64, f64)> {
        let mut rng = substream(seed, Purpose::Shocks, 0);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }

    /// The two mean-zero demand values (high, low).
    fn two_point_demand_values(&self) -> (f64, f64) {
        let p = self.two_point_prob;
        let hi = (self.var_demand * (1.0 - p) / p).sqrt();
        let lo = -(self.var_demand * p / (1.0 - p)).sqrt();
        (hi, lo)
    }

    /// Probability the cost shock shares the demand shock's sign.
    fn comonotone_prob(&self) -> f64 {
        let denom = (self.var_demand * self.var_cost).sqrt();
        if denom > 0.0 {
            0.5 + self.cov / (2.0 * denom)
        } else {
            0.5
        }
    }

    /// Exact atoms `(demand, cost, probability)` of a two-point model;
    /// `None` for Gaussian.
    pub fn atoms(&self) -> Option<Vec<(f64, f64, f64)>> {
        if self.kind != ShockKind::TwoPoint {
            return None;
        }
        let p = self.two_point_prob;
        let (hi, lo) = self.two_point_demand_values();
        if self.var_cost == 0.0 {
            return Some(vec![(hi, 0.0, p), (lo, 0.0, 1.0 - p)]);
        }
        let kappa = self.comonotone_prob();
        let mag = self.var_cost.sqrt();
        Some(vec![
            (hi, mag, p * kappa),
            (hi, -mag, p * (1.0 - kappa)),
            (lo, -mag, (1.0 - p) * kappa),
            (lo, mag, (1.0 - p) * (1.0 - kappa)),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_yields_zero_pairs() {
        let m = ShockModel::gaussian(0.0, 0.0, 0.0).unwrap();
        for &(b, e) in &m.sample_shocks(1, 100) {
            assert_eq!(b, 0.0);
            assert_eq!(e, 0.0);
        }
    }

    #[test]
    fn perfectly_correlated_two_point_pairs() {
        let m = ShockModel::two_point(1.0, 1.0, 1.0).unwrap();
        for &(b, e) in &m.sample_shocks(5, 1000) {
            assert!(
                (b == 1.0 && e == 1.0) || (b == -1.0 && e == -1.0),
                "unexpected pair ({b}, {e})"
            );
        }
    }

    #[test]
    fn psd_gate_rejects_excess_covariance() {
        assert!(matches!(
            ShockModel::gaussian(1.0, 1.0, 1.1),
            Err(Error::Construction(_))
        ));
        assert!(matches!(
            ShockModel::two_point(1.0, 1.0, -1.01),
            Err(Error::Construction(_))
        ));
        // boundary (perfect correlation) is allowed
        assert!(ShockModel::gaussian(4.0, 1.0, 2.0).is_ok());
    }

    #[test]
    fn asymmetric_two_point_cost_coupling_rejected() {
        assert!(ShockModel::two_point_with_prob(1.0, 1.0, 0.0, 0.3).is_err());
        assert!(ShockModel::two_point_with_prob(1.0, 0.0, 0.0, 0.3).is_ok());
    }

    #[test]
    fn gaussian_empirical_cov_within_four_sigma() {
        // 4-sigma band = 4 * sqrt((vd*vc + cov^2)/n) = 0.008944 for these values
        let m = ShockModel::gaussian(4.0, 1.0, 1.0).unwrap();
        let n = 1_000_000;
        let pairs = m.sample_shocks(20260810, n);
        let mean_b: f64 = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let mean_e: f64 = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let cov: f64 = pairs
            .iter()
            .map(|p| (p.0 - mean_b) * (p.1 - mean_e))
            .sum::<f64>()
            / n as f64;
        let band = 4.0 * ((4.0 * 1.0 + 1.0) / n as f64).sqrt();
        assert!((cov - 1.0).abs() <= band, "cov {cov}, band {band}");
        // means have std sqrt(var/n); allow 4 sigma as well
        assert!(mean_b.abs() <= 4.0 * (4.0f64 / n as f64).sqrt());
        assert!(mean_e.abs() <= 4.0 * (1.0f64 / n as f64).sqrt());
    }

    #[test]
    fn two_point_moments_match_at_half_prob() {
        let m = ShockModel::two_point(2.0, 0.5, -0.6).unwrap();
        let n = 500_000;
        let pairs = m.sample_shocks(99, n);
        let cov: f64 = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / n as f64;
        let band = 4.0 * ((2.0 * 0.5 + 0.36) / n as f64).sqrt();
        assert!((cov + 0.6).abs() <= band, "cov {cov}, band {band}");
    }

    #[test]
    fn asymmetric_two_point_demand_is_mean_zero() {
        let m = ShockModel::two_point_with_prob(1.0, 0.0, 0.0, 0.25).unwrap();
        let atoms = m.atoms().unwrap();
        let mean: f64 = atoms.iter().map(|(b, _, p)| b * p).sum();
        let var: f64 = atoms.iter().map(|(b, _, p)| b * b * p).sum();
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn atom_probabilities_and_moments_are_exact() {
        let m = ShockModel::two_point(1.0, 1.0, 0.5).unwrap();
        let atoms = m.atoms().unwrap();
        let total: f64 = atoms.iter().map(|a| a.2).sum();
        let cov: f64 = atoms.iter().map(|(b, e, p)| b * e * p).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!((cov - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_bit_reproducible() {
        let m = ShockModel::gaussian(1.0, 2.0, 0.5).unwrap();
        let a = m.sample_shocks(7, 1000);
        let b = m.sample_shocks(7, 1000);
        assert_eq!(a, b);
    }
}
