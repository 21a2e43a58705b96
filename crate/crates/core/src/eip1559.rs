//! Base-fee dynamics: the block-by-block minimum-price update, block
//! filling from isoelastic demand, and the burn/tip payment split.
//!
//! The base fee updates multiplicatively from the previous block's size:
//!
//! ```text
//! p[t] = max(p_min, p[t-1] * (1 + d * (q[t-1] - q_target) / q_target))
//! ```
//!
//! With the shipped defaults (`q_max = 2 * q_target`, `d = 1/8`) the
//! per-block multiplier stays in `[7/8, 9/8]`, so a positive fee can never
//! reach zero. Under permanently full blocks the fee first doubles at
//! block 6 (`1.125^6 ≈ 2.027`), not 8; the adjustment rate is applied
//! literally rather than retuned to an 8-block doubling.

use serde::{Deserialize, Serialize};

use crate::demand::IsoelasticDemand;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::rng::{pairwise_sum, substream, Purpose};
use crate::token::TokenPriceModel;
use rand_distr::{Distribution, StandardNormal};

/// Default block-space target (gas).
pub const DEFAULT_Q_TARGET: f64 = 15_000_000.0;
/// Default base-fee adjustment rate.
pub const DEFAULT_ADJUSTMENT_RATE: f64 = 0.125;

/// Parameters of the dynamic minimum-price mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eip1559Params<S> {
    /// Target block size (gas).
    pub q_target: S,
    /// Maximum block size (gas), at least `q_target`.
    pub q_max: S,
    /// Adjustment rate `d` in `[0, 1)`; `d = 0` is a fixed price.
    pub d: S,
    /// Initial base fee (token per gas).
    pub p_init: S,
    /// Base-fee floor (token per gas), usually 0.
    pub p_min: S,
}

impl<S: Scalar> Eip1559Params<S> {
    pub fn new(q_target: S, q_max: S, d: S, p_init: S, p_min: S) -> Result<Self> {
        if !(q_target > S::zero()) {
            return Err(Error::Construction(format!(
                "q_target must be positive, got {q_target}"
            )));
        }
        if q_max < q_target {
            return Err(Error::Construction(format!(
                "q_max ({q_max}) must be at least q_target ({q_target})"
            )));
        }
        if !(d >= S::zero() && d < S::one()) {
            return Err(Error::Construction(format!(
                "adjustment rate d must lie in [0, 1), got {d}"
            )));
        }
        if !(p_init > S::zero()) {
            return Err(Error::Construction(format!(
                "p_init must be positive, got {p_init}"
            )));
        }
        if !(p_min >= S::zero()) {
            return Err(Error::Construction(format!(
                "p_min must be nonnegative, got {p_min}"
            )));
        }
        Ok(Self {
            q_target,
            q_max,
            d,
            p_init,
            p_min,
        })
    }

    /// Mainnet-style defaults: 15M gas target, 30M max, `d = 1/8`.
    pub fn ethereum(p_init: S) -> Result<Self> {
        let t = S::from_f64(DEFAULT_Q_TARGET).unwrap();
        let two = S::from_f64(2.0).unwrap();
        Self::new(
            t,
            t * two,
            S::from_f64(DEFAULT_ADJUSTMENT_RATE).unwrap(),
            p_init,
            S::zero(),
        )
    }

    /// Non-adaptive variant of the same mechanism (`d = 0`), i.e. a fixed
    /// unit price in the dynamic setting.
    pub fn fixed_price(&self) -> Self {
        Self {
            d: S::zero(),
            ..*self
        }
    }
}

/// Next block's base fee given the previous fee and realized block size.
pub fn next_base_fee<S: Scalar>(p_prev: S, q_prev: S, params: &Eip1559Params<S>) -> Result<S> {
    if !(q_prev >= S::zero() && q_prev <= params.q_max) {
        return Err(Error::Domain(format!(
            "q_prev must lie in [0, {}], got {q_prev}",
            params.q_max
        )));
    }
    let multiplier = S::one() + params.d * (q_prev - params.q_target) / params.q_target;
    Ok(params.p_min.max(p_prev * multiplier))
}

/// Block space consumed at base fee `p`: demand clamped at the size limit.
pub fn realized_block_size<S: Scalar>(
    p: S,
    demand: &IsoelasticDemand<S>,
    q_max: S,
) -> Result<S> {
    Ok(demand.quantity_at(p)?.min(q_max))
}

/// Settlement of one transaction against the current base fee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PaymentOutcome<S> {
    /// The sender pays `gas * min(base_fee + tip, fee_cap)`; the base-fee
    /// part is burned and the remainder goes to the validator.
    Included { paid: S, burned: S, to_validator: S },
    /// The fee cap is below the base fee, so the transaction cannot be
    /// included in this block.
    Excluded,
}

/// Split one transaction's payment into burned and validator portions.
pub fn transaction_payment<S: Scalar>(
    gas: S,
    base_fee: S,
    tip: S,
    fee_cap: S,
) -> Result<PaymentOutcome<S>> {
    if !(gas > S::zero()) {
        return Err(Error::Domain(format!("gas must be positive, got {gas}")));
    }
    if !(tip >= S::zero()) {
        return Err(Error::Domain(format!("tip must be nonnegative, got {tip}")));
    }
    if fee_cap < base_fee {
        return Ok(PaymentOutcome::Excluded);
    }
    let paid = gas * (base_fee + tip).min(fee_cap);
    let burned = gas * base_fee;
    Ok(PaymentOutcome::Included {
        paid,
        burned,
        to_validator: paid - burned,
    })
}

/// Demand-shifter process driving block-level demand: the shifter is
/// `psi_0 * exp(x_k)` where `x_k` is i.i.d. N(0, shock_std^2) by default,
/// or a stationary AR(1) with persistence `rho` (innovations are scaled by
/// `sqrt(1 - rho^2)` so the stationary standard deviation stays
/// `shock_std`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandProcess {
    pub base: IsoelasticDemand<f64>,
    pub shock_std: f64,
    pub rho: f64,
}

impl DemandProcess {
    pub fn new(base: IsoelasticDemand<f64>, shock_std: f64, rho: f64) -> Result<Self> {
        if !(shock_std >= 0.0) || !shock_std.is_finite() {
            return Err(Error::Construction(format!(
                "shock_std must be nonnegative and finite, got {shock_std}"
            )));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Construction(format!(
                "persistence rho must lie in [0, 1), got {rho}"
            )));
        }
        Ok(Self {
            base,
            shock_std,
            rho,
        })
    }

    /// Deterministic demand with constant shifter.
    pub fn constant(base: IsoelasticDemand<f64>) -> Self {
        Self {
            base,
            shock_std: 0.0,
            rho: 0.0,
        }
    }
}

/// One simulated block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub index: u64,
    pub base_fee: f64,
    pub block_size: f64,
    pub burned: f64,
    pub tips: f64,
    pub token_price: f64,
}

/// A simulated base-fee path with its generating parameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: Eip1559Params<f64>,
    pub seed: u64,
    pub blocks: Vec<BlockRecord>,
}

/// Simulate `t` blocks of base-fee dynamics under stochastic demand and a
/// stochastic token price. Deterministic per seed.
pub fn simulate_trajectory(
    params: &Eip1559Params<f64>,
    demand: &DemandProcess,
    token: &TokenPriceModel,
    tip_per_gas: f64,
    t: usize,
    seed: u64,
) -> Result<Trajectory> {
    if t < 1 {
        return Err(Error::Domain("trajectory needs at least one block".into()));
    }
    if !(tip_per_gas >= 0.0) {
        return Err(Error::Domain(format!(
            "tip_per_gas must be nonnegative, got {tip_per_gas}"
        )));
    }
    let token_path = token.sample_path(seed, t)?;
    let mut rng = substream(seed, Purpose::TrajectoryDemand, 0);
    let innovation_scale = demand.shock_std * (1.0 - demand.rho * demand.rho).sqrt();

    let mut blocks = Vec::with_capacity(t);
    let mut base_fee = params.p_init;
    let mut shock = 0.0;
    for k in 0..t {
        let z: f64 = StandardNormal.sample(&mut rng);
        shock = if k == 0 {
            demand.shock_std * z
        } else {
            demand.rho * shock + innovation_scale * z
        };
        let shifted = demand.base.with_shifter(demand.base.psi() * shock.exp())?;
        let size = realized_block_size(base_fee, &shifted, params.q_max)?;
        blocks.push(BlockRecord {
            index: k as u64,
            base_fee,
            block_size: size,
            burned: base_fee * size,
            tips: tip_per_gas * size,
            token_price: token_path[k],
        });
        base_fee = next_base_fee(base_fee, size, params)?;
    }
    Ok(Trajectory {
        params: *params,
        seed,
        blocks,
    })
}

/// Summary statistics of a trajectory. USD fees are per-block
/// `base_fee * token_price`; variances are unbiased sample variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub blocks: usize,
    pub mean_base_fee: f64,
    pub var_base_fee: f64,
    pub mean_fee_usd: f64,
    pub var_fee_usd: f64,
    pub mean_block_size: f64,
    pub total_burned: f64,
    pub total_tips: f64,
    pub full_block_fraction: f64,
}

fn sample_var(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

/// Exact summary of a non-empty trajectory.
pub fn trajectory_stats(traj: &Trajectory) -> Result<TrajectoryStats> {
    if traj.blocks.is_empty() {
        return Err(Error::Domain("trajectory has no blocks".into()));
    }
    let n = traj.blocks.len();
    let fees: Vec<f64> = traj.blocks.iter().map(|b| b.base_fee).collect();
    let fees_usd: Vec<f64> = traj
        .blocks
        .iter()
        .map(|b| b.base_fee * b.token_price)
        .collect();
    let sizes: Vec<f64> = traj.blocks.iter().map(|b| b.block_size).collect();
    let burned: Vec<f64> = traj.blocks.iter().map(|b| b.burned).collect();
    let tips: Vec<f64> = traj.blocks.iter().map(|b| b.tips).collect();

    let mean_base_fee = pairwise_sum(&fees) / n as f64;
    let mean_fee_usd = pairwise_sum(&fees_usd) / n as f64;
    let full = traj
        .blocks
        .iter()
        .filter(|b| b.block_size >= traj.params.q_max)
        .count();
    Ok(TrajectoryStats {
        blocks: n,
        mean_base_fee,
        var_base_fee: sample_var(&fees, mean_base_fee),
        mean_fee_usd,
        var_fee_usd: sample_var(&fees_usd, mean_fee_usd),
        mean_block_size: pairwise_sum(&sizes) / n as f64,
        total_burned: pairwise_sum(&burned),
        total_tips: pairwise_sum(&tips),
        full_block_fraction: full as f64 / n as f64,
    })
}

/// Render a value with 12 significant digits, locale-free.
pub fn format_sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// CSV export with the fixed header
/// `block,base_fee,block_size,burned,tips,token_price_usd,fee_usd`,
/// one row per block, 12 significant digits per numeric column.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.blocks.len() + 1));
    out.push_str("block,base_fee,block_size,burned,tips,token_price_usd,fee_usd\n");
    for b in &traj.blocks {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.index,
            format_sig12(b.base_fee),
            format_sig12(b.block_size),
            format_sig12(b.burned),
            format_sig12(b.tips),
            format_sig12(b.token_price),
            format_sig12(b.base_fee * b.token_price),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Eip1559Params<f64> {
        Eip1559Params::ethereum(10.0).unwrap()
    }

    #[test]
    fn target_block_is_a_fixed_point() {
        let p = params();
        assert_eq!(next_base_fee(10.0, p.q_target, &p).unwrap(), 10.0);
        assert_eq!(next_base_fee(0.123456, p.q_target, &p).unwrap(), 0.123456);
    }

    #[test]
    fn full_block_multiplies_by_nine_eighths() {
        let p = params();
        assert_eq!(next_base_fee(8.0, p.q_max, &p).unwrap(), 9.0);
        assert_eq!(next_base_fee(1.0, p.q_max, &p).unwrap(), 1.125);
    }

    #[test]
    fn empty_block_multiplies_by_seven_eighths() {
        let p = params();
        assert_eq!(next_base_fee(8.0, 0.0, &p).unwrap(), 7.0);
    }

    #[test]
    fn out_of_range_block_size_is_a_domain_error() {
        let p = params();
        assert!(next_base_fee(1.0, -1.0, &p).is_err());
        assert!(next_base_fee(1.0, p.q_max + 1.0, &p).is_err());
    }

    #[test]
    fn realized_size_clamps_at_q_max() {
        let d = IsoelasticDemand::new(1e30, 2.0).unwrap();
        assert_eq!(realized_block_size(1.0, &d, 30e6).unwrap(), 30e6);
        let d = IsoelasticDemand::new(8.0, 3.0).unwrap();
        assert_eq!(realized_block_size(2.0, &d, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn payment_split_matches_hand_arithmetic() {
        match transaction_payment(21_000.0, 10.0, 2.0, 100.0).unwrap() {
            PaymentOutcome::Included {
                paid,
                burned,
                to_validator,
            } => {
                assert_eq!(paid, 252_000.0);
                assert_eq!(burned, 210_000.0);
                assert_eq!(to_validator, 42_000.0);
            }
            PaymentOutcome::Excluded => panic!("should be included"),
        }
    }

    #[test]
    fn fee_cap_binds_the_payment() {
        match transaction_payment(21_000.0, 10.0, 5.0, 12.0).unwrap() {
            PaymentOutcome::Included {
                paid,
                burned,
                to_validator,
            } => {
                assert_eq!(paid, 252_000.0);
                assert_eq!(burned, 210_000.0);
                assert_eq!(to_validator, 42_000.0);
            }
            PaymentOutcome::Excluded => panic!("should be included"),
        }
    }

    #[test]
    fn cap_below_base_fee_excludes() {
        assert_eq!(
            transaction_payment(21_000.0, 10.0, 0.0, 9.0).unwrap(),
            PaymentOutcome::Excluded
        );
    }

    #[test]
    fn stationary_demand_gives_constant_trajectory() {
        let p = params();
        // shifter chosen so demand at p_init is exactly the target
        let psi = p.q_target * p.p_init.powf(2.0);
        let demand = DemandProcess::constant(IsoelasticDemand::new(psi, 2.0).unwrap());
        let token = TokenPriceModel::constant(2000.0).unwrap();
        let traj = simulate_trajectory(&p, &demand, &token, 0.0, 50, 1).unwrap();
        for b in &traj.blocks {
            assert_eq!(b.base_fee, p.p_init);
            assert_eq!(b.block_size, p.q_target);
        }
    }

    #[test]
    fn fixed_price_variant_never_moves() {
        let p = params().fixed_price();
        let demand =
            DemandProcess::new(IsoelasticDemand::new(1e8, 1.5).unwrap(), 0.4, 0.0).unwrap();
        let token = TokenPriceModel::constant(1.0).unwrap();
        let traj = simulate_trajectory(&p, &demand, &token, 0.0, 100, 7).unwrap();
        assert!(traj.blocks.iter().all(|b| b.base_fee == p.p_init));
    }

    fn convergence_case(epsilon: f64) {
        let p = params();
        let p_star = 2.0 * p.p_init; // start the fee a factor 2 low
        let psi = p.q_target * p_star.powf(epsilon);
        let demand = DemandProcess::constant(IsoelasticDemand::new(psi, epsilon).unwrap());
        let token = TokenPriceModel::constant(1.0).unwrap();
        let traj = simulate_trajectory(&p, &demand, &token, 0.0, 400, 1).unwrap();

        let errors: Vec<f64> = traj
            .blocks
            .iter()
            .map(|b| (b.base_fee - p_star).abs())
            .collect();
        let final_rel = errors.last().unwrap() / p_star;
        assert!(final_rel <= 1e-6, "eps {epsilon}: final error {final_rel}");
        // |error| shrinks monotonically, allowing one overshoot where the
        // dynamics leave the clamped full-block regime
        let violations = errors
            .windows(2)
            .filter(|w| w[1] > w[0] * (1.0 + 1e-12) && w[0] > 1e-9 * p_star)
            .count();
        assert!(violations <= 1, "eps {epsilon}: {violations} overshoots");
    }

    #[test]
    fn base_fee_converges_for_unit_elasticity() {
        convergence_case(1.0);
    }

    #[test]
    fn base_fee_converges_for_elasticity_two() {
        convergence_case(2.0);
    }

    #[test]
    fn base_fee_converges_for_ethereum_elasticity() {
        convergence_case(crate::demand::ETHEREUM_ELASTICITY);
    }

    #[test]
    fn doubling_under_full_blocks_happens_at_block_six() {
        let p = params();
        let mut fee = p.p_init;
        let mut first_double = None;
        for t in 1..=10 {
            fee = next_base_fee(fee, p.q_max, &p).unwrap();
            if fee >= 2.0 * p.p_init && first_double.is_none() {
                first_double = Some(t);
            }
        }
        assert_eq!(first_double, Some(6));
        // eight blocks of full-block growth overshoot doubling by ~28%
        assert!((1.125f64.powi(8) - 2.565784513950348).abs() < 1e-12);
    }

    #[test]
    fn replay_reproduces_the_update_rule_bit_exactly() {
        let p = params();
        let demand =
            DemandProcess::new(IsoelasticDemand::new(1e9, 3.0).unwrap(), 0.3, 0.5).unwrap();
        let token = TokenPriceModel::new(2000.0, 0.05, 0.0).unwrap();
        let traj = simulate_trajectory(&p, &demand, &token, 1.5, 200, 99).unwrap();
        for w in traj.blocks.windows(2) {
            let replayed = next_base_fee(w[0].base_fee, w[0].block_size, &p).unwrap();
            assert_eq!(replayed.to_bits(), w[1].base_fee.to_bits());
        }
        // burned is exactly base_fee * block_size
        for b in &traj.blocks {
            assert_eq!(b.burned.to_bits(), (b.base_fee * b.block_size).to_bits());
        }
        // and the whole simulation is reproducible
        let again = simulate_trajectory(&p, &demand, &token, 1.5, 200, 99).unwrap();
        assert_eq!(traj, again);
    }

    #[test]
    fn stats_of_constant_trajectory_have_zero_variance() {
        let p = params();
        let psi = p.q_target * p.p_init.powf(2.0);
        let demand = DemandProcess::constant(IsoelasticDemand::new(psi, 2.0).unwrap());
        let token = TokenPriceModel::constant(3.0).unwrap();
        let traj = simulate_trajectory(&p, &demand, &token, 0.0, 64, 1).unwrap();
        let stats = trajectory_stats(&traj).unwrap();
        assert_eq!(stats.var_base_fee, 0.0);
        assert_eq!(stats.var_fee_usd, 0.0);
        assert_eq!(stats.mean_base_fee, p.p_init);
        assert_eq!(stats.full_block_fraction, 0.0);
    }

    #[test]
    fn constant_token_price_scales_usd_variance_quadratically() {
        let p = params();
        let demand =
            DemandProcess::new(IsoelasticDemand::new(1e9, 3.0).unwrap(), 0.2, 0.0).unwrap();
        let usd = 1234.5;
        let token = TokenPriceModel::constant(usd).unwrap();
        let traj = simulate_trajectory(&p, &demand, &token, 0.0, 500, 3).unwrap();
        let stats = trajectory_stats(&traj).unwrap();
        let rel = (stats.var_fee_usd - usd * usd * stats.var_base_fee).abs()
            / (usd * usd * stats.var_base_fee);
        assert!(rel < 1e-12, "relative gap {rel}");
    }

    #[test]
    fn higher_token_volatility_raises_usd_fee_variance_for_every_seed() {
        let p = params();
        let demand =
            DemandProcess::new(IsoelasticDemand::new(1e9, 3.0).unwrap(), 0.2, 0.0).unwrap();
        let lo = TokenPriceModel::new(2000.0, 0.01, 0.0).unwrap();
        let hi = TokenPriceModel::new(2000.0, 0.10, 0.0).unwrap();
        for seed in 0..20 {
            let t_lo = simulate_trajectory(&p, &demand, &lo, 0.0, 800, seed).unwrap();
            let t_hi = simulate_trajectory(&p, &demand, &hi, 0.0, 800, seed).unwrap();
            let v_lo = trajectory_stats(&t_lo).unwrap().var_fee_usd;
            let v_hi = trajectory_stats(&t_hi).unwrap().var_fee_usd;
            assert!(v_hi > v_lo, "seed {seed}: {v_hi} <= {v_lo}");
        }
    }

    #[test]
    fn csv_has_fixed_header_and_one_row_per_block() {
        let p = params();
        let psi = p.q_target * p.p_init.powf(2.0);
        let demand = DemandProcess::constant(IsoelasticDemand::new(psi, 2.0).unwrap());
        let token = TokenPriceModel::constant(1.0).unwrap();
        let traj = simulate_trajectory(&p, &demand, &token, 0.0, 3, 1).unwrap();
        let csv = trajectory_to_csv(&traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "block,base_fee,block_size,burned,tips,token_price_usd,fee_usd"
        );
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn empty_trajectory_stats_is_a_domain_error() {
        let traj = Trajectory {
            params: params(),
            seed: 0,
            blocks: vec![],
        };
        assert!(matches!(trajectory_stats(&traj), Err(Error::Domain(_))));
    }

    #[test]
    fn param_validation_rejects_bad_values() {
        assert!(Eip1559Params::new(0.0, 1.0, 0.1, 1.0, 0.0).is_err());
        assert!(Eip1559Params::new(2.0, 1.0, 0.1, 1.0, 0.0).is_err());
        assert!(Eip1559Params::new(1.0, 2.0, 1.0, 1.0, 0.0).is_err());
        assert!(Eip1559Params::new(1.0, 2.0, -0.1, 1.0, 0.0).is_err());
        assert!(Eip1559Params::new(1.0, 2.0, 0.1, 0.0, 0.0).is_err());
    }
}
