//! Monte Carlo welfare estimators.
//!
//! Draws are split into fixed-size chunks; chunk `c` always consumes the
//! substream `(WelfareMc, c)`, and partial results merge in chunk order.
//! The output is therefore bit-identical for any worker-thread count.

use rayon::prelude::*;

use super::kernel::{self, DrawOutcome};
use super::{optimal_instrument, MechanismFamily, QuadraticEnvironment, WelfareOutcome};
use crate::error::{Error, Result};
use crate::rng::{substream, Moments, Purpose};

const CHUNK: usize = 8192;

#[derive(Default, Clone, Copy)]
struct Partial {
    welfare: Moments,
    profit: f64,
    dwl: f64,
    burned: f64,
    tips: f64,
}

fn mc_expectation<F>(env: &QuadraticEnvironment, seed: u64, n: usize, eval: F) -> Result<WelfareOutcome>
where
    F: Fn(&QuadraticEnvironment, (f64, f64)) -> DrawOutcome + Sync,
{
    if n == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one draw".into()));
    }
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, Purpose::WelfareMc, c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            let mut part = Partial::default();
            for _ in 0..count {
                let shock = env.shocks().sample(&mut rng);
                let d = eval(env, shock);
                part.welfare.push(d.welfare);
                part.profit += d.profit;
                part.dwl += d.dwl;
                part.burned += d.burned;
                part.tips += d.tips;
            }
            part
        })
        .collect();

    let mut total = Partial::default();
    for p in &partials {
        total.welfare.merge(&p.welfare);
        total.profit += p.profit;
        total.dwl += p.dwl;
        total.burned += p.burned;
        total.tips += p.tips;
    }
    let inv_n = 1.0 / n as f64;
    Ok(WelfareOutcome {
        social_benefit: total.welfare.mean(),
        validator_profit: total.profit * inv_n,
        deadweight_loss: total.dwl * inv_n,
        burned: total.burned * inv_n,
        tips: total.tips * inv_n,
        std_error: total.welfare.std_error(),
    })
}

/// Monte Carlo estimate of [`super::welfare_quantity_cap`].
pub fn welfare_quantity_cap_mc(
    env: &QuadraticEnvironment,
    q_cap: f64,
    tip_per_gas: f64,
    seed: u64,
    n: usize,
) -> Result<WelfareOutcome> {
    mc_expectation(env, seed, n, |e, shock| {
        kernel::eval_cap(e, q_cap, shock, tip_per_gas)
    })
}

/// Monte Carlo estimate of [`super::welfare_price_floor`].
pub fn welfare_price_floor_mc(
    env: &QuadraticEnvironment,
    p_floor: f64,
    tip_per_gas: f64,
    seed: u64,
    n: usize,
) -> Result<WelfareOutcome> {
    mc_expectation(env, seed, n, |e, shock| {
        kernel::eval_floor(e, p_floor, shock, tip_per_gas)
    })
}

/// Monte Carlo estimate of [`super::welfare_fixed_price`].
pub fn welfare_fixed_price_mc(
    env: &QuadraticEnvironment,
    price: f64,
    tip_per_gas: f64,
    seed: u64,
    n: usize,
) -> Result<WelfareOutcome> {
    welfare_price_floor_mc(env, price, tip_per_gas, seed, n)
}

/// Monte Carlo estimate of the comparative advantage of the optimal price
/// instrument over the optimal quantity instrument, with common random
/// numbers across the two branches.
///
/// Returns `(delta, std_error)`. Each draw contributes the deadweight-loss
/// gap `dwl(quantity) - dwl(price)`, evaluated in centered coordinates
/// `u = q - q_ref`; this is algebraically identical to the welfare-level
/// difference but does not cancel two large levels against each other.
pub fn comparative_advantage_mc(
    env: &QuadraticEnvironment,
    seed: u64,
    n: usize,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "comparative advantage needs at least 2 draws, got {n}"
        )));
    }
    let (q_star, _) = optimal_instrument(env, MechanismFamily::QuantityCap, 0.0);
    let (p_star, _) = optimal_instrument(env, MechanismFamily::PriceFloor, 0.0);

    let s = env.curvature_gap();
    let b = env.demand_gradient();
    let a = env.intercept_gap();
    let u_floor = -env.q_ref();
    let u_cap = (q_star - env.q_ref()).max(u_floor);
    // hoisted so the price branch sees B' - p* exactly once
    let floor_offset = env.b_prime() - p_star;

    let dwl_centered = |u: f64, u_star: f64| -> f64 {
        let clamped = u_star.max(u_floor);
        let x = u - u_star;
        let c = clamped - u_star;
        0.5 * s * (x * x - c * c).abs()
    };

    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, Purpose::WelfareMc, c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                let (beta, eta) = env.shocks().sample(&mut rng);
                let u_star = (a + beta - eta) / s;
                let u_adj = ((floor_offset + beta) / b).max(u_floor);
                m.push(dwl_centered(u_cap, u_star) - dwl_centered(u_adj, u_star));
            }
            m
        })
        .collect();

    let mut total = Moments::default();
    for p in &partials {
        total.merge(p);
    }
    Ok((total.mean(), total.std_error()))
}
