//! Closed-form expected welfare in the quadratic environment.
//!
//! Gaussian shocks use exact second-moment identities (valid while
//! realized quantities stay interior, i.e. away from the zero clamp);
//! two-point shocks are evaluated exactly by enumerating their atoms,
//! clamping included.

use super::kernel::{self, DrawOutcome};
use super::{MechanismFamily, QuadraticEnvironment, WelfareOutcome};

fn outcome_from_draw(d: DrawOutcome) -> WelfareOutcome {
    WelfareOutcome {
        social_benefit: d.welfare,
        validator_profit: d.profit,
        deadweight_loss: d.dwl,
        burned: d.burned,
        tips: d.tips,
        std_error: 0.0,
    }
}

/// Probability-weighted expectation over the exact atoms of a two-point
/// shock model.
fn expectation_over_atoms(
    env: &QuadraticEnvironment,
    atoms: &[(f64, f64, f64)],
    eval: impl Fn(&QuadraticEnvironment, (f64, f64)) -> DrawOutcome,
) -> WelfareOutcome {
    let mut acc = DrawOutcome::default();
    for &(beta, eta, prob) in atoms {
        let d = eval(env, (beta, eta));
        acc.welfare += prob * d.welfare;
        acc.profit += prob * d.profit;
        acc.dwl += prob * d.dwl;
        acc.burned += prob * d.burned;
        acc.tips += prob * d.tips;
    }
    outcome_from_draw(acc)
}

/// Expected welfare of committing to quantity `q_cap`.
pub fn welfare_quantity_cap(
    env: &QuadraticEnvironment,
    q_cap: f64,
    tip_per_gas: f64,
) -> WelfareOutcome {
    if let Some(atoms) = env.shocks().atoms() {
        return expectation_over_atoms(env, &atoms, |e, shock| {
            kernel::eval_cap(e, q_cap, shock, tip_per_gas)
        });
    }
    let q = q_cap.max(0.0);
    let s = env.curvature_gap();
    let mu = env.mean_efficient_quantity();
    let shocks = env.shocks();
    WelfareOutcome {
        social_benefit: kernel::welfare_level(env, q, (0.0, 0.0)),
        validator_profit: q * env.benefit().value_at(q) - env.cost().integral(q),
        deadweight_loss: 0.5 * s * (q - mu).powi(2) + shocks.var_diff() / (2.0 * s),
        burned: 0.0,
        tips: 0.0,
        std_error: 0.0,
    }
}

/// Expected welfare of committing to price `p_floor`, with quantities
/// adjusting along the demand curve. Base-fee revenue is burned;
/// validators keep the per-gas tip.
pub fn welfare_price_floor(
    env: &QuadraticEnvironment,
    p_floor: f64,
    tip_per_gas: f64,
) -> WelfareOutcome {
    if let Some(atoms) = env.shocks().atoms() {
        return expectation_over_atoms(env, &atoms, |e, shock| {
            kernel::eval_floor(e, p_floor, shock, tip_per_gas)
        });
    }
    let b = env.demand_gradient();
    let s = env.curvature_gap();
    let cpp = env.c_slope();
    let shocks = env.shocks();
    let (vd, vc, cv) = (shocks.var_demand(), shocks.var_cost(), shocks.cov());
    let mu = env.mean_efficient_quantity();
    // mean adjusted quantity (interior form)
    let m = env.q_ref() + (env.b_prime() - p_floor) / b;

    let social =
        kernel::welfare_level(env, m, (0.0, 0.0)) + vd / b - cv / b - s * vd / (2.0 * b * b);
    let dwl = 0.5 * s * (m - mu).powi(2)
        + (cpp * cpp * vd / (b * b) + vc + 2.0 * cpp * cv / b) / (2.0 * s);
    let expected_cost = env.cost().integral(m) + cv / b + cpp * vd / (2.0 * b * b);
    let tips = tip_per_gas * m;
    WelfareOutcome {
        social_benefit: social,
        validator_profit: tips - expected_cost,
        deadweight_loss: dwl,
        burned: p_floor * m,
        tips,
        std_error: 0.0,
    }
}

/// Expected welfare of a non-adaptive fixed price. Identical arithmetic
/// to [`welfare_price_floor`]; kept distinct so the fixed-price family is
/// reported separately.
pub fn welfare_fixed_price(
    env: &QuadraticEnvironment,
    price: f64,
    tip_per_gas: f64,
) -> WelfareOutcome {
    welfare_price_floor(env, price, tip_per_gas)
}

/// Expected welfare at the ex-post efficient quantity (first best).
pub fn first_best_welfare(env: &QuadraticEnvironment) -> f64 {
    if let Some(atoms) = env.shocks().atoms() {
        return atoms
            .iter()
            .map(|&(beta, eta, prob)| {
                let q = super::efficient_quantity(env, (beta, eta));
                prob * kernel::welfare_level(env, q, (beta, eta))
            })
            .sum();
    }
    let s = env.curvature_gap();
    let mu = env.mean_efficient_quantity();
    kernel::welfare_level(env, mu, (0.0, 0.0)) + env.shocks().var_diff() / (2.0 * s)
}

/// Ex-ante optimal parameter of a mechanism family and its expected
/// welfare, in closed form.
///
/// Certainty equivalence holds in the linear-quadratic environment: the
/// optimal committed quantity is the shock-free efficient quantity, and
/// the optimal committed price is the shock-free marginal benefit at that
/// quantity.
pub fn optimal_instrument(
    env: &QuadraticEnvironment,
    kind: MechanismFamily,
    tip_per_gas: f64,
) -> (f64, WelfareOutcome) {
    match kind {
        MechanismFamily::QuantityCap => {
            let q = env.mean_efficient_quantity().max(0.0);
            (q, welfare_quantity_cap(env, q, tip_per_gas))
        }
        MechanismFamily::PriceFloor | MechanismFamily::FixedPrice => {
            let p = env.b_prime()
                - env.demand_gradient() * env.intercept_gap() / env.curvature_gap();
            (p, welfare_price_floor(env, p, tip_per_gas))
        }
    }
}

/// Closed-form comparative advantage of the price instrument over the
/// quantity instrument at their optimal parameters:
///
/// ```text
/// delta = -(B'' + C'') Var[beta] / (2 B''^2) + Cov[beta, eta] / B''
/// ```
///
/// Positive `delta` favors the price instrument; the sign flips exactly
/// when `|B''|` crosses `C''` (for zero covariance). The formula is exact
/// for interior quantities under both shock families and is calibrated
/// against the Monte Carlo estimator of the same quantity; see
/// `docs/comparative_advantage.md`.
pub fn comparative_advantage_closed_form(env: &QuadraticEnvironment) -> f64 {
    let bpp = env.b_slope();
    let cpp = env.c_slope();
    let shocks = env.shocks();
    -(bpp + cpp) * shocks.var_demand() / (2.0 * bpp * bpp) + shocks.cov() / bpp
}
