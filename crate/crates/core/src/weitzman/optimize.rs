//! Scalar maximization of welfare objectives.
//!
//! The objectives are unimodal in the quadratic environment, so a coarse
//! scan brackets the optimum and golden-section search refines it. When
//! the scan keeps finding its best value at the top of the bracket, the
//! bracket doubles a documented number of times before the search reports
//! an optimization error with diagnostics.

use super::kernel;
use super::{MechanismFamily, QuadraticEnvironment, WelfareOutcome};
use crate::error::{Error, OptDiagnostics, Result};
use crate::rng::Moments;

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Returns `(x_max, f_max)` once the bracket shrinks below `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI2: f64 = 0.381_966_011_250_105_2; // 2 - phi

    let mut x1 = lo + INV_PHI2 * (hi - lo);
    let mut x2 = hi - INV_PHI2 * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2usize;

    while (hi - lo).abs() > tol && evals < 400 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + INV_PHI2 * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - INV_PHI2 * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }

    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Evaluate `f` on an even grid over `[lo, hi]` and refine around the best
/// grid point with golden-section search.
///
/// The refined optimum never falls below the best grid value.
pub fn grid_refine_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
) -> (f64, f64) {
    assert!(grid_points >= 2, "grid needs at least two points");
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..grid_points {
        let x = lo + step * i as f64;
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let best_x = lo + step * best_i as f64;
    let a = if best_i == 0 { lo } else { best_x - step };
    let b = if best_i == grid_points - 1 { hi } else { best_x + step };
    let tol = 1e-9 * hi.abs().max(1.0);
    let (x, v) = golden_section_max(&f, a, b, tol);
    if v >= best_v {
        (x, v)
    } else {
        (best_x, best_v)
    }
}

const SCAN_POINTS: usize = 33;
const MAX_EXPANSIONS: u32 = 4;

/// Maximize `f` on `[lo, hi]`, doubling the bracket up to
/// [`MAX_EXPANSIONS`] times while the coarse scan pins the optimum to the
/// upper edge. Errors with diagnostics if the objective still climbs at
/// the edge afterwards (a bracket failure, e.g. a non-unimodal Monte
/// Carlo objective).
fn maximize_with_expansion(
    f: impl Fn(f64) -> f64,
    lo: f64,
    mut hi: f64,
    what: &str,
) -> Result<(f64, f64)> {
    let mut expansions = 0u32;
    loop {
        let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
        let mut best_i = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for i in 0..SCAN_POINTS {
            let v = f(lo + step * i as f64);
            if v > best_v {
                best_v = v;
                best_i = i;
            }
        }
        if best_i + 1 < SCAN_POINTS {
            let a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
            let b = lo + step * (best_i + 1) as f64;
            let tol = 1e-9 * hi.abs().max(1.0);
            let (x, v) = golden_section_max(&f, a, b, tol);
            let best_x = lo + step * best_i as f64;
            return Ok(if v >= best_v { (x, v) } else { (best_x, best_v) });
        }
        if expansions >= MAX_EXPANSIONS {
            return Err(Error::Optimization {
                message: format!("{what}: objective still increasing at the bracket edge"),
                diagnostics: OptDiagnostics {
                    bracket: (lo, hi),
                    best_arg: hi,
                    best_value: best_v,
                    expansions,
                },
            });
        }
        hi = lo + 2.0 * (hi - lo);
        expansions += 1;
    }
}

/// Search bracket for a mechanism family's parameter in `env`.
///
/// Caps scan `[0, 4 * q_ref]` (expanded to cover the certainty-equivalent
/// optimum); prices scan from a small positive floor up to
/// `4 * (B' + 3 sqrt(Var[beta]))`, additionally capped at the price where
/// the mean adjusted quantity reaches zero — beyond it the interior
/// closed forms leave their domain and no optimum can live there.
pub(crate) fn family_bracket(env: &QuadraticEnvironment, kind: MechanismFamily) -> (f64, f64) {
    match kind {
        MechanismFamily::QuantityCap => {
            let hi = 4.0 * env
                .q_ref()
                .max(env.mean_efficient_quantity().abs())
                .max(1.0);
            (0.0, hi)
        }
        MechanismFamily::PriceFloor | MechanismFamily::FixedPrice => {
            let lo = 1e-9 * env.b_prime().abs().max(1.0);
            let choke_price = env.b_prime() + env.demand_gradient() * env.q_ref();
            let hi = (4.0 * (env.b_prime() + 3.0 * env.shocks().var_demand().sqrt()))
                .min(choke_price);
            (lo, hi.max(2.0 * lo))
        }
    }
}

/// Numerically optimize a mechanism parameter against a Monte Carlo
/// welfare objective with a common, pre-sampled draw set.
///
/// This is the general-environment path; the quadratic closed form in
/// [`super::optimal_instrument`] is exact and should be preferred when it
/// applies. Returns the optimal parameter and the Monte Carlo welfare
/// outcome evaluated on the same draws.
pub fn optimal_instrument_numeric(
    env: &QuadraticEnvironment,
    kind: MechanismFamily,
    tip_per_gas: f64,
    seed: u64,
    n: usize,
) -> Result<(f64, WelfareOutcome)> {
    if n == 0 {
        return Err(Error::Domain("optimizer needs at least one draw".into()));
    }
    let draws = env.shocks().sample_shocks(seed, n);
    let eval_draw = |param: f64, shock: (f64, f64)| -> kernel::DrawOutcome {
        match kind {
            MechanismFamily::QuantityCap => kernel::eval_cap(env, param, shock, tip_per_gas),
            MechanismFamily::PriceFloor | MechanismFamily::FixedPrice => {
                kernel::eval_floor(env, param, shock, tip_per_gas)
            }
        }
    };
    let objective = |param: f64| -> f64 {
        let mut sum = 0.0;
        for &shock in &draws {
            sum += eval_draw(param, shock).welfare;
        }
        sum / n as f64
    };
    let (lo, hi) = family_bracket(env, kind);
    let (x, _) = maximize_with_expansion(objective, lo, hi, kind.label())?;

    let mut welfare = Moments::default();
    let mut acc = kernel::DrawOutcome::default();
    for &shock in &draws {
        let d = eval_draw(x, shock);
        welfare.push(d.welfare);
        acc.profit += d.profit;
        acc.dwl += d.dwl;
        acc.burned += d.burned;
        acc.tips += d.tips;
    }
    let inv_n = 1.0 / n as f64;
    Ok((
        x,
        WelfareOutcome {
            social_benefit: welfare.mean(),
            validator_profit: acc.profit * inv_n,
            deadweight_loss: acc.dwl * inv_n,
            burned: acc.burned * inv_n,
            tips: acc.tips * inv_n,
            std_error: welfare.std_error(),
        },
    ))
}
