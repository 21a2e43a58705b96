//! Welfare comparison of price and quantity instruments in a quadratic
//! environment with additive mean-zero shocks.
//!
//! The environment linearizes marginal benefit and marginal cost around a
//! common expansion point `q_ref`:
//!
//! ```text
//! B1(q, beta) = B' + beta + B''(q - q_ref)      B'' < 0
//! C1(q, eta)  = C' + eta  + C''(q - q_ref)      C'' >= 0
//! ```
//!
//! A quantity instrument commits to a block-space quantity before shocks
//! realize; a price instrument commits to a per-gas price and lets the
//! quantity adjust along the demand curve (`B1(q_adj) = p`). The
//! comparative advantage `delta` of the price instrument is the expected
//! welfare difference between the two at their ex-ante optimal parameters.
//!
//! Total benefit and cost are exact integrals of the marginal curves, so
//! every welfare gap reduces to a quadratic form; the closed-form and
//! Monte Carlo paths in the submodules must agree within sampling error.

mod closed_form;
mod monte_carlo;
mod optimize;

pub use closed_form::{
    comparative_advantage_closed_form, first_best_welfare, optimal_instrument,
    welfare_fixed_price, welfare_price_floor, welfare_quantity_cap,
};
pub use monte_carlo::{
    comparative_advantage_mc, welfare_fixed_price_mc, welfare_price_floor_mc,
    welfare_quantity_cap_mc,
};
pub use optimize::{golden_section_max, grid_refine_max, optimal_instrument_numeric};
pub(crate) use optimize::family_bracket;

use serde::{Deserialize, Serialize};

use crate::eip1559::Eip1559Params;
use crate::error::{Error, Result};
use crate::marginal::{CurveSide, LinearMarginalCurve};
use crate::shocks::ShockModel;

/// A committed fee mechanism with its scalar parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    /// Minimum per-gas price committed ex ante.
    PriceFloor { floor: f64 },
    /// Block-space quantity committed ex ante.
    QuantityCap { cap: f64 },
    /// Non-adaptive per-gas price (a floor that never moves).
    FixedPrice { price: f64 },
    /// Dynamic base-fee mechanism; has no single-shot welfare analysis.
    Eip1559 { params: Eip1559Params<f64> },
}

/// Mechanism family, ordered by the bargaining tie-break
/// (`QuantityCap` wins exact ties, then `PriceFloor`, then `FixedPrice`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismFamily {
    QuantityCap,
    PriceFloor,
    FixedPrice,
}

impl MechanismFamily {
    pub fn label(&self) -> &'static str {
        match self {
            MechanismFamily::QuantityCap => "quantity_cap",
            MechanismFamily::PriceFloor => "price_floor",
            MechanismFamily::FixedPrice => "fixed_price",
        }
    }
}

/// Quadratic welfare environment: linear marginal curves sharing one
/// expansion point, plus the joint shock distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticEnvironment {
    benefit: LinearMarginalCurve<f64>,
    cost: LinearMarginalCurve<f64>,
    shocks: ShockModel,
}

impl QuadraticEnvironment {
    pub fn new(
        benefit: LinearMarginalCurve<f64>,
        cost: LinearMarginalCurve<f64>,
        shocks: ShockModel,
    ) -> Result<Self> {
        if benefit.side() != CurveSide::Benefit {
            return Err(Error::Construction(
                "benefit marginal must be benefit-oriented".into(),
            ));
        }
        if cost.side() != CurveSide::Cost {
            return Err(Error::Construction(
                "cost marginal must be cost-oriented".into(),
            ));
        }
        if !(benefit.slope() < 0.0) {
            return Err(Error::Construction(format!(
                "benefit slope must be strictly negative, got {}",
                benefit.slope()
            )));
        }
        if benefit.q_ref() != cost.q_ref() {
            return Err(Error::Construction(format!(
                "marginal curves must share the expansion point, got {} and {}",
                benefit.q_ref(),
                cost.q_ref()
            )));
        }
        if benefit.shock() != 0.0 || cost.shock() != 0.0 {
            return Err(Error::Construction(
                "environment curves carry shocks through the shock model, \
                 not through pre-set curve shocks"
                    .into(),
            ));
        }
        Ok(Self {
            benefit,
            cost,
            shocks,
        })
    }

    /// Convenience constructor from raw coefficients.
    pub fn from_coefficients(
        b_prime: f64,
        b_slope: f64,
        c_prime: f64,
        c_slope: f64,
        q_ref: f64,
        shocks: ShockModel,
    ) -> Result<Self> {
        Self::new(
            LinearMarginalCurve::benefit(b_prime, b_slope, q_ref)?,
            LinearMarginalCurve::cost(c_prime, c_slope, q_ref)?,
            shocks,
        )
    }

    pub fn benefit(&self) -> &LinearMarginalCurve<f64> {
        &self.benefit
    }

    pub fn cost(&self) -> &LinearMarginalCurve<f64> {
        &self.cost
    }

    pub fn shocks(&self) -> &ShockModel {
        &self.shocks
    }

    /// Same environment under a different shock model.
    pub fn with_shocks(&self, shocks: ShockModel) -> Self {
        Self { shocks, ..*self }
    }

    pub fn q_ref(&self) -> f64 {
        self.benefit.q_ref()
    }

    pub fn b_prime(&self) -> f64 {
        self.benefit.intercept()
    }

    pub fn c_prime(&self) -> f64 {
        self.cost.intercept()
    }

    pub fn b_slope(&self) -> f64 {
        self.benefit.slope()
    }

    pub fn c_slope(&self) -> f64 {
        self.cost.slope()
    }

    /// Absolute demand slope `-B'' > 0`.
    pub(crate) fn demand_gradient(&self) -> f64 {
        -self.benefit.slope()
    }

    /// Combined curvature `C'' - B'' > 0`.
    pub(crate) fn curvature_gap(&self) -> f64 {
        self.cost.slope() - self.benefit.slope()
    }

    /// Intercept gap `B' - C'` at the expansion point.
    pub(crate) fn intercept_gap(&self) -> f64 {
        self.benefit.intercept() - self.cost.intercept()
    }

    /// Certainty-equivalent efficient quantity (where the shock-free
    /// marginal curves cross), not clamped.
    pub(crate) fn mean_efficient_quantity(&self) -> f64 {
        self.q_ref() + self.intercept_gap() / self.curvature_gap()
    }
}

/// Expected welfare decomposition of a mechanism.
///
/// `std_error` is the Monte Carlo standard error of `social_benefit`
/// (zero on the closed-form path).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareOutcome {
    /// Expected social benefit `E[B - C]`.
    pub social_benefit: f64,
    /// Expected validator profit (fee revenue to validators minus cost).
    pub validator_profit: f64,
    /// Expected deadweight loss relative to the ex-post efficient quantity.
    pub deadweight_loss: f64,
    /// Expected burned base-fee revenue.
    pub burned: f64,
    /// Expected tips transferred to validators.
    pub tips: f64,
    /// Standard error of the `social_benefit` estimate.
    pub std_error: f64,
}

/// Ex-post efficient quantity: the solution of `B1(q) = C1(q)` for the
/// realized shock pair, clamped at zero.
pub fn efficient_quantity(env: &QuadraticEnvironment, shock: (f64, f64)) -> f64 {
    let (beta, eta) = shock;
    let u = (env.intercept_gap() + beta - eta) / env.curvature_gap();
    (env.q_ref() + u).max(0.0)
}

/// Quantity demanded when the committed price is `p_floor`: the solution
/// of `B1(q, beta) = p_floor`, clamped at zero. Strictly decreasing in the
/// floor and increasing in the demand shock while interior.
pub fn adjusted_quantity(env: &QuadraticEnvironment, p_floor: f64, shock: (f64, f64)) -> f64 {
    let (beta, _) = shock;
    let u = (env.b_prime() + beta - p_floor) / env.demand_gradient();
    (env.q_ref() + u).max(0.0)
}

/// Deadweight loss of a mechanism for one realized shock pair: the
/// integral of `B1 - C1` between the realized quantity and the ex-post
/// efficient quantity, in absolute value (exact quadratic closed form).
///
/// The dynamic `Eip1559` mechanism has no single-shot deadweight loss.
pub fn deadweight_loss(
    env: &QuadraticEnvironment,
    mechanism: &Mechanism,
    shock: (f64, f64),
) -> Result<f64> {
    let realized = match mechanism {
        Mechanism::QuantityCap { cap } => cap.max(0.0),
        Mechanism::PriceFloor { floor } => adjusted_quantity(env, *floor, shock),
        Mechanism::FixedPrice { price } => adjusted_quantity(env, *price, shock),
        Mechanism::Eip1559 { .. } => {
            return Err(Error::UnsupportedMechanism(
                "eip1559 is a dynamic mechanism with no single-shot deadweight loss".into(),
            ))
        }
    };
    Ok(kernel::dwl_at(env, realized - env.q_ref(), shock))
}

/// Per-draw welfare arithmetic shared by the Monte Carlo estimators and
/// the exact two-point expectations.
pub(crate) mod kernel {
    use super::QuadraticEnvironment;

    /// Per-draw outcome of operating a mechanism at one shock realization.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct DrawOutcome {
        pub welfare: f64,
        pub profit: f64,
        pub dwl: f64,
        pub burned: f64,
        pub tips: f64,
    }

    /// Deadweight loss for a realized centered quantity `u = q - q_ref`.
    ///
    /// Computed from the quadratic identity
    /// `|integral_{q}^{q*} (B1 - C1)| = (s/2) |(u - u*)^2 - (u*_c - u*)^2|`
    /// with the efficient point clamped at zero quantity; this avoids the
    /// cancellation of evaluating two large welfare levels.
    pub fn dwl_at(env: &QuadraticEnvironment, u_real: f64, shock: (f64, f64)) -> f64 {
        let (beta, eta) = shock;
        let s = env.curvature_gap();
        let u_star = (env.intercept_gap() + beta - eta) / s;
        let u_star_clamped = u_star.max(-env.q_ref());
        let a = u_real - u_star;
        let c = u_star_clamped - u_star;
        0.5 * s * (a * a - c * c).abs()
    }

    /// Welfare level `B(q) - C(q)` via the exact marginal-curve integrals.
    pub fn welfare_level(env: &QuadraticEnvironment, q: f64, shock: (f64, f64)) -> f64 {
        let (beta, eta) = shock;
        env.benefit().with_shock(beta).integral(q) - env.cost().with_shock(eta).integral(q)
    }

    /// Operate a committed quantity `q_cap` at one shock realization.
    pub fn eval_cap(
        env: &QuadraticEnvironment,
        q_cap: f64,
        shock: (f64, f64),
        tip_per_gas: f64,
    ) -> DrawOutcome {
        let _ = tip_per_gas; // quantity instruments carry no tip flow
        let (beta, eta) = shock;
        let q = q_cap.max(0.0);
        let clearing_price = env.benefit().with_shock(beta).value_at(q);
        DrawOutcome {
            welfare: welfare_level(env, q, shock),
            profit: q * clearing_price - env.cost().with_shock(eta).integral(q),
            dwl: dwl_at(env, q - env.q_ref(), shock),
            burned: 0.0,
            tips: 0.0,
        }
    }

    /// Operate a committed price `p` at one shock realization. Base-fee
    /// revenue is burned; validators keep tips only.
    pub fn eval_floor(
        env: &QuadraticEnvironment,
        p: f64,
        shock: (f64, f64),
        tip_per_gas: f64,
    ) -> DrawOutcome {
        let (beta, eta) = shock;
        let q = super::adjusted_quantity(env, p, shock);
        let _ = beta;
        let tips = tip_per_gas * q;
        DrawOutcome {
            welfare: welfare_level(env, q, shock),
            profit: tips - env.cost().with_shock(eta).integral(q),
            dwl: dwl_at(env, q - env.q_ref(), shock),
            burned: p * q,
            tips,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(
        b_prime: f64,
        b_slope: f64,
        c_prime: f64,
        c_slope: f64,
        q_ref: f64,
    ) -> QuadraticEnvironment {
        QuadraticEnvironment::from_coefficients(
            b_prime,
            b_slope,
            c_prime,
            c_slope,
            q_ref,
            ShockModel::gaussian(0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn efficient_quantity_at_expansion_point() {
        let e = env(5.0, -1.0, 5.0, 1.0, 7.0);
        assert_eq!(efficient_quantity(&e, (0.0, 0.0)), 7.0);
    }

    #[test]
    fn efficient_quantity_examples() {
        let e = env(10.0, -1.0, 2.0, 1.0, 0.0);
        assert_eq!(efficient_quantity(&e, (0.0, 0.0)), 4.0);
        assert_eq!(efficient_quantity(&e, (2.0, 0.0)), 5.0);
    }

    #[test]
    fn efficient_quantity_clamps_at_zero() {
        let e = env(1.0, -1.0, 10.0, 1.0, 0.0);
        assert_eq!(efficient_quantity(&e, (0.0, 0.0)), 0.0);
    }

    #[test]
    fn adjusted_quantity_examples() {
        let e = env(10.0, -1.0, 2.0, 1.0, 0.0);
        assert_eq!(adjusted_quantity(&e, 4.0, (0.0, 0.0)), 6.0);
        // floor equal to the marginal benefit at q_ref returns q_ref
        let e = env(10.0, -2.0, 2.0, 1.0, 3.0);
        assert_eq!(adjusted_quantity(&e, 10.5, (0.5, 0.0)), 3.0);
    }

    #[test]
    fn deadweight_loss_matches_hand_integral() {
        // cap at q=2 vs q*=4: integral of (8 - 2q) from 2 to 4 = 4
        let e = env(10.0, -1.0, 2.0, 1.0, 0.0);
        let dwl = deadweight_loss(&e, &Mechanism::QuantityCap { cap: 2.0 }, (0.0, 0.0)).unwrap();
        assert_eq!(dwl, 4.0);
    }

    #[test]
    fn deadweight_loss_is_zero_at_efficient_quantity() {
        let e = env(10.0, -1.0, 2.0, 1.0, 0.0);
        let dwl = deadweight_loss(&e, &Mechanism::QuantityCap { cap: 4.0 }, (0.0, 0.0)).unwrap();
        assert_eq!(dwl, 0.0);
    }

    #[test]
    fn symmetric_deviations_give_equal_dwl() {
        let e = env(10.0, -1.0, 2.0, 1.0, 0.0);
        let lo = deadweight_loss(&e, &Mechanism::QuantityCap { cap: 3.0 }, (0.0, 0.0)).unwrap();
        let hi = deadweight_loss(&e, &Mechanism::QuantityCap { cap: 5.0 }, (0.0, 0.0)).unwrap();
        assert_eq!(lo, hi);
    }

    #[test]
    fn eip1559_mechanism_is_unsupported_for_dwl() {
        let e = env(10.0, -1.0, 2.0, 1.0, 0.0);
        let mech = Mechanism::Eip1559 {
            params: Eip1559Params::ethereum(1.0).unwrap(),
        };
        assert!(matches!(
            deadweight_loss(&e, &mech, (0.0, 0.0)),
            Err(Error::UnsupportedMechanism(_))
        ));
    }

    #[test]
    fn environment_rejects_mismatched_expansion_points() {
        let b = LinearMarginalCurve::benefit(10.0, -1.0, 1.0).unwrap();
        let c = LinearMarginalCurve::cost(2.0, 1.0, 2.0).unwrap();
        let shocks = ShockModel::gaussian(1.0, 0.0, 0.0).unwrap();
        assert!(QuadraticEnvironment::new(b, c, shocks).is_err());
    }

    #[test]
    fn environment_rejects_flat_benefit() {
        let shocks = ShockModel::gaussian(1.0, 0.0, 0.0).unwrap();
        assert!(QuadraticEnvironment::from_coefficients(10.0, 0.0, 2.0, 1.0, 0.0, shocks).is_err());
    }

    #[test]
    fn mechanism_family_tie_break_order() {
        assert!(MechanismFamily::QuantityCap < MechanismFamily::PriceFloor);
        assert!(MechanismFamily::PriceFloor < MechanismFamily::FixedPrice);
    }
}
