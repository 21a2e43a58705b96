//! Linear marginal curves and the validator cost curve.
//!
//! Both the marginal-benefit and marginal-cost sides of the quadratic
//! welfare analysis are affine in quantity around an expansion point
//! `q_ref`:
//!
//! ```text
//! value_at(q) = intercept + shock + slope * (q - q_ref)
//! ```
//!
//! Benefit curves slope down (`slope <= 0`), cost curves slope up
//! (`slope >= 0`). The `shock` field holds one realized mean-zero draw;
//! welfare estimators substitute per-draw shocks via [`LinearMarginalCurve::with_shock`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Orientation of a linear marginal curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSide {
    /// Marginal benefit: concave total benefit, `slope <= 0`.
    Benefit,
    /// Marginal cost: convex total cost, `slope >= 0`.
    Cost,
}

/// Affine marginal curve expanded around `q_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMarginalCurve<S> {
    intercept: S,
    shock: S,
    slope: S,
    q_ref: S,
    side: CurveSide,
}

impl<S: Scalar> LinearMarginalCurve<S> {
    /// Marginal benefit curve with level `intercept` at `q_ref` and
    /// slope `slope <= 0`.
    pub fn benefit(intercept: S, slope: S, q_ref: S) -> Result<Self> {
        if slope > S::zero() {
            return Err(Error::Construction(format!(
                "benefit marginal slope must be <= 0, got {slope}"
            )));
        }
        Self::validated(intercept, slope, q_ref, CurveSide::Benefit)
    }

    /// Marginal cost curve with level `intercept` at `q_ref` and
    /// slope `slope >= 0`.
    pub fn cost(intercept: S, slope: S, q_ref: S) -> Result<Self> {
        if slope < S::zero() {
            return Err(Error::Construction(format!(
                "cost marginal slope must be >= 0, got {slope}"
            )));
        }
        Self::validated(intercept, slope, q_ref, CurveSide::Cost)
    }

    fn validated(intercept: S, slope: S, q_ref: S, side: CurveSide) -> Result<Self> {
        for (name, v) in [("intercept", intercept), ("slope", slope), ("q_ref", q_ref)] {
            if !v.is_finite() {
                return Err(Error::Construction(format!("{name} must be finite, got {v}")));
            }
        }
        if q_ref < S::zero() {
            return Err(Error::Construction(format!(
                "expansion point q_ref must be nonnegative, got {q_ref}"
            )));
        }
        Ok(Self {
            intercept,
            shock: S::zero(),
            slope,
            q_ref,
            side,
        })
    }

    /// Same curve with the realized shock set to `shock`.
    pub fn with_shock(&self, shock: S) -> Self {
        Self { shock, ..*self }
    }

    pub fn intercept(&self) -> S {
        self.intercept
    }

    pub fn shock(&self) -> S {
        self.shock
    }

    pub fn slope(&self) -> S {
        self.slope
    }

    pub fn q_ref(&self) -> S {
        self.q_ref
    }

    pub fn side(&self) -> CurveSide {
        self.side
    }

    /// Marginal value at quantity `q`.
    pub fn value_at(&self, q: S) -> S {
        self.intercept + self.shock + self.slope * (q - self.q_ref)
    }

    /// Exact integral of the marginal curve from 0 to `q`:
    /// `(intercept + shock - slope*q_ref) q + slope q^2 / 2`.
    pub fn integral(&self, q: S) -> S {
        let two = S::from_f64(2.0).unwrap();
        (self.intercept + self.shock - self.slope * self.q_ref) * q
            + self.slope * q * q / two
    }

    /// Exact integral of the marginal curve from `a` to `b`.
    pub fn integral_between(&self, a: S, b: S) -> S {
        self.integral(b) - self.integral(a)
    }
}

/// Validator cost side: a convex total cost whose derivative is a
/// [`LinearMarginalCurve`] in cost orientation. `total_cost(0) = 0` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCurve<S> {
    marginal: LinearMarginalCurve<S>,
}

impl<S: Scalar> CostCurve<S> {
    pub fn new(marginal: LinearMarginalCurve<S>) -> Result<Self> {
        if marginal.side() != CurveSide::Cost {
            return Err(Error::Construction(
                "cost curve requires a cost-oriented marginal".into(),
            ));
        }
        Ok(Self { marginal })
    }

    pub fn marginal(&self) -> &LinearMarginalCurve<S> {
        &self.marginal
    }

    /// Marginal cost at `q` under realized cost shock `eta`.
    pub fn marginal_at(&self, q: S, eta: S) -> S {
        self.marginal.with_shock(eta).value_at(q)
    }

    /// Total cost of producing `q`, the exact quadratic integral of the
    /// marginal curve under realized shock `eta`.
    pub fn total_cost(&self, q: S, eta: S) -> S {
        self.marginal.with_shock(eta).integral(q)
    }
}
