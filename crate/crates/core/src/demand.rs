//! Isoelastic demand for block space: `q = psi / p^epsilon`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Price elasticity of demand for inclusion in the next Ethereum block,
/// the shipped preset for fast-block chains.
pub const ETHEREUM_ELASTICITY: f64 = 12.6;

/// Constant-elasticity demand curve `q(p) = psi / p^epsilon`.
///
/// `psi` is the demand shifter (gas times price^epsilon), `epsilon` the
/// price elasticity. Log quantity is affine in log price with slope
/// `-epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoelasticDemand<S> {
    psi: S,
    epsilon: S,
}

impl<S: Scalar> IsoelasticDemand<S> {
    pub fn new(psi: S, epsilon: S) -> Result<Self> {
        if !(psi > S::zero()) || !psi.is_finite() {
            return Err(Error::Construction(format!(
                "demand shifter psi must be positive and finite, got {psi}"
            )));
        }
        if !(epsilon > S::zero()) || !epsilon.is_finite() {
            return Err(Error::Construction(format!(
                "elasticity epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { psi, epsilon })
    }

    pub fn psi(&self) -> S {
        self.psi
    }

    pub fn epsilon(&self) -> S {
        self.epsilon
    }

    /// Quantity demanded at price `p`: `psi / p^epsilon`.
    pub fn quantity_at(&self, p: S) -> Result<S> {
        if !(p > S::zero()) {
            return Err(Error::Domain(format!("price must be positive, got {p}")));
        }
        Ok(self.psi / p.powf(self.epsilon))
    }

    /// Price at which quantity `q` is demanded: `(psi / q)^(1/epsilon)`.
    ///
    /// This is also the marginal benefit of the `q`-th unit of block space.
    pub fn inverse_demand(&self, q: S) -> Result<S> {
        if !(q > S::zero()) {
            return Err(Error::Domain(format!("quantity must be positive, got {q}")));
        }
        Ok((self.psi / q).powf(self.epsilon.recip()))
    }

    /// Rescale the shifter, e.g. `psi * exp(shock)` for a multiplicative
    /// demand shock.
    pub fn with_shifter(&self, psi: S) -> Result<Self> {
        Self::new(psi, self.epsilon)
    }

    /// Gross consumer benefit of consuming `q` relative to `q_ref`:
    /// the integral of inverse demand from `q_ref` to `q`.
    ///
    /// The antiderivative has a removable singularity at `epsilon = 1`
    /// where it becomes logarithmic; the branch switches within 1e-9 of 1.
    pub fn consumer_benefit(&self, q: S, q_ref: S) -> Result<S> {
        if !(q > S::zero()) || !(q_ref > S::zero()) {
            return Err(Error::Domain(format!(
                "benefit integral needs positive quantities, got q={q}, q_ref={q_ref}"
            )));
        }
        let one = S::one();
        let tol = S::from_f64(1e-9).unwrap();
        if (self.epsilon - one).abs() < tol {
            return Ok(self.psi * (q.ln() - q_ref.ln()));
        }
        // integral of (psi/u)^(1/eps) du = psi^(1/eps) u^(1-1/eps) / (1-1/eps)
        let inv_eps = self.epsilon.recip();
        let expo = one - inv_eps;
        Ok(self.psi.powf(inv_eps) * (q.powf(expo) - q_ref.powf(expo)) / expo)
    }
}
