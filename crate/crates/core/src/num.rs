//! Scalar abstraction for the curve primitives.
//!
//! The analytic types (demand curves, marginal curves, fee updates) are
//! generic over any IEEE float; the stochastic engines are pinned to `f64`
//! because every shipped tolerance is stated in `f64` terms.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + core::fmt::Debug + core::fmt::Display {}

impl Scalar for f32 {}
impl Scalar for f64 {}
