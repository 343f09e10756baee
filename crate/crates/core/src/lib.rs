//! Riemannian cubics in the rotation group SO(3).
//!
//! A Riemannian cubic `x: [t₀, t₁] → SO(3)` is recovered from its body angular
//! velocity `V = x⁻¹x'`, which satisfies the Lie quadratic equation
//! `V'' = [V', V] + C` for a constant `C`. This crate provides
//!
//! - [`algebra`]: so(3) ≅ E³ brackets, exponentials and the moving frames used by
//!   the reconstruction formulas;
//! - [`ode`]: RK4 integration of Lie quadratics and of `x' = x·V`, conservation
//!   checks, and residuals of the third-order form `V''' = [V'', V]`;
//! - [`approx`]: closed-form first- and second-order approximants to nearly
//!   constant Lie quadratics, fitted from initial conditions;
//! - [`reconstruct`]: single-quadrature reconstruction of a cubic from its Lie
//!   quadratic, and the quadrature-free first-order approximant `x̂`.
//!
//! Supporting modules: [`operator`] (exact calculus for the ẽ-family of
//! endomorphisms) and [`quadrature`] (Simpson rules).

// `!(x > limit)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod approx;
pub mod curve;
pub mod error;
pub mod ode;
pub mod operator;
pub mod quadrature;
pub mod reconstruct;

pub use algebra::{
    ad_matrix, bracket, frame_s, frame_t, renormalize, rot_exp, rotation_r, tilde_e, Frame,
    LinearMap, Rotation, So3Vector,
};
pub use approx::{
    endomorphisms, eval_f2_v2, eval_v1, eval_v2, fit_params, integral_poly_e, taylor2_baseline,
    ApproxParams, EndomorphismSet,
};
pub use curve::So3Curve;
pub use error::{Error, Result};
pub use ode::{
    compute_c, integrate_cubic, integrate_quadratic, product_curve_v, quadratic_residual,
    QuadraticIvp, QuadraticTrajectory, RotationTrajectory,
};
pub use reconstruct::{
    phi_hat, phi_numeric, reconstruct_cubic, so3_distance, x_hat, ReconstructionInput,
};
