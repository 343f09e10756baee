//! First- and second-order approximants to nearly constant Lie quadratics.
//!
//! A Lie quadratic V_δ whose initial data lie within O(δ) of a constant D ≠ 0 is
//! approximated by
//!
//! ```text
//! V̂₁(t) = D + δ(q(t)F₀ + A₀ + (t−t₀)A₁ + ẽ(t)B)
//! V̂₂(t) = V̂₁(t) + (δ²/2)(f₂(t)F₀ + v₂(t))
//! ```
//!
//! with `q(t) = c₀ + c₁(t−t₀) + c₂(t−t₀)²`, `A₀, A₁, B ∈ F₀⊥`, and `f₂`, `v₂`
//! given in closed form through the endomorphisms L₀, L₁, M₀, M₁, M_B. The errors
//! are O(δ²) and O(δ³) respectively, for the values and for every derivative.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::algebra::{tilde_e, Frame, LinearMap, So3Vector};
use crate::curve::So3Curve;
use crate::error::{Error, Result};
use crate::ode::QuadraticIvp;
use crate::operator::{PerpOperator, Poly};

/// ‖perp(V'')‖/δ at or below this value means B = 0.
pub const B_THRESHOLD: f64 = 1e-12;

/// Parameters of V̂₁ and V̂₂.
///
/// A₀ = a01·F₁ + a02·F₂, A₁ = a11·F₁ + a12·F₂ and
/// B = beta·(cos gamma·F₁ + sin gamma·F₂).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub delta: f64,
    pub frame: Frame,
    pub t0: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub a01: f64,
    pub a02: f64,
    pub a11: f64,
    pub a12: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ApproxParams {
    pub fn d(&self) -> f64 {
        self.frame.d
    }

    /// q as a polynomial in t − t₀.
    pub fn q(&self) -> Poly {
        Poly::new(vec![self.c0, self.c1, self.c2])
    }

    pub fn a0(&self) -> So3Vector {
        self.frame.f1 * self.a01 + self.frame.f2 * self.a02
    }

    pub fn a1(&self) -> So3Vector {
        self.frame.f1 * self.a11 + self.frame.f2 * self.a12
    }

    pub fn b(&self) -> So3Vector {
        let (s, c) = self.gamma.sin_cos();
        (self.frame.f1 * c + self.frame.f2 * s) * self.beta
    }

    pub fn is_b_degenerate(&self) -> bool {
        self.beta <= 0.0
    }

    /// ρ = −2c₂/(d²β), defined for β > 0.
    pub fn rho(&self) -> Option<f64> {
        (self.beta > 0.0).then(|| -2.0 * self.c2 / (self.d() * self.d() * self.beta))
    }

    /// ĉ = ‖V̂₁''‖² = δ²(4c₂² + d⁴β²).
    pub fn c_hat(&self) -> f64 {
        let d = self.d();
        self.delta * self.delta * (4.0 * self.c2 * self.c2 + d.powi(4) * self.beta * self.beta)
    }

    /// Ĉ = δ(2c₂F₀ − d·a12·F₁ + d·a11·F₂), the first-order value of C.
    pub fn c_hat_vector(&self) -> So3Vector {
        let d = self.d();
        self.frame
            .from_coords([2.0 * self.c2, -d * self.a12, d * self.a11])
            * self.delta
    }

    /// j-th derivative of V̂₁ at t.
    pub fn v1(&self, t: f64, j: usize) -> So3Vector {
        let s = t - self.t0;
        let f = &self.frame;
        let mut q = self.q();
        for _ in 0..j {
            q = q.derivative();
        }
        let affine = match j {
            0 => self.a0() + self.a1() * s,
            1 => self.a1(),
            _ => So3Vector::zeros(),
        };
        // ẽ⁽ʲ⁾ = (−d·ĩ)ʲ ẽ exactly, as ẽ = exp(−d s ĩ).
        let mut eb = tilde_e(f, t, self.t0) * self.b();
        let step = f.i_tilde() * -f.d;
        for _ in 0..j {
            eb = step * eb;
        }
        let base = if j == 0 {
            f.direction()
        } else {
            So3Vector::zeros()
        };
        base + (f.f0 * q.eval(s) + affine + eb) * self.delta
    }

    /// Curve view of V̂₁.
    pub fn first_order(&self) -> FirstOrder<'_> {
        FirstOrder(self)
    }
}

/// V̂₁ as an [`So3Curve`] (any derivative order).
#[derive(Clone, Copy, Debug)]
pub struct FirstOrder<'a>(&'a ApproxParams);

impl So3Curve for FirstOrder<'_> {
    fn eval(&self, t: f64, order: usize) -> So3Vector {
        self.0.v1(t, order)
    }
}

/// L₀, L₁, M₀, M₁, M_B as polynomial combinations of 1, ĩ, ẽ, ĩ∘ẽ.
#[derive(Clone, Debug, PartialEq)]
pub struct EndomorphismOperators {
    pub l0: PerpOperator,
    pub l1: PerpOperator,
    pub m0: PerpOperator,
    pub m1: PerpOperator,
    pub mb: PerpOperator,
}

/// Coefficients given in powers of u = d·s, returned in powers of s.
fn poly_in_u(d: f64, coeffs: &[f64], scale: f64) -> Poly {
    Poly::new(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * d.powi(k as i32) * scale)
            .collect(),
    )
}

impl EndomorphismOperators {
    pub fn new(d: f64) -> Self {
        let (d2, d3, d4) = (d * d, d * d * d, d.powi(4));
        // L₀ = (1/d)(−u·1 + (u²/2 − 1)ĩ + ĩ∘ẽ)
        let l0 = PerpOperator {
            id: poly_in_u(d, &[0.0, -1.0], 1.0 / d),
            i: poly_in_u(d, &[-1.0, 0.0, 0.5], 1.0 / d),
            e: Poly::zero(),
            ie: Poly::constant(1.0 / d),
            d,
        };
        // L₁ = (1/d²)((u²/2 − 3)·1 + 2uĩ + 3ẽ + uĩ∘ẽ)
        let l1 = PerpOperator {
            id: poly_in_u(d, &[-3.0, 0.0, 0.5], 1.0 / d2),
            i: poly_in_u(d, &[0.0, 2.0], 1.0 / d2),
            e: Poly::constant(3.0 / d2),
            ie: poly_in_u(d, &[0.0, 1.0], 1.0 / d2),
            d,
        };
        // M₀ = (1/d³)((u²/2 − 1)·1 + uĩ + ẽ)
        let m0 = PerpOperator {
            id: poly_in_u(d, &[-1.0, 0.0, 0.5], 1.0 / d3),
            i: poly_in_u(d, &[0.0, 1.0], 1.0 / d3),
            e: Poly::constant(1.0 / d3),
            ie: Poly::zero(),
            d,
        };
        // M₁ = (1/d⁴)((u³/6 − u)·1 + (u²/2 − 1)ĩ + ĩ∘ẽ)
        let m1 = PerpOperator {
            id: poly_in_u(d, &[0.0, -1.0, 0.0, 1.0 / 6.0], 1.0 / d4),
            i: poly_in_u(d, &[-1.0, 0.0, 0.5], 1.0 / d4),
            e: Poly::zero(),
            ie: Poly::constant(1.0 / d4),
            d,
        };
        // M_B = (1/d³)(2(ẽ − 1) + uĩ∘(ẽ + 1))
        let mb = PerpOperator {
            id: Poly::constant(-2.0 / d3),
            i: poly_in_u(d, &[0.0, 1.0], 1.0 / d3),
            e: Poly::constant(2.0 / d3),
            ie: poly_in_u(d, &[0.0, 1.0], 1.0 / d3),
            d,
        };
        EndomorphismOperators { l0, l1, m0, m1, mb }
    }
}

/// The endomorphisms evaluated at one time, as matrices acting on F₀⊥.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndomorphismSet {
    pub l0: LinearMap,
    pub l1: LinearMap,
    pub m0: LinearMap,
    pub m1: LinearMap,
    pub mb: LinearMap,
}

/// L₀, L₁, M₀, M₁, M_B at time `t`, with u = d(t − t₀).
pub fn endomorphisms(frame: &Frame, t: f64, t0: f64) -> EndomorphismSet {
    let ops = EndomorphismOperators::new(frame.d);
    let s = t - t0;
    EndomorphismSet {
        l0: ops.l0.eval(frame, s),
        l1: ops.l1.eval(frame, s),
        m0: ops.m0.eval(frame, s),
        m1: ops.m1.eval(frame, s),
        mb: ops.mb.eval(frame, s),
    }
}

/// I(p·ẽ)(t) = ∫_{t₀}^{t} p(s)ẽ(s) ds in closed form, `poly` in powers of s − t₀.
/// Valid on F₀⊥.
pub fn integral_poly_e(frame: &Frame, poly: &Poly, t: f64, t0: f64) -> LinearMap {
    PerpOperator::with_e(frame.d, poly.clone())
        .integral()
        .eval(frame, t - t0)
}

/// Iᵏ(p·ẽ): `times` nested integrations from t₀ (so `times = 1` is
/// [`integral_poly_e`]).
pub fn integral_poly_e_iterated(
    frame: &Frame,
    poly: &Poly,
    times: usize,
    t: f64,
    t0: f64,
) -> LinearMap {
    let mut op = PerpOperator::with_e(frame.d, poly.clone());
    for _ in 0..times {
        op = op.integral();
    }
    op.eval(frame, t - t0)
}

/// Precomputed operators for f₂, v₂ and their derivatives.
#[derive(Clone, Debug)]
pub struct SecondOrderTerms {
    frame: Frame,
    t0: f64,
    a0: So3Vector,
    a1: So3Vector,
    b: So3Vector,
    c2: f64,
    ends: EndomorphismOperators,
    /// ĩ∘I²(I(q)ẽ)
    iq: PerpOperator,
    /// f₂'' = ⟨[A₀, P₀B] + [A₁, P₁B], F₀⟩
    p0: PerpOperator,
    p1: PerpOperator,
    /// v₂'' = Q₀A₀ + Q₁A₁ + Q_B·B
    q0: PerpOperator,
    q1: PerpOperator,
    qb: PerpOperator,
}

impl SecondOrderTerms {
    pub fn new(p: &ApproxParams) -> Self {
        let d = p.d();
        let c2 = p.c2;
        let iq_poly = p.q().integral();
        let iq = PerpOperator::with_e(d, iq_poly.clone())
            .integral()
            .integral()
            .compose_i();
        // f₂'' = 2d[A₀, ĩ(ẽ−1)B] + [A₁, 2(ẽ − 1 + d(t−t₀)ĩẽ)B]
        let p0 = PerpOperator {
            i: Poly::constant(-2.0 * d),
            ie: Poly::constant(2.0 * d),
            ..PerpOperator::zero(d)
        };
        let p1 = PerpOperator {
            id: Poly::constant(-2.0),
            e: Poly::constant(2.0),
            ie: Poly::new(vec![0.0, 2.0 * d]),
            ..PerpOperator::zero(d)
        };
        // v₂'' = −(4c₂/d)(ẽ−1)A₀ + (4c₂/d²)(d(t−t₀)·1 − ĩ(ẽ−1))A₁
        //        + 2(2c₂(t−t₀) + d²I(q))ĩẽB
        let q0 = PerpOperator {
            id: Poly::constant(4.0 * c2 / d),
            e: Poly::constant(-4.0 * c2 / d),
            ..PerpOperator::zero(d)
        };
        let q1 = PerpOperator {
            id: Poly::new(vec![0.0, 4.0 * c2 / d]),
            i: Poly::constant(4.0 * c2 / (d * d)),
            ie: Poly::constant(-4.0 * c2 / (d * d)),
            ..PerpOperator::zero(d)
        };
        let qb = PerpOperator::with_ie(
            d,
            (&Poly::new(vec![0.0, 2.0 * c2]) + &iq_poly.scale(d * d)).scale(2.0),
        );
        SecondOrderTerms {
            frame: p.frame,
            t0: p.t0,
            a0: p.a0(),
            a1: p.a1(),
            b: p.b(),
            c2,
            ends: EndomorphismOperators::new(d),
            iq,
            p0,
            p1,
            q0,
            q1,
            qb,
        }
    }

    /// (f₂⁽ʲ⁾, v₂⁽ʲ⁾) from the L/M representation of f₂ and v₂.
    pub fn integral_route(&self, t: f64, j: usize) -> (f64, So3Vector) {
        let f = &self.frame;
        let s = t - self.t0;
        let apply = |op: &PerpOperator, v: So3Vector| op.nth_derivative(j).apply(f, s, v);
        // ⟨[A, X], F₀⟩ = ⟨X, ĩA⟩
        let i = f.i_tilde();
        let f2 = -2.0
            * (apply(&self.ends.l0, self.b).dot(&(i * self.a0))
                + apply(&self.ends.l1, self.b).dot(&(i * self.a1)));
        let q2 = 2.0 * self.c2;
        let d2 = f.d * f.d;
        let v2 = (apply(&self.ends.m0, self.a0) + apply(&self.ends.m1, self.a1)
            - apply(&self.ends.mb, self.b))
            * (2.0 * q2)
            + apply(&self.iq, self.b) * (2.0 * d2);
        (f2, v2)
    }

    /// (f₂⁽ʲ⁾, v₂⁽ʲ⁾) for j ≥ 2 from the closed forms of f₂'' and v₂''.
    pub fn closed_form_route(&self, t: f64, j: usize) -> (f64, So3Vector) {
        assert!(j >= 2, "closed forms start at the second derivative");
        let f = &self.frame;
        let s = t - self.t0;
        let k = j - 2;
        let apply = |op: &PerpOperator, v: So3Vector| op.nth_derivative(k).apply(f, s, v);
        let i = f.i_tilde();
        let f2 = apply(&self.p0, self.b).dot(&(i * self.a0))
            + apply(&self.p1, self.b).dot(&(i * self.a1));
        let v2 = apply(&self.q0, self.a0) + apply(&self.q1, self.a1) + apply(&self.qb, self.b);
        (f2, v2)
    }

    /// (f₂⁽ʲ⁾, v₂⁽ʲ⁾): the L/M form for j ≤ 1, the closed forms from j = 2 on.
    pub fn f2_v2(&self, t: f64, j: usize) -> (f64, So3Vector) {
        if j < 2 {
            self.integral_route(t, j)
        } else {
            self.closed_form_route(t, j)
        }
    }
}

/// V̂₂ with its operators precomputed; use this when evaluating many times.
#[derive(Clone, Debug)]
pub struct SecondOrder {
    pub params: ApproxParams,
    terms: SecondOrderTerms,
}

impl SecondOrder {
    pub fn new(params: ApproxParams) -> Self {
        SecondOrder {
            terms: SecondOrderTerms::new(&params),
            params,
        }
    }

    pub fn terms(&self) -> &SecondOrderTerms {
        &self.terms
    }

    pub fn v2(&self, t: f64, j: usize) -> So3Vector {
        let p = &self.params;
        let (f2, v2) = self.terms.f2_v2(t, j);
        p.v1(t, j) + (p.frame.f0 * f2 + v2) * (0.5 * p.delta * p.delta)
    }
}

impl So3Curve for SecondOrder {
    fn eval(&self, t: f64, order: usize) -> So3Vector {
        self.v2(t, order)
    }
}

/// j-th derivative of V̂₁.
pub fn eval_v1(p: &ApproxParams, t: f64, j: usize) -> So3Vector {
    p.v1(t, j)
}

/// (f₂(t), v₂(t)).
pub fn eval_f2_v2(p: &ApproxParams, t: f64) -> (f64, So3Vector) {
    SecondOrderTerms::new(p).f2_v2(t, 0)
}

/// j-th derivative of V̂₂.
pub fn eval_v2(p: &ApproxParams, t: f64, j: usize) -> So3Vector {
    SecondOrder::new(*p).v2(t, j)
}

/// Chooses parameters so that V̂₁ and its first two derivatives match
/// (V0, V1, V2) exactly at t₀.
///
/// In frame coordinates, with perturbations p₀ = (V0 − D)/δ, p₁ = V1/δ,
/// p₂ = V2/δ:
///
/// ```text
/// c₀ = ⟨p₀,F₀⟩     A₀ + B = perp(p₀)
/// c₁ = ⟨p₁,F₀⟩     A₁ − d·ĩB = perp(p₁)
/// 2c₂ = ⟨p₂,F₀⟩    −d²B = perp(p₂)
/// ```
///
/// When perp(p₂) vanishes B = 0 is returned (beta = gamma = 0); check
/// [`ApproxParams::is_b_degenerate`] before using the closed-form cubic.
pub fn fit_params(
    d_vec: So3Vector,
    delta: f64,
    v0: So3Vector,
    v1: So3Vector,
    v2: So3Vector,
    t0: f64,
) -> Result<ApproxParams> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidDelta(delta));
    }
    let frame = Frame::from_d(d_vec)?;
    let d = frame.d;
    let p0 = (v0 - d_vec) / delta;
    let p1 = v1 / delta;
    let p2 = v2 / delta;
    if !(p0.is_finite() && p1.is_finite() && p2.is_finite() && t0.is_finite()) {
        return Err(Error::NonFinite("initial conditions"));
    }
    let [c0, x01, x02] = frame.coords(p0);
    let [c1, x11, x12] = frame.coords(p1);
    let [twice_c2, x21, x22] = frame.coords(p2);

    // B = (b1, b2) in (F₁, F₂).
    let (b1, b2) = (-x21 / (d * d), -x22 / (d * d));
    let (beta, gamma) = if x21.hypot(x22) <= B_THRESHOLD {
        (0.0, 0.0)
    } else {
        (b1.hypot(b2), b2.atan2(b1).rem_euclid(TAU))
    };
    let (b1, b2) = if beta == 0.0 { (0.0, 0.0) } else { (b1, b2) };
    // −d·ĩB = d·b2·F₁ − d·b1·F₂
    Ok(ApproxParams {
        delta,
        frame,
        t0,
        c0,
        c1,
        c2: 0.5 * twice_c2,
        a01: x01 - b1,
        a02: x02 - b2,
        a11: x11 - d * b2,
        a12: x12 + d * b1,
        beta,
        gamma,
    })
}

/// Degree-2 Taylor polynomial of the IVP's solution about t₀.
pub fn taylor2_baseline(ivp: &QuadraticIvp, t: f64) -> So3Vector {
    let s = t - ivp.t0;
    ivp.v0 + ivp.v1 * s + ivp.v2 * (0.5 * s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::bracket;
    use crate::ode::compute_c;
    use crate::quadrature::adaptive_simpson;
    use nalgebra::Matrix3;
    use std::f64::consts::{PI, SQRT_2};

    fn example_62(delta: f64) -> ApproxParams {
        fit_params(
            So3Vector::e1(),
            delta,
            So3Vector::new(1.0, delta, 0.0),
            So3Vector::new(0.0, 0.0, 0.5 * delta),
            So3Vector::new(1.0, 1.0, 1.0) * (0.25 * delta),
            0.0,
        )
        .unwrap()
    }

    fn example_51() -> ApproxParams {
        fit_params(
            So3Vector::e1(),
            0.01,
            So3Vector::new(1.005, 0.006, -0.01),
            So3Vector::new(-0.005, -0.00449, 0.0),
            So3Vector::new(0.001, -0.005, 0.005),
            0.0,
        )
        .unwrap()
    }

    fn general() -> ApproxParams {
        let v0 = So3Vector::new(0.3, 1.2, -0.4);
        fit_params(
            So3Vector::new(0.3, 1.2, -0.5),
            0.03,
            v0 + So3Vector::new(0.01, -0.02, 0.015),
            So3Vector::new(-0.02, 0.01, 0.03),
            So3Vector::new(0.02, 0.025, -0.01),
            0.7,
        )
        .unwrap()
    }

    #[test]
    fn example_62_parameters() {
        let p = example_62(0.05);
        let expect = [
            (p.c0, 0.0),
            (p.c1, 0.0),
            (p.c2, 0.125),
            (p.beta, SQRT_2 / 4.0),
            (p.gamma, 5.0 * PI / 4.0),
            (p.a01, 1.25),
            (p.a02, 0.25),
            (p.a11, 0.25),
            (p.a12, 0.25),
        ];
        for (i, (got, want)) in expect.iter().enumerate() {
            assert!((got - want).abs() < 1e-12, "entry {i}: {got} vs {want}");
        }
        assert!((p.rho().unwrap() - (-2.0 * 0.125 / (SQRT_2 / 4.0))).abs() < 1e-15);
    }

    #[test]
    fn v1_examples() {
        let mut p = example_62(0.05);
        let at0 = p.v1(0.0, 0);
        assert!((at0 - So3Vector::new(1.0, 0.05, 0.0)).norm() < 1e-15);
        let acc = p.v1(0.0, 2);
        assert!((acc - So3Vector::new(1.0, 1.0, 1.0) * (0.25 * 0.05)).norm() < 1e-15);
        p.delta = 0.0;
        for t in [0.0, 1.0, 3.3] {
            assert_eq!(p.v1(t, 0), So3Vector::e1());
            assert_eq!(p.v1(t, 2), So3Vector::zeros());
        }
    }

    #[test]
    fn zero_perturbation_is_degenerate() {
        let d = So3Vector::new(0.0, 2.0, 0.0);
        let p = fit_params(d, 0.1, d, So3Vector::zeros(), So3Vector::zeros(), 0.0).unwrap();
        assert!(p.is_b_degenerate());
        for x in [
            p.c0, p.c1, p.c2, p.a01, p.a02, p.a11, p.a12, p.beta, p.gamma,
        ] {
            assert_eq!(x, 0.0);
        }
        assert!(p.rho().is_none());
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let d = So3Vector::e1();
        let z = So3Vector::zeros();
        assert!(matches!(
            fit_params(d, 0.0, d, z, z, 0.0),
            Err(Error::InvalidDelta(_))
        ));
        assert!(matches!(
            fit_params(z, 0.1, d, z, z, 0.0),
            Err(Error::ZeroDirection { .. })
        ));
    }

    #[test]
    fn c_hat_matches_first_order_constant() {
        let p = general();
        for t in [0.7, 1.5, 2.9] {
            let c = compute_c(p.v1(t, 0), p.v1(t, 1), p.v1(t, 2));
            // Agreement up to the O(δ²) terms.
            assert!(
                (c - p.c_hat_vector()).norm() < 20.0 * p.delta * p.delta,
                "t={t}"
            );
        }
        assert!((p.c_hat() - p.v1(0.7, 2).norm_squared()).abs() < 1e-15);
    }

    #[test]
    fn endomorphisms_vanish_at_start() {
        let f = Frame::from_d(So3Vector::new(0.0, 0.0, 1.7)).unwrap();
        let set = endomorphisms(&f, 2.0, 2.0);
        for v in [f.f1, f.f2] {
            assert!((set.mb * v).norm() < 1e-15);
            assert!((set.l0 * v).norm() < 1e-15);
        }
    }

    #[test]
    fn endomorphisms_match_scalar_formulas() {
        // d = 1, u = π/2, applied to F₁: ĩF₁ = F₂, ẽF₁ = cos u F₁ − sin u F₂ = −F₂,
        // ĩẽF₁ = F₁. Each coefficient formula is evaluated by hand.
        let f = Frame::from_d(So3Vector::e1()).unwrap();
        let u = PI / 2.0;
        let set = endomorphisms(&f, u, 0.0);
        let one = [1.0, 0.0];
        let i = [0.0, 1.0];
        let e = [u.cos(), -u.sin()];
        let ie = [u.sin(), u.cos()];
        let combo = |a: f64, b: f64, c: f64, g: f64| {
            So3Vector::new(
                0.0,
                a * one[0] + b * i[0] + c * e[0] + g * ie[0],
                a * one[1] + b * i[1] + c * e[1] + g * ie[1],
            )
        };
        let expected = [
            (set.l0, combo(-u, u * u / 2.0 - 1.0, 0.0, 1.0)),
            (set.l1, combo(u * u / 2.0 - 3.0, 2.0 * u, 3.0, u)),
            (set.m0, combo(u * u / 2.0 - 1.0, u, 1.0, 0.0)),
            (
                set.m1,
                combo(u.powi(3) / 6.0 - u, u * u / 2.0 - 1.0, 0.0, 1.0),
            ),
            (set.mb, combo(-2.0, u, 2.0, u)),
        ];
        for (k, (m, want)) in expected.iter().enumerate() {
            assert!((m * f.f1 - *want).norm() < 1e-14, "map {k}");
        }
    }

    #[test]
    fn endomorphisms_are_iterated_integrals() {
        // L₀ = −dĩI²(ẽ−1), L₁ = −I²(ẽ − 1 + d(t−t₀)ĩẽ), M₀ = −I²(ẽ−1)/d,
        // M_B = −ĩI²((t−t₀)ẽ), each built here by the integration route.
        let f = Frame::from_d(So3Vector::new(0.5, -0.2, 1.3)).unwrap();
        let d = f.d;
        let ops = EndomorphismOperators::new(d);
        let e_minus_1 = PerpOperator {
            id: Poly::constant(-1.0),
            e: Poly::constant(1.0),
            ..PerpOperator::zero(d)
        };
        let l0 = e_minus_1.integral().integral().compose_i().scale(-d);
        let l1_inner = &e_minus_1 + &PerpOperator::with_ie(d, Poly::new(vec![0.0, d]));
        let l1 = l1_inner.integral().integral().scale(-1.0);
        let m0 = e_minus_1.integral().integral().scale(-1.0 / d);
        let mb = PerpOperator::with_e(d, Poly::new(vec![0.0, 1.0]))
            .integral()
            .integral()
            .compose_i()
            .scale(-1.0);
        for s in [0.3, 1.1, 2.6] {
            for (a, b) in [
                (&ops.l0, &l0),
                (&ops.l1, &l1),
                (&ops.m0, &m0),
                (&ops.mb, &mb),
            ] {
                let diff = a.eval(&f, s) - b.eval(&f, s);
                assert!((diff * f.f1).norm() < 1e-13 && (diff * f.f2).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn integral_poly_e_examples() {
        let f = Frame::from_d(So3Vector::new(0.2, 0.9, -0.4)).unwrap();
        let (t, t0) = (1.8, 0.3);
        let got = integral_poly_e(&f, &Poly::constant(1.0), t, t0);
        let want = f.i_tilde() * (tilde_e(&f, t, t0) - Matrix3::identity()) / f.d;
        assert!(((got - want) * f.f1).norm() < 1e-15 && ((got - want) * f.f2).norm() < 1e-15);

        let cubic = Poly::new(vec![1.0, -2.0, 0.5, 3.0]);
        let zero = integral_poly_e(&f, &cubic, t0, t0);
        assert!((zero * f.f1).norm() < 1e-15);

        let unit = Frame::from_d(So3Vector::e1()).unwrap();
        let lin = integral_poly_e(&unit, &Poly::new(vec![0.0, 1.0]), 1.0, 0.0) * unit.f1;
        for k in 0..3 {
            let q = adaptive_simpson(
                |s| s * (tilde_e(&unit, s, 0.0) * unit.f1)[k],
                0.0,
                1.0,
                1e-14,
                50,
            );
            assert!((lin[k] - q).abs() < 1e-10);
        }
    }

    #[test]
    fn f2_v2_vanish_at_start_and_without_b() {
        let p = general();
        let (f2, v2) = eval_f2_v2(&p, p.t0);
        assert!(f2.abs() < 1e-15 && v2.norm() < 1e-15);
        let (f2, v2) = SecondOrderTerms::new(&p).closed_form_route(p.t0, 2);
        assert!(f2.abs() < 1e-15 && v2.norm() < 1e-15);

        let no_b = ApproxParams { beta: 0.0, ..p };
        let ends = EndomorphismOperators::new(p.d());
        for t in [1.0, 2.5] {
            let (f2, v2) = eval_f2_v2(&no_b, t);
            assert_eq!(f2, 0.0);
            let s = t - p.t0;
            let want = (ends.m0.apply(&p.frame, s, p.a0()) + ends.m1.apply(&p.frame, s, p.a1()))
                * (4.0 * p.c2);
            assert!((v2 - want).norm() < 1e-14);
        }
    }

    #[test]
    fn closed_forms_agree_with_integral_route() {
        let terms = SecondOrderTerms::new(&general());
        for t in [0.9, 2.0, 4.4] {
            for j in 2..5 {
                let (fa, va) = terms.integral_route(t, j);
                let (fb, vb) = terms.closed_form_route(t, j);
                assert!((fa - fb).abs() < 1e-11, "f t={t} j={j}: {fa} {fb}");
                assert!((va - vb).norm() < 1e-11, "v t={t} j={j}");
            }
        }
    }

    fn fd1<F: Fn(f64) -> So3Vector>(f: F, t: f64, h: f64) -> So3Vector {
        (f(t - 2.0 * h) - f(t - h) * 8.0 + f(t + h) * 8.0 - f(t + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn derivative_consistency() {
        let p = general();
        let second = SecondOrder::new(p);
        let h = 1e-3;
        for t in [1.0, 2.2, 3.9] {
            for j in 1..4 {
                let fd = fd1(|x| p.v1(x, j - 1), t, h);
                assert!((p.v1(t, j) - fd).norm() < 1e-8, "V1 t={t} j={j}");
                let fd = fd1(|x| second.v2(x, j - 1), t, h);
                assert!((second.v2(t, j) - fd).norm() < 1e-8, "V2 t={t} j={j}");
            }
            // Closed-form second derivatives of f₂, v₂ against differences of the values.
            let terms = second.terms();
            let g = |x: f64| {
                let (f2, v2) = terms.f2_v2(x, 0);
                v2 + p.frame.f0 * f2
            };
            let second_fd = (g(t - 2.0 * h) * -1.0 + g(t - h) * 16.0 - g(t) * 30.0
                + g(t + h) * 16.0
                - g(t + 2.0 * h))
                / (12.0 * h * h);
            let (f2dd, v2dd) = terms.f2_v2(t, 2);
            assert!(
                (v2dd + p.frame.f0 * f2dd - second_fd).norm() < 1e-6,
                "t={t}"
            );
        }
    }

    #[test]
    fn v2_second_derivative_at_start_equals_v1() {
        let p = general();
        assert!((eval_v2(&p, p.t0, 2) - p.v1(p.t0, 2)).norm() < 1e-16);
        let mut z = example_62(0.05);
        z.delta = 0.0;
        for j in 0..4 {
            let want = if j == 0 {
                So3Vector::e1()
            } else {
                So3Vector::zeros()
            };
            assert_eq!(eval_v2(&z, 2.0, j), want);
        }
    }

    #[test]
    fn example_51_fit_and_c_hat() {
        let p = example_51();
        let v1 = p.first_order();
        assert!((v1.eval(0.0, 0) - So3Vector::new(1.005, 0.006, -0.01)).norm() < 1e-15);
        assert!((v1.eval(0.0, 1) - So3Vector::new(-0.005, -0.00449, 0.0)).norm() < 1e-15);
        assert!((v1.eval(0.0, 2) - So3Vector::new(0.001, -0.005, 0.005)).norm() < 1e-15);
        // C at first order against the exact C of the initial data.
        let c = compute_c(v1.eval(0.0, 0), v1.eval(0.0, 1), v1.eval(0.0, 2));
        assert!((c - So3Vector::new(0.0009551, -0.00495, 0.00051755)).norm() < 1e-12);
        assert!((p.c_hat_vector() - c).norm() < 1e-4);
    }

    #[test]
    fn taylor_baseline_examples() {
        let ivp = QuadraticIvp::new(
            0.0,
            1.0,
            So3Vector::new(1.0, 2.0, 3.0),
            So3Vector::zeros(),
            So3Vector::zeros(),
        )
        .unwrap();
        assert_eq!(taylor2_baseline(&ivp, 0.0), ivp.v0);
        assert_eq!(taylor2_baseline(&ivp, 0.8), ivp.v0);
        let ivp = QuadraticIvp {
            v1: So3Vector::e2(),
            v2: So3Vector::e3(),
            ..ivp
        };
        assert_eq!(
            taylor2_baseline(&ivp, 2.0),
            ivp.v0 + So3Vector::new(0.0, 2.0, 2.0)
        );
    }

    #[test]
    fn v2_satisfies_third_order_equation_to_second_order() {
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.1).collect();
        let residual = |delta: f64| {
            let second = SecondOrder::new(example_62(delta));
            grid.iter()
                .map(|&t| (second.v2(t, 3) - bracket(second.v2(t, 2), second.v2(t, 0))).norm())
                .fold(0.0, f64::max)
        };
        let ratio = residual(0.04) / residual(0.02);
        assert!((6.0..=10.0).contains(&ratio), "ratio {ratio}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn vec3(scale: f64) -> impl Strategy<Value = So3Vector> {
            (-scale..scale, -scale..scale, -scale..scale)
                .prop_map(|(x, y, z)| So3Vector::new(x, y, z))
        }

        proptest! {
            #[test]
            fn fit_round_trip(
                d in vec3(2.0).prop_filter("nonzero", |v| v.norm() > 0.2),
                p0 in vec3(1.0), p1 in vec3(1.0), p2 in vec3(1.0),
                delta in 1e-3f64..0.1, t0 in -2.0f64..2.0,
            ) {
                let p = fit_params(d, delta, d + p0 * delta, p1 * delta, p2 * delta, t0).unwrap();
                prop_assert!((p.v1(t0, 0) - (d + p0 * delta)).norm() < 1e-12);
                prop_assert!((p.v1(t0, 1) - p1 * delta).norm() < 1e-12);
                prop_assert!((p.v1(t0, 2) - p2 * delta).norm() < 1e-12);
                prop_assert!((0.0..TAU).contains(&p.gamma));
                prop_assert!(p.beta >= 0.0);
            }
        }
    }
}
