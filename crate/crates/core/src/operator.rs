//! Exact calculus for endomorphism-valued curves of the form
//!
//! ```text
//! p₁(s)·1 + p_i(s)·ĩ + p_e(s)·ẽ(s) + p_ie(s)·ĩ∘ẽ(s),      s = t − t₀
//! ```
//!
//! with polynomial coefficients, ĩ = ad(F₀) and ẽ(s) = exp(−d·s·ĩ). On the plane
//! F₀⊥ the maps ĩ and ẽ commute, ĩ² = −1 and ẽ' = −d·ĩ∘ẽ, so the family is closed
//! under composition with ĩ, differentiation, and integration from t₀. Integration
//! of the ẽ terms uses integration by parts,
//! `I(ẽg) = (ĩ/d)(ẽg − g(t₀) − I(ẽg'))`, which terminates because the coefficients
//! are polynomials. All identities hold on F₀⊥ only; evaluate on vectors
//! orthogonal to F₀.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix3;

use crate::algebra::{tilde_e, Frame, LinearMap, So3Vector};

/// Real polynomial in the shifted variable s = t − t₀, coefficients ascending.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly(Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The polynomial `c·sᵏ`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    fn trim(&mut self) {
        while self.0.last() == Some(&0.0) {
            self.0.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn at_zero(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at s = 0.
    pub fn integral(&self) -> Poly {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(0.0);
        v.extend(self.0.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Poly::new(v)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * k).collect())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + rhs.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(-1.0)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

/// Linear combination of 1, ĩ, ẽ, ĩ∘ẽ with polynomial coefficients in s.
#[derive(Clone, Debug, PartialEq)]
pub struct PerpOperator {
    pub id: Poly,
    pub i: Poly,
    pub e: Poly,
    pub ie: Poly,
    /// Rotation rate d of ẽ.
    pub d: f64,
}

impl PerpOperator {
    pub fn zero(d: f64) -> Self {
        PerpOperator {
            id: Poly::zero(),
            i: Poly::zero(),
            e: Poly::zero(),
            ie: Poly::zero(),
            d,
        }
    }

    pub fn identity(d: f64) -> Self {
        PerpOperator {
            id: Poly::constant(1.0),
            ..Self::zero(d)
        }
    }

    pub fn with_id(d: f64, p: Poly) -> Self {
        PerpOperator {
            id: p,
            ..Self::zero(d)
        }
    }

    pub fn with_i(d: f64, p: Poly) -> Self {
        PerpOperator {
            i: p,
            ..Self::zero(d)
        }
    }

    pub fn with_e(d: f64, p: Poly) -> Self {
        PerpOperator {
            e: p,
            ..Self::zero(d)
        }
    }

    pub fn with_ie(d: f64, p: Poly) -> Self {
        PerpOperator {
            ie: p,
            ..Self::zero(d)
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        PerpOperator {
            id: self.id.scale(k),
            i: self.i.scale(k),
            e: self.e.scale(k),
            ie: self.ie.scale(k),
            d: self.d,
        }
    }

    /// ĩ ∘ self, using ĩ² = −1.
    pub fn compose_i(&self) -> Self {
        PerpOperator {
            id: -&self.i,
            i: self.id.clone(),
            e: -&self.ie,
            ie: self.e.clone(),
            d: self.d,
        }
    }

    /// d/dt, using ẽ' = −d·ĩ∘ẽ.
    pub fn derivative(&self) -> Self {
        let d = self.d;
        PerpOperator {
            id: self.id.derivative(),
            i: self.i.derivative(),
            e: &self.e.derivative() + &self.ie.scale(d),
            ie: &self.ie.derivative() - &self.e.scale(d),
            d,
        }
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.derivative())
    }

    /// I(self)(t) = ∫_{t₀}^{t} self(s) ds, in closed form.
    pub fn integral(&self) -> Self {
        let plain = PerpOperator {
            id: self.id.integral(),
            i: self.i.integral(),
            ..Self::zero(self.d)
        };
        &(&plain + &integral_of_e(&self.e, self.d)) + &integral_of_e(&self.ie, self.d).compose_i()
    }

    pub fn eval(&self, frame: &Frame, s: f64) -> LinearMap {
        let i = frame.i_tilde();
        let e = tilde_e(frame, s, 0.0);
        Matrix3::identity() * self.id.eval(s)
            + i * self.i.eval(s)
            + e * self.e.eval(s)
            + i * e * self.ie.eval(s)
    }

    pub fn apply(&self, frame: &Frame, s: f64, v: So3Vector) -> So3Vector {
        self.eval(frame, s) * v
    }
}

/// I(p·ẽ) by repeated integration by parts.
fn integral_of_e(p: &Poly, d: f64) -> PerpOperator {
    if p.is_zero() {
        return PerpOperator::zero(d);
    }
    // I(ẽp) = (ĩ/d)(ẽp − p(0)·1 − I(ẽp'))
    let inner = integral_of_e(&p.derivative(), d);
    let bracket = &PerpOperator {
        id: Poly::constant(-p.at_zero()),
        e: p.clone(),
        ..PerpOperator::zero(d)
    } - &inner;
    bracket.compose_i().scale(1.0 / d)
}

impl Add for &PerpOperator {
    type Output = PerpOperator;
    fn add(self, rhs: &PerpOperator) -> PerpOperator {
        debug_assert_eq!(self.d, rhs.d);
        PerpOperator {
            id: &self.id + &rhs.id,
            i: &self.i + &rhs.i,
            e: &self.e + &rhs.e,
            ie: &self.ie + &rhs.ie,
            d: self.d,
        }
    }
}

impl Sub for &PerpOperator {
    type Output = PerpOperator;
    fn sub(self, rhs: &PerpOperator) -> PerpOperator {
        self + &rhs.scale(-1.0)
    }
}

impl Mul<f64> for &PerpOperator {
    type Output = PerpOperator;
    fn mul(self, k: f64) -> PerpOperator {
        self.scale(k)
    }
}
