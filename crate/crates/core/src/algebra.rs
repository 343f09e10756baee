//! Linear algebra for so(3) ≅ E³ and SO(3).
//!
//! so(3) is identified with E³ through `ad(v)(w) = v × w`, so the Lie bracket is the
//! cross product and the Euclidean inner product is ad-invariant. Rotations are
//! 3×3 matrices acting on column vectors.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::curve::So3Curve;
use crate::error::{Error, Result};

/// Linear endomorphism of so(3), written in standard coordinates.
pub type LinearMap = Matrix3<f64>;

/// Relative Gram-determinant floor below which two vectors are treated as dependent.
pub const FRAME_GRAM_TOLERANCE: f64 = 1e-12;

/// Element of so(3), stored as its E³ coordinates.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct So3Vector(Vector3<f64>);

impl So3Vector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        So3Vector(Vector3::new(x, y, z))
    }

    pub fn zeros() -> Self {
        So3Vector(Vector3::zeros())
    }

    pub fn e1() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn e2() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub fn e3() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Vector3::zeros();
        v[i] = 1.0;
        So3Vector(v)
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn dot(&self, other: &So3Vector) -> f64 {
        self.0.dot(&other.0)
    }

    /// Lie bracket, i.e. the cross product.
    pub fn cross(&self, other: &So3Vector) -> So3Vector {
        So3Vector(self.0.cross(&other.0))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn components(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn as_vector3(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_vector3(self) -> Vector3<f64> {
        self.0
    }
}

impl fmt::Debug for So3Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}, {:?})", self.0.x, self.0.y, self.0.z)
    }
}

impl From<Vector3<f64>> for So3Vector {
    fn from(v: Vector3<f64>) -> Self {
        So3Vector(v)
    }
}

impl From<[f64; 3]> for So3Vector {
    fn from(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }
}

impl From<So3Vector> for [f64; 3] {
    fn from(v: So3Vector) -> Self {
        v.components()
    }
}

impl Index<usize> for So3Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for So3Vector {
    type Output = So3Vector;
    fn add(self, rhs: So3Vector) -> So3Vector {
        So3Vector(self.0 + rhs.0)
    }
}

impl AddAssign for So3Vector {
    fn add_assign(&mut self, rhs: So3Vector) {
        self.0 += rhs.0;
    }
}

impl Sub for So3Vector {
    type Output = So3Vector;
    fn sub(self, rhs: So3Vector) -> So3Vector {
        So3Vector(self.0 - rhs.0)
    }
}

impl SubAssign for So3Vector {
    fn sub_assign(&mut self, rhs: So3Vector) {
        self.0 -= rhs.0;
    }
}

impl Neg for So3Vector {
    type Output = So3Vector;
    fn neg(self) -> So3Vector {
        So3Vector(-self.0)
    }
}

impl Mul<f64> for So3Vector {
    type Output = So3Vector;
    fn mul(self, s: f64) -> So3Vector {
        So3Vector(self.0 * s)
    }
}

impl Mul<So3Vector> for f64 {
    type Output = So3Vector;
    fn mul(self, v: So3Vector) -> So3Vector {
        So3Vector(v.0 * self)
    }
}

impl Div<f64> for So3Vector {
    type Output = So3Vector;
    fn div(self, s: f64) -> So3Vector {
        So3Vector(self.0 / s)
    }
}

impl Mul<So3Vector> for LinearMap {
    type Output = So3Vector;
    fn mul(self, v: So3Vector) -> So3Vector {
        So3Vector(self * v.0)
    }
}

impl Mul<So3Vector> for &LinearMap {
    type Output = So3Vector;
    fn mul(self, v: So3Vector) -> So3Vector {
        So3Vector(self * v.0)
    }
}

/// Element of SO(3).
///
/// Constructors that take arbitrary matrices go through [`renormalize`]; the
/// closed-form constructors in this module produce rotations directly.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    pub(crate) fn from_rows_unchecked(r0: So3Vector, r1: So3Vector, r2: So3Vector) -> Self {
        Rotation(Matrix3::from_rows(&[
            r0.0.transpose(),
            r1.0.transpose(),
            r2.0.transpose(),
        ]))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn row(&self, i: usize) -> So3Vector {
        So3Vector(self.0.row(i).transpose())
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Frobenius norm of RᵀR − I.
    pub fn orthogonality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).norm()
    }

    /// Checks RᵀR = I and det R = 1 to within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.orthogonality_error() <= tol && (self.determinant() - 1.0).abs() <= tol
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> [f64; 9] {
        let r = self.rows();
        [
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        ]
    }

    /// Rotates a vector: R·v.
    pub fn apply(&self, v: So3Vector) -> So3Vector {
        So3Vector(self.0 * v.0)
    }
}

impl fmt::Debug for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rotation{:?}", self.rows())
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl TryFrom<[[f64; 3]; 3]> for Rotation {
    type Error = Error;
    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self> {
        let m = Matrix3::from_fn(|i, j| rows[i][j]);
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("rotation"));
        }
        renormalize(&m)
    }
}

impl From<Rotation> for [[f64; 3]; 3] {
    fn from(r: Rotation) -> Self {
        r.rows()
    }
}

/// Positively oriented orthonormal frame adapted to a nonzero D = d·F₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub f0: So3Vector,
    pub f1: So3Vector,
    pub f2: So3Vector,
    pub d: f64,
}

impl Frame {
    /// Builds the frame for direction `D`.
    ///
    /// F₁ is the projection onto F₀⊥ of the standard basis vector least aligned with
    /// F₀ (lowest index wins ties), so the result is deterministic in `D`.
    pub fn from_d(d_vec: So3Vector) -> Result<Frame> {
        let d = d_vec.norm();
        if !d_vec.is_finite() {
            return Err(Error::NonFinite("D"));
        }
        if d <= 1e-12 {
            return Err(Error::ZeroDirection { norm: d });
        }
        let f0 = d_vec / d;
        let pick = (0..3)
            .min_by(|&a, &b| f0[a].abs().total_cmp(&f0[b].abs()))
            .unwrap_or(0);
        let e = So3Vector::basis(pick);
        let p = e - f0 * f0.dot(&e);
        let f1 = p / p.norm();
        let f2 = f0.cross(&f1);
        Ok(Frame { f0, f1, f2, d })
    }

    /// D = d·F₀.
    pub fn direction(&self) -> So3Vector {
        self.f0 * self.d
    }

    /// ĩ = ad(F₀).
    pub fn i_tilde(&self) -> LinearMap {
        ad_matrix(self.f0)
    }

    /// Matrix whose columns are F₀, F₁, F₂.
    pub fn basis_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.f0.0, self.f1.0, self.f2.0])
    }

    /// Coordinates of `v` in (F₀, F₁, F₂).
    pub fn coords(&self, v: So3Vector) -> [f64; 3] {
        [v.dot(&self.f0), v.dot(&self.f1), v.dot(&self.f2)]
    }

    pub fn from_coords(&self, c: [f64; 3]) -> So3Vector {
        self.f0 * c[0] + self.f1 * c[1] + self.f2 * c[2]
    }

    /// Component of `v` orthogonal to F₀.
    pub fn perp(&self, v: So3Vector) -> So3Vector {
        v - self.f0 * v.dot(&self.f0)
    }

    /// Expresses a linear map in frame coordinates: Pᵀ·M·P.
    pub fn to_frame_coords(&self, m: &LinearMap) -> Matrix3<f64> {
        let p = self.basis_matrix();
        p.transpose() * m * p
    }

    /// Largest deviation from orthonormality and from the bracket relations
    /// [F₀,F₁] = F₂, [F₂,F₀] = F₁.
    pub fn defect(&self) -> f64 {
        let g = self.basis_matrix().transpose() * self.basis_matrix() - Matrix3::identity();
        let b1 = (bracket(self.f0, self.f1) - self.f2).norm();
        let b2 = (bracket(self.f2, self.f0) - self.f1).norm();
        g.amax().max(b1).max(b2)
    }
}

/// Lie bracket on so(3) ≅ E³: the cross product.
pub fn bracket(u: So3Vector, v: So3Vector) -> So3Vector {
    u.cross(&v)
}

/// Skew-symmetric matrix of `w ↦ v × w`.
pub fn ad_matrix(v: So3Vector) -> LinearMap {
    let [x, y, z] = v.components();
    Matrix3::new(0.0, -z, y, z, 0.0, -x, -y, x, 0.0)
}

/// Exponential of `ad(v)` by the Rodrigues formula.
pub fn rot_exp(v: So3Vector) -> Rotation {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    // sin θ / θ and (1 − cos θ) / θ², with Taylor fallbacks near zero.
    let (a, b) = if theta < 1e-4 {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = ad_matrix(v);
    Rotation(Matrix3::identity() + k * a + k * k * b)
}

/// ẽ(t) = exp(−d(t−t₀) ad(F₀)).
pub fn tilde_e(frame: &Frame, t: f64, t0: f64) -> LinearMap {
    rot_exp(frame.f0 * (-frame.d * (t - t0))).0
}

/// Clockwise rotation by `r` in the first two coordinates.
pub fn rotation_r(r: f64) -> Rotation {
    let (s, c) = r.sin_cos();
    Rotation(Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0))
}

/// The moving frame S(X₁, X₂): an orthonormal, positively oriented matrix whose
/// third row is X₁/‖X₁‖, second row is along X₁ × X₂, and first row is the unit
/// component of X₂ orthogonal to X₁.
pub fn frame_s(x1: So3Vector, x2: So3Vector) -> Result<Rotation> {
    let n1 = x1.norm();
    let n2 = x2.norm();
    let inner = x1.dot(&x2);
    let gram = n1 * n1 * n2 * n2 - inner * inner;
    let threshold = FRAME_GRAM_TOLERANCE * (n1 * n2).powi(2);
    if !(gram > threshold) {
        return Err(Error::DegenerateFrame { gram, threshold });
    }
    let root = gram.sqrt();
    // (‖X₁‖²X₂ − ⟨X₁,X₂⟩X₁)/(‖X₁‖√G) reduces to the familiar
    // (‖X₁‖X₂ − ⟨X₁,X₂⟩X₁)/√G whenever ‖X₁‖ = 1 or X₁ ⊥ X₂.
    let r0 = (x2 * (n1 * n1) - x1 * inner) / (n1 * root);
    let r1 = x1.cross(&x2) / root;
    let r2 = x1 / n1;
    Ok(Rotation::from_rows_unchecked(r0, r1, r2))
}

/// T(W)(t) = S(W(t), W⁽¹⁾(t)).
pub fn frame_t<W: So3Curve + ?Sized>(w: &W, t: f64) -> Result<Rotation> {
    frame_s(w.eval(t, 0), w.eval(t, 1))
}

/// Nearest rotation to `m` by modified Gram–Schmidt on the rows, followed by a
/// determinant sign fix.
pub fn renormalize(m: &Matrix3<f64>) -> Result<Rotation> {
    let deviation = (m.transpose() * m - Matrix3::identity()).norm();
    if !(deviation < 0.1) {
        return Err(Error::NotNearRotation { deviation });
    }
    let mut rows = [
        So3Vector(m.row(0).transpose()),
        So3Vector(m.row(1).transpose()),
        So3Vector(m.row(2).transpose()),
    ];
    for i in 0..3 {
        for j in 0..i {
            let proj = rows[i].dot(&rows[j]);
            rows[i] -= rows[j] * proj;
        }
        let n = rows[i].norm();
        rows[i] = rows[i] / n;
    }
    let mut r = Rotation::from_rows_unchecked(rows[0], rows[1], rows[2]);
    if r.determinant() < 0.0 {
        r = Rotation::from_rows_unchecked(rows[0], rows[1], -rows[2]);
    }
    Ok(r)
}
