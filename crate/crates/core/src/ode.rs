//! Integration of Lie quadratics and of the cubics they reduce.

use std::fmt::Write as _;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::algebra::{ad_matrix, bracket, renormalize, rot_exp, Rotation, So3Vector};
use crate::curve::So3Curve;
use crate::error::{Error, Result};

/// ‖C‖ at or below this value classifies a Lie quadratic as null.
pub const NULL_THRESHOLD: f64 = 1e-12;

/// Drift of c = ‖V''‖² beyond which [`integrate_quadratic`] rejects the step.
pub const MAX_ACCEL_DRIFT: f64 = 1e-6;

/// Default renormalization cadence for [`integrate_cubic`].
pub const DEFAULT_RENORM_EVERY: usize = 16;

/// C = V'' − [V', V], the constant of the Lie quadratic through (V, V', V'').
pub fn compute_c(v: So3Vector, v1: So3Vector, v2: So3Vector) -> So3Vector {
    v2 - bracket(v1, v)
}

pub fn is_null(c: So3Vector) -> bool {
    c.norm() <= NULL_THRESHOLD
}

/// Initial data for V''' = [V'', V] on [t0, t1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticIvp {
    pub t0: f64,
    pub t1: f64,
    pub v0: So3Vector,
    pub v1: So3Vector,
    pub v2: So3Vector,
}

impl QuadraticIvp {
    pub fn new(t0: f64, t1: f64, v0: So3Vector, v1: So3Vector, v2: So3Vector) -> Result<Self> {
        let ivp = QuadraticIvp { t0, t1, v0, v1, v2 };
        ivp.validate()?;
        Ok(ivp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 < self.t1) {
            return Err(Error::InvalidInterval {
                t0: self.t0,
                t1: self.t1,
            });
        }
        if !(self.v0.is_finite() && self.v1.is_finite() && self.v2.is_finite()) {
            return Err(Error::NonFinite("initial conditions"));
        }
        Ok(())
    }

    pub fn c_const(&self) -> So3Vector {
        compute_c(self.v0, self.v1, self.v2)
    }
}

/// (V, V', V'') at one grid time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSample {
    pub v: So3Vector,
    pub v1: So3Vector,
    pub v2: So3Vector,
}

impl QuadraticSample {
    /// V''' = [V'', V], exact along solutions.
    pub fn v3(&self) -> So3Vector {
        bracket(self.v2, self.v)
    }

    fn axpy(&self, h: f64, k: &QuadraticSample) -> QuadraticSample {
        QuadraticSample {
            v: self.v + k.v * h,
            v1: self.v1 + k.v1 * h,
            v2: self.v2 + k.v2 * h,
        }
    }

    fn rhs(&self) -> QuadraticSample {
        QuadraticSample {
            v: self.v1,
            v1: self.v2,
            v2: self.v3(),
        }
    }
}

/// Solution of a Lie quadratic IVP on a uniform grid, with cubic-Hermite dense
/// output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTrajectory {
    pub times: Vec<f64>,
    pub samples: Vec<QuadraticSample>,
    /// C, recorded at the initial point.
    pub c_const: So3Vector,
    /// c = ⟨V'', V''⟩, recorded at the initial point.
    pub accel: f64,
}

/// Number of uniform steps covering `length` with spacing at most `step`.
pub(crate) fn step_count(length: f64, step: f64) -> usize {
    ((length / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Integrates V''' = [V'', V] with classic fixed-step RK4.
///
/// The step is shrunk so that a whole number of steps covers [t0, t1].
pub fn integrate_quadratic(ivp: &QuadraticIvp, step: f64) -> Result<QuadraticTrajectory> {
    ivp.validate()?;
    let length = ivp.t1 - ivp.t0;
    if !(step > 0.0 && step <= length) {
        return Err(Error::InvalidStep { step, length });
    }
    let n = step_count(length, step);
    let h = length / n as f64;

    let mut y = QuadraticSample {
        v: ivp.v0,
        v1: ivp.v1,
        v2: ivp.v2,
    };
    let mut times = Vec::with_capacity(n + 1);
    let mut samples = Vec::with_capacity(n + 1);
    times.push(ivp.t0);
    samples.push(y);
    for k in 1..=n {
        let k1 = y.rhs();
        let k2 = y.axpy(0.5 * h, &k1).rhs();
        let k3 = y.axpy(0.5 * h, &k2).rhs();
        let k4 = y.axpy(h, &k3).rhs();
        y = QuadraticSample {
            v: y.v + (k1.v + k2.v * 2.0 + k3.v * 2.0 + k4.v) * (h / 6.0),
            v1: y.v1 + (k1.v1 + k2.v1 * 2.0 + k3.v1 * 2.0 + k4.v1) * (h / 6.0),
            v2: y.v2 + (k1.v2 + k2.v2 * 2.0 + k3.v2 * 2.0 + k4.v2) * (h / 6.0),
        };
        if !y.v.is_finite() || !y.v2.is_finite() {
            return Err(Error::NonFinite("quadratic trajectory"));
        }
        times.push(if k == n {
            ivp.t1
        } else {
            ivp.t0 + h * k as f64
        });
        samples.push(y);
    }

    let traj = QuadraticTrajectory {
        times,
        samples,
        c_const: ivp.c_const(),
        accel: ivp.v2.norm_squared(),
    };
    let (_, drift) = traj.conservation_drift();
    if drift > MAX_ACCEL_DRIFT {
        return Err(Error::StepTooLarge {
            drift,
            limit: MAX_ACCEL_DRIFT,
        });
    }
    Ok(traj)
}

fn hermite(
    t: f64,
    t0: f64,
    t1: f64,
    y0: So3Vector,
    m0: So3Vector,
    y1: So3Vector,
    m1: So3Vector,
) -> So3Vector {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m0 * (h * (s3 - 2.0 * s2 + s))
        + y1 * (3.0 * s2 - 2.0 * s3)
        + m1 * (h * (s3 - s2))
}

impl QuadraticTrajectory {
    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory has at least two points")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_null(&self) -> bool {
        is_null(self.c_const)
    }

    /// Index of the grid interval containing `t` (clamped to the ends).
    fn interval(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(self.times.len() - 2)
    }

    /// Dense sample at `t` via cubic Hermite interpolation of V, V' and V''.
    pub fn sample_at(&self, t: f64) -> QuadraticSample {
        let i = self.interval(t);
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        QuadraticSample {
            v: hermite(t, ta, tb, a.v, a.v1, b.v, b.v1),
            v1: hermite(t, ta, tb, a.v1, a.v2, b.v1, b.v2),
            v2: hermite(t, ta, tb, a.v2, a.v3(), b.v2, b.v3()),
        }
    }

    /// Largest deviations max‖C(t) − C(t₀)‖ and max|c(t) − c(t₀)| over the grid.
    pub fn conservation_drift(&self) -> (f64, f64) {
        self.samples.iter().fold((0.0f64, 0.0f64), |(dc, da), s| {
            let c = compute_c(s.v, s.v1, s.v2);
            (
                dc.max((c - self.c_const).norm()),
                da.max((s.v2.norm_squared() - self.accel).abs()),
            )
        })
    }

    /// Sup-norms of V' and V'' over the grid; small values mean nearly geodesic.
    pub fn geodesic_gauge(&self) -> (f64, f64) {
        self.samples.iter().fold((0.0f64, 0.0f64), |(a, b), s| {
            (a.max(s.v1.norm()), b.max(s.v2.norm()))
        })
    }

    /// Interpolated samples at the given times.
    pub fn resample(&self, times: &[f64]) -> Vec<(f64, QuadraticSample)> {
        times.iter().map(|&t| (t, self.sample_at(t))).collect()
    }

    /// CSV with columns t, V, V1, V2 (three components each) over the grid.
    pub fn to_csv(&self) -> String {
        let rows: Vec<_> = self
            .times
            .iter()
            .copied()
            .zip(self.samples.iter().copied())
            .collect();
        quadratic_csv(&rows)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: &'static str,
            #[serde(flatten)]
            trajectory: &'a QuadraticTrajectory,
        }
        serde_json::to_string(&Doc {
            schema: QUADRATIC_SCHEMA,
            trajectory: self,
        })
        .expect("trajectory serializes")
    }
}

pub const QUADRATIC_SCHEMA: &str = "so3-cubics/quadratic-trajectory/1";
pub const ROTATION_SCHEMA: &str = "so3-cubics/rotation-trajectory/1";

/// CSV text for (t, sample) rows; see [`QuadraticTrajectory::to_csv`].
pub fn quadratic_csv(rows: &[(f64, QuadraticSample)]) -> String {
    let mut out = String::from("t,v_x,v_y,v_z,v1_x,v1_y,v1_z,v2_x,v2_y,v2_z\n");
    for (t, s) in rows {
        let _ = write!(out, "{t}");
        for v in [s.v, s.v1, s.v2] {
            for c in v.components() {
                let _ = write!(out, ",{c}");
            }
        }
        out.push('\n');
    }
    out
}

/// Dense evaluation of a trajectory: order 0–2 by Hermite interpolation, order 3
/// from the equation itself.
impl So3Curve for QuadraticTrajectory {
    fn eval(&self, t: f64, order: usize) -> So3Vector {
        let s = self.sample_at(t);
        match order {
            0 => s.v,
            1 => s.v1,
            2 => s.v2,
            3 => s.v3(),
            // V'''' = [V''', V] + [V'', V'], and so on; orders past 4 are not needed.
            4 => bracket(s.v3(), s.v) + bracket(s.v2, s.v1),
            _ => panic!("QuadraticTrajectory provides derivatives up to order 4"),
        }
    }

    fn domain(&self) -> Option<(f64, f64)> {
        Some((self.t0(), self.t1()))
    }
}

/// Curve in SO(3) sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationTrajectory {
    pub times: Vec<f64>,
    pub rotations: Vec<Rotation>,
}

impl RotationTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Rotation at `t`: the grid sample when `t` is (numerically) a grid time,
    /// otherwise linear interpolation of the neighbouring samples, renormalized.
    pub fn at(&self, t: f64) -> Rotation {
        let n = self.times.len();
        if n == 1 {
            return self.rotations[0];
        }
        let i = self
            .times
            .partition_point(|&x| x <= t)
            .saturating_sub(1)
            .min(n - 2);
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        if s.abs() < 1e-9 {
            return self.rotations[i];
        }
        if (s - 1.0).abs() < 1e-9 {
            return self.rotations[i + 1];
        }
        let m = self.rotations[i].matrix() * (1.0 - s) + self.rotations[i + 1].matrix() * s;
        renormalize(&m).expect("neighbouring samples are close")
    }

    /// Second row of every sample, the curve on S² traced by the body's second axis.
    pub fn second_rows(&self) -> Vec<So3Vector> {
        self.rotations.iter().map(|r| r.row(1)).collect()
    }

    /// Worst orthogonality error and worst |det − 1| over the samples.
    pub fn max_invariant_error(&self) -> f64 {
        self.rotations
            .iter()
            .map(|r| r.orthogonality_error().max((r.determinant() - 1.0).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV with columns t, r00..r22 (row-major).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r00,r01,r02,r10,r11,r12,r20,r21,r22\n");
        for (t, r) in self.times.iter().zip(&self.rotations) {
            let _ = write!(out, "{t}");
            for c in r.row_major() {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: &'static str,
            #[serde(flatten)]
            trajectory: &'a RotationTrajectory,
        }
        serde_json::to_string(&Doc {
            schema: ROTATION_SCHEMA,
            trajectory: self,
        })
        .expect("trajectory serializes")
    }
}

/// Integrates x' = x·ad(V(t)) from x(t0) = x0 with RK4, renormalizing every
/// [`DEFAULT_RENORM_EVERY`] steps.
pub fn integrate_cubic<C: So3Curve + ?Sized>(
    x0: Rotation,
    v: &C,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<RotationTrajectory> {
    integrate_cubic_with(x0, v, t0, t1, step, DEFAULT_RENORM_EVERY)
}

/// [`integrate_cubic`] with an explicit renormalization cadence (0 disables it).
pub fn integrate_cubic_with<C: So3Curve + ?Sized>(
    x0: Rotation,
    v: &C,
    t0: f64,
    t1: f64,
    step: f64,
    renorm_every: usize,
) -> Result<RotationTrajectory> {
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::InvalidInterval { t0, t1 });
    }
    let length = t1 - t0;
    if !(step > 0.0 && step <= length) {
        return Err(Error::InvalidStep { step, length });
    }
    if let Some((a, b)) = v.domain() {
        let slack = 1e-9 * (b - a).abs().max(1.0);
        if t0 < a - slack || t1 > b + slack {
            return Err(Error::OutOfRange {
                t: if t0 < a { t0 } else { t1 },
                t0: a,
                t1: b,
            });
        }
    }
    let n = step_count(length, step);
    let h = length / n as f64;
    let omega = |t: f64| ad_matrix(v.eval(t, 0));

    let mut x: Matrix3<f64> = *x0.matrix();
    let mut times = Vec::with_capacity(n + 1);
    let mut rotations = Vec::with_capacity(n + 1);
    times.push(t0);
    rotations.push(x0);
    let mut t = t0;
    let mut w_start = omega(t);
    for k in 1..=n {
        let w_mid = omega(t + 0.5 * h);
        let t_next = if k == n { t1 } else { t0 + h * k as f64 };
        let w_end = omega(t_next);
        let k1 = x * w_start;
        let k2 = (x + k1 * (0.5 * h)) * w_mid;
        let k3 = (x + k2 * (0.5 * h)) * w_mid;
        let k4 = (x + k3 * h) * w_end;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if renorm_every > 0 && (k % renorm_every == 0 || k == n) {
            x = *renormalize(&x)?.matrix();
        }
        times.push(t_next);
        // Emitted samples are always projected onto SO(3); the state itself is
        // only renormalized on the cadence above.
        rotations.push(renormalize(&x)?);
        t = t_next;
        w_start = w_end;
    }
    Ok(RotationTrajectory { times, rotations })
}

/// Left Lie reduction of t ↦ exp(tA)·exp(tB): Ad(exp(−tB))A + B.
pub fn product_curve_v(a: So3Vector, b: So3Vector, t: f64) -> So3Vector {
    rot_exp(b * -t).apply(a) + b
}

/// t ↦ exp(tA)·exp(tB) together with its left Lie reduction and all derivatives.
#[derive(Clone, Copy, Debug)]
pub struct ProductCurve {
    pub a: So3Vector,
    pub b: So3Vector,
}

impl ProductCurve {
    pub fn rotation(&self, t: f64) -> Rotation {
        rot_exp(self.a * t) * rot_exp(self.b * t)
    }
}

impl So3Curve for ProductCurve {
    fn eval(&self, t: f64, order: usize) -> So3Vector {
        // W = Ad(exp(−tB))A satisfies W' = −[B, W].
        let mut w = rot_exp(self.b * -t).apply(self.a);
        for _ in 0..order {
            w = -bracket(self.b, w);
        }
        if order == 0 {
            w + self.b
        } else {
            w
        }
    }
}

/// sup over `grid` of ‖V''' − [V'', V]‖ using the curve's own derivatives.
pub fn quadratic_residual<C: So3Curve + ?Sized>(v: &C, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&t| (v.eval(t, 3) - bracket(v.eval(t, 2), v.eval(t, 0))).norm())
        .fold(0.0, f64::max)
}

/// Residual of V''' = [V'', V] for values sampled on a uniform grid of spacing
/// `h`, with V'' and V''' from fourth-order central differences. The three points
/// at each end, where the seven-point stencil does not fit, are skipped.
pub fn sampled_quadratic_residual(values: &[So3Vector], h: f64) -> f64 {
    let n = values.len();
    if n < 7 {
        return 0.0;
    }
    let f = |i: usize| values[i];
    (3..n - 3)
        .map(|i| {
            let v2 = (f(i - 2) * -1.0 + f(i - 1) * 16.0 - f(i) * 30.0 + f(i + 1) * 16.0 - f(i + 2))
                / (12.0 * h * h);
            let v3 = (f(i - 3) - f(i - 2) * 8.0 + f(i - 1) * 13.0 - f(i + 1) * 13.0
                + f(i + 2) * 8.0
                - f(i + 3))
                / (8.0 * h * h * h);
            (v3 - bracket(v2, f(i))).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn example_51() -> QuadraticIvp {
        QuadraticIvp::new(
            0.0,
            5.0,
            So3Vector::new(1.005, 0.006, -0.01),
            So3Vector::new(-0.005, -0.00449, 0.0),
            So3Vector::new(0.001, -0.005, 0.005),
        )
        .unwrap()
    }

    #[test]
    fn compute_c_examples() {
        let ivp = example_51();
        let c = compute_c(ivp.v0, ivp.v1, ivp.v2);
        assert!((c - So3Vector::new(0.0009551, -0.00495, 0.00051755)).norm() < 1e-12);
        assert!(!is_null(c));

        let d = So3Vector::new(0.3, -0.2, 1.0);
        assert!(is_null(compute_c(
            d,
            So3Vector::zeros(),
            So3Vector::zeros()
        )));
        // Affine line t·D through the origin, at t = 0.
        assert!(is_null(compute_c(
            So3Vector::zeros(),
            d,
            So3Vector::zeros()
        )));
    }

    #[test]
    fn reference_third_derivative_is_reproduced() {
        let ivp = example_51();
        let s = QuadraticSample {
            v: ivp.v0,
            v1: ivp.v1,
            v2: ivp.v2,
        };
        assert!((s.v3() - So3Vector::new(0.00002, 0.005035, 0.005031)).norm() < 1e-12);
    }

    #[test]
    fn constant_data_is_a_geodesic() {
        let d = So3Vector::new(0.7, 0.1, -0.4);
        let ivp = QuadraticIvp::new(0.0, 3.0, d, So3Vector::zeros(), So3Vector::zeros()).unwrap();
        let traj = integrate_quadratic(&ivp, 0.01).unwrap();
        assert!(traj.samples.iter().all(|s| s.v == d));
        assert_eq!(quadratic_residual(&traj, &traj.times), 0.0);
    }

    #[test]
    fn trajectory_preserves_c_on_every_grid_point() {
        let traj = integrate_quadratic(&example_51(), 1e-3).unwrap();
        assert_eq!(traj.len(), 5001);
        assert_eq!(traj.t1(), 5.0);
        let c0 = compute_c(traj.samples[0].v, traj.samples[0].v1, traj.samples[0].v2);
        for s in &traj.samples {
            assert!((compute_c(s.v, s.v1, s.v2) - c0).norm() < 1e-9);
        }
        assert!(quadratic_residual(&traj, &traj.times) < 1e-12);
    }

    #[test]
    fn richardson_reference_at_t2() {
        let ivp = QuadraticIvp {
            t1: 2.0,
            ..example_51()
        };
        let coarse = integrate_quadratic(&ivp, 1e-2).unwrap();
        let fine = integrate_quadratic(&ivp, 5e-3).unwrap();
        let (a, b) = (
            coarse.samples.last().unwrap().v,
            fine.samples.last().unwrap().v,
        );
        assert!((a - b).norm() < 1e-10);
        let prod = integrate_quadratic(&QuadraticIvp { t1: 5.0, ..ivp }, 1e-3).unwrap();
        assert!((prod.value(2.0) - b).norm() < 1e-10);
    }

    #[test]
    fn rejects_bad_steps_and_intervals() {
        let ivp = example_51();
        assert!(matches!(
            integrate_quadratic(&ivp, 0.0),
            Err(Error::InvalidStep { .. })
        ));
        assert!(matches!(
            integrate_quadratic(&ivp, 6.0),
            Err(Error::InvalidStep { .. })
        ));
        assert!(matches!(
            QuadraticIvp::new(1.0, 1.0, ivp.v0, ivp.v1, ivp.v2),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn coarse_step_on_large_data_is_rejected() {
        let ivp = QuadraticIvp::new(
            0.0,
            20.0,
            So3Vector::new(3.0, 1.0, -2.0),
            So3Vector::new(2.0, -4.0, 1.0),
            So3Vector::new(5.0, 3.0, 4.0),
        )
        .unwrap();
        let r = integrate_quadratic(&ivp, 0.5);
        assert!(
            matches!(
                r,
                Err(Error::StepTooLarge { .. }) | Err(Error::NonFinite(_))
            ),
            "{r:?}"
        );
    }

    #[test]
    fn hermite_dense_output_is_accurate() {
        let coarse = integrate_quadratic(&example_51(), 1e-2).unwrap();
        let fine = integrate_quadratic(&example_51(), 1e-3).unwrap();
        for t in [0.0137, 1.2345, 4.9991] {
            for k in 0..4 {
                assert!(
                    (coarse.eval(t, k) - fine.eval(t, k)).norm() < 1e-9,
                    "t={t} k={k}"
                );
            }
        }
    }

    #[test]
    fn cubic_with_zero_and_constant_velocity() {
        let x0 = rot_exp(So3Vector::new(0.2, -0.4, 1.0));
        let zero = |_t: f64, _k: usize| So3Vector::zeros();
        let traj = integrate_cubic(x0, &zero, 0.0, 2.0, 1e-2).unwrap();
        assert!(traj
            .rotations
            .iter()
            .all(|r| (r.matrix() - x0.matrix()).amax() < 1e-15));

        let d = So3Vector::new(0.3, 1.1, -0.5);
        let constant = move |_t: f64, k: usize| if k == 0 { d } else { So3Vector::zeros() };
        let traj = integrate_cubic(x0, &constant, 0.5, 3.0, 1e-3).unwrap();
        for (t, r) in traj.times.iter().zip(&traj.rotations) {
            let exact = x0 * rot_exp(d * (t - 0.5));
            assert!((r.matrix() - exact.matrix()).amax() < 1e-9);
        }
    }

    #[test]
    fn cubic_integration_is_left_invariant() {
        let traj = integrate_quadratic(&example_51(), 1e-3).unwrap();
        let x0 = rot_exp(So3Vector::new(0.1, 0.2, 0.3));
        let g = rot_exp(So3Vector::new(-1.0, 0.5, 2.0));
        let a = integrate_cubic(x0, &traj, 0.0, 5.0, 1e-3).unwrap();
        let b = integrate_cubic(g * x0, &traj, 0.0, 5.0, 1e-3).unwrap();
        for (ra, rb) in a.rotations.iter().zip(&b.rotations) {
            assert!(((g * *ra).matrix() - rb.matrix()).amax() < 1e-10);
        }
    }

    #[test]
    fn renormalized_integration_stays_on_so3() {
        let traj = integrate_quadratic(
            &QuadraticIvp {
                t1: 10.0,
                ..example_51()
            },
            1e-3,
        )
        .unwrap();
        let x = integrate_cubic(Rotation::identity(), &traj, 0.0, 10.0, 1e-3).unwrap();
        assert_eq!(x.len(), 10001);
        assert!(x.max_invariant_error() < 1e-12);
        let last = x.rotations.last().unwrap();
        assert!((last.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_rejects_interval_outside_trajectory() {
        let traj = integrate_quadratic(&example_51(), 1e-2).unwrap();
        assert!(matches!(
            integrate_cubic(Rotation::identity(), &traj, 0.0, 6.0, 1e-2),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn product_curve_examples() {
        let a = So3Vector::new(0.3, -0.1, 0.8);
        assert_eq!(
            product_curve_v(a, So3Vector::e2(), 0.0),
            a + So3Vector::e2()
        );
        assert!((product_curve_v(a, So3Vector::zeros(), 2.7) - a).norm() < 1e-15);

        // Finite-difference Lie reduction x⁻¹x' of exp(tA)exp(tB).
        let (a, b) = (So3Vector::e1(), So3Vector::e2());
        let curve = ProductCurve { a, b };
        let t = PI / 2.0;
        let h = 1e-6;
        let dx = (curve.rotation(t + h).matrix() - curve.rotation(t - h).matrix()) / (2.0 * h);
        let w = curve.rotation(t).matrix().transpose() * dx;
        let fd = So3Vector::new(w[(2, 1)], w[(0, 2)], w[(1, 0)]);
        assert!((product_curve_v(a, b, t) - fd).norm() < 1e-8);
        assert!((curve.eval(t, 0) - product_curve_v(a, b, t)).norm() < 1e-15);
    }

    #[test]
    fn product_curve_residuals() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let orthogonal = ProductCurve {
            a: So3Vector::e1(),
            b: So3Vector::new(0.0, 2.0, 0.0),
        };
        assert!(quadratic_residual(&orthogonal, &grid) < 1e-6);
        let skewed = ProductCurve {
            a: So3Vector::e1(),
            b: So3Vector::new(1.0, 1.0, 0.0),
        };
        assert!(quadratic_residual(&skewed, &grid) >= 0.1);
    }

    #[test]
    fn sampled_residual_agrees_with_analytic() {
        let h = 1e-2;
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 * h).collect();
        let orthogonal = ProductCurve {
            a: So3Vector::e1(),
            b: So3Vector::new(0.0, 2.0, 0.0),
        };
        let values: Vec<_> = grid.iter().map(|&t| orthogonal.value(t)).collect();
        assert!(sampled_quadratic_residual(&values, h) < 1e-6);
        let skewed = ProductCurve {
            a: So3Vector::e1(),
            b: So3Vector::new(1.0, 1.0, 0.0),
        };
        let values: Vec<_> = grid.iter().map(|&t| skewed.value(t)).collect();
        let sampled = sampled_quadratic_residual(&values, h);
        let analytic = quadratic_residual(&skewed, &grid[3..grid.len() - 3]);
        assert!((sampled - analytic).abs() < 1e-6);
    }

    #[test]
    fn csv_and_json_shapes() {
        let ivp = QuadraticIvp {
            t1: 0.1,
            ..example_51()
        };
        let traj = integrate_quadratic(&ivp, 0.05).unwrap();
        let csv = traj.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 10);
        let json: serde_json::Value = serde_json::from_str(&traj.to_json()).unwrap();
        assert_eq!(json["schema"], QUADRATIC_SCHEMA);
        assert_eq!(json["times"].as_array().unwrap().len(), 3);

        let x = integrate_cubic(Rotation::identity(), &traj, 0.0, 0.1, 0.05).unwrap();
        let csv = x.to_csv();
        assert!(csv.starts_with("t,r00,r01,r02,r10,r11,r12,r20,r21,r22\n"));
        assert_eq!(csv.lines().nth(1).unwrap(), "0,1,0,0,0,1,0,0,0,1");
        let back: RotationTrajectory = serde_json::from_str(&x.to_json()).unwrap();
        assert_eq!(back.len(), 3);
    }
}
