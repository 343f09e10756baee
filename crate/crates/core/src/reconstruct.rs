//! Reconstruction of a Riemannian cubic from its Lie quadratic by one quadrature.
//!
//! With c = ‖V''‖² and C the conserved constant of the quadratic,
//!
//! ```text
//! φ(t) = √c ∫_{t₀}^{t} (c − ⟨C, V''(s)⟩) / ‖V'''(s)‖² ds
//! y(t) = R_{φ(t)} · S(V''(t), V'''(t))
//! x(t) = x(t₀) · y(t₀)ᵀ · y(t)
//! ```
//!
//! For nearly constant quadratics the first-order approximant replaces φ by a
//! closed form φ̂ and V by V̂₂, giving x̂ without any quadrature.

use crate::algebra::{frame_s, rotation_r, Rotation};
use crate::approx::{ApproxParams, SecondOrder};
use crate::curve::So3Curve;
use crate::error::{Error, Result};
use crate::ode::{QuadraticSample, QuadraticTrajectory, RotationTrajectory};
use crate::quadrature::simpson_panel;

/// c must exceed this for the reconstruction to apply.
pub const MIN_ACCEL: f64 = 1e-12;
/// ‖V'''‖ must exceed this everywhere on the interval.
pub const MIN_THIRD_DERIVATIVE: f64 = 1e-10;

/// A Lie quadratic trajectory prepared for reconstruction: the cumulative angle
/// φ at each grid node is computed once.
#[derive(Clone, Debug)]
pub struct ReconstructionInput {
    pub trajectory: QuadraticTrajectory,
    pub x0: Rotation,
    phi_nodes: Vec<f64>,
}

impl ReconstructionInput {
    pub fn new(trajectory: QuadraticTrajectory, x0: Rotation) -> Result<Self> {
        if !(trajectory.accel > MIN_ACCEL) {
            return Err(Error::DegenerateAcceleration {
                c: trajectory.accel,
            });
        }
        let mut phi_nodes = Vec::with_capacity(trajectory.len());
        phi_nodes.push(0.0);
        let mut left = phi_rate(&trajectory, trajectory.t0(), &trajectory.samples[0])?;
        for k in 1..trajectory.len() {
            let (ta, tb) = (trajectory.times[k - 1], trajectory.times[k]);
            let tm = 0.5 * (ta + tb);
            let mid = phi_rate(&trajectory, tm, &trajectory.sample_at(tm))?;
            let right = phi_rate(&trajectory, tb, &trajectory.samples[k])?;
            phi_nodes.push(phi_nodes[k - 1] + simpson_panel(tb - ta, left, mid, right));
            left = right;
        }
        Ok(ReconstructionInput {
            trajectory,
            x0,
            phi_nodes,
        })
    }

    pub fn t0(&self) -> f64 {
        self.trajectory.t0()
    }

    /// φ at the grid nodes.
    pub fn phi_at_nodes(&self) -> &[f64] {
        &self.phi_nodes
    }
}

/// φ'(t) = √c (c − ⟨C, V''⟩)/‖V'''‖², with V''' = [V'', V] from the equation.
fn phi_rate(traj: &QuadraticTrajectory, t: f64, s: &QuadraticSample) -> Result<f64> {
    let v3 = s.v3();
    let n = v3.norm();
    if !(n > MIN_THIRD_DERIVATIVE) {
        return Err(Error::DegenerateThirdDerivative { t, norm: n });
    }
    let c = traj.accel;
    Ok(c.sqrt() * (c - traj.c_const.dot(&s.v2)) / (n * n))
}

/// φ(t): cumulative Simpson on the grid plus one Simpson panel with a
/// Hermite-interpolated midpoint for the partial interval.
pub fn phi_numeric(input: &ReconstructionInput, t: f64) -> Result<f64> {
    let traj = &input.trajectory;
    let (a, b) = (traj.t0(), traj.t1());
    let slack = 1e-9 * (b - a).max(1.0);
    if !(t >= a - slack && t <= b + slack) {
        return Err(Error::OutOfRange { t, t0: a, t1: b });
    }
    let t = t.clamp(a, b);
    let i = traj.times.partition_point(|&x| x <= t).saturating_sub(1);
    let ti = traj.times[i];
    if t == ti {
        return Ok(input.phi_nodes[i]);
    }
    let tm = 0.5 * (ti + t);
    let left = phi_rate(traj, ti, &traj.samples[i])?;
    let mid = phi_rate(traj, tm, &traj.sample_at(tm))?;
    let right = phi_rate(traj, t, &traj.sample_at(t))?;
    Ok(input.phi_nodes[i] + simpson_panel(t - ti, left, mid, right))
}

fn y_frame(phi: f64, s: &QuadraticSample) -> Result<Rotation> {
    Ok(rotation_r(phi) * frame_s(s.v2, s.v3())?)
}

/// x on the trajectory grid, with x(t₀) = x0.
pub fn reconstruct_cubic(input: &ReconstructionInput) -> Result<RotationTrajectory> {
    let traj = &input.trajectory;
    let y0 = y_frame(0.0, &traj.samples[0])?;
    let base = input.x0 * y0.transpose();
    let mut rotations = Vec::with_capacity(traj.len());
    rotations.push(input.x0);
    for k in 1..traj.len() {
        rotations.push(base * y_frame(input.phi_nodes[k], &traj.samples[k])?);
    }
    Ok(RotationTrajectory {
        times: traj.times.clone(),
        rotations,
    })
}

/// The trigonometric part shared by both forms of φ̂.
fn oscillation(p: &ApproxParams, t: f64) -> f64 {
    let u = p.d() * (t - p.t0);
    p.a11 * ((p.gamma - u).cos() - p.gamma.cos()) + p.a12 * ((p.gamma - u).sin() - p.gamma.sin())
}

/// φ̂(t) = δ√(ρ²+1)((t−t₀)β + (a₁₁(cos(γ−u) − cos γ) + a₁₂(sin(γ−u) − sin γ))/d²),
/// u = d(t−t₀).
pub fn phi_hat(p: &ApproxParams, t: f64) -> Result<f64> {
    let rho = p.rho().ok_or(Error::DegenerateB)?;
    let d2 = p.d() * p.d();
    Ok(p.delta * (rho * rho + 1.0).sqrt() * ((t - p.t0) * p.beta + oscillation(p, t) / d2))
}

/// φ̂ written through ĉ: δ√(4c₂² + d⁴β²)((t−t₀)/d² + (…)/(d⁴β)).
pub fn phi_hat_root_c_form(p: &ApproxParams, t: f64) -> Result<f64> {
    if p.is_b_degenerate() {
        return Err(Error::DegenerateB);
    }
    let d2 = p.d() * p.d();
    let root = (4.0 * p.c2 * p.c2 + d2 * d2 * p.beta * p.beta).sqrt();
    Ok(p.delta * root * ((t - p.t0) / d2 + oscillation(p, t) / (d2 * d2 * p.beta)))
}

/// The quadrature-free first-order cubic x̂, prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct FirstOrderCubic {
    v2: SecondOrder,
    x0: Rotation,
    base: Rotation,
}

impl FirstOrderCubic {
    pub fn new(p: &ApproxParams, x0: Rotation) -> Result<Self> {
        if p.is_b_degenerate() {
            return Err(Error::DegenerateB);
        }
        let v2 = SecondOrder::new(*p);
        let y0 = hat_y(&v2, p.t0)?;
        Ok(FirstOrderCubic {
            base: x0 * y0.transpose(),
            v2,
            x0,
        })
    }

    pub fn at(&self, t: f64) -> Result<Rotation> {
        if t == self.v2.params.t0 {
            return Ok(self.x0);
        }
        Ok(self.base * hat_y(&self.v2, t)?)
    }

    pub fn sample(&self, times: &[f64]) -> Result<RotationTrajectory> {
        let rotations = times
            .iter()
            .map(|&t| self.at(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(RotationTrajectory {
            times: times.to_vec(),
            rotations,
        })
    }
}

/// ŷ(t) = R_{φ̂(t)} · S(X₁, X₂) with X₁ = V̂₂''/δ and X₂ = V̂₂'''/δ.
fn hat_y(v2: &SecondOrder, t: f64) -> Result<Rotation> {
    let p = &v2.params;
    let x1 = v2.eval(t, 2) / p.delta;
    let x2 = v2.eval(t, 3) / p.delta;
    Ok(rotation_r(phi_hat(p, t)?) * frame_s(x1, x2)?)
}

/// x̂(t) = x0 · ŷ(t₀)ᵀ · ŷ(t).
pub fn x_hat(p: &ApproxParams, x0: Rotation, t: f64) -> Result<Rotation> {
    FirstOrderCubic::new(p, x0)?.at(t)
}

/// (‖R₁ − R₂‖_F, geodesic angle between R₁ and R₂).
pub fn so3_distance(r1: &Rotation, r2: &Rotation) -> (f64, f64) {
    let frob = (r1.matrix() - r2.matrix()).norm();
    let cos = (((r1.transpose() * *r2).matrix().trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    // acos loses precision near 0; the chordal distance recovers it.
    let angle = if cos > 0.99 {
        2.0 * (frob / 8f64.sqrt()).asin()
    } else {
        cos.acos()
    };
    (frob, angle)
}
