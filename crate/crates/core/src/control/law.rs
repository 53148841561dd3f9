//! Reference velocity, adaptive navigation law and load sharing.

use crate::geom::{add, dot, mat_t_vec, norm, scale, solve, sub, Mat2, Point};

use super::navfn::NavFn;
use super::transform::Transform;
use super::ControlError;

/// Controller gains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gains {
    pub k_phi: f64,
    pub k_v: f64,
    pub k_m: f64,
    pub k_alpha: f64,
}

/// Point-world quantities at one position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reference {
    pub chi: Point,
    pub jac: Mat2,
    pub grad: Point,
    pub v_d: Point,
}

/// `v_d = −J_H(x)⁻¹ ∇φ(H(x))`.
pub fn reference_velocity(h: &Transform, f: &NavFn, x: Point) -> Result<Reference, ControlError> {
    let (chi, jac) = h.forward(x)?;
    let (_, grad) = f.eval(chi)?;
    let v = solve(&jac, grad).ok_or(ControlError::SingularJacobian(x))?;
    Ok(Reference {
        chi,
        jac,
        grad,
        v_d: scale(v, -1.0),
    })
}

/// `v̇_d` along the current motion by a forward difference in the direction
/// of the velocity: `(v_d(x + ẋδ) − v_d(x)) / δ`. Above 1 m/s the lookahead
/// is capped at `δ` meters so that fast motion never probes far ahead.
pub fn reference_rate(h: &Transform, f: &NavFn, x: Point, v: Point, v_d: Point, delta: f64) -> Result<Point, ControlError> {
    let speed = norm(v);
    if speed == 0.0 {
        return Ok([0.0, 0.0]);
    }
    let step = delta * speed.min(1.0);
    let ahead = reference_velocity(h, f, add(x, scale(v, step / speed)))?;
    Ok(scale(sub(ahead.v_d, v_d), speed / step))
}

/// `u = −k_φ J_Hᵀ ∇φ + m̂ v̇_d − (k_v + 3/2 α̂) e_v` with `e_v = ẋ − v_d`.
pub fn control_navigation(r: &Reference, vd_dot: Point, v: Point, m_hat: f64, alpha_hat: f64, g: &Gains) -> Point {
    let e_v = sub(v, r.v_d);
    let attract = scale(mat_t_vec(&r.jac, r.grad), -g.k_phi);
    let feedforward = scale(vd_dot, m_hat);
    let damping = scale(e_v, -(g.k_v + 1.5 * alpha_hat));
    add(add(attract, feedforward), damping)
}

/// `(dm̂/dt, dα̂/dt) = (−k_m e_vᵀ v̇_d, k_α ‖e_v‖²)`.
pub fn adaptation_rates(e_v: Point, vd_dot: Point, g: &Gains) -> (f64, f64) {
    (-g.k_m * dot(e_v, vd_dot), g.k_alpha * dot(e_v, e_v))
}

/// Checks load-sharing coefficients: nonnegative and summing to one.
pub fn check_load_sharing(cf: &[f64]) -> Result<(), ControlError> {
    let sum: f64 = cf.iter().sum();
    if cf.is_empty() || cf.iter().any(|c| !(*c >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
        return Err(ControlError::LoadSharing(cf.to_vec()));
    }
    Ok(())
}

/// Per-robot forces `u_ℓ = cf_ℓ · u` of a coalition, where `u` is the
/// navigation law evaluated with the coalition's shared estimates.
///
/// The transport law as printed puts a minus sign in front of the whole
/// bracket, which would flip the feedforward and damping terms relative to
/// the navigation law. The coalition is treated as one entity, so the
/// navigation law's signs are used and only the scaling by `cf_ℓ` differs.
pub fn control_transport(cf: &[f64], u: Point) -> Result<Vec<Point>, ControlError> {
    check_load_sharing(cf)?;
    Ok(cf.iter().map(|&c| scale(u, c)).collect())
}
