//! Second-order navigation function on the point world.

use crate::geom::{dot, norm, scale, sub, Point};

use super::transform::smoothstep;
use super::ControlError;

/// Barrier `β(s) = 1/σ(s/τ)` for `s ≤ τ` and `1` beyond, with `β'` and `β''`.
pub fn beta(s: f64, tau: f64) -> Result<(f64, f64, f64), ControlError> {
    if !(s > 0.0) {
        return Err(ControlError::BarrierDomain(s));
    }
    if s >= tau {
        return Ok((1.0, 0.0, 0.0));
    }
    let (p, dp, ddp) = smoothstep(s / tau);
    let b = 1.0 / p;
    let db = -dp / (tau * p * p);
    let ddb = (2.0 * dp * dp - p * ddp) / (tau * tau * p * p * p);
    Ok((b, db, ddb))
}

/// `φ(χ) = k₁‖χ − χ_d‖² + k₂ Σ_ℓ (β(d_ℓ(χ)) − 1)` with `d_ℓ = ‖χ − b_ℓ‖²`
/// and `d₀ = 1 − ‖χ‖²`. The constant is removed so that `φ(χ_d) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NavFn {
    pub points: Vec<Point>,
    pub goal: Point,
    pub k1: f64,
    pub k2: f64,
    pub tau: f64,
}

impl NavFn {
    /// Checks the clearance conditions `‖b_i − b_j‖ > 2r̄`, `1 − ‖b_i‖ > 2r̄`,
    /// `τ ≤ r̄²` and `τ < r̄_d`. Because the clearance inequalities are strict,
    /// `τ = r̄²` still leaves at most one barrier active at any point.
    pub fn new(points: Vec<Point>, goal: Point, k1: f64, k2: f64, tau: f64, r_bar: f64) -> Result<Self, ControlError> {
        for (i, b) in points.iter().enumerate() {
            if 1.0 - norm(*b) <= 2.0 * r_bar || points[i + 1..].iter().any(|c| norm(sub(*b, *c)) <= 2.0 * r_bar) {
                return Err(ControlError::Clearance(r_bar));
            }
        }
        let goal_room = goal_clearance(&points, goal);
        if !(tau > 0.0 && tau <= r_bar * r_bar && tau < goal_room) {
            return Err(ControlError::TauBound {
                tau,
                bound: goal_room.min(r_bar * r_bar),
            });
        }
        Ok(NavFn { points, goal, k1, k2, tau })
    }

    /// Value and gradient at `χ`.
    pub fn eval(&self, chi: Point) -> Result<(f64, Point), ControlError> {
        let e = sub(chi, self.goal);
        let mut value = self.k1 * dot(e, e);
        let mut grad = scale(e, 2.0 * self.k1);
        let (b0, db0, _) = beta(1.0 - dot(chi, chi), self.tau)?;
        value += self.k2 * (b0 - 1.0);
        grad = sub(grad, scale(chi, 2.0 * self.k2 * db0));
        for b in &self.points {
            let rel = sub(chi, *b);
            let (bl, dbl, _) = beta(dot(rel, rel), self.tau)?;
            value += self.k2 * (bl - 1.0);
            grad = crate::geom::add(grad, scale(rel, 2.0 * self.k2 * dbl));
        }
        Ok((value, grad))
    }
}

/// `r̄_d = min(1 − ‖χ_d‖², min_ℓ ‖χ_d − b_ℓ‖²)`.
pub fn goal_clearance(points: &[Point], goal: Point) -> f64 {
    points
        .iter()
        .map(|b| {
            let r = sub(goal, *b);
            dot(r, r)
        })
        .fold(1.0 - dot(goal, goal), f64::min)
}
