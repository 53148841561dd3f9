use serde::{Deserialize, Serialize};

use crate::geom::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrictionKind {
    None,
    /// `c · ẋ`, params `[c]`.
    Viscous,
    /// `g · sin(w (x₁ + x₂)) · diag(exp(-|ẋₖ|) + 1) · ẋ`, params `[g, w]`
    /// (defaults `[1.25, 0.5]`).
    Sinusoidal,
}

/// Ground-truth friction of a robot or object. Controllers never see it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Friction {
    pub kind: FrictionKind,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Default for Friction {
    fn default() -> Self {
        Friction::none()
    }
}

impl Friction {
    pub fn none() -> Self {
        Friction {
            kind: FrictionKind::None,
            params: Vec::new(),
        }
    }

    pub fn viscous(c: f64) -> Self {
        Friction {
            kind: FrictionKind::Viscous,
            params: vec![c],
        }
    }

    pub fn sinusoidal(gain: f64, freq: f64) -> Self {
        Friction {
            kind: FrictionKind::Sinusoidal,
            params: vec![gain, freq],
        }
    }

    fn param(&self, i: usize, default: f64) -> f64 {
        self.params.get(i).copied().unwrap_or(default)
    }

    pub fn force(&self, x: Point, v: Point) -> Point {
        match self.kind {
            FrictionKind::None => [0.0, 0.0],
            FrictionKind::Viscous => {
                let c = self.param(0, 0.0);
                [c * v[0], c * v[1]]
            }
            FrictionKind::Sinusoidal => {
                let s = self.param(0, 1.25) * (self.param(1, 0.5) * (x[0] + x[1])).sin();
                [
                    s * ((-v[0].abs()).exp() + 1.0) * v[0],
                    s * ((-v[1].abs()).exp() + 1.0) * v[1],
                ]
            }
        }
    }

    /// Smallest `α` with `‖f(x, v)‖ ≤ α‖v‖` for all `x, v`.
    pub fn bound(&self) -> f64 {
        match self.kind {
            FrictionKind::None => 0.0,
            FrictionKind::Viscous => self.param(0, 0.0).abs(),
            FrictionKind::Sinusoidal => 2.0 * self.param(0, 1.25).abs(),
        }
    }
}
