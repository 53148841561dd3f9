use serde::{Deserialize, Serialize};

/// Gains and numerical settings of the continuous layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlParams {
    /// Goal attraction gain of the navigation function.
    pub k1: f64,
    /// Obstacle barrier gain of the navigation function.
    pub k2: f64,
    pub k_phi: f64,
    pub k_v: f64,
    pub k_m: f64,
    pub k_alpha: f64,
    /// Target point-world clearance; reduced automatically in tight geometry.
    pub r_bar: f64,
    /// Barrier influence radius on squared distances; `None` means `r_bar²`.
    pub tau: Option<f64>,
    pub dt: f64,
    /// Simulated seconds allowed per motion.
    pub timeout: f64,
    /// Arrival requires speed below this value (m/s).
    pub arrival_speed: f64,
    pub m_hat0: f64,
    pub alpha_hat0: f64,
    pub m_cap: f64,
    pub alpha_cap: f64,
    /// Step (s) of the directional finite difference giving `v̇_d`.
    pub fd_delta: f64,
    /// Per-robot load sharing inside a coalition; `None` splits evenly.
    pub load_sharing: Option<Vec<f64>>,
    /// Keep every n-th integration step in trajectory logs.
    pub log_every: usize,
}

impl Default for ControlParams {
    fn default() -> Self {
        ControlParams {
            k1: 0.01,
            k2: 5.0,
            k_phi: 1.0,
            k_v: 1.0,
            k_m: 0.01,
            k_alpha: 0.01,
            r_bar: 0.1,
            tau: None,
            dt: 1e-3,
            timeout: 120.0,
            arrival_speed: 1e-2,
            m_hat0: 0.0,
            alpha_hat0: 0.0,
            m_cap: 100.0,
            alpha_cap: 100.0,
            fd_delta: 1e-6,
            load_sharing: None,
            log_every: 100,
        }
    }
}

impl ControlParams {
    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.r_bar * self.r_bar)
    }

    /// Names of parameters that must be positive but are not.
    pub fn invalid_fields(&self) -> Vec<&'static str> {
        let checks = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k_phi", self.k_phi),
            ("k_v", self.k_v),
            ("k_m", self.k_m),
            ("k_alpha", self.k_alpha),
            ("r_bar", self.r_bar),
            ("tau", self.tau()),
            ("dt", self.dt),
            ("timeout", self.timeout),
            ("arrival_speed", self.arrival_speed),
            ("m_cap", self.m_cap),
            ("alpha_cap", self.alpha_cap),
            ("fd_delta", self.fd_delta),
        ];
        let mut bad: Vec<&'static str> = checks
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(n, _)| *n)
            .collect();
        if self.log_every == 0 {
            bad.push("log_every");
        }
        bad
    }
}
