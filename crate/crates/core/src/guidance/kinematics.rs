use serde::{Deserialize, Serialize};

/// Planar interceptor state relative to the target. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interceptor {
    /// range, m
    pub r: f64,
    /// line-of-sight angle
    pub theta: f64,
    /// flight-path angle
    pub gamma_m: f64,
    /// speed, m/s
    pub v_m: f64,
}

impl Interceptor {
    /// `δ = γ_M - θ`
    pub fn delta(&self) -> f64 {
        self.gamma_m - self.theta
    }
}

/// Constant-velocity target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub gamma_t: f64,
    pub v_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub r_dot: f64,
    pub theta_dot: f64,
    pub gamma_m_dot: f64,
}

/// `ṙ = V_T cos(γ_T - θ) - V_M cos δ`, `r θ̇ = V_T sin(γ_T - θ) - V_M sin δ`,
/// `γ̇_M = a / V_M`.
pub fn kinematics_derivatives(m: &Interceptor, target: &Target, a_m: f64) -> Derivatives {
    let u = target.gamma_t - m.theta;
    let delta = m.delta();
    Derivatives {
        r_dot: target.v_t * u.cos() - m.v_m * delta.cos(),
        theta_dot: (target.v_t * u.sin() - m.v_m * delta.sin()) / m.r,
        gamma_m_dot: a_m / m.v_m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuidanceCommand {
    /// lateral acceleration after saturation, m/s²
    pub accel: f64,
    pub saturated: bool,
    /// `|θ̇| < 1e-9`: the consensus term was replaced by `±a_max`
    pub singular_los_rate: bool,
}

/// `a = V_M θ̇ + [V_M (V_M² - V_T²) cos²δ / (r² θ̇)] · Σ_j l_ij t_go_j`,
/// clipped to `±a_max`. `coupling` is `Σ_j l_ij t_go_j`.
///
/// With this sign the closed-form time-to-go obeys
/// `d t_go/dt = -1 - Σ_j l_ij t_go_j`, so `t + t_go` follows `ζ̇ = -Lζ`.
pub fn guidance_command(m: &Interceptor, target: &Target, coupling: f64, a_max: f64) -> GuidanceCommand {
    let theta_dot = kinematics_derivatives(m, target, 0.0).theta_dot;
    let pursuit = m.v_m * theta_dot;
    let k = m.v_m * (m.v_m * m.v_m - target.v_t * target.v_t) * m.delta().cos().powi(2) / (m.r * m.r);
    let singular = theta_dot.abs() < 1e-9 && coupling != 0.0;
    let consensus = if coupling == 0.0 {
        0.0
    } else if singular {
        let sign = if theta_dot < 0.0 { -1.0 } else { 1.0 };
        (k * coupling).signum() * sign * a_max
    } else {
        k * coupling / theta_dot
    };
    let raw = pursuit + consensus;
    let accel = raw.clamp(-a_max, a_max);
    GuidanceCommand {
        accel,
        saturated: raw.abs() > a_max,
        singular_los_rate: singular,
    }
}
