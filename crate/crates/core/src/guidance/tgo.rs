use serde::{Deserialize, Serialize};

use super::{GuidanceError, Interceptor, Result, Target};

/// Source of time-to-go estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TgoProvider {
    /// Integrate the constant-`δ` pursuit until capture.
    NumericalOracle,
    /// Exact constant-`δ` pursuit time [`deviated_pursuit_time_to_go`].
    ClosedFormCandidate,
    /// Fixed initial values. A salvo run rescales each initial range so that
    /// the closed form reproduces the table entry, then tracks the closed form.
    InjectedTable(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub capture_radius: f64,
    /// give up after this much simulated time, s
    pub horizon: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            capture_radius: 1.0,
            horizon: 3600.0,
        }
    }
}

/// Time for deviated pursuit with constant `δ` to close from range `r` to
/// zero, where `u = γ_T - θ`:
///
/// `t_go = r (V_M + V_T cos(u + δ)) / ((V_M² - V_T²) cos δ)`.
///
/// Follows from `d/dt [r (V_M + V_T cos(u + δ))] = -(V_M² - V_T²) cos δ`
/// along the pursuit.
pub fn deviated_pursuit_time_to_go(m: &Interceptor, target: &Target) -> Result<f64> {
    let delta = m.delta();
    let u = target.gamma_t - m.theta;
    let k = (m.v_m * m.v_m - target.v_t * target.v_t) * delta.cos();
    if m.v_m <= target.v_t || k <= 0.0 {
        return Err(GuidanceError::NonConvergentPursuit { horizon: f64::INFINITY });
    }
    Ok(m.r * (m.v_m + target.v_t * (u + delta).cos()) / k)
}

/// Integrates `ṙ = V_T cos u - V_M cos δ`, `u̇ = -(V_T sin u - V_M sin δ)/r`
/// with `δ` frozen until `r` drops to the capture radius. Steps are 1% of
/// `r / |ṙ|` so the step count grows only logarithmically with range.
pub fn oracle_time_to_go(m: &Interceptor, target: &Target, settings: OracleSettings) -> Result<f64> {
    let fail = || GuidanceError::NonConvergentPursuit { horizon: settings.horizon };
    if m.v_m <= target.v_t {
        return Err(fail());
    }
    let (v_m, v_t) = (m.v_m, target.v_t);
    let (sd, cd) = m.delta().sin_cos();
    let f = |r: f64, u: f64| (v_t * u.cos() - v_m * cd, -(v_t * u.sin() - v_m * sd) / r);

    let rc = settings.capture_radius;
    let mut r = m.r;
    let mut u = target.gamma_t - m.theta;
    let mut t = 0.0;
    if r <= rc {
        return Ok(0.0);
    }
    // closing speed never needs to be resolved below this floor
    let floor = 1e-3 * (v_m - v_t);
    for _ in 0..10_000_000 {
        if t > settings.horizon {
            break;
        }
        let h = 0.01 * r / f(r, u).0.abs().max(floor);
        let (k1r, k1u) = f(r, u);
        let (k2r, k2u) = f(r + 0.5 * h * k1r, u + 0.5 * h * k1u);
        let (k3r, k3u) = f(r + 0.5 * h * k2r, u + 0.5 * h * k2u);
        let (k4r, k4u) = f(r + h * k3r, u + h * k3u);
        let r_next = r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        let u_next = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        if r_next <= rc {
            return Ok(t + h * (r - rc) / (r - r_next));
        }
        r = r_next;
        u = u_next;
        t += h;
    }
    Err(fail())
}

/// Estimate for one interceptor. Injected tables are indexed by `i`.
pub fn time_to_go(m: &Interceptor, target: &Target, i: usize, provider: &TgoProvider, settings: OracleSettings) -> Result<f64> {
    match provider {
        TgoProvider::NumericalOracle => oracle_time_to_go(m, target, settings),
        TgoProvider::ClosedFormCandidate => deviated_pursuit_time_to_go(m, target),
        TgoProvider::InjectedTable(values) => values
            .get(i)
            .copied()
            .ok_or_else(|| GuidanceError::InvalidConfig(format!("no injected time-to-go for interceptor {}", i + 1))),
    }
}

/// Relative disagreement between the closed form and the oracle. The closed
/// form runs to `r = 0`, so expect a gap of order `capture_radius / (r |ṙ|)`.
pub fn cross_validate(m: &Interceptor, target: &Target, settings: OracleSettings) -> Result<f64> {
    let oracle = oracle_time_to_go(m, target, settings)?;
    let closed = deviated_pursuit_time_to_go(m, target)?;
    Ok(((closed - oracle) / oracle).abs())
}
