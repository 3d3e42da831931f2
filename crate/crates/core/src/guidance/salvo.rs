use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::kinematics::{guidance_command, kinematics_derivatives, Interceptor, Target};
use super::tgo::{deviated_pursuit_time_to_go, oracle_time_to_go, OracleSettings, TgoProvider};
use super::{GuidanceError, Result, G0};
use crate::graph::{laplacian, PseudoGraph};
use crate::spectral::{consensus_feasible, left_null_vector, weighted_consensus};

#[derive(Debug, Clone, PartialEq)]
pub struct SalvoConfig {
    /// node `i` carries interceptor `i`
    pub graph: PseudoGraph,
    pub interceptors: Vec<Interceptor>,
    pub target: Target,
    /// lateral acceleration cap, m/s²
    pub a_max: f64,
    pub capture_radius: f64,
    pub dt: f64,
    pub t_max: f64,
    pub provider: TgoProvider,
    /// run even when the topology cannot reach consensus
    pub allow_infeasible: bool,
    /// keep every k-th step in the sampled trajectories
    pub sample_every: usize,
}

impl SalvoConfig {
    /// Defaults: `a_max = 40 g`, 1 m capture radius, 1 ms step, 300 s horizon,
    /// samples every 10 ms.
    pub fn new(graph: PseudoGraph, interceptors: Vec<Interceptor>, target: Target, provider: TgoProvider) -> Self {
        Self {
            graph,
            interceptors,
            target,
            a_max: 40.0 * G0,
            capture_radius: 1.0,
            dt: 1e-3,
            t_max: 300.0,
            provider,
            allow_infeasible: false,
            sample_every: 10,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(GuidanceError::InvalidConfig(msg.to_string()));
        if self.interceptors.len() != self.graph.n() {
            return bad("interceptor count must equal the node count");
        }
        if !(self.a_max > 0.0) {
            return bad("a_max must be positive");
        }
        if !(self.dt > 0.0 && self.t_max > 0.0 && self.capture_radius > 0.0) {
            return bad("dt, t_max and capture_radius must be positive");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1");
        }
        if self.interceptors.iter().any(|m| !(m.r > 0.0) || m.v_m <= self.target.v_t) {
            return bad("every interceptor needs r > 0 and V_M > V_T");
        }
        if let TgoProvider::InjectedTable(v) = &self.provider {
            if v.len() != self.interceptors.len() {
                return bad("injected time-to-go table length must equal the interceptor count");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SalvoSample {
    pub t: f64,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub gamma_m: Vec<f64>,
    pub a_m: Vec<f64>,
    /// for intercepted agents this is `impact - t`
    pub t_go: Vec<f64>,
    /// saturated at some step since the previous sample
    pub saturated: Vec<bool>,
    pub alive: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SalvoResult {
    pub impact_times: Vec<Option<f64>>,
    pub all_intercepted: bool,
    /// max - min impact time, when every interceptor hit
    pub spread: Option<f64>,
    pub mean_impact: Option<f64>,
    pub initial_tgo: Vec<f64>,
    pub initial_ranges: Vec<f64>,
    /// `Σ p_i t_go_i(0) / Σ p_i`
    pub consensus_prediction: Option<f64>,
    pub prediction_in_hull: Option<bool>,
    pub saturation_fraction: Vec<f64>,
    pub singular_steps: usize,
    /// steps where the estimator failed and `t_go` was extrapolated
    pub estimator_fallbacks: usize,
    pub samples: Vec<SalvoSample>,
}

fn estimator(config: &SalvoConfig) -> impl Fn(&Interceptor) -> Result<f64> + '_ {
    let settings = OracleSettings {
        capture_radius: config.capture_radius,
        ..Default::default()
    };
    move |m: &Interceptor| match config.provider {
        TgoProvider::NumericalOracle => oracle_time_to_go(m, &config.target, settings),
        _ => deviated_pursuit_time_to_go(m, &config.target),
    }
}

/// Runs the engagement with consensus coupling through the graph Laplacian.
pub fn simulate_salvo(config: &SalvoConfig) -> Result<SalvoResult> {
    config.check()?;
    let l = laplacian(&config.graph).matrix;
    if !config.allow_infeasible && !consensus_feasible(&l).feasible {
        return Err(GuidanceError::ConsensusInfeasibleTopology);
    }
    let p = left_null_vector(&config.graph).ok().map(|(_, p)| p);
    run(config, &l, p.as_ref().map(|p| p.p.as_slice()))
}

/// Same engagement with an arbitrary coupling matrix, e.g. zero for
/// independent deviated pursuit. No consensus prediction is made.
pub fn simulate_salvo_with_coupling(config: &SalvoConfig, coupling: &DMatrix<f64>) -> Result<SalvoResult> {
    config.check()?;
    let n = config.interceptors.len();
    if coupling.shape() != (n, n) {
        return Err(GuidanceError::InvalidConfig("coupling matrix must be n × n".into()));
    }
    run(config, coupling, None)
}

fn rk4_step(m: &Interceptor, target: &Target, a: f64, h: f64) -> Interceptor {
    let f = |s: &Interceptor| {
        let safe = Interceptor { r: s.r.max(1e-9), ..*s };
        kinematics_derivatives(&safe, target, a)
    };
    let shift = |d: &super::Derivatives, k: f64| Interceptor {
        r: m.r + k * d.r_dot,
        theta: m.theta + k * d.theta_dot,
        gamma_m: m.gamma_m + k * d.gamma_m_dot,
        v_m: m.v_m,
    };
    let k1 = f(m);
    let k2 = f(&shift(&k1, 0.5 * h));
    let k3 = f(&shift(&k2, 0.5 * h));
    let k4 = f(&shift(&k3, h));
    let w = h / 6.0;
    Interceptor {
        r: m.r + w * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot),
        theta: m.theta + w * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot),
        gamma_m: m.gamma_m + w * (k1.gamma_m_dot + 2.0 * k2.gamma_m_dot + 2.0 * k3.gamma_m_dot + k4.gamma_m_dot),
        v_m: m.v_m,
    }
}

fn run(config: &SalvoConfig, l: &DMatrix<f64>, p: Option<&[f64]>) -> Result<SalvoResult> {
    let n = config.interceptors.len();
    let estimate = estimator(config);
    let mut state = config.interceptors.clone();

    // injected values become physical: scale each range so the closed form
    // reproduces the table entry
    if let TgoProvider::InjectedTable(table) = &config.provider {
        for (m, &target_tgo) in state.iter_mut().zip(table) {
            let current = deviated_pursuit_time_to_go(m, &config.target)?;
            m.r *= target_tgo / current;
        }
    }
    let initial_ranges: Vec<f64> = state.iter().map(|m| m.r).collect();
    let initial_tgo: Vec<f64> = match &config.provider {
        TgoProvider::InjectedTable(table) => table.clone(),
        _ => state.iter().map(&estimate).collect::<Result<_>>()?,
    };
    let prediction = p.and_then(|p| weighted_consensus(p, &initial_tgo).ok());

    let mut impact: Vec<Option<f64>> = vec![None; n];
    let mut saturated_steps = vec![0usize; n];
    let mut alive_steps = vec![0usize; n];
    let mut singular_steps = 0;
    let mut estimator_fallbacks = 0;
    let mut samples = Vec::new();
    let mut window_saturated = vec![false; n];
    let steps = (config.t_max / config.dt).ceil() as usize;
    let mut tgo = DVector::from_vec(initial_tgo.clone());
    let mut accel = vec![0.0; n];

    for k in 0..=steps {
        let t = k as f64 * config.dt;
        for i in 0..n {
            tgo[i] = match impact[i] {
                Some(hit) => hit - t,
                None if k == 0 => initial_tgo[i],
                None => match estimate(&state[i]) {
                    Ok(v) => v,
                    Err(_) => {
                        estimator_fallbacks += 1;
                        tgo[i] - config.dt
                    }
                },
            };
        }
        let coupling = l * &tgo;
        for i in 0..n {
            if impact[i].is_some() {
                accel[i] = 0.0;
                continue;
            }
            let cmd = guidance_command(&state[i], &config.target, coupling[i], config.a_max);
            accel[i] = cmd.accel;
            alive_steps[i] += 1;
            if cmd.saturated {
                saturated_steps[i] += 1;
                window_saturated[i] = true;
            }
            if cmd.singular_los_rate {
                singular_steps += 1;
            }
        }
        let done = impact.iter().all(Option::is_some);
        if k % config.sample_every == 0 || done || k == steps {
            samples.push(SalvoSample {
                t,
                r: state.iter().map(|m| m.r).collect(),
                theta: state.iter().map(|m| m.theta).collect(),
                gamma_m: state.iter().map(|m| m.gamma_m).collect(),
                a_m: accel.clone(),
                t_go: tgo.iter().copied().collect(),
                saturated: std::mem::replace(&mut window_saturated, vec![false; n]),
                alive: impact.iter().map(Option::is_none).collect(),
            });
        }
        if done || k == steps {
            break;
        }
        for i in 0..n {
            if impact[i].is_some() {
                continue;
            }
            let next = rk4_step(&state[i], &config.target, accel[i], config.dt);
            if next.r <= config.capture_radius {
                let frac = (state[i].r - config.capture_radius) / (state[i].r - next.r);
                impact[i] = Some(t + frac * config.dt);
            }
            state[i] = next;
        }
    }

    let all_intercepted = impact.iter().all(Option::is_some);
    let hits: Vec<f64> = impact.iter().flatten().copied().collect();
    let (spread, mean_impact) = if all_intercepted {
        let lo = hits.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = hits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (Some(hi - lo), Some(hits.iter().sum::<f64>() / n as f64))
    } else {
        (None, None)
    };
    Ok(SalvoResult {
        impact_times: impact,
        all_intercepted,
        spread,
        mean_impact,
        initial_tgo,
        initial_ranges,
        consensus_prediction: prediction.map(|c| c.value),
        prediction_in_hull: prediction.map(|c| c.in_hull),
        saturation_fraction: saturated_steps
            .iter()
            .zip(&alive_steps)
            .map(|(&s, &a)| if a == 0 { 0.0 } else { s as f64 / a as f64 })
            .collect(),
        singular_steps,
        estimator_fallbacks,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// max over usable samples of `|d t_go/dt + 1 + (L t_go)_i|`
    pub per_interceptor: Vec<Option<f64>>,
    pub samples_used: Vec<usize>,
}

/// Checks `d t_go/dt = -1 - L t_go` on the sampled histories with central
/// differences, skipping samples where the interceptor saturated or hit.
pub fn tgo_consensus_residual(run: &SalvoResult, l: &DMatrix<f64>) -> ResidualReport {
    let n = run.initial_tgo.len();
    let mut worst: Vec<Option<f64>> = vec![None; n];
    let mut used = vec![0usize; n];
    let s = &run.samples;
    for k in 1..s.len().saturating_sub(1) {
        let (prev, cur, next) = (&s[k - 1], &s[k], &s[k + 1]);
        let h = next.t - prev.t;
        if h <= 0.0 {
            continue;
        }
        let lt = l * DVector::from_column_slice(&cur.t_go);
        for i in 0..n {
            if !next.alive[i] || cur.saturated[i] || next.saturated[i] {
                continue;
            }
            let rate = (next.t_go[i] - prev.t_go[i]) / h;
            let r = (rate + 1.0 + lt[i]).abs();
            worst[i] = Some(worst[i].map_or(r, |w: f64| w.max(r)));
            used[i] += 1;
        }
    }
    ResidualReport {
        per_interceptor: worst,
        samples_used: used,
    }
}
