//! Fixed-step simulation of `ẋ = -Lx`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{laplacian, PseudoGraph};
use crate::spectral::{self, consensus_value, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),

    #[error("step {dt} exceeds the stability guard {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("step and horizon must be positive and finite")]
    InvalidStep,

    #[error("tolerance must be positive")]
    InvalidTolerance,

    #[error("initial state has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Converged { value: f64, time: f64 },
    Diverged { time: f64 },
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub verdict: Verdict,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn max_modulus(l: &DMatrix<f64>) -> (f64, f64) {
    let eig = l.complex_eigenvalues();
    let abs = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let re = eig.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    (abs, re)
}

/// `0.1 / max|λ(L)|`
pub fn step_limit(l: &DMatrix<f64>) -> f64 {
    0.1 / max_modulus(l).0
}

/// `0.05 / max|Re λ(L)|`, reduced to the stability guard when the spectrum
/// has large imaginary parts.
pub fn default_step(l: &DMatrix<f64>) -> f64 {
    let (abs, re) = max_modulus(l);
    (0.05 / re).min(0.1 / abs)
}

/// `1e-6 · (1 + ‖x0‖∞)`
pub fn default_tolerance(x0: &[f64]) -> f64 {
    1e-6 * (1.0 + x0.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

fn spread(x: &DVector<f64>) -> (f64, f64) {
    let mean = x.mean();
    (x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max), mean)
}

/// Classical fourth-order Runge–Kutta with a fixed step.
///
/// Stops when `max_i |x_i - mean(x)| < tol` (converged), when
/// `‖x‖ > 1e9 ‖x0‖` (diverged) or at `t_max`.
pub fn simulate(l: &DMatrix<f64>, x0: &[f64], dt: f64, t_max: f64, tol: f64) -> Result<Trajectory> {
    let n = l.nrows();
    if x0.len() != n {
        return Err(DynamicsError::DimensionMismatch { expected: n, got: x0.len() });
    }
    if !(dt > 0.0 && dt.is_finite() && t_max > 0.0 && t_max.is_finite()) {
        return Err(DynamicsError::InvalidStep);
    }
    if !(tol > 0.0) {
        return Err(DynamicsError::InvalidTolerance);
    }
    let limit = step_limit(l);
    if dt > limit {
        return Err(DynamicsError::StepTooLarge { dt, limit });
    }

    let mut x = DVector::from_column_slice(x0);
    let blowup = 1e9 * x.norm();
    let steps = (t_max / dt).ceil() as usize;
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let f = |x: &DVector<f64>| -(l * x);

    let mut verdict = Verdict::Timeout;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let (s, mean) = spread(&x);
        if s < tol {
            verdict = Verdict::Converged { value: mean, time: t };
            break;
        }
        if x.norm() > blowup || !x.iter().all(|v| v.is_finite()) {
            verdict = Verdict::Diverged { time: t };
            break;
        }
        if k == steps {
            break;
        }
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (0.5 * dt)));
        let k3 = f(&(&x + &k2 * (0.5 * dt)));
        let k4 = f(&(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        times.push((k + 1) as f64 * dt);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub predicted: f64,
    pub in_hull: bool,
    pub verdict: Verdict,
    pub simulated: Option<f64>,
    pub abs_gap: Option<f64>,
    pub rel_gap: Option<f64>,
}

/// Compares the left-null-vector prediction with a simulated run. `dt` and
/// `tol` fall back to [`default_step`] and [`default_tolerance`].
pub fn predicted_vs_simulated(
    g: &PseudoGraph,
    x0: &[f64],
    dt: Option<f64>,
    t_max: f64,
    tol: Option<f64>,
) -> Result<PredictionReport> {
    let (_, p) = spectral::left_null_vector(g)?;
    let prediction = consensus_value(&p, x0)?;
    let l = laplacian(g).matrix;
    let dt = dt.unwrap_or_else(|| default_step(&l));
    let tol = tol.unwrap_or_else(|| default_tolerance(x0));
    let run = simulate(&l, x0, dt, t_max, tol)?;
    let simulated = match run.verdict {
        Verdict::Converged { value, .. } => Some(value),
        _ => None,
    };
    let abs_gap = simulated.map(|s| (s - prediction.value).abs());
    Ok(PredictionReport {
        predicted: prediction.value,
        in_hull: prediction.in_hull,
        verdict: run.verdict,
        simulated,
        abs_gap,
        rel_gap: abs_gap.map(|g| g / prediction.value.abs().max(f64::MIN_POSITIVE)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, unit_path};

    #[test]
    fn equilibrium_converges_immediately() {
        let l = laplacian(&unit_path(4).unwrap()).matrix;
        let run = simulate(&l, &[1.0; 4], 0.01, 10.0, 1e-6).unwrap();
        assert_eq!(run.verdict, Verdict::Converged { value: 1.0, time: 0.0 });
        assert_eq!(run.times.len(), 1);
    }

    #[test]
    fn asymmetric_three_path_value() {
        let g = path_graph(3, &[1.0, 3.0], &[2.0, 4.0]).unwrap();
        let l = laplacian(&g).matrix;
        let run = simulate(&l, &[0.0, 0.0, 3.0], default_step(&l), 100.0, 1e-6).unwrap();
        match run.verdict {
            Verdict::Converged { value, .. } => assert!((value - 0.6).abs() < 1e-5),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn beyond_margin_diverges() {
        let g = path_graph(3, &[-0.6, 1.0], &[1.0, 1.0]).unwrap();
        let l = laplacian(&g).matrix;
        let run = simulate(&l, &[0.0, 1.0, 2.0], default_step(&l), 1000.0, 1e-6).unwrap();
        assert!(matches!(run.verdict, Verdict::Diverged { .. }), "{:?}", run.verdict);
    }

    #[test]
    fn guards() {
        let l = laplacian(&unit_path(3).unwrap()).matrix;
        assert!(matches!(
            simulate(&l, &[0.0, 1.0, 2.0], 1.0, 10.0, 1e-6),
            Err(DynamicsError::StepTooLarge { .. })
        ));
        assert_eq!(simulate(&l, &[0.0, 1.0], 0.01, 10.0, 1e-6).unwrap_err(), DynamicsError::DimensionMismatch { expected: 3, got: 2 });
        assert_eq!(simulate(&l, &[0.0; 3], 0.01, 10.0, 0.0).unwrap_err(), DynamicsError::InvalidTolerance);
        assert_eq!(simulate(&l, &[0.0; 3], -0.01, 10.0, 1e-6).unwrap_err(), DynamicsError::InvalidStep);
    }

    #[test]
    fn weighted_sum_is_conserved() {
        let g = path_graph(4, &[1.5, 0.3, 2.2], &[0.7, 1.1, 0.4]).unwrap();
        let l = laplacian(&g).matrix;
        let (_, p) = spectral::left_null_vector(&g).unwrap();
        let x0 = [3.0, -1.0, 4.0, 1.5];
        let run = simulate(&l, &x0, default_step(&l), 200.0, 1e-8).unwrap();
        let q0 = p.p.dot(&run.states[0]);
        for x in &run.states {
            assert!((p.p.dot(x) - q0).abs() <= 1e-6 * q0.abs());
        }
    }

    #[test]
    fn unit_path_averages() {
        let x0 = [1.0, 5.0, -2.0, 8.0, 3.0];
        let r = predicted_vs_simulated(&unit_path(5).unwrap(), &x0, None, 500.0, None).unwrap();
        assert!((r.predicted - 3.0).abs() < 1e-12);
        assert!((r.simulated.unwrap() - 3.0).abs() < 1e-4);
        assert!(r.in_hull);
    }

    #[test]
    fn admissible_negative_weight_leaves_hull() {
        let g = path_graph(3, &[1.0, 1.0], &[1.0, -0.4]).unwrap();
        let r = predicted_vs_simulated(&g, &[0.0, 1.0, 2.0], None, 2000.0, Some(1e-9)).unwrap();
        assert!(!r.in_hull, "{r:?}");
        assert!(r.rel_gap.unwrap() < 1e-3);
    }
}
