//! Five-interceptor salvo against a constant-velocity target.
//!
//! Node `i` of the communication path carries interceptor `i`. Weights are
//! stored by physical edge: forward `i → i+1` and reverse `i+1 → i`.

use crate::graph::{path_graph, DirectedEdge, PseudoGraph};
use crate::guidance::{Interceptor, SalvoConfig, Target, TgoProvider};

pub const FORWARD: [f64; 4] = [2.0, 1.0, 1.3, 3.2];
pub const REVERSE: [f64; 4] = [0.1, 1.04, 0.15, 2.0];

/// Initial time-to-go per interceptor, s.
pub const INITIAL_TGO: [f64; 5] = [47.83, 33.84, 22.88, 41.77, 40.97];

/// Line-of-sight angles, degrees.
pub const THETA_DEG: [f64; 5] = [0.0, -10.0, -20.0, -165.0, 200.0];
/// Flight-path angles, degrees.
pub const GAMMA_M_DEG: [f64; 5] = [0.0, 0.0, 0.0, 180.0, 190.0];

pub const RANGE: f64 = 10_000.0;
pub const V_M: f64 = 500.0;
pub const V_T: f64 = 400.0;
pub const GAMMA_T_DEG: f64 = 120.0;

/// Edge whose weight is made negative in the second run.
pub const NEGATIVE_EDGE: DirectedEdge = DirectedEdge { tail: 4, head: 3 };
pub const NEGATIVE_WEIGHT: f64 = -1.1;

pub fn graph() -> PseudoGraph {
    path_graph(5, &FORWARD, &REVERSE).expect("scenario weights are valid")
}

pub fn negative_graph() -> PseudoGraph {
    graph()
        .with_weight(NEGATIVE_EDGE, NEGATIVE_WEIGHT)
        .expect("edge exists")
}

pub fn interceptors() -> Vec<Interceptor> {
    THETA_DEG
        .iter()
        .zip(GAMMA_M_DEG)
        .map(|(&th, gm)| Interceptor {
            r: RANGE,
            theta: th.to_radians(),
            gamma_m: gm.to_radians(),
            v_m: V_M,
        })
        .collect()
}

pub fn target() -> Target {
    Target {
        gamma_t: GAMMA_T_DEG.to_radians(),
        v_t: V_T,
    }
}

/// Salvo with the injected initial time-to-go table.
pub fn salvo_config(g: PseudoGraph) -> SalvoConfig {
    let mut cfg = SalvoConfig::new(g, interceptors(), target(), TgoProvider::InjectedTable(INITIAL_TGO.to_vec()));
    cfg.t_max = 200.0;
    cfg
}
