//! File formats: graph JSON, salvo configuration JSON and CSV tables.
//!
//! Angles are degrees in files and radians in memory.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{path_graph, DirectedEdge, EdgePair, GraphError, PseudoGraph};
use crate::guidance::{Interceptor, SalvoConfig, SalvoResult, Target, TgoProvider};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, IoError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub n: usize,
    pub forward: Vec<f64>,
    pub reverse: Vec<f64>,
}

/// `{"n": .., "pairs": [..]}` or `{"path": {"n": .., "forward": [..], "reverse": [..]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphFile {
    Pairs { n: usize, pairs: Vec<EdgePair> },
    Path { path: PathSpec },
}

impl GraphFile {
    pub fn into_graph(self) -> Result<PseudoGraph> {
        Ok(match self {
            GraphFile::Pairs { n, pairs } => PseudoGraph::new(n, pairs)?,
            GraphFile::Path { path } => path_graph(path.n, &path.forward, &path.reverse)?,
        })
    }

    pub fn from_graph(g: &PseudoGraph) -> Self {
        GraphFile::Pairs {
            n: g.n(),
            pairs: g.pairs().to_vec(),
        }
    }
}

pub fn parse_graph(text: &str) -> Result<PseudoGraph> {
    serde_json::from_str::<GraphFile>(text)?.into_graph()
}

pub fn graph_to_json(g: &PseudoGraph) -> String {
    serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph serialises")
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_graph(path: &Path) -> Result<PseudoGraph> {
    parse_graph(&read_to_string(path)?)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let wrap = |source| IoError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(contents.as_bytes()).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

/// `%.17g`: 17 significant digits, trailing zeros dropped.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    }
}

fn csv_row<I: IntoIterator<Item = f64>>(values: I) -> String {
    values.into_iter().map(fmt_g17).collect::<Vec<_>>().join(",")
}

/// Row-major CSV; the header names the columns.
pub fn matrix_csv(m: &DMatrix<f64>, columns: &[String]) -> String {
    assert_eq!(columns.len(), m.ncols());
    let mut out = columns.join(",");
    out.push('\n');
    for row in m.row_iter() {
        out.push_str(&csv_row(row.iter().copied()));
        out.push('\n');
    }
    out
}

/// Column labels `1..n` for node-indexed matrices.
pub fn node_columns(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Column labels `t->h` for edge-indexed matrices.
pub fn edge_columns(edges: &[DirectedEdge]) -> Vec<String> {
    edges.iter().map(|e| e.to_string()).collect()
}

/// `t,x1..xn`, one row per step.
pub fn trajectory_csv(times: &[f64], states: &[nalgebra::DVector<f64>]) -> String {
    let n = states.first().map_or(0, |s| s.len());
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for (t, x) in times.iter().zip(states) {
        out.push_str(&csv_row(std::iter::once(*t).chain(x.iter().copied())));
        out.push('\n');
    }
    out
}

/// `t`, then per agent `r_i, theta_deg_i, gamma_m_deg_i, a_m_i, t_go_i`.
pub fn salvo_csv(result: &SalvoResult) -> String {
    let n = result.initial_tgo.len();
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",r_{i},theta_deg_{i},gamma_m_deg_{i},a_m_{i},t_go_{i}"));
    }
    out.push('\n');
    for s in &result.samples {
        let mut row = vec![s.t];
        for i in 0..n {
            row.extend([s.r[i], s.theta[i].to_degrees(), s.gamma_m[i].to_degrees(), s.a_m[i], s.t_go[i]]);
        }
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterceptorFile {
    pub r: f64,
    pub theta_deg: f64,
    pub gamma_m_deg: f64,
    pub v_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub gamma_t_deg: f64,
    pub v_t: f64,
}

/// Salvo configuration as stored on disk. Omitted fields take the
/// [`SalvoConfig::new`] defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalvoConfigFile {
    pub graph: GraphFile,
    pub interceptors: Vec<InterceptorFile>,
    pub target: TargetFile,
    pub provider: TgoProvider,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub allow_infeasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
}

impl SalvoConfigFile {
    pub fn into_config(self) -> Result<SalvoConfig> {
        let graph = self.graph.into_graph()?;
        let interceptors = self
            .interceptors
            .iter()
            .map(|m| Interceptor {
                r: m.r,
                theta: m.theta_deg.to_radians(),
                gamma_m: m.gamma_m_deg.to_radians(),
                v_m: m.v_m,
            })
            .collect();
        let target = Target {
            gamma_t: self.target.gamma_t_deg.to_radians(),
            v_t: self.target.v_t,
        };
        let mut cfg = SalvoConfig::new(graph, interceptors, target, self.provider);
        if let Some(v) = self.a_max {
            cfg.a_max = v;
        }
        if let Some(v) = self.capture_radius {
            cfg.capture_radius = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = self.sample_every {
            cfg.sample_every = v;
        }
        cfg.allow_infeasible = self.allow_infeasible;
        Ok(cfg)
    }

    pub fn from_config(cfg: &SalvoConfig) -> Self {
        Self {
            graph: GraphFile::from_graph(&cfg.graph),
            interceptors: cfg
                .interceptors
                .iter()
                .map(|m| InterceptorFile {
                    r: m.r,
                    theta_deg: m.theta.to_degrees(),
                    gamma_m_deg: m.gamma_m.to_degrees(),
                    v_m: m.v_m,
                })
                .collect(),
            target: TargetFile {
                gamma_t_deg: cfg.target.gamma_t.to_degrees(),
                v_t: cfg.target.v_t,
            },
            provider: cfg.provider.clone(),
            a_max: Some(cfg.a_max),
            capture_radius: Some(cfg.capture_radius),
            dt: Some(cfg.dt),
            t_max: Some(cfg.t_max),
            allow_infeasible: cfg.allow_infeasible,
            sample_every: Some(cfg.sample_every),
        }
    }
}

pub fn parse_salvo_config(text: &str) -> Result<SalvoConfig> {
    serde_json::from_str::<SalvoConfigFile>(text)?.into_config()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::unit_path;

    #[test]
    fn both_graph_forms() {
        let a = parse_graph(r#"{"path": {"n": 3, "forward": [1, 3], "reverse": [2, 4]}}"#).unwrap();
        let b = parse_graph(
            r#"{"n": 3, "pairs": [{"a": 1, "b": 2, "w_ab": 1, "w_ba": 2}, {"a": 2, "b": 3, "w_ab": 3, "w_ba": 4}]}"#,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_graph(&graph_to_json(&a)).unwrap(), a);
    }

    #[test]
    fn graph_errors_surface() {
        assert!(matches!(parse_graph("{"), Err(IoError::Json(_))));
        assert!(matches!(
            parse_graph(r#"{"path": {"n": 3, "forward": [1], "reverse": [2, 4]}}"#),
            Err(IoError::Graph(_))
        ));
        assert!(parse_graph(r#"{"path": {"n": 2, "forward": [1], "reverse": [1], "extra": 1}}"#).is_err());
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.0), "-2");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(10.79), "10.789999999999999");
        assert_eq!(fmt_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(fmt_g17(1e20), "1e+20");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-9, 123456.789, -4.5e17] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn laplacian_csv() {
        let l = crate::graph::laplacian(&unit_path(2).unwrap()).matrix;
        assert_eq!(matrix_csv(&l, &node_columns(2)), "1,2\n1,-1\n-1,1\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, "first").unwrap();
        write_atomic(&p, "second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn salvo_config_round_trip() {
        let cfg = crate::scenario::salvo_config(crate::scenario::graph());
        let text = serde_json::to_string(&SalvoConfigFile::from_config(&cfg)).unwrap();
        let back = parse_salvo_config(&text).unwrap();
        assert_eq!(back.graph, cfg.graph);
        assert_eq!(back.provider, cfg.provider);
        for (a, b) in back.interceptors.iter().zip(&cfg.interceptors) {
            assert!((a.theta - b.theta).abs() < 1e-15 && (a.gamma_m - b.gamma_m).abs() < 1e-15);
        }
        let minimal = r#"{"graph": {"path": {"n": 2, "forward": [1], "reverse": [1]}},
            "interceptors": [{"r": 5000, "theta_deg": 0, "gamma_m_deg": 5, "v_m": 500},
                             {"r": 6000, "theta_deg": 10, "gamma_m_deg": 10, "v_m": 500}],
            "target": {"gamma_t_deg": 120, "v_t": 400}, "provider": "closed_form_candidate"}"#;
        let cfg = parse_salvo_config(minimal).unwrap();
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.provider, TgoProvider::ClosedFormCandidate);
        let table: SalvoConfigFile = serde_json::from_str(&minimal.replace(
            r#""closed_form_candidate""#,
            r#"{"injected_table": [30, 31]}"#,
        ))
        .unwrap();
        assert_eq!(table.provider, TgoProvider::InjectedTable(vec![30.0, 31.0]));
    }
}
