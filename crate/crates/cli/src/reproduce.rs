//! Bundled artifacts and their expected values.

use pugraph::guidance::simulate_salvo;
use pugraph::poly::Poly;
use pugraph::robustness::{edge_transfer_function, margin_sweep};
use pugraph::{scenario, unit_path, DirectedEdge};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::Artifact;
use crate::commands::{parse_class, parse_range, salvo_summary};
use crate::error::{CliError, Result};
use crate::output::{self, Run};

const P2: &str = include_str!("../expected/p2-tfs.json");
const P3: &str = include_str!("../expected/p3-tfs.json");
const P4: &str = include_str!("../expected/p4-tfs.json");
const P5: &str = include_str!("../expected/p5-tfs.json");
const FIG3: &str = include_str!("../expected/fig3-sweeps.json");
const SALVO_POSITIVE: &str = include_str!("../expected/salvo-positive.json");
const SALVO_NEGATIVE: &str = include_str!("../expected/salvo-negative.json");

fn expected(artifact: Artifact) -> &'static str {
    match artifact {
        Artifact::P2Tfs => P2,
        Artifact::P3Tfs => P3,
        Artifact::P4Tfs => P4,
        Artifact::P5Tfs => P5,
        Artifact::Fig3Sweeps => FIG3,
        Artifact::SalvoPositive => SALVO_POSITIVE,
        Artifact::SalvoNegative => SALVO_NEGATIVE,
    }
}

/// `M(s) = -num(s)/den(s)` on the unit path, coefficients highest power first.
#[derive(Deserialize)]
struct TfEntry {
    edge: [usize; 2],
    num: Vec<f64>,
    den: Vec<f64>,
}

#[derive(Deserialize)]
struct TfCatalog {
    n: usize,
    tolerance: f64,
    entries: Vec<TfEntry>,
}

#[derive(Deserialize)]
struct Panel {
    class: String,
    sweep: String,
}

#[derive(Deserialize)]
struct Baseline {
    tolerance: f64,
    data: Value,
}

struct Comparison {
    mismatches: Vec<String>,
    max_deviation: f64,
}

impl Comparison {
    fn new() -> Self {
        Self { mismatches: Vec::new(), max_deviation: 0.0 }
    }

    fn number(&mut self, at: &str, want: f64, got: f64, tol: f64) {
        let dev = (want - got).abs() / want.abs().max(1.0);
        self.max_deviation = self.max_deviation.max(dev);
        if !(dev <= tol) {
            self.mismatches.push(format!("{at}: expected {want}, got {got}"));
        }
    }

    /// Every value in `want` must appear in `got`; extra fields in `got` are ignored.
    fn value(&mut self, at: &str, want: &Value, got: &Value, tol: f64) {
        match (want, got) {
            (Value::Number(w), Value::Number(g)) => self.number(at, w.as_f64().unwrap(), g.as_f64().unwrap(), tol),
            (Value::Array(w), Value::Array(g)) if w.len() == g.len() => {
                for (k, (w, g)) in w.iter().zip(g).enumerate() {
                    self.value(&format!("{at}[{k}]"), w, g, tol);
                }
            }
            (Value::Object(w), Value::Object(g)) => {
                for (key, w) in w {
                    match g.get(key) {
                        Some(g) => self.value(&format!("{at}.{key}"), w, g, tol),
                        None => self.mismatches.push(format!("{at}.{key}: missing")),
                    }
                }
            }
            _ if want == got => {}
            _ => self.mismatches.push(format!("{at}: expected {want}, got {got}")),
        }
    }
}

fn tfs(text: &str, cmp: &mut Comparison) -> Result<Value> {
    let catalog: TfCatalog = serde_json::from_str(text)?;
    let g = unit_path(catalog.n)?;
    let mut rows = Vec::new();
    for entry in &catalog.entries {
        let edge = DirectedEdge::new(entry.edge[0], entry.edge[1]);
        let tf = edge_transfer_function(&g, edge)?;
        let (num, den) = (Poly::from_descending(&entry.num), Poly::from_descending(&entry.den));
        // reference forms may have a common factor cancelled, so compare num·den' with num'·den
        let lhs = tf.num.mul(&den).descending();
        let rhs = num.mul(&tf.den).descending();
        let at = format!("{edge}");
        if lhs.len() != rhs.len() {
            cmp.mismatches.push(format!("{at}: degree mismatch"));
        } else {
            for (a, b) in rhs.iter().zip(&lhs) {
                cmp.number(&at, *a, *b, catalog.tolerance);
            }
        }
        rows.push(json!({ "edge": edge, "num": tf.num, "den": tf.den }));
    }
    Ok(json!({ "n": catalog.n, "entries": rows }))
}

fn fig3(text: &str, cmp: &mut Comparison) -> Result<Value> {
    let base: Baseline = serde_json::from_str(text)?;
    let panels: Vec<Panel> = serde_json::from_value(base.data["panels"].clone())?;
    let mut out = Vec::new();
    for panel in &panels {
        let rows = margin_sweep(parse_range(&panel.sweep)?, parse_class(&panel.class)?)?;
        let rows: Vec<Value> = rows
            .iter()
            .map(|r| json!({ "n": r.n, "margin": r.effective_margin, "omega_pc": r.omega_pc }))
            .collect();
        out.push(json!({ "class": panel.class, "sweep": panel.sweep, "rows": rows }));
    }
    let got = json!({ "panels": out });
    cmp.value("", &base.data, &got, base.tolerance);
    Ok(got)
}

fn salvo(text: &str, negative: bool, cmp: &mut Comparison) -> Result<Value> {
    let base: Baseline = serde_json::from_str(text)?;
    let g = if negative { scenario::negative_graph() } else { scenario::graph() };
    let res = simulate_salvo(&scenario::salvo_config(g))?;
    let got = salvo_summary(&res);
    cmp.value("", &base.data, &got, base.tolerance);
    Ok(got)
}

pub fn run(run: &mut Run, artifact: Artifact) -> Result<()> {
    run.param("artifact", artifact.name());
    let text = expected(artifact);
    let mut cmp = Comparison::new();
    let actual = match artifact {
        Artifact::P2Tfs | Artifact::P3Tfs | Artifact::P4Tfs | Artifact::P5Tfs => tfs(text, &mut cmp)?,
        Artifact::Fig3Sweeps => fig3(text, &mut cmp)?,
        Artifact::SalvoPositive => salvo(text, false, &mut cmp)?,
        Artifact::SalvoNegative => salvo(text, true, &mut cmp)?,
    };
    let pass = cmp.mismatches.is_empty();
    let out = json!({
        "artifact": artifact.name(),
        "pass": pass,
        "max_deviation": cmp.max_deviation,
        "mismatches": cmp.mismatches,
        "actual": actual,
    });
    run.primary(&format!("{}.json", artifact.name()), &output::json(&out))?;
    if !pass {
        return Err(CliError::numerical(format!(
            "{} differs from its expected values in {} place(s)",
            artifact.name(),
            cmp.mismatches.len()
        )));
    }
    Ok(())
}
