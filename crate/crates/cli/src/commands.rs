use std::path::Path;

use pugraph::dynamics::{default_step, default_tolerance, simulate, Verdict};
use pugraph::guidance::{simulate_salvo, SalvoResult};
use pugraph::io::{self, edge_columns, fmt_g17, matrix_csv, node_columns};
use pugraph::robustness::{edge_margin, edge_transfer_function, margin_sweep, EdgeSelector, SweepRow};
use pugraph::spectral::{consensus_feasible, consensus_value, left_null_vector, Feasibility};
use pugraph::{incidence_set, laplacian, path_graph, validate, DirectedEdge, PseudoGraph};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, Emit, GraphArgs};
use crate::error::{CliError, Result};
use crate::output::{self, Run};
use crate::reproduce;

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Graph { .. } => "graph",
        Command::Consensus { .. } => "consensus",
        Command::Simulate { .. } => "simulate",
        Command::Robustness { .. } => "robustness",
        Command::Salvo { .. } => "salvo",
        Command::Reproduce { .. } => "reproduce",
    }
}

pub fn dispatch(cmd: &Command, run: &mut Run) -> Result<()> {
    match cmd {
        Command::Graph { graph, emit } => graph_cmd(run, graph, *emit),
        Command::Consensus { graph, x0 } => consensus_cmd(run, graph, x0.as_deref()),
        Command::Simulate { graph, x0, dt, t_max, tol } => simulate_cmd(run, graph, x0, *dt, *t_max, *tol),
        Command::Robustness { graph, edge, sweep, class } => match (sweep, class) {
            (Some(sweep), Some(class)) => sweep_cmd(run, sweep, class),
            _ => robustness_cmd(run, graph, edge.as_deref()),
        },
        Command::Salvo { config } => salvo_cmd(run, config),
        Command::Reproduce { artifact } => reproduce::run(run, *artifact),
    }
}

fn parse_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::bad_input(format!("not a number: {s:?}"))))
        .collect()
}

fn load_graph(run: &mut Run, args: &GraphArgs) -> Result<PseudoGraph> {
    if let Some(path) = &args.graph {
        run.input(path);
        return Ok(io::read_graph(path)?);
    }
    let Some(n) = args.path else {
        return Err(CliError::bad_input("either --graph FILE or --path N is required"));
    };
    let weights = |raw: &Option<String>| match raw {
        Some(s) => parse_list(s),
        None => Ok(vec![1.0; n.saturating_sub(1)]),
    };
    let (forward, reverse) = (weights(&args.forward)?, weights(&args.reverse)?);
    run.param("path", n);
    run.param("forward", &forward);
    run.param("reverse", &reverse);
    Ok(path_graph(n, &forward, &reverse)?)
}

fn parse_state(raw: &str, n: usize) -> Result<Vec<f64>> {
    let x0: Vec<f64> = serde_json::from_str(raw).map_err(|e| CliError::bad_input(format!("--x0: {e}")))?;
    if x0.len() != n {
        return Err(CliError::bad_input(format!("--x0 has {} entries, graph has {n} nodes", x0.len())));
    }
    Ok(x0)
}

fn graph_cmd(run: &mut Run, args: &GraphArgs, emit: Emit) -> Result<()> {
    let g = load_graph(run, args)?;
    run.param("emit", format!("{emit:?}").to_lowercase());
    match emit {
        Emit::Laplacian => run.primary("laplacian.csv", &matrix_csv(&laplacian(&g).matrix, &node_columns(g.n()))),
        Emit::Incidence => {
            let inc = incidence_set(&g)?;
            run.primary("incidence.csv", &matrix_csv(&inc.e, &edge_columns(&inc.edge_order)))
        }
        Emit::Json => run.primary("graph.json", &(io::graph_to_json(&g) + "\n")),
        Emit::Diagnostics => run.primary("diagnostics.json", &output::json(&validate(&g))),
    }
}

#[derive(Serialize)]
struct FeasibilityJson {
    feasible: bool,
    min_real_part: f64,
    /// `[re, im]` pairs, structural zero first
    spectrum: Vec<[f64; 2]>,
}

impl From<&Feasibility> for FeasibilityJson {
    fn from(f: &Feasibility) -> Self {
        Self {
            feasible: f.feasible,
            min_real_part: f.min_real_part(),
            spectrum: f.spectrum.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn consensus_cmd(run: &mut Run, args: &GraphArgs, x0: Option<&str>) -> Result<()> {
    let g = load_graph(run, args)?;
    let feas = consensus_feasible(&laplacian(&g).matrix);
    let (method, p) = left_null_vector(&g)?;
    let mut out = json!({
        "method": method,
        "p": p.p.as_slice(),
        "sum_p": p.sum(),
        "residual": p.residual,
        "sign_pattern": p.sign_pattern,
        "feasibility": FeasibilityJson::from(&feas),
    });
    if let Some(raw) = x0 {
        let x0 = parse_state(raw, g.n())?;
        run.param("x0", &x0);
        let c = consensus_value(&p, &x0)?;
        out["value"] = json!(c.value);
        out["in_hull"] = json!(c.in_hull);
    }
    run.primary("consensus.json", &output::json(&out))?;
    if !feas.feasible {
        return Err(CliError::infeasible("graph does not reach consensus"));
    }
    Ok(())
}

fn simulate_cmd(run: &mut Run, args: &GraphArgs, x0: &str, dt: Option<f64>, t_max: f64, tol: Option<f64>) -> Result<()> {
    let g = load_graph(run, args)?;
    let x0 = parse_state(x0, g.n())?;
    let l = laplacian(&g).matrix;
    let dt = dt.unwrap_or_else(|| default_step(&l));
    let tol = tol.unwrap_or_else(|| default_tolerance(&x0));
    run.param("x0", &x0);
    run.param("dt", dt);
    run.param("t_max", t_max);
    run.param("tol", tol);

    let traj = simulate(&l, &x0, dt, t_max, tol)?;
    let prediction = left_null_vector(&g).ok().and_then(|(_, p)| consensus_value(&p, &x0).ok());
    let simulated = match traj.verdict {
        Verdict::Converged { value, .. } => Some(value),
        _ => None,
    };
    let summary = json!({
        "verdict": traj.verdict,
        "steps": traj.times.len() - 1,
        "final_state": traj.final_state().as_slice(),
        "predicted": prediction.map(|c| c.value),
        "in_hull": prediction.map(|c| c.in_hull),
        "abs_gap": simulated.zip(prediction).map(|(s, c)| (s - c.value).abs()),
    });
    run.file("trajectory.csv", &io::trajectory_csv(&traj.times, &traj.states))?;
    run.primary("summary.json", &output::json(&summary))?;
    match traj.verdict {
        Verdict::Converged { .. } => Ok(()),
        Verdict::Diverged { time } => Err(CliError::infeasible(format!("trajectory diverged at t = {time}"))),
        Verdict::Timeout => Err(CliError::infeasible(format!("no consensus within t_max = {t_max}"))),
    }
}

fn parse_edge(raw: &str) -> Result<DirectedEdge> {
    let bad = || CliError::bad_input(format!("--edge expects `tail,head`, got {raw:?}"));
    let (t, h) = raw.split_once(',').ok_or_else(bad)?;
    Ok(DirectedEdge::new(t.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}

fn robustness_cmd(run: &mut Run, args: &GraphArgs, edge: Option<&str>) -> Result<()> {
    let g = load_graph(run, args)?;
    let edge = parse_edge(edge.ok_or_else(|| CliError::bad_input("--edge is required without --sweep"))?)?;
    run.param("edge", edge.to_string());
    let tf = edge_transfer_function(&g, edge)?;
    let margin = edge_margin(&g, edge)?;
    let out = json!({
        "edge": edge,
        "num": tf.num,
        "den": tf.den,
        "crossovers": margin.crossovers,
        "effective_margin": margin.effective_margin,
        "omega_pc": margin.omega_pc,
    });
    run.primary("robustness.json", &output::json(&out))
}

pub fn parse_range(raw: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || CliError::bad_input(format!("--sweep expects `nmin:nmax`, got {raw:?}"));
    let (a, b) = raw.split_once(':').ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a < 2 || a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

pub fn parse_class(raw: &str) -> Result<EdgeSelector> {
    let bad = || CliError::bad_input(format!("--class expects leading:l, central, central:upper or trailing:k, got {raw:?}"));
    let (kind, arg) = match raw.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (raw, None),
    };
    let index = |a: Option<&str>| a.and_then(|a| a.parse::<usize>().ok()).filter(|&i| i > 0).ok_or_else(bad);
    match kind {
        "leading" => Ok(EdgeSelector::Leading(index(arg)?)),
        "trailing" => Ok(EdgeSelector::Trailing(index(arg)?)),
        "central" => match arg {
            None | Some("lower") => Ok(EdgeSelector::Central { upper: false }),
            Some("upper") => Ok(EdgeSelector::Central { upper: true }),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,margin,omega_pc\n");
    for row in rows {
        let omega = row.omega_pc.map(fmt_g17).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", row.n, fmt_g17(row.effective_margin), omega));
    }
    out
}

fn sweep_cmd(run: &mut Run, sweep: &str, class: &str) -> Result<()> {
    let range = parse_range(sweep)?;
    let selector = parse_class(class)?;
    run.param("sweep", sweep);
    run.param("class", class);
    let rows = margin_sweep(range, selector)?;
    run.file("sweep.csv", &sweep_csv(&rows))?;
    run.primary("sweep.json", &output::json(&rows))
}

/// Summary fields of a salvo run, without the sampled histories.
pub fn salvo_summary(res: &SalvoResult) -> Value {
    let lo = res.initial_tgo.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = res.initial_tgo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let impacts: Vec<f64> = res.impact_times.iter().flatten().copied().collect();
    let in_hull = res.all_intercepted.then(|| impacts.iter().all(|t| (lo..=hi).contains(t)));
    json!({
        "impact_times": res.impact_times,
        "all_intercepted": res.all_intercepted,
        "spread": res.spread,
        "mean_impact": res.mean_impact,
        "initial_tgo": res.initial_tgo,
        "initial_ranges": res.initial_ranges,
        "prediction": res.consensus_prediction,
        "prediction_in_hull": res.prediction_in_hull,
        "in_hull": in_hull,
        "saturation_fraction": res.saturation_fraction,
        "singular_steps": res.singular_steps,
        "estimator_fallbacks": res.estimator_fallbacks,
    })
}

fn salvo_cmd(run: &mut Run, config: &Path) -> Result<()> {
    run.input(config);
    let cfg = io::parse_salvo_config(&io::read_to_string(config)?)?;
    run.param("dt", cfg.dt);
    run.param("t_max", cfg.t_max);
    run.param("provider", &cfg.provider);
    let res = simulate_salvo(&cfg)?;
    run.file("trajectories.csv", &io::salvo_csv(&res))?;
    run.primary("summary.json", &output::json(&salvo_summary(&res)))?;
    if !res.all_intercepted {
        return Err(CliError::infeasible("not every interceptor reached the target within t_max"));
    }
    Ok(())
}
