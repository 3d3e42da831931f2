//! Single-edge robustness of consensus.
//!
//! Perturbing one directed edge weight by `Δ` turns the edge agreement
//! dynamics `ẋ_τ = A x_τ` into `ẋ_τ = (A + Δ B C) x_τ`, a scalar feedback
//! loop around `M(s) = C (sI - A)⁻¹ B`. Consensus survives every negative `Δ`
//! with `|Δ|` below the gain margin of that loop.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{incidence_set, laplacian, DirectedEdge, GraphError, PseudoGraph};
use crate::poly::{leverrier, Poly};
use crate::spectral::consensus_feasible;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RobustnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error("transfer function numerator is identically zero")]
    DegenerateNumerator,

    #[error("nominal system is unstable: denominator root {0} has nonnegative real part")]
    UnstableNominal(Complex64),

    #[error("nominal graph does not reach consensus")]
    NominalInfeasible,

    #[error("consensus survives every perturbation down to -{0}")]
    NoCrossingWithinLimit(f64),

    #[error("edge index {l} outside the leading-edge range for n = {n}")]
    LeadingIndexOutOfRange { n: usize, l: usize },

    #[error("edge selector {selector} does not exist on a path with {n} nodes")]
    SelectorOutOfRange { n: usize, selector: String },
}

pub type Result<T> = std::result::Result<T, RobustnessError>;

/// Edge agreement system for a perturbation on one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAgreement {
    /// `-E_τᵀ E_out W Rᵀ`, `(n-1) × (n-1)`
    pub a: DMatrix<f64>,
    /// `-E_τᵀ E_out e`
    pub b: DVector<f64>,
    /// `eᵀ Rᵀ`
    pub c: DVector<f64>,
    pub edge: DirectedEdge,
}

pub fn edge_agreement_matrices(g: &PseudoGraph, edge: DirectedEdge) -> Result<EdgeAgreement> {
    let col = g.edge_column(edge)?;
    let inc = incidence_set(g)?;
    let w = g.weights().as_diagonal();
    let tree_out = inc.e_tree.transpose() * &inc.e_out;
    let a = -(&tree_out * w * inc.relation.transpose());
    let b = -tree_out.column(col).into_owned();
    let c = inc.relation.column(col).into_owned();
    Ok(EdgeAgreement { a, b, c, edge })
}

/// `M(s) = -num(s) / den(s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalTransferFunction {
    pub num: Poly,
    pub den: Poly,
}

impl RationalTransferFunction {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        -self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// `M(0)`; infinite when the denominator vanishes at the origin.
    pub fn dc_gain(&self) -> f64 {
        -self.num.eval(0.0) / self.den.eval(0.0)
    }

    /// `den + Δ num`, the characteristic polynomial of `A + Δ B C`.
    pub fn closed_loop(&self, delta: f64) -> Poly {
        self.den.add(&self.num.scale(delta))
    }
}

pub fn transfer_function(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> RationalTransferFunction {
    let rec = leverrier(a, b.as_slice(), c.as_slice());
    let num: Vec<f64> = rec.output_adjugate.iter().map(|x| -x).collect();
    RationalTransferFunction {
        num: Poly::new(num),
        den: Poly::new(rec.characteristic),
    }
}

pub fn edge_transfer_function(g: &PseudoGraph, edge: DirectedEdge) -> Result<RationalTransferFunction> {
    let sys = edge_agreement_matrices(g, edge)?;
    Ok(transfer_function(&sys.a, &sys.b, &sys.c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossover {
    pub omega_pc: f64,
    /// `|M(jω)|`
    pub magnitude: f64,
}

/// Splits `p(jω)` into real and imaginary parts, both as polynomials in `ω`.
fn split_on_imaginary_axis(p: &Poly) -> (Poly, Poly) {
    let mut re = vec![0.0; p.coeffs().len()];
    let mut im = vec![0.0; p.coeffs().len()];
    for (k, &c) in p.coeffs().iter().enumerate() {
        // j^k cycles 1, j, -1, -j
        match k % 4 {
            0 => re[k] = c,
            1 => im[k] = c,
            2 => re[k] = -c,
            _ => im[k] = -c,
        }
    }
    (Poly::new(re), Poly::new(im))
}

/// Even polynomial in `ω` rewritten in `u = ω²`.
fn even_part_in_u(p: &Poly) -> Poly {
    Poly::new(p.coeffs().iter().step_by(2).copied().collect())
}

fn newton_polish(p: &Poly, mut x: f64) -> f64 {
    let dp = p.derivative();
    for _ in 0..8 {
        let d = dp.eval(x);
        if d == 0.0 {
            break;
        }
        let step = p.eval(x) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Frequencies `ω ≥ 0` where `M(jω)` is negative real, ascending.
pub fn phase_crossovers(tf: &RationalTransferFunction) -> Result<Vec<Crossover>> {
    if tf.num.is_zero() {
        return Err(RobustnessError::DegenerateNumerator);
    }
    let (nr, ni) = split_on_imaginary_axis(&tf.num);
    let (dr, di) = split_on_imaginary_axis(&tf.den);
    // N conj(D) = (NR DR + NI DI) + j (NI DR - NR DI)
    let re = even_part_in_u(&nr.mul(&dr).add(&ni.mul(&di)));
    let im_odd = ni.mul(&dr).add(&nr.mul(&di).scale(-1.0));
    let im_over_omega = even_part_in_u(&Poly::new(im_odd.coeffs().iter().skip(1).copied().collect()));

    let magnitude = |omega: f64| tf.eval(Complex64::new(0.0, omega)).norm();
    let mut out = Vec::new();
    if tf.dc_gain() < 0.0 {
        out.push(Crossover {
            omega_pc: 0.0,
            magnitude: magnitude(0.0),
        });
    }
    if !im_over_omega.is_zero() {
        let mut us: Vec<f64> = im_over_omega
            .roots()
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-8 * z.norm().max(1.0) && z.re >= -1e-10)
            .map(|z| newton_polish(&im_over_omega, z.re.max(0.0)).max(0.0))
            .filter(|&u| u > 1e-14)
            .collect();
        us.sort_by(f64::total_cmp);
        us.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        for u in us {
            if re.eval(u) > 0.0 {
                let omega_pc = u.sqrt();
                out.push(Crossover {
                    omega_pc,
                    magnitude: magnitude(omega_pc),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub crossovers: Vec<Crossover>,
    /// `min 1/|M(jω_pc)|`; infinite when there is no crossover.
    pub effective_margin: f64,
    /// Crossover attaining the margin.
    pub omega_pc: Option<f64>,
    pub perturbed_edge: Option<DirectedEdge>,
}

pub fn gain_margin(tf: &RationalTransferFunction) -> Result<MarginReport> {
    let scale = tf.den.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if let Some(root) = tf
        .den
        .roots()
        .into_iter()
        .find(|z| z.re >= -1e-12 * scale.max(1.0))
    {
        return Err(RobustnessError::UnstableNominal(root));
    }
    let crossovers = phase_crossovers(tf)?;
    let mut best: Option<Crossover> = None;
    // ascending ω, so strict comparison keeps the smaller frequency on ties
    for c in &crossovers {
        if best.is_none_or(|b| 1.0 / c.magnitude < 1.0 / b.magnitude) {
            best = Some(*c);
        }
    }
    Ok(MarginReport {
        effective_margin: best.map_or(f64::INFINITY, |b| 1.0 / b.magnitude),
        omega_pc: best.map(|b| b.omega_pc),
        crossovers,
        perturbed_edge: None,
    })
}

pub fn edge_margin(g: &PseudoGraph, edge: DirectedEdge) -> Result<MarginReport> {
    let tf = edge_transfer_function(g, edge)?;
    let mut report = gain_margin(&tf)?;
    report.perturbed_edge = Some(edge);
    Ok(report)
}

/// Largest leading index accepted for a path with `n` nodes: `n/2` for even
/// `n`, `⌈n/2⌉` for odd `n`.
pub fn leading_range(n: usize) -> usize {
    n.div_ceil(2)
}

/// `n / (n - ℓ)` for unit-weight paths, perturbing edge `ℓ → ℓ+1`.
pub fn closed_form_leading_margin(n: usize, l: usize) -> Result<f64> {
    if n < 2 || l == 0 || l > leading_range(n) || l >= n {
        return Err(RobustnessError::LeadingIndexOutOfRange { n, l });
    }
    Ok(n as f64 / (n - l) as f64)
}

/// Most negative `Δ` on `edge` that keeps consensus, located by scanning the
/// feasibility test down to `-search_limit` and bisecting the first loss.
/// When feasibility is lost through a real eigenvalue at the origin the
/// result is refined with `det(A + ΔBC) = den(0) + Δ num(0)`.
pub fn critical_perturbation_oracle(g: &PseudoGraph, edge: DirectedEdge, search_limit: f64) -> Result<f64> {
    let col = g.edge_column(edge)?;
    let inc = incidence_set(g)?;
    let base = laplacian(g).matrix;
    let direction = inc.e_out.column(col) * inc.e.column(col).transpose();
    let feasible = |delta: f64| consensus_feasible(&(&base + &direction * delta)).feasible;
    if !feasible(0.0) {
        return Err(RobustnessError::NominalInfeasible);
    }

    let steps = 2000;
    let h = search_limit / steps as f64;
    let mut hi = 0.0;
    let mut lo = None;
    for k in 1..=steps {
        let d = -(k as f64) * h;
        if feasible(d) {
            hi = d;
        } else {
            lo = Some(d);
            break;
        }
    }
    let mut lo = lo.ok_or(RobustnessError::NoCrossingWithinLimit(search_limit))?;
    while hi - lo > 1e-13 * search_limit.max(1.0) {
        let mid = 0.5 * (hi + lo);
        if mid == hi || mid == lo {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let tf = edge_transfer_function(g, edge)?;
    let num0 = tf.num.eval(0.0);
    if num0 != 0.0 {
        let exact = -tf.den.eval(0.0) / num0;
        if (exact - hi).abs() <= 1e-6 * exact.abs().max(1.0) {
            return Ok(exact);
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "class", content = "index")]
pub enum EdgeSelector {
    /// Edge `ℓ → ℓ+1`.
    Leading(usize),
    /// `n/2 → n/2+1` for even `n`; for odd `n` the lower (`(n-1)/2 → (n+1)/2`)
    /// or upper (`(n+1)/2 → (n+3)/2`) of the two middle edges.
    Central { upper: bool },
    /// `k`-th forward edge from the end; `Trailing(1)` is `n-1 → n`.
    Trailing(usize),
}

impl EdgeSelector {
    pub fn edge(&self, n: usize) -> Result<DirectedEdge> {
        let tail = match *self {
            EdgeSelector::Leading(l) => l,
            EdgeSelector::Central { upper } => {
                if n.is_multiple_of(2) {
                    n / 2
                } else if upper {
                    n.div_ceil(2)
                } else {
                    n / 2
                }
            }
            EdgeSelector::Trailing(k) => n.saturating_sub(k),
        };
        if tail == 0 || tail >= n {
            return Err(RobustnessError::SelectorOutOfRange {
                n,
                selector: format!("{self:?}"),
            });
        }
        Ok(DirectedEdge::new(tail, tail + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub edge: DirectedEdge,
    pub effective_margin: f64,
    pub omega_pc: Option<f64>,
    pub crossovers: Vec<Crossover>,
}

/// Margins of the selected edge on unit-weight paths, one row per `n`.
pub fn margin_sweep(n_range: std::ops::RangeInclusive<usize>, selector: EdgeSelector) -> Result<Vec<SweepRow>> {
    let ns: Vec<usize> = n_range.collect();
    ns.par_iter()
        .map(|&n| {
            let edge = selector.edge(n)?;
            let g = crate::graph::unit_path(n)?;
            let report = edge_margin(&g, edge)?;
            Ok(SweepRow {
                n,
                edge,
                effective_margin: report.effective_margin,
                omega_pc: report.omega_pc,
                crossovers: report.crossovers,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, unit_path};
    use nalgebra::dvector;

    fn e(t: usize, h: usize) -> DirectedEdge {
        DirectedEdge::new(t, h)
    }

    fn tf(n: usize, t: usize, h: usize) -> RationalTransferFunction {
        edge_transfer_function(&unit_path(n).unwrap(), e(t, h)).unwrap()
    }

    #[test]
    fn p2_matrices() {
        let g = path_graph(2, &[0.7], &[1.9]).unwrap();
        let sys = edge_agreement_matrices(&g, e(1, 2)).unwrap();
        assert!((sys.a[(0, 0)] + 2.6).abs() < 1e-15);
        assert_eq!(sys.b, dvector![-1.0]);
        assert_eq!(sys.c, dvector![1.0]);
        let tf = transfer_function(&sys.a, &sys.b, &sys.c);
        assert_eq!(tf.num.coeffs(), &[1.0]);
        assert!((tf.den.coeffs()[0] - 2.6).abs() < 1e-15);
    }

    #[test]
    fn pattern_vectors() {
        let sys = edge_agreement_matrices(&unit_path(3).unwrap(), e(1, 2)).unwrap();
        assert_eq!(sys.b, dvector![-1.0, 0.0]);
        assert_eq!(sys.c, dvector![1.0, 0.0]);
        let g = path_graph(5, &[2.0, 1.0, 1.3, 3.2], &[0.1, 1.04, 0.15, 2.0]).unwrap();
        let sys = edge_agreement_matrices(&g, e(4, 3)).unwrap();
        assert_eq!(sys.b, dvector![0.0, 0.0, 1.0, -1.0]);
        assert_eq!(sys.c, dvector![0.0, 0.0, -1.0, 0.0]);
        assert!(edge_agreement_matrices(&g, e(1, 3)).is_err());
    }

    #[test]
    fn catalog_entries() {
        let t = tf(3, 1, 2);
        assert_eq!(t.num.descending(), vec![1.0, 2.0]);
        assert_eq!(t.den.descending(), vec![1.0, 4.0, 3.0]);
        let t = tf(4, 2, 3);
        assert_eq!(t.num.descending(), vec![1.0, 3.0, 2.0]);
        assert_eq!(t.den.descending(), vec![1.0, 6.0, 10.0, 4.0]);
        let t = tf(5, 1, 2);
        assert_eq!(t.num.descending(), vec![1.0, 6.0, 10.0, 4.0]);
        assert_eq!(t.den.descending(), vec![1.0, 8.0, 21.0, 20.0, 5.0]);
        assert_eq!(tf(5, 5, 4), t);
    }

    #[test]
    fn closed_loop_identity() {
        let g = path_graph(4, &[1.2, 0.4, 2.0], &[0.9, 1.7, 0.3]).unwrap();
        let sys = edge_agreement_matrices(&g, e(3, 2)).unwrap();
        let t = transfer_function(&sys.a, &sys.b, &sys.c);
        for delta in [-1.3, -0.2, 0.7, 2.5] {
            let perturbed = &sys.a + &sys.b * sys.c.transpose() * delta;
            let direct = crate::poly::characteristic_polynomial(&perturbed);
            let via = t.closed_loop(delta);
            for (x, y) in direct.coeffs().iter().zip(via.coeffs()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn crossovers_and_margins() {
        let c = phase_crossovers(&tf(3, 1, 2)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].omega_pc, 0.0);
        assert!((gain_margin(&tf(3, 1, 2)).unwrap().effective_margin - 1.5).abs() < 1e-12);
        assert!((gain_margin(&tf(4, 2, 3)).unwrap().effective_margin - 2.0).abs() < 1e-12);

        let t = tf(4, 3, 4);
        let c = phase_crossovers(&t).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c[1].omega_pc - 0.5243).abs() < 1e-3);
        assert!((1.0 / c[0].magnitude - 4.0).abs() < 1e-12);
        let m = gain_margin(&t).unwrap();
        assert!((m.effective_margin - 3.2417).abs() < 1e-3);
        assert_eq!(m.omega_pc, Some(c[1].omega_pc));
    }

    #[test]
    fn degenerate_and_unstable() {
        let zero = RationalTransferFunction {
            num: Poly::new(vec![]),
            den: Poly::new(vec![1.0, 1.0]),
        };
        assert_eq!(phase_crossovers(&zero), Err(RobustnessError::DegenerateNumerator));
        let unstable = RationalTransferFunction {
            num: Poly::new(vec![1.0]),
            den: Poly::new(vec![-1.0, 1.0]),
        };
        assert!(matches!(gain_margin(&unstable), Err(RobustnessError::UnstableNominal(_))));
    }

    #[test]
    fn closed_form_range() {
        assert_eq!(closed_form_leading_margin(3, 1).unwrap(), 1.5);
        assert_eq!(closed_form_leading_margin(4, 2).unwrap(), 2.0);
        assert!((closed_form_leading_margin(5, 2).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!(closed_form_leading_margin(5, 3).is_ok());
        assert!(closed_form_leading_margin(5, 4).is_err());
        assert!(closed_form_leading_margin(4, 3).is_err());
        assert!(closed_form_leading_margin(4, 0).is_err());
    }

    #[test]
    fn oracle_examples() {
        let d = critical_perturbation_oracle(&unit_path(3).unwrap(), e(1, 2), 10.0).unwrap();
        assert!((d + 1.5).abs() < 1e-12);
        let d = critical_perturbation_oracle(&unit_path(4).unwrap(), e(2, 3), 10.0).unwrap();
        assert!((d + 2.0).abs() < 1e-12);
        // the P4 last edge loses consensus through an oscillatory pair
        let d = critical_perturbation_oracle(&unit_path(4).unwrap(), e(3, 4), 10.0).unwrap();
        assert!((d.abs() - gain_margin(&tf(4, 3, 4)).unwrap().effective_margin).abs() < 1e-9);
        assert!(matches!(
            critical_perturbation_oracle(&unit_path(3).unwrap(), e(1, 2), 1.0),
            Err(RobustnessError::NoCrossingWithinLimit(_))
        ));
    }

    #[test]
    fn selectors() {
        assert_eq!(EdgeSelector::Central { upper: false }.edge(6).unwrap(), e(3, 4));
        assert_eq!(EdgeSelector::Central { upper: false }.edge(7).unwrap(), e(3, 4));
        assert_eq!(EdgeSelector::Central { upper: true }.edge(7).unwrap(), e(4, 5));
        assert_eq!(EdgeSelector::Trailing(1).edge(9).unwrap(), e(8, 9));
        assert_eq!(EdgeSelector::Leading(2).edge(9).unwrap(), e(2, 3));
        assert!(EdgeSelector::Leading(9).edge(9).is_err());
        assert!(EdgeSelector::Trailing(9).edge(9).is_err());
    }

    #[test]
    fn sweep_central_even() {
        let rows = margin_sweep(4..=10, EdgeSelector::Central { upper: false }).unwrap();
        assert_eq!(rows.len(), 7);
        for r in rows.iter().filter(|r| r.n % 2 == 0) {
            assert!((r.effective_margin - 2.0).abs() < 1e-9, "{r:?}");
        }
    }
}
