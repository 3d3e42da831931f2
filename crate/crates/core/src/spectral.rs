//! Left null vectors of non-symmetric Laplacians and the consensus value.
//!
//! Under `ẋ = -Lx` on a feasible graph every state converges to
//! `Σ p_i x_i(0) / Σ p_i`, where `p` spans the left null space of `L`.
//! Three routes to `p` are provided:
//!
//! - [`left_null_vector_projection`]: intersect `null(E)` with
//!   `range(W E_outᵀ)` through the product of the two orthogonal projectors
//!   (positive weights only);
//! - [`left_null_vector_path`]: the ratio recursion for tridiagonal path
//!   Laplacians, valid for any nonzero weights;
//! - [`left_null_vector_direct`]: a dense SVD null-space solve of `Lᵀ`.
//!
//! All three normalise `p` so that its last entry is 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{incidence_set, laplacian, GraphError, IncidenceSet, Laplacian, PseudoGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("projection method needs strictly positive weights; edge column {0} is {1}")]
    NegativeWeightUnsupported(usize, f64),

    #[error("no eigenvector of P_U P_V with unit eigenvalue (smallest distance {0:e})")]
    NoUnitEigenvector(f64),

    #[error("Laplacian is not tridiagonal")]
    NotTridiagonal,

    #[error("zero superdiagonal entry in row {0}")]
    ZeroSuperdiagonal(usize),

    #[error("zero eigenvalue of the Laplacian is not simple")]
    RankDeficiencyNotOne,

    #[error("last entry of the null vector vanishes; cannot normalise")]
    DegenerateNormalization,

    #[error("null vector entries sum to zero; consensus value undefined")]
    ZeroWeightSum,

    #[error("initial state has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, SpectralError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

/// A left null vector `p` of a Laplacian, normalised to `p_n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftNullVector {
    pub p: DVector<f64>,
    /// `max_i |(Lᵀp)_i|`
    pub residual: f64,
    pub sign_pattern: Vec<Sign>,
}

impl LeftNullVector {
    fn from_unnormalised(p: DVector<f64>, l: &DMatrix<f64>) -> Result<Self> {
        let n = p.len();
        let scale = p.amax();
        if scale == 0.0 || p[n - 1].abs() <= 1e-12 * scale {
            return Err(SpectralError::DegenerateNormalization);
        }
        let p = &p / p[n - 1];
        let residual = (l.transpose() * &p).amax();
        let sign_pattern = p
            .iter()
            .map(|&x| {
                if x > 0.0 {
                    Sign::Positive
                } else if x < 0.0 {
                    Sign::Negative
                } else {
                    Sign::Zero
                }
            })
            .collect();
        Ok(Self {
            p,
            residual,
            sign_pattern,
        })
    }

    pub fn sum(&self) -> f64 {
        self.p.sum()
    }

    pub fn is_positive(&self) -> bool {
        self.sign_pattern.iter().all(|&s| s == Sign::Positive)
    }

    /// Residual bound `1e-9 · max(1, ‖L‖∞ ‖p‖∞)`.
    pub fn residual_within_contract(&self, l: &DMatrix<f64>) -> bool {
        self.residual <= 1e-9 * f64::max(1.0, inf_norm(l) * self.p.amax())
    }
}

pub(crate) fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `L* = A - D + (2 d_g + eps) I` with `d_g` the largest weighted out-degree.
pub fn l_star(g: &PseudoGraph, eps: f64) -> Result<DMatrix<f64>> {
    if eps <= 0.0 || eps.is_nan() {
        return Err(SpectralError::NonPositiveEpsilon(eps));
    }
    let adjacency = g.adjacency();
    let degrees = g.out_degrees();
    let d_g = degrees.max();
    let mut m = adjacency;
    for i in 0..g.n() {
        m[(i, i)] += 2.0 * d_g + eps - degrees[i];
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventualPositivity {
    PositiveAt(usize),
    NotWithinBound,
}

/// Smallest `k <= max_power` with every entry of `m^k` strictly positive.
pub fn is_eventually_positive(m: &DMatrix<f64>, max_power: usize) -> EventualPositivity {
    assert!(m.is_square(), "matrix must be square");
    let mut power = m.clone();
    for k in 1..=max_power {
        if k > 1 {
            power = &power * m;
        }
        if power.iter().all(|&x| x > 0.0) {
            return EventualPositivity::PositiveAt(k);
        }
    }
    EventualPositivity::NotWithinBound
}

/// Bases for `null(E)` and `range(W E_outᵀ)` with their orthogonal projectors.
#[derive(Debug, Clone)]
pub struct NullRangeBases {
    /// `2m × (2m - n + 1)`
    pub u: DMatrix<f64>,
    /// `2m × n`, the columns of `W E_outᵀ`
    pub v: DMatrix<f64>,
    pub p_u: DMatrix<f64>,
    pub p_v: DMatrix<f64>,
}

fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let gram = basis.transpose() * basis;
    let inv = gram
        .cholesky()
        .expect("basis has full column rank")
        .inverse();
    basis * inv * basis.transpose()
}

/// Builds `U` exactly from the relation matrix: for every column `c` outside
/// the oriented tree columns, `u_c = e_c - Σ_k R[k, c] e_{tree(k)}`. Since
/// `R` restricted to the tree columns is the identity, `R u_c = 0` and
/// therefore `E u_c = E_tree R u_c = 0`.
pub fn null_range_bases(g: &PseudoGraph, inc: &IncidenceSet) -> NullRangeBases {
    let cols = inc.edge_order.len();
    let free: Vec<usize> = (0..cols).filter(|c| !inc.tree_columns.contains(c)).collect();
    let mut u = DMatrix::zeros(cols, free.len());
    for (j, &c) in free.iter().enumerate() {
        u[(c, j)] = 1.0;
        for (k, &tc) in inc.tree_columns.iter().enumerate() {
            u[(tc, j)] -= inc.relation[(k, c)];
        }
    }
    let w = g.weights().as_diagonal();
    let v = w * inc.e_out.transpose();
    let p_u = projector(&u);
    let p_v = projector(&v);
    NullRangeBases { u, v, p_u, p_v }
}

/// Result of the projection route, with the intersection vector kept for checks.
#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    pub null_vector: LeftNullVector,
    /// `v = W E_outᵀ p` for the normalised `p`.
    pub v: DVector<f64>,
    /// Number of singular directions of `P_U P_V - I` below the unit tolerance.
    pub unit_multiplicity: usize,
    pub bases: NullRangeBases,
}

const UNIT_EIGEN_TOL: f64 = 1e-8;

pub fn projection_outcome(g: &PseudoGraph) -> Result<ProjectionOutcome> {
    if let Some((col, &w)) = g.weights().0.iter().enumerate().find(|(_, &w)| w <= 0.0) {
        return Err(SpectralError::NegativeWeightUnsupported(col, w));
    }
    let inc = incidence_set(g)?;
    let bases = null_range_bases(g, &inc);
    let dim = bases.u.nrows();
    let shifted = &bases.p_u * &bases.p_v - DMatrix::identity(dim, dim);

    // Eigenvectors of P_U P_V for eigenvalue 1 span the null space of the
    // shifted product; read them off the right singular vectors.
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma = &svd.singular_values;
    let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let candidates: Vec<DVector<f64>> = (0..sigma.len())
        .filter(|&i| sigma[i] <= UNIT_EIGEN_TOL)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if candidates.is_empty() {
        return Err(SpectralError::NoUnitEigenvector(smallest));
    }

    let l = laplacian(g).matrix;
    let gram = bases.v.transpose() * &bases.v;
    let gram_chol = gram.cholesky().expect("W E_outᵀ has full column rank");
    let mut best: Option<(f64, DVector<f64>, DVector<f64>)> = None;
    for v in &candidates {
        let y = gram_chol.solve(&(bases.v.transpose() * v));
        let score = (&inc.e * v).norm() + (v - &bases.v * &y).norm() + (l.transpose() * &y).norm() / y.norm();
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, v.clone(), y));
        }
    }
    let (_, v, y) = best.unwrap();
    let scale = y[y.len() - 1];
    let null_vector = LeftNullVector::from_unnormalised(y, &l)?;
    Ok(ProjectionOutcome {
        null_vector,
        v: v / scale,
        unit_multiplicity: candidates.len(),
        bases,
    })
}

pub fn left_null_vector_projection(g: &PseudoGraph) -> Result<LeftNullVector> {
    projection_outcome(g).map(|o| o.null_vector)
}

/// `p_n = 1`, `p_i = p_{i+1} · l_{i+1,i} / l_{i,i+1}`.
pub fn left_null_vector_path(l: &Laplacian) -> Result<LeftNullVector> {
    if !l.is_tridiagonal() {
        return Err(SpectralError::NotTridiagonal);
    }
    let m = &l.matrix;
    let n = l.n();
    let mut p = DVector::zeros(n);
    p[n - 1] = 1.0;
    for i in (0..n - 1).rev() {
        let sup = m[(i, i + 1)];
        if sup == 0.0 {
            return Err(SpectralError::ZeroSuperdiagonal(i + 1));
        }
        p[i] = p[i + 1] * m[(i + 1, i)] / sup;
    }
    LeftNullVector::from_unnormalised(p, m)
}

/// Eigenvalues of `L` with the structural zero (right null vector `1`)
/// deflated exactly: with `S = [1 | e_2 … e_n]`, `S⁻¹ L S` is block upper
/// triangular with a zero first column, and its trailing block has entries
/// `L[i][j] - L[0][j]`.
fn deflated_spectrum(l: &DMatrix<f64>) -> Vec<Complex64> {
    let n = l.nrows();
    let reduced = DMatrix::from_fn(n - 1, n - 1, |i, j| l[(i + 1, j + 1)] - l[(0, j + 1)]);
    reduced.complex_eigenvalues().iter().copied().collect()
}

fn zero_tolerance(l: &DMatrix<f64>) -> f64 {
    1e-8 * spectral_norm(l)
}

pub fn left_null_vector_direct(l: &Laplacian) -> Result<LeftNullVector> {
    let m = &l.matrix;
    let tol = zero_tolerance(m);
    if deflated_spectrum(m).iter().any(|z| z.norm() <= tol) {
        return Err(SpectralError::RankDeficiencyNotOne);
    }
    let svd = m.transpose().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma = &svd.singular_values;
    let (imin, _) = sigma
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    LeftNullVector::from_unnormalised(v_t.row(imin).transpose(), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullVectorMethod {
    Projection,
    PathRecursion,
    Direct,
}

/// Picks the projection route for positive weights, the path recursion for
/// paths with signed weights and the dense solve otherwise.
pub fn left_null_vector(g: &PseudoGraph) -> Result<(NullVectorMethod, LeftNullVector)> {
    if g.weights().0.iter().all(|&w| w > 0.0) {
        return Ok((NullVectorMethod::Projection, left_null_vector_projection(g)?));
    }
    let l = laplacian(g);
    if g.as_path().is_some() {
        return Ok((NullVectorMethod::PathRecursion, left_null_vector_path(&l)?));
    }
    Ok((NullVectorMethod::Direct, left_null_vector_direct(&l)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsensusValue {
    pub value: f64,
    pub weight_sum: f64,
    /// `min x0 <= value <= max x0`
    pub in_hull: bool,
}

pub fn consensus_value(p: &LeftNullVector, x0: &[f64]) -> Result<ConsensusValue> {
    weighted_consensus(p.p.as_slice(), x0)
}

pub(crate) fn weighted_consensus(p: &[f64], x0: &[f64]) -> Result<ConsensusValue> {
    if p.len() != x0.len() {
        return Err(SpectralError::DimensionMismatch {
            expected: p.len(),
            got: x0.len(),
        });
    }
    let weight_sum: f64 = p.iter().sum();
    let scale: f64 = p.iter().map(|x| x.abs()).sum();
    if weight_sum.abs() <= 1e-12 * scale {
        return Err(SpectralError::ZeroWeightSum);
    }
    let value = p.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>() / weight_sum;
    let lo = x0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConsensusValue {
        value,
        weight_sum,
        in_hull: lo <= value && value <= hi,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Full spectrum of `L`; the structural zero is listed first, exactly.
    pub spectrum: Vec<Complex64>,
}

impl Feasibility {
    /// Smallest real part among the non-structural eigenvalues.
    pub fn min_real_part(&self) -> f64 {
        self.spectrum[1..].iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }
}

/// Consensus under `ẋ = -Lx` holds iff 0 is a simple eigenvalue and every
/// other eigenvalue has positive real part. Eigenvalues with modulus below
/// `1e-8 ‖L‖₂` count as zero.
pub fn consensus_feasible(l: &DMatrix<f64>) -> Feasibility {
    let tol = zero_tolerance(l);
    let rest = deflated_spectrum(l);
    let feasible = rest.iter().all(|z| z.norm() > tol && z.re > 0.0);
    let mut spectrum = Vec::with_capacity(rest.len() + 1);
    spectrum.push(Complex64::new(0.0, 0.0));
    spectrum.extend(rest);
    Feasibility { feasible, spectrum }
}
