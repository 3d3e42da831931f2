//! Real polynomials, companion-matrix roots and the Faddeev–LeVerrier
//! characteristic-polynomial recursion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

/// Real polynomial, coefficients in ascending powers (`coeffs[k]` multiplies `s^k`).
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

/// Serialised as a coefficient list, highest power first.
impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.descending().serialize(serializer)
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// From coefficients listed highest power first, as polynomials are printed.
    pub fn from_descending(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().rev().copied().collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn descending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, k: usize| p.coeffs.get(k).copied().unwrap_or(0.0);
        Poly::new((0..len).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn scale(&self, factor: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// All complex roots, as eigenvalues of the companion matrix of the monic
    /// normalisation. Exact zero roots (vanishing low-order coefficients) are
    /// split off before the eigenvalue solve.
    pub fn roots(&self) -> Vec<Complex64> {
        let zeros = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros.min(self.degree())];
        let reduced = &self.coeffs[zeros.min(self.degree())..];
        let d = reduced.len() - 1;
        if d == 0 {
            return roots;
        }
        let lead = reduced[d];
        let mut companion = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -reduced[i] / lead;
        }
        roots.extend(companion.complex_eigenvalues().iter().copied());
        roots
    }
}

/// Scalar used by the Faddeev–LeVerrier recursion. Operations return `None`
/// on overflow or inexact division so an exact integer run can bail out.
pub(crate) trait RecursionScalar: Copy {
    fn zero() -> Self;
    fn from_f64(x: f64) -> Option<Self>;
    fn add(self, o: Self) -> Option<Self>;
    fn mul(self, o: Self) -> Option<Self>;
    fn neg(self) -> Option<Self>;
    fn div_index(self, k: usize) -> Option<Self>;
    fn to_f64(self) -> f64;
}

impl RecursionScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }
    fn add(self, o: Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(self, o: Self) -> Option<Self> {
        Some(self * o)
    }
    fn neg(self) -> Option<Self> {
        Some(-self)
    }
    fn div_index(self, k: usize) -> Option<Self> {
        Some(self / k as f64)
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl RecursionScalar for i128 {
    fn zero() -> Self {
        0
    }
    fn from_f64(x: f64) -> Option<Self> {
        (x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i128)
    }
    fn add(self, o: Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn mul(self, o: Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn neg(self) -> Option<Self> {
        self.checked_neg()
    }
    fn div_index(self, k: usize) -> Option<Self> {
        let k = k as i128;
        (self % k == 0).then_some(self / k)
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Output of the recursion: `det(sI - A) = Σ char[k] s^k` (ascending) and
/// `c · adj(sI - A) · b` (ascending).
pub(crate) struct Leverrier {
    pub characteristic: Vec<f64>,
    pub output_adjugate: Vec<f64>,
}

fn leverrier_generic<T: RecursionScalar>(
    a: &DMatrix<f64>,
    b: &[f64],
    c: &[f64],
) -> Option<Leverrier> {
    let d = a.nrows();
    let conv = |x: f64| T::from_f64(x);
    let am: Vec<Vec<T>> = (0..d)
        .map(|i| (0..d).map(|j| conv(a[(i, j)])).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()?;
    let bv: Vec<T> = b.iter().map(|&x| conv(x)).collect::<Option<_>>()?;
    let cv: Vec<T> = c.iter().map(|&x| conv(x)).collect::<Option<_>>()?;

    // M_1 = I, c_{d-1} = -tr(A); M_k = A M_{k-1} + c_{d-k+1} I, c_{d-k} = -tr(A M_k)/k
    // adj(sI - A) = Σ_{k=1}^{d} M_k s^{d-k}
    let mut characteristic = vec![T::zero(); d + 1];
    characteristic[d] = T::from_f64(1.0)?;
    let mut output = vec![T::zero(); d];
    let mut mk: Vec<Vec<T>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { characteristic[d] } else { T::zero() }).collect())
        .collect();
    for k in 1..=d {
        if k > 1 {
            // M_k = A · M_{k-1} + c_{d-k+1} I
            let mut next = vec![vec![T::zero(); d]; d];
            for i in 0..d {
                for j in 0..d {
                    let mut acc = T::zero();
                    for l in 0..d {
                        acc = acc.add(am[i][l].mul(mk[l][j])?)?;
                    }
                    if i == j {
                        acc = acc.add(characteristic[d - k + 1])?;
                    }
                    next[i][j] = acc;
                }
            }
            mk = next;
        }
        // c · M_k · b
        let mut cmb = T::zero();
        for i in 0..d {
            let mut row = T::zero();
            for j in 0..d {
                row = row.add(mk[i][j].mul(bv[j])?)?;
            }
            cmb = cmb.add(cv[i].mul(row)?)?;
        }
        output[d - k] = cmb;
        // tr(A M_k)
        let mut tr = T::zero();
        for i in 0..d {
            for l in 0..d {
                tr = tr.add(am[i][l].mul(mk[l][i])?)?;
            }
        }
        characteristic[d - k] = tr.neg()?.div_index(k)?;
    }
    Some(Leverrier {
        characteristic: characteristic.into_iter().map(T::to_f64).collect(),
        output_adjugate: output.into_iter().map(T::to_f64).collect(),
    })
}

/// Runs the recursion in exact integer arithmetic when every entry is an
/// integer and nothing overflows, otherwise in floating point.
pub(crate) fn leverrier(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Leverrier {
    assert!(a.is_square() && a.nrows() == b.len() && a.nrows() == c.len());
    leverrier_generic::<i128>(a, b, c)
        .or_else(|| leverrier_generic::<f64>(a, b, c))
        .expect("floating-point recursion cannot fail")
}

/// `det(sI - A)` as a polynomial.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Poly {
    let zeros = vec![0.0; a.nrows()];
    Poly::new(leverrier(a, &zeros, &zeros).characteristic)
}
