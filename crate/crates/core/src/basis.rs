//! Univariate and tensor-product orthogonal polynomial bases.
//!
//! Hermite polynomials follow the physicists' convention (weight `e^{-x^2}`).
//! Legendre and Chebyshev (first kind) live on `[-1, 1]` and are provided for
//! evaluation only.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest degree accepted by the normalized evaluators.
pub const MAX_DEGREE: usize = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    HermitePhysicists,
    Legendre,
    ChebyshevFirst,
    /// Orthonormal Hermite polynomial times `exp(-|x|^2 / 2)`.
    HermiteFunction,
}

impl BasisKind {
    fn is_hermite(self) -> bool {
        matches!(
            self,
            BasisKind::HermitePhysicists | BasisKind::HermiteFunction
        )
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisKind::HermitePhysicists => "hermite",
            BasisKind::Legendre => "legendre",
            BasisKind::ChebyshevFirst => "chebyshev",
            BasisKind::HermiteFunction => "hermite-function",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisFamily {
    pub kind: BasisKind,
    pub dimension: usize,
}

impl BasisFamily {
    pub fn new(kind: BasisKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter(
                "basis dimension must be >= 1".into(),
            ));
        }
        Ok(BasisFamily { kind, dimension })
    }

    pub fn hermite(dimension: usize) -> Result<Self> {
        Self::new(BasisKind::HermitePhysicists, dimension)
    }

    pub fn hermite_function(dimension: usize) -> Result<Self> {
        Self::new(BasisKind::HermiteFunction, dimension)
    }
}

/// A multi-index `(n_1, ..., n_d)`. Ordering is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max_degree(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl<const D: usize> From<[usize; D]> for MultiIndex {
    fn from(v: [usize; D]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite argument {x}")))
    }
}

/// Unnormalized value by forward recurrence.
pub fn eval_univariate(kind: BasisKind, n: usize, x: f64) -> Result<f64> {
    check_x(x)?;
    let poly = match kind {
        BasisKind::HermitePhysicists | BasisKind::HermiteFunction => {
            recur(n, 1.0, 2.0 * x, |k, p1, p0| {
                2.0 * x * p1 - 2.0 * k as f64 * p0
            })
        }
        BasisKind::Legendre => recur(n, 1.0, x, |k, p1, p0| {
            let k = k as f64;
            ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0)
        }),
        BasisKind::ChebyshevFirst => recur(n, 1.0, x, |_, p1, p0| 2.0 * x * p1 - p0),
    };
    Ok(match kind {
        BasisKind::HermiteFunction => poly * (-0.5 * x * x).exp(),
        _ => poly,
    })
}

fn recur(n: usize, p0: f64, p1: f64, step: impl Fn(usize, f64, f64) -> f64) -> f64 {
    if n == 0 {
        return p0;
    }
    let (mut a, mut b) = (p0, p1);
    for k in 1..n {
        let c = step(k, b, a);
        a = b;
        b = c;
    }
    b
}

/// `ln` of the squared norm of the unnormalized degree-`n` polynomial under the
/// family's weight.
pub fn log_norm_squared(kind: BasisKind, n: usize) -> f64 {
    match kind {
        BasisKind::HermitePhysicists | BasisKind::HermiteFunction => {
            ln_factorial(n) + n as f64 * 2f64.ln() + 0.5 * PI.ln()
        }
        BasisKind::Legendre => (2.0 / (2.0 * n as f64 + 1.0)).ln(),
        BasisKind::ChebyshevFirst => {
            if n == 0 {
                PI.ln()
            } else {
                (PI / 2.0).ln()
            }
        }
    }
}

/// `sqrt(n! 2^n sqrt(pi))`, the norm of the physicists' `H_n` under `e^{-x^2}`.
pub fn hermite_norm(n: usize) -> f64 {
    (0.5 * log_norm_squared(BasisKind::HermitePhysicists, n)).exp()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Orthonormal values of degrees `0..=n` at `x` (polynomial part only; the
/// Hermite-function Gaussian factor is not applied).
pub fn orthonormal_upto(kind: BasisKind, n: usize, x: f64) -> Result<Vec<f64>> {
    check_x(x)?;
    if kind.is_hermite() && n > MAX_DEGREE {
        return Err(Error::Capacity(format!("degree {n} exceeds {MAX_DEGREE}")));
    }
    let mut out = Vec::with_capacity(n + 1);
    match kind {
        BasisKind::HermitePhysicists | BasisKind::HermiteFunction => {
            out.push(PI.powf(-0.25));
            if n >= 1 {
                out.push(2f64.sqrt() * x * out[0]);
            }
            for k in 1..n {
                let kf = k as f64;
                let next =
                    (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
                out.push(next);
            }
        }
        BasisKind::Legendre | BasisKind::ChebyshevFirst => {
            for k in 0..=n {
                let v = eval_univariate(kind, k, x)?;
                out.push(v * (-0.5 * log_norm_squared(kind, k)).exp());
            }
        }
    }
    Ok(out)
}

/// Value normalized so that `∫ π_n^2 dω = 1`. For `HermiteFunction` the
/// Gaussian factor `exp(-x^2/2)` is included.
pub fn eval_orthonormal(kind: BasisKind, n: usize, x: f64) -> Result<f64> {
    let v = orthonormal_upto(kind, n, x)?[n];
    Ok(match kind {
        BasisKind::HermiteFunction => v * (-0.5 * x * x).exp(),
        _ => v,
    })
}

/// Product of per-axis orthonormal polynomial values, times `exp(-|x|^2/2)`
/// for Hermite functions. Shared by direct and cached evaluation so both give
/// identical bits.
pub(crate) fn tensor_value<I: IntoIterator<Item = f64>>(
    kind: BasisKind,
    factors: I,
    sq_norm: f64,
) -> f64 {
    let mut v = 1.0;
    for f in factors {
        v *= f;
    }
    match kind {
        BasisKind::HermiteFunction => v * (-0.5 * sq_norm).exp(),
        _ => v,
    }
}

pub fn eval_multivariate(family: &BasisFamily, index: &MultiIndex, point: &[f64]) -> Result<f64> {
    if index.dim() != family.dimension {
        return Err(Error::DimensionMismatch {
            expected: family.dimension,
            got: index.dim(),
        });
    }
    if point.len() != family.dimension {
        return Err(Error::DimensionMismatch {
            expected: family.dimension,
            got: point.len(),
        });
    }
    let mut factors = Vec::with_capacity(point.len());
    for (&n, &x) in index.0.iter().zip(point) {
        factors.push(orthonormal_upto(family.kind, n, x)?[n]);
    }
    let sq: f64 = point.iter().map(|x| x * x).sum();
    Ok(tensor_value(family.kind, factors, sq))
}

/// Zeros of the degree-`m` physicists' Hermite polynomial, ascending.
pub fn hermite_zeros(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::EmptyGrid);
    }
    if m > MAX_DEGREE {
        return Err(Error::Capacity(format!("degree {m} exceeds {MAX_DEGREE}")));
    }
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut z: Vec<f64> = SymmetricEigen::new(jacobi)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    z.sort_by(|a, b| a.total_cmp(b));

    // one Newton step; p_m' = sqrt(2m) p_{m-1} for the orthonormal family
    for zi in z.iter_mut() {
        let p = orthonormal_upto(BasisKind::HermitePhysicists, m, *zi)?;
        let dp = (2.0 * m as f64).sqrt() * p[m - 1];
        if dp != 0.0 {
            *zi -= p[m] / dp;
        }
    }
    for i in 0..m / 2 {
        let v = 0.5 * (z[m - 1 - i] - z[i]);
        z[i] = -v;
        z[m - 1 - i] = v;
    }
    if m % 2 == 1 {
        z[m / 2] = 0.0;
    }
    Ok(z)
}
