//! Gaussian-Hermite moments of orders 2 to 4 and their rotation invariants.
//!
//! With the Hermite-function basis `psi_n = pi_n exp(-|x|^2/2)` the moment
//! `m_n = integral f pi_n exp(-|x|^2/2)` of a reconstruction `sum c_k psi_k`
//! is the coefficient `c_n` itself.

use std::fmt;

use nalgebra::DMatrix;

use crate::basis::{
    hermite_norm, hermite_zeros, orthonormal_upto, BasisFamily, BasisKind, MultiIndex,
};
use crate::collocation::{GridSource, NodeGrid};
use crate::dantzig::SolveResult;
use crate::error::{Error, Result};
use crate::indexsets::IndexSet;
use crate::quadrature::gauss_hermite;
use crate::series::SparseSeries;

/// Moment indices, grouped by order and by descending first entry.
pub const REQUIRED: [(usize, usize); 12] = [
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

fn slot(p: usize, q: usize) -> Option<usize> {
    REQUIRED.iter().position(|&r| r == (p, q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentVector {
    values: [f64; 12],
}

impl MomentVector {
    pub fn zero() -> Self {
        MomentVector { values: [0.0; 12] }
    }

    /// Values in the order of [`REQUIRED`].
    pub fn from_array(values: [f64; 12]) -> Self {
        MomentVector { values }
    }

    /// Every required index must be present; other indices are ignored.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a MultiIndex, f64)>) -> Result<Self> {
        let mut values = [f64::NAN; 12];
        for (n, v) in pairs {
            if let [p, q] = n.0[..] {
                if let Some(k) = slot(p, q) {
                    values[k] = v;
                }
            }
        }
        if let Some(k) = values.iter().position(|v| v.is_nan()) {
            let (p, q) = REQUIRED[k];
            return Err(Error::MissingIndex(vec![p, q]));
        }
        Ok(MomentVector { values })
    }

    pub fn get(&self, p: usize, q: usize) -> Option<f64> {
        slot(p, q).map(|k| self.values[k])
    }

    pub fn set(&mut self, p: usize, q: usize, v: f64) -> Result<()> {
        let k = slot(p, q).ok_or_else(|| Error::MissingIndex(vec![p, q]))?;
        self.values[k] = v;
        Ok(())
    }

    pub fn as_array(&self) -> &[f64; 12] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        REQUIRED.iter().copied().zip(self.values.iter().copied())
    }

    /// Moments against the unnormalized products `H_p(x) H_q(y) exp(-|x|^2/2)`,
    /// the scale in which [`invariants`] are rotation invariant.
    pub fn hermite_scaled(&self) -> Self {
        let mut values = self.values;
        for (v, &(p, q)) in values.iter_mut().zip(&REQUIRED) {
            *v *= hermite_norm(p) * hermite_norm(q);
        }
        MomentVector { values }
    }
}

/// Moments from a solve in the Hermite-function basis over `indexset`.
pub fn moments_from_coefficients(
    result: &SolveResult,
    indexset: &IndexSet,
    basis: &BasisFamily,
) -> Result<MomentVector> {
    if basis.kind != BasisKind::HermiteFunction {
        return Err(Error::WrongBasis(format!(
            "moments need the hermite-function basis, got {}",
            basis.kind
        )));
    }
    if basis.dimension != 2 || indexset.d != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: indexset.d,
        });
    }
    if result.coefficients.len() != indexset.len() {
        return Err(Error::DimensionMismatch {
            expected: indexset.len(),
            got: result.coefficients.len(),
        });
    }
    let mut values = [0.0; 12];
    for (v, &(p, q)) in values.iter_mut().zip(&REQUIRED) {
        let k = indexset
            .position(&MultiIndex(vec![p, q]))
            .ok_or(Error::MissingIndex(vec![p, q]))?;
        *v = result.coefficients[k];
    }
    Ok(MomentVector { values })
}

/// Moments of a sparse Hermite-function series; absent terms are zero.
pub fn moments_from_series(series: &SparseSeries) -> Result<MomentVector> {
    if series.basis.kind != BasisKind::HermiteFunction {
        return Err(Error::WrongBasis(format!(
            "moments need the hermite-function basis, got {}",
            series.basis.kind
        )));
    }
    if series.basis.dimension != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: series.basis.dimension,
        });
    }
    let mut m = MomentVector::zero();
    for (n, c) in series.terms() {
        if let Some(k) = slot(n.0[0], n.0[1]) {
            m.values[k] = *c;
        }
    }
    Ok(m)
}

/// Weights for summing over grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SummationRule {
    /// Unit weight per node.
    Riemann,
    /// Gauss-Hermite weights times `exp(x^2)` per axis; exact for products of
    /// Hermite functions of total degree below `2M` per axis on a grid of `M`
    /// zeros.
    #[default]
    GaussHermite,
}

/// `sum_j w_j f(x_j) psi_n(x_j)` over a two-dimensional node grid.
pub fn discrete_moments(
    values: &[f64],
    grid: &NodeGrid,
    rule: SummationRule,
) -> Result<MomentVector> {
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dim(),
        });
    }
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let weight: Box<dyn Fn(f64) -> Result<f64>> = match rule {
        SummationRule::Riemann => Box::new(|_| Ok(1.0)),
        SummationRule::GaussHermite => {
            if !matches!(
                grid.source,
                GridSource::HermiteZerosTensor | GridSource::ImagePixelsMapped
            ) {
                return Err(Error::InvalidParameter(
                    "Gauss-Hermite summation needs a Hermite-zero grid".into(),
                ));
            }
            let m = (grid.len() as f64).sqrt().round() as usize;
            if m * m != grid.len() {
                return Err(Error::UnsupportedShape(format!(
                    "{} nodes is not a square grid",
                    grid.len()
                )));
            }
            let (z, w) = gauss_hermite(m)?;
            Box::new(move |x: f64| {
                let k = z.partition_point(|v| *v < x - 1e-9);
                match z.get(k) {
                    Some(zk) if (zk - x).abs() <= 1e-9 * (1.0 + x.abs()) => {
                        Ok(w[k] * (x * x).exp())
                    }
                    _ => Err(Error::InvalidParameter(format!(
                        "node {x} is not a Hermite zero"
                    ))),
                }
            })
        }
    };
    let mut acc = [0.0; 12];
    for (node, &f) in grid.nodes().zip(values) {
        if f == 0.0 {
            continue;
        }
        let (x, y) = (node[0], node[1]);
        let g = (-0.5 * (x * x + y * y)).exp();
        let px = orthonormal_upto(BasisKind::HermitePhysicists, 4, x)?;
        let py = orthonormal_upto(BasisKind::HermitePhysicists, 4, y)?;
        let wf = weight(x)? * weight(y)? * f * g;
        for (a, &(p, q)) in acc.iter_mut().zip(&REQUIRED) {
            *a += wf * px[p] * py[q];
        }
    }
    Ok(MomentVector { values: acc })
}

/// Moments of a function by tensor Gauss-Hermite quadrature with `nodes`
/// points per axis.
pub fn function_moments(f: impl Fn(f64, f64) -> f64, nodes: usize) -> Result<MomentVector> {
    let z = hermite_zeros(nodes)?;
    let mut pts = Vec::with_capacity(nodes * nodes);
    let mut vals = Vec::with_capacity(nodes * nodes);
    for &x in &z {
        for &y in &z {
            pts.push(vec![x, y]);
            vals.push(f(x, y));
        }
    }
    let grid = NodeGrid::from_points(&pts, GridSource::HermiteZerosTensor)?;
    discrete_moments(&vals, &grid, SummationRule::GaussHermite)
}

/// Coefficients `T[a][b]` with `psi_a(R u) = sum_b T[a][b] psi_b(u)` over the
/// order-`k` indices `(k, 0), (k-1, 1), ..., (0, k)`, where `R` is the
/// counterclockwise rotation by `theta`.
pub fn order_rotation_matrix(k: usize, theta: f64) -> Result<DMatrix<f64>> {
    let (z, w) = gauss_hermite(k + 2)?;
    let (s, c) = theta.sin_cos();
    let mut t = DMatrix::zeros(k + 1, k + 1);
    for (i, &u1) in z.iter().enumerate() {
        for (j, &u2) in z.iter().enumerate() {
            let (r1, r2) = (c * u1 - s * u2, s * u1 + c * u2);
            let pr1 = orthonormal_upto(BasisKind::HermitePhysicists, k, r1)?;
            let pr2 = orthonormal_upto(BasisKind::HermitePhysicists, k, r2)?;
            let pu1 = orthonormal_upto(BasisKind::HermitePhysicists, k, u1)?;
            let pu2 = orthonormal_upto(BasisKind::HermitePhysicists, k, u2)?;
            let wij = w[i] * w[j];
            for a in 0..=k {
                let ra = pr1[k - a] * pr2[a];
                for b in 0..=k {
                    t[(a, b)] += wij * ra * pu1[k - b] * pu2[b];
                }
            }
        }
    }
    Ok(t)
}

/// Moments of `f o R_{-theta}` from the moments of `f`, through the exact
/// action of rotations on each order. Operates on orthonormal-scale moments.
pub fn rotate_moment_model(m: &MomentVector, theta: f64) -> Result<MomentVector> {
    if theta == 0.0 {
        return Ok(*m);
    }
    let mut out = [0.0; 12];
    let mut start = 0;
    for k in 2..=4 {
        let t = order_rotation_matrix(k, theta)?;
        for a in 0..=k {
            out[start + a] = (0..=k).map(|b| t[(a, b)] * m.values[start + b]).sum();
        }
        start += k + 1;
    }
    Ok(MomentVector { values: out })
}

/// Moments of `f o R_{-theta}` by resampling the rotated function on a
/// quadrature grid of `nodes` points per axis.
pub fn rotated_function_moments(
    f: impl Fn(f64, f64) -> f64,
    theta: f64,
    nodes: usize,
) -> Result<MomentVector> {
    let (s, c) = theta.sin_cos();
    function_moments(|x, y| f(c * x + s * y, -s * x + c * y), nodes)
}

pub const INVARIANT_COUNT: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantVector {
    pub phi: [f64; INVARIANT_COUNT],
}

impl InvariantVector {
    pub const CSV_HEADER: &'static str = "phi1,phi2,phi3,phi4,phi5,phi6,phi7,phi8,phi9,phi10,phi11";

    pub fn l1_distance(&self, other: &InvariantVector) -> f64 {
        self.phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.phi.iter().map(|v| v.abs()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.phi.iter().all(|v| v.is_finite())
    }

    pub fn to_csv_row(&self) -> String {
        self.phi
            .iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let parts: Vec<&str> = row.trim().split(',').collect();
        if parts.len() != INVARIANT_COUNT {
            return Err(Error::Parse(format!(
                "expected {INVARIANT_COUNT} fields, got {}",
                parts.len()
            )));
        }
        let mut phi = [0.0; INVARIANT_COUNT];
        for (v, s) in phi.iter_mut().zip(parts) {
            *v = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
        }
        Ok(InvariantVector { phi })
    }
}

impl fmt::Display for InvariantVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_row())
    }
}

/// The eleven invariants of orders 2 to 4, evaluated on `m` as given.
///
/// Printed forms are repaired where they are not invariant: the squared sums
/// in phi5, phi6 and phi10 are read as `(m03 + m21)^2` and `(m21 + m03)^2`,
/// phi6 and phi11 take the sign that makes them the imaginary parts of the
/// complex forms whose real parts are phi5 and phi10, and phi9 carries the
/// `(m40 - m04)` term that pairs it with phi8.
pub fn invariants(m: &MomentVector) -> InvariantVector {
    let g = |p, q| m.get(p, q).unwrap_or(0.0);
    let (m20, m11, m02) = (g(2, 0), g(1, 1), g(0, 2));
    let (m30, m21, m12, m03) = (g(3, 0), g(2, 1), g(1, 2), g(0, 3));
    let (m40, m31, m22, m13, m04) = (g(4, 0), g(3, 1), g(2, 2), g(1, 3), g(0, 4));
    let a = m30 + m12;
    let b = m03 + m21;
    let (a2, b2) = (a * a, b * b);
    let quartic = a2 * a2 - 6.0 * a2 * b2 + b2 * b2;
    let phi = [
        m20 + m02,
        a2 + b2,
        (m20 - m02) * (a2 - b2) + 4.0 * m11 * a * b,
        m11 * (a2 - b2) - (m20 - m02) * a * b,
        (m30 - 3.0 * m12) * a * (a2 - 3.0 * b2) + (m03 - 3.0 * m21) * b * (b2 - 3.0 * a2),
        (m30 - 3.0 * m12) * b * (b2 - 3.0 * a2) + (3.0 * m21 - m03) * a * (a2 - 3.0 * b2),
        m40 + 2.0 * m22 + m04,
        (m40 - m04) * (a2 - b2) + 4.0 * (m31 + m13) * a * b,
        (m31 + m13) * (a2 - b2) - (m40 - m04) * a * b,
        (m40 - 6.0 * m22 + m04) * quartic + 16.0 * (m31 - m13) * a * b * (a2 - b2),
        (m40 - 6.0 * m22 + m04) * a * b * (b2 - a2) + (m31 - m13) * quartic,
    ];
    InvariantVector { phi }
}

/// Invariants of orthonormal-scale moments, after [`MomentVector::hermite_scaled`].
pub fn hermite_invariants(m: &MomentVector) -> InvariantVector {
    invariants(&m.hermite_scaled())
}
