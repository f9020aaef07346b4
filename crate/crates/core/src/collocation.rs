//! Node grids and the collocation system `X`, `D`, `f`.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{hermite_zeros, orthonormal_upto, tensor_value, BasisFamily};
use crate::error::{Error, Result};
use crate::indexsets::IndexSet;

pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

/// Columns with norm at or below this fraction of the largest column norm
/// count as zero.
pub const ZERO_COLUMN_RTOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSource {
    HermiteZerosTensor,
    ImagePixelsMapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    coords: Vec<f64>,
    dim: usize,
    pub source: GridSource,
}

impl NodeGrid {
    pub fn from_points(points: &[Vec<f64>], source: GridSource) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or(Error::EmptyGrid)?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("non-finite node coordinate".into()));
            }
            coords.extend_from_slice(p);
        }
        Ok(NodeGrid {
            coords,
            dim,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }
}

pub fn tensor_hermite_grid(m: usize, d: usize) -> Result<NodeGrid> {
    tensor_hermite_grid_with_budget(m, d, DEFAULT_NODE_BUDGET)
}

/// Cartesian product of the `m` zeros of `H_m`, first coordinate slowest.
pub fn tensor_hermite_grid_with_budget(m: usize, d: usize, budget: usize) -> Result<NodeGrid> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    let total = (m as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::Capacity(format!(
            "{m}^{d} nodes exceeds budget {budget}"
        )));
    }
    let z = hermite_zeros(m)?;
    let total = total as usize;
    let mut coords = Vec::with_capacity(total * d);
    for code in 0..total {
        let mut c = code;
        let mut node = vec![0.0; d];
        for j in (0..d).rev() {
            node[j] = z[c % m];
            c /= m;
        }
        coords.extend(node);
    }
    Ok(NodeGrid {
        coords,
        dim: d,
        source: GridSource::HermiteZerosTensor,
    })
}

/// Pixel `(r, c)` of an `M x M` image goes to `(Z[c], Z[M-1-r])`; nodes are
/// listed in row-major pixel order.
pub fn map_pixels_to_grid(width: usize, height: usize) -> Result<NodeGrid> {
    if width != height {
        return Err(Error::UnsupportedShape(format!(
            "{width}x{height} image is not square"
        )));
    }
    let m = width;
    let z = hermite_zeros(m)?;
    let mut coords = Vec::with_capacity(2 * m * m);
    for r in 0..m {
        for c in 0..m {
            coords.push(z[c]);
            coords.push(z[m - 1 - r]);
        }
    }
    Ok(NodeGrid {
        coords,
        dim: 2,
        source: GridSource::ImagePixelsMapped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroColumnPolicy {
    /// Fail with a degenerate-column error.
    #[default]
    Reject,
    /// Leave the column out of the solve; its coefficient is pinned to zero.
    Exclude,
}

/// The sample-independent part of a collocation system.
#[derive(Debug, Clone)]
pub struct CollocationMatrix {
    x: Vec<f64>,
    d: Vec<f64>,
    m: usize,
    p: usize,
    active: Vec<usize>,
    pub basis: BasisFamily,
    pub indexset: IndexSet,
    pub grid: NodeGrid,
}

impl CollocationMatrix {
    pub fn build(
        basis: BasisFamily,
        indexset: IndexSet,
        grid: NodeGrid,
        policy: ZeroColumnPolicy,
    ) -> Result<Self> {
        if indexset.d != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: indexset.d,
            });
        }
        if basis.dimension != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: basis.dimension,
            });
        }
        let (m, p, dim) = (grid.len(), indexset.len(), grid.dim());
        let degs: Vec<usize> = (0..dim)
            .map(|j| indexset.iter().map(|n| n.0[j]).max().unwrap_or(0))
            .collect();
        let mut x = vec![0.0; m * p];
        let kind = basis.kind;
        x.par_chunks_mut(p.max(1))
            .enumerate()
            .try_for_each(|(j, row)| -> Result<()> {
                let node = grid.node(j);
                let tables = node
                    .iter()
                    .zip(&degs)
                    .map(|(&xv, &deg)| orthonormal_upto(kind, deg, xv))
                    .collect::<Result<Vec<_>>>()?;
                let sq: f64 = node.iter().map(|v| v * v).sum();
                for (k, n) in indexset.iter().enumerate() {
                    row[k] =
                        tensor_value(kind, n.0.iter().enumerate().map(|(a, &e)| tables[a][e]), sq);
                }
                Ok(())
            })?;
        let mut d = vec![0.0; p];
        for row in x.chunks(p.max(1)) {
            for (dk, v) in d.iter_mut().zip(row) {
                *dk += v * v;
            }
        }
        for dk in d.iter_mut() {
            *dk = dk.sqrt();
        }
        let dmax = d.iter().cloned().fold(0.0, f64::max);
        let mut active = Vec::with_capacity(p);
        for (k, &norm) in d.iter().enumerate() {
            if norm <= ZERO_COLUMN_RTOL * dmax || norm == 0.0 || !norm.is_finite() {
                if policy == ZeroColumnPolicy::Reject {
                    return Err(Error::DegenerateColumn { index: k, norm });
                }
            } else {
                active.push(k);
            }
        }
        Ok(CollocationMatrix {
            x,
            d,
            m,
            p,
            active,
            basis,
            indexset,
            grid,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Row-major `m x p`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_at(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.p + col]
    }

    /// Column norms of `X`.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Columns that take part in the solve.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.active.binary_search(&k).is_ok()
    }

    pub fn with_samples(self: &Arc<Self>, samples: Vec<f64>) -> Result<CollocationSystem> {
        if samples.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: samples.len(),
            });
        }
        Ok(CollocationSystem {
            matrix: Arc::clone(self),
            f: samples,
        })
    }

    /// `X^T v` restricted to the active columns, divided by `D`.
    pub fn normalized_xt(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (row, &vi) in self.x.chunks(self.p.max(1)).zip(v) {
            if vi != 0.0 {
                for (o, xv) in out.iter_mut().zip(row) {
                    *o += xv * vi;
                }
            }
        }
        let mut res = Vec::with_capacity(self.active.len());
        for &k in &self.active {
            res.push(out[k] / self.d[k]);
        }
        res
    }
}

/// `X`, `D` and the sample vector `f`.
#[derive(Debug, Clone)]
pub struct CollocationSystem {
    pub matrix: Arc<CollocationMatrix>,
    f: Vec<f64>,
}

pub fn assemble(
    basis: BasisFamily,
    indexset: IndexSet,
    grid: NodeGrid,
    samples: Vec<f64>,
) -> Result<CollocationSystem> {
    assemble_with_policy(basis, indexset, grid, samples, ZeroColumnPolicy::Reject)
}

pub fn assemble_with_policy(
    basis: BasisFamily,
    indexset: IndexSet,
    grid: NodeGrid,
    samples: Vec<f64>,
    policy: ZeroColumnPolicy,
) -> Result<CollocationSystem> {
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let matrix = Arc::new(CollocationMatrix::build(basis, indexset, grid, policy)?);
    matrix.with_samples(samples)
}

impl CollocationSystem {
    /// Build directly from raw arrays, with every column active. `x` is
    /// row-major `m x p`. The basis metadata is a one-dimensional placeholder.
    pub fn from_dense(m: usize, p: usize, x: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if x.len() != m * p {
            return Err(Error::DimensionMismatch {
                expected: m * p,
                got: x.len(),
            });
        }
        if f.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: f.len(),
            });
        }
        let mut d = vec![0.0; p];
        for row in x.chunks(p.max(1)) {
            for (dk, v) in d.iter_mut().zip(row) {
                *dk += v * v;
            }
        }
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = dk.sqrt();
            if *dk == 0.0 || !dk.is_finite() {
                return Err(Error::DegenerateColumn {
                    index: k,
                    norm: *dk,
                });
            }
        }
        let pts: Vec<Vec<f64>> = (0..m).map(|j| vec![j as f64]).collect();
        let grid = NodeGrid::from_points(&pts, GridSource::HermiteZerosTensor)?;
        let indexset = crate::indexsets::build(crate::indexsets::Shape::Rectangular, p - 1, 1)?;
        let matrix = CollocationMatrix {
            x,
            d,
            m,
            p,
            active: (0..p).collect(),
            basis: BasisFamily::hermite(1)?,
            indexset,
            grid,
        };
        Ok(CollocationSystem {
            matrix: Arc::new(matrix),
            f,
        })
    }

    pub fn m(&self) -> usize {
        self.matrix.m
    }

    pub fn p(&self) -> usize {
        self.matrix.p
    }

    pub fn x(&self) -> &[f64] {
        &self.matrix.x
    }

    pub fn d(&self) -> &[f64] {
        &self.matrix.d
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn indexset(&self) -> &IndexSet {
        &self.matrix.indexset
    }

    pub fn basis(&self) -> BasisFamily {
        self.matrix.basis
    }

    /// Writes the `SPSX1` dump: magic, `u32 m`, `u32 p`, then `f`, `D` and
    /// row-major `X` as little-endian `f64`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"SPSX1")?;
        w.write_all(&(self.m() as u32).to_le_bytes())?;
        w.write_all(&(self.p() as u32).to_le_bytes())?;
        for v in self.f.iter().chain(self.d()).chain(self.x()) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Contents of an `SPSX1` dump.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDump {
    pub m: usize,
    pub p: usize,
    pub f: Vec<f64>,
    pub d: Vec<f64>,
    pub x: Vec<f64>,
}

pub fn read_dump<R: Read>(mut r: R) -> Result<RawDump> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != b"SPSX1" {
        return Err(Error::Parse("bad SPSX1 magic".into()));
    }
    let mut u = [0u8; 4];
    r.read_exact(&mut u)?;
    let m = u32::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let p = u32::from_le_bytes(u) as usize;
    let mut read_vec = |n: usize| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        let mut b = [0u8; 8];
        for _ in 0..n {
            r.read_exact(&mut b)?;
            out.push(f64::from_le_bytes(b));
        }
        Ok(out)
    };
    let f = read_vec(m)?;
    let d = read_vec(p)?;
    let x = read_vec(m * p)?;
    Ok(RawDump { m, p, f, d, x })
}
