//! Reference solution of the Dantzig selector as a linear program.
//!
//! Split `c = u - v` with `u, v >= 0` and minimize `sum(u + v)` subject to
//! `-delta <= A(u - v) - b <= delta`. Solved with a dense two-phase tableau
//! simplex using Bland's rule. Shares no code with the iterative solver.

use crate::collocation::CollocationSystem;
use crate::error::{Error, Result};

/// Largest `p` accepted.
pub const ORACLE_MAX_P: usize = 200;

const PIVOT_EPS: f64 = 1e-11;

pub fn lp_oracle(system: &CollocationSystem, delta: f64) -> Result<Vec<f64>> {
    let (m, p) = (system.m(), system.p());
    if p > ORACLE_MAX_P {
        return Err(Error::Capacity(format!(
            "oracle limited to p <= {ORACLE_MAX_P}, got {p}"
        )));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter("delta must be >= 0".into()));
    }
    let x = system.x();
    let f = system.f();
    let cols: Vec<usize> = system.matrix.active().to_vec();
    let n = cols.len();

    // A = D^-1 X^T X and b = D^-1 X^T f over the active columns, from scratch.
    let mut norms = vec![0.0; n];
    for (a, &k) in cols.iter().enumerate() {
        let mut s = 0.0;
        for j in 0..m {
            s += x[j * p + k] * x[j * p + k];
        }
        norms[a] = s.sqrt();
    }
    let mut amat = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for (i, &ki) in cols.iter().enumerate() {
        for (l, &kl) in cols.iter().enumerate() {
            let mut s = 0.0;
            for j in 0..m {
                s += x[j * p + ki] * x[j * p + kl];
            }
            amat[i][l] = s / norms[i];
        }
        let mut s = 0.0;
        for j in 0..m {
            s += x[j * p + ki] * f[j];
        }
        b[i] = s / norms[i];
    }

    // rows: A u - A v <= b + delta ; -A u + A v <= delta - b
    let mut rows = Vec::with_capacity(2 * n);
    let mut rhs = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut r = Vec::with_capacity(2 * n);
        r.extend(amat[i].iter().copied());
        r.extend(amat[i].iter().map(|v| -v));
        rows.push(r);
        rhs.push(b[i] + delta);
    }
    for i in 0..n {
        let mut r = Vec::with_capacity(2 * n);
        r.extend(amat[i].iter().map(|v| -v));
        r.extend(amat[i].iter().copied());
        rows.push(r);
        rhs.push(delta - b[i]);
    }
    let cost = vec![1.0; 2 * n];
    let z = simplex_leq(&cost, &rows, &rhs)?;
    let mut out = vec![0.0; p];
    for (a, &k) in cols.iter().enumerate() {
        out[k] = z[a] - z[n + a];
    }
    Ok(out)
}

/// `min cost^T z` subject to `rows z <= rhs`, `z >= 0`.
pub fn simplex_leq(cost: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let nv = cost.len();
    let nr = rows.len();
    let n_art = rhs.iter().filter(|v| **v < 0.0).count();
    // columns: decision | slack | artificial | rhs
    let width = nv + nr + n_art + 1;
    let rc = width - 1;
    let mut t = vec![vec![0.0; width]; nr];
    let mut basis = vec![0usize; nr];
    let mut art = nv + nr;
    for i in 0..nr {
        let sgn = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..nv {
            t[i][j] = sgn * rows[i][j];
        }
        t[i][nv + i] = sgn;
        t[i][rc] = sgn * rhs[i];
        if sgn < 0.0 {
            t[i][art] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = nv + i;
        }
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; width - 1];
        for v in phase1.iter_mut().skip(nv + nr) {
            *v = 1.0;
        }
        let obj = run_simplex(&mut t, &mut basis, &phase1, width - 1)?;
        if obj > 1e-8 * (1.0 + rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
            return Err(Error::Infeasible);
        }
        // drive remaining artificials out of the basis
        for i in 0..nr {
            if basis[i] >= nv + nr {
                if let Some(j) = (0..nv + nr).find(|&j| t[i][j].abs() > PIVOT_EPS) {
                    pivot(&mut t, &mut basis, i, j);
                }
            }
        }
    }
    let mut phase2 = vec![0.0; nv + nr];
    phase2[..nv].copy_from_slice(cost);
    // artificial columns are barred from re-entering
    run_simplex(&mut t, &mut basis, &phase2, nv + nr)?;
    let mut z = vec![0.0; nv];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < nv {
            z[bv] = t[i][rc];
        }
    }
    Ok(z)
}

/// Bland's rule over the first `ncols` columns. Returns the objective.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], ncols: usize) -> Result<f64> {
    let nr = t.len();
    let rc = t.first().map(|r| r.len() - 1).unwrap_or(0);
    let cb = |j: usize| -> f64 {
        if j < cost.len() {
            cost[j]
        } else {
            0.0
        }
    };
    let max_pivots = 50_000 + 100 * (nr + ncols);
    for _ in 0..max_pivots {
        // reduced costs d_j = c_j - c_B^T column_j
        let mut entering = None;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut d = cb(j);
            for i in 0..nr {
                d -= cb(basis[i]) * t[i][j];
            }
            if d < -1e-10 {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            let mut obj = 0.0;
            for i in 0..nr {
                obj += cb(basis[i]) * t[i][rc];
            }
            return Ok(obj);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..nr {
            if t[i][j] > PIVOT_EPS {
                let ratio = t[i][rc] / t[i][j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else {
            return Err(Error::InvalidParameter(
                "linear program is unbounded".into(),
            ));
        };
        pivot(t, basis, i, j);
    }
    Err(Error::NumericalBreakdown {
        iteration: max_pivots,
    })
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], i: usize, j: usize) {
    let pv = t[i][j];
    for v in t[i].iter_mut() {
        *v /= pv;
    }
    let prow = t[i].clone();
    for (r, row) in t.iter_mut().enumerate() {
        if r == i {
            continue;
        }
        let factor = row[j];
        if factor != 0.0 {
            for (v, pr) in row.iter_mut().zip(&prow) {
                *v -= factor * pr;
            }
        }
    }
    basis[i] = j;
}
