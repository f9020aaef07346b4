//! Primal-dual active-set step for the Dantzig selector.
//!
//! Given a primal-dual pair, the prox thresholds pick a primal support `P`
//! with signs `s` and an active constraint set `Q` with signs `t`. The KKT
//! system on those sets is
//! `A[Q,P] c_P = b_Q + delta t_Q` and `A[Q,P]^T y_Q = -s_P`.
//! A result is returned only when a duality gap certifies it.

use nalgebra::{DMatrix, Dyn, LU};

use super::{dvec, l1, sign, NormalOperator};

pub(super) struct Context<'a> {
    pub op: &'a NormalOperator,
    pub b: &'a [f64],
    pub delta: f64,
    pub tau: f64,
    pub sigma: f64,
    pub tol: f64,
    pub lu: Option<&'a (LU<f64, Dyn, Dyn>, LU<f64, Dyn, Dyn>)>,
}

pub(super) struct Certificate {
    pub c: Vec<f64>,
    pub gap: f64,
}

pub(super) struct Outcome {
    pub certified: Option<Certificate>,
    /// Primal-feasible iterate of least l1 norm seen, with its gap.
    pub feasible: Option<Certificate>,
    pub steps: usize,
}

/// Starting pair from the square system: `c = A^-1 b`, `y = -A^-T sign(c)`.
pub(super) fn square_start(ctx: &Context) -> Option<(Vec<f64>, Vec<f64>)> {
    let (lu, lut) = ctx.lu?;
    let c = lu.solve(&dvec(ctx.b))?;
    let s: Vec<f64> = c.iter().map(|v| -sign(*v)).collect();
    let y = lut.solve(&dvec(&s))?;
    if c.iter().chain(y.iter()).all(|v| v.is_finite()) {
        Some((c.as_slice().to_vec(), y.as_slice().to_vec()))
    } else {
        None
    }
}

pub(super) fn run(ctx: &Context, mut c: Vec<f64>, mut y: Vec<f64>, max_steps: usize) -> Outcome {
    let n = ctx.op.p();
    let mut g = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut scratch = 0u64;
    let mut last_sets: Option<(Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>)> = None;
    let mut feasible: Option<Certificate> = None;
    for step in 0..max_steps {
        ctx.op.apply_t(&y, &mut g, &mut scratch);
        ctx.op.apply(&c, &mut r, &mut scratch);
        for (ri, bi) in r.iter_mut().zip(ctx.b) {
            *ri -= bi;
        }
        let mut p_set = Vec::new();
        let mut s = Vec::new();
        let mut p_prio = Vec::new();
        for j in 0..n {
            let v = c[j] - ctx.tau * g[j];
            if v.abs() > ctx.tau {
                p_set.push(j);
                s.push(sign(v));
                p_prio.push(v.abs() - ctx.tau);
            }
        }
        let mut q_set = Vec::new();
        let mut t = Vec::new();
        let mut q_prio = Vec::new();
        for i in 0..n {
            let v = y[i] + ctx.sigma * r[i];
            if v.abs() > ctx.sigma * ctx.delta {
                q_set.push(i);
                t.push(sign(v));
                q_prio.push(v.abs() - ctx.sigma * ctx.delta);
            }
        }
        let sets = (p_set, q_set, s, t);
        if step > 0 && last_sets.as_ref() == Some(&sets) {
            // fixed point that failed certification
            return Outcome {
                certified: None,
                feasible,
                steps: step,
            };
        }
        let (p_set, q_set, s, t) = &sets;
        let Some((cn, yn)) = kkt_solve(ctx, p_set, q_set, s, t, &p_prio, &q_prio) else {
            return Outcome {
                certified: None,
                feasible,
                steps: step + 1,
            };
        };
        c = cn;
        y = yn;
        let (viol, gap, ok) = assess(ctx, &c, &y);
        if ok {
            return Outcome {
                certified: Some(Certificate { c, gap }),
                feasible,
                steps: step + 1,
            };
        }
        if viol <= ctx.tol && feasible.as_ref().is_none_or(|f| l1(&c) < l1(&f.c)) {
            feasible = Some(Certificate { c: c.clone(), gap });
        }
        last_sets = Some(sets);
    }
    Outcome {
        certified: None,
        feasible,
        steps: max_steps,
    }
}

/// Returns full-length `(c, y)` solving the KKT system on `(P, Q)`.
fn kkt_solve(
    ctx: &Context,
    p_set: &[usize],
    q_set: &[usize],
    s: &[f64],
    t: &[f64],
    p_prio: &[f64],
    q_prio: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = ctx.op.p();
    let scatter = |p: &[usize], q: &[usize], cv: &[f64], yv: &[f64]| {
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        for (&j, v) in p.iter().zip(cv) {
            c[j] = *v;
        }
        for (&i, v) in q.iter().zip(yv) {
            y[i] = *v;
        }
        (c, y)
    };
    if p_set.is_empty() || q_set.is_empty() {
        return Some((vec![0.0; n], vec![0.0; n]));
    }
    if p_set.len() == n && q_set.len() == n {
        if let Some((lu, lut)) = ctx.lu {
            let rhs_c: Vec<f64> = (0..n).map(|i| ctx.b[i] + ctx.delta * t[i]).collect();
            let rhs_y: Vec<f64> = s.iter().map(|v| -v).collect();
            let c = lu.solve(&dvec(&rhs_c))?;
            let y = lut.solve(&dvec(&rhs_y))?;
            let (c, y) = finite(c.as_slice().to_vec(), y.as_slice().to_vec())?;
            return Some(scatter(p_set, q_set, &c, &y));
        }
    }

    // square, well-posed subsystem: a basic solution of the linear program
    let (p1, q1) = square_subsystem(ctx, p_set, q_set, p_prio, q_prio);
    if !p1.is_empty() {
        let sign_of = |set: &[usize], signs: &[f64], k: usize| {
            signs[set.iter().position(|&v| v == k).unwrap()]
        };
        let rhs_c: Vec<f64> = q1
            .iter()
            .map(|&i| ctx.b[i] + ctx.delta * sign_of(q_set, t, i))
            .collect();
        let rhs_y: Vec<f64> = p1.iter().map(|&j| -sign_of(p_set, s, j)).collect();
        let sub = DMatrix::from_fn(q1.len(), p1.len(), |a, k| ctx.op.entry(q1[a], p1[k]));
        let lu = sub.clone().lu();
        let lut = sub.transpose().lu();
        if let (Some(c), Some(y)) = (lu.solve(&dvec(&rhs_c)), lut.solve(&dvec(&rhs_y))) {
            if let Some((c, y)) = finite(c.as_slice().to_vec(), y.as_slice().to_vec()) {
                let (cf, yf) = scatter(&p1, &q1, &c, &y);
                if certify(ctx, &cf, &yf).is_some()
                    || (p1.len() == p_set.len() && q1.len() == q_set.len())
                {
                    return Some((cf, yf));
                }
            }
        }
    }

    // least squares on the full sets
    let rhs_c: Vec<f64> = q_set
        .iter()
        .zip(t)
        .map(|(&i, ti)| ctx.b[i] + ctx.delta * ti)
        .collect();
    let rhs_y: Vec<f64> = s.iter().map(|v| -v).collect();
    let sub = DMatrix::from_fn(q_set.len(), p_set.len(), |a, k| {
        ctx.op.entry(q_set[a], p_set[k])
    });
    let eps = f64::EPSILON * q_set.len().max(p_set.len()) as f64;
    let svd = sub.svd(true, true);
    let (u, vt) = (svd.u.as_ref()?, svd.v_t.as_ref()?);
    let sv = &svd.singular_values;
    let cut = eps * sv.max();
    let inv = sv.map(|v| if v > cut { 1.0 / v } else { 0.0 });
    // c = V S^+ U^T rhs_c,  y = U S^+ V^T rhs_y
    let c = vt.transpose() * (u.transpose() * dvec(&rhs_c)).component_mul(&inv);
    let y = u * (vt * dvec(&rhs_y)).component_mul(&inv);
    let (c, y) = finite(c.as_slice().to_vec(), y.as_slice().to_vec())?;
    Some(scatter(p_set, q_set, &c, &y))
}

/// Greedy choice of independent rows of `A[Q, P]` (by priority), then of
/// independent columns among those rows. Both lists come back sorted.
fn square_subsystem(
    ctx: &Context,
    p_set: &[usize],
    q_set: &[usize],
    p_prio: &[f64],
    q_prio: &[f64],
) -> (Vec<usize>, Vec<usize>) {
    let order = |prio: &[f64]| {
        let mut o: Vec<usize> = (0..prio.len()).collect();
        o.sort_by(|&a, &b| prio[b].total_cmp(&prio[a]).then(a.cmp(&b)));
        o
    };
    let rows: Vec<Vec<f64>> = order(q_prio)
        .into_iter()
        .map(|a| p_set.iter().map(|&j| ctx.op.entry(q_set[a], j)).collect())
        .collect();
    let row_ids: Vec<usize> = order(q_prio).into_iter().map(|a| q_set[a]).collect();
    let picked_rows = independent(&rows, p_set.len());
    let mut q1: Vec<usize> = picked_rows.iter().map(|&k| row_ids[k]).collect();
    let cols: Vec<Vec<f64>> = order(p_prio)
        .into_iter()
        .map(|a| q1.iter().map(|&i| ctx.op.entry(i, p_set[a])).collect())
        .collect();
    let col_ids: Vec<usize> = order(p_prio).into_iter().map(|a| p_set[a]).collect();
    let picked_cols = independent(&cols, q1.len());
    let mut p1: Vec<usize> = picked_cols.iter().map(|&k| col_ids[k]).collect();
    if p1.len() < q1.len() {
        // drop rows until square again
        q1.truncate(p1.len());
    }
    p1.sort_unstable();
    q1.sort_unstable();
    (p1, q1)
}

/// Indices of a maximal independent prefix-greedy subset (modified
/// Gram-Schmidt with one reorthogonalization), at most `limit` long.
fn independent(vectors: &[Vec<f64>], limit: usize) -> Vec<usize> {
    let scale = vectors.iter().map(|v| norm2(v)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    for (k, v) in vectors.iter().enumerate() {
        if out.len() >= limit {
            break;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= d * qi;
                }
            }
        }
        let nw = norm2(&w);
        if nw > 1e-12 * scale.max(f64::MIN_POSITIVE) && nw > 1e-10 * norm2(v) {
            w.iter_mut().for_each(|x| *x /= nw);
            basis.push(w);
            out.push(k);
        }
    }
    out
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn finite(c: Vec<f64>, y: Vec<f64>) -> Option<(Vec<f64>, Vec<f64>)> {
    if c.iter().chain(&y).all(|v| v.is_finite()) {
        Some((c, y))
    } else {
        None
    }
}

/// Duality gap `|c|_1 + <b, y> + delta |y|_1` with `y` scaled into the dual
/// feasible set; `Some(gap)` when primal feasibility and the gap are within
/// tolerance.
pub(super) fn certify(ctx: &Context, c: &[f64], y: &[f64]) -> Option<f64> {
    let (_, gap, ok) = assess(ctx, c, y);
    ok.then_some(gap)
}

/// `(primal violation, gap, certified)`.
fn assess(ctx: &Context, c: &[f64], y: &[f64]) -> (f64, f64, bool) {
    let n = ctx.op.p();
    let mut scratch = 0u64;
    let mut r = vec![0.0; n];
    ctx.op.apply(c, &mut r, &mut scratch);
    let mut viol: f64 = 0.0;
    for (ri, bi) in r.iter().zip(ctx.b) {
        viol = viol.max((ri - bi).abs() - ctx.delta);
    }
    let mut g = vec![0.0; n];
    ctx.op.apply_t(y, &mut g, &mut scratch);
    let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = 1.0 / gmax.max(1.0);
    let by: f64 = ctx.b.iter().zip(y).map(|(b, y)| b * y).sum::<f64>() * scale;
    let by_abs: f64 = ctx.b.iter().zip(y).map(|(b, y)| (b * y).abs()).sum::<f64>() * scale;
    let ynorm = l1(y) * scale;
    let cnorm = l1(c);
    let gap = cnorm + by + ctx.delta * ynorm;
    let rounding = 1e3 * f64::EPSILON * (cnorm + by_abs + ctx.delta * ynorm);
    let ok = viol <= ctx.tol && gap.abs() <= ctx.tol * cnorm.max(1.0) + rounding;
    (viol, gap, ok)
}
