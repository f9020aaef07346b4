//! Dantzig selector: `min |c|_1` subject to `|D^-1 X^T (X c - f)|_inf <= delta`.
//!
//! With `A = D^-1 X^T X` and `b = D^-1 X^T f` the problem is
//! `min |c|_1 s.t. |A c - b|_inf <= delta`. The main scheme is a
//! Chambolle-Pock primal-dual iteration (one soft-threshold on each side).
//! Its iterates are periodically handed to an active-set Newton step whose
//! output is accepted only when the duality gap certifies it.

mod operator;
pub mod oracle;
mod polish;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, LU};

use crate::collocation::{CollocationMatrix, CollocationSystem};
use crate::error::{Error, Result};

pub use operator::{NormalOperator, OperatorMode};
pub use oracle::lp_oracle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub delta: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// `(tau, sigma)`; `None` picks `0.95 / |A|_2` for both.
    pub step_params: Option<(f64, f64)>,
    /// Try the certified active-set polish.
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: 1e-8,
            max_iters: 200_000,
            tol: 1e-9,
            step_params: None,
            polish: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta {} must be >= 0",
                self.delta
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol {} must be > 0",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if let Some((t, s)) = self.step_params {
            if !(t > 0.0 && s > 0.0) {
                return Err(Error::InvalidParameter(
                    "step sizes must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// One entry per column of `X` (excluded columns hold 0).
    pub coefficients: Vec<f64>,
    pub residual_inf: f64,
    pub l1_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The returned point came with a duality-gap certificate.
    pub certified: bool,
    /// Duality gap of the certificate, or NaN.
    pub gap: f64,
    /// Scalar multiplications spent inside primal-dual iterations.
    pub iteration_mults: u64,
    pub polish_steps: usize,
}

impl SolveResult {
    pub fn mults_per_iteration(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.iteration_mults as f64 / self.iterations as f64
        }
    }
}

/// Solver bound to one collocation matrix; reusable across sample vectors.
pub struct DantzigSolver {
    matrix: Arc<CollocationMatrix>,
    op: NormalOperator,
    norm: f64,
    lu: Option<(
        LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
        LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    )>,
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

const POWER_ITERS: usize = 50;
const STREAK: usize = 5;
const FIRST_POLISH: usize = 25;
const POLISH_STEPS: usize = 30;

impl DantzigSolver {
    pub fn new(matrix: Arc<CollocationMatrix>) -> Result<Self> {
        let mode = OperatorMode::auto(matrix.m(), matrix.active().len());
        Self::with_mode(matrix, mode)
    }

    pub fn with_mode(matrix: Arc<CollocationMatrix>, mode: OperatorMode) -> Result<Self> {
        let op = NormalOperator::new(&matrix, mode);
        let norm = op.norm_estimate(POWER_ITERS);
        if !norm.is_finite() {
            return Err(Error::NumericalBreakdown { iteration: 0 });
        }
        let n = op.p();
        let lu = if n > 0 && matrix.m() >= n {
            let a = DMatrix::from_row_slice(n, n, op.dense());
            let lu = a.clone().lu();
            let lut = a.transpose().lu();
            if lu.is_invertible() && lut.is_invertible() {
                Some((lu, lut))
            } else {
                None
            }
        } else {
            None
        };
        Ok(DantzigSolver {
            matrix,
            op,
            norm,
            lu,
        })
    }

    /// Estimated `|A|_2`.
    pub fn operator_norm(&self) -> f64 {
        self.norm
    }

    pub fn operator(&self) -> &NormalOperator {
        &self.op
    }

    /// `D^-1 X^T f` over the active columns.
    pub fn rhs(&self, f: &[f64]) -> Vec<f64> {
        self.matrix.normalized_xt(f)
    }

    pub fn solve_samples(&self, f: &[f64], config: &SolverConfig) -> Result<SolveResult> {
        if f.len() != self.matrix.m() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.m(),
                got: f.len(),
            });
        }
        let b = self.rhs(f);
        let mut out = self.solve_rhs(&b, config)?;
        out.residual_inf = residual_raw(&self.matrix, f, &out.coefficients);
        Ok(out)
    }

    /// Solve for an active-column right-hand side `b`.
    pub fn solve_rhs(&self, b: &[f64], config: &SolverConfig) -> Result<SolveResult> {
        config.validate()?;
        let n = self.op.p();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let (tau, sigma) = match config.step_params {
            Some((t, s)) => {
                if t * s * self.norm * self.norm > 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "tau*sigma = {} exceeds 1/|A|^2 = {}",
                        t * s,
                        1.0 / (self.norm * self.norm)
                    )));
                }
                (t, s)
            }
            None => {
                let s = 0.95 / self.norm.max(f64::MIN_POSITIVE);
                (s, s)
            }
        };
        let delta = config.delta;
        let ctx = polish::Context {
            op: &self.op,
            b,
            delta,
            tau,
            sigma,
            tol: config.tol,
            lu: self.lu.as_ref(),
        };
        let mut polish_steps = 0;
        let mut fallback: Option<polish::Certificate> = None;
        let mut keep = |f: Option<polish::Certificate>| {
            if let Some(f) = f {
                if fallback.as_ref().is_none_or(|g| l1(&f.c) < l1(&g.c)) {
                    fallback = Some(f);
                }
            }
        };

        if n == 0 {
            return Ok(self.finish(vec![], b, 0, true, true, 0.0, 0, 0));
        }

        if config.polish && self.lu.is_some() {
            if let Some((c0, y0)) = polish::square_start(&ctx) {
                let out = polish::run(&ctx, c0, y0, POLISH_STEPS);
                polish_steps += out.steps;
                if let Some(cert) = out.certified {
                    return Ok(self.finish(cert.c, b, 0, true, true, cert.gap, 0, polish_steps));
                }
                keep(out.feasible);
            }
        }

        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut ac = vec![0.0; n];
        let mut ac_old = vec![0.0; n];
        let mut acbar = vec![0.0; n];
        let mut g = vec![0.0; n];
        let mut c_new = vec![0.0; n];
        let mut ac_new = vec![0.0; n];
        let mut mults: u64 = 0;
        let mut streak = 0;
        let mut next_polish = FIRST_POLISH;
        let mut stopped = false;
        let mut k = 0;
        while k < config.max_iters {
            k += 1;
            for i in 0..n {
                acbar[i] = 2.0 * ac[i] - ac_old[i];
                y[i] = soft(y[i] + sigma * (acbar[i] - b[i]), sigma * delta);
            }
            mults += 4 * n as u64;
            self.op.apply_t(&y, &mut g, &mut mults);
            let mut change: f64 = 0.0;
            for j in 0..n {
                c_new[j] = soft(c[j] - tau * g[j], tau);
                change = change.max((c_new[j] - c[j]).abs());
            }
            mults += n as u64;
            self.op.apply(&c_new, &mut ac_new, &mut mults);
            let mut viol: f64 = 0.0;
            for i in 0..n {
                viol = viol.max((ac_new[i] - b[i]).abs() - delta);
            }
            if !change.is_finite() || !viol.is_finite() {
                return Err(Error::NumericalBreakdown { iteration: k });
            }
            std::mem::swap(&mut ac_old, &mut ac);
            std::mem::swap(&mut ac, &mut ac_new);
            std::mem::swap(&mut c, &mut c_new);

            streak = if change.max(viol) <= config.tol {
                streak + 1
            } else {
                0
            };
            if streak >= STREAK {
                stopped = true;
                break;
            }
            if config.polish && k == next_polish {
                next_polish *= 2;
                let out = polish::run(&ctx, c.clone(), y.clone(), POLISH_STEPS);
                polish_steps += out.steps;
                if let Some(cert) = out.certified {
                    return Ok(self.finish(
                        cert.c,
                        b,
                        k,
                        true,
                        true,
                        cert.gap,
                        mults,
                        polish_steps,
                    ));
                }
                keep(out.feasible);
            }
        }
        if config.polish {
            let out = polish::run(&ctx, c.clone(), y.clone(), POLISH_STEPS);
            polish_steps += out.steps;
            if let Some(cert) = out.certified {
                return Ok(self.finish(cert.c, b, k, true, true, cert.gap, mults, polish_steps));
            }
            keep(out.feasible);
        }
        let viol = {
            let mut ac = vec![0.0; n];
            let mut scratch = 0;
            self.op.apply(&c, &mut ac, &mut scratch);
            ac.iter()
                .zip(b)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
        };
        let converged = stopped && viol <= delta + config.tol;
        // an uncertified but feasible polished point beats an unconverged
        // or larger iterate
        if let Some(f) = fallback {
            if !converged || l1(&f.c) < l1(&c) {
                return Ok(self.finish(f.c, b, k, true, false, f.gap, mults, polish_steps));
            }
        }
        Ok(self.finish(c, b, k, converged, false, f64::NAN, mults, polish_steps))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        c_active: Vec<f64>,
        b: &[f64],
        iterations: usize,
        converged: bool,
        certified: bool,
        gap: f64,
        iteration_mults: u64,
        polish_steps: usize,
    ) -> SolveResult {
        let mut ac = vec![0.0; c_active.len()];
        let mut scratch = 0;
        self.op.apply(&c_active, &mut ac, &mut scratch);
        let residual_inf = ac
            .iter()
            .zip(b)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        let mut coefficients = vec![0.0; self.matrix.p()];
        for (&k, &v) in self.matrix.active().iter().zip(&c_active) {
            coefficients[k] = v;
        }
        SolveResult {
            l1_norm: l1(&coefficients),
            coefficients,
            residual_inf,
            iterations,
            converged,
            certified,
            gap,
            iteration_mults,
            polish_steps,
        }
    }
}

pub fn solve(system: &CollocationSystem, config: &SolverConfig) -> Result<SolveResult> {
    let solver = DantzigSolver::new(Arc::clone(&system.matrix))?;
    solver.solve_samples(system.f(), config)
}

fn residual_raw(matrix: &CollocationMatrix, f: &[f64], c: &[f64]) -> f64 {
    let p = matrix.p();
    let mut r = vec![0.0; matrix.m()];
    for (ri, (row, fi)) in r.iter_mut().zip(matrix.x().chunks(p.max(1)).zip(f)) {
        let mut s = 0.0;
        for &k in matrix.active() {
            s += row[k] * c[k];
        }
        *ri = s - fi;
    }
    inf_norm(&matrix.normalized_xt(&r))
}

/// `|D^-1 X^T (X c - f)|_inf` over the active columns.
pub fn residual(system: &CollocationSystem, c: &[f64]) -> Result<f64> {
    if c.len() != system.p() {
        return Err(Error::DimensionMismatch {
            expected: system.p(),
            got: c.len(),
        });
    }
    Ok(residual_raw(&system.matrix, system.f(), c))
}

pub(crate) fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests;
