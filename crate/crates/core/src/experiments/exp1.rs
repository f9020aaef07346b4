use std::sync::Arc;

use crate::basis::BasisFamily;
use crate::collocation::{tensor_hermite_grid, CollocationMatrix, ZeroColumnPolicy};
use crate::dantzig::{DantzigSolver, SolveResult, SolverConfig};
use crate::error::{Error, Result};
use crate::indexsets::{build, Shape};
use crate::series::{
    coefficient_error_with, reference_coefficients, CoefficientError, CoefficientScale,
    ErrorDomain, TestFunction,
};

/// Per-axis degree of the reference expansion used for support comparison.
pub const REFERENCE_DEGREE: usize = 12;

/// Solver settings used for the coefficient-recovery tables.
pub fn experiment1_config() -> SolverConfig {
    SolverConfig {
        delta: 1e-10,
        ..SolverConfig::default()
    }
}

/// How recovered coefficients are compared with the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorConvention {
    pub scale: CoefficientScale,
    pub domain: ErrorDomain,
}

impl Default for ErrorConvention {
    /// Hermite-scale coefficients over the index set.
    fn default() -> Self {
        ErrorConvention {
            scale: CoefficientScale::Hermite,
            domain: ErrorDomain::IndexSet,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment1Run {
    pub function: TestFunction,
    pub shape: Shape,
    pub n: usize,
    pub m: usize,
    pub error: CoefficientError,
    pub solve: SolveResult,
}

pub fn run_experiment1(
    function: TestFunction,
    shape: Shape,
    n: usize,
    m: usize,
    config: &SolverConfig,
) -> Result<CoefficientError> {
    Ok(run_experiment1_with(function, shape, n, m, config, ErrorConvention::default())?.error)
}

pub fn run_experiment1_with(
    function: TestFunction,
    shape: Shape,
    n: usize,
    m: usize,
    config: &SolverConfig,
    convention: ErrorConvention,
) -> Result<Experiment1Run> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N = {n} must be >= 2")));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    let set = build(shape, n, 2)?;
    let grid = tensor_hermite_grid(m, 2)?;
    let samples: Vec<f64> = grid.nodes().map(|p| function.eval(p[0], p[1])).collect();
    let matrix = Arc::new(CollocationMatrix::build(
        BasisFamily::hermite(2)?,
        set.clone(),
        grid,
        ZeroColumnPolicy::Exclude,
    )?);
    let solver = DantzigSolver::new(Arc::clone(&matrix))?;
    let solve = solver.solve_samples(&samples, config)?;
    // reference on a rectangular cover of W, so support outside W is seen
    let cover = build(Shape::Rectangular, n.max(REFERENCE_DEGREE), 2)?;
    let reference = reference_coefficients(function, &cover)?;
    let error = coefficient_error_with(
        &solve.coefficients,
        &reference,
        &set,
        convention.scale,
        convention.domain,
    )?;
    Ok(Experiment1Run {
        function,
        shape,
        n,
        m,
        error,
        solve,
    })
}

/// The `(shape, N, M)` sweep: shapes `Y, T, S`,
/// `N = 2..=9`, `M in {N-1, N, N+1}`.
pub fn error_grid() -> Vec<(Shape, usize, usize)> {
    let mut out = Vec::new();
    for shape in Shape::ALL {
        for n in 2..=9 {
            for m in [n - 1, n, n + 1] {
                out.push((shape, n, m));
            }
        }
    }
    out
}
