//! Argument parsing and subcommand drivers for the `sparsegfs` binary.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use sparsegfs::basis::BasisFamily;
use sparsegfs::collocation::{assemble_with_policy, tensor_hermite_grid, ZeroColumnPolicy};
use sparsegfs::dantzig::{DantzigSolver, SolverConfig};
use sparsegfs::experiments::{
    default_sigmas, error_grid, experiment1_config, run_experiment1_with, ClassificationReport,
    Dataset, ErrorConvention, Experiment2, NoiseKind, Pipeline,
};
use sparsegfs::glyphs::{glyph, GLYPH_COUNT};
use sparsegfs::image::Image;
use sparsegfs::indexsets::{build, Shape};
use sparsegfs::moments::{InvariantVector, REQUIRED};
use sparsegfs::series::TestFunction;
use sparsegfs::Error;

#[derive(Debug, Parser)]
#[command(
    name = "sparsegfs",
    version,
    about = "Sparse Hermite expansions, Dantzig-selector recovery and moment invariants"
)]
pub struct Cli {
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Write results here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a test function's coefficients and report the l2 error
    Approx(ApproxArgs),
    /// Moments and invariants of one image
    Moments(MomentsArgs),
    /// Rotation-and-noise classification sweep
    Classify(ClassifyArgs),
    /// Solver iteration count and multiplication cost
    Bench(BenchArgs),
    /// Print an index set, one multi-index per line
    DumpIndices(IndexArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FunctionArg {
    F1,
    F2,
    F3,
}

impl From<FunctionArg> for TestFunction {
    fn from(f: FunctionArg) -> Self {
        match f {
            FunctionArg::F1 => TestFunction::F1,
            FunctionArg::F2 => TestFunction::F2,
            FunctionArg::F3 => TestFunction::F3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeArg {
    #[value(name = "Y", alias = "y")]
    Y,
    #[value(name = "T", alias = "t")]
    T,
    #[value(name = "S", alias = "s")]
    S,
}

impl From<ShapeArg> for Shape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Y => Shape::Rectangular,
            ShapeArg::T => Shape::Triangular,
            ShapeArg::S => Shape::HyperbolicCross,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    Gauss,
    Bitflip,
}

impl From<NoiseArg> for NoiseKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Gauss => NoiseKind::WhiteGaussian,
            NoiseArg::Bitflip => NoiseKind::BitFlip,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Constraint level delta (default: 1e-10 for approx, 1e-8 otherwise)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Stopping tolerance
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Iteration cap
    #[arg(long = "max-iters", default_value_t = 200_000)]
    pub max_iters: usize,
    /// Skip the active-set polish and run plain iterations
    #[arg(long = "no-polish", default_value_t = false)]
    pub no_polish: bool,
}

impl SolverArgs {
    fn config(&self, default_delta: f64) -> SolverConfig {
        SolverConfig {
            delta: self.delta.unwrap_or(default_delta),
            tol: self.tol,
            max_iters: self.max_iters,
            polish: !self.no_polish,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ApproxArgs {
    #[arg(long, value_enum, default_value = "f1")]
    pub function: FunctionArg,
    #[arg(long, value_enum, default_value = "Y")]
    pub shape: ShapeArg,
    /// Index-set parameter
    #[arg(long = "N", default_value_t = 5)]
    pub n: usize,
    /// Hermite zeros per axis
    #[arg(long = "M", default_value_t = 6)]
    pub m: usize,
    /// Run every (shape, N, M) cell of the error table instead of one
    #[arg(long, default_value_t = false)]
    pub sweep: bool,
    /// Print the index set instead of solving
    #[arg(long = "dump-indices", default_value_t = false)]
    pub dump_indices: bool,
    /// Also write the assembled system to this file
    #[arg(long = "dump-system")]
    pub dump_system: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    /// Binary PGM image (square, 8 bit)
    #[arg(long, conflicts_with = "glyph")]
    pub image: Option<PathBuf>,
    /// Built-in glyph 1..=7
    #[arg(long)]
    pub glyph: Option<usize>,
    /// Counterclockwise rotation applied first, in degrees
    #[arg(long, default_value_t = 0.0)]
    pub rotate: f64,
    #[arg(long, value_enum, default_value = "T")]
    pub shape: ShapeArg,
    #[arg(long = "N", default_value_t = 20)]
    pub n: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    /// Directory of PGM training images (default: built-in glyphs)
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gauss")]
    pub noise: NoiseArg,
    /// Noise level; repeat or comma-separate for several (default: 0,0.05,...,0.25)
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "f3")]
    pub function: FunctionArg,
    #[arg(long, value_enum, default_value = "Y")]
    pub shape: ShapeArg,
    #[arg(long = "N", default_value_t = 9)]
    pub n: usize,
    #[arg(long = "M", default_value_t = 9)]
    pub m: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IndexArgs {
    #[arg(long, value_enum, default_value = "T")]
    pub shape: ShapeArg,
    #[arg(long = "N", default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalBreakdown { .. }
            | Error::Infeasible
            | Error::DegenerateColumn { .. } => CliError::Numerical(e.to_string()),
            Error::Io(m) => CliError::Io(std::io::Error::other(m)),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// One cell of an error sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub shape: Shape,
    pub n: usize,
    pub m: usize,
    pub l2: f64,
}

/// CSV with header `shape,N,M,l2_error`, rows ordered by shape, N, M.
pub fn emit_error_grid(rows: &[GridRow]) -> String {
    let mut sorted: Vec<&GridRow> = rows.iter().collect();
    let rank = |s: Shape| {
        Shape::ALL
            .iter()
            .position(|&t| t == s)
            .unwrap_or(usize::MAX)
    };
    sorted.sort_by_key(|r| (rank(r.shape), r.n, r.m));
    let mut out = String::from("shape,N,M,l2_error\n");
    for r in sorted {
        out.push_str(&format!("{},{},{},{:.6e}\n", r.shape, r.n, r.m, r.l2));
    }
    out
}

/// Runs the parsed command, writing results to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Approx(a) => approx(a, out),
        Command::Moments(a) => moments(a, out),
        Command::Classify(a) => classify(a, out),
        Command::Bench(a) => bench(a, out),
        Command::DumpIndices(a) => {
            let set = build(a.shape.into(), a.n, a.d)?;
            out.write_all(set.to_text().as_bytes())?;
            Ok(())
        }
    }
}

fn approx(a: &ApproxArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let shape: Shape = a.shape.into();
    let function: TestFunction = a.function.into();
    let cfg = a.solver.config(experiment1_config().delta);
    if a.dump_indices {
        out.write_all(build(shape, a.n, 2)?.to_text().as_bytes())?;
        return Ok(());
    }
    if let Some(path) = &a.dump_system {
        if a.sweep {
            return Err(CliError::Usage(
                "--dump-system needs a single (shape, N, M)".into(),
            ));
        }
        let set = build(shape, a.n, 2)?;
        let grid = tensor_hermite_grid(a.m, 2)?;
        let f: Vec<f64> = grid.nodes().map(|p| function.eval(p[0], p[1])).collect();
        let sys = assemble_with_policy(
            BasisFamily::hermite(2)?,
            set,
            grid,
            f,
            ZeroColumnPolicy::Exclude,
        )?;
        sys.write_dump(std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    let cells: Vec<(Shape, usize, usize)> = if a.sweep {
        error_grid()
    } else {
        vec![(shape, a.n, a.m)]
    };
    let runs = cells
        .par_iter()
        .map(|&(s, n, m)| run_experiment1_with(function, s, n, m, &cfg, ErrorConvention::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<GridRow> = runs
        .iter()
        .map(|r| GridRow {
            shape: r.shape,
            n: r.n,
            m: r.m,
            l2: r.error.l2,
        })
        .collect();
    out.write_all(emit_error_grid(&rows).as_bytes())?;
    if let Some(r) = runs.iter().find(|r| !r.solve.converged) {
        return Err(CliError::Numerical(format!(
            "solver did not converge for ({}, N={}, M={}) after {} iterations",
            r.shape, r.n, r.m, r.solve.iterations
        )));
    }
    Ok(())
}

fn moments(a: &MomentsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let img = match (&a.image, a.glyph) {
        (Some(p), None) => Image::load(p)?,
        (None, Some(k)) => {
            glyph(k).ok_or_else(|| CliError::Usage(format!("glyph must be 1..={GLYPH_COUNT}")))?
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --image or --glyph is required".into(),
            ))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--image and --glyph are exclusive".into()))
        }
    };
    let img = img.rotate_mapped(a.rotate.to_radians());
    let pipe = Pipeline::new(
        a.shape.into(),
        a.n,
        img.size(),
        a.solver.config(SolverConfig::default().delta),
    )?;
    let m = pipe.moments(&img)?;
    let phi = sparsegfs::moments::hermite_invariants(&m);
    let head: Vec<String> = REQUIRED.iter().map(|(p, q)| format!("m{p}{q}")).collect();
    writeln!(out, "{},{}", head.join(","), InvariantVector::CSV_HEADER)?;
    let vals: Vec<String> = m.as_array().iter().map(|v| format!("{v:e}")).collect();
    writeln!(out, "{},{}", vals.join(","), phi.to_csv_row())?;
    Ok(())
}

fn classify(a: &ClassifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let sigmas = if a.sigma.is_empty() {
        default_sigmas()
    } else {
        a.sigma.clone()
    };
    let training = match &a.train {
        Some(dir) => Dataset::load_dir(dir)?,
        None => Dataset::stand_in(),
    };
    let mut exp = Experiment2::with_training(training)?;
    exp.pipeline.config = a.solver.config(SolverConfig::default().delta);
    let reports = exp.run(a.noise.into(), &sigmas, a.trials, a.seed)?;
    writeln!(out, "{}", ClassificationReport::CSV_HEADER)?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let function: TestFunction = a.function.into();
    let set = build(a.shape.into(), a.n, 2)?;
    let grid = tensor_hermite_grid(a.m, 2)?;
    let f: Vec<f64> = grid.nodes().map(|p| function.eval(p[0], p[1])).collect();
    let sys = assemble_with_policy(
        BasisFamily::hermite(2)?,
        set,
        grid,
        f,
        ZeroColumnPolicy::Exclude,
    )?;
    let solver = DantzigSolver::new(Arc::clone(&sys.matrix))?;
    let cfg = a.solver.config(experiment1_config().delta);
    let t0 = Instant::now();
    let r = solver.solve_samples(sys.f(), &cfg)?;
    eprintln!("solve time {:.3}s", t0.elapsed().as_secs_f64());
    let (m, p) = (sys.m(), sys.matrix.active().len());
    writeln!(
        out,
        "shape,N,M,m,p,iterations,mults_per_iteration,bound_4mp,converged,certified,residual"
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{},{:.1},{},{},{},{:.3e}",
        Shape::from(a.shape),
        a.n,
        a.m,
        m,
        p,
        r.iterations,
        r.mults_per_iteration(),
        4 * m * p,
        r.converged,
        r.certified,
        r.residual_inf
    )?;
    Ok(())
}

/// Parses `args`, runs, and returns the process exit code. Usage errors go to
/// `err` with a synopsis.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    if cli.jobs > 0 {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let result = match &cli.out {
        Some(path) => match std::fs::File::create(path) {
            Ok(f) => {
                let mut w = std::io::BufWriter::new(f);
                run(&cli, &mut w).and_then(|_| w.flush().map_err(CliError::from))
            }
            Err(e) => Err(CliError::Io(e)),
        },
        None => run(&cli, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "sparsegfs: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(err, "run `sparsegfs --help` for the synopsis");
            }
            e.exit_code()
        }
    }
}
