use sparsegfs::experiments::{
    error_grid, experiment1_config, run_experiment1_with, ErrorConvention,
};
use sparsegfs::series::TestFunction;
use std::time::Instant;

fn main() {
    let f = match std::env::args().nth(1).as_deref() {
        Some("f2") => TestFunction::F2,
        Some("f3") => TestFunction::F3,
        _ => TestFunction::F1,
    };
    let cfg = experiment1_config();
    for (shape, n, m) in error_grid() {
        let t = Instant::now();
        let r = run_experiment1_with(f, shape, n, m, &cfg, ErrorConvention::default()).unwrap();
        println!(
            "{shape} N={n} M={m} l2={:.4e} cert={} it={} polish={} gap={:.1e} {:.2}s",
            r.error.l2,
            r.solve.certified,
            r.solve.iterations,
            r.solve.polish_steps,
            r.solve.gap,
            t.elapsed().as_secs_f64()
        );
    }
}
