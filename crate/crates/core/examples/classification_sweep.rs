//! Classification ratios under noise on the stand-in glyphs.

use std::time::Instant;

use sparsegfs::experiments::{default_sigmas, run_experiment2, ClassificationReport, NoiseKind};

fn main() -> sparsegfs::Result<()> {
    let trials: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    println!("{}", ClassificationReport::CSV_HEADER);
    for kind in [NoiseKind::WhiteGaussian, NoiseKind::BitFlip] {
        let t0 = Instant::now();
        for r in run_experiment2(kind, &default_sigmas(), trials, 42)? {
            println!("{}", r.csv_row());
        }
        eprintln!("{} {:.1}s", kind.name(), t0.elapsed().as_secs_f64());
    }
    Ok(())
}
