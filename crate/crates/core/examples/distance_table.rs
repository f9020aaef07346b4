//! Distances between the training glyphs and their rotations.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use sparsegfs::experiments::{distance_table, Dataset, Pipeline};

fn main() -> sparsegfs::Result<()> {
    let k: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2);
    let train = Dataset::stand_in();
    let t0 = Instant::now();
    let pipe = Pipeline::standard(train.size())?;
    eprintln!("pipeline {:.2}s", t0.elapsed().as_secs_f64());
    let t0 = Instant::now();
    let base: Vec<_> = train
        .images()
        .iter()
        .map(|li| pipe.invariants(&li.image))
        .collect::<Result<_, _>>()?;
    eprintln!("7 solves {:.3}s", t0.elapsed().as_secs_f64());
    let theta = k as f64 * FRAC_PI_4;
    let rot: Vec<_> = train
        .images()
        .iter()
        .map(|li| pipe.invariants(&li.image.rotate_mapped(theta)))
        .collect::<Result<_, _>>()?;
    println!("theta = {k} pi/4");
    for (i, row) in distance_table(&rot, &base).iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4e}")).collect();
        println!("{} {}", i + 1, cells.join(" "));
    }
    for b in &base {
        println!("{b}");
    }
    Ok(())
}
