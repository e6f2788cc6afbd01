//! Cross-validated accuracy over a small grid of alpha, beta and K.
//!
//! cargo run --release --example parameter_sweep

use partial_label::evaluation::write_sweep_csv;
use partial_label::prelude::*;

fn main() -> Result<()> {
    let ds = make_synthetic(&SyntheticSpec {
        n: 150,
        ..SyntheticSpec::default()
    })?;
    let base = SolverConfig::default();
    let grid = SweepGrid {
        alpha: vec![1.0, 1000.0],
        beta: vec![0.0, 0.01, 0.1],
        k: vec![3, 8],
    };
    eprintln!("{} settings x 5 folds", grid.len());
    let rows = sweep(&ds, &base, &grid, 0, true)?;
    write_sweep_csv(&rows, std::io::stdout().lock()).expect("stdout");
    Ok(())
}
