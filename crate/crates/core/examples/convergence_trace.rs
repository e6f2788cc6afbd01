//! Solves the default synthetic problem and prints the per-loop convergence
//! trace as CSV.
//!
//! cargo run --release --example convergence_trace

use std::time::Instant;

use partial_label::prelude::*;

fn main() -> Result<()> {
    let ds = make_synthetic(&SyntheticSpec::default())?;
    let cfg = SolverConfig::default();
    let graph = build_knn_graph(&ds, cfg.k, cfg.theta)?;
    let codec = LabelCodec::encode(&ds);

    let start = Instant::now();
    let report = alm_fit(&graph, &codec, &cfg)?;
    let elapsed = start.elapsed();

    report
        .write_trace_csv(std::io::stdout().lock())
        .expect("stdout");
    eprintln!(
        "converged={} loops={} time={:.2?} train_acc={:.4} rowsum_dev={:.2e} min_entry={:.2e}",
        report.converged,
        report.loops_used,
        elapsed,
        training_accuracy(&report, ds.truth())?,
        report.feasibility.max_rowsum_dev,
        report.feasibility.min_entry,
    );
    Ok(())
}
