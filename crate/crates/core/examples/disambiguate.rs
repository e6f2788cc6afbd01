//! Recovers the hidden true labels of an ambiguously labeled training set
//! and reports how often each candidate set was resolved correctly.
//!
//! cargo run --release --example disambiguate

use partial_label::prelude::*;

fn main() -> Result<()> {
    let spec = SyntheticSpec {
        n: 200,
        c: 4,
        d: 3,
        p_coocc: 0.8,
        r_extra: 2,
        ..SyntheticSpec::default()
    };
    let ds = make_synthetic(&spec)?;
    println!(
        "{} examples, {} classes, {:.2} candidates per example",
        ds.n(),
        ds.c(),
        ds.average_candidates()
    );

    let cfg = SolverConfig::default();
    let graph = build_knn_graph(&ds, cfg.k, cfg.theta)?;
    println!(
        "graph: {} edges, theta={:.4}",
        graph.num_edges(),
        graph.theta()
    );

    let report = alm_fit(&graph, &LabelCodec::encode(&ds), &cfg)?;
    let truth = ds.truth().expect("synthetic data has truth");

    let mut ambiguous = 0;
    let mut resolved = 0;
    for (i, cands) in ds.candidates().iter().enumerate() {
        if cands.len() > 1 {
            ambiguous += 1;
            resolved += usize::from(report.labels[i] == truth[i]);
        }
    }
    println!("ambiguous rows resolved correctly: {resolved}/{ambiguous}");
    println!(
        "training accuracy: {:.4}",
        training_accuracy(&report, Some(truth))?
    );
    println!(
        "converged={} after {} loops; max |row sum - 1| = {:.2e}, min entry = {:.2e}",
        report.converged,
        report.loops_used,
        report.feasibility.max_rowsum_dev,
        report.feasibility.min_entry
    );

    for i in 0..5 {
        let row: Vec<String> = report
            .f_star
            .row(i)
            .iter()
            .map(|v| format!("{v:.3}"))
            .collect();
        let cands: Vec<usize> = ds.candidates()[i].iter().map(|j| j + 1).collect();
        println!(
            "row {}: candidates {:?} -> F = [{}] -> label {}",
            i + 1,
            cands,
            row.join(", "),
            report.labels[i] + 1
        );
    }
    Ok(())
}
