//! Shows how the discrimination weight beta pushes label rows towards
//! one-hot vectors on a tiny two-class chain.
//!
//! cargo run --release --example discrimination

use ndarray::array;
use partial_label::prelude::*;

fn main() -> Result<()> {
    // Two unambiguous ends and three ambiguous points between them.
    let features = array![[0.0], [1.0], [2.0], [3.0], [4.0]];
    let candidates = vec![vec![0], vec![0, 1], vec![0, 1], vec![0, 1], vec![1]];
    let ds = Dataset::new(features, candidates, Some(vec![0, 0, 0, 1, 1]), 2)?;
    let codec = LabelCodec::encode(&ds);

    for beta in [0.0, 0.01, 0.1, 0.5] {
        let cfg = SolverConfig {
            alpha: 10.0,
            beta,
            k: 2,
            theta: Theta::Fixed(1.0),
            ..SolverConfig::default()
        };
        let graph = build_knn_graph(&ds, cfg.k, cfg.theta)?;
        let report = alm_fit(&graph, &codec, &cfg)?;
        let distance: f64 = report
            .f_star
            .rows()
            .into_iter()
            .map(|r| 1.0 - r.iter().cloned().fold(f64::MIN, f64::max))
            .sum::<f64>()
            / ds.n() as f64;
        let middle: Vec<String> = report
            .f_star
            .rows()
            .into_iter()
            .map(|r| format!("{:.3}", r[0]))
            .collect();
        println!(
            "beta={beta:<5} F[:,1] = [{}]  mean distance to nearest vertex {distance:.4}",
            middle.join(", ")
        );
    }
    Ok(())
}
