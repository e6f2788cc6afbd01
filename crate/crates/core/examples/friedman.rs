//! Friedman rank test over a methods x datasets accuracy table, with
//! per-method decisions against the first method.
//!
//! cargo run --example friedman

use ndarray::array;
use partial_label::prelude::*;

fn main() -> Result<()> {
    let methods = ["graph-regularized", "ambiguous-knn", "majority"];
    let table = array![
        [0.91, 0.84, 0.77, 0.95, 0.88],
        [0.85, 0.80, 0.70, 0.93, 0.86],
        [0.60, 0.55, 0.52, 0.71, 0.64],
    ];
    let out = friedman_test(&table, 0.90)?;
    println!(
        "statistic {:.4} on {} df, critical value {:.4}: {}",
        out.statistic,
        out.df,
        out.critical_value,
        if out.reject {
            "methods differ"
        } else {
            "no difference detected"
        }
    );
    for (m, name) in methods.iter().enumerate() {
        let vs_first = match out.pairwise[m] {
            Some(p) => format!("statistic {:.3}, differs: {}", p.statistic, p.reject),
            None => "reference".to_string(),
        };
        println!(
            "{name:<18} mean rank {:.2}  ({vs_first})",
            out.mean_ranks[m]
        );
    }
    Ok(())
}
