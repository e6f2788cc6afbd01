//! Five-fold stratified cross validation with per-fold accuracies.
//!
//! cargo run --release --example cross_validate [-- SEED]

use partial_label::prelude::*;

fn main() -> Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("seed must be an integer"))
        .unwrap_or(0);
    let ds = make_synthetic(&SyntheticSpec {
        n: 250,
        c: 5,
        d: 4,
        r_extra: 2,
        ..SyntheticSpec::default()
    })?;

    let result = cross_validate(&ds, &SolverConfig::default(), seed)?;
    println!("fold  train   test    baseline  loops");
    for f in &result.folds {
        println!(
            "{:>4}  {:.4}  {:.4}  {:.4}    {}",
            f.fold, f.train_acc, f.test_acc, f.baseline_test_acc, f.loops_used
        );
    }
    println!(
        "train {:.4} +- {:.4}, test {:.4} +- {:.4}, baseline test {:.4}",
        result.mean_train,
        result.std_train,
        result.mean_test,
        result.std_test,
        result.mean_baseline_test
    );
    Ok(())
}
