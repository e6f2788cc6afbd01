//! Trains on one synthetic sample, labels a second independent sample by
//! weighted neighbor voting, and compares against voting with the raw
//! candidate sets.
//!
//! cargo run --release --example predict_unseen

use partial_label::prelude::*;

fn main() -> Result<()> {
    let train = make_synthetic(&SyntheticSpec {
        seed: 1,
        ..SyntheticSpec::default()
    })?;
    let test = make_synthetic(&SyntheticSpec {
        n: 150,
        seed: 2,
        ..SyntheticSpec::default()
    })?;

    let cfg = SolverConfig::default();
    let graph = build_knn_graph(&train, cfg.k, cfg.theta)?;
    let report = alm_fit(&graph, &LabelCodec::encode(&train), &cfg)?;

    // Test points reuse the kernel width chosen on the training graph.
    let predictor = Predictor::new(
        train.features().clone(),
        report.onehot.clone(),
        cfg.k,
        graph.theta(),
    )?;
    let preds = predictor.predict_batch(test.features())?;
    let labels: Vec<usize> = preds.iter().map(|p| p.label).collect();

    let baseline: Vec<usize> = test
        .features()
        .rows()
        .into_iter()
        .map(|x| baseline_ambiguous_knn(&train, x, cfg.k, graph.theta()).map(|p| p.label))
        .collect::<Result<_>>()?;

    let truth = test.truth().expect("truth");
    println!(
        "disambiguated kNN test accuracy: {:.4}",
        accuracy(&labels, truth)?
    );
    println!(
        "ambiguous kNN test accuracy:     {:.4}",
        accuracy(&baseline, truth)?
    );

    let p = &preds[0];
    println!(
        "first test point: predicted {} with scores {:?}",
        p.label + 1,
        p.scores.to_vec()
    );
    Ok(())
}
