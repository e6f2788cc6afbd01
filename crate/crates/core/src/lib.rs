//! Disambiguation of superset (partial) labels by graph regularization.
//!
//! Training examples carry candidate label sets. A K-nearest-neighbor graph
//! ties similar examples together, and a label matrix `F` is found by
//! minimizing graph smoothness plus a fidelity penalty on non-candidate
//! labels minus a discrimination reward `beta |F|^2`, subject to every row of
//! `F` lying on the probability simplex. The constrained non-convex problem
//! is solved by an augmented Lagrangian outer loop whose primal step runs a
//! concave-convex procedure. Unseen examples are then labeled by
//! similarity-weighted voting among their nearest disambiguated neighbors.
//!
//! ```no_run
//! use partial_label::prelude::*;
//!
//! let ds = make_synthetic(&SyntheticSpec::default())?;
//! let cfg = SolverConfig::default();
//! let graph = build_knn_graph(&ds, cfg.k, cfg.theta)?;
//! let report = alm_fit(&graph, &LabelCodec::encode(&ds), &cfg)?;
//! println!("accuracy {}", training_accuracy(&report, ds.truth())?);
//! # Ok::<(), partial_label::Error>(())
//! ```

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod inference;
pub mod labelspace;
pub mod objective;
pub mod solver;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dataset::{
        load_dataset, load_manifest, make_synthetic, normalize_unit_length, plan_splits, Dataset,
        SplitPlan, SyntheticSpec,
    };
    pub use crate::error::{Error, Result};
    pub use crate::evaluation::{
        accuracy, cross_validate, friedman_test, sweep, training_accuracy, CvResult, SweepGrid,
    };
    pub use crate::graph::{auto_theta, build_knn_graph, gaussian_weight, KnnGraph, Theta};
    pub use crate::inference::{baseline_ambiguous_knn, Predictor};
    pub use crate::labelspace::LabelCodec;
    pub use crate::objective::{lagrangian, primal_objective, AlmState, ObjectiveParams};
    pub use crate::solver::{alm_fit, alm_fit_from, onehot, SolverConfig, SolverReport};
}
