//! Test-stage prediction by similarity-weighted voting among the nearest
//! training examples, plus an ambiguous-label baseline that skips
//! disambiguation.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{kernel, nearest_neighbors};
use crate::labelspace::LabelCodec;
use crate::solver::argmax;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// 0-based predicted class.
    pub label: usize,
    pub scores: Array1<f64>,
}

/// Weighted nearest-neighbor voter over disambiguated training labels.
#[derive(Debug, Clone)]
pub struct Predictor {
    train_features: Array2<f64>,
    onehot: Array2<f64>,
    k: usize,
    theta: f64,
}

impl Predictor {
    pub fn new(
        train_features: Array2<f64>,
        onehot: Array2<f64>,
        k: usize,
        theta: f64,
    ) -> Result<Self> {
        if train_features.nrows() != onehot.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} training rows but {} label rows",
                train_features.nrows(),
                onehot.nrows()
            )));
        }
        if train_features.nrows() == 0 {
            return Err(Error::EmptyGraph);
        }
        if k == 0 {
            return Err(Error::KOutOfRange {
                k,
                max: train_features.nrows(),
            });
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidTheta(theta));
        }
        for (i, row) in onehot.rows().into_iter().enumerate() {
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(Error::InvalidParameter(format!(
                    "label row {} is not one-hot",
                    i + 1
                )));
            }
        }
        let n = train_features.nrows();
        let k = if k > n {
            log::warn!("K={k} exceeds {n} training examples; using K={n}");
            n
        } else {
            k
        };
        Ok(Self {
            train_features,
            onehot,
            k,
            theta,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn classes(&self) -> usize {
        self.onehot.ncols()
    }

    pub fn train_features(&self) -> &Array2<f64> {
        &self.train_features
    }

    pub fn onehot(&self) -> &Array2<f64> {
        &self.onehot
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> Result<Prediction> {
        vote(&self.train_features, &self.onehot, x, self.k, self.theta)
    }

    pub fn predict_batch(&self, xs: &Array2<f64>) -> Result<Vec<Prediction>> {
        xs.rows().into_iter().map(|x| self.predict(x)).collect()
    }
}

/// Accumulates kernel-weighted label rows of the `k` nearest training points.
fn vote(
    train: &Array2<f64>,
    label_rows: &Array2<f64>,
    x: ArrayView1<f64>,
    k: usize,
    theta: f64,
) -> Result<Prediction> {
    if x.len() != train.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "query has {} features, training data has {}",
            x.len(),
            train.ncols()
        )));
    }
    let mut scores = Array1::zeros(label_rows.ncols());
    for (i, d2) in nearest_neighbors(train, x, k, None) {
        scores.scaled_add(kernel(d2, theta), &label_rows.row(i));
    }
    Ok(Prediction {
        label: argmax(scores.iter().copied()),
        scores,
    })
}

/// Votes with the raw candidate vectors `Y` of the training set instead of
/// disambiguated labels.
pub fn baseline_ambiguous_knn(
    ds_train: &Dataset,
    x: ArrayView1<f64>,
    k: usize,
    theta: f64,
) -> Result<Prediction> {
    if !(theta > 0.0) {
        return Err(Error::InvalidTheta(theta));
    }
    if k == 0 || ds_train.n() == 0 {
        return Err(Error::KOutOfRange {
            k,
            max: ds_train.n(),
        });
    }
    let codec = LabelCodec::encode(ds_train);
    vote(
        ds_train.features(),
        codec.y(),
        x,
        k.min(ds_train.n()),
        theta,
    )
}

pub const PREDICTION_HEADER_PREFIX: &str = "index,predicted_label";

/// Writes `index,predicted_label,score_1..score_c` with 1-based index and label.
pub fn write_predictions_csv<W: Write>(
    preds: &[Prediction],
    classes: usize,
    mut out: W,
) -> std::io::Result<()> {
    let mut header = PREDICTION_HEADER_PREFIX.to_string();
    for j in 1..=classes {
        header.push_str(&format!(",score_{j}"));
    }
    writeln!(out, "{header}")?;
    for (i, p) in preds.iter().enumerate() {
        write!(out, "{},{}", i + 1, p.label + 1)?;
        for s in &p.scores {
            write!(out, ",{s}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::onehot;
    use ndarray::{array, Axis};

    #[test]
    fn unanimous_neighbors() {
        let x = array![[0.0], [0.1], [0.2], [5.0]];
        let p = Predictor::new(x, onehot(&[1, 1, 1, 0], 2), 3, 1.0).unwrap();
        assert_eq!(p.predict(array![0.05].view()).unwrap().label, 1);
    }

    #[test]
    fn weighted_sum_by_hand() {
        // weights exp(-d^2/2) chosen as 0.8 and 0.2
        let d1 = (-2.0 * 0.8f64.ln()).sqrt();
        let d2 = (-2.0 * 0.2f64.ln()).sqrt();
        let x = array![[d1], [-d2]];
        let p = Predictor::new(x, onehot(&[0, 1], 2), 2, 1.0).unwrap();
        let pred = p.predict(array![0.0].view()).unwrap();
        assert!((pred.scores[0] - 0.8).abs() < 1e-12);
        assert!((pred.scores[1] - 0.2).abs() < 1e-12);
        assert_eq!(pred.label, 0);
    }

    #[test]
    fn exact_match_with_k1() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let p = Predictor::new(x, onehot(&[0, 1], 2), 1, 0.5).unwrap();
        let pred = p.predict(array![3.0, 4.0].view()).unwrap();
        assert_eq!(pred.label, 1);
        assert_eq!(pred.scores[1], 1.0);
    }

    #[test]
    fn k_larger_than_n_is_clamped() {
        let p = Predictor::new(array![[0.0], [1.0]], onehot(&[0, 1], 2), 10, 1.0).unwrap();
        assert_eq!(p.k(), 2);
    }

    #[test]
    fn scores_sum_to_total_weight_and_zero_column_is_harmless() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [0.5, 0.5]];
        let p = Predictor::new(x.clone(), onehot(&[0, 1, 2, 1], 3), 3, 0.7).unwrap();
        let q = array![0.4, 0.9];
        let pred = p.predict(q.view()).unwrap();
        let total: f64 = nearest_neighbors(&x, q.view(), 3, None)
            .iter()
            .map(|&(_, d2)| kernel(d2, 0.7))
            .sum();
        assert!((pred.scores.sum() - total).abs() < 1e-12);
        assert!(pred.scores.iter().all(|&s| s >= 0.0));

        let padded =
            ndarray::concatenate(Axis(1), &[x.view(), Array2::zeros((4, 1)).view()]).unwrap();
        let p2 = Predictor::new(padded, onehot(&[0, 1, 2, 1], 3), 3, 0.7).unwrap();
        let pred2 = p2.predict(array![0.4, 0.9, 0.0].view()).unwrap();
        assert_eq!(pred.label, pred2.label);
        assert_eq!(pred, p.predict(q.view()).unwrap());
    }

    #[test]
    fn rejects_non_onehot_rows() {
        assert!(Predictor::new(array![[0.0]], array![[0.5, 0.5]], 1, 1.0).is_err());
    }

    #[test]
    fn baseline_splits_ambiguous_votes() {
        let ds = Dataset::new(array![[0.0], [0.0]], vec![vec![0, 1], vec![2]], None, 3).unwrap();
        let pred = baseline_ambiguous_knn(&ds, array![0.0].view(), 2, 1.0).unwrap();
        assert_eq!(pred.scores.to_vec(), vec![0.5, 0.5, 1.0]);
        assert_eq!(pred.label, 2);

        let single = Dataset::new(array![[0.0], [1.0]], vec![vec![1], vec![1]], None, 2).unwrap();
        assert_eq!(
            baseline_ambiguous_knn(&single, array![0.2].view(), 2, 1.0)
                .unwrap()
                .label,
            1
        );
    }

    #[test]
    fn prediction_csv_layout() {
        let preds = vec![Prediction {
            label: 1,
            scores: array![0.25, 0.75],
        }];
        let mut buf = Vec::new();
        write_predictions_csv(&preds, 2, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,predicted_label,score_1,score_2\n1,2,0.25,0.75\n"
        );
    }
}
