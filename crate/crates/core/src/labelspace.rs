//! Candidate label encoding.

use ndarray::Array2;

use crate::dataset::Dataset;

/// Dense candidate matrix `Y` (uniform over each candidate set) and the
/// candidate indicator from which the fidelity mask `H` is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelCodec {
    y: Array2<f64>,
    candidate: Array2<bool>,
}

impl LabelCodec {
    pub fn encode(ds: &Dataset) -> Self {
        Self::from_candidates(ds.candidates(), ds.c())
    }

    /// Encodes 0-based candidate sets over `classes` labels.
    pub fn from_candidates(candidates: &[Vec<usize>], classes: usize) -> Self {
        let n = candidates.len();
        let mut y = Array2::zeros((n, classes));
        let mut candidate = Array2::from_elem((n, classes), false);
        for (i, set) in candidates.iter().enumerate() {
            let share = 1.0 / set.len() as f64;
            for &j in set {
                y[[i, j]] = share;
                candidate[[i, j]] = true;
            }
        }
        Self { y, candidate }
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn c(&self) -> usize {
        self.y.ncols()
    }

    pub fn y(&self) -> &Array2<f64> {
        &self.y
    }

    #[inline]
    pub fn is_candidate(&self, i: usize, j: usize) -> bool {
        self.candidate[[i, j]]
    }

    /// `H[i][j]`: 1 where `j` is not a candidate of example `i`.
    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        if self.candidate[[i, j]] {
            0.0
        } else {
            1.0
        }
    }

    pub fn h_matrix(&self) -> Array2<f64> {
        self.candidate.mapv(|c| if c { 0.0 } else { 1.0 })
    }

    /// Non-candidate labels of example `i`.
    pub fn omega(&self, i: usize) -> Vec<usize> {
        (0..self.c()).filter(|&j| !self.candidate[[i, j]]).collect()
    }

    /// Codec with class columns reordered: new column `perm[j]` holds old column `j`.
    pub fn permute_classes(&self, perm: &[usize]) -> Self {
        let mut y = Array2::zeros(self.y.raw_dim());
        let mut candidate = Array2::from_elem(self.y.raw_dim(), false);
        for ((i, j), &v) in self.y.indexed_iter() {
            y[[i, perm[j]]] = v;
            candidate[[i, perm[j]]] = self.candidate[[i, j]];
        }
        Self { y, candidate }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singleton_row() {
        let codec = LabelCodec::from_candidates(&[vec![1]], 3);
        assert_eq!(codec.y().row(0).to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(codec.h_matrix().row(0).to_vec(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn two_of_four() {
        let codec = LabelCodec::from_candidates(&[vec![0, 2]], 4);
        assert_eq!(codec.y().row(0).to_vec(), vec![0.5, 0.0, 0.5, 0.0]);
        assert_eq!(codec.omega(0), vec![1, 3]);
    }

    #[test]
    fn fully_ambiguous_row() {
        let codec = LabelCodec::from_candidates(&[vec![0, 1, 2, 3, 4]], 5);
        assert!(codec.y().iter().all(|&v| v == 0.2));
        assert!(codec.h_matrix().iter().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn codec_invariants(sets in prop::collection::vec(
            prop::collection::btree_set(0usize..7, 1..=7), 1..20)
        ) {
            let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
            let codec = LabelCodec::from_candidates(&sets, 7);
            let h = codec.h_matrix();
            for (i, set) in sets.iter().enumerate() {
                let sum: f64 = codec.y().row(i).sum();
                prop_assert!((sum - 1.0).abs() < 1e-15);
                prop_assert_eq!(codec.omega(i).len(), 7 - set.len());
                for j in 0..7 {
                    prop_assert_eq!(h[[i, j]] * codec.y()[[i, j]], 0.0);
                    prop_assert_eq!(h[[i, j]] == 1.0, codec.y()[[i, j]] == 0.0);
                }
            }
        }
    }
}
