//! K-nearest-neighbor similarity graph and its Laplacian.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::dataset::{write_file, Dataset};
use crate::error::{Error, Result};

/// Gaussian kernel similarity `exp(-|a - b|^2 / (2 theta^2))`.
pub fn gaussian_weight(a: ArrayView1<f64>, b: ArrayView1<f64>, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::InvalidTheta(theta));
    }
    Ok(kernel(squared_distance(a, b), theta))
}

#[inline]
pub(crate) fn kernel(dist2: f64, theta: f64) -> f64 {
    // keep edges strictly positive when the exponential underflows
    (-dist2 / (2.0 * theta * theta))
        .exp()
        .max(f64::MIN_POSITIVE)
}

#[inline]
pub(crate) fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` rows of `points` nearest to `query`, as `(index, squared distance)`
/// sorted by distance then index. `skip` excludes one row (the query itself).
pub(crate) fn nearest_neighbors(
    points: &Array2<f64>,
    query: ArrayView1<f64>,
    k: usize,
    skip: Option<usize>,
) -> Vec<(usize, f64)> {
    let mut cands: Vec<(usize, f64)> = points
        .axis_iter(Axis(0))
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, row)| (i, squared_distance(row, query)))
        .collect();
    let k = k.min(cands.len());
    if k == 0 {
        return Vec::new();
    }
    let order = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k < cands.len() {
        cands.select_nth_unstable_by(k - 1, order);
        cands.truncate(k);
    }
    cands.sort_unstable_by(order);
    cands
}

/// Kernel width: either fixed or derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Theta {
    #[default]
    Auto,
    Fixed(f64),
}

impl Theta {
    pub fn resolve(self, features: &Array2<f64>, k: usize) -> Result<f64> {
        match self {
            Theta::Fixed(t) if t > 0.0 && t.is_finite() => Ok(t),
            Theta::Fixed(t) => Err(Error::InvalidTheta(t)),
            Theta::Auto => Ok(auto_theta_features(features, k)),
        }
    }
}

impl FromStr for Theta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Theta::Auto);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("theta must be a number or \"auto\", got {s:?}")))?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidTheta(t));
        }
        Ok(Theta::Fixed(t))
    }
}

impl std::fmt::Display for Theta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Theta::Auto => f.write_str("auto"),
            Theta::Fixed(t) => write!(f, "{t}"),
        }
    }
}

/// Mean Euclidean distance from each example to its `k` nearest neighbors.
/// Falls back to 1 when every point coincides.
pub fn auto_theta(ds: &Dataset, k: usize) -> f64 {
    auto_theta_features(ds.features(), k)
}

fn auto_theta_features(features: &Array2<f64>, k: usize) -> f64 {
    let n = features.nrows();
    if n < 2 {
        return 1.0;
    }
    let k = k.clamp(1, n - 1);
    let sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            nearest_neighbors(features, features.row(i), k, Some(i))
                .iter()
                .map(|&(_, d2)| d2.sqrt())
                .sum::<f64>()
        })
        .collect();
    let mean = sums.iter().sum::<f64>() / (n * k) as f64;
    if mean > 0.0 {
        mean
    } else {
        1.0
    }
}

/// Symmetric sparse similarity graph with degrees.
///
/// The Laplacian `L = D - W` is never materialized; [`KnnGraph::laplacian_apply`]
/// computes `L F` from the adjacency lists.
#[derive(Debug, Clone)]
pub struct KnnGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    k: usize,
    theta: f64,
}

impl KnnGraph {
    /// Builds a graph from explicit undirected edges `(i, k, w)`.
    ///
    /// Repeated pairs keep the last weight; self-loops are rejected.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        k: usize,
        theta: f64,
    ) -> Result<Self> {
        let mut unique = BTreeMap::new();
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::DimensionMismatch(format!(
                    "edge ({a},{b}) outside {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidParameter(format!(
                    "self-loop at node {}",
                    a + 1
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "edge weight {w} must be positive"
                )));
            }
            unique.insert((a.min(b), a.max(b)), w);
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(a, b), &w) in &unique {
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|&(j, _)| j);
        }
        let degree = adjacency
            .iter()
            .map(|l| l.iter().map(|&(_, w)| w).sum())
            .collect();
        Ok(Self {
            adjacency,
            degree,
            k,
            theta,
        })
    }

    /// Graph with `n` nodes and no edges.
    pub fn edgeless(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
            degree: vec![0.0; n],
            k: 0,
            theta: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Neighbors of `i` with weights, sorted by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// `W[i][k]`, zero for non-edges.
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        self.adjacency[i]
            .binary_search_by_key(&k, |&(j, _)| j)
            .map(|pos| self.adjacency[i][pos].1)
            .unwrap_or(0.0)
    }

    /// Undirected edges `(i, k, w)` with `i < k`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .filter(move |&&(k, _)| k > i)
                .map(move |&(k, w)| (i, k, w))
        })
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Dense copy of W. Intended for tests and small graphs.
    pub fn dense_weights(&self) -> Array2<f64> {
        let n = self.n();
        let mut w = Array2::zeros((n, n));
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(k, v) in list {
                w[[i, k]] = v;
            }
        }
        w
    }

    /// Computes `L F = D F - W F` for an `n x c` matrix.
    pub fn laplacian_apply(&self, f: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(f.raw_dim());
        for (i, mut out_row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let fi = f.row(i);
            out_row.scaled_add(self.degree[i], &fi);
            for &(k, w) in &self.adjacency[i] {
                out_row.scaled_add(-w, &f.row(k));
            }
        }
        out
    }

    /// `x^T L x` for a vector over nodes.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, list) in self.adjacency.iter().enumerate() {
            let mut lx = self.degree[i] * x[i];
            for &(k, w) in list {
                lx -= w * x[k];
            }
            total += x[i] * lx;
        }
        total
    }

    /// Upper bound on the largest Laplacian eigenvalue (Gershgorin: `2 max D_ii`).
    pub fn lambda_max_bound(&self) -> f64 {
        2.0 * self.degree.iter().copied().fold(0.0, f64::max)
    }

    /// Writes the edge list as `i<TAB>k<TAB>w` lines with 1-based node ids.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        for (i, k, w) in self.edges() {
            let _ = writeln!(s, "{}\t{}\t{}", i + 1, k + 1, w);
        }
        write_file(path, &s)
    }
}

/// Builds the symmetric K-nearest-neighbor graph over `ds`.
///
/// Nodes `i` and `k` are linked when either is among the other's `k`
/// nearest neighbors. Distance ties resolve to the lower index.
pub fn build_knn_graph(ds: &Dataset, k: usize, theta: Theta) -> Result<KnnGraph> {
    build_knn_graph_features(ds.features(), k, theta)
}

pub(crate) fn build_knn_graph_features(
    features: &Array2<f64>,
    k: usize,
    theta: Theta,
) -> Result<KnnGraph> {
    let n = features.nrows();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange {
            k,
            max: n.saturating_sub(1),
        });
    }
    let theta = theta.resolve(features, k)?;
    let lists: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| nearest_neighbors(features, features.row(i), k, Some(i)))
        .collect();

    // one weight per unordered pair so that W is exactly symmetric
    let mut edges = BTreeMap::new();
    for (i, list) in lists.iter().enumerate() {
        for &(j, d2) in list {
            edges.entry((i.min(j), i.max(j))).or_insert(d2);
        }
    }
    let edges: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|((a, b), d2)| (a, b, kernel(d2, theta)))
        .collect();
    KnnGraph::from_edges(n, &edges, k, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points(rows: &[&[f64]]) -> Dataset {
        let d = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let x = Array2::from_shape_vec((rows.len(), d), flat).unwrap();
        Dataset::new(x, vec![vec![0]; rows.len()], None, 1).unwrap()
    }

    fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
        Dataset::new(x, vec![vec![0]; n], None, 1).unwrap()
    }

    #[test]
    fn gaussian_weight_values() {
        let a = array![0.0, 0.0];
        assert_eq!(gaussian_weight(a.view(), a.view(), 0.3).unwrap(), 1.0);
        let b = array![3.0, 4.0];
        let w = gaussian_weight(a.view(), b.view(), 5.0).unwrap();
        assert!((w - (-0.5f64).exp()).abs() < 1e-15);
        assert!((w - 0.606531).abs() < 1e-6);
        // |a - c|^2 = 2 theta^2
        let c = array![1.0, 1.0];
        let w = gaussian_weight(a.view(), c.view(), 1.0).unwrap();
        assert!((w - 0.367879).abs() < 1e-6);
        assert!(gaussian_weight(a.view(), b.view(), 0.0).is_err());
    }

    #[test]
    fn collinear_points_or_rule() {
        let ds = points(&[&[0.0], &[1.0], &[10.0]]);
        let g = build_knn_graph(&ds, 1, Theta::Fixed(1.0)).unwrap();
        let edges: Vec<(usize, usize)> = g.edges().map(|(a, b, _)| (a, b)).collect();
        assert_eq!(edges, vec![(0, 1), (1, 2)]);
        assert_eq!(g.weight(1, 2), g.weight(2, 1));
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn full_k_gives_complete_graph() {
        let ds = random_dataset(6, 2, 1);
        let g = build_knn_graph(&ds, 5, Theta::Auto).unwrap();
        assert_eq!(g.num_edges(), 15);
    }

    #[test]
    fn k_out_of_range() {
        let ds = random_dataset(4, 2, 1);
        assert!(matches!(
            build_knn_graph(&ds, 0, Theta::Auto),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            build_knn_graph(&ds, 4, Theta::Auto),
            Err(Error::KOutOfRange { .. })
        ));
    }

    #[test]
    fn duplicates_get_unit_weight() {
        let ds = points(&[&[1.0, 1.0], &[1.0, 1.0], &[5.0, 5.0]]);
        let g = build_knn_graph(&ds, 1, Theta::Fixed(1.0)).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
    }

    #[test]
    fn structural_invariants() {
        let ds = random_dataset(60, 3, 9);
        let g = build_knn_graph(&ds, 4, Theta::Auto).unwrap();
        let w = g.dense_weights();
        assert_eq!(w, w.t());
        for i in 0..g.n() {
            assert_eq!(w[[i, i]], 0.0);
            assert!((g.degree()[i] - w.row(i).sum()).abs() < 1e-12);
            for &(_, v) in g.neighbors(i) {
                assert!(v > 0.0 && v <= 1.0);
            }
        }
        let ones = Array2::ones((60, 1));
        assert!(g.laplacian_apply(&ones).iter().all(|v| v.abs() < 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x: Vec<f64> = (0..60).map(|_| rng.random_range(-5.0..5.0)).collect();
            assert!(g.quadratic_form(&x) >= -1e-9);
        }
    }

    #[test]
    fn smoothness_identity() {
        let ds = random_dataset(30, 2, 5);
        let g = build_knn_graph(&ds, 3, Theta::Auto).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = Array2::from_shape_fn((30, 4), |_| rng.random_range(-1.0..1.0));
        let trace = (&f * &g.laplacian_apply(&f)).sum();
        let w = g.dense_weights();
        let mut pairwise = 0.0;
        for i in 0..30 {
            for k in 0..30 {
                let diff: Array1<f64> = &f.row(i) - &f.row(k);
                pairwise += 0.5 * w[[i, k]] * diff.dot(&diff);
            }
        }
        assert!((trace - pairwise).abs() <= 1e-8 * pairwise.abs().max(1.0));
    }

    #[test]
    fn permutation_equivariance() {
        let ds = random_dataset(25, 2, 12);
        let g = build_knn_graph(&ds, 3, Theta::Fixed(0.5)).unwrap();
        let perm: Vec<usize> = (0..25).rev().collect();
        let permuted = ds.subset(&perm);
        let gp = build_knn_graph(&permuted, 3, Theta::Fixed(0.5)).unwrap();
        // reversed order has no distance ties in random data
        for a in 0..25 {
            for b in 0..25 {
                assert_eq!(g.weight(perm[a], perm[b]), gp.weight(a, b));
            }
        }
    }

    #[test]
    fn auto_theta_cases() {
        let two = points(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(auto_theta(&two, 1), 2.0);
        let same = points(&[&[1.0], &[1.0], &[1.0]]);
        assert_eq!(auto_theta(&same, 2), 1.0);

        // brute force: sort all distances per row
        let ds = random_dataset(100, 3, 21);
        let k = 5;
        let x = ds.features();
        let mut total = 0.0;
        for i in 0..100 {
            let mut dists: Vec<f64> = (0..100)
                .filter(|&j| j != i)
                .map(|j| (&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt())
                .collect();
            dists.sort_by(f64::total_cmp);
            total += dists[..k].iter().sum::<f64>();
        }
        let expected = total / (100 * k) as f64;
        assert!((auto_theta(&ds, k) - expected).abs() < 1e-10);
    }

    #[test]
    fn theta_parsing() {
        assert_eq!("auto".parse::<Theta>().unwrap(), Theta::Auto);
        assert_eq!("0.1".parse::<Theta>().unwrap(), Theta::Fixed(0.1));
        assert!("-1".parse::<Theta>().is_err());
        assert!("x".parse::<Theta>().is_err());
    }

    #[test]
    fn edge_list_dump() {
        let ds = points(&[&[0.0], &[1.0], &[10.0]]);
        let g = build_knn_graph(&ds, 1, Theta::Fixed(1.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.tsv");
        g.write_edge_list(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("1\t2\t"));
    }
}
