//! Superset-label datasets: validation, text-file IO, synthetic generation
//! and stratified five-fold split planning.
//!
//! Class labels are stored 0-based in memory. Every file read or written by
//! this module uses 1-based labels, and row numbers in errors are 1-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const FEATURES_FILE: &str = "features.tsv";
pub const CANDIDATES_FILE: &str = "candidates.txt";
pub const TRUTH_FILE: &str = "truth.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Training examples with their candidate label sets.
///
/// Immutable once constructed; every constructor runs the same validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    candidates: Vec<Vec<usize>>,
    truth: Option<Vec<usize>>,
    classes: usize,
}

impl Dataset {
    /// Builds a dataset from 0-based candidate and truth labels.
    ///
    /// Candidate sets are sorted and deduplicated.
    pub fn new(
        features: Array2<f64>,
        candidates: Vec<Vec<usize>>,
        truth: Option<Vec<usize>>,
        classes: usize,
    ) -> Result<Self> {
        let n = features.nrows();
        if candidates.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} feature rows but {} candidate rows",
                candidates.len()
            )));
        }
        if let Some(t) = &truth {
            if t.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{n} feature rows but {} truth rows",
                    t.len()
                )));
            }
        }
        if classes == 0 {
            return Err(Error::InvalidParameter(
                "class count must be positive".into(),
            ));
        }
        for (i, row) in features.axis_iter(Axis(0)).enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature { row: i + 1 });
            }
        }
        let mut candidates = candidates;
        for (i, set) in candidates.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(Error::EmptyCandidates { row: i + 1 });
            }
            if let Some(&bad) = set.iter().find(|&&j| j >= classes) {
                return Err(Error::LabelOutOfRange {
                    row: i + 1,
                    label: bad + 1,
                    classes,
                });
            }
        }
        if let Some(t) = &truth {
            for (i, &y) in t.iter().enumerate() {
                if y >= classes {
                    return Err(Error::LabelOutOfRange {
                        row: i + 1,
                        label: y + 1,
                        classes,
                    });
                }
                if candidates[i].binary_search(&y).is_err() {
                    return Err(Error::TruthNotCandidate {
                        row: i + 1,
                        label: y + 1,
                    });
                }
            }
        }
        Ok(Self {
            features,
            candidates,
            truth,
            classes,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn c(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    /// Sorted 0-based candidate sets.
    pub fn candidates(&self) -> &[Vec<usize>] {
        &self.candidates
    }

    /// 0-based ground-truth labels, when known.
    pub fn truth(&self) -> Option<&[usize]> {
        self.truth.as_deref()
    }

    /// Mean candidate-set size.
    pub fn average_candidates(&self) -> f64 {
        let total: usize = self.candidates.iter().map(Vec::len).sum();
        total as f64 / self.n().max(1) as f64
    }

    /// Rows selected by `indices`, in that order. Keeps the class count.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            candidates: indices
                .iter()
                .map(|&i| self.candidates[i].clone())
                .collect(),
            truth: self
                .truth
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
            classes: self.classes,
        }
    }

    /// Writes features, candidates, truth (if present) and a manifest into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join(FEATURES_FILE), &format_features(&self.features))?;

        let mut cands = String::new();
        for set in &self.candidates {
            let line: Vec<String> = set.iter().map(|j| (j + 1).to_string()).collect();
            cands.push_str(&line.join(","));
            cands.push('\n');
        }
        write_file(&dir.join(CANDIDATES_FILE), &cands)?;

        let mut manifest = format!(
            "n={}\nd={}\nc={}\nfeatures={FEATURES_FILE}\ncandidates={CANDIDATES_FILE}\n",
            self.n(),
            self.d(),
            self.c()
        );
        if let Some(truth) = &self.truth {
            let mut s = String::new();
            for y in truth {
                let _ = writeln!(s, "{}", y + 1);
            }
            write_file(&dir.join(TRUTH_FILE), &s)?;
            manifest.push_str(&format!("truth={TRUTH_FILE}\n"));
        }
        write_file(&dir.join(MANIFEST_FILE), &manifest)
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Tab-separated rows using the shortest round-trip float representation.
pub fn format_features(features: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in features.axis_iter(Axis(0)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses a tab-separated feature matrix.
pub fn read_features(path: &Path) -> Result<Array2<f64>> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    let mut values = Vec::new();
    let mut dims: Option<usize> = None;
    let mut rows = 0;
    for (line_no, line) in data_lines(&text) {
        let before = values.len();
        for tok in line.split('\t') {
            let tok = tok.trim();
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(&name, line_no, format!("non-numeric feature token {tok:?}"))
            })?;
            values.push(v);
        }
        let width = values.len() - before;
        match dims {
            None => dims = Some(width),
            Some(d) if d != width => {
                return Err(Error::DimensionMismatch(format!(
                    "{name}:{line_no}: expected {d} features, found {width}"
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    let d = dims.unwrap_or(0);
    Array2::from_shape_vec((rows, d), values)
        .map_err(|e| Error::DimensionMismatch(format!("{name}: {e}")))
}

/// Parses comma-separated 1-based candidate labels into 0-based sets.
pub fn read_candidates(path: &Path) -> Result<Vec<Vec<usize>>> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let mut set = Vec::new();
        for tok in line.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let label: usize = tok
                .parse()
                .map_err(|_| Error::parse(&name, line_no, format!("invalid label {tok:?}")))?;
            if label == 0 {
                return Err(Error::parse(&name, line_no, "labels are 1-based"));
            }
            set.push(label - 1);
        }
        if set.is_empty() {
            return Err(Error::EmptyCandidates { row: out.len() + 1 });
        }
        out.push(set);
    }
    Ok(out)
}

/// Parses one 1-based label per line into 0-based labels.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    data_lines(&text)
        .map(|(line_no, tok)| match tok.parse::<usize>() {
            Ok(0) => Err(Error::parse(&name, line_no, "labels are 1-based")),
            Ok(v) => Ok(v - 1),
            Err(_) => Err(Error::parse(
                &name,
                line_no,
                format!("invalid label {tok:?}"),
            )),
        })
        .collect()
}

/// Loads a dataset, inferring the class count from the largest label seen.
pub fn load_dataset(
    features_path: &Path,
    candidates_path: &Path,
    truth_path: Option<&Path>,
) -> Result<Dataset> {
    load_dataset_with_classes(features_path, candidates_path, truth_path, None)
}

/// Loads a dataset with an optionally declared class count.
///
/// A declared count smaller than the largest label in the files is an error.
pub fn load_dataset_with_classes(
    features_path: &Path,
    candidates_path: &Path,
    truth_path: Option<&Path>,
    declared_classes: Option<usize>,
) -> Result<Dataset> {
    let features = read_features(features_path)?;
    let candidates = read_candidates(candidates_path)?;
    let truth = truth_path.map(read_labels).transpose()?;

    let seen = candidates
        .iter()
        .flatten()
        .chain(truth.iter().flatten())
        .map(|&j| j + 1)
        .max()
        .unwrap_or(0);
    let classes = match declared_classes {
        Some(c) if c < seen => {
            return Err(Error::DimensionMismatch(format!(
                "declared c={c} but label {seen} appears in the data"
            )))
        }
        Some(c) => c,
        None => seen,
    };
    Dataset::new(features, candidates, truth, classes)
}

/// Parses a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str, name: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (line_no, line) in data_lines(text) {
        if line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(name, line_no, "expected key=value"))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Loads a dataset described by a manifest. Relative file names resolve
/// against the manifest's directory; declared `n` and `d` are checked.
pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    let kv = parse_key_values(&text, &name)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |key: &str, default: &str| -> PathBuf {
        base.join(kv.get(key).map(String::as_str).unwrap_or(default))
    };
    let number = |key: &str| -> Result<Option<usize>> {
        kv.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("{name}: {key}={v} is not an integer")))
            })
            .transpose()
    };

    let truth = kv.get("truth").map(|t| base.join(t));
    let ds = load_dataset_with_classes(
        &resolve("features", FEATURES_FILE),
        &resolve("candidates", CANDIDATES_FILE),
        truth.as_deref(),
        number("c")?,
    )?;
    if let Some(n) = number("n")? {
        if n != ds.n() {
            return Err(Error::DimensionMismatch(format!(
                "manifest declares n={n}, files hold {}",
                ds.n()
            )));
        }
    }
    if let Some(d) = number("d")? {
        if d != ds.d() {
            return Err(Error::DimensionMismatch(format!(
                "manifest declares d={d}, files hold {}",
                ds.d()
            )));
        }
    }
    Ok(ds)
}

/// Scales every feature row to Euclidean norm 1.
pub fn normalize_unit_length(ds: &Dataset) -> Result<Dataset> {
    let mut features = ds.features.clone();
    normalize_rows(&mut features)?;
    Ok(Dataset {
        features,
        ..ds.clone()
    })
}

pub(crate) fn normalize_rows(features: &mut Array2<f64>) -> Result<()> {
    for (i, mut row) in features.axis_iter_mut(Axis(0)).enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNormRow { row: i + 1 });
        }
        row.mapv_inplace(|v| v / norm);
    }
    Ok(())
}

/// Parameters of the Gaussian-blob generator with random label corruption.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub c: usize,
    pub d: usize,
    /// Minimum distance between class means, in units of the per-class
    /// standard deviation (which is 1).
    pub sep: f64,
    /// Probability that an example receives extra false candidates.
    pub p_coocc: f64,
    /// Number of false candidates added to a corrupted example.
    pub r_extra: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 300,
            c: 3,
            d: 2,
            sep: 4.0,
            p_coocc: 0.7,
            r_extra: 1,
            seed: 42,
        }
    }
}

/// Class means with pairwise distance at least `sep`.
///
/// With `c <= d` the means sit on scaled coordinate axes (a regular simplex
/// of side `sep`); otherwise on a circle in the first two coordinates with
/// neighboring chord `sep`, or on a line when `d == 1`.
fn class_means(c: usize, d: usize, sep: f64) -> Array2<f64> {
    let mut means = Array2::zeros((c, d));
    if c <= d {
        let scale = sep / std::f64::consts::SQRT_2;
        for j in 0..c {
            means[[j, j]] = scale;
        }
    } else if d >= 2 {
        let step = std::f64::consts::TAU / c as f64;
        let radius = sep / (2.0 * (step / 2.0).sin());
        for j in 0..c {
            let angle = step * j as f64;
            means[[j, 0]] = radius * angle.cos();
            means[[j, 1]] = radius * angle.sin();
        }
    } else {
        for j in 0..c {
            means[[j, 0]] = sep * j as f64;
        }
    }
    means
}

/// Generates balanced Gaussian blobs with ambiguous candidate sets.
///
/// Example `i` belongs to class `i mod c`. With probability `p_coocc` it
/// also receives `r_extra` distinct false labels drawn uniformly without
/// replacement.
pub fn make_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    let SyntheticSpec {
        n,
        c,
        d,
        sep,
        p_coocc,
        r_extra,
        seed,
    } = *spec;
    if c < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 classes, got {c}"
        )));
    }
    if r_extra >= c {
        return Err(Error::InvalidParameter(format!(
            "r_extra={r_extra} must be below c={c}"
        )));
    }
    if !(0.0..=1.0).contains(&p_coocc) {
        return Err(Error::InvalidParameter(format!(
            "p_coocc={p_coocc} outside [0,1]"
        )));
    }
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("n and d must be positive".into()));
    }
    if !(sep >= 0.0 && sep.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sep={sep} must be finite and >= 0"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means = class_means(c, d, sep);
    let mut features = Array2::zeros((n, d));
    let mut candidates = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % c;
        for k in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            features[[i, k]] = means[[y, k]] + noise;
        }
        let mut set = vec![y];
        if rng.random::<f64>() < p_coocc {
            // draw from the c-1 labels other than y
            for pick in index::sample(&mut rng, c - 1, r_extra) {
                set.push(if pick >= y { pick + 1 } else { pick });
            }
        }
        candidates.push(set);
        truth.push(y);
    }
    Dataset::new(features, candidates, Some(truth), c)
}

pub const NUM_FOLDS: usize = 5;

/// Assignment of every example to one of five folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    /// Fold id in `1..=5` per example.
    pub folds: Vec<usize>,
    pub seed: u64,
}

impl SplitPlan {
    /// Indices held out for testing in `fold` (1-based).
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] == fold)
            .collect()
    }

    /// Indices used for training when `fold` (1-based) is held out.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] != fold)
            .collect()
    }
}

/// Stratified five-fold split keyed on ground truth.
///
/// Each class is shuffled and dealt round-robin over the folds, continuing
/// from where the previous class stopped, so every fold holds either the
/// floor or the ceiling of `n_class / 5` members of each class.
pub fn plan_splits(ds: &Dataset, seed: u64) -> Result<SplitPlan> {
    let truth = ds
        .truth()
        .ok_or(Error::MissingTruth("stratified splitting"))?;
    let mut by_class = vec![Vec::new(); ds.c()];
    for (i, &y) in truth.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; ds.n()];
    let mut offset = 0;
    for (class, members) in by_class.iter_mut().enumerate() {
        if !members.is_empty() && members.len() < NUM_FOLDS {
            log::warn!(
                "class {} has only {} examples; some folds will not contain it",
                class + 1,
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for (r, &i) in members.iter().enumerate() {
            folds[i] = (offset + r) % NUM_FOLDS + 1;
        }
        offset = (offset + members.len()) % NUM_FOLDS;
    }
    Ok(SplitPlan { folds, seed })
}
