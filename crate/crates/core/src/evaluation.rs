//! Accuracy metrics, the five-fold cross-validation driver, parameter
//! sweeps and the Friedman rank test.

use std::io::Write;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::dataset::{parse_key_values, plan_splits, Dataset, SplitPlan, NUM_FOLDS};
use crate::error::{Error, Result};
use crate::graph::build_knn_graph;
use crate::inference::{baseline_ambiguous_knn, Predictor};
use crate::labelspace::LabelCodec;
use crate::solver::{alm_fit, SolverConfig, SolverReport};

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Disambiguation accuracy on the training examples.
pub fn training_accuracy(report: &SolverReport, truth: Option<&[usize]>) -> Result<f64> {
    let truth = truth.ok_or(Error::MissingTruth("training accuracy"))?;
    accuracy(&report.labels, truth)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    /// 1-based fold id.
    pub fold: usize,
    pub train_acc: f64,
    pub test_acc: f64,
    /// Test accuracy of the ambiguous-label kNN baseline on the same split.
    pub baseline_test_acc: f64,
    pub converged: bool,
    pub loops_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub mean_train: f64,
    pub std_train: f64,
    pub mean_test: f64,
    pub std_test: f64,
    pub mean_baseline_test: f64,
    pub config: SolverConfig,
    pub seed: u64,
}

impl CvResult {
    fn from_folds(folds: Vec<FoldResult>, config: SolverConfig, seed: u64) -> Self {
        let train: Vec<f64> = folds.iter().map(|f| f.train_acc).collect();
        let test: Vec<f64> = folds.iter().map(|f| f.test_acc).collect();
        let base: Vec<f64> = folds.iter().map(|f| f.baseline_test_acc).collect();
        let (mean_train, std_train) = mean_std(&train);
        let (mean_test, std_test) = mean_std(&test);
        Self {
            folds,
            mean_train,
            std_train,
            mean_test,
            std_test,
            mean_baseline_test: mean_std(&base).0,
            config,
            seed,
        }
    }

    /// `fold,train_acc,test_acc`, one row per fold.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "fold,train_acc,test_acc")?;
        for f in &self.folds {
            writeln!(out, "{},{},{}", f.fold, f.train_acc, f.test_acc)?;
        }
        Ok(())
    }

    /// `fold,test_acc` of the ambiguous-label baseline.
    pub fn write_baseline_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "fold,test_acc")?;
        for f in &self.folds {
            writeln!(out, "{},{}", f.fold, f.baseline_test_acc)?;
        }
        Ok(())
    }
}

/// Trains on every fold but one and tests on the held-out fold.
pub fn evaluate_fold(
    ds: &Dataset,
    plan: &SplitPlan,
    fold: usize,
    cfg: &SolverConfig,
) -> Result<FoldResult> {
    let train = ds.subset(&plan.train_indices(fold));
    let test = ds.subset(&plan.test_indices(fold));
    let truth_train = train
        .truth()
        .ok_or(Error::MissingTruth("cross validation"))?;
    let truth_test = test
        .truth()
        .ok_or(Error::MissingTruth("cross validation"))?;

    let graph = build_knn_graph(&train, cfg.k, cfg.theta)?;
    let codec = LabelCodec::encode(&train);
    let report = alm_fit(&graph, &codec, cfg)?;
    let train_acc = accuracy(&report.labels, truth_train)?;

    let predictor = Predictor::new(
        train.features().clone(),
        report.onehot.clone(),
        cfg.k,
        graph.theta(),
    )?;
    let predicted: Vec<usize> = predictor
        .predict_batch(test.features())?
        .into_iter()
        .map(|p| p.label)
        .collect();
    let test_acc = accuracy(&predicted, truth_test)?;

    let baseline: Vec<usize> = test
        .features()
        .rows()
        .into_iter()
        .map(|x| baseline_ambiguous_knn(&train, x, cfg.k, graph.theta()).map(|p| p.label))
        .collect::<Result<_>>()?;
    let baseline_test_acc = accuracy(&baseline, truth_test)?;

    Ok(FoldResult {
        fold,
        train_acc,
        test_acc,
        baseline_test_acc,
        converged: report.converged,
        loops_used: report.loops_used,
    })
}

/// Stratified five-fold cross validation with splits drawn from `seed`.
pub fn cross_validate(ds: &Dataset, cfg: &SolverConfig, seed: u64) -> Result<CvResult> {
    let plan = plan_splits(ds, seed)?;
    cross_validate_with_plan(ds, cfg, &plan, false)
}

/// Cross validation over a given split plan. With `parallel`, folds run
/// concurrently; results are identical either way.
pub fn cross_validate_with_plan(
    ds: &Dataset,
    cfg: &SolverConfig,
    plan: &SplitPlan,
    parallel: bool,
) -> Result<CvResult> {
    cfg.validate()?;
    let run = |fold: usize| {
        evaluate_fold(ds, plan, fold, cfg).map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })
    };
    let folds: Result<Vec<FoldResult>> = if parallel {
        (1..=NUM_FOLDS).into_par_iter().map(run).collect()
    } else {
        (1..=NUM_FOLDS).map(run).collect()
    };
    Ok(CvResult::from_folds(folds?, cfg.clone(), plan.seed))
}

/// Parameter grid; the sweep visits the Cartesian product in
/// alpha-major, then beta, then K order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub k: Vec<usize>,
}

impl SweepGrid {
    /// Single-point grid at the values of `cfg`.
    pub fn at(cfg: &SolverConfig) -> Self {
        Self {
            alpha: vec![cfg.alpha],
            beta: vec![cfg.beta],
            k: vec![cfg.k],
        }
    }

    /// Parses `alpha=..`, `beta=..`, `K=..` lines holding comma-separated
    /// values; missing keys fall back to `cfg`.
    pub fn parse(text: &str, cfg: &SolverConfig) -> Result<Self> {
        let kv = parse_key_values(text, "grid")?;
        let mut grid = Self::at(cfg);
        for (key, value) in &kv {
            match key.to_ascii_lowercase().as_str() {
                "alpha" => grid.alpha = parse_list(key, value)?,
                "beta" => grid.beta = parse_list(key, value)?,
                "k" => grid.k = parse_list(key, value)?,
                _ => return Err(Error::Config(format!("unknown grid key {key:?}"))),
            }
        }
        if grid.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len() * self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.alpha {
            for &b in &self.beta {
                for &k in &self.k {
                    out.push((a, b, k));
                }
            }
        }
        out
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {s:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub k: usize,
    pub result: CvResult,
}

pub const SWEEP_HEADER: &str = "alpha,beta,K,mean_train,std_train,mean_test,std_test";

/// Cross-validates every grid point on the same split plan.
pub fn sweep(
    ds: &Dataset,
    base: &SolverConfig,
    grid: &SweepGrid,
    seed: u64,
    parallel: bool,
) -> Result<Vec<SweepRow>> {
    let plan = plan_splits(ds, seed)?;
    let run = |&(alpha, beta, k): &(f64, f64, usize)| -> Result<SweepRow> {
        let cfg = SolverConfig {
            alpha,
            beta,
            k,
            ..base.clone()
        };
        Ok(SweepRow {
            alpha,
            beta,
            k,
            result: cross_validate_with_plan(ds, &cfg, &plan, false)?,
        })
    };
    let points = grid.points();
    if parallel {
        points.par_iter().map(run).collect()
    } else {
        points.iter().map(run).collect()
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        let c = &r.result;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.alpha, r.beta, r.k, c.mean_train, c.std_train, c.mean_test, c.std_test
        )?;
    }
    Ok(())
}

/// Ranks of one block: 1 for the highest accuracy, ties get average ranks.
pub fn rank_descending(values: ArrayView1<f64>) -> Vec<f64> {
    let k = values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; k];
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end share ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &m in &order[start..end] {
            ranks[m] = avg;
        }
        start = end;
    }
    ranks
}

/// Friedman chi-square statistic of a methods x datasets table, with
/// `12N / (k(k+1)) * (sum_j R_j^2 - k(k+1)^2 / 4)` over mean ranks `R_j`.
/// Returns the statistic and the mean ranks.
pub fn friedman_statistic(table: &Array2<f64>) -> Result<(f64, Vec<f64>)> {
    let (k, n) = table.dim();
    if k < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "Friedman test needs at least 2 methods and 2 datasets, got {k}x{n}"
        )));
    }
    if table.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "accuracy table has non-finite entries".into(),
        ));
    }
    let mut rank_sums = vec![0.0; k];
    for col in table.columns() {
        for (m, r) in rank_descending(col).into_iter().enumerate() {
            rank_sums[m] += r;
        }
    }
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n as f64).collect();
    let kf = k as f64;
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let stat = 12.0 * n as f64 / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0);
    // exact ties can leave a tiny negative residue
    Ok((stat.max(0.0), mean_ranks))
}

/// Outcome of comparing the reference method (row 0) with one other method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseOutcome {
    pub statistic: f64,
    pub reject: bool,
    /// True when the reference has the better (lower) mean rank.
    pub reference_better: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanOutcome {
    pub statistic: f64,
    pub df: usize,
    pub critical_value: f64,
    /// Omnibus rejection of "all methods perform alike".
    pub reject: bool,
    pub mean_ranks: Vec<f64>,
    /// Per-method flags from two-method tests against row 0; entry 0 is
    /// always false.
    pub reject_per_method: Vec<bool>,
    pub pairwise: Vec<Option<PairwiseOutcome>>,
}

/// Friedman test over a methods x datasets accuracy table at `confidence`.
pub fn friedman_test(table: &Array2<f64>, confidence: f64) -> Result<FriedmanOutcome> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} outside (0,1)"
        )));
    }
    let (statistic, mean_ranks) = friedman_statistic(table)?;
    let k = table.nrows();
    let df = k - 1;
    let critical_value = chi_square_quantile(confidence, df);

    let pair_critical = chi_square_quantile(confidence, 1);
    let mut pairwise = vec![None];
    for m in 1..k {
        let pair = ndarray::stack(ndarray::Axis(0), &[table.row(0), table.row(m)])
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        let (stat, ranks) = friedman_statistic(&pair)?;
        pairwise.push(Some(PairwiseOutcome {
            statistic: stat,
            reject: stat > pair_critical,
            reference_better: ranks[0] < ranks[1],
        }));
    }
    Ok(FriedmanOutcome {
        statistic,
        df,
        critical_value,
        reject: statistic > critical_value,
        mean_ranks,
        reject_per_method: pairwise
            .iter()
            .map(|p| p.is_some_and(|p| p.reject))
            .collect(),
        pairwise,
    })
}

/// Upper quantiles of the chi-square distribution at 0.90, df = 1..=20.
const CHI2_90: [f64; 20] = [
    2.705543454095404,
    4.605170185988091,
    6.251388631170325,
    7.779440339734858,
    9.236356899781123,
    10.64464067566842,
    12.01703662141876,
    13.36156613651173,
    14.68365657300928,
    15.98717924681969,
    17.27500852257460,
    18.54934778670325,
    19.81192930712756,
    21.06414421460871,
    22.30712958399133,
    23.54182892689069,
    24.76903534390146,
    25.98942308263721,
    27.20357102935683,
    28.41198058430563,
];

/// Chi-square quantile: tabulated for 90% with df <= 20, otherwise the
/// Wilson-Hilferty cube approximation.
pub fn chi_square_quantile(p: f64, df: usize) -> f64 {
    if (p - 0.90).abs() < 1e-12 && (1..=20).contains(&df) {
        return CHI2_90[df - 1];
    }
    let v = df as f64;
    let z = normal_quantile(p);
    let a = 2.0 / (9.0 * v);
    v * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Inverse standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const LOW: f64 = 0.02425;
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p < LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Parses a methods x datasets table: one method per line, values separated
/// by commas, tabs or spaces, with an optional leading method name and an
/// optional header line.
pub fn parse_accuracy_table(text: &str) -> Result<(Vec<String>, Array2<f64>)> {
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        // A first line with no numeric values is a header of dataset names.
        if names.is_empty() && tokens.iter().all(|t| t.parse::<f64>().is_err()) {
            continue;
        }
        let name = match tokens.first() {
            Some(t) if t.parse::<f64>().is_err() => {
                let n = t.to_string();
                tokens.remove(0);
                n
            }
            _ => format!("method_{}", names.len() + 1),
        };
        let row: Vec<f64> = tokens
            .iter()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::parse("table", line_no + 1, format!("invalid value {t:?}")))
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::DimensionMismatch(format!(
                    "table line {} has {} values, expected {w}",
                    line_no + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        names.push(name);
        values.extend(row);
    }
    let table = Array2::from_shape_vec((names.len(), width.unwrap_or(0)), values)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    Ok((names, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{make_synthetic, SyntheticSpec};
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn accuracy_counts() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0], &[0, 1]).unwrap(), 0.0);
        let truth = [0; 10];
        let pred = [0, 0, 0, 0, 0, 0, 0, 1, 1, 1];
        assert_eq!(accuracy(&pred, &truth).unwrap(), 0.7);
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(
            rank_descending(array![0.9, 0.5, 0.9, 0.1].view()),
            vec![1.5, 3.0, 1.5, 4.0]
        );
    }

    #[test]
    fn friedman_all_tied_is_zero() {
        let out = friedman_test(&Array2::from_elem((3, 4), 0.7), 0.90).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.reject);
        assert!(out.reject_per_method.iter().all(|r| !r));
    }

    #[test]
    fn friedman_two_methods_three_datasets() {
        // method 0 wins on datasets 1 and 3: mean ranks 4/3 and 5/3
        let t = array![[0.9, 0.2, 0.8], [0.5, 0.6, 0.7]];
        let (stat, ranks) = friedman_statistic(&t).unwrap();
        assert_eq!(ranks, vec![4.0 / 3.0, 5.0 / 3.0]);
        // 2N (R1^2 + R2^2 - 9/2) = 6 (16/9 + 25/9 - 9/2) = 1/3
        assert!((stat - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn friedman_one_method_always_best() {
        let t = array![
            [0.9, 0.8, 0.95, 0.7],
            [0.6, 0.5, 0.7, 0.4],
            [0.5, 0.6, 0.6, 0.5]
        ];
        let out = friedman_test(&t, 0.90).unwrap();
        // ranks: method0 = 1,1,1,1; method1 = 2,3,2,3; method2 = 3,2,3,2
        assert_eq!(out.mean_ranks, vec![1.0, 2.5, 2.5]);
        let expect = 12.0 * 4.0 / 12.0 * (1.0 + 6.25 + 6.25 - 3.0 * 16.0 / 4.0);
        assert!((out.statistic - expect).abs() < 1e-10);
        assert_eq!(out.critical_value, CHI2_90[1]);
        assert!(out.reject);
        // pairwise k=2, N=4, reference always first: 2*4*(1 + 4 - 4.5) = 4
        let p = out.pairwise[1].unwrap();
        assert!((p.statistic - 4.0).abs() < 1e-12);
        assert!(p.reference_better && p.reject);
        assert_eq!(out.reject_per_method, vec![false, true, true]);
    }

    #[test]
    fn friedman_rejects_small_tables() {
        assert!(friedman_test(&array![[0.1, 0.2]], 0.9).is_err());
        assert!(friedman_test(&array![[0.1], [0.2]], 0.9).is_err());
        assert!(friedman_test(&array![[0.1, 0.2], [0.3, 0.4]], 1.5).is_err());
    }

    #[test]
    fn chi_square_approximation_is_close_to_table() {
        for df in 5..=20 {
            let approx = {
                let v = df as f64;
                let a = 2.0 / (9.0 * v);
                v * (1.0 - a + normal_quantile(0.9) * a.sqrt()).powi(3)
            };
            assert!((approx - CHI2_90[df - 1]).abs() / CHI2_90[df - 1] < 5e-3);
        }
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-8);
        assert!((normal_quantile(0.01) + 2.326347874040841).abs() < 1e-8);
    }

    #[test]
    fn parses_tables_with_names() {
        let (names, t) = parse_accuracy_table("# c\nours, 0.9, 0.8\n0.5\t0.4\n").unwrap();
        assert_eq!(names, vec!["ours".to_string(), "method_2".to_string()]);
        assert_eq!(t, array![[0.9, 0.8], [0.5, 0.4]]);
        assert!(parse_accuracy_table("1 2\n3\n").is_err());
        let (names, t) = parse_accuracy_table("method,d1,d2\nA,0.9,0.8\nB,0.7,0.6\n").unwrap();
        assert_eq!(names, vec!["A", "B"]);
        assert_eq!(t.dim(), (2, 2));
    }

    #[test]
    fn grid_parsing() {
        let cfg = SolverConfig::default();
        let g = SweepGrid::parse("alpha=1,10,100\nK=3\n", &cfg).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.beta, vec![cfg.beta]);
        assert!(SweepGrid::parse("gamma=1", &cfg).is_err());
    }

    #[test]
    fn cross_validation_is_deterministic_and_consistent() {
        let ds = make_synthetic(&SyntheticSpec {
            n: 100,
            ..Default::default()
        })
        .unwrap();
        let cfg = SolverConfig {
            loop_max: 10,
            ..Default::default()
        };
        let a = cross_validate(&ds, &cfg, 3).unwrap();
        let b = cross_validate_with_plan(&ds, &cfg, &plan_splits(&ds, 3).unwrap(), true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.folds.len(), NUM_FOLDS);
        let train: Vec<f64> = a.folds.iter().map(|f| f.train_acc).collect();
        let test: Vec<f64> = a.folds.iter().map(|f| f.test_acc).collect();
        assert!((train.iter().sum::<f64>() / 5.0 - a.mean_train).abs() < 1e-12);
        assert!((test.iter().sum::<f64>() / 5.0 - a.mean_test).abs() < 1e-12);
        for f in &a.folds {
            assert!((0.0..=1.0).contains(&f.train_acc) && (0.0..=1.0).contains(&f.test_acc));
        }
    }

    #[test]
    fn separable_unambiguous_data_is_perfect() {
        let ds = make_synthetic(&SyntheticSpec {
            n: 60,
            sep: 30.0,
            p_coocc: 0.0,
            ..Default::default()
        })
        .unwrap();
        let cv = cross_validate(&ds, &SolverConfig::default(), 1).unwrap();
        assert_eq!(cv.mean_test, 1.0);
        assert_eq!(cv.mean_train, 1.0);
    }

    #[test]
    fn singleton_sweep_equals_cross_validation() {
        let ds = make_synthetic(&SyntheticSpec {
            n: 60,
            ..Default::default()
        })
        .unwrap();
        let cfg = SolverConfig {
            loop_max: 5,
            ..Default::default()
        };
        let rows = sweep(&ds, &cfg, &SweepGrid::at(&cfg), 4, false).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].result, cross_validate(&ds, &cfg, 4).unwrap());

        let grid = SweepGrid {
            alpha: vec![cfg.alpha],
            beta: vec![0.0, 0.01, 0.1],
            k: vec![cfg.k],
        };
        let rows = sweep(&ds, &cfg, &grid, 4, true).unwrap();
        assert_eq!(rows.len(), 3);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    proptest! {
        #[test]
        fn friedman_invariant_under_monotone_maps(
            vals in prop::collection::vec(0.0f64..1.0, 12)
        ) {
            let t = Array2::from_shape_vec((3, 4), vals).unwrap();
            let mapped = t.mapv(|v| (3.0 * v).exp() + 2.0);
            let a = friedman_statistic(&t).unwrap();
            let b = friedman_statistic(&mapped).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
