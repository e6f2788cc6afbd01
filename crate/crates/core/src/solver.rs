//! Augmented Lagrangian outer loop with a concave-convex inner procedure,
//! each convex subproblem minimized by gradient descent with Armijo
//! backtracking.

use std::io::Write;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::graph::{KnnGraph, Theta};
use crate::labelspace::LabelCodec;
use crate::objective::{
    cccp_gradient, cccp_surrogate, lagrangian, rowsum_residual, AlmState, ObjectiveParams,
};

/// Smallest step Armijo backtracking will try before giving up.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Neighbor count for graph construction and test-time voting.
    pub k: usize,
    pub theta: Theta,
    /// Penalty growth factor per ALM loop.
    pub rho: f64,
    pub sigma0: f64,
    pub sigma_cap: f64,
    /// CCCP iteration budget and tolerance on `|F(t) - F(t-1)|_F`.
    pub t_max: usize,
    pub eps0: f64,
    /// ALM loop budget and tolerance on `|F(loop) - F(loop-1)|_F`.
    pub loop_max: usize,
    pub eps1: f64,
    pub gd_max_iters: usize,
    /// `None` means `1e-6 * sqrt(n c)`.
    pub gd_grad_tol: Option<f64>,
    /// `None` derives the initial step from a curvature bound.
    pub tau0: Option<f64>,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1000.0,
            beta: 0.01,
            k: 5,
            theta: Theta::Auto,
            rho: 1.1,
            sigma0: 1.0,
            sigma_cap: 1e8,
            t_max: 20,
            eps0: 1e-6,
            loop_max: 40,
            eps1: 1e-4,
            gd_max_iters: 200,
            gd_grad_tol: None,
            tau0: None,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn params(&self) -> ObjectiveParams {
        ObjectiveParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        ObjectiveParams::new(self.alpha, self.beta)?;
        if !(self.rho > 1.0) {
            return bad(format!("rho={} must exceed 1", self.rho));
        }
        if !(self.sigma0 > 0.0 && self.sigma0 <= self.sigma_cap) {
            return bad(format!(
                "need 0 < sigma0 ({}) <= sigma_cap ({})",
                self.sigma0, self.sigma_cap
            ));
        }
        if !(self.eps0 > 0.0 && self.eps1 > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if matches!(self.gd_grad_tol, Some(t) if !(t > 0.0)) {
            return bad("gd_grad_tol must be positive".into());
        }
        if matches!(self.tau0, Some(t) if !(t > 0.0)) {
            return bad("tau0 must be positive".into());
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad(format!("armijo_c={} must lie in (0,1)", self.armijo_c));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad(format!(
                "backtrack_factor={} must lie in (0,1)",
                self.backtrack_factor
            ));
        }
        if self.k == 0 {
            return bad("K must be at least 1".into());
        }
        if self.t_max == 0 || self.loop_max == 0 || self.gd_max_iters == 0 {
            return bad("iteration budgets must be positive".into());
        }
        Ok(())
    }

    /// Initial GD step: `1 / (2 (2 lambda_max + 2 alpha + sigma + 2 beta))`,
    /// with `lambda_max` bounded by Gershgorin.
    pub fn initial_step(&self, graph: &KnnGraph, sigma: f64) -> f64 {
        self.tau0.unwrap_or_else(|| {
            let curvature =
                2.0 * graph.lambda_max_bound() + 2.0 * self.alpha + sigma + 2.0 * self.beta;
            1.0 / (2.0 * curvature)
        })
    }

    fn grad_tol(&self, n: usize, c: usize) -> f64 {
        self.gd_grad_tol
            .unwrap_or_else(|| 1e-6 * ((n * c) as f64).sqrt())
    }
}

/// Result of one gradient-descent run on the CCCP surrogate.
#[derive(Debug, Clone)]
pub struct GdOutcome {
    pub f: Array2<f64>,
    /// Surrogate value at the start and after every accepted step.
    pub values: Vec<f64>,
    /// Set when backtracking fell below [`MIN_STEP`].
    pub step_underflow: bool,
}

/// Minimizes the CCCP surrogate linearized at `f_t`, starting from `f_init`.
pub fn gd_minimize(
    f_init: &Array2<f64>,
    f_t: &Array2<f64>,
    state: &AlmState,
    graph: &KnnGraph,
    codec: &LabelCodec,
    cfg: &SolverConfig,
) -> Result<GdOutcome> {
    let p = cfg.params();
    let (n, c) = f_init.dim();
    let tau0 = cfg.initial_step(graph, state.sigma);
    let grad_tol = cfg.grad_tol(n, c);

    let mut f = f_init.clone();
    let mut value = cccp_surrogate(&f, f_t, state, graph, codec, &p)?;
    let mut values = vec![value];
    let mut step_underflow = false;

    'descent: for _ in 0..cfg.gd_max_iters {
        let grad = cccp_gradient(&f, f_t, state, graph, codec, &p)?;
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        if grad_sq.sqrt() <= grad_tol {
            break;
        }
        let mut tau = tau0;
        loop {
            let trial = &f - &(&grad * tau);
            let trial_value = cccp_surrogate(&trial, f_t, state, graph, codec, &p)?;
            if trial_value <= value - cfg.armijo_c * tau * grad_sq {
                f = trial;
                value = trial_value;
                values.push(value);
                break;
            }
            tau *= cfg.backtrack_factor;
            if tau < MIN_STEP {
                step_underflow = true;
                break 'descent;
            }
        }
    }
    Ok(GdOutcome {
        f,
        values,
        step_underflow,
    })
}

/// Result of the concave-convex procedure for fixed multipliers.
#[derive(Debug, Clone)]
pub struct CccpOutcome {
    pub f: Array2<f64>,
    pub iterations: usize,
    /// Augmented Lagrangian at the start and after each CCCP iteration.
    pub lagrangian_values: Vec<f64>,
    pub step_underflow: bool,
}

/// Runs CCCP from `state.f` with the multipliers and penalty in `state`.
pub fn cccp_minimize(
    state: &AlmState,
    graph: &KnnGraph,
    codec: &LabelCodec,
    cfg: &SolverConfig,
) -> Result<CccpOutcome> {
    let p = cfg.params();
    let mut probe = state.clone();
    let mut lagrangian_values = vec![lagrangian(&probe, graph, codec, &p)?];
    let mut step_underflow = false;
    let mut iterations = 0;

    while iterations < cfg.t_max {
        let f_t = probe.f.clone();
        let gd = gd_minimize(&f_t, &f_t, &probe, graph, codec, cfg)?;
        step_underflow |= gd.step_underflow;
        let delta = frobenius_distance(&gd.f, &f_t);
        probe.f = gd.f;
        lagrangian_values.push(lagrangian(&probe, graph, codec, &p)?);
        iterations += 1;
        if delta <= cfg.eps0 {
            break;
        }
    }
    if step_underflow {
        log::warn!("gradient descent step underflow; returning best iterate");
    }
    Ok(CccpOutcome {
        f: probe.f,
        iterations,
        lagrangian_values,
        step_underflow,
    })
}

pub fn frobenius_distance(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Constraint violation of a label matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    /// `max_i |sum_j F_ij - 1|`.
    pub max_rowsum_dev: f64,
    /// `min_ij F_ij`.
    pub min_entry: f64,
}

impl Feasibility {
    pub fn of(f: &Array2<f64>) -> Self {
        Self {
            max_rowsum_dev: rowsum_residual(f).iter().fold(0.0, |m, r| m.max(r.abs())),
            min_entry: f.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// One ALM loop, as written to the trace CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// 1-based loop counter.
    pub loop_idx: usize,
    pub delta_f: f64,
    /// Penalty used while updating F in this loop.
    pub sigma: f64,
    /// Augmented Lagrangian at the new F, before the multiplier update.
    pub lagrangian: f64,
    pub rowsum_resid: f64,
    pub min_entry: f64,
}

pub const TRACE_HEADER: &str = "loop,delta_f,sigma,lagrangian,rowsum_resid,min_entry";

#[derive(Debug, Clone)]
pub struct SolverReport {
    pub f_star: Array2<f64>,
    /// 0-based disambiguated class per example.
    pub labels: Vec<usize>,
    pub onehot: Array2<f64>,
    pub trace: Vec<TraceRow>,
    pub feasibility: Feasibility,
    pub loops_used: usize,
    pub converged: bool,
    /// Lagrangian values across CCCP iterations, one list per ALM loop.
    pub cccp_logs: Vec<Vec<f64>>,
    pub step_underflow: bool,
    /// Multipliers and penalty after the last loop.
    pub final_state: AlmState,
}

impl SolverReport {
    pub fn trace_rows(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in &self.trace {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.loop_idx, r.delta_f, r.sigma, r.lagrangian, r.rowsum_resid, r.min_entry
            )?;
        }
        Ok(())
    }
}

/// Row-wise argmax with ties going to the smallest index.
pub fn argmax_rows(f: &Array2<f64>) -> Vec<usize> {
    f.axis_iter(Axis(0))
        .map(|row| argmax(row.iter().copied()))
        .collect()
}

pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (j, v) in values.enumerate() {
        if v > best_value {
            best = j;
            best_value = v;
        }
    }
    best
}

pub fn onehot(labels: &[usize], classes: usize) -> Array2<f64> {
    let mut out = Array2::zeros((labels.len(), classes));
    for (i, &y) in labels.iter().enumerate() {
        out[[i, y]] = 1.0;
    }
    out
}

/// Disambiguates candidate labels starting from `F = Y`.
pub fn alm_fit(graph: &KnnGraph, codec: &LabelCodec, cfg: &SolverConfig) -> Result<SolverReport> {
    alm_fit_from(graph, codec, cfg, codec.y().clone())
}

/// Disambiguates candidate labels starting from an explicit `F`.
pub fn alm_fit_from(
    graph: &KnnGraph,
    codec: &LabelCodec,
    cfg: &SolverConfig,
    init: Array2<f64>,
) -> Result<SolverReport> {
    cfg.validate()?;
    if graph.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if graph.n() != codec.n() || init.dim() != codec.y().dim() {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} nodes, Y is {:?}, initial F is {:?}",
            graph.n(),
            codec.y().dim(),
            init.dim()
        )));
    }
    let p = cfg.params();
    let mut state = AlmState::new(init, cfg.sigma0);
    let mut trace = Vec::new();
    let mut cccp_logs = Vec::new();
    let mut step_underflow = false;
    let mut converged = false;

    for loop_idx in 1..=cfg.loop_max {
        let previous = state.f.clone();
        let inner = cccp_minimize(&state, graph, codec, cfg)?;
        step_underflow |= inner.step_underflow;
        state.f = inner.f;
        cccp_logs.push(inner.lagrangian_values);

        let value = lagrangian(&state, graph, codec, &p)?;
        if !value.is_finite() || state.f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { loop_idx });
        }
        let delta_f = frobenius_distance(&state.f, &previous);
        let feas = Feasibility::of(&state.f);
        trace.push(TraceRow {
            loop_idx,
            delta_f,
            sigma: state.sigma,
            lagrangian: value,
            rowsum_resid: feas.max_rowsum_dev,
            min_entry: feas.min_entry,
        });

        let sigma = state.sigma;
        state
            .lambda1
            .zip_mut_with(&state.f, |l, &v| *l = (*l - sigma * v).max(0.0));
        let resid = rowsum_residual(&state.f);
        state.lambda2.scaled_add(-sigma, &resid);
        state.sigma = (cfg.rho * sigma).min(cfg.sigma_cap);

        log::debug!("loop {loop_idx}: |dF|={delta_f:.3e} sigma={sigma:.3e} L={value:.6e}");
        if delta_f <= cfg.eps1 {
            converged = true;
            break;
        }
    }

    let labels = argmax_rows(&state.f);
    let onehot = onehot(&labels, codec.c());
    Ok(SolverReport {
        feasibility: Feasibility::of(&state.f),
        f_star: state.f.clone(),
        labels,
        onehot,
        loops_used: trace.len(),
        trace,
        converged,
        cccp_logs,
        step_underflow,
        final_state: state,
    })
}
