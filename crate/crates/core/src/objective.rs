//! The constrained disambiguation objective, its augmented Lagrangian and
//! the gradient of the CCCP surrogate.
//!
//! With smoothness `tr(F'LF)`, fidelity `alpha |H o (F - Y)|^2` and the
//! discrimination term `-beta |F|^2`, the augmented Lagrangian splits as
//! `J1(F) - J2(F)` with `J2(F) = beta |F|^2`. Both parts are convex, and the
//! surrogate replaces `J2` by its tangent at the linearization point `F_t`.

use ndarray::{Array1, Array2, Axis, Zip};

use crate::error::{Error, Result};
use crate::graph::KnnGraph;
use crate::labelspace::LabelCodec;

/// Trade-off weights of the fidelity and discrimination terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ObjectiveParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha={alpha} and beta={beta} must be finite and nonnegative"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

/// Primal iterate with the multipliers of the nonnegativity (`lambda1`,
/// `n x c`) and row-normalization (`lambda2`, length `n`) constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmState {
    pub f: Array2<f64>,
    pub lambda1: Array2<f64>,
    pub lambda2: Array1<f64>,
    pub sigma: f64,
}

impl AlmState {
    /// `F = init`, zero multipliers.
    pub fn new(init: Array2<f64>, sigma: f64) -> Self {
        let (n, c) = init.dim();
        Self {
            f: init,
            lambda1: Array2::zeros((n, c)),
            lambda2: Array1::zeros(n),
            sigma,
        }
    }
}

fn check_dims(f: &Array2<f64>, graph: &KnnGraph, codec: &LabelCodec) -> Result<()> {
    if f.nrows() != graph.n() || f.dim() != codec.y().dim() {
        return Err(Error::DimensionMismatch(format!(
            "F is {:?}, graph has {} nodes, Y is {:?}",
            f.dim(),
            graph.n(),
            codec.y().dim()
        )));
    }
    Ok(())
}

fn check_state(state: &AlmState, f: &Array2<f64>) -> Result<()> {
    if state.lambda1.dim() != f.dim() || state.lambda2.len() != f.nrows() {
        return Err(Error::DimensionMismatch(
            "multipliers do not match F".into(),
        ));
    }
    Ok(())
}

/// `tr(F' L F)`.
pub fn smoothness(f: &Array2<f64>, graph: &KnnGraph) -> f64 {
    (f * &graph.laplacian_apply(f)).sum()
}

/// `|H o (F - Y)|_F^2`, the squared mass on non-candidate labels.
pub fn fidelity(f: &Array2<f64>, codec: &LabelCodec) -> f64 {
    let mut total = 0.0;
    for ((i, j), &v) in f.indexed_iter() {
        if !codec.is_candidate(i, j) {
            let r = v - codec.y()[[i, j]];
            total += r * r;
        }
    }
    total
}

fn frobenius_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// Row sums minus one.
pub fn rowsum_residual(f: &Array2<f64>) -> Array1<f64> {
    f.sum_axis(Axis(1)) - 1.0
}

/// `tr(F'LF) + alpha |H o (F - Y)|^2 - beta |F|^2`.
pub fn primal_objective(
    f: &Array2<f64>,
    graph: &KnnGraph,
    codec: &LabelCodec,
    p: &ObjectiveParams,
) -> Result<f64> {
    check_dims(f, graph, codec)?;
    Ok(smoothness(f, graph) + p.alpha * fidelity(f, codec) - p.beta * frobenius_sq(f))
}

/// `M = max(0, lambda1 - sigma F)`, elementwise.
pub fn aux_m(f: &Array2<f64>, lambda1: &Array2<f64>, sigma: f64) -> Array2<f64> {
    Zip::from(lambda1)
        .and(f)
        .map_collect(|&l, &v| (l - sigma * v).max(0.0))
}

/// Convex part `J1` of the augmented Lagrangian at `f`, using the
/// multipliers and penalty from `state`.
pub fn convex_part(
    f: &Array2<f64>,
    state: &AlmState,
    graph: &KnnGraph,
    codec: &LabelCodec,
    p: &ObjectiveParams,
) -> Result<f64> {
    check_dims(f, graph, codec)?;
    check_state(state, f)?;
    let sigma = state.sigma;
    let m = aux_m(f, &state.lambda1, sigma);
    let resid = rowsum_residual(f);
    let nonneg = (frobenius_sq(&m) - frobenius_sq(&state.lambda1)) / (2.0 * sigma);
    let normalization = -state.lambda2.dot(&resid) + 0.5 * sigma * resid.dot(&resid);
    Ok(smoothness(f, graph) + p.alpha * fidelity(f, codec) + nonneg + normalization)
}

/// The augmented Lagrangian at `state.f`.
pub fn lagrangian(
    state: &AlmState,
    graph: &KnnGraph,
    codec: &LabelCodec,
    p: &ObjectiveParams,
) -> Result<f64> {
    Ok(convex_part(&state.f, state, graph, codec, p)? - p.beta * frobenius_sq(&state.f))
}

/// CCCP surrogate: `J1(F) - beta (|F_t|^2 + 2 <F_t, F - F_t>)`.
pub fn cccp_surrogate(
    f: &Array2<f64>,
    f_t: &Array2<f64>,
    state: &AlmState,
    graph: &KnnGraph,
    codec: &LabelCodec,
    p: &ObjectiveParams,
) -> Result<f64> {
    if f_t.dim() != f.dim() {
        return Err(Error::DimensionMismatch(
            "linearization point does not match F".into(),
        ));
    }
    let j1 = convex_part(f, state, graph, codec, p)?;
    let tangent = frobenius_sq(f_t) + 2.0 * (f_t * &(f - f_t)).sum();
    Ok(j1 - p.beta * tangent)
}

/// Gradient of the CCCP surrogate at `f`:
/// `2LF + 2 alpha H o (F - Y) - M(F) - lambda2 1' + sigma (F1 - 1) 1' - 2 beta F_t`.
pub fn cccp_gradient(
    f: &Array2<f64>,
    f_t: &Array2<f64>,
    state: &AlmState,
    graph: &KnnGraph,
    codec: &LabelCodec,
    p: &ObjectiveParams,
) -> Result<Array2<f64>> {
    check_dims(f, graph, codec)?;
    check_state(state, f)?;
    if f_t.dim() != f.dim() {
        return Err(Error::DimensionMismatch(
            "linearization point does not match F".into(),
        ));
    }
    let sigma = state.sigma;
    let mut grad = graph.laplacian_apply(f);
    grad *= 2.0;
    let resid = rowsum_residual(f);
    for ((i, j), g) in grad.indexed_iter_mut() {
        let v = f[[i, j]];
        if !codec.is_candidate(i, j) {
            *g += 2.0 * p.alpha * (v - codec.y()[[i, j]]);
        }
        let m = (state.lambda1[[i, j]] - sigma * v).max(0.0);
        *g += -m - state.lambda2[i] + sigma * resid[i] - 2.0 * p.beta * f_t[[i, j]];
    }
    Ok(grad)
}
