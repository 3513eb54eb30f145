//! Edge-weight Hessians of resistance distance and Kirchhoff index.
//!
//! With `L₁ = Σ_k d_k g_k g_kᵀ` the quadratic forms are
//!
//! ```text
//! dᵀ∇²R_ij d = 2 (L†L₁L†L₁L†)^{(i,j)}
//! dᵀ∇²Kf  d = 2n tr((L†)²L₁L†L₁)
//! ```
//!
//! and expanding bilinearly in `d` gives per-entry closed forms
//! `H_kl = 2 α_k α_l β_kl` (resistance) and `H_kl = 2n β_kl β̂_kl`
//! (Kirchhoff), where `α_k = g_kᵀL†b`, `β_kl = g_kᵀL†g_l` and
//! `β̂_kl = g_kᵀ(L†)²g_l`.
//!
//! The finite-difference oracle recomputes the scalar target from scratch at
//! every probe using `L† = (L + J/n)⁻¹ − J/n` (LU inverse), so it shares no
//! code path with the eigendecomposition used everywhere else.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{build_l1, build_laplacian, pair_vector, Perturbation, WeightedGraph};
use crate::par::{upper_pairs, Execution};
use crate::resistance::contraction;
use crate::spectral::{eig_sym, GraphContext};
use crate::{RealMatrix, RealVector};

/// Scalar function of the edge weights being differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Resistance distance between two 0-based vertices.
    Resistance {
        i: usize,
        j: usize,
    },
    Kirchhoff,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Resistance { i, j } => write!(f, "resistance({}, {})", i + 1, j + 1),
            Target::Kirchhoff => write!(f, "kirchhoff"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Per-entry closed forms from cached `L†g_k` vectors.
    #[default]
    ClosedForm,
    /// Quadratic-form probes along `e_k` and `e_k + e_l`.
    Polarization,
}

/// Symmetric `m × m` Hessian with respect to the edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianMatrix {
    pub target: Target,
    pub matrix: RealMatrix,
}

impl HessianMatrix {
    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(μ_min, μ_max)`.
    pub fn extreme_eigs(&self) -> Result<(f64, f64)> {
        hessian_extreme_eigs(self)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &HessianMatrix) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }
}

fn check_target(ctx: &GraphContext, target: Target) -> Result<()> {
    if let Target::Resistance { i, j } = target {
        ctx.check_vertex(i)?;
        ctx.check_vertex(j)?;
    }
    Ok(())
}

fn direction(ctx: &GraphContext, d: &[f64]) -> Result<RealMatrix> {
    build_l1(ctx.graph(), &Perturbation::new(d.to_vec()))
}

/// `dᵀ∇²R_ij d`. The direction is unconstrained in sign and magnitude.
pub fn quad_form_resistance(ctx: &GraphContext, i: usize, j: usize, d: &[f64]) -> Result<f64> {
    ctx.check_vertex(i)?;
    ctx.check_vertex(j)?;
    let l1 = direction(ctx, d)?;
    if i == j {
        return Ok(0.0);
    }
    let pinv = ctx.pinv();
    let w = &l1 * (pinv * pair_vector(ctx.n(), i, j));
    Ok(2.0 * w.dot(&(pinv * &w)))
}

/// `dᵀ∇²Kf d`.
pub fn quad_form_kirchhoff(ctx: &GraphContext, d: &[f64]) -> Result<f64> {
    let l1 = direction(ctx, d)?;
    let pinv = ctx.pinv();
    let p = pinv * &l1;
    Ok(2.0 * ctx.n() as f64 * (pinv * &p * &p).trace())
}

pub fn quad_form(ctx: &GraphContext, target: Target, d: &[f64]) -> Result<f64> {
    match target {
        Target::Resistance { i, j } => quad_form_resistance(ctx, i, j, d),
        Target::Kirchhoff => quad_form_kirchhoff(ctx, d),
    }
}

/// Vectors reused by the gradient and closed-form Hessian.
struct EdgeCache {
    edges: Vec<(usize, usize)>,
    /// Column k is `L†g_k`.
    pinv_g: RealMatrix,
}

impl EdgeCache {
    fn new(ctx: &GraphContext) -> Self {
        let edges = ctx.graph().edges().to_vec();
        let pinv = ctx.pinv();
        let pinv_g = RealMatrix::from_fn(ctx.n(), edges.len(), |r, k| {
            let (u, v) = edges[k];
            pinv[(r, u)] - pinv[(r, v)]
        });
        EdgeCache { edges, pinv_g }
    }

    /// `g_kᵀ y`.
    fn incidence_dot(&self, k: usize, y: &RealVector) -> f64 {
        let (u, v) = self.edges[k];
        y[u] - y[v]
    }

    /// `β_kl = g_kᵀL†g_l`.
    fn beta(&self, k: usize, l: usize) -> f64 {
        let (u, v) = self.edges[k];
        self.pinv_g[(u, l)] - self.pinv_g[(v, l)]
    }

    /// `β̂_kl = g_kᵀ(L†)²g_l`.
    fn beta_hat(&self, k: usize, l: usize) -> f64 {
        self.pinv_g.column(k).dot(&self.pinv_g.column(l))
    }

    fn alphas(&self, ctx: &GraphContext, i: usize, j: usize) -> Vec<f64> {
        let y = ctx.pinv() * pair_vector(ctx.n(), i, j);
        (0..self.edges.len()).map(|k| self.incidence_dot(k, &y)).collect()
    }
}

/// `∂R_ij/∂x_k = −(g_kᵀL†b)²`.
pub fn gradient_resistance(ctx: &GraphContext, i: usize, j: usize) -> Result<Vec<f64>> {
    ctx.check_vertex(i)?;
    ctx.check_vertex(j)?;
    if i == j {
        return Ok(vec![0.0; ctx.m()]);
    }
    Ok(EdgeCache::new(ctx).alphas(ctx, i, j).into_iter().map(|a| -a * a).collect())
}

/// `∂Kf/∂x_k = −n·g_kᵀ(L†)²g_k`.
pub fn gradient_kirchhoff(ctx: &GraphContext) -> Vec<f64> {
    let cache = EdgeCache::new(ctx);
    let n = ctx.n() as f64;
    (0..ctx.m()).map(|k| -n * cache.beta_hat(k, k)).collect()
}

pub fn gradient(ctx: &GraphContext, target: Target) -> Result<Vec<f64>> {
    match target {
        Target::Resistance { i, j } => gradient_resistance(ctx, i, j),
        Target::Kirchhoff => Ok(gradient_kirchhoff(ctx)),
    }
}

/// Assembles the Hessian with the default execution mode.
pub fn assemble_hessian(ctx: &GraphContext, target: Target, method: Method) -> Result<HessianMatrix> {
    assemble_hessian_with(ctx, target, method, Execution::default())
}

pub fn assemble_hessian_with(
    ctx: &GraphContext,
    target: Target,
    method: Method,
    exec: Execution,
) -> Result<HessianMatrix> {
    check_target(ctx, target)?;
    let m = ctx.m();
    let pairs = upper_pairs(m);
    let values = match method {
        Method::ClosedForm => closed_form_entries(ctx, target, &pairs, exec),
        Method::Polarization => polarization_entries(ctx, target, &pairs, exec)?,
    };
    Ok(HessianMatrix { target, matrix: fill_symmetric(m, &pairs, &values) })
}

fn fill_symmetric(m: usize, pairs: &[(usize, usize)], values: &[f64]) -> RealMatrix {
    let mut h = RealMatrix::zeros(m, m);
    for (&(k, l), &v) in pairs.iter().zip(values) {
        h[(k, l)] = v;
        h[(l, k)] = v;
    }
    h
}

fn closed_form_entries(ctx: &GraphContext, target: Target, pairs: &[(usize, usize)], exec: Execution) -> Vec<f64> {
    let cache = EdgeCache::new(ctx);
    match target {
        Target::Resistance { i, j } if i == j => vec![0.0; pairs.len()],
        Target::Resistance { i, j } => {
            let alpha = cache.alphas(ctx, i, j);
            exec.map(pairs.len(), |p| {
                let (k, l) = pairs[p];
                2.0 * alpha[k] * alpha[l] * cache.beta(k, l)
            })
        }
        Target::Kirchhoff => {
            let n = ctx.n() as f64;
            exec.map(pairs.len(), |p| {
                let (k, l) = pairs[p];
                2.0 * n * cache.beta(k, l) * cache.beta_hat(k, l)
            })
        }
    }
}

fn polarization_entries(
    ctx: &GraphContext,
    target: Target,
    pairs: &[(usize, usize)],
    exec: Execution,
) -> Result<Vec<f64>> {
    let m = ctx.m();
    let probe = |dirs: &[usize]| {
        let mut d = vec![0.0; m];
        for &k in dirs {
            d[k] += 1.0;
        }
        quad_form(ctx, target, &d)
    };
    let diag = exec.try_map(m, |k| probe(&[k]))?;
    exec.try_map(pairs.len(), |p| {
        let (k, l) = pairs[p];
        if k == l {
            Ok(diag[k])
        } else {
            Ok(0.5 * (probe(&[k, l])? - diag[k] - diag[l]))
        }
    })
}

/// `(μ_min, μ_max)` of a Hessian; `(0, 0)` for an empty one.
pub fn hessian_extreme_eigs(h: &HessianMatrix) -> Result<(f64, f64)> {
    if h.order() == 0 {
        return Ok((0.0, 0.0));
    }
    let d = eig_sym(&h.matrix)?;
    Ok((d.smallest(), d.largest()))
}

/// `1e-4 · max(1, min x)`, clamped below `min x / 4`.
pub fn default_fd_step(g: &WeightedGraph) -> f64 {
    clamp_step(g, 1e-4 * g.min_weight().max(1.0))
}

fn clamp_step(g: &WeightedGraph, h: f64) -> f64 {
    let cap = 0.25 * g.min_weight();
    if h < cap {
        h
    } else {
        0.5 * cap
    }
}

/// Evaluates the target from scratch via `L† = (L + J/n)⁻¹ − J/n`.
pub fn evaluate_target(g: &WeightedGraph, target: Target) -> Result<f64> {
    let n = g.vertex_count();
    if let Target::Resistance { i, j } = target {
        for v in [i, j] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v + 1, n });
            }
        }
    }
    let jn = RealMatrix::from_element(n, n, 1.0 / n as f64);
    let shifted = build_laplacian(g) + &jn;
    let inv = shifted.try_inverse().ok_or(Error::NotConnected { connectivity: 0.0, tolerance: 0.0 })?;
    let pinv = inv - jn;
    Ok(match target {
        Target::Resistance { i, j } if i == j => 0.0,
        Target::Resistance { i, j } => contraction(&pinv, i, j),
        Target::Kirchhoff => n as f64 * pinv.trace(),
    })
}

/// Central-difference Hessian oracle:
/// `H_kl ≈ [f(x+he_k+he_l) − f(x+he_k−he_l) − f(x−he_k+he_l) + f(x−he_k−he_l)] / 4h²`.
///
/// `step` defaults to [`default_fd_step`] and is clamped below `min x / 4`.
pub fn fd_hessian_oracle(g: &WeightedGraph, target: Target, step: Option<f64>) -> Result<HessianMatrix> {
    fd_hessian_oracle_with(g, target, step, Execution::default())
}

pub fn fd_hessian_oracle_with(
    g: &WeightedGraph,
    target: Target,
    step: Option<f64>,
    exec: Execution,
) -> Result<HessianMatrix> {
    let ctx = GraphContext::new(g)?;
    check_target(&ctx, target)?;
    let h = match step {
        Some(h) if h > 0.0 && h.is_finite() => clamp_step(g, h),
        Some(h) => return Err(Error::InvalidParameter(format!("finite-difference step {h} must be positive"))),
        None => default_fd_step(g),
    };
    let x = g.weights();
    let m = g.edge_count();
    let pairs = upper_pairs(m);
    let eval = |k: usize, sk: f64, l: usize, sl: f64| {
        let mut w = x.to_vec();
        w[k] += sk * h;
        w[l] += sl * h;
        evaluate_target(&g.with_weights(&w)?, target)
    };
    let values = exec.try_map(pairs.len(), |p| {
        let (k, l) = pairs[p];
        let s = eval(k, 1.0, l, 1.0)? - eval(k, 1.0, l, -1.0)? - eval(k, -1.0, l, 1.0)? + eval(k, -1.0, l, -1.0)?;
        Ok::<_, Error>(s / (4.0 * h * h))
    })?;
    Ok(HessianMatrix { target, matrix: fill_symmetric(m, &pairs, &values) })
}
