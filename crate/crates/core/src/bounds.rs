//! Eigenvalue bounds for the resistance and Kirchhoff Hessians, the
//! Frobenius-norm sandwich for `L₁`, and the strong-convexity constant of the
//! Kirchhoff index under a weight cap.
//!
//! `d_max` is always the unweighted maximum degree of the underlying graph.
//! The maximum weighted degree only enters the `λ₁ ≤ 2 d_max^w` premise check.
//!
//! The Kirchhoff lower bound `4n/λ₁³` follows from the norm chain
//! `‖L^{1/2}‖₂²‖L‖₂² = λ₁³`; an intermediate display of that derivation in the
//! literature carries `λ_{n−1}³` instead, which we treat as a misprint.

use crate::error::{Error, Result};
use crate::graph::{build_l1, Perturbation, WeightedGraph};
use crate::hessian::{assemble_hessian, Method, Target};
use crate::par::Execution;
use crate::resistance::biharmonic_distance;
use crate::spectral::{frobenius_norm, GraphContext};

/// Slack granted to every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// `μ(∇²R_ij) ≤ 4(d_max + 1)/λ_{n−1} · R̂_ij`.
pub fn resistance_eig_bound(ctx: &GraphContext, i: usize, j: usize) -> Result<f64> {
    let d = ctx.graph().max_degree() as f64;
    Ok(4.0 * (d + 1.0) / ctx.algebraic_connectivity() * biharmonic_distance(ctx, i, j)?)
}

/// Pair-independent `μ(∇²R_ij) ≤ 8(d_max + 1)/λ_{n−1}³`.
pub fn resistance_eig_bound_coarse(ctx: &GraphContext) -> f64 {
    let d = ctx.graph().max_degree() as f64;
    8.0 * (d + 1.0) / ctx.algebraic_connectivity().powi(3)
}

/// `4n/λ₁³ ≤ μ(∇²Kf) ≤ 4n(d_max + 1)/λ_{n−1}³`.
pub fn kirchhoff_eig_bounds(ctx: &GraphContext) -> (f64, f64) {
    let n = ctx.n() as f64;
    let d = ctx.graph().max_degree() as f64;
    (4.0 * n / ctx.lambda_max().powi(3), 4.0 * n * (d + 1.0) / ctx.algebraic_connectivity().powi(3))
}

/// `2‖Δx‖² ≤ ‖L₁‖_F² ≤ 2(d_max + 1)‖Δx‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSandwich {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub holds: bool,
}

pub fn l1_norm_sandwich(g: &WeightedGraph, p: &Perturbation) -> Result<NormSandwich> {
    let l1 = build_l1(g, p)?;
    let value = frobenius_norm(&l1).powi(2);
    let sq = p.norm_squared();
    let lower = 2.0 * sq;
    let upper = 2.0 * (g.max_degree() as f64 + 1.0) * sq;
    let slack = 1e-12 * (1.0 + upper);
    Ok(NormSandwich { lower, value, upper, holds: lower <= value + slack && value <= upper + slack })
}

/// `α = n / (2(n−1)³M³)` for weights capped at `M`.
pub fn strong_convexity_alpha(n: usize, weight_cap: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("strong convexity needs n >= 2, got {n}")));
    }
    if !(weight_cap > 0.0) || !weight_cap.is_finite() {
        return Err(Error::InvalidParameter(format!("weight cap {weight_cap} must be positive")));
    }
    let k = (n - 1) as f64;
    Ok(n as f64 / (2.0 * k.powi(3) * weight_cap.powi(3)))
}

/// Bound and observed spectrum of one resistance Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBound {
    /// 0-based pair, `i < j`.
    pub pair: (usize, usize),
    pub biharmonic: f64,
    pub bound: f64,
    pub observed_min: f64,
    pub observed_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub lambda_max: f64,
    pub algebraic_connectivity: f64,
    pub max_degree: usize,
    pub max_weighted_degree: f64,
    /// Pairs sorted lexicographically.
    pub pairs: Vec<PairBound>,
    pub resistance_coarse_bound: f64,
    pub kirchhoff_bounds: (f64, f64),
    pub kirchhoff_observed: (f64, f64),
    /// Cap `M` used for `α`: the largest edge weight.
    pub weight_cap: f64,
    pub strong_convexity_alpha: f64,
    pub sandwich: Option<NormSandwich>,
    /// Human-readable descriptions of every failed comparison. Expected empty.
    pub violations: Vec<String>,
}

pub fn certify(ctx: &GraphContext, p: Option<&Perturbation>) -> Result<BoundsReport> {
    certify_with(ctx, p, Execution::default())
}

pub fn certify_with(ctx: &GraphContext, p: Option<&Perturbation>, exec: Execution) -> Result<BoundsReport> {
    let g = ctx.graph();
    let n = ctx.n();
    let mut violations = Vec::new();

    let pair_list: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pairs = exec.try_map(pair_list.len(), |q| {
        let (i, j) = pair_list[q];
        let h = assemble_hessian(ctx, Target::Resistance { i, j }, Method::ClosedForm)?;
        let (observed_min, observed_max) = h.extreme_eigs()?;
        Ok::<_, Error>(PairBound {
            pair: (i, j),
            biharmonic: biharmonic_distance(ctx, i, j)?,
            bound: resistance_eig_bound(ctx, i, j)?,
            observed_min,
            observed_max,
        })
    })?;

    let coarse = resistance_eig_bound_coarse(ctx);
    for pb in &pairs {
        let (i, j) = (pb.pair.0 + 1, pb.pair.1 + 1);
        if pb.observed_max > pb.bound + BOUND_SLACK {
            violations.push(format!("resistance({i},{j}): mu_max {} exceeds bound {}", pb.observed_max, pb.bound));
        }
        if pb.observed_max > coarse + BOUND_SLACK {
            violations.push(format!("resistance({i},{j}): mu_max {} exceeds coarse bound {coarse}", pb.observed_max));
        }
        if pb.observed_min < -BOUND_SLACK {
            violations.push(format!("resistance({i},{j}): Hessian not PSD (mu_min {})", pb.observed_min));
        }
    }

    let kirchhoff_bounds = kirchhoff_eig_bounds(ctx);
    let kh = assemble_hessian(ctx, Target::Kirchhoff, Method::ClosedForm)?;
    let kirchhoff_observed = kh.extreme_eigs()?;
    if kirchhoff_observed.0 < kirchhoff_bounds.0 - BOUND_SLACK {
        violations.push(format!("kirchhoff: mu_min {} below lower bound {}", kirchhoff_observed.0, kirchhoff_bounds.0));
    }
    if kirchhoff_observed.1 > kirchhoff_bounds.1 + BOUND_SLACK {
        violations.push(format!("kirchhoff: mu_max {} above upper bound {}", kirchhoff_observed.1, kirchhoff_bounds.1));
    }

    let weight_cap = g.max_weight();
    let alpha = strong_convexity_alpha(n, weight_cap)?;
    if kirchhoff_observed.0 < alpha - 1e-12 {
        violations.push(format!("kirchhoff: mu_min {} below strong convexity constant {alpha}", kirchhoff_observed.0));
    }
    let max_weighted_degree = g.max_weighted_degree();
    if ctx.lambda_max() > 2.0 * max_weighted_degree * (1.0 + 1e-12) {
        violations
            .push(format!("lambda_1 {} exceeds twice the max weighted degree {max_weighted_degree}", ctx.lambda_max()));
    }

    let sandwich = p.map(|p| l1_norm_sandwich(g, p)).transpose()?;
    if let Some(s) = sandwich {
        if !s.holds {
            violations.push(format!("L1 norm sandwich fails: {} <= {} <= {}", s.lower, s.value, s.upper));
        }
    }

    Ok(BoundsReport {
        lambda_max: ctx.lambda_max(),
        algebraic_connectivity: ctx.algebraic_connectivity(),
        max_degree: g.max_degree(),
        max_weighted_degree,
        pairs,
        resistance_coarse_bound: coarse,
        kirchhoff_bounds,
        kirchhoff_observed,
        weight_cap,
        strong_convexity_alpha: alpha,
        sandwich,
        violations,
    })
}
