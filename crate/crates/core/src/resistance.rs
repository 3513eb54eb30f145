//! Resistance distance, Kirchhoff index and biharmonic distance, both at the
//! base weights and as hyper-dual values along a weight perturbation.
//!
//! For a hyper-dual report the slots read:
//!
//! * `re`: value at `x`
//! * `eps`, `eps_star`: directional derivative `∇fᵀΔx`
//! * `eps_eps_star`: Hessian quadratic form `Δxᵀ∇²f Δx`

use crate::error::Result;
use crate::graph::{build_l1, pair_vector, Perturbation};
use crate::hd_laplacian::{hd_pinv_laplacian, HDMatrix};
use crate::hyperdual::HyperDual;
use crate::spectral::GraphContext;
use crate::RealMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistanceReport {
    /// 0-based vertex pair.
    pub pair: (usize, usize),
    pub value: HyperDual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirchhoffReport {
    pub value: HyperDual,
}

/// `P^{(i,j)} = Pᵢᵢ + Pⱼⱼ − Pᵢⱼ − Pⱼᵢ`.
pub fn contraction(p: &RealMatrix, i: usize, j: usize) -> f64 {
    p[(i, i)] + p[(j, j)] - p[(i, j)] - p[(j, i)]
}

/// `R_ij = (L†)^{(i,j)}`.
pub fn resistance(ctx: &GraphContext, i: usize, j: usize) -> Result<f64> {
    ctx.check_vertex(i)?;
    ctx.check_vertex(j)?;
    if i == j {
        return Ok(0.0);
    }
    Ok(contraction(ctx.pinv(), i, j))
}

/// `Kf = n·tr(L†)`.
pub fn kirchhoff(ctx: &GraphContext) -> f64 {
    ctx.n() as f64 * ctx.pinv().trace()
}

/// Biharmonic distance `((L†)²)^{(i,j)} = ‖L†(1ᵢ − 1ⱼ)‖²`.
pub fn biharmonic_distance(ctx: &GraphContext, i: usize, j: usize) -> Result<f64> {
    ctx.check_vertex(i)?;
    ctx.check_vertex(j)?;
    if i == j {
        return Ok(0.0);
    }
    let u = ctx.pinv() * pair_vector(ctx.n(), i, j);
    Ok(u.norm_squared())
}

fn perturbed_pinv(ctx: &GraphContext, p: &Perturbation) -> Result<HDMatrix> {
    ctx.graph().check_perturbation(p)?;
    hd_pinv_laplacian(ctx, &build_l1(ctx.graph(), p)?)
}

/// `R_ij(x + Δx(ε + ε*)) = (L̃†)^{(i,j)}`.
///
/// Requires `x + Δx > 0`.
pub fn hd_resistance(ctx: &GraphContext, p: &Perturbation, i: usize, j: usize) -> Result<ResistanceReport> {
    ctx.check_vertex(i)?;
    ctx.check_vertex(j)?;
    ctx.graph().check_perturbation(p)?;
    if i == j {
        return Ok(ResistanceReport { pair: (i, j), value: HyperDual::ZERO });
    }
    let x = perturbed_pinv(ctx, p)?;
    Ok(ResistanceReport { pair: (i, j), value: x.contraction(i, j) })
}

/// Hyper-dual resistances for every pair `i < j`, sharing one `L̃†`.
pub fn hd_resistance_all(ctx: &GraphContext, p: &Perturbation) -> Result<Vec<ResistanceReport>> {
    let x = perturbed_pinv(ctx, p)?;
    let n = ctx.n();
    Ok((0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| ResistanceReport { pair: (i, j), value: x.contraction(i, j) })
        .collect())
}

/// `Kf(x + Δx(ε + ε*)) = n·tr(L̃†)`.
pub fn hd_kirchhoff(ctx: &GraphContext, p: &Perturbation) -> Result<KirchhoffReport> {
    let x = perturbed_pinv(ctx, p)?;
    Ok(KirchhoffReport { value: x.trace().scale(ctx.n() as f64) })
}
