//! Hyper-dual matrices and vectors, the closed-form Moore–Penrose inverse of
//! a hyper-dual Laplacian, Penrose-equation residuals and hyper-dual linear
//! solves.
//!
//! For `L̃ = L + L₁(ε + ε*)` on a connected graph,
//!
//! ```text
//! L̃† = L† − L†L₁L†(ε + ε*) + 2L†L₁L†L₁L† εε*
//! ```
//!
//! which costs three real matrix products.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::graph::{build_l1, pair_vector, Perturbation};
use crate::hyperdual::HyperDual;
use crate::spectral::GraphContext;
use crate::{RealMatrix, RealVector};

/// Row-sum magnitude above which an `L₁` block is rejected.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Per-block residual norm below which `A·A†·b = b` counts as consistent.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// `re + eps·ε + eps_star·ε* + eps_es·εε*` with real matrix blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct HDMatrix {
    pub re: RealMatrix,
    pub eps: RealMatrix,
    pub eps_star: RealMatrix,
    pub eps_es: RealMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HDVector {
    pub re: RealVector,
    pub eps: RealVector,
    pub eps_star: RealVector,
    pub eps_es: RealVector,
}

impl HDMatrix {
    pub fn new(re: RealMatrix, eps: RealMatrix, eps_star: RealMatrix, eps_es: RealMatrix) -> Result<Self> {
        let shape = re.shape();
        for b in [&eps, &eps_star, &eps_es] {
            if b.shape() != shape {
                return Err(Error::DimensionMismatch { expected: shape.0 * shape.1, found: b.nrows() * b.ncols() });
            }
        }
        Ok(HDMatrix { re, eps, eps_star, eps_es })
    }

    pub fn from_real(re: RealMatrix) -> Self {
        let z = RealMatrix::zeros(re.nrows(), re.ncols());
        HDMatrix { re, eps: z.clone(), eps_star: z.clone(), eps_es: z }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real(RealMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_real(RealMatrix::zeros(rows, cols))
    }

    /// Hyper-dual Laplacian `L + L₁(ε + ε*)`.
    pub fn laplacian(l: RealMatrix, l1: RealMatrix) -> Self {
        let z = RealMatrix::zeros(l.nrows(), l.ncols());
        HDMatrix { re: l, eps: l1.clone(), eps_star: l1, eps_es: z }
    }

    /// Builds `L̃` for a graph context and perturbation.
    pub fn graph_laplacian(ctx: &GraphContext, p: &Perturbation) -> Result<Self> {
        Ok(Self::laplacian(ctx.laplacian().clone(), build_l1(ctx.graph(), p)?))
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.shape()
    }

    pub fn blocks(&self) -> [&RealMatrix; 4] {
        [&self.re, &self.eps, &self.eps_star, &self.eps_es]
    }

    /// Entry `(r, c)` as a hyper-dual scalar.
    pub fn entry(&self, r: usize, c: usize) -> HyperDual {
        HyperDual::new(self.re[(r, c)], self.eps[(r, c)], self.eps_star[(r, c)], self.eps_es[(r, c)])
    }

    fn map(&self, f: impl Fn(&RealMatrix) -> RealMatrix) -> Self {
        HDMatrix { re: f(&self.re), eps: f(&self.eps), eps_star: f(&self.eps_star), eps_es: f(&self.eps_es) }
    }

    pub fn transpose(&self) -> Self {
        self.map(|b| b.transpose())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|b| b * c)
    }

    /// Blockwise product induced by `ε² = (ε*)² = 0`.
    pub fn mul(&self, rhs: &HDMatrix) -> Result<HDMatrix> {
        if self.re.ncols() != rhs.re.nrows() {
            return Err(Error::DimensionMismatch { expected: self.re.ncols(), found: rhs.re.nrows() });
        }
        let (a, b) = (self, rhs);
        Ok(HDMatrix {
            re: &a.re * &b.re,
            eps: &a.re * &b.eps + &a.eps * &b.re,
            eps_star: &a.re * &b.eps_star + &a.eps_star * &b.re,
            eps_es: &a.re * &b.eps_es + &a.eps * &b.eps_star + &a.eps_star * &b.eps + &a.eps_es * &b.re,
        })
    }

    pub fn mul_vec(&self, v: &HDVector) -> Result<HDVector> {
        if self.re.ncols() != v.len() {
            return Err(Error::DimensionMismatch { expected: self.re.ncols(), found: v.len() });
        }
        let a = self;
        Ok(HDVector {
            re: &a.re * &v.re,
            eps: &a.re * &v.eps + &a.eps * &v.re,
            eps_star: &a.re * &v.eps_star + &a.eps_star * &v.re,
            eps_es: &a.re * &v.eps_es + &a.eps * &v.eps_star + &a.eps_star * &v.eps + &a.eps_es * &v.re,
        })
    }

    /// Largest Frobenius norm over the four blocks.
    pub fn max_block_norm(&self) -> f64 {
        self.blocks().iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// Hyper-dual trace.
    pub fn trace(&self) -> HyperDual {
        HyperDual::new(self.re.trace(), self.eps.trace(), self.eps_star.trace(), self.eps_es.trace())
    }

    /// Quadratic form `bᵀMb` for a real vector `b`.
    pub fn quadratic_form(&self, b: &RealVector) -> HyperDual {
        let q = |m: &RealMatrix| b.dot(&(m * b));
        HyperDual::new(q(&self.re), q(&self.eps), q(&self.eps_star), q(&self.eps_es))
    }

    /// Contraction `P^{(i,j)} = Pᵢᵢ + Pⱼⱼ − Pᵢⱼ − Pⱼᵢ`, slot by slot.
    pub fn contraction(&self, i: usize, j: usize) -> HyperDual {
        self.entry(i, i) + self.entry(j, j) - self.entry(i, j) - self.entry(j, i)
    }
}

impl Add for &HDMatrix {
    type Output = HDMatrix;
    fn add(self, rhs: &HDMatrix) -> HDMatrix {
        HDMatrix {
            re: &self.re + &rhs.re,
            eps: &self.eps + &rhs.eps,
            eps_star: &self.eps_star + &rhs.eps_star,
            eps_es: &self.eps_es + &rhs.eps_es,
        }
    }
}

impl Sub for &HDMatrix {
    type Output = HDMatrix;
    fn sub(self, rhs: &HDMatrix) -> HDMatrix {
        self + &rhs.scale(-1.0)
    }
}

impl HDVector {
    pub fn from_real(re: RealVector) -> Self {
        let z = RealVector::zeros(re.len());
        HDVector { re, eps: z.clone(), eps_star: z.clone(), eps_es: z }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_real(RealVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn get(&self, i: usize) -> HyperDual {
        HyperDual::new(self.re[i], self.eps[i], self.eps_star[i], self.eps_es[i])
    }

    pub fn blocks(&self) -> [&RealVector; 4] {
        [&self.re, &self.eps, &self.eps_star, &self.eps_es]
    }

    pub fn scale(&self, c: f64) -> Self {
        HDVector { re: &self.re * c, eps: &self.eps * c, eps_star: &self.eps_star * c, eps_es: &self.eps_es * c }
    }

    pub fn max_block_norm(&self) -> f64 {
        self.blocks().iter().map(|b| b.norm()).fold(0.0, f64::max)
    }
}

impl Add for &HDVector {
    type Output = HDVector;
    fn add(self, rhs: &HDVector) -> HDVector {
        HDVector {
            re: &self.re + &rhs.re,
            eps: &self.eps + &rhs.eps,
            eps_star: &self.eps_star + &rhs.eps_star,
            eps_es: &self.eps_es + &rhs.eps_es,
        }
    }
}

impl Sub for &HDVector {
    type Output = HDVector;
    fn sub(self, rhs: &HDVector) -> HDVector {
        self + &rhs.scale(-1.0)
    }
}

/// `L̃† = L† − L†L₁L†(ε + ε*) + 2L†L₁L†L₁L† εε*`.
///
/// The context guarantees connectivity; `l1` must have zero row sums.
pub fn hd_pinv_laplacian(ctx: &GraphContext, l1: &RealMatrix) -> Result<HDMatrix> {
    let n = ctx.n();
    if l1.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: l1.nrows() });
    }
    let max_abs = l1.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max);
    if !(max_abs <= ROW_SUM_TOL) {
        return Err(Error::NonZeroRowSums { max_abs });
    }
    let pinv = ctx.pinv();
    let pl1 = pinv * l1;
    let first = &pl1 * pinv;
    let second = &pl1 * &first * 2.0;
    Ok(HDMatrix { re: pinv.clone(), eps: -&first, eps_star: -first, eps_es: second })
}

/// Residuals of the four Penrose equations plus the projector identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenroseResiduals {
    /// `‖AXA − A‖`
    pub axa_minus_a: f64,
    /// `‖XAX − X‖`
    pub xax_minus_x: f64,
    /// `‖(AX)ᵀ − AX‖`
    pub ax_symmetry: f64,
    /// `‖(XA)ᵀ − XA‖`
    pub xa_symmetry: f64,
    /// `‖XA − (I − J/n)‖`
    pub projector: f64,
}

impl PenroseResiduals {
    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.axa_minus_a, self.xax_minus_x, self.ax_symmetry, self.xa_symmetry, self.projector]
    }
}

/// Each residual is the largest Frobenius norm over the four blocks.
pub fn penrose_residuals(a: &HDMatrix, x: &HDMatrix) -> Result<PenroseResiduals> {
    let ax = a.mul(x)?;
    let xa = x.mul(a)?;
    let n = xa.shape().0;
    let centering = RealMatrix::identity(n, n) - RealMatrix::from_element(n, n, 1.0 / n as f64);
    Ok(PenroseResiduals {
        axa_minus_a: (&ax.mul(a)? - a).max_block_norm(),
        xax_minus_x: (&xa.mul(x)? - x).max_block_norm(),
        ax_symmetry: (&ax.transpose() - &ax).max_block_norm(),
        xa_symmetry: (&xa.transpose() - &xa).max_block_norm(),
        projector: (&xa - &HDMatrix::from_real(centering)).max_block_norm(),
    })
}

/// Particular solution `A†b`, consistency of `Ax = b`, and the projector
/// `I − A†A` onto the homogeneous solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct HdSolution {
    pub particular: HDVector,
    pub consistent: bool,
    /// Largest per-block norm of `AA†b − b`.
    pub residual: f64,
    pub homogeneous_projector: HDMatrix,
}

impl HdSolution {
    /// Member `A†b + (I − A†A)u` of the solution family.
    pub fn general(&self, u: &HDVector) -> Result<HDVector> {
        Ok(&self.particular + &self.homogeneous_projector.mul_vec(u)?)
    }
}

pub fn hd_solve(a: &HDMatrix, adag: &HDMatrix, b: &HDVector) -> Result<HdSolution> {
    let particular = adag.mul_vec(b)?;
    let residual = (&a.mul_vec(&particular)? - b).max_block_norm();
    let n = adag.shape().0;
    let homogeneous_projector = &HDMatrix::identity(n) - &adag.mul(a)?;
    Ok(HdSolution { particular, consistent: residual <= CONSISTENCY_TOL, residual, homogeneous_projector })
}

/// Potentials `ṽ = L̃†·Y(1ᵢ − 1ⱼ)` for a current `Y` injected at `i` and
/// drawn at `j`; `(ṽᵢ − ṽⱼ)/Y` is the hyper-dual resistance.
pub fn solve_potentials(ctx: &GraphContext, p: &Perturbation, i: usize, j: usize, current: f64) -> Result<HDVector> {
    ctx.check_vertex(i)?;
    ctx.check_vertex(j)?;
    if i == j {
        return Err(Error::SameVertex { vertex: i + 1 });
    }
    if current == 0.0 || !current.is_finite() {
        return Err(Error::ZeroCurrent);
    }
    ctx.graph().check_perturbation(p)?;
    let pinv = hd_pinv_laplacian(ctx, &build_l1(ctx.graph(), p)?)?;
    let b = HDVector::from_real(pair_vector(ctx.n(), i, j) * current);
    pinv.mul_vec(&b)
}
