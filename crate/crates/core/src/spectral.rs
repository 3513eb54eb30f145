//! Dense symmetric eigendecomposition (cyclic Jacobi) and the spectral
//! constructions built on it: pseudoinverse, square root and norms.

use crate::error::{Error, Result};
use crate::graph::{build_laplacian, WeightedGraph};
use crate::RealMatrix;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// `M = Σ λᵢ pᵢpᵢᵀ` with eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Descending: `λ₁ ≥ … ≥ λₙ`.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: RealMatrix,
}

impl SpectralDecomposition {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Second-smallest eigenvalue; the algebraic connectivity of a Laplacian.
    pub fn second_smallest(&self) -> Option<f64> {
        let n = self.order();
        (n >= 2).then(|| self.eigenvalues[n - 2])
    }

    /// `Σ f(λᵢ) pᵢpᵢᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> RealMatrix {
        let n = self.order();
        let p = &self.eigenvectors;
        let mut scaled = p.clone();
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            let c = f(lambda);
            scaled.column_mut(i).scale_mut(c);
        }
        let mut out = RealMatrix::zeros(n, n);
        out.gemm(1.0, &scaled, &p.transpose(), 0.0);
        symmetrize(&out)
    }

    pub fn reconstruct(&self) -> RealMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized first. Iteration stops once the off-diagonal
/// Frobenius mass drops to `1e-14 · ‖M‖_F`.
pub fn eig_sym(m: &RealMatrix) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "eigendecomposition input" });
    }
    let n = m.nrows();
    let mut a = symmetrize(m);
    let mut v = RealMatrix::identity(n, n);
    let scale = a.norm();
    let threshold = OFF_DIAGONAL_TOL * scale;

    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged || off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = RealMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(a: &RealMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

// Zeroes a[p][q] with the rotation A ← PᵀAP and accumulates V ← VP.
fn rotate(a: &mut RealMatrix, v: &mut RealMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t =
        if theta.abs() > 1e150 { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.nrows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `1e-10 · n · max(1, λ₁)`.
pub fn default_rank_tol(d: &SpectralDecomposition) -> f64 {
    1e-10 * d.order() as f64 * d.largest().max(1.0)
}

fn check_psd(d: &SpectralDecomposition, rank_tol: f64) -> Result<()> {
    match d.eigenvalues.iter().copied().find(|&l| l < -rank_tol) {
        Some(value) => Err(Error::NegativeEigenvalue { value, tolerance: rank_tol }),
        None => Ok(()),
    }
}

/// Moore–Penrose inverse of a positive semidefinite matrix:
/// `Σ_{λᵢ > tol} pᵢpᵢᵀ/λᵢ`.
pub fn pinv_psd(d: &SpectralDecomposition, rank_tol: f64) -> Result<RealMatrix> {
    check_psd(d, rank_tol)?;
    Ok(d.reconstruct_with(|l| if l > rank_tol { 1.0 / l } else { 0.0 }))
}

/// Principal square root `P diag(√λᵢ) Pᵀ` of a positive semidefinite matrix.
pub fn sqrt_psd(d: &SpectralDecomposition, rank_tol: f64) -> Result<RealMatrix> {
    check_psd(d, rank_tol)?;
    Ok(d.reconstruct_with(|l| l.max(0.0).sqrt()))
}

pub fn frobenius_norm(m: &RealMatrix) -> f64 {
    m.norm()
}

/// Largest singular value. Symmetric input uses its own spectrum; otherwise
/// `√λ_max(MᵀM)`.
pub fn spectral_norm(m: &RealMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.is_square() && (m - m.transpose()).amax() <= 1e-12 * m.amax() {
        let d = eig_sym(m)?;
        return Ok(d.largest().abs().max(d.smallest().abs()));
    }
    let gram = m.transpose() * m;
    Ok(eig_sym(&gram)?.largest().max(0.0).sqrt())
}

/// Laplacian, its spectrum and pseudoinverse for one connected graph.
///
/// Built once and shared read-only by every query on the same weights.
#[derive(Debug, Clone)]
pub struct GraphContext {
    graph: WeightedGraph,
    laplacian: RealMatrix,
    spectrum: SpectralDecomposition,
    pinv: RealMatrix,
    rank_tol: f64,
}

impl GraphContext {
    pub fn new(graph: &WeightedGraph) -> Result<Self> {
        Self::build(graph, None)
    }

    /// Uses `rank_tol` instead of [`default_rank_tol`].
    pub fn with_rank_tol(graph: &WeightedGraph, rank_tol: f64) -> Result<Self> {
        if !(rank_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("rank tolerance {rank_tol} must be nonnegative")));
        }
        Self::build(graph, Some(rank_tol))
    }

    fn build(graph: &WeightedGraph, rank_tol: Option<f64>) -> Result<Self> {
        let n = graph.vertex_count();
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 vertices, got {n}")));
        }
        let laplacian = build_laplacian(graph);
        let spectrum = eig_sym(&laplacian)?;
        let rank_tol = rank_tol.unwrap_or_else(|| default_rank_tol(&spectrum));
        let connectivity = spectrum.second_smallest().unwrap_or(0.0);
        if !(connectivity > rank_tol) {
            return Err(Error::NotConnected { connectivity, tolerance: rank_tol });
        }
        let pinv = pinv_psd(&spectrum, rank_tol)?;
        Ok(GraphContext { graph: graph.clone(), laplacian, spectrum, pinv, rank_tol })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn m(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn laplacian(&self) -> &RealMatrix {
        &self.laplacian
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// `L†`.
    pub fn pinv(&self) -> &RealMatrix {
        &self.pinv
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// Largest Laplacian eigenvalue `λ₁`.
    pub fn lambda_max(&self) -> f64 {
        self.spectrum.largest()
    }

    /// Algebraic connectivity `λ_{n−1}`.
    pub fn algebraic_connectivity(&self) -> f64 {
        self.spectrum.second_smallest().expect("n >= 2")
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: v + 1, n: self.n() });
        }
        Ok(())
    }
}
