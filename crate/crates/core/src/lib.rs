//! Sensitivity analysis of resistance distances and Kirchhoff indices on
//! positive-weighted graphs.
//!
//! Edge weights act as conductances. Perturbing the weight vector `x` along a
//! direction `dx` as `x + dx(ε + ε*)` turns the Laplacian into a hyper-dual
//! matrix whose Moore–Penrose inverse has a closed form. Contracting that
//! inverse yields the resistance distance (or Kirchhoff index) together with
//! its directional derivative `∇fᵀdx` (the ε and ε* slots) and the Hessian
//! quadratic form `dxᵀ∇²f dx` (the εε* slot).
//!
//! Vertex indices in this crate are 0-based. File formats and the CLI use
//! 1-based indices and convert at the boundary.
//!
//! With the default `parallel` feature, Hessian assembly, the finite
//! difference oracle and bound certification fan out over rayon; without it
//! the same code runs sequentially and produces identical results.

pub mod bounds;
pub mod error;
pub mod graph;
pub mod hd_laplacian;
pub mod hessian;
pub mod hyperdual;
pub mod par;
pub mod resistance;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Perturbation, WeightedGraph};
pub use hyperdual::{HyperDual, Slot};
pub use par::Execution;
pub use spectral::{GraphContext, SpectralDecomposition};

/// Dense real matrix used throughout.
pub type RealMatrix = nalgebra::DMatrix<f64>;
/// Dense real vector used throughout.
pub type RealVector = nalgebra::DVector<f64>;
