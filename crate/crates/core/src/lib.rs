//! Finite-element toolkit for two-parameter Kirchhoff-type problems
//!
//! ```text
//! -K(∫|∇u|²) Δu = λ f(x, u) + μ g(x, u)   in Ω,     u = 0 on ∂Ω
//! ```
//!
//! on 1D intervals and 2D rectangles with P1 elements. The crate is split into
//!
//! - [`fem`]: meshes, assembly of stiffness/mass operators, sparse solves;
//! - [`model`]: the coefficient `K` and nonlinearities `f`, `g` with their
//!   primitives, a specimen library and a sampling-based hypothesis audit;
//! - [`variational`]: the energies `Φ`, `J`, `Ψ`, their H¹₀ gradients, the
//!   inverse operator `T` and the weak-form residual;
//! - [`solvers`]: deflated Newton, the `T` fixed-point iteration, energy
//!   descent and the threshold estimator;
//! - [`experiments`]: config files, reports and the CLI commands.

// NaN-rejecting `!(x > 0.0)` checks and index loops in the band solvers are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiments;
pub mod fem;
pub mod model;
pub mod solvers;
pub mod variational;

pub use error::{Error, Result};
pub use fem::{assemble, build_interval_mesh, build_rect_mesh, AssembledOperators, FeFunction, Mesh};
pub use model::{KirchhoffLaw, Nonlinearity};
pub use variational::{EnergyBreakdown, Problem};
