//! Numerical laboratory for the one-dimensional Dirac operator
//! `H = D + V` with exponentially decaying potentials.
//!
//! The crate covers the linear theory (point spectrum, Jost solutions,
//! scattering data, limiting resolvent), the family of small gap solitons
//! bifurcating from the gap eigenvalue, the block-diagonalised linearisation
//! around those solitons, and the modulated nonlinear evolution together with
//! dispersive-norm diagnostics.
//!
//! Conventions used throughout:
//!
//! * spinors are `u = [u, v]` sampled on a symmetric uniform [`Grid`];
//! * `⟨f, g⟩ = ∫ (ū g_u + v̄ g_v) dx`, conjugate-linear in the first slot,
//!   evaluated by the periodic trapezoid rule;
//! * `D = [[-i∂x, -1], [-1, i∂x]]`, `V = [[β, γ], [γ, β]]`;
//! * the evolution equation is `i u_t = H u + N(u)` with `N = ∇_ū W`.

pub mod dirac;
pub mod error;
pub mod evolve;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod linstab;
pub mod nonlinearity;
pub mod ode;
pub mod parallel;
pub mod potential;
pub mod scattering;
pub mod soliton;
pub mod spectral;

pub use dirac::{BoundState, DiracOperator, Window};
pub use error::{DglError, Result};
pub use field::{inner_product, weighted_norm, NormKind, SpinorField};
pub use grid::Grid;
pub use nonlinearity::{Nonlinearity, NonlinearityKind};
pub use potential::{PotentialPair, Profile};
pub use spectral::Stencil;

/// Complex double used for every field value.
pub type C64 = num_complex::Complex64;

/// Artifact version stamped into every emitted file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
