//! Discretizations, reference resolvents and estimate sweeps for degenerate
//! diffusion generators
//!
//! ```text
//! L = Γ(x) Σᵢ [γᵢ(xᵢ) w(xᵢ) ∂²ᵢ + bᵢ(x) ∂ᵢ],   w(x) = x  or  x(1 − x),
//! ```
//!
//! on cubes `[0, M]^d`. The crate is organised bottom-up:
//!
//! * [`coefficients`]: problem data and sampled hypothesis checks;
//! * [`halfline`]: quadrature evaluation of the closed-form half-line
//!   resolvent, used as an analytic reference;
//! * [`operator1d`]: monotone finite differences on graded grids, discrete
//!   resolvents and semigroups;
//! * [`tensor`]: direct `d`-dimensional assembly, Kronecker sums and the
//!   axis-split semigroup;
//! * [`varcoeff`]: drift perturbation series, frozen-coefficient localization
//!   and corner charts;
//! * [`verify`]: probe-based estimate sweeps producing [`verify::EstimateReport`]s.

pub mod coefficients;
pub mod error;
pub mod grid;
pub mod halfline;
pub mod linalg;
pub mod operator1d;
pub mod quadrature;
pub mod tensor;
pub mod varcoeff;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::C64;
