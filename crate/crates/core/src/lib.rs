//! Even/odd (twisted) exterior calculus over a finite-dimensional affine
//! space and a variational treatment of vacuum electrodynamics built on it:
//! graded algebra, the Weyl isomorphism, differential forms and de Rham
//! currents, quadratic action densities with their derivatives, and the
//! Euler-Lagrange / Maxwell / Legendre / Hamilton verification stack.

pub mod algebra;
pub mod error;
pub mod forms;
pub mod quadrature;
pub mod scalar_field;
pub mod space;
pub mod weyl;

pub use algebra::GradedElement;
pub use error::{Error, Result};
pub use forms::{Cell, Chain, Current, CurrentKind, Domain, SmoothForm};
pub use space::{Kind, Orientation, Parity, SpaceDescriptor};
pub use weyl::{BilinearMap, HomQM, TensorQM};
