//! Dirichlet-to-Neumann operators of star-shaped perturbations of the unit ball.
//!
//! The boundary is `{(1 + h(x)) x : |x| = 1}`. Fields on the unit sphere are
//! stored spectrally ([`spectral`]), interior fields on the ball by radial
//! collocation per angular mode ([`ball`]). The operator `G(h)` is computed by
//! pulling the Laplace equation back to the ball, where it becomes a divergence
//! form equation with coefficient matrix `P(h)`, and expanding the solution in
//! homogeneous powers of `h` ([`dn`]). Independent reference solutions live in
//! [`oracles`]; chart-based Sobolev norms and inequality probes in [`charts`].

pub mod ball;
pub mod charts;
pub mod dn;
pub mod dual;
pub mod error;
pub mod oracles;
pub mod quadrature;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{AngularGrid, BoundaryField, Dim};
