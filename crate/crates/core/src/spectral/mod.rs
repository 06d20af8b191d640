//! Band-limited fields on the boundary sphere and their quadrature grids.

mod field;
mod grid;
mod modes;

pub use field::{BoundaryField, Projection};
pub use grid::{basis_at, AngularGrid};
pub use modes::Dim;
