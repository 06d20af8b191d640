//! Charts of the sphere, partitions of unity, radial cut-offs, and
//! chart-based Sobolev norms on the sphere and on the half-space.

pub mod atlas;
pub mod cutoff;
pub mod fourier;
pub mod halfspace;
pub mod maps;
pub mod norms;
pub mod witness;

pub use atlas::{fibonacci_sphere, Atlas, AtlasOptions, TransitionBlocks};
pub use cutoff::{plateau, smooth_step, CutoffFamily};
pub use fourier::{BoxSamples, Spectrum};
pub use halfspace::{first_order_energy, Extension, HalfBox, HalfSpaceField};
pub use maps::{chart_f, chart_g, rotation_to_south, south_pole, Rot};
pub use norms::{chart_norm, chart_norms, localized_field, x_seminorm, x_seminorms, ChartNormOptions, XNormOptions};
pub use witness::{inequality_witness_suite, HalfPlaneBumps, WitnessConfig, WitnessReport, WitnessRow};
