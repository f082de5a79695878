//! Spatial degrees of freedom, diversity and ergodic capacity of planar and
//! alternating-height (3-D) antenna rows.
//!
//! Lengths are in free-space wavelengths and angles in radians unless a name
//! says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel3gpp;
pub mod clarke;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kronecker;
pub mod linalg;
pub mod matrix;
pub mod metrics;
mod parallel;
pub mod patterns;
pub mod pipeline;

pub use clarke::{clarke_correlation, AngularSpectrum, QuadratureSpec};
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, LayoutTag, Vec3};
pub use kronecker::{
    covariance, embedded_efficiency, pattern_correlation, AngularPowerSpectrum, EfficiencyVector,
    ScatteringMatrix,
};
pub use matrix::{CorrelationMatrix, CovarianceMatrix, SpatialMatrix};
pub use metrics::{
    beamforming_gain, diversity, eigen_spectrum, ergodic_capacity, gain_limit_2d, CapacityEstimate,
    CapacityParams, GeometryContext,
};
pub use patterns::{
    element_over_reflector, isotropic_pattern, translate_pattern, AngleGrid, PatternGrid,
};
