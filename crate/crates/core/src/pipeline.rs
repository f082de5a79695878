//! Glue from an array layout to embedded patterns, Kronecker covariance and
//! the figures of merit compared between 2-D and 3-D variants.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::kronecker::{covariance, pattern_correlation, AngularPowerSpectrum, EfficiencyVector};
use crate::matrix::CovarianceMatrix;
use crate::metrics::{
    diversity, ergodic_capacity, CapacityEstimate, CapacityParams, GeometryContext,
};
use crate::patterns::{element_over_reflector, translate_pattern, PatternGrid};

/// Analytic element: a dipole over a reflector. Elements at the lowest z of
/// the array sit `lower_height` above the reflector; a raised element sits at
/// its z offset above it (never lower than `lower_height`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElementModel {
    pub lower_height: f64,
    pub reflection_phase: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for ElementModel {
    fn default() -> Self {
        Self {
            lower_height: 0.02,
            reflection_phase: 0.0,
            n_theta: 181,
            n_phi: 360,
        }
    }
}

impl ElementModel {
    pub fn with_resolution(mut self, n_theta: usize, n_phi: usize) -> Self {
        self.n_theta = n_theta;
        self.n_phi = n_phi;
        self
    }
}

/// Patterns with the phase centre at the origin, one per element, in element order.
pub fn local_patterns(geometry: &ArrayGeometry, model: &ElementModel) -> Result<Vec<PatternGrid>> {
    if geometry.is_empty() {
        return Err(Error::invalid("empty geometry"));
    }
    let z0 = geometry.min_z();
    let mut cache: HashMap<u64, PatternGrid> = HashMap::new();
    geometry
        .elements()
        .iter()
        .map(|r| {
            let height = model.lower_height.max(r[2] - z0);
            if let Some(p) = cache.get(&height.to_bits()) {
                return Ok(p.clone());
            }
            let p =
                element_over_reflector(height, model.reflection_phase, model.n_theta, model.n_phi)?;
            cache.insert(height.to_bits(), p.clone());
            Ok(p)
        })
        .collect()
}

/// Embedded patterns moved to their element positions.
pub fn embedded_patterns(
    geometry: &ArrayGeometry,
    model: &ElementModel,
) -> Result<Vec<PatternGrid>> {
    Ok(local_patterns(geometry, model)?
        .iter()
        .zip(geometry.elements())
        .map(|(p, r)| translate_pattern(p, *r))
        .collect())
}

/// R = Φ ∘ Ξ under a uniform broadside cap of the given half-angle.
pub fn kronecker_covariance(
    geometry: &ArrayGeometry,
    model: &ElementModel,
    spread_half_angle: f64,
    efficiencies: Option<&EfficiencyVector>,
) -> Result<CovarianceMatrix> {
    let patterns = embedded_patterns(geometry, model)?;
    let spectrum = AngularPowerSpectrum::uniform_cap(patterns[0].grid(), spread_half_angle)?;
    let phi = pattern_correlation(&patterns, &spectrum)?;
    let ideal = EfficiencyVector::ideal(geometry.len());
    covariance(&phi, efficiencies.unwrap_or(&ideal))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantMetrics {
    pub diversity: f64,
    pub capacities: Vec<CapacityEstimate>,
}

/// Diversity plus capacity at each SNR (N_t = N_r, spacing-aware normalization).
pub fn evaluate_covariance(
    r: &CovarianceMatrix,
    geometry: &ArrayGeometry,
    snrs_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<VariantMetrics> {
    let context = GeometryContext::from_geometry(geometry);
    let capacities = snrs_db
        .iter()
        .map(|snr| {
            let params =
                CapacityParams::new(*snr, geometry.len(), seed, context).with_trials(trials);
            ergodic_capacity(r, &params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VariantMetrics {
        diversity: diversity(r)?,
        capacities,
    })
}
