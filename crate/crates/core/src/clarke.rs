//! Spatial correlation of point receivers under a uniform plane-wave ensemble
//! confined to a spherical cap (3-D Clarke model).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Vec3};
use crate::linalg::CMatrix;
use crate::matrix::{hermitize_upper, CorrelationMatrix};
use crate::parallel::map_indexed;

pub const K0: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumDistribution {
    UniformSolidAngle,
}

/// Plane waves arriving uniformly per unit solid angle within `spread_half_angle`
/// of `mean_direction`. A half-angle of π/2 is the isotropic upper hemisphere;
/// π covers the full sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    spread_half_angle: f64,
    mean_direction: Vec3,
    distribution: SpectrumDistribution,
}

impl AngularSpectrum {
    pub fn new(spread_half_angle: f64, mean_direction: Vec3) -> Result<Self> {
        if !(spread_half_angle > 0.0 && spread_half_angle <= PI) {
            return Err(Error::invalid(format!(
                "spread half-angle must lie in (0, π], got {spread_half_angle}"
            )));
        }
        let norm = mean_direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "mean direction must be normalized, |d| = {norm}"
            )));
        }
        Ok(Self {
            spread_half_angle,
            mean_direction,
            distribution: SpectrumDistribution::UniformSolidAngle,
        })
    }

    /// Cap about broadside (+z).
    pub fn broadside(spread_half_angle: f64) -> Result<Self> {
        Self::new(spread_half_angle, [0.0, 0.0, 1.0])
    }

    pub fn broadside_deg(spread_deg: f64) -> Result<Self> {
        Self::broadside(spread_deg.to_radians())
    }

    pub fn full_sphere() -> Self {
        Self {
            spread_half_angle: PI,
            mean_direction: [0.0, 0.0, 1.0],
            distribution: SpectrumDistribution::UniformSolidAngle,
        }
    }

    pub fn spread_half_angle(&self) -> f64 {
        self.spread_half_angle
    }

    pub fn mean_direction(&self) -> Vec3 {
        self.mean_direction
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    FibonacciCap,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub node_count: usize,
    /// Only read by [`QuadratureMethod::MonteCarlo`].
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::fibonacci(2048)
    }
}

impl QuadratureSpec {
    pub fn fibonacci(node_count: usize) -> Self {
        Self {
            method: QuadratureMethod::FibonacciCap,
            node_count,
            seed: 0,
        }
    }

    pub fn monte_carlo(node_count: usize, seed: u64) -> Self {
        Self {
            method: QuadratureMethod::MonteCarlo,
            node_count,
            seed,
        }
    }
}

/// Equal-solid-angle directions covering the cap of `spectrum`.
pub fn cap_nodes(spectrum: &AngularSpectrum, quad: &QuadratureSpec) -> Result<Vec<Vec3>> {
    if quad.node_count < 2 {
        return Err(Error::invalid(format!(
            "quadrature needs at least 2 nodes, got {}",
            quad.node_count
        )));
    }
    let n = quad.node_count;
    let span = 1.0 - spectrum.spread_half_angle.cos();
    let local: Vec<Vec3> = match quad.method {
        QuadratureMethod::FibonacciCap => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - (i as f64 + 0.5) / n as f64 * span;
                    let az = golden * i as f64;
                    unit_from_z_az(z, az)
                })
                .collect()
        }
        QuadratureMethod::MonteCarlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(quad.seed);
            (0..n)
                .map(|_| {
                    let z = 1.0 - rng.random::<f64>() * span;
                    let az = 2.0 * PI * rng.random::<f64>();
                    unit_from_z_az(z, az)
                })
                .collect()
        }
    };
    let rot = rotation_from_z(spectrum.mean_direction);
    Ok(local.iter().map(|v| apply(&rot, v)).collect())
}

fn unit_from_z_az(z: f64, az: f64) -> Vec3 {
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * az.cos(), r * az.sin(), z]
}

type Mat3 = [[f64; 3]; 3];

/// Rotation taking +z onto `target` (Rodrigues).
fn rotation_from_z(target: Vec3) -> Mat3 {
    let [x, y, z] = target;
    if z > 1.0 - 1e-15 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    if z < -1.0 + 1e-15 {
        return [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    }
    // axis = z × target = (-y, x, 0), sinθ = |axis|, cosθ = z
    let c = z;
    let k = 1.0 / (1.0 + c);
    [
        [c + k * y * y, -k * x * y, x],
        [-k * x * y, c + k * x * x, y],
        [-x, -y, c],
    ]
}

fn apply(m: &Mat3, v: &Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// ρ_nm = mean over cap nodes of exp(j k0 k̂·(r_n − r_m)).
pub fn clarke_correlation(
    geometry: &ArrayGeometry,
    spectrum: &AngularSpectrum,
    quad: &QuadratureSpec,
) -> Result<CorrelationMatrix> {
    if geometry.is_empty() {
        return Err(Error::invalid("empty geometry"));
    }
    let nodes = cap_nodes(spectrum, quad)?;
    let elements = geometry.elements();
    let n = elements.len();
    let inv = 1.0 / nodes.len() as f64;

    let rows: Vec<Vec<Complex64>> = map_indexed(n, |m| {
        let rm = elements[m];
        (m..n)
            .map(|k| {
                if k == m {
                    return Complex64::new(1.0, 0.0);
                }
                let rk = elements[k];
                let d = [rm[0] - rk[0], rm[1] - rk[1], rm[2] - rk[2]];
                let mut acc = Complex64::new(0.0, 0.0);
                for w in &nodes {
                    let phase = K0 * (w[0] * d[0] + w[1] * d[1] + w[2] * d[2]);
                    acc += Complex64::from_polar(1.0, phase);
                }
                acc * inv
            })
            .collect()
    });

    let mut entries = CMatrix::zeros(n, n);
    for (m, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            entries[(m, m + offset)] = v;
        }
    }
    hermitize_upper(&mut entries);
    CorrelationMatrix::new(entries)
}

/// Full-sphere isotropic correlation sin(k0 d)/(k0 d).
pub fn isotropic_correlation_closed_form(d: f64) -> f64 {
    let x = K0 * d;
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(isotropic_correlation_closed_form(0.0), 1.0);
        assert!(isotropic_correlation_closed_form(0.5).abs() < 1e-15);
        assert!((isotropic_correlation_closed_form(0.25) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn colocated_pair_fully_correlated() {
        let g = ArrayGeometry::new(vec![[0.3, 0.1, 0.0]; 2], crate::geometry::LayoutTag::Custom)
            .unwrap();
        for deg in [10.0, 60.0, 90.0] {
            let phi = clarke_correlation(
                &g,
                &AngularSpectrum::broadside_deg(deg).unwrap(),
                &QuadratureSpec::default(),
            )
            .unwrap();
            assert!((phi.get(0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn nodes_stay_inside_cap() {
        let spec = AngularSpectrum::new(0.4, [0.6, 0.0, 0.8]).unwrap();
        for quad in [
            QuadratureSpec::fibonacci(500),
            QuadratureSpec::monte_carlo(500, 3),
        ] {
            for v in cap_nodes(&spec, &quad).unwrap() {
                let dot = 0.6 * v[0] + 0.8 * v[2];
                assert!(dot >= 0.4f64.cos() - 1e-12);
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_maps_z_to_target() {
        for t in [
            [1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
            [0.48, 0.6, 0.64],
        ] {
            let r = rotation_from_z(t);
            let v = apply(&r, &[0.0, 0.0, 1.0]);
            for i in 0..3 {
                assert!((v[i] - t[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn argument_errors() {
        let g = ArrayGeometry::linear_2d(2, 0.5).unwrap();
        let s = AngularSpectrum::broadside_deg(90.0).unwrap();
        assert!(clarke_correlation(&g, &s, &QuadratureSpec::fibonacci(1)).is_err());
        assert!(AngularSpectrum::broadside(0.0).is_err());
        assert!(AngularSpectrum::broadside(4.0).is_err());
        assert!(AngularSpectrum::new(0.5, [0.0, 0.0, 2.0]).is_err());
    }
}
