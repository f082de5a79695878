//! Sampled far-field patterns of single embedded elements.
//!
//! Grids are (θ, φ) products with θ in [0, π] and φ in [0, 2π). Angles are
//! stored as degrees rounded to two decimals (then converted to radians) so a
//! grid survives a trip through the pattern CSV format bit-for-bit.
//!
//! The analytic element is a half-wave dipole parallel to the reflector and
//! oriented along y, i.e. across a row array laid out on x. Its image in an
//! infinite reflector with unit-magnitude reflection coefficient multiplies
//! the free-space field by |1 + exp(j(ψ_r − 2 k0 H cosθ))| in the upper
//! hemisphere; nothing is radiated below the reflector. The factor is a real
//! magnitude, so each pattern keeps its phase centre at the element itself.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::clarke::K0;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Axes of a sampled pattern plus the quadrature weights that integrate
/// `f(θ, φ) sinθ dθ dφ` for piecewise-linear `f` in θ (exact Jacobian) and
/// periodic trapezoid in φ.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleGrid {
    theta: Vec<f64>,
    phi: Vec<f64>,
    theta_weights: Vec<f64>,
    phi_weights: Vec<f64>,
}

/// Round to two decimals, the resolution of the CSV angle columns.
pub fn round_centidegrees(deg: f64) -> f64 {
    (deg * 100.0).round() / 100.0
}

impl AngleGrid {
    /// `n_theta` samples from 0° to 180° inclusive, `n_phi` samples over [0°, 360°).
    pub fn uniform(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::invalid(format!(
                "grid resolution must be at least 2x2, got {n_theta}x{n_phi}"
            )));
        }
        let theta_deg: Vec<f64> = (0..n_theta)
            .map(|i| round_centidegrees(i as f64 * 180.0 / (n_theta - 1) as f64))
            .collect();
        let phi_deg: Vec<f64> = (0..n_phi)
            .map(|j| round_centidegrees(j as f64 * 360.0 / n_phi as f64))
            .collect();
        Self::from_degrees(&theta_deg, &phi_deg)
    }

    /// Build from axis samples in degrees; axes must be strictly ascending with
    /// θ inside [0, 180] and φ inside [0, 360).
    pub fn from_degrees(theta_deg: &[f64], phi_deg: &[f64]) -> Result<Self> {
        let theta: Vec<f64> = theta_deg.iter().map(|d| d.to_radians()).collect();
        let phi: Vec<f64> = phi_deg.iter().map(|d| d.to_radians()).collect();
        Self::from_radians(theta, phi)
    }

    pub fn from_radians(theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 || phi.is_empty() {
            return Err(Error::invalid(
                "grid needs at least two θ samples and one φ sample",
            ));
        }
        if !strictly_ascending(&theta) || !strictly_ascending(&phi) {
            return Err(Error::invalid("grid axes must be strictly ascending"));
        }
        if theta[0] < 0.0 || *theta.last().unwrap() > PI + 1e-12 {
            return Err(Error::invalid("θ samples must lie in [0, π]"));
        }
        if phi[0] < 0.0 || *phi.last().unwrap() >= 2.0 * PI {
            return Err(Error::invalid("φ samples must lie in [0, 2π)"));
        }
        let theta_weights = (0..theta.len())
            .map(|i| hat_weight(&theta, i, f64::NEG_INFINITY, f64::INFINITY))
            .collect();
        let phi_weights = periodic_weights(&phi);
        Ok(Self {
            theta,
            phi,
            theta_weights,
            phi_weights,
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phi_weights(&self) -> &[f64] {
        &self.phi_weights
    }

    /// θ weights restricted to the band `[lo, hi]`, exact for the sinθ Jacobian.
    pub fn theta_weights_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        (0..self.theta.len())
            .map(|i| hat_weight(&self.theta, i, lo, hi))
            .collect()
    }

    /// Unit propagation direction at flat index `i·n_phi + j`.
    pub fn direction(&self, i: usize, j: usize) -> Vec3 {
        let (st, ct) = self.theta[i].sin_cos();
        let (sp, cp) = self.phi[j].sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Total solid angle the weights integrate over.
    pub fn solid_angle(&self) -> f64 {
        let a: f64 = self.theta_weights.iter().sum();
        let b: f64 = self.phi_weights.iter().sum();
        a * b
    }
}

fn strictly_ascending(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0])
}

/// ∫ hat_i(θ) sinθ dθ over `[lo, hi]`, where hat_i is the piecewise-linear
/// interpolation basis function of node `i`.
fn hat_weight(nodes: &[f64], i: usize, lo: f64, hi: f64) -> f64 {
    let ti = nodes[i];
    let mut w = 0.0;
    if i > 0 {
        let a = nodes[i - 1];
        let h = ti - a;
        let (l, u) = (lo.max(a), hi.min(ti));
        if u > l {
            // d/dθ [sinθ − (θ − a) cosθ] = (θ − a) sinθ
            let f = |t: f64| (t.sin() - (t - a) * t.cos()) / h;
            w += f(u) - f(l);
        }
    }
    if i + 1 < nodes.len() {
        let b = nodes[i + 1];
        let h = b - ti;
        let (l, u) = (lo.max(ti), hi.min(b));
        if u > l {
            // d/dθ [−sinθ − (b − θ) cosθ] = (b − θ) sinθ
            let f = |t: f64| (-t.sin() - (b - t) * t.cos()) / h;
            w += f(u) - f(l);
        }
    }
    w
}

fn periodic_weights(phi: &[f64]) -> Vec<f64> {
    let n = phi.len();
    if n == 1 {
        return vec![2.0 * PI];
    }
    (0..n)
        .map(|j| {
            let next = if j + 1 < n {
                phi[j + 1]
            } else {
                phi[0] + 2.0 * PI
            };
            let prev = if j > 0 {
                phi[j - 1]
            } else {
                phi[n - 1] - 2.0 * PI
            };
            0.5 * (next - prev)
        })
        .collect()
}

/// Complex far field (E_θ, E_φ) of one embedded element on an [`AngleGrid`],
/// stored θ-major (`i·n_phi + j`).
#[derive(Clone, Debug, PartialEq)]
pub struct PatternGrid {
    grid: AngleGrid,
    e_theta: Vec<Complex64>,
    e_phi: Vec<Complex64>,
    position: Vec3,
}

impl PatternGrid {
    pub fn new(
        grid: AngleGrid,
        e_theta: Vec<Complex64>,
        e_phi: Vec<Complex64>,
        position: Vec3,
    ) -> Result<Self> {
        if e_theta.len() != grid.len() || e_phi.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field arrays must have {} samples, got {} and {}",
                grid.len(),
                e_theta.len(),
                e_phi.len()
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !e_theta.iter().chain(e_phi.iter()).all(finite)
            || !position.iter().all(|c| c.is_finite())
        {
            return Err(Error::invalid("pattern contains non-finite values"));
        }
        let p = Self {
            grid,
            e_theta,
            e_phi,
            position,
        };
        let power = p.total_power();
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "pattern radiates no power ({power})"
            )));
        }
        Ok(p)
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn e_theta(&self) -> &[Complex64] {
        &self.e_theta
    }

    pub fn e_phi(&self) -> &[Complex64] {
        &self.e_phi
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    /// ∮ (|E_θ|² + |E_φ|²) dΩ.
    pub fn total_power(&self) -> f64 {
        let n_phi = self.grid.n_phi();
        let mut total = 0.0;
        for (i, wt) in self.grid.theta_weights().iter().enumerate() {
            for (j, wp) in self.grid.phi_weights().iter().enumerate() {
                let k = i * n_phi + j;
                total += wt * wp * (self.e_theta[k].norm_sqr() + self.e_phi[k].norm_sqr());
            }
        }
        total
    }

    /// Bilinear interpolation of both components at an arbitrary direction,
    /// using the stored samples as they are (no phase unwrapping).
    pub fn sample(&self, theta: f64, phi: f64) -> (Complex64, Complex64) {
        let g = &self.grid;
        let th = g.theta();
        let theta = theta.clamp(th[0], *th.last().unwrap());
        let i = match th.iter().position(|&t| t >= theta) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => th.len() - 2,
        }
        .min(th.len() - 2);
        let ti = (theta - th[i]) / (th[i + 1] - th[i]);

        let ph = g.phi();
        let n_phi = ph.len();
        let phi = phi.rem_euclid(2.0 * PI);
        let (j0, j1, tj) = if n_phi == 1 {
            (0, 0, 0.0)
        } else {
            // phi below the first sample wraps onto the last interval
            let (j, lo) = match ph.iter().rposition(|&p| p <= phi) {
                Some(j) => (j, ph[j]),
                None => (n_phi - 1, ph[n_phi - 1] - 2.0 * PI),
            };
            let hi = if j + 1 < n_phi {
                ph[j + 1]
            } else {
                ph[0] + 2.0 * PI
            };
            (j, (j + 1) % n_phi, (phi - lo) / (hi - lo))
        };
        let at =
            |v: &[Complex64], i: usize| v[i * n_phi + j0] * (1.0 - tj) + v[i * n_phi + j1] * tj;
        let lerp = |v: &[Complex64]| at(v, i) * (1.0 - ti) + at(v, i + 1) * ti;
        (lerp(&self.e_theta), lerp(&self.e_phi))
    }
}

/// Constant E_θ = 1, E_φ = 0 at the origin.
pub fn isotropic_pattern(n_theta: usize, n_phi: usize) -> Result<PatternGrid> {
    let grid = AngleGrid::uniform(n_theta, n_phi)?;
    let n = grid.len();
    PatternGrid::new(
        grid,
        vec![Complex64::new(1.0, 0.0); n],
        vec![Complex64::new(0.0, 0.0); n],
        [0.0; 3],
    )
}

/// Free-space half-wave dipole along y, normalized to 1 at broadside.
/// Returns (E_θ, E_φ) as real amplitudes.
pub fn dipole_y_field(theta: f64, phi: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let cos_psi = st * sp;
    let sin2_psi = 1.0 - cos_psi * cos_psi;
    // cos(π/2·c)/(1 − c²) → π/4 as c → ±1
    let amp = if sin2_psi < 1e-12 {
        PI / 4.0
    } else {
        (FRAC_PI_2 * cos_psi).cos() / sin2_psi
    };
    (amp * ct * sp, amp * cp)
}

/// Image-theory array factor |1 + exp(j(ψ_r − 2 k0 H cosθ))| (zero below the reflector).
pub fn reflector_factor(height: f64, reflection_phase: f64, theta: f64) -> f64 {
    if theta > FRAC_PI_2 + 1e-12 {
        return 0.0;
    }
    let arg = reflection_phase - 2.0 * K0 * height * theta.cos();
    (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, arg)).norm()
}

/// Dipole at `height` above an infinite reflector of phase `reflection_phase`.
pub fn element_over_reflector(
    height: f64,
    reflection_phase: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<PatternGrid> {
    if !(height >= 0.0) || !height.is_finite() {
        return Err(Error::invalid(format!(
            "height must be non-negative, got {height}"
        )));
    }
    let grid = AngleGrid::uniform(n_theta, n_phi)?;
    let mut e_theta = Vec::with_capacity(grid.len());
    let mut e_phi = Vec::with_capacity(grid.len());
    for &t in grid.theta() {
        let af = reflector_factor(height, reflection_phase, t);
        for &p in grid.phi() {
            let (et, ep) = dipole_y_field(t, p);
            e_theta.push(Complex64::new(et * af, 0.0));
            e_phi.push(Complex64::new(ep * af, 0.0));
        }
    }
    let n = grid.len();
    let power: f64 = e_theta.iter().chain(&e_phi).map(|z| z.norm_sqr()).sum();
    if power == 0.0 {
        // Shorted by its own image: a legitimate but silent element.
        return Ok(PatternGrid {
            grid,
            e_theta: vec![Complex64::new(0.0, 0.0); n],
            e_phi: vec![Complex64::new(0.0, 0.0); n],
            position: [0.0; 3],
        });
    }
    PatternGrid::new(grid, e_theta, e_phi, [0.0; 3])
}

/// Move the phase reference: multiply by exp(j k0 k̂·offset).
pub fn translate_pattern(pattern: &PatternGrid, offset: Vec3) -> PatternGrid {
    let g = &pattern.grid;
    let n_phi = g.n_phi();
    let mut e_theta = pattern.e_theta.clone();
    let mut e_phi = pattern.e_phi.clone();
    for i in 0..g.n_theta() {
        for j in 0..n_phi {
            let k = g.direction(i, j);
            let phase = K0 * (k[0] * offset[0] + k[1] * offset[1] + k[2] * offset[2]);
            let rot = Complex64::from_polar(1.0, phase);
            e_theta[i * n_phi + j] *= rot;
            e_phi[i * n_phi + j] *= rot;
        }
    }
    let p = pattern.position;
    PatternGrid {
        grid: g.clone(),
        e_theta,
        e_phi,
        position: [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]],
    }
}
