//! Diversity measure, eigenvalue spectra, ergodic V-BLAST capacity and
//! beamforming gain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clarke::K0;
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::linalg::{self, CMatrix};
use crate::matrix::SpatialMatrix;
use crate::parallel::map_indexed;
use crate::patterns::{translate_pattern, PatternGrid};

/// Ψ = (tr R)² / ‖R‖²_F, the equivalent number of uncorrelated antennas.
pub fn diversity<M: SpatialMatrix + ?Sized>(r: &M) -> Result<f64> {
    let m = r.entries();
    let trace: f64 = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
    let fro = linalg::frobenius_sq(m);
    if !(fro > 0.0) {
        return Err(Error::DegenerateInput("diversity of a zero matrix".into()));
    }
    Ok(trace * trace / fro)
}

/// Eigenvalues in descending order, clamped at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSpectrum {
    eigenvalues: Vec<f64>,
}

impl EigenSpectrum {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(
                "eigenvalues must be finite and non-negative",
            ));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            eigenvalues: values,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

pub fn eigen_spectrum<M: SpatialMatrix + ?Sized>(r: &M) -> Result<EigenSpectrum> {
    let (values, _) = linalg::psd_eigen(r.entries())?;
    EigenSpectrum::from_values(values)
}

/// Number of eigenvalues at least `threshold_rel` times the largest.
pub fn effective_dof(spectrum: &EigenSpectrum, threshold_rel: f64) -> usize {
    let cut = threshold_rel * spectrum.largest();
    spectrum
        .eigenvalues
        .iter()
        .filter(|v| **v >= cut && **v > 0.0)
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// E‖H_w‖²_F = N_t N_r.
    Standard,
    /// E‖H_w‖²_F = N_t N_{λ0/2}: array gain capped at the half-wave count.
    HalfwaveCapped,
}

/// Spacing facts the channel normalization depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryContext {
    pub min_spacing: f64,
    pub n_halfwave: usize,
}

impl GeometryContext {
    /// Lateral (aperture-plane) spacing and the half-wave count of a row array.
    pub fn from_geometry(g: &ArrayGeometry) -> Self {
        Self {
            min_spacing: g.min_lateral_spacing(),
            n_halfwave: g.n_halfwave(),
        }
    }

    /// Context that always selects the standard normalization.
    pub fn uncapped() -> Self {
        Self {
            min_spacing: f64::INFINITY,
            n_halfwave: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    pub snr_db: f64,
    pub n_t: usize,
    pub trials: usize,
    pub seed: u64,
    pub context: GeometryContext,
}

impl CapacityParams {
    /// N_t = N_r, 2000 trials.
    pub fn new(snr_db: f64, n_r: usize, seed: u64, context: GeometryContext) -> Self {
        Self {
            snr_db,
            n_t: n_r,
            trials: 2000,
            seed,
            context,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub mean_bits_per_s_per_hz: f64,
    pub half_width_95: f64,
    pub trials: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub normalization_mode: NormalizationMode,
}

/// Deterministic per-trial generator: stream `trial` of the seed's ChaCha8 sequence.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Monte-Carlo E{log2 det(I + (γ/N_t) R H_w H_w^H)} with i.i.d. CN entries in H_w.
pub fn ergodic_capacity<M: SpatialMatrix + ?Sized>(
    r: &M,
    params: &CapacityParams,
) -> Result<CapacityEstimate> {
    if params.snr_db.is_nan() {
        return Err(Error::invalid("SNR is NaN"));
    }
    if params.n_t == 0 || params.trials == 0 {
        return Err(Error::invalid(
            "transmit antennas and trials must be positive",
        ));
    }
    let n_r = r.order();
    let root = linalg::psd_sqrt(r.entries()).map_err(|e| Error::invalid(e.to_string()))?;

    let (mode, effective_rx) = if params.context.min_spacing >= 0.5 {
        (NormalizationMode::Standard, n_r)
    } else {
        (NormalizationMode::HalfwaveCapped, params.context.n_halfwave)
    };
    // per-entry variance so that E‖H_w‖² = N_t · effective_rx
    let sigma = (effective_rx as f64 / n_r as f64 / 2.0).sqrt();
    let gamma = 10f64.powf(params.snr_db / 10.0);
    let scale = gamma / params.n_t as f64;
    let n_t = params.n_t;

    let samples: Vec<Result<f64>> = map_indexed(params.trials, |t| {
        let mut rng = trial_rng(params.seed, t as u64);
        let h = CMatrix::from_fn(n_r, n_t, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * sigma, im * sigma)
        });
        let g = &root * h;
        let mut m = &g * g.adjoint() * Complex64::new(scale, 0.0);
        for i in 0..n_r {
            m[(i, i)] += 1.0;
        }
        Ok(linalg::ln_det_hpd(m)? / std::f64::consts::LN_2)
    });
    let samples = samples.into_iter().collect::<Result<Vec<f64>>>()?;

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let half_width = if samples.len() > 1 {
        let var = samples.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        1.96 * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(CapacityEstimate {
        mean_bits_per_s_per_hz: mean.max(0.0),
        half_width_95: half_width,
        trials: params.trials,
        seed: params.seed,
        snr_db: params.snr_db,
        normalization_mode: mode,
    })
}

/// Realized gain along the xz-plane cut. Observation angles run from −90°
/// (toward −x) to +90° (toward +x); positive angles sit at φ = 0, negative at φ = π.
#[derive(Clone, Debug, PartialEq)]
pub struct GainPattern {
    pub observation_deg: Vec<f64>,
    pub gain_linear: Vec<f64>,
    /// Gain toward the scan direction itself.
    pub gain_at_scan: f64,
    pub scan_deg: f64,
}

impl GainPattern {
    pub fn peak(&self) -> f64 {
        self.gain_linear.iter().copied().fold(0.0, f64::max)
    }
}

/// Co-phasal excitation toward `scan_angle` (radians from broadside in the xz-plane).
///
/// `patterns[i]` is the embedded pattern of element `i` with its phase centre
/// at its own `position()`; it is moved to the geometry's element position
/// before combining. Gain is 4π U(dir) / P_rad with the total radiated power
/// integrated on the pattern grid.
pub fn beamforming_gain(
    geometry: &ArrayGeometry,
    patterns: &[PatternGrid],
    scan_angle: f64,
) -> Result<GainPattern> {
    if geometry.is_empty() || patterns.is_empty() {
        return Err(Error::invalid("empty geometry or pattern list"));
    }
    if patterns.len() != geometry.len() {
        return Err(Error::invalid(format!(
            "{} patterns for {} elements",
            patterns.len(),
            geometry.len()
        )));
    }
    if !(scan_angle.abs() <= PI / 2.0) {
        return Err(Error::invalid("scan angle must lie within ±90°"));
    }
    let grid = patterns[0].grid();
    if patterns.iter().any(|p| p.grid() != grid) {
        return Err(Error::invalid("patterns do not share identical angle axes"));
    }

    let (scan_theta, scan_phi) = cut_to_spherical(scan_angle);
    let k_scan = direction(scan_theta, scan_phi);

    // Element fields toward the scan direction: interpolate the smooth local
    // pattern, then apply the exact position phase.
    let local: Vec<(Complex64, Complex64)> = patterns
        .iter()
        .map(|p| p.sample(scan_theta, scan_phi))
        .collect();
    let pol_theta: f64 = local.iter().map(|(t, _)| t.norm_sqr()).sum();
    let pol_phi: f64 = local.iter().map(|(_, p)| p.norm_sqr()).sum();
    let weights: Vec<Complex64> = local
        .iter()
        .zip(patterns)
        .zip(geometry.elements())
        .map(|(((et, ep), p), r)| {
            let own = p.position();
            let d = [r[0] - own[0], r[1] - own[1], r[2] - own[2]];
            let shift = Complex64::from_polar(
                1.0,
                K0 * (k_scan[0] * d[0] + k_scan[1] * d[1] + k_scan[2] * d[2]),
            );
            let co = if pol_theta >= pol_phi {
                et * shift
            } else {
                ep * shift
            };
            if co.norm() > 0.0 {
                co.conj() / co.norm()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();

    let placed: Vec<PatternGrid> = patterns
        .iter()
        .zip(geometry.elements())
        .map(|(p, r)| {
            let own = p.position();
            translate_pattern(p, [r[0] - own[0], r[1] - own[1], r[2] - own[2]])
        })
        .collect();

    let n = grid.len();
    let mut total_theta = vec![Complex64::new(0.0, 0.0); n];
    let mut total_phi = vec![Complex64::new(0.0, 0.0); n];
    for (w, p) in weights.iter().zip(&placed) {
        for k in 0..n {
            total_theta[k] += w * p.e_theta()[k];
            total_phi[k] += w * p.e_phi()[k];
        }
    }
    let n_phi = grid.n_phi();
    let mut radiated = 0.0;
    for (i, wt) in grid.theta_weights().iter().enumerate() {
        for (j, wp) in grid.phi_weights().iter().enumerate() {
            let k = i * n_phi + j;
            radiated += wt * wp * (total_theta[k].norm_sqr() + total_phi[k].norm_sqr());
        }
    }
    if !(radiated > 0.0) {
        return Err(Error::DegenerateInput("array radiates no power".into()));
    }

    // Field of the excited array toward an arbitrary direction, evaluated
    // exactly from the local patterns rather than interpolating the sum.
    let field_power = |theta: f64, phi: f64| {
        let k = direction(theta, phi);
        let mut et = Complex64::new(0.0, 0.0);
        let mut ep = Complex64::new(0.0, 0.0);
        for ((w, p), r) in weights.iter().zip(patterns).zip(geometry.elements()) {
            let (lt, lp) = p.sample(theta, phi);
            let own = p.position();
            let d = [r[0] - own[0], r[1] - own[1], r[2] - own[2]];
            let shift = Complex64::from_polar(1.0, K0 * (k[0] * d[0] + k[1] * d[1] + k[2] * d[2]));
            et += w * lt * shift;
            ep += w * lp * shift;
        }
        et.norm_sqr() + ep.norm_sqr()
    };

    let observation_deg: Vec<f64> = (-900..=900).map(|d| d as f64 / 10.0).collect();
    let gain_linear = observation_deg
        .iter()
        .map(|deg| {
            let (t, p) = cut_to_spherical(deg.to_radians());
            4.0 * PI * field_power(t, p) / radiated
        })
        .collect();
    let gain_at_scan = 4.0 * PI * field_power(scan_theta, scan_phi) / radiated;
    Ok(GainPattern {
        observation_deg,
        gain_linear,
        gain_at_scan,
        scan_deg: scan_angle.to_degrees(),
    })
}

fn cut_to_spherical(angle: f64) -> (f64, f64) {
    if angle >= 0.0 {
        (angle, 0.0)
    } else {
        (-angle, PI)
    }
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Planar-aperture gain limit 4πA cos θ0 with A in λ0².
pub fn gain_limit_2d(aperture_area: f64, scan_angle: f64) -> Result<f64> {
    if !(aperture_area > 0.0) {
        return Err(Error::invalid("aperture area must be positive"));
    }
    if !(scan_angle.abs() < PI / 2.0) {
        return Err(Error::invalid("scan angle must lie strictly within ±90°"));
    }
    Ok(4.0 * PI * aperture_area * scan_angle.cos())
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{CorrelationMatrix, CovarianceMatrix};
    use crate::patterns::isotropic_pattern;

    fn real_matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| Complex64::new(f(i, j), 0.0))
    }

    #[test]
    fn diversity_examples() {
        assert!((diversity(&CorrelationMatrix::identity(4)).unwrap() - 4.0).abs() < 1e-12);
        let ones = CorrelationMatrix::new(real_matrix(3, |_, _| 1.0)).unwrap();
        assert!((diversity(&ones).unwrap() - 1.0).abs() < 1e-12);
        let half =
            CorrelationMatrix::new(real_matrix(2, |i, j| if i == j { 1.0 } else { 0.5 })).unwrap();
        assert!((diversity(&half).unwrap() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let zero = CovarianceMatrix::new(CMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(diversity(&zero), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn spectra() {
        let s = eigen_spectrum(&CorrelationMatrix::identity(3)).unwrap();
        assert!(s.eigenvalues().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let ones = CorrelationMatrix::new(real_matrix(4, |_, _| 1.0)).unwrap();
        let s = eigen_spectrum(&ones).unwrap();
        assert!((s.eigenvalues()[0] - 4.0).abs() < 1e-12);
        assert!(s.eigenvalues()[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn effective_dof_counts() {
        let id = eigen_spectrum(&CorrelationMatrix::identity(5)).unwrap();
        assert_eq!(effective_dof(&id, 0.1), 5);
        let s = EigenSpectrum::from_values(vec![0.01, 10.0, 0.5]).unwrap();
        assert_eq!(s.eigenvalues(), &[10.0, 0.5, 0.01]);
        assert_eq!(effective_dof(&s, 0.04), 2);
    }

    #[test]
    fn zero_snr_limit() {
        let p = CapacityParams::new(-100.0, 4, 7, GeometryContext::uncapped()).with_trials(200);
        let c = ergodic_capacity(&CorrelationMatrix::identity(4), &p).unwrap();
        assert!(c.mean_bits_per_s_per_hz < 1e-4);
    }

    #[test]
    fn capacity_rejects_nan_snr() {
        let p = CapacityParams::new(f64::NAN, 1, 7, GeometryContext::uncapped());
        assert!(matches!(
            ergodic_capacity(&CorrelationMatrix::identity(1), &p),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn capacity_is_reproducible() {
        let p = CapacityParams::new(10.0, 3, 99, GeometryContext::uncapped()).with_trials(300);
        let a = ergodic_capacity(&CorrelationMatrix::identity(3), &p).unwrap();
        let b = ergodic_capacity(&CorrelationMatrix::identity(3), &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normalization_mode_selection() {
        let close = GeometryContext {
            min_spacing: 0.25,
            n_halfwave: 3,
        };
        let p = CapacityParams::new(10.0, 5, 1, close).with_trials(10);
        let c = ergodic_capacity(&CorrelationMatrix::identity(5), &p).unwrap();
        assert_eq!(c.normalization_mode, NormalizationMode::HalfwaveCapped);
        let p = CapacityParams::new(10.0, 5, 1, GeometryContext::uncapped()).with_trials(10);
        let c = ergodic_capacity(&CorrelationMatrix::identity(5), &p).unwrap();
        assert_eq!(c.normalization_mode, NormalizationMode::Standard);
    }

    #[test]
    fn gain_limit_values() {
        assert!((gain_limit_2d(1.0, 0.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((to_db(gain_limit_2d(1.0, 0.0).unwrap()) - 10.99).abs() < 0.01);
        let drop =
            to_db(gain_limit_2d(1.0, 0.0).unwrap()) - to_db(gain_limit_2d(1.0, PI / 3.0).unwrap());
        assert!((drop - 10.0 * 2f64.log10()).abs() < 1e-12);
        let a = gain_limit_2d(2.5, 35f64.to_radians()).unwrap();
        assert!((a - 4.0 * PI * 2.5 * 35f64.to_radians().cos()).abs() < 1e-12);
        assert!(gain_limit_2d(0.0, 0.0).is_err());
        assert!(gain_limit_2d(1.0, PI / 2.0).is_err());
    }

    #[test]
    fn single_isotropic_element_is_zero_dbi() {
        let g = ArrayGeometry::linear_2d(1, 0.5).unwrap();
        let gp = beamforming_gain(&g, &[isotropic_pattern(91, 180).unwrap()], 0.3).unwrap();
        for v in &gp.gain_linear {
            assert!(to_db(*v).abs() < 1e-3);
        }
    }

    #[test]
    fn gain_argument_errors() {
        let g = ArrayGeometry::linear_2d(2, 0.5).unwrap();
        assert!(beamforming_gain(&g, &[], 0.0).is_err());
        assert!(beamforming_gain(&g, &[isotropic_pattern(19, 36).unwrap()], 0.0).is_err());
    }
}
