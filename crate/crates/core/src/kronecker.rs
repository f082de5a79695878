//! Kronecker-model receive covariance R = Φ ∘ Ξ built from embedded patterns,
//! an angular power spectrum and S-parameter embedded efficiencies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::matrix::{hermitize_upper, CorrelationMatrix, CovarianceMatrix, SpatialMatrix};
use crate::parallel::map_indexed;
use crate::patterns::{AngleGrid, PatternGrid};

/// Power spectra P_θ, P_φ sampled on a pattern grid (θ-major) and the XPD κ.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularPowerSpectrum {
    n_theta: usize,
    n_phi: usize,
    p_theta: Vec<f64>,
    p_phi: Vec<f64>,
    xpd: f64,
}

impl AngularPowerSpectrum {
    pub fn new(grid: &AngleGrid, p_theta: Vec<f64>, p_phi: Vec<f64>, xpd: f64) -> Result<Self> {
        if p_theta.len() != grid.len() || p_phi.len() != grid.len() {
            return Err(Error::invalid("spectrum samples do not match the grid"));
        }
        if !(xpd > 0.0) || !xpd.is_finite() {
            return Err(Error::invalid(format!("XPD must be positive, got {xpd}")));
        }
        if p_theta
            .iter()
            .chain(&p_phi)
            .any(|p| !(*p >= 0.0) || !p.is_finite())
        {
            return Err(Error::invalid(
                "spectrum samples must be finite and non-negative",
            ));
        }
        if p_theta.iter().chain(&p_phi).all(|p| *p == 0.0) {
            return Err(Error::DegenerateInput(
                "spectrum is identically zero".into(),
            ));
        }
        Ok(Self {
            n_theta: grid.n_theta(),
            n_phi: grid.n_phi(),
            p_theta,
            p_phi,
            xpd,
        })
    }

    /// Uniform power inside the cap θ ≤ `half_angle` about broadside, zero
    /// outside, equal for both polarizations, κ = 1.
    ///
    /// Each θ row holds the fraction of its quadrature weight that lies inside
    /// the cap, so a cap edge falling between samples is integrated exactly.
    pub fn uniform_cap(grid: &AngleGrid, half_angle: f64) -> Result<Self> {
        if !(half_angle > 0.0) {
            return Err(Error::invalid(format!(
                "cap half-angle must be positive, got {half_angle}"
            )));
        }
        let inside = grid.theta_weights_within(0.0, half_angle);
        let row: Vec<f64> = inside
            .iter()
            .zip(grid.theta_weights())
            .map(|(a, full)| {
                if *full > 0.0 {
                    (a / full).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let samples: Vec<f64> = row
            .iter()
            .flat_map(|v| std::iter::repeat_n(*v, grid.n_phi()))
            .collect();
        Self::new(grid, samples.clone(), samples, 1.0)
    }

    pub fn uniform_cap_deg(grid: &AngleGrid, half_angle_deg: f64) -> Result<Self> {
        Self::uniform_cap(grid, half_angle_deg.to_radians())
    }

    pub fn xpd(&self) -> f64 {
        self.xpd
    }

    pub fn p_theta(&self) -> &[f64] {
        &self.p_theta
    }

    pub fn p_phi(&self) -> &[f64] {
        &self.p_phi
    }
}

/// Pattern correlation: ρ_mn = ∮G_mn / sqrt(∮G_mm ∮G_nn) with
/// G_mn = κ E_θm E*_θn P_θ + E_φm E*_φn P_φ. κ weights only the θ term.
pub fn pattern_correlation(
    patterns: &[PatternGrid],
    spectrum: &AngularPowerSpectrum,
) -> Result<CorrelationMatrix> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::invalid("need at least one pattern"))?;
    let grid = first.grid();
    if patterns.iter().any(|p| p.grid() != grid) {
        return Err(Error::invalid("patterns do not share identical angle axes"));
    }
    if spectrum.n_theta != grid.n_theta() || spectrum.n_phi != grid.n_phi() {
        return Err(Error::invalid("spectrum is sampled on a different grid"));
    }

    // Fold quadrature weight and spectrum into per-node factors.
    let n_phi = grid.n_phi();
    let mut w_theta = Vec::with_capacity(grid.len());
    let mut w_phi = Vec::with_capacity(grid.len());
    for (i, wt) in grid.theta_weights().iter().enumerate() {
        for (j, wp) in grid.phi_weights().iter().enumerate() {
            let k = i * n_phi + j;
            w_theta.push(wt * wp * spectrum.p_theta[k] * spectrum.xpd);
            w_phi.push(wt * wp * spectrum.p_phi[k]);
        }
    }

    let n = patterns.len();
    let gram_rows: Vec<Vec<Complex64>> = map_indexed(n, |m| {
        let pm = &patterns[m];
        (m..n)
            .map(|k| {
                let pk = &patterns[k];
                let mut acc = Complex64::new(0.0, 0.0);
                for idx in 0..w_theta.len() {
                    acc += pm.e_theta()[idx] * pk.e_theta()[idx].conj() * w_theta[idx]
                        + pm.e_phi()[idx] * pk.e_phi()[idx].conj() * w_phi[idx];
                }
                acc
            })
            .collect()
    });

    let power: Vec<f64> = gram_rows.iter().map(|row| row[0].re).collect();
    if let Some(i) = power.iter().position(|p| !(*p > 0.0)) {
        return Err(Error::DegenerateInput(format!(
            "pattern {i} receives no power under the given spectrum"
        )));
    }
    let mut entries = CMatrix::zeros(n, n);
    for (m, row) in gram_rows.into_iter().enumerate() {
        for (offset, g) in row.into_iter().enumerate() {
            let k = m + offset;
            entries[(m, k)] = if k == m {
                Complex64::new(1.0, 0.0)
            } else {
                g / (power[m] * power[k]).sqrt()
            };
        }
    }
    hermitize_upper(&mut entries);
    CorrelationMatrix::new(entries)
}

/// N-port S-parameters; `data[f][(m, n)]` is S_mn at `frequencies[f]` (Hz).
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringMatrix {
    frequencies: Vec<f64>,
    data: Vec<CMatrix>,
    reference_impedance: f64,
}

impl ScatteringMatrix {
    pub fn new(
        frequencies: Vec<f64>,
        data: Vec<CMatrix>,
        reference_impedance: f64,
    ) -> Result<Self> {
        if frequencies.len() != data.len() {
            return Err(Error::invalid("one matrix per frequency is required"));
        }
        if frequencies.iter().any(|f| !f.is_finite())
            || frequencies.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::invalid(
                "frequencies must be finite and strictly ascending",
            ));
        }
        let ports = data.first().map_or(0, |m| m.nrows());
        for m in &data {
            if m.nrows() != ports || m.ncols() != ports {
                return Err(Error::invalid(
                    "S matrices must be square with a common port count",
                ));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::invalid("S matrices contain non-finite entries"));
            }
        }
        if !(reference_impedance > 0.0) || !reference_impedance.is_finite() {
            return Err(Error::invalid("reference impedance must be positive"));
        }
        Ok(Self {
            frequencies,
            data,
            reference_impedance,
        })
    }

    pub fn port_count(&self) -> usize {
        self.data.first().map_or(0, |m| m.nrows())
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn data(&self) -> &[CMatrix] {
        &self.data
    }

    pub fn reference_impedance(&self) -> f64 {
        self.reference_impedance
    }

    /// Index of the sample within 1e-6 relative of `frequency`.
    pub fn frequency_index(&self, frequency: f64) -> Result<usize> {
        self.frequencies
            .iter()
            .enumerate()
            .map(|(i, f)| (i, (f - frequency).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .filter(|(i, d)| *d <= 1e-6 * self.frequencies[*i].abs().max(frequency.abs()))
            .map(|(i, _)| i)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "frequency {frequency} Hz not present in S-parameter data"
                ))
            })
    }

    /// Largest singular value of S at sample `index` stays within 1 + 1e-6.
    pub fn is_passive_at(&self, index: usize) -> bool {
        let s = &self.data[index];
        let sv = s.clone().svd(false, false).singular_values;
        sv.iter().all(|v| *v <= 1.0 + 1e-6)
    }
}

/// Per-port embedded efficiencies in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyVector {
    values: Vec<f64>,
    /// Ports whose raw value fell below zero and were clamped.
    clamped: Vec<usize>,
}

impl EfficiencyVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::invalid("efficiencies must lie in [0, 1]"));
        }
        Ok(Self {
            values,
            clamped: Vec::new(),
        })
    }

    pub fn ideal(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
            clamped: Vec::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn clamped_ports(&self) -> &[usize] {
        &self.clamped
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// e_n = 1 − Σ_m |S_mn|², clamped at zero (with a warning) for non-passive data.
pub fn embedded_efficiency(s: &ScatteringMatrix, frequency: f64) -> Result<EfficiencyVector> {
    let idx = s.frequency_index(frequency)?;
    let m = &s.data()[idx];
    let mut values = Vec::with_capacity(m.ncols());
    let mut clamped = Vec::new();
    for n in 0..m.ncols() {
        let coupled: f64 = (0..m.nrows()).map(|r| m[(r, n)].norm_sqr()).sum();
        let e = 1.0 - coupled;
        if e < 0.0 {
            log::warn!(
                "port {}: column power {coupled} exceeds 1, efficiency clamped to 0",
                n + 1
            );
            clamped.push(n);
        }
        values.push(e.clamp(0.0, 1.0));
    }
    Ok(EfficiencyVector { values, clamped })
}

/// R_mn = ρ_mn √(e_m e_n).
pub fn covariance(phi: &CorrelationMatrix, e: &EfficiencyVector) -> Result<CovarianceMatrix> {
    let n = phi.order();
    if e.len() != n {
        return Err(Error::invalid(format!(
            "efficiency vector has {} entries, correlation matrix order is {n}",
            e.len()
        )));
    }
    let root: Vec<f64> = e.values().iter().map(|v| v.sqrt()).collect();
    let mut entries = phi.entries().clone();
    for m in 0..n {
        for k in 0..n {
            entries[(m, k)] *= root[m] * root[k];
        }
    }
    for m in 0..n {
        entries[(m, m)] = Complex64::new(e.values()[m], 0.0);
    }
    CovarianceMatrix::new(entries)
}
