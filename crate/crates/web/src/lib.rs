//! Browser bindings for three interactive views: Clarke diversity versus
//! spacing, a realized-gain cut and a correlation-magnitude heatmap.
//!
//! Each export is a thin wrapper over a plain Rust function so the numbers can
//! be tested natively.

use holomimo::metrics::to_db;
use holomimo::pipeline::{local_patterns, ElementModel};
use holomimo::{
    beamforming_gain, clarke_correlation, diversity, gain_limit_2d, AngularSpectrum, ArrayGeometry,
    QuadratureSpec, Result,
};
use wasm_bindgen::prelude::*;

const NODES: usize = 1024;

fn row(count: usize, spacing: f64, h: f64) -> Result<ArrayGeometry> {
    if h == 0.0 {
        ArrayGeometry::linear_2d(count, spacing)
    } else {
        ArrayGeometry::linear_3d(count, spacing, h)
    }
}

/// Clarke diversity on a fixed aperture for each requested spacing.
pub fn diversity_points(
    aperture: f64,
    h: f64,
    spread_deg: f64,
    spacings: &[f64],
) -> Result<Vec<f64>> {
    let spectrum = AngularSpectrum::broadside_deg(spread_deg)?;
    let quad = QuadratureSpec::fibonacci(NODES);
    spacings
        .iter()
        .map(|d| {
            let n = (aperture / d).round().max(1.0) as usize + 1;
            let g = row(n, aperture / (n - 1) as f64, h)?;
            diversity(&clarke_correlation(&g, &spectrum, &quad)?)
        })
        .collect()
}

/// Gain cut in dBi from −90° to 90° in 0.1° steps, followed by the planar
/// limit in dBi at the scan angle for a strip half a wavelength deep.
pub fn gain_points(count: usize, spacing: f64, h: f64, scan_deg: f64) -> Result<Vec<f64>> {
    let g = row(count, spacing, h)?;
    let model = ElementModel::default().with_resolution(91, 180);
    let cut = beamforming_gain(&g, &local_patterns(&g, &model)?, scan_deg.to_radians())?;
    let limit = gain_limit_2d(g.aperture_length() * 0.5, scan_deg.to_radians())?;
    let mut out: Vec<f64> = cut.gain_linear.iter().map(|v| to_db(*v)).collect();
    out.push(to_db(limit));
    Ok(out)
}

/// |ρ_mn| in row-major order.
pub fn heatmap_points(count: usize, spacing: f64, h: f64, spread_deg: f64) -> Result<Vec<f64>> {
    let g = row(count, spacing, h)?;
    let rho = clarke_correlation(
        &g,
        &AngularSpectrum::broadside_deg(spread_deg)?,
        &QuadratureSpec::fibonacci(NODES),
    )?;
    Ok((0..count)
        .flat_map(|m| (0..count).map(move |n| (m, n)))
        .map(|(m, n)| rho.get(m, n).norm())
        .collect())
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn diversity_curve(
    aperture: f64,
    h: f64,
    spread_deg: f64,
    spacings: Vec<f64>,
) -> std::result::Result<Vec<f64>, JsError> {
    js(diversity_points(aperture, h, spread_deg, &spacings))
}

#[wasm_bindgen]
pub fn gain_cut(
    count: usize,
    spacing: f64,
    h: f64,
    scan_deg: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    js(gain_points(count, spacing, h, scan_deg))
}

#[wasm_bindgen]
pub fn correlation_heatmap(
    count: usize,
    spacing: f64,
    h: f64,
    spread_deg: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    js(heatmap_points(count, spacing, h, spread_deg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_wave_full_sphere_row_is_uncorrelated() {
        let psi = diversity_points(2.0, 0.0, 180.0, &[0.5]).unwrap();
        assert!((psi[0] - 5.0).abs() < 0.05, "{psi:?}");
    }

    #[test]
    fn raised_row_adds_diversity() {
        let flat = diversity_points(5.0, 0.0, 90.0, &[0.25]).unwrap();
        let raised = diversity_points(5.0, 0.5, 90.0, &[0.25]).unwrap();
        assert!(raised[0] > 1.15 * flat[0]);
    }

    #[test]
    fn gain_cut_has_limit_appended() {
        let v = gain_points(5, 0.5, 0.0, 0.0).unwrap();
        assert_eq!(v.len(), 1802);
        let limit = 10.0 * (4.0 * std::f64::consts::PI * 2.0 * 0.5).log10();
        assert!((v[1801] - limit).abs() < 1e-12);
        let peak = v[..1801].iter().copied().fold(f64::MIN, f64::max);
        assert!((v[900] - peak).abs() < 0.5);
    }

    #[test]
    fn heatmap_is_symmetric_with_unit_diagonal() {
        let n = 4;
        let v = heatmap_points(n, 0.3, 0.5, 60.0).unwrap();
        for m in 0..n {
            assert!((v[m * n + m] - 1.0).abs() < 1e-12);
            for k in 0..n {
                assert!((v[m * n + k] - v[k * n + m]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(heatmap_points(0, 0.3, 0.0, 60.0).is_err());
        assert!(diversity_points(2.0, 0.0, -5.0, &[0.5]).is_err());
    }
}
