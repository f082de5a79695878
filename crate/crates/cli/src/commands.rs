//! One function per subcommand: resolved config in, report out.

use std::path::Path;

use holomimo::channel3gpp::run_scenario;
use holomimo::io::records::{percent_increase, SummaryRow};
use holomimo::io::touchstone::read_touchstone;
use holomimo::io::{load_pattern_grid, parse_touchstone};
use holomimo::kronecker::AngularPowerSpectrum;
use holomimo::metrics::to_db;
use holomimo::pipeline::{embedded_patterns, local_patterns, ElementModel};
use holomimo::{
    beamforming_gain, clarke_correlation, covariance, diversity, embedded_efficiency,
    ergodic_capacity, gain_limit_2d, pattern_correlation, translate_pattern, AngularSpectrum,
    ArrayGeometry, CapacityParams, CovarianceMatrix, EfficiencyVector, GeometryContext,
    PatternGrid, QuadratureSpec, SpatialMatrix,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    sweep_geometry, CapacityConfig, ClarkeConfig, CorrelationModel, GainConfig, KroneckerConfig,
    UmaConfig, VariantSpec,
};
use crate::failure::Failure;
use crate::output::Report;

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub elements: usize,
    pub spacing: f64,
    pub h: f64,
    pub spread_deg: f64,
    pub snr_db: Option<f64>,
    pub diversity: f64,
    pub capacity: Option<f64>,
    pub ci95: Option<f64>,
}

/// (h, spacing, spread) in config order: heights outermost.
fn grid_points(spacings: &[f64], heights: &[f64], spreads: &[f64]) -> Vec<(f64, f64, f64)> {
    heights
        .iter()
        .flat_map(|h| {
            spacings
                .iter()
                .flat_map(move |d| spreads.iter().map(move |s| (*h, *d, *s)))
        })
        .collect()
}

fn geometry_for(aperture: f64, spacing: f64, h: f64) -> Result<ArrayGeometry, Failure> {
    sweep_geometry(aperture, spacing, h)
        .map_err(|e| Failure::Config(format!("spacing {spacing}, h {h}: {e}")))
}

pub fn clarke(cfg: &ClarkeConfig) -> Result<Report<SweepRow>, Failure> {
    cfg.validate()?;
    let points = grid_points(&cfg.spacings, &cfg.heights, &cfg.spreads_deg);
    let quad = QuadratureSpec::fibonacci(cfg.quadrature_nodes);
    let rows = points
        .par_iter()
        .map(|&(h, d, s)| {
            let g = geometry_for(cfg.aperture, d, h)?;
            let spec = AngularSpectrum::broadside_deg(s).map_err(Failure::numeric)?;
            let rho = clarke_correlation(&g, &spec, &quad).map_err(Failure::numeric)?;
            Ok(SweepRow {
                elements: g.len(),
                spacing: g.min_lateral_spacing(),
                h,
                spread_deg: s,
                snr_db: None,
                diversity: diversity(&rho).map_err(Failure::numeric)?,
                capacity: None,
                ci95: None,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report::new("clarke", cfg, cfg.seed, rows))
}

fn capacity_rows<M: SpatialMatrix + Sync>(
    r: &M,
    g: &ArrayGeometry,
    h: f64,
    spread: f64,
    snrs: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, Failure> {
    let psi = diversity(r).map_err(Failure::numeric)?;
    let ctx = GeometryContext::from_geometry(g);
    snrs.iter()
        .map(|snr| {
            let params = CapacityParams::new(*snr, g.len(), seed, ctx).with_trials(trials);
            let c = ergodic_capacity(r, &params).map_err(Failure::numeric)?;
            Ok(SweepRow {
                elements: g.len(),
                spacing: g.min_lateral_spacing(),
                h,
                spread_deg: spread,
                snr_db: Some(*snr),
                diversity: psi,
                capacity: Some(c.mean_bits_per_s_per_hz),
                ci95: Some(c.half_width_95),
            })
        })
        .collect()
}

pub fn capacity(cfg: &CapacityConfig) -> Result<Report<SweepRow>, Failure> {
    cfg.validate()?;
    let points = grid_points(&cfg.spacings, &cfg.heights, &cfg.spreads_deg);
    let quad = QuadratureSpec::fibonacci(cfg.quadrature_nodes);
    let rows = points
        .par_iter()
        .map(|&(h, d, s)| {
            let g = geometry_for(cfg.aperture, d, h)?;
            match cfg.correlation {
                CorrelationModel::Clarke => {
                    let spec = AngularSpectrum::broadside_deg(s).map_err(Failure::numeric)?;
                    let rho = clarke_correlation(&g, &spec, &quad).map_err(Failure::numeric)?;
                    capacity_rows(&rho, &g, h, s, &cfg.snrs_db, cfg.trials, cfg.seed)
                }
                CorrelationModel::Kronecker => {
                    let r = holomimo::pipeline::kronecker_covariance(
                        &g,
                        &cfg.element,
                        s.to_radians(),
                        None,
                    )
                    .map_err(Failure::numeric)?;
                    capacity_rows(&r, &g, h, s, &cfg.snrs_db, cfg.trials, cfg.seed)
                }
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report::new("capacity", cfg, cfg.seed, rows.concat()))
}

/// Patterns for one variant with phase centres at their element positions.
fn placed_patterns(
    spec: &VariantSpec,
    g: &ArrayGeometry,
    model: &ElementModel,
) -> Result<Vec<PatternGrid>, Failure> {
    if spec.pattern_files.is_empty() {
        return embedded_patterns(g, model).map_err(Failure::numeric);
    }
    let loaded = load_patterns(spec)?;
    Ok(g.elements()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = &loaded[if loaded.len() == 1 { 0 } else { i }];
            let at = p.position();
            translate_pattern(p, [r[0] - at[0], r[1] - at[1], r[2] - at[2]])
        })
        .collect())
}

/// Patterns as handed to the gain evaluation, which places them itself.
fn element_patterns(
    spec: &VariantSpec,
    g: &ArrayGeometry,
    model: &ElementModel,
) -> Result<Vec<PatternGrid>, Failure> {
    if spec.pattern_files.is_empty() {
        return local_patterns(g, model).map_err(Failure::numeric);
    }
    let loaded = load_patterns(spec)?;
    Ok((0..g.len())
        .map(|i| loaded[if loaded.len() == 1 { 0 } else { i }].clone())
        .collect())
}

fn load_patterns(spec: &VariantSpec) -> Result<Vec<PatternGrid>, Failure> {
    spec.pattern_files
        .iter()
        .map(|p| load_pattern_grid(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))))
        .collect()
}

fn efficiencies(spec: &VariantSpec, n: usize) -> Result<EfficiencyVector, Failure> {
    let (Some(path), Some(f)) = (&spec.touchstone, spec.frequency_hz) else {
        return Ok(EfficiencyVector::ideal(n));
    };
    let s =
        parse_touchstone(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if s.port_count() != n {
        return Err(Failure::Config(format!(
            "variant {}: {} has {} ports for {n} elements",
            spec.name,
            path.display(),
            s.port_count()
        )));
    }
    embedded_efficiency(&s, f).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub spread_deg: f64,
    pub snr_db: f64,
    pub variant: String,
    pub elements: usize,
    pub diversity: f64,
    pub capacity: f64,
    pub ci95: f64,
    pub diversity_increase_pct: f64,
    pub capacity_increase_pct: f64,
}

pub fn kronecker(cfg: &KroneckerConfig) -> Result<Report<ComparisonRow>, Failure> {
    cfg.validate()?;
    struct Prepared {
        geometry: ArrayGeometry,
        patterns: Vec<PatternGrid>,
        efficiency: EfficiencyVector,
    }
    let prepared = cfg
        .variants
        .iter()
        .map(|v| {
            let geometry = v.geometry()?;
            let patterns = placed_patterns(v, &geometry, &cfg.element)?;
            let efficiency = efficiencies(v, geometry.len())?;
            Ok(Prepared {
                geometry,
                patterns,
                efficiency,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let covariance_for = |p: &Prepared, spread: f64| -> Result<CovarianceMatrix, Failure> {
        let aps = AngularPowerSpectrum::uniform_cap_deg(p.patterns[0].grid(), spread)
            .map_err(Failure::numeric)?;
        let phi = pattern_correlation(&p.patterns, &aps).map_err(Failure::numeric)?;
        covariance(&phi, &p.efficiency).map_err(Failure::numeric)
    };

    let mut rows = Vec::new();
    for &spread in &cfg.spreads_deg {
        let per_variant = prepared
            .par_iter()
            .zip(&cfg.variants)
            .map(|(p, spec)| {
                let r = covariance_for(p, spread)?;
                capacity_rows(
                    &r,
                    &p.geometry,
                    spec.h,
                    spread,
                    &cfg.snrs_db,
                    cfg.trials,
                    cfg.seed,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (k, &snr) in cfg.snrs_db.iter().enumerate() {
            let base = &per_variant[0][k];
            for (spec, variant_rows) in cfg.variants.iter().zip(&per_variant) {
                let r = &variant_rows[k];
                let (c, c0) = (r.capacity.unwrap_or(0.0), base.capacity.unwrap_or(0.0));
                rows.push(ComparisonRow {
                    spread_deg: spread,
                    snr_db: snr,
                    variant: spec.name.clone(),
                    elements: r.elements,
                    diversity: r.diversity,
                    capacity: c,
                    ci95: r.ci95.unwrap_or(0.0),
                    diversity_increase_pct: percent_increase(r.diversity, base.diversity),
                    capacity_increase_pct: percent_increase(c, c0),
                });
            }
        }
    }
    Ok(Report::new("kronecker", cfg, cfg.seed, rows))
}

#[derive(Clone, Debug, Serialize)]
pub struct GainRow {
    pub variant: String,
    pub scan_deg: f64,
    pub observation_deg: f64,
    pub gain_dbi: f64,
    /// Planar-aperture limit at the observation angle; empty at ±90°.
    pub limit_dbi: Option<f64>,
}

pub fn gain(cfg: &GainConfig) -> Result<Report<GainRow>, Failure> {
    cfg.validate()?;
    let jobs: Vec<(usize, f64)> = (0..cfg.variants.len())
        .flat_map(|v| cfg.scans_deg.iter().map(move |s| (v, *s)))
        .collect();
    let prepared = cfg
        .variants
        .iter()
        .map(|v| {
            let g = v.geometry()?;
            let p = element_patterns(v, &g, &cfg.element)?;
            Ok((g, p))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let results = jobs
        .par_iter()
        .map(|&(v, scan)| {
            let (g, p) = &prepared[v];
            let cut = beamforming_gain(g, p, scan.to_radians()).map_err(Failure::numeric)?;
            Ok((v, scan, g.aperture_length() * cfg.aperture_width, cut))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (v, scan, area, cut) in results {
        let limit = |deg: f64| gain_limit_2d(area, deg.to_radians()).ok().map(to_db);
        let name = &cfg.variants[v].name;
        let at_scan = to_db(cut.gain_at_scan);
        let limit_at_scan = limit(scan);
        summary.push(json!({
            "variant": name,
            "scan_deg": scan,
            "gain_dbi": at_scan,
            "limit_dbi": limit_at_scan,
            "margin_db": limit_at_scan.map(|l| at_scan - l),
        }));
        for (obs, g) in cut.observation_deg.iter().zip(&cut.gain_linear) {
            rows.push(GainRow {
                variant: name.clone(),
                scan_deg: scan,
                observation_deg: *obs,
                gain_dbi: to_db(*g),
                limit_dbi: limit(*obs),
            });
        }
    }
    let mut report = Report::new("gain", cfg, cfg.seed, rows);
    report
        .extra
        .insert("scan_summary".into(), Value::Array(summary));
    Ok(report)
}

pub fn uma(cfg: &UmaConfig) -> Result<Report<SummaryRow>, Failure> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut drop_seeds = serde_json::Map::new();
    for scenario in &cfg.scenarios {
        let summary = run_scenario(scenario, &cfg.variants, &cfg.element, &cfg.settings)
            .map_err(Failure::numeric)?;
        log::info!(
            "{}: {} drops, seed {}",
            summary.scenario,
            cfg.settings.drops,
            summary.seed
        );
        drop_seeds.insert(summary.scenario.clone(), json!(summary.drop_seeds));
        rows.extend(summary.rows);
    }
    let seed = cfg.scenarios[0].seed;
    let mut report = Report::new("uma", cfg, seed, rows);
    report
        .extra
        .insert("drop_seeds".into(), Value::Object(drop_seeds));
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct PortRow {
    pub frequency_hz: f64,
    pub port: usize,
    pub efficiency: f64,
    pub passive: bool,
}

pub fn parse_touchstone_file(path: &Path, seed: u64) -> Result<Report<PortRow>, Failure> {
    let doc =
        read_touchstone(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let s = doc.to_scattering().map_err(Failure::input)?;
    let mut rows = Vec::new();
    for (k, f) in s.frequencies().iter().enumerate() {
        let e = embedded_efficiency(&s, *f).map_err(Failure::input)?;
        let passive = s.is_passive_at(k);
        for (port, value) in e.values().iter().enumerate() {
            rows.push(PortRow {
                frequency_hz: *f,
                port: port + 1,
                efficiency: *value,
                passive,
            });
        }
    }
    let config =
        json!({ "path": path, "ports": s.port_count(), "frequencies": s.frequencies().len() });
    let mut report = Report::new("parse-touchstone", &config, seed, rows);
    report
        .extra
        .insert("noise_ignored".into(), json!(doc.noise_ignored));
    Ok(report)
}
