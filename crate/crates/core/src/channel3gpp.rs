//! Simplified urban-macro (UMa) surrogate: users dropped on a disc in front
//! of an elevated base station, a few narrow clusters per user, and the
//! receive covariance of a base-station array averaged over all users.
//!
//! No path loss, shadowing, delay or LOS-probability modelling: only the
//! angular structure that the covariance consumes.
//!
//! World frame: x points from the base station into the cell, z is up. The
//! array's own frame has its row along world y, its broadside along world x
//! and its dipoles vertical, so array `(x, y, z)` = world `(y, z, x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clarke::K0;
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Vec3};
use crate::io::records::{percent_increase, SummaryRow};
use crate::kronecker::EfficiencyVector;
use crate::linalg::CMatrix;
use crate::matrix::{hermitize_upper, CovarianceMatrix};
use crate::metrics::{diversity, ergodic_capacity, trial_rng, CapacityParams, GeometryContext};
use crate::parallel::map_indexed;
use crate::patterns::PatternGrid;
use crate::pipeline::{local_patterns, ElementModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimensionality {
    Uma2d,
    Uma3d,
}

impl Dimensionality {
    pub fn name(self) -> &'static str {
        match self {
            Dimensionality::Uma2d => "uma2d",
            Dimensionality::Uma3d => "uma3d",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub bs_height_m: f64,
    pub dimensionality: Dimensionality,
    pub user_count: usize,
    /// Defaults to 0.8 for uma3d and 0 for uma2d.
    pub indoor_fraction: Option<f64>,
    pub outdoor_user_height_m: f64,
    pub floor_height_m: f64,
    pub max_floors: u32,
    pub cluster_count: usize,
    pub per_cluster_angle_sigma_deg: f64,
    /// Cluster power ∝ exp(−decay·index).
    pub cluster_power_decay: f64,
    pub azimuth_spread_cap_deg: f64,
    pub carrier_ghz: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 200.0,
            bs_height_m: 25.0,
            dimensionality: Dimensionality::Uma2d,
            user_count: 100,
            indoor_fraction: None,
            outdoor_user_height_m: 1.5,
            floor_height_m: 3.0,
            max_floors: 8,
            cluster_count: 20,
            per_cluster_angle_sigma_deg: 5.0,
            cluster_power_decay: 0.5,
            azimuth_spread_cap_deg: 52.0,
            carrier_ghz: 2.45,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn uma2d() -> Self {
        Self::default()
    }

    pub fn uma3d() -> Self {
        Self {
            dimensionality: Dimensionality::Uma3d,
            ..Self::default()
        }
    }

    pub fn resolved_indoor_fraction(&self) -> f64 {
        self.indoor_fraction.unwrap_or(match self.dimensionality {
            Dimensionality::Uma2d => 0.0,
            Dimensionality::Uma3d => 0.8,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if !(self.cell_radius_m > 0.0) || !self.cell_radius_m.is_finite() {
            return bad(format!(
                "cell_radius_m must be positive, got {}",
                self.cell_radius_m
            ));
        }
        if !self.bs_height_m.is_finite() {
            return bad("bs_height_m must be finite".into());
        }
        if self.user_count == 0 {
            return bad("user_count must be at least 1".into());
        }
        let f = self.resolved_indoor_fraction();
        if !(0.0..=1.0).contains(&f) {
            return bad(format!("indoor_fraction must lie in [0, 1], got {f}"));
        }
        if self.max_floors == 0 {
            return bad("max_floors must be at least 1".into());
        }
        if !(self.per_cluster_angle_sigma_deg >= 0.0)
            || !self.per_cluster_angle_sigma_deg.is_finite()
        {
            return bad("per_cluster_angle_sigma_deg must be non-negative".into());
        }
        if !(self.cluster_power_decay >= 0.0) || !self.cluster_power_decay.is_finite() {
            return bad("cluster_power_decay must be non-negative".into());
        }
        if !(self.azimuth_spread_cap_deg > 0.0 && self.azimuth_spread_cap_deg <= 52.0) {
            return bad(format!(
                "azimuth_spread_cap_deg must lie in (0, 52], got {}",
                self.azimuth_spread_cap_deg
            ));
        }
        if !(self.carrier_ghz > 0.0) {
            return bad("carrier_ghz must be positive".into());
        }
        if ![self.outdoor_user_height_m, self.floor_height_m]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("user heights must be finite".into());
        }
        Ok(())
    }

    fn bs_position(&self) -> Vec3 {
        [-self.cell_radius_m, 0.0, self.bs_height_m]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserPosition {
    pub position: Vec3,
    pub indoor: bool,
}

/// One plane wave at the base station: unit direction toward its source
/// (world frame) and complex amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub direction: Vec3,
    pub gain: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDrop {
    pub users: Vec<UserPosition>,
    pub paths: Vec<Vec<PathRecord>>,
}

fn sample_users(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<UserPosition> {
    let indoor_fraction = config.resolved_indoor_fraction();
    (0..config.user_count)
        .map(|_| {
            let r = config.cell_radius_m * rng.random::<f64>().sqrt();
            let a = 2.0 * PI * rng.random::<f64>();
            let (height, indoor) = match config.dimensionality {
                Dimensionality::Uma2d => (config.outdoor_user_height_m, false),
                Dimensionality::Uma3d => {
                    if rng.random::<f64>() < indoor_fraction {
                        let floor = rng.random_range(1..=config.max_floors);
                        (
                            config.outdoor_user_height_m
                                + config.floor_height_m * (floor - 1) as f64,
                            true,
                        )
                    } else {
                        (config.outdoor_user_height_m, false)
                    }
                }
            };
            UserPosition {
                position: [r * a.cos(), r * a.sin(), height],
                indoor,
            }
        })
        .collect()
}

/// Users uniform over the disc; the base station stands on its left edge.
pub fn drop_users(config: &ScenarioConfig, seed: u64) -> Result<Vec<UserPosition>> {
    config.validate()?;
    Ok(sample_users(config, &mut trial_rng(seed, 0)))
}

const MAX_REDRAWS: usize = 1000;

fn sample_paths(
    user: Vec3,
    config: &ScenarioConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PathRecord>> {
    if config.cluster_count == 0 {
        return Err(Error::invalid("cluster_count must be at least 1"));
    }
    let bs = config.bs_position();
    let d = [user[0] - bs[0], user[1] - bs[1], user[2] - bs[2]];
    let ground = d[0].hypot(d[1]);
    let bearing = d[1].atan2(d[0]);
    let elevation = d[2].atan2(ground);

    let sigma = config.per_cluster_angle_sigma_deg.to_radians();
    let cap = config.azimuth_spread_cap_deg.to_radians();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;

    // Offsets are redrawn until inside ±cap, which bounds the total azimuth
    // spread by twice the cap.
    let mut offsets = Vec::with_capacity(config.cluster_count);
    for _ in 0..config.cluster_count {
        let mut off = normal.sample(rng);
        let mut tries = 0;
        while off.abs() > cap && tries < MAX_REDRAWS {
            off = normal.sample(rng);
            tries += 1;
        }
        if off.abs() > cap {
            log::warn!("cluster offset still outside the cap after {MAX_REDRAWS} redraws, clamped");
            off = off.clamp(-cap, cap);
        }
        offsets.push(off);
    }

    let raw: Vec<f64> = (0..config.cluster_count)
        .map(|c| (-config.cluster_power_decay * c as f64).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    let (se, ce) = elevation.sin_cos();
    Ok(offsets
        .iter()
        .zip(&raw)
        .map(|(off, p)| {
            let az = bearing + off;
            let phase = 2.0 * PI * rng.random::<f64>();
            PathRecord {
                direction: [ce * az.cos(), ce * az.sin(), se],
                gain: Complex64::from_polar((p / total).sqrt(), phase),
            }
        })
        .collect())
}

/// Clustered paths toward one user, elevation fixed by the line of sight.
pub fn generate_cluster_paths(
    user: Vec3,
    config: &ScenarioConfig,
    seed: u64,
) -> Result<Vec<PathRecord>> {
    config.validate()?;
    sample_paths(user, config, &mut trial_rng(seed, 0))
}

/// Drop `index` of a run: users and paths from stream `index` of `seed`.
pub fn generate_drop(config: &ScenarioConfig, seed: u64, index: u64) -> Result<ChannelDrop> {
    config.validate()?;
    let mut rng = trial_rng(seed, index);
    let users = sample_users(config, &mut rng);
    let paths = users
        .iter()
        .map(|u| sample_paths(u.position, config, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelDrop { users, paths })
}

fn world_to_array(v: Vec3) -> Vec3 {
    [v[1], v[2], v[0]]
}

fn to_spherical(k: Vec3) -> (f64, f64) {
    let theta = k[2].clamp(-1.0, 1.0).acos();
    let phi = k[1].atan2(k[0]).rem_euclid(2.0 * PI);
    (theta, phi)
}

/// Average over users of h hᴴ for both polarizations, scaled so the largest
/// diagonal entry equals that port's efficiency.
///
/// `patterns` are element patterns with their phase centre at their own
/// `position()`; each is moved to its geometry position before use.
pub fn scenario_covariance(
    drop: &ChannelDrop,
    geometry: &ArrayGeometry,
    patterns: &[PatternGrid],
    efficiencies: Option<&EfficiencyVector>,
) -> Result<CovarianceMatrix> {
    if drop.users.is_empty() || drop.paths.iter().all(Vec::is_empty) {
        return Err(Error::invalid("drop has no users or no paths"));
    }
    let n = geometry.len();
    if patterns.len() != n {
        return Err(Error::invalid(format!(
            "{} patterns for {n} elements",
            patterns.len()
        )));
    }
    if let Some(e) = efficiencies {
        if e.len() != n {
            return Err(Error::invalid("efficiency vector does not match the array"));
        }
    }
    let offsets: Vec<Vec3> = patterns
        .iter()
        .zip(geometry.elements())
        .map(|(p, r)| {
            let own = p.position();
            [r[0] - own[0], r[1] - own[1], r[2] - own[2]]
        })
        .collect();

    let mut acc = CMatrix::zeros(n, n);
    let mut h_theta = vec![Complex64::new(0.0, 0.0); n];
    let mut h_phi = vec![Complex64::new(0.0, 0.0); n];
    for paths in &drop.paths {
        h_theta.fill(Complex64::new(0.0, 0.0));
        h_phi.fill(Complex64::new(0.0, 0.0));
        for path in paths {
            let k = world_to_array(path.direction);
            let (theta, phi) = to_spherical(k);
            for (i, (p, d)) in patterns.iter().zip(&offsets).enumerate() {
                let (et, ep) = p.sample(theta, phi);
                let shift =
                    Complex64::from_polar(1.0, K0 * (k[0] * d[0] + k[1] * d[1] + k[2] * d[2]));
                h_theta[i] += path.gain * et * shift;
                h_phi[i] += path.gain * ep * shift;
            }
        }
        for m in 0..n {
            for c in m..n {
                acc[(m, c)] += h_theta[m] * h_theta[c].conj() + h_phi[m] * h_phi[c].conj();
            }
        }
    }
    hermitize_upper(&mut acc);

    let (k_max, d_max) = (0..n)
        .map(|i| (i, acc[(i, i)].re))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if !(d_max > 0.0) {
        return Err(Error::DegenerateInput(
            "no element receives power in this drop".into(),
        ));
    }
    let target = efficiencies.map_or(1.0, |e| e.values()[k_max]);
    acc *= Complex64::new(target / d_max, 0.0);
    for i in 0..n {
        acc[(i, i)] = Complex64::new(acc[(i, i)].re.clamp(0.0, 1.0), 0.0);
    }
    CovarianceMatrix::new(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayVariant {
    pub name: String,
    pub geometry: ArrayGeometry,
}

/// The 2λ0 pair compared in the scenario table: a 2-D row at 0.4λ0 and the
/// alternating-height row at 0.2λ0 with a 0.5λ0 step.
pub fn default_variants() -> Result<Vec<ArrayVariant>> {
    Ok(vec![
        ArrayVariant {
            name: "2d".into(),
            geometry: ArrayGeometry::linear_2d(6, 0.4)?,
        },
        ArrayVariant {
            name: "3d".into(),
            geometry: ArrayGeometry::linear_3d(11, 0.2, 0.5)?,
        },
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub drops: usize,
    pub snr_db: f64,
    pub capacity_trials: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            drops: 50,
            snr_db: 20.0,
            capacity_trials: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub seed: u64,
    pub settings: RunSettings,
    /// First variant is the baseline of the percent columns.
    pub rows: Vec<SummaryRow>,
    /// Per-drop capacity seeds, shared by all variants.
    pub drop_seeds: Vec<u64>,
}

/// Mean diversity and capacity per variant over `settings.drops` drops.
/// Every variant sees the same users, paths and fading seeds.
pub fn run_scenario(
    config: &ScenarioConfig,
    variants: &[ArrayVariant],
    model: &ElementModel,
    settings: &RunSettings,
) -> Result<ScenarioSummary> {
    config.validate()?;
    if variants.len() < 2 {
        return Err(Error::invalid("need at least two array variants"));
    }
    if settings.drops == 0 {
        return Err(Error::invalid("drops must be at least 1"));
    }
    let patterns = variants
        .iter()
        .map(|v| local_patterns(&v.geometry, model))
        .collect::<Result<Vec<_>>>()?;

    let drop_seeds: Vec<u64> = (0..settings.drops as u64)
        .map(|d| trial_rng(config.seed, d).random::<u64>())
        .collect();
    let per_drop: Vec<Result<Vec<(f64, f64)>>> = map_indexed(settings.drops, |d| {
        let drop = generate_drop(config, config.seed, d as u64)?;
        variants
            .iter()
            .zip(&patterns)
            .map(|(v, p)| {
                let r = scenario_covariance(&drop, &v.geometry, p, None)?;
                let ctx = GeometryContext::from_geometry(&v.geometry);
                let params =
                    CapacityParams::new(settings.snr_db, v.geometry.len(), drop_seeds[d], ctx)
                        .with_trials(settings.capacity_trials);
                Ok((
                    diversity(&r)?,
                    ergodic_capacity(&r, &params)?.mean_bits_per_s_per_hz,
                ))
            })
            .collect()
    });
    let per_drop = per_drop.into_iter().collect::<Result<Vec<_>>>()?;

    let count = settings.drops as f64;
    let means: Vec<(f64, f64)> = (0..variants.len())
        .map(|v| {
            let (d, c) = per_drop.iter().fold((0.0, 0.0), |acc, drop| {
                (acc.0 + drop[v].0, acc.1 + drop[v].1)
            });
            (d / count, c / count)
        })
        .collect();
    let (base_d, base_c) = means[0];
    let rows = variants
        .iter()
        .zip(&means)
        .map(|(v, (d, c))| SummaryRow {
            scenario: config.dimensionality.name().to_string(),
            variant: v.name.clone(),
            diversity: *d,
            capacity: *c,
            diversity_increase_pct: percent_increase(*d, base_d),
            capacity_increase_pct: percent_increase(*c, base_c),
        })
        .collect();
    Ok(ScenarioSummary {
        scenario: config.dimensionality.name().to_string(),
        seed: config.seed,
        settings: *settings,
        rows,
        drop_seeds,
    })
}

/// Largest minus smallest azimuth among paths, radians.
pub fn azimuth_spread(paths: &[PathRecord]) -> f64 {
    let az: Vec<f64> = paths
        .iter()
        .map(|p| p.direction[1].atan2(p.direction[0]))
        .collect();
    let lo = az.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = az.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}
