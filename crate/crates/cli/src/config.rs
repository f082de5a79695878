//! JSON run configurations. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use holomimo::channel3gpp::{default_variants, ArrayVariant, RunSettings, ScenarioConfig};
use holomimo::pipeline::ElementModel;
use holomimo::ArrayGeometry;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn require(ok: bool, msg: &str) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Config(msg.to_string()))
    }
}

fn non_empty<T>(v: &[T], field: &str) -> Result<(), Failure> {
    require(!v.is_empty(), &format!("{field}: sweep must not be empty"))
}

fn spreads_ok(v: &[f64]) -> Result<(), Failure> {
    non_empty(v, "spreads_deg")?;
    require(
        v.iter().all(|s| *s > 0.0 && *s <= 180.0),
        "spreads_deg: each spread must lie in (0, 180]",
    )
}

/// Fixed-aperture row: the element count is the nearest integer fit of the
/// requested spacing, so the realized spacing is aperture / (n − 1).
pub fn sweep_geometry(aperture: f64, spacing: f64, h: f64) -> holomimo::Result<ArrayGeometry> {
    let n = (aperture / spacing).round().max(1.0) as usize + 1;
    let d = aperture / (n - 1) as f64;
    if h == 0.0 {
        ArrayGeometry::linear_2d(n, d)
    } else {
        ArrayGeometry::linear_3d(n, d, h)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClarkeConfig {
    pub aperture: f64,
    pub spacings: Vec<f64>,
    pub heights: Vec<f64>,
    pub spreads_deg: Vec<f64>,
    pub quadrature_nodes: usize,
    pub seed: u64,
}

impl Default for ClarkeConfig {
    fn default() -> Self {
        Self {
            aperture: 5.0,
            spacings: vec![0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2],
            heights: vec![0.0, 0.5],
            spreads_deg: vec![90.0],
            quadrature_nodes: 2048,
            seed: 0,
        }
    }
}

impl ClarkeConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        require(self.aperture > 0.0, "aperture: must be positive")?;
        non_empty(&self.spacings, "spacings")?;
        require(
            self.spacings
                .iter()
                .all(|d| *d > 0.0 && *d <= self.aperture),
            "spacings: each spacing must lie in (0, aperture]",
        )?;
        non_empty(&self.heights, "heights")?;
        require(
            self.heights.iter().all(|h| *h >= 0.0),
            "heights: must be non-negative",
        )?;
        spreads_ok(&self.spreads_deg)?;
        require(
            self.quadrature_nodes > 0,
            "quadrature_nodes: must be positive",
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationModel {
    Clarke,
    Kronecker,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacityConfig {
    pub aperture: f64,
    pub spacings: Vec<f64>,
    pub heights: Vec<f64>,
    pub spreads_deg: Vec<f64>,
    pub snrs_db: Vec<f64>,
    pub correlation: CorrelationModel,
    pub element: ElementModel,
    pub quadrature_nodes: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            aperture: 2.0,
            spacings: vec![0.5, 0.4, 1.0 / 3.0, 0.25, 0.2],
            heights: vec![0.0],
            spreads_deg: vec![90.0],
            snrs_db: vec![10.0, 20.0],
            correlation: CorrelationModel::Kronecker,
            element: ElementModel::default(),
            quadrature_nodes: 2048,
            trials: 2000,
            seed: 0,
        }
    }
}

impl CapacityConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        ClarkeConfig {
            aperture: self.aperture,
            spacings: self.spacings.clone(),
            heights: self.heights.clone(),
            spreads_deg: self.spreads_deg.clone(),
            quadrature_nodes: self.quadrature_nodes,
            seed: self.seed,
        }
        .validate()?;
        non_empty(&self.snrs_db, "snrs_db")?;
        require(self.trials > 0, "trials: must be positive")
    }
}

/// One array in a comparison. Without pattern files the analytic element is used.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    pub name: String,
    pub count: usize,
    pub spacing: f64,
    #[serde(default)]
    pub h: f64,
    /// One shared pattern or one per element.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pattern_files: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub touchstone: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
}

impl VariantSpec {
    pub fn new(name: &str, count: usize, spacing: f64, h: f64) -> Self {
        Self {
            name: name.into(),
            count,
            spacing,
            h,
            pattern_files: Vec::new(),
            touchstone: None,
            frequency_hz: None,
        }
    }

    pub fn geometry(&self) -> Result<ArrayGeometry, Failure> {
        let g = if self.h == 0.0 {
            ArrayGeometry::linear_2d(self.count, self.spacing)
        } else {
            ArrayGeometry::linear_3d(self.count, self.spacing, self.h)
        };
        g.map_err(|e| Failure::Config(format!("variant {}: {e}", self.name)))
    }

    fn validate(&self) -> Result<(), Failure> {
        self.geometry()?;
        let files = self.pattern_files.len();
        require(
            files <= 1 || files == self.count,
            &format!(
                "variant {}: pattern_files needs 1 or {} entries",
                self.name, self.count
            ),
        )?;
        require(
            self.touchstone.is_none() || self.frequency_hz.is_some(),
            &format!("variant {}: touchstone requires frequency_hz", self.name),
        )?;
        let mut inputs: Vec<&PathBuf> = self.pattern_files.iter().collect();
        inputs.extend(&self.touchstone);
        for p in inputs {
            if !p.exists() {
                return Err(Failure::Input(format!(
                    "variant {}: input file {} does not exist",
                    self.name,
                    p.display()
                )));
            }
        }
        Ok(())
    }
}

fn variants_ok(v: &[VariantSpec]) -> Result<(), Failure> {
    require(
        v.len() >= 2,
        "variants: need a baseline and at least one other variant",
    )?;
    v.iter().try_for_each(VariantSpec::validate)
}

/// The 5λ0, 25-element pair: planar row and 0.5λ0 alternating heights.
fn aperture_pair() -> Vec<VariantSpec> {
    vec![
        VariantSpec::new("2d", 25, 5.0 / 24.0, 0.0),
        VariantSpec::new("3d", 25, 5.0 / 24.0, 0.5),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KroneckerConfig {
    /// The first variant is the baseline of the percent columns.
    pub variants: Vec<VariantSpec>,
    pub spreads_deg: Vec<f64>,
    pub snrs_db: Vec<f64>,
    pub element: ElementModel,
    pub trials: usize,
    pub seed: u64,
}

impl Default for KroneckerConfig {
    fn default() -> Self {
        Self {
            variants: aperture_pair(),
            spreads_deg: vec![60.0, 90.0],
            snrs_db: vec![10.0, 20.0],
            element: ElementModel::default(),
            trials: 2000,
            seed: 0,
        }
    }
}

impl KroneckerConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        spreads_ok(&self.spreads_deg)?;
        non_empty(&self.snrs_db, "snrs_db")?;
        require(self.trials > 0, "trials: must be positive")?;
        variants_ok(&self.variants)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainConfig {
    pub variants: Vec<VariantSpec>,
    pub scans_deg: Vec<f64>,
    /// Aperture extent across the row, used only by the limit curve.
    pub aperture_width: f64,
    pub element: ElementModel,
    pub seed: u64,
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            variants: aperture_pair(),
            scans_deg: vec![0.0, 35.0, 70.0],
            aperture_width: 0.5,
            element: ElementModel::default(),
            seed: 0,
        }
    }
}

impl GainConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        non_empty(&self.scans_deg, "scans_deg")?;
        require(
            self.scans_deg.iter().all(|s| s.abs() < 90.0),
            "scans_deg: each scan must lie in (−90, 90)",
        )?;
        require(
            self.aperture_width > 0.0,
            "aperture_width: must be positive",
        )?;
        require(
            !self.variants.is_empty(),
            "variants: sweep must not be empty",
        )?;
        self.variants.iter().try_for_each(VariantSpec::validate)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UmaConfig {
    pub scenarios: Vec<ScenarioConfig>,
    pub settings: RunSettings,
    /// The first variant is the baseline.
    pub variants: Vec<ArrayVariant>,
    pub element: ElementModel,
}

impl Default for UmaConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![ScenarioConfig::uma2d(), ScenarioConfig::uma3d()],
            settings: RunSettings::default(),
            variants: default_variants().expect("built-in variants are valid"),
            element: ElementModel::default(),
        }
    }
}

impl UmaConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        non_empty(&self.scenarios, "scenarios")?;
        for (i, s) in self.scenarios.iter().enumerate() {
            s.validate()
                .map_err(|e| Failure::Config(format!("scenarios[{i}]: {e}")))?;
        }
        require(self.settings.drops > 0, "settings.drops: must be positive")?;
        require(
            self.settings.capacity_trials > 0,
            "settings.capacity_trials: must be positive",
        )?;
        require(self.variants.len() >= 2, "variants: need at least two")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_geometry_fits_the_aperture() {
        let g = sweep_geometry(5.0, 0.25, 0.0).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g.aperture_length() - 5.0).abs() < 1e-12);
        let g = sweep_geometry(2.0, 1.0 / 3.0, 0.5).unwrap();
        assert_eq!(g.len(), 7);
    }

    #[test]
    fn defaults_validate() {
        ClarkeConfig::default().validate().unwrap();
        CapacityConfig::default().validate().unwrap();
        KroneckerConfig::default().validate().unwrap();
        GainConfig::default().validate().unwrap();
        UmaConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<ClarkeConfig>(r#"{"spacing": [0.5]}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
        let err = serde_json::from_str::<KroneckerConfig>(
            r#"{"variants": [{"name": "a", "count": 2, "spacing": 0.5, "hieght": 0.5}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("hieght"));
    }
}
