//! Scenario drivers: assemble structure + lightmatter + dynamics into the
//! protocol experiments and emit figure-ready data.
//!
//! Every scenario is deterministic — identical config gives a bit-identical
//! CSV body regardless of worker count (only the wall-time metadata field
//! varies). Sweep points are independent jobs on a rayon pool of configurable
//! width; rows come out sorted by the swept value.

mod cooling;
mod scenarios;

pub use cooling::{CoolingStage, CoolingState};

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::lightmatter::LightMatterError;
use crate::structure::{species_from_config, species_registry, Species, StructureError};
use crate::units::to_mhz;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    LightMatter(#[from] LightMatterError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("config: {0}")]
    BadConfig(String),
    #[error("override {key:?}: {message}")]
    BadOverride { key: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    LeakageSweep,
    DressingSpectrum,
    TwoLevelCoherence,
    QuadrupoleCancellation,
    QuenchDecay,
    CoolingCycle,
    YbVariants,
}

impl Scenario {
    pub fn slug(&self) -> &'static str {
        match self {
            Scenario::LeakageSweep => "leakage-sweep",
            Scenario::DressingSpectrum => "dressing-spectrum",
            Scenario::TwoLevelCoherence => "two-level",
            Scenario::QuadrupoleCancellation => "cancel-quadrupole",
            Scenario::QuenchDecay => "quench-decay",
            Scenario::CoolingCycle => "cooling-cycle",
            Scenario::YbVariants => "yb",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Linear,
    Log,
}

/// One swept parameter: name, range, point count, spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl SweepGrid {
    pub fn linear(parameter: &str, min: f64, max: f64, points: usize) -> Self {
        SweepGrid {
            parameter: parameter.into(),
            min,
            max,
            points,
            scale: GridScale::Linear,
        }
    }

    pub fn log(parameter: &str, min: f64, max: f64, points: usize) -> Self {
        SweepGrid {
            parameter: parameter.into(),
            min,
            max,
            points,
            scale: GridScale::Log,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|k| {
                let t = k as f64 / (self.points - 1) as f64;
                match self.scale {
                    GridScale::Linear => self.min + t * (self.max - self.min),
                    GridScale::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), ProtocolError> {
        if self.points == 0 {
            return Err(ProtocolError::BadConfig(format!(
                "grid.points: sweep grid over {:?} is empty",
                self.parameter
            )));
        }
        if self.scale == GridScale::Log && (self.min <= 0.0 || self.max <= 0.0) {
            return Err(ProtocolError::BadConfig(format!(
                "grid over {:?}: log spacing needs positive bounds",
                self.parameter
            )));
        }
        Ok(())
    }
}

/// Laser parameters, all /2π MHz at this boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaserParams {
    /// Probe Rabi frequency Ω_ga for the leakage sweep.
    pub probe_rabi_mhz: f64,
    /// Triplet canceller detuning Δ_gc from the ³P₁ line center.
    pub triplet_detuning_mhz: f64,
    /// Dressing Rabi frequency Ω_ab.
    pub dressing_rabi_mhz: f64,
    /// |Δ_ad| magnitude at which the quadrupole optimizer realizes λ*.
    pub quad_detuning_mhz: f64,
    /// Quoted operating point, evaluated alongside the optimizer's.
    pub preset_rabi_ad_mhz: f64,
    pub preset_detuning_ad_mhz: f64,
    /// Include the canceller's own spontaneous emission in the leakage
    /// sweep. Its which-way damage per probe photon is independent of the
    /// probe detuning (Ω_gc ∝ 1/Δ_ga against exposure time ∝ Δ_ga²), so it
    /// sets an infidelity floor at large detuning; turning it off isolates
    /// the probe's Δ^-2 law.
    pub include_triplet_scattering: bool,
}

impl Default for LaserParams {
    fn default() -> Self {
        LaserParams {
            probe_rabi_mhz: 10.0,
            triplet_detuning_mhz: 635.0,
            dressing_rabi_mhz: 1000.0,
            quad_detuning_mhz: 4350.0,
            preset_rabi_ad_mhz: 106.0,
            preset_detuning_ad_mhz: 4350.0,
            include_triplet_scattering: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoLevelParams {
    pub gamma_mhz: f64,
    /// Evaluate a single Δ/Γ point instead of the grid.
    pub delta_over_gamma: Option<f64>,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        TwoLevelParams {
            gamma_mhz: 32.0,
            delta_over_gamma: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoolingParams {
    /// Initial vibrational quantum number.
    pub n0: u32,
    /// Lamb-Dicke parameter, 0 <= eta < 1.
    pub eta: f64,
    pub cycles: u32,
}

impl Default for CoolingParams {
    fn default() -> Self {
        CoolingParams {
            n0: 5,
            eta: 0.1,
            cycles: 10,
        }
    }
}

/// Full description of one run. Defaults reproduce the protocol operating
/// points; everything is overridable from a config file or CLI flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub species: String,
    pub scenario: Scenario,
    #[serde(default)]
    pub grid: Option<SweepGrid>,
    /// Photon exposures N for the leakage sweep; each >= 1.
    #[serde(default = "default_photons")]
    pub photons: Vec<u64>,
    #[serde(default)]
    pub lasers: LaserParams,
    #[serde(default)]
    pub two_level: TwoLevelParams,
    #[serde(default)]
    pub cooling: CoolingParams,
    /// Dotted-path constant overrides, e.g. "sr87.1P1.Q_MHz" = 0.0.
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    /// Optional custom species file replacing the built-in registry entry.
    #[serde(default)]
    pub species_file: Option<PathBuf>,
}

fn default_photons() -> Vec<u64> {
    vec![10, 100]
}

impl ScenarioConfig {
    pub fn new(species: &str, scenario: Scenario) -> Self {
        ScenarioConfig {
            species: species.into(),
            scenario,
            grid: None,
            photons: default_photons(),
            lasers: LaserParams::default(),
            two_level: TwoLevelParams::default(),
            cooling: CoolingParams::default(),
            overrides: BTreeMap::new(),
            species_file: None,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        if self.photons.is_empty() {
            return Err(ProtocolError::BadConfig("photons: list is empty".into()));
        }
        if self.photons.contains(&0) {
            return Err(ProtocolError::BadConfig(
                "photons: photon counts must be >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.cooling.eta) {
            return Err(ProtocolError::BadConfig(format!(
                "cooling.eta: {} outside [0, 1)",
                self.cooling.eta
            )));
        }
        if self.two_level.gamma_mhz <= 0.0 {
            return Err(ProtocolError::BadConfig(format!(
                "two_level.gamma_mhz: {} must be positive",
                self.two_level.gamma_mhz
            )));
        }
        Ok(())
    }

    /// The species with the species file and the dotted-path overrides
    /// applied. Override keys look like "sr87.1P1.Q_MHz"; the species segment
    /// must match the active species (case-insensitive).
    pub fn resolve_species(&self) -> Result<Species, ProtocolError> {
        let mut sp = match &self.species_file {
            Some(path) => species_from_config(path)?,
            None => species_registry(&self.species)?,
        };
        for (key, value) in &self.overrides {
            let parts: Vec<&str> = key.split('.').collect();
            if parts.len() != 3 {
                return Err(ProtocolError::BadOverride {
                    key: key.clone(),
                    message: "expected species.MANIFOLD.FIELD".into(),
                });
            }
            if !parts[0].eq_ignore_ascii_case(&sp.id) {
                return Err(ProtocolError::BadOverride {
                    key: key.clone(),
                    message: format!("species segment does not match active species {:?}", sp.id),
                });
            }
            sp.set_constant(parts[1], parts[2], *value)?;
        }
        Ok(sp)
    }
}

/// Resolved manifold constants recorded in the run metadata (/2π MHz).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldMeta {
    pub label: String,
    pub key: String,
    #[serde(rename = "J")]
    pub j: String,
    #[serde(rename = "I")]
    pub i: String,
    #[serde(rename = "A_MHz")]
    pub a_mhz: f64,
    #[serde(rename = "Q_MHz")]
    pub q_mhz: f64,
    #[serde(rename = "Gamma_MHz")]
    pub gamma_mhz: f64,
}

impl ManifoldMeta {
    fn from_species(sp: &Species) -> Vec<ManifoldMeta> {
        sp.manifolds
            .iter()
            .map(|m| ManifoldMeta {
                label: m.label.clone(),
                key: m.key.clone(),
                j: m.j.to_string(),
                i: m.i.to_string(),
                a_mhz: to_mhz(m.a_hf),
                q_mhz: to_mhz(m.q_hf),
                gamma_mhz: to_mhz(m.gamma),
            })
            .collect()
    }
}

/// Metadata written next to every CSV; `config` alone reproduces the run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub scenario: String,
    pub species: String,
    pub code_version: String,
    pub wall_time_s: f64,
    pub constants: Vec<ManifoldMeta>,
    pub config: ScenarioConfig,
    /// Per-scenario scalars (solved Rabi frequencies, spreads, fits, ...).
    pub extra: serde_json::Value,
}

/// Rows of (swept value, scalar outputs) plus metadata.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: RunMeta,
}

impl SweepResult {
    /// Single-header CSV, '.' decimal, locale-independent; shortest
    /// round-trippable float formatting keeps bodies byte-stable.
    pub fn csv_body(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("metadata serializes")
    }
}

/// Runs one scenario on a pool of `workers` threads. Output rows are ordered
/// by the sweep grid, independent of worker count.
pub fn run_scenario(cfg: &ScenarioConfig, workers: usize) -> Result<SweepResult, ProtocolError> {
    cfg.validate()?;
    let species = cfg.resolve_species()?;
    let started = std::time::Instant::now();
    let workers = workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ProtocolError::BadConfig(format!("worker pool: {e}")))?;
    let (header, rows, extra) = pool.install(|| match cfg.scenario {
        Scenario::LeakageSweep => scenarios::leakage_sweep(cfg, &species),
        Scenario::DressingSpectrum => scenarios::dressing_spectrum(cfg, &species),
        Scenario::TwoLevelCoherence => scenarios::two_level_coherence(cfg),
        Scenario::QuadrupoleCancellation => scenarios::quadrupole_cancellation(cfg, &species),
        Scenario::QuenchDecay => scenarios::quench_decay(cfg, &species),
        Scenario::CoolingCycle => scenarios::cooling_cycle(cfg, &species),
        Scenario::YbVariants => scenarios::yb_variants(cfg, &species),
    })?;
    for row in &rows {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ProtocolError::BadConfig(
                "scenario produced a non-finite output".into(),
            ));
        }
    }
    Ok(SweepResult {
        scenario: cfg.scenario,
        header,
        rows,
        meta: RunMeta {
            scenario: cfg.scenario.slug().into(),
            species: species.id.clone(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_s: started.elapsed().as_secs_f64(),
            constants: ManifoldMeta::from_species(&species),
            config: cfg.clone(),
            extra,
        },
    })
}

/// Load a scenario config from TOML, or from the JSON metadata of a previous
/// run (whose embedded `config` reproduces it).
pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, ProtocolError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProtocolError::BadConfig(format!("{}: {e}", path.display())))?;
    if path.extension().and_then(|s| s.to_str()) == Some("json") {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| ProtocolError::BadConfig(format!("{}: {e}", path.display())))?;
        let cfg_value = value.get("config").cloned().unwrap_or(value);
        serde_json::from_value(cfg_value)
            .map_err(|e| ProtocolError::BadConfig(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text)
            .map_err(|e| ProtocolError::BadConfig(format!("{}: {e}", path.display())))
    }
}
