//! Species registry: built-in level structures for ⁸⁷Sr and ¹⁷¹Yb, plus a
//! TOML loader for user-defined species.
//!
//! Constants the source material quotes directly: Sr ¹P₁ A/2π = −3.4 MHz,
//! Q/2π = 39 MHz, Γ/2π = 32 MHz; Sr ³P₁ Γ/2π = 7.5 kHz. The remaining
//! hyperfine constants (Sr ³P₁ A and Q, Yb ¹P₁ A, Yb ¹P₁ Γ) are standard
//! spectroscopy values shipped as overridable defaults. The 5s15d ¹D₂
//! splittings are unspecified, so that manifold is represented by its
//! F' = 13/2 level alone.

use serde::Deserialize;

use super::{Manifold, StructureError};
use crate::angmom::HalfInt;
use crate::units::mhz;

/// A species: nuclear spin plus its manifolds in registry order.
#[derive(Clone, Debug, PartialEq)]
pub struct Species {
    pub id: String,
    pub manifolds: Vec<Manifold>,
}

impl Species {
    pub fn manifold(&self, key: &str) -> Result<&Manifold, StructureError> {
        self.manifolds
            .iter()
            .find(|m| m.key == key)
            .ok_or_else(|| StructureError::UnknownManifold(key.to_string(), self.id.clone()))
    }

    /// Set one constant (given as a /2π MHz value) on one manifold.
    /// Recognized fields: A_MHz, Q_MHz, Gamma_MHz.
    pub fn set_constant(
        &mut self,
        manifold_key: &str,
        field: &str,
        value_mhz: f64,
    ) -> Result<(), StructureError> {
        let id = self.id.clone();
        let m = self
            .manifolds
            .iter_mut()
            .find(|m| m.key == manifold_key)
            .ok_or_else(|| StructureError::UnknownManifold(manifold_key.to_string(), id))?;
        match field {
            "A_MHz" => m.a_hf = mhz(value_mhz),
            "Q_MHz" => m.q_hf = mhz(value_mhz),
            "Gamma_MHz" => {
                if value_mhz < 0.0 {
                    return Err(StructureError::BadManifold {
                        label: m.label.clone(),
                        message: "Gamma must be >= 0".into(),
                    });
                }
                m.gamma = mhz(value_mhz)
            }
            other => {
                return Err(StructureError::BadManifold {
                    label: m.label.clone(),
                    message: format!("unknown constant {other:?} (A_MHz, Q_MHz, Gamma_MHz)"),
                })
            }
        }
        Ok(())
    }
}

fn manifold(
    label: &str,
    key: &str,
    j: i32,
    i: HalfInt,
    a_mhz: f64,
    q_mhz: f64,
    gamma_mhz: f64,
) -> Manifold {
    Manifold {
        label: label.to_string(),
        key: key.to_string(),
        j: HalfInt::new(j),
        i,
        a_hf: mhz(a_mhz),
        q_hf: mhz(q_mhz),
        gamma: mhz(gamma_mhz),
        energy_offset: 0.0,
        f_restriction: None,
    }
}

/// Built-in level structure for a species id ("Sr87" or "Yb171").
pub fn species_registry(species_id: &str) -> Result<Species, StructureError> {
    let i92 = HalfInt::from_twice(9);
    let i12 = HalfInt::from_twice(1);
    match species_id {
        "Sr87" => Ok(Species {
            id: "Sr87".into(),
            manifolds: vec![
                manifold("5s2 1S0", "1S0", 0, i92, 0.0, 0.0, 0.0),
                manifold("5s5p 1P1", "1P1", 1, i92, -3.4, 39.0, 32.0),
                // A, Q: standard spectroscopy defaults (not quoted in the
                // source constants); F'=7/2 - F'=9/2 gap comes out 1.13 GHz
                manifold("5s5p 3P1", "3P1", 1, i92, -260.084, -35.658, 0.0075),
                manifold("5s5p 3P0", "3P0", 0, i92, 0.0, 0.0, 0.0),
                manifold("5s6s 1S0", "1S0e", 0, i92, 0.0, 0.0, 0.0),
                Manifold {
                    f_restriction: Some(HalfInt::from_twice(13)),
                    ..manifold("5s15d 1D2", "1D2", 2, i92, 0.0, 0.0, 0.0)
                },
            ],
        }),
        "Yb171" => Ok(Species {
            id: "Yb171".into(),
            manifolds: vec![
                manifold("6s2 1S0", "1S0", 0, i12, 0.0, 0.0, 0.0),
                // A: standard spectroscopy default (F=1/2 - F=3/2 split ~320 MHz)
                manifold("6s6p 1P1", "1P1", 1, i12, -213.0, 0.0, 29.1),
                manifold("6s7s 1S0", "1S0e", 0, i12, 0.0, 0.0, 0.0),
                manifold("6s6p 3P0", "3P0", 0, i12, 0.0, 0.0, 0.0),
            ],
        }),
        other => Err(StructureError::UnknownSpecies(other.to_string())),
    }
}

#[derive(Deserialize)]
struct SpeciesFile {
    id: String,
    #[serde(default)]
    manifolds: Vec<ManifoldEntry>,
}

#[derive(Deserialize)]
struct ManifoldEntry {
    label: String,
    key: String,
    #[serde(rename = "J")]
    j: HalfInt,
    #[serde(rename = "I")]
    i: HalfInt,
    #[serde(rename = "A_MHz", default)]
    a_mhz: f64,
    #[serde(rename = "Q_MHz", default)]
    q_mhz: f64,
    #[serde(rename = "Gamma_MHz", default)]
    gamma_mhz: f64,
    #[serde(rename = "F_restriction", default)]
    f_restriction: Option<HalfInt>,
}

/// Load a species from a TOML file with the documented schema: a top-level
/// `id` plus `[[manifolds]]` entries carrying {label, key, J, I, A_MHz,
/// Q_MHz, Gamma_MHz} and an optional F_restriction.
pub fn species_from_config(path: &std::path::Path) -> Result<Species, StructureError> {
    let text = std::fs::read_to_string(path).map_err(|e| StructureError::BadSpeciesConfig {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let parsed: SpeciesFile =
        toml::from_str(&text).map_err(|e| StructureError::BadSpeciesConfig {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    if parsed.manifolds.is_empty() {
        return Err(StructureError::BadSpeciesConfig {
            path: path.display().to_string(),
            message: "species defines no manifolds".into(),
        });
    }
    let manifolds = parsed
        .manifolds
        .into_iter()
        .map(|e| {
            if e.gamma_mhz < 0.0 {
                return Err(StructureError::BadManifold {
                    label: e.label.clone(),
                    message: "Gamma must be >= 0".into(),
                });
            }
            if e.j.is_negative() || e.i.is_negative() {
                return Err(StructureError::BadManifold {
                    label: e.label.clone(),
                    message: "J and I must be >= 0".into(),
                });
            }
            Ok(Manifold {
                label: e.label,
                key: e.key,
                j: e.j,
                i: e.i,
                a_hf: mhz(e.a_mhz),
                q_hf: mhz(e.q_mhz),
                gamma: mhz(e.gamma_mhz),
                energy_offset: 0.0,
                f_restriction: e.f_restriction,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Species {
        id: parsed.id,
        manifolds,
    })
}
