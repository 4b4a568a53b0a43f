//! Turn a resolved configuration into a model, recording every data table used.

use super::config::{DriveEnergy, RunConfig};
use crate::constants::ELEMENTARY_CHARGE;
use crate::experiments::NvSystem;
use crate::model::data::{self, DataText};
use crate::model::{NvParameters, OpticalDrive, VibronicTable};
use crate::plasmonics::{Environment, MaterialTable, Particle};
use crate::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A data table that entered a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct TableRecord {
    pub role: String,
    pub origin: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn record(role: &str, d: &DataText) -> TableRecord {
    TableRecord {
        role: role.into(),
        origin: d.origin.clone(),
        sha256: sha256_hex(d.text.as_bytes()),
    }
}

pub struct Model {
    pub system: NvSystem,
    pub tables: Vec<TableRecord>,
}

impl RunConfig {
    pub fn parameters(&self, tables: &mut Vec<TableRecord>) -> Result<NvParameters> {
        let text = match &self.vibronic_table {
            Some(p) => data::load_path(p)?,
            None => data::load(data::VIBRONIC_TABLE)?,
        };
        tables.push(record("vibronic", &text));
        let vibronic = VibronicTable::parse(&text)?.truncated(self.levels)?;
        let p = NvParameters {
            vibronic,
            optical: self.optical.clone(),
            spin: self.spin.clone(),
            isc: self.isc.clone(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn environment(&self, tables: &mut Vec<TableRecord>) -> Result<Environment> {
        let p = &self.plasmonics;
        let particle = match &p.material {
            None => None,
            Some(name) => {
                let (label, text) = match name.as_str() {
                    "silver" => ("silver", data::load(data::SILVER_TABLE)?),
                    "gold" => ("gold", data::load(data::GOLD_TABLE)?),
                    path => (path, data::load_path(std::path::Path::new(path))?),
                };
                tables.push(record("material", &text));
                Some(Particle {
                    material: MaterialTable::parse(label, &text)?,
                    radius: p.radius.expect("checked when parsed"),
                    separation: p.separation.expect("checked when parsed"),
                })
            }
        };
        let env = Environment {
            background_permittivity: p.background_permittivity,
            particle,
            orientation: p.orientation,
            nonlinear_rabi: p.nonlinear_rabi,
            efficiency_override: p.collection_efficiency,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn model(&self) -> Result<Model> {
        let mut tables = vec![];
        let params = self.parameters(&mut tables)?;
        let env = self.environment(&mut tables)?;
        let photon_energy = match self.drive.photon_energy {
            DriveEnergy::Fixed(e) => e,
            DriveEnergy::PlasmonPeak => env.plasmon_peak_ev()? * ELEMENTARY_CHARGE,
        };
        let drive = OpticalDrive {
            photon_energy,
            intensity: self.drive.intensity,
        };
        Ok(Model {
            system: NvSystem::new(params, env, drive, self.drive.ground_only)?,
            tables,
        })
    }
}
