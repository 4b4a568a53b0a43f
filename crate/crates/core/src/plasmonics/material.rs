//! Tabulated complex permittivities with linear interpolation in photon energy.

use crate::constants::{ELEMENTARY_CHARGE, HBAR};
use crate::model::data::{self, DataText};
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialTable {
    pub name: String,
    pub origin: String,
    /// Photon energies in eV, strictly increasing.
    pub energy_ev: Vec<f64>,
    pub eps: Vec<Complex64>,
}

impl MaterialTable {
    pub fn silver() -> Result<Self> {
        Self::parse("Ag", &data::load(data::SILVER_TABLE)?)
    }

    pub fn gold() -> Result<Self> {
        Self::parse("Au", &data::load(data::GOLD_TABLE)?)
    }

    /// `Ag`, `Au`, or a path to a CSV file.
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ag" | "silver" => Self::silver(),
            "au" | "gold" => Self::gold(),
            _ => Self::parse(name, &data::load_path(std::path::Path::new(name))?),
        }
    }

    /// Columns `energy_eV, eps_real, eps_imag`.
    pub fn parse(name: &str, data: &DataText) -> Result<Self> {
        let bad = |msg: String| Error::Data {
            path: data.origin.clone(),
            msg,
        };
        let mut rdr = data::csv_reader(&data.text);
        let mut energy_ev = vec![];
        let mut eps = vec![];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != 3 {
                return Err(bad(format!("row {}: expected 3 columns", row + 1)));
            }
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("row {}: non-numeric entry", row + 1)))?;
            energy_ev.push(v[0]);
            eps.push(Complex64::new(v[1], v[2]));
        }
        if energy_ev.len() < 2 {
            return Err(bad("need at least two rows".into()));
        }
        if energy_ev.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("energies must be strictly increasing".into()));
        }
        if eps.iter().any(|e| e.im < 0.0) {
            return Err(bad("negative imaginary permittivity (gain medium)".into()));
        }
        Ok(Self {
            name: name.to_string(),
            origin: data.origin.clone(),
            energy_ev,
            eps,
        })
    }

    pub fn range_ev(&self) -> (f64, f64) {
        (self.energy_ev[0], *self.energy_ev.last().unwrap())
    }

    /// ε_m at angular frequency ω (rad/s).
    pub fn permittivity(&self, omega: f64) -> Result<Complex64> {
        self.permittivity_ev(omega * HBAR / ELEMENTARY_CHARGE)
    }

    pub fn permittivity_ev(&self, ev: f64) -> Result<Complex64> {
        let (lo, hi) = self.range_ev();
        if !(ev >= lo && ev <= hi) {
            return Err(Error::Range(format!(
                "{ev:.4} eV outside the {} table range [{lo}, {hi}] eV",
                self.name
            )));
        }
        let i = match self.energy_ev.partition_point(|&e| e <= ev) {
            0 => 0,
            p if p >= self.energy_ev.len() => self.energy_ev.len() - 2,
            p => p - 1,
        };
        let (e0, e1) = (self.energy_ev[i], self.energy_ev[i + 1]);
        let t = (ev - e0) / (e1 - e0);
        Ok(self.eps[i] * (1.0 - t) + self.eps[i + 1] * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silver_nodes_and_interpolation() {
        let ag = MaterialTable::silver().unwrap();
        assert_eq!(ag.energy_ev.len(), 49);
        // n = 0.05, k = 3.093 at 2.50 eV
        let e = ag.permittivity_ev(2.50).unwrap();
        assert!((e.re - (0.05f64.powi(2) - 3.093f64.powi(2))).abs() < 1e-6);
        assert!((e.im - 2.0 * 0.05 * 3.093).abs() < 1e-6);
        let mid = ag.permittivity_ev(2.44).unwrap();
        let (a, b) = (ag.permittivity_ev(2.38).unwrap(), e);
        assert!((mid - (a + b) * 0.5).norm() < 1e-9);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let au = MaterialTable::gold().unwrap();
        assert!(matches!(au.permittivity_ev(0.5), Err(Error::Range(_))));
        assert!(matches!(au.permittivity_ev(7.0), Err(Error::Range(_))));
        assert!(au.permittivity_ev(6.60).is_ok());
    }
}
