//! Rate and energy tables of the NV centre and the derived optical and
//! magnetic quantities.

use super::data::{self, DataText};
use super::levels::LevelScheme;
use crate::constants::{BOHR_MAGNETON, DEBYE, ELEMENTARY_CHARGE, EPSILON_0, HBAR, PLANCK, SPEED_OF_LIGHT};
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Ground-state vibronic ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VibronicTable {
    /// ħω_k in J, k = 0..=n.
    pub energy: Vec<f64>,
    /// Free-space emission rate e_0 → g_k in s⁻¹.
    pub gamma_f: Vec<f64>,
    /// Decay g_k → g_(k-1) in s⁻¹, stored at index k-1.
    pub gamma_vib: Vec<f64>,
    #[serde(skip)]
    pub origin: String,
}

impl VibronicTable {
    pub fn new(energy: Vec<f64>, gamma_f: Vec<f64>, gamma_vib: Vec<f64>) -> Result<Self> {
        let t = Self {
            energy,
            gamma_f,
            gamma_vib,
            origin: "inline".into(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn bundled() -> Self {
        let text = data::bundled(data::VIBRONIC_TABLE).expect("bundled table");
        Self::parse(&text).expect("bundled vibronic table is valid")
    }

    /// Table from `NVPS_DATA_DIR` when set, otherwise the bundled one.
    pub fn load_default() -> Result<Self> {
        Self::parse(&data::load(data::VIBRONIC_TABLE)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&data::load_path(path)?)
    }

    /// Columns: `k, energy_meV, gamma_f_MHz, gamma_vib_THz`.
    pub fn parse(data: &DataText) -> Result<Self> {
        let bad = |msg: String| Error::Data {
            path: data.origin.clone(),
            msg,
        };
        let mut rdr = data::csv_reader(&data.text);
        let (mut energy, mut gamma_f, mut gamma_vib) = (vec![], vec![], vec![]);
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != 4 {
                return Err(bad(format!("row {}: expected 4 columns", row + 1)));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("row {}: cannot parse '{}'", row + 1, &rec[i])))
            };
            let k: usize = rec[0]
                .parse()
                .map_err(|_| bad(format!("row {}: bad level index", row + 1)))?;
            if k != row {
                return Err(bad(format!("row {}: level index {k} out of order", row + 1)));
            }
            energy.push(num(1)? * 1e-3 * ELEMENTARY_CHARGE);
            gamma_f.push(num(2)? * 1e6);
            if k > 0 {
                gamma_vib.push(num(3)? * 1e12);
            }
        }
        let t = Self {
            energy,
            gamma_f,
            gamma_vib,
            origin: data.origin.clone(),
        };
        t.validate().map_err(|e| bad(e.to_string()))?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let rows = self.energy.len();
        if rows < 2 || self.gamma_f.len() != rows || self.gamma_vib.len() != rows - 1 {
            return Err(Error::Consistency(
                "vibronic table needs at least two rows with matching columns".into(),
            ));
        }
        if self.energy[0] != 0.0 {
            return Err(Error::Consistency("energy of g0 must be zero".into()));
        }
        if self.energy.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Consistency("vibronic energies must increase".into()));
        }
        if self.gamma_f.iter().chain(&self.gamma_vib).any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Consistency("vibronic rates must be positive".into()));
        }
        Ok(())
    }

    pub fn levels(&self) -> usize {
        self.energy.len() - 1
    }

    /// Keep only g_0 … g_n.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.levels() {
            return Err(Error::Consistency(format!(
                "requested {n} vibronic levels but the table has {}",
                self.levels()
            )));
        }
        Ok(Self {
            energy: self.energy[..=n].to_vec(),
            gamma_f: self.gamma_f[..=n].to_vec(),
            gamma_vib: self.gamma_vib[..n].to_vec(),
            origin: self.origin.clone(),
        })
    }

    /// ω_k in rad/s.
    pub fn omega(&self, k: usize) -> f64 {
        self.energy[k] / HBAR
    }

    /// Transition dipole e_j → g_k, scaled from µ_0 by the relative line strength.
    pub fn dipole_moment(&self, mu0: f64, k: usize) -> Result<f64> {
        if k > self.levels() {
            return Err(Error::Usage(format!(
                "no vibronic level {k}; table has {}",
                self.levels()
            )));
        }
        Ok(mu0 * (self.gamma_f[k] / self.gamma_f[0]).sqrt())
    }
}

/// Optical transition parameters of the centre.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpticalParameters {
    /// Zero-phonon line energy ħω_z in J.
    pub zpl_energy: f64,
    /// µ_0 in C·m.
    pub dipole: f64,
    /// Refractive index of diamond.
    pub diamond_index: f64,
    /// γ_* in s⁻¹.
    pub dephasing: f64,
    /// γ_e, decay e_1 → e_0, in s⁻¹.
    pub excited_vibronic_decay: f64,
}

impl Default for OpticalParameters {
    fn default() -> Self {
        Self {
            zpl_energy: 1.941 * ELEMENTARY_CHARGE,
            dipole: 5.2 * DEBYE,
            diamond_index: 2.4,
            dephasing: 15e12,
            excited_vibronic_decay: 1434e12,
        }
    }
}

impl OpticalParameters {
    pub fn omega_zpl(&self) -> f64 {
        self.zpl_energy / HBAR
    }

    pub fn diamond_permittivity(&self) -> f64 {
        self.diamond_index * self.diamond_index
    }
}

/// Spin Hamiltonian, microwave drive and spin relaxation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinParameters {
    /// Zero-field splitting of the ground state, Hz.
    pub d_gs: f64,
    /// Zero-field splitting of the excited state, Hz.
    pub d_es: f64,
    pub g_factor: f64,
    /// Static field along the NV axis, T.
    pub b_nv: f64,
    /// Microwave field amplitude, T.
    pub b_mw: f64,
    /// Γ_rel^g, s⁻¹.
    pub relax_ground: f64,
    /// Γ_rel^e, s⁻¹.
    pub relax_excited: f64,
    /// Γ_*^g, s⁻¹.
    pub dephase_ground: f64,
    /// Γ_*^e, s⁻¹.
    pub dephase_excited: f64,
}

impl Default for SpinParameters {
    fn default() -> Self {
        Self {
            d_gs: 2.87e9,
            d_es: 1.42e9,
            g_factor: 2.0,
            b_nv: 4.4e-3,
            b_mw: 0.35e-3,
            relax_ground: 1.0 / 7.7e-3,
            relax_excited: 1.0 / 1e-3,
            dephase_ground: 1.0 / 6.7e-6,
            dephase_excited: 1.0 / 10e-9,
        }
    }
}

/// Transition frequencies (rad/s) of the |0⟩ ↔ |±1⟩ spin transitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeemanFrequencies {
    pub ground_plus: f64,
    pub ground_minus: f64,
    pub excited_plus: f64,
    pub excited_minus: f64,
}

impl SpinParameters {
    /// Zeeman shift gµ_B B/h in Hz.
    pub fn zeeman_shift_hz(&self) -> f64 {
        self.g_factor * BOHR_MAGNETON * self.b_nv / PLANCK
    }

    pub fn zeeman_frequencies(&self) -> Result<ZeemanFrequencies> {
        if !(self.d_gs > 0.0 && self.d_es > 0.0) {
            return Err(Error::Domain("zero-field splittings must be positive".into()));
        }
        let shift = self.zeeman_shift_hz();
        let w = |f: f64| 2.0 * PI * f;
        Ok(ZeemanFrequencies {
            ground_plus: w(self.d_gs + shift),
            ground_minus: w(self.d_gs - shift),
            excited_plus: w(self.d_es + shift),
            excited_minus: w(self.d_es - shift),
        })
    }

    /// Microwave Rabi frequency Ω_µ in rad/s.
    pub fn microwave_rabi(&self) -> f64 {
        self.g_factor * BOHR_MAGNETON * self.b_mw / (HBAR * 2f64.sqrt())
    }
}

/// Intersystem crossing through the singlet manifold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IscParameters {
    /// e_0,±1 → s_1, s⁻¹.
    pub to_singlet_pm: f64,
    /// e_0,0 → s_1, s⁻¹.
    pub to_singlet_zero: f64,
    /// s_0 → g_0,±1, s⁻¹.
    pub from_singlet_pm: f64,
    /// s_0 → g_0,0, s⁻¹.
    pub from_singlet_zero: f64,
    /// s_1 → s_0, s⁻¹.
    pub singlet_decay: f64,
    /// s_1 − s_0 gap, J.
    pub singlet_gap: f64,
    /// e_0 − s_1 gap, J.
    pub triplet_singlet_gap: f64,
}

impl Default for IscParameters {
    fn default() -> Self {
        Self {
            to_singlet_pm: 92e6,
            to_singlet_zero: 11.4e6,
            from_singlet_pm: 2.35e6,
            from_singlet_zero: 4.84e6,
            singlet_decay: 1e9,
            singlet_gap: 1.19 * ELEMENTARY_CHARGE,
            triplet_singlet_gap: 0.4 * ELEMENTARY_CHARGE,
        }
    }
}

/// Optical pump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpticalDrive {
    /// ħω_d in J.
    pub photon_energy: f64,
    /// W/m².
    pub intensity: f64,
}

impl Default for OpticalDrive {
    fn default() -> Self {
        Self {
            photon_energy: 2.033 * ELEMENTARY_CHARGE,
            intensity: 0.5e9,
        }
    }
}

impl OpticalDrive {
    pub fn omega(&self) -> f64 {
        self.photon_energy / HBAR
    }
}

/// Complex field amplitude E_0 (V/m) of a plane wave of intensity `intensity`
/// (W/m²) in a medium of index `n_b`.
pub fn field_amplitude(intensity: f64, n_b: f64) -> Result<f64> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::Domain(format!("intensity {intensity} W/m^2 must be >= 0")));
    }
    if !(n_b > 0.0) {
        return Err(Error::Domain(format!("background index {n_b} must be > 0")));
    }
    Ok((intensity / (2.0 * n_b * EPSILON_0 * SPEED_OF_LIGHT)).sqrt())
}

/// Local-field screening ε_effD = (2ε_b + ε_D)/(3ε_b) of a diamond sphere.
pub fn screening_factor(eps_b: f64, eps_d: f64) -> Result<f64> {
    if !(eps_b > 0.0) {
        return Err(Error::Domain(format!("background permittivity {eps_b} must be > 0")));
    }
    Ok((2.0 * eps_b + eps_d) / (3.0 * eps_b))
}

/// Full parameter set of the centre.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NvParameters {
    pub vibronic: VibronicTable,
    pub optical: OpticalParameters,
    pub spin: SpinParameters,
    pub isc: IscParameters,
}

impl Default for NvParameters {
    fn default() -> Self {
        Self {
            vibronic: VibronicTable::bundled(),
            optical: OpticalParameters::default(),
            spin: SpinParameters::default(),
            isc: IscParameters::default(),
        }
    }
}

impl NvParameters {
    pub fn scheme(&self) -> LevelScheme {
        LevelScheme::new(self.vibronic.levels()).expect("validated table")
    }

    /// Energies of s_1 and s_0 measured from g_0, in rad/s.
    pub fn singlet_omegas(&self) -> (f64, f64) {
        let s1 = self.optical.omega_zpl() - self.isc.triplet_singlet_gap / HBAR;
        (s1, s1 - self.isc.singlet_gap / HBAR)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("optical dephasing", self.optical.dephasing),
            ("excited vibronic decay", self.optical.excited_vibronic_decay),
            ("dipole moment", self.optical.dipole),
            ("diamond index", self.optical.diamond_index),
            ("ZPL energy", self.optical.zpl_energy),
            ("singlet decay", self.isc.singlet_decay),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("ISC e0,+-1 -> s1", self.isc.to_singlet_pm),
            ("ISC e0,0 -> s1", self.isc.to_singlet_zero),
            ("ISC s0 -> g0,+-1", self.isc.from_singlet_pm),
            ("ISC s0 -> g0,0", self.isc.from_singlet_zero),
            ("ground spin relaxation", self.spin.relax_ground),
            ("excited spin relaxation", self.spin.relax_excited),
            ("ground spin dephasing", self.spin.dephase_ground),
            ("excited spin dephasing", self.spin.dephase_excited),
            ("microwave field", self.spin.b_mw),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        self.spin.zeeman_frequencies()?;
        if self.vibronic.energy.last().copied().unwrap_or(0.0) >= self.optical.zpl_energy {
            return Err(Error::Consistency(
                "vibronic ladder reaches above the zero-phonon line".into(),
            ));
        }
        Ok(())
    }
}
