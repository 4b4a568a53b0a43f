//! Nanoparticle response and the resulting modification of the optical
//! drive and of the vibronic emission rates.

mod material;
mod response;

pub use material::MaterialTable;
pub use response::{
    corrected_polarizability, decay_rate_ratio, nonlinear_rabi_coefficient, nonradiative_rate_ratio,
    quantum_efficiency, quasistatic_polarizability, rabi_factor, wavenumber, DipoleAxis,
};

use crate::{Error, Result};
use num_complex::Complex64;

/// How the emitter dipole sits relative to the particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Orientation {
    Radial,
    Tangential,
    /// NV axis tilted by θ (rad) from the particle–emitter axis, with the
    /// pump field polarised along that axis.
    Tilted(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub material: MaterialTable,
    /// Sphere radius r, m.
    pub radius: f64,
    /// Centre-to-emitter distance R, m.
    pub separation: f64,
}

/// Emission-rate modification for one transition frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmissionModification {
    /// γ/γ_f.
    pub total: f64,
    /// γ_NR/γ_f.
    pub nonradiative: f64,
    /// Fraction of γ that reaches the far field.
    pub efficiency: f64,
}

/// Dielectric environment of the centre: background medium and optional particle.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub background_permittivity: f64,
    pub particle: Option<Particle>,
    pub orientation: Orientation,
    /// Include the particle-mediated self-interaction term in the Rabi frequency.
    pub nonlinear_rabi: bool,
    /// Replace the computed quantum efficiency by a constant collection factor.
    pub efficiency_override: Option<f64>,
}

impl Default for Environment {
    fn default() -> Self {
        Self::free_space()
    }
}

impl Environment {
    pub fn free_space() -> Self {
        Self {
            background_permittivity: 1.0,
            particle: None,
            orientation: Orientation::Radial,
            nonlinear_rabi: false,
            efficiency_override: None,
        }
    }

    pub fn background_index(&self) -> f64 {
        self.background_permittivity.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.background_permittivity > 0.0 && self.background_permittivity.is_finite()) {
            return Err(Error::Domain(format!(
                "background permittivity {} must be > 0",
                self.background_permittivity
            )));
        }
        if let Some(p) = &self.particle {
            if !(p.radius > 0.0) {
                return Err(Error::Domain(format!("particle radius {} must be > 0", p.radius)));
            }
            if !(p.separation > p.radius) {
                return Err(Error::Domain(format!(
                    "separation {} m must exceed the particle radius {} m",
                    p.separation, p.radius
                )));
            }
        }
        if let Orientation::Tilted(theta) = self.orientation {
            if !(theta.is_finite()) {
                return Err(Error::Domain("tilt angle must be finite".into()));
            }
            if self.nonlinear_rabi {
                return Err(Error::Config(
                    "the nonlinear Rabi term needs a radial or tangential orientation".into(),
                ));
            }
        }
        if let Some(q) = self.efficiency_override {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Domain(format!("collection factor {q} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Corrected particle polarizability at ω, if a particle is present.
    pub fn polarizability(&self, omega: f64) -> Result<Option<Complex64>> {
        let Some(p) = &self.particle else {
            return Ok(None);
        };
        let eps_m = p.material.permittivity(omega)?;
        let alpha_l = quasistatic_polarizability(eps_m, self.background_permittivity, p.radius)?;
        let k_b = wavenumber(omega, self.background_index());
        Ok(Some(corrected_polarizability(alpha_l, k_b)?))
    }

    /// Dimensionless factor multiplying µ E_0/(ħ ε_effD) at the drive frequency.
    pub fn rabi_scale(&self, omega_d: f64) -> Result<Complex64> {
        let alpha = self.polarizability(omega_d)?;
        let one = Complex64::new(1.0, 0.0);
        let near = |axis| match (&self.particle, alpha) {
            (Some(p), Some(a)) => rabi_factor(a, p.separation, axis),
            _ => one,
        };
        Ok(match self.orientation {
            Orientation::Radial => near(DipoleAxis::Radial),
            Orientation::Tangential => near(DipoleAxis::Tangential),
            Orientation::Tilted(theta) => theta.sin() * near(DipoleAxis::Radial),
        })
    }

    fn ratios(&self, omega: f64, axis: DipoleAxis) -> Result<(f64, f64)> {
        let n_b = self.background_index();
        match (&self.particle, self.polarizability(omega)?) {
            (Some(p), Some(a)) => {
                let k_b = wavenumber(omega, n_b);
                Ok((
                    decay_rate_ratio(a, k_b, p.separation, n_b, axis)?,
                    nonradiative_rate_ratio(a, k_b, p.separation, n_b, axis)?,
                ))
            }
            _ => Ok((n_b, 0.0)),
        }
    }

    /// Decay-rate modification for a transition at ω (rad/s).
    pub fn emission(&self, omega: f64) -> Result<EmissionModification> {
        let (total, nonradiative) = match self.orientation {
            Orientation::Radial => self.ratios(omega, DipoleAxis::Radial)?,
            Orientation::Tangential => self.ratios(omega, DipoleAxis::Tangential)?,
            Orientation::Tilted(theta) => {
                let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
                let (tr, nr) = self.ratios(omega, DipoleAxis::Radial)?;
                let (tt, nt) = self.ratios(omega, DipoleAxis::Tangential)?;
                (s2 * tr + c2 * tt, s2 * nr + c2 * nt)
            }
        };
        let efficiency = match self.efficiency_override {
            Some(q) => q,
            None => quantum_efficiency(total, nonradiative)?,
        };
        Ok(EmissionModification {
            total,
            nonradiative,
            efficiency,
        })
    }

    /// Energy (eV) in the material table where |α_L| peaks, located on a
    /// 0.5 meV grid.
    pub fn plasmon_peak_ev(&self) -> Result<f64> {
        let p = self
            .particle
            .as_ref()
            .ok_or_else(|| Error::Config("no particle configured; there is no plasmon peak".into()))?;
        let (lo, hi) = p.material.range_ev();
        let steps = ((hi - lo) / 5e-4).ceil() as usize;
        let mut best = (lo, f64::MIN);
        for i in 0..=steps {
            let ev = (lo + i as f64 * 5e-4).min(hi);
            let eps = p.material.permittivity_ev(ev)?;
            let a = quasistatic_polarizability(eps, self.background_permittivity, p.radius)?.norm();
            if a > best.1 {
                best = (ev, a);
            }
        }
        Ok(best.0)
    }
}
