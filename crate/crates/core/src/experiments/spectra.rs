//! Emission spectra, near-ZPL enhancement and PL versus tilt angle.

use super::system::{Microwave, NvSystem};
use crate::constants::{ev_to_angular, ELEMENTARY_CHARGE, HBAR};
use crate::dynamics::{emission_spectrum, Spectrum, SpectrumOptions};
use crate::plasmonics::Orientation;
use crate::{Error, Result};
use rayon::prelude::*;

/// Stationary emission spectrum on an energy grid (eV). `far_field`
/// weights each band by its quantum efficiency.
pub fn system_spectrum(system: &NvSystem, energies_ev: &[f64], far_field: bool, options: &SpectrumOptions) -> Result<Spectrum> {
    let rho = system.steady_state(Microwave::Off)?;
    let l = system.liouvillian(Microwave::Off)?;
    let omega: Vec<f64> = energies_ev.iter().map(|&e| ev_to_angular(e)).collect();
    emission_spectrum(&l, &rho, &system.emitters(far_field), system.drive.omega(), &omega, options)
}

/// Spectral density per eV, for output.
pub fn per_ev(spectrum: &Spectrum) -> Vec<f64> {
    let d_omega_d_ev = ELEMENTARY_CHARGE / HBAR;
    spectrum.intensity.iter().map(|s| s * d_omega_d_ev).collect()
}

/// Ratio of the spectral weight in [centre − half, centre + half] (eV).
pub fn band_enhancement(sample: &Spectrum, reference: &Spectrum, centre_ev: f64, half_width_ev: f64) -> Result<f64> {
    let lo = ev_to_angular(centre_ev - half_width_ev);
    let hi = ev_to_angular(centre_ev + half_width_ev);
    let r = reference.band_integral(lo, hi);
    if !(r > 0.0) {
        return Err(Error::Numerical("reference spectrum has no weight in the band".into()));
    }
    Ok(sample.band_integral(lo, hi) / r)
}

/// Far-field stationary PL for each tilt angle θ (rad).
pub fn tilt_scan(system: &NvSystem, thetas: &[f64]) -> Result<Vec<f64>> {
    thetas
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut env = system.environment.clone();
            env.orientation = Orientation::Tilted(t);
            system
                .with_environment(env)
                .and_then(|s| s.steady_state(Microwave::Off).map(|rho| s.pl(&rho)))
                .map_err(|e| Error::AtPoint {
                    index: i,
                    value: format!("θ = {t:.4} rad"),
                    source: Box::new(e),
                })
        })
        .collect()
}
