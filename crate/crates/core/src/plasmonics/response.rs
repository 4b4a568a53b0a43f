//! Dipolar response of a small sphere and its effect on a nearby emitter.
//!
//! Lengths in metres, polarizabilities as volumes (m³), wavenumbers in m⁻¹.

use crate::constants::{EPSILON_0, HBAR};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Orientation of an emitting dipole relative to the particle surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DipoleAxis {
    /// Along the line joining particle centre and emitter.
    Radial,
    /// Perpendicular to that line.
    Tangential,
}

impl DipoleAxis {
    /// Near-field image factor s_α.
    pub fn image_sign(self) -> f64 {
        match self {
            DipoleAxis::Radial => 2.0,
            DipoleAxis::Tangential => -1.0,
        }
    }
}

/// α_L = r³ (ε_m − ε_b)/(ε_m + 2ε_b).
pub fn quasistatic_polarizability(eps_m: Complex64, eps_b: f64, radius: f64) -> Result<Complex64> {
    if !(eps_b > 0.0) {
        return Err(Error::Domain(format!("background permittivity {eps_b} must be > 0")));
    }
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("particle radius {radius} must be > 0")));
    }
    let den = eps_m + 2.0 * eps_b;
    if den.norm() < 1e-12 * eps_b {
        return Err(Error::Numerical(
            "quasistatic pole: eps_m = -2 eps_b with no loss".into(),
        ));
    }
    Ok(radius.powi(3) * (eps_m - eps_b) / den)
}

/// Radiation-reaction corrected polarizability α = α_L / (1 − (2i/3) k_b³ α_L).
pub fn corrected_polarizability(alpha_l: Complex64, k_b: f64) -> Result<Complex64> {
    let den = 1.0 - I * (2.0 / 3.0) * k_b.powi(3) * alpha_l;
    if den.norm() < 1e-300 {
        return Err(Error::Numerical("radiation-reaction denominator vanished".into()));
    }
    Ok(alpha_l / den)
}

/// Wavenumber k_b = n_b ω / c.
pub fn wavenumber(omega: f64, n_b: f64) -> f64 {
    n_b * omega / crate::constants::SPEED_OF_LIGHT
}

/// Local-field factor F = 1 + s_α α/R³ at the emitter.
pub fn rabi_factor(alpha: Complex64, separation: f64, axis: DipoleAxis) -> Complex64 {
    1.0 + axis.image_sign() * alpha / separation.powi(3)
}

fn check_separation(separation: f64) -> Result<()> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::Domain(format!("separation {separation} must be > 0")));
    }
    Ok(())
}

/// Total decay rate relative to the free-space rate, including the
/// background index.
pub fn decay_rate_ratio(alpha: Complex64, k_b: f64, separation: f64, n_b: f64, axis: DipoleAxis) -> Result<f64> {
    check_separation(separation)?;
    let x = k_b * separation;
    let phase = (2.0 * I * x).exp();
    let k3 = k_b.powi(3);
    let inner = match axis {
        DipoleAxis::Radial => {
            6.0 * k3 * (alpha * phase * (-1.0 / x.powi(4) + 2.0 / (I * x.powi(5)) + 1.0 / x.powi(6))).im
        }
        DipoleAxis::Tangential => {
            1.5 * k3
                * (alpha
                    * phase
                    * (1.0 / x.powi(2) - 2.0 / (I * x.powi(3)) - 3.0 / x.powi(4)
                        + 2.0 / (I * x.powi(5))
                        + 1.0 / x.powi(6)))
                    .im
        }
    };
    Ok(n_b * (1.0 + inner))
}

/// Non-radiative (absorbed) part of the decay rate relative to the free-space rate.
pub fn nonradiative_rate_ratio(alpha: Complex64, k_b: f64, separation: f64, n_b: f64, axis: DipoleAxis) -> Result<f64> {
    check_separation(separation)?;
    let x = k_b * separation;
    let k3 = k_b.powi(3);
    let absorption = alpha.im - (2.0 / 3.0) * k3 * alpha.norm_sqr();
    let geometry = match axis {
        DipoleAxis::Radial => 6.0 * (1.0 / x.powi(6) + 1.0 / x.powi(4)),
        DipoleAxis::Tangential => 1.5 * (1.0 / x.powi(6) - 1.0 / x.powi(4) + 1.0 / x.powi(2)),
    };
    Ok(n_b * k3 * absorption * geometry)
}

/// Q = (γ − γ_NR)/γ.
pub fn quantum_efficiency(total: f64, nonradiative: f64) -> Result<f64> {
    if !(total > 0.0) {
        return Err(Error::Numerical(format!("non-positive total decay rate {total}")));
    }
    if nonradiative < -1e-12 * total || nonradiative > total * (1.0 + 1e-12) {
        return Err(Error::Numerical(format!(
            "non-radiative rate {nonradiative} outside [0, {total}]"
        )));
    }
    Ok(((total - nonradiative) / total).clamp(0.0, 1.0))
}

/// η_k in s⁻¹ per C·m of driven emitter dipole, such that
/// Ω^nl = η_k Σ µ ρ_eg.
pub fn nonlinear_rabi_coefficient(
    mu_k: f64,
    alpha: Complex64,
    eps_b: f64,
    eps_eff: f64,
    separation: f64,
    axis: DipoleAxis,
) -> Complex64 {
    let s = axis.image_sign();
    mu_k * s * s * alpha / (HBAR * 4.0 * PI * EPSILON_0 * eps_b * eps_eff * eps_eff * separation.powi(6))
}
