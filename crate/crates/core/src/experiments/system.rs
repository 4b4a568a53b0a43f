//! A fully resolved centre-plus-environment model.

use crate::constants::HBAR;
use crate::dynamics::{
    build_channels, build_hamiltonian, solve_steady_state, CollapseChannel, DensityOperator, EmissionRates, Emitter,
    FrameFrequencies, Hamiltonian, Liouvillian, RabiTable, SparseOp,
};
use crate::model::{field_amplitude, screening_factor, NvParameters, OpticalDrive, Spin};
use crate::plasmonics::{nonlinear_rabi_coefficient, DipoleAxis, Environment, Orientation};
use crate::{Error, Result};
use num_complex::Complex64;

/// Microwave setting for one solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Microwave {
    Off,
    /// Drive at this cyclic frequency (Hz).
    At(f64),
}

#[derive(Clone, Debug)]
pub struct NvSystem {
    pub params: NvParameters,
    pub environment: Environment,
    pub drive: OpticalDrive,
    /// Couple the drive to g_0 only.
    pub ground_only: bool,
    /// Linear Rabi frequencies, rad/s.
    pub rabi: RabiTable,
    /// γ_{k,m}, s⁻¹.
    pub emission: EmissionRates,
    /// Q_{k,m}.
    pub efficiency: EmissionRates,
    pub channels: Vec<CollapseChannel>,
    /// η_k for the particle-mediated self-interaction, if enabled.
    nonlinear: Option<Vec<Complex64>>,
}

/// Fixed-point iterations allowed for the self-consistent Rabi term.
const NONLINEAR_ITERATIONS: usize = 60;

impl NvSystem {
    pub fn new(params: NvParameters, environment: Environment, drive: OpticalDrive, ground_only: bool) -> Result<Self> {
        params.validate()?;
        environment.validate()?;
        if !(drive.photon_energy > 0.0) {
            return Err(Error::Domain("drive photon energy must be positive".into()));
        }
        let n = params.vibronic.levels();
        let omega_d = drive.omega();
        let eps_b = environment.background_permittivity;
        let eps_eff = screening_factor(eps_b, params.optical.diamond_permittivity())?;
        let e0 = field_amplitude(drive.intensity, environment.background_index())?;
        let scale = environment.rabi_scale(omega_d)?;

        let mut rabi = RabiTable::empty(n);
        let mut mus = vec![];
        for k in 0..=n {
            let mu = params.vibronic.dipole_moment(params.optical.dipole, k)?;
            mus.push(mu);
            let omega = if ground_only && k > 0 {
                Complex64::new(0.0, 0.0)
            } else {
                mu * e0 * scale / (HBAR * eps_eff)
            };
            for j in 0..2 {
                for m in Spin::ALL {
                    rabi.set(j, k, m, omega)?;
                }
            }
        }

        let mut emission = Vec::with_capacity(n + 1);
        let mut efficiency = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let w = params.optical.omega_zpl() - params.vibronic.omega(k);
            let m = environment.emission(w)?;
            emission.push([params.vibronic.gamma_f[k] * m.total; 3]);
            efficiency.push([m.efficiency; 3]);
        }
        let channels = build_channels(&params, &emission)?;

        let nonlinear = if environment.nonlinear_rabi {
            let p = environment
                .particle
                .as_ref()
                .ok_or_else(|| Error::Config("nonlinear Rabi term requires a particle".into()))?;
            let alpha = environment.polarizability(omega_d)?.expect("particle present");
            let axis = match environment.orientation {
                Orientation::Radial => DipoleAxis::Radial,
                Orientation::Tangential => DipoleAxis::Tangential,
                Orientation::Tilted(_) => unreachable!("rejected by validate"),
            };
            Some(
                mus.iter()
                    .map(|&mu| nonlinear_rabi_coefficient(mu, alpha, eps_b, eps_eff, p.separation, axis))
                    .collect(),
            )
        } else {
            None
        };

        Ok(Self {
            params,
            environment,
            drive,
            ground_only,
            rabi,
            emission,
            efficiency,
            channels,
            nonlinear,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.scheme().dim()
    }

    fn frame(&self, mw: Microwave) -> FrameFrequencies {
        let (microwave, microwave_rabi) = match mw {
            Microwave::Off => (0.0, 0.0),
            Microwave::At(f) => (2.0 * std::f64::consts::PI * f, self.params.spin.microwave_rabi()),
        };
        FrameFrequencies {
            optical: self.drive.omega(),
            microwave,
            microwave_rabi,
        }
    }

    fn hamiltonian_with(&self, mw: Microwave, rabi: &RabiTable) -> Result<Hamiltonian> {
        build_hamiltonian(&self.params, &self.frame(mw), rabi)
    }

    pub fn hamiltonian(&self, mw: Microwave) -> Result<Hamiltonian> {
        self.hamiltonian_with(mw, &self.rabi)
    }

    pub fn liouvillian(&self, mw: Microwave) -> Result<Liouvillian> {
        Liouvillian::new(&self.hamiltonian(mw)?, &self.channels)
    }

    /// Σ µ_k ρ_{e_j m, g_k m}: the driven optical dipole in C·m.
    fn optical_polarization(&self, rho: &DensityOperator) -> Complex64 {
        let s = self.params.scheme();
        let mut p = Complex64::new(0.0, 0.0);
        for k in 0..=s.vibronic_levels() {
            let mu = self.params.vibronic.dipole_moment(self.params.optical.dipole, k).unwrap_or(0.0);
            for j in 0..2 {
                for m in Spin::ALL {
                    p += mu * rho.element(s.e(j, m), s.g(k, m));
                }
            }
        }
        p
    }

    /// Stationary state; with the self-interaction term enabled the Rabi
    /// frequencies are iterated to self-consistency.
    pub fn steady_state(&self, mw: Microwave) -> Result<DensityOperator> {
        let l = self.liouvillian(mw)?;
        let mut rho = solve_steady_state(&l)?.rho;
        let Some(eta) = &self.nonlinear else {
            return Ok(rho);
        };
        let mut last = Complex64::new(0.0, 0.0);
        for _ in 0..NONLINEAR_ITERATIONS {
            let p = self.optical_polarization(&rho);
            if (p - last).norm() <= 1e-10 * p.norm().max(f64::MIN_POSITIVE) {
                return Ok(rho);
            }
            last = p;
            let rabi = self.rabi_with_feedback(eta, p)?;
            let l = Liouvillian::new(&self.hamiltonian_with(mw, &rabi)?, &self.channels)?;
            rho = solve_steady_state(&l)?.rho;
        }
        Err(Error::Numerical("self-consistent Rabi iteration did not converge".into()))
    }

    fn rabi_with_feedback(&self, eta: &[Complex64], p: Complex64) -> Result<RabiTable> {
        let n = self.params.vibronic.levels();
        let mut rabi = RabiTable::empty(n);
        for (k, e) in eta.iter().enumerate() {
            for j in 0..2 {
                for m in Spin::ALL {
                    let lin = self.rabi.get(j, k, m).expect("complete table");
                    let extra = if self.ground_only && k > 0 { Complex64::new(0.0, 0.0) } else { e * p };
                    rabi.set(j, k, m, lin + extra)?;
                }
            }
        }
        Ok(rabi)
    }

    /// Ratio |Ω^nl|/|Ω^lin| for the e_0 ↔ g_0 pair in state ρ, if enabled.
    pub fn nonlinear_ratio(&self, rho: &DensityOperator) -> Option<f64> {
        let eta = self.nonlinear.as_ref()?;
        let p = self.optical_polarization(rho);
        let lin = self.rabi.get(0, 0, Spin::Zero)?.norm();
        Some((eta[0] * p).norm() / lin)
    }

    /// Detected photoluminescence rate, photons/s.
    pub fn pl(&self, rho: &DensityOperator) -> f64 {
        crate::dynamics::pl_rate(rho, &self.params, &self.emission, &self.efficiency)
    }

    /// Weights Q γ ρ_e0m for the PL observable, as (basis index, weight).
    pub fn pl_weights(&self) -> Vec<(usize, f64)> {
        let s = self.params.scheme();
        Spin::ALL
            .iter()
            .map(|&m| {
                let w: f64 = self
                    .emission
                    .iter()
                    .zip(&self.efficiency)
                    .map(|(g, q)| g[m.offset()] * q[m.offset()])
                    .sum();
                (s.e(0, m), w)
            })
            .collect()
    }

    /// Emitting transitions e_0,m → g_k,m weighted by Qγ (far field) or γ.
    pub fn emitters(&self, far_field: bool) -> Vec<Emitter> {
        let s = self.params.scheme();
        let d = s.dim();
        let mut out = vec![];
        for k in 0..=s.vibronic_levels() {
            for m in Spin::ALL {
                let g = self.emission[k][m.offset()];
                let q = if far_field { self.efficiency[k][m.offset()] } else { 1.0 };
                out.push(Emitter {
                    op: SparseOp::transition(d, s.g(k, m), s.e(0, m)),
                    weight: g * q,
                });
            }
        }
        out
    }

    /// Same centre, drive energy and intensity with the particle removed and
    /// the background set to vacuum.
    pub fn reference(&self) -> Result<Self> {
        Self::new(self.params.clone(), self.reference_environment(), self.drive.clone(), self.ground_only)
    }

    fn reference_environment(&self) -> Environment {
        let mut env = Environment::free_space();
        if let Orientation::Tilted(t) = self.environment.orientation {
            env.orientation = Orientation::Tilted(t);
        }
        env
    }

    pub fn with_intensity(&self, intensity: f64) -> Result<Self> {
        let drive = OpticalDrive {
            intensity,
            ..self.drive.clone()
        };
        Self::new(self.params.clone(), self.environment.clone(), drive, self.ground_only)
    }

    pub fn with_environment(&self, environment: Environment) -> Result<Self> {
        Self::new(self.params.clone(), environment, self.drive.clone(), self.ground_only)
    }
}
