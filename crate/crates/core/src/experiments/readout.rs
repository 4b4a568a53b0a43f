//! Transient PL after switching on the laser with the spin prepared in
//! |0⟩ or in an equal mixture of |±1⟩.

use super::system::{Microwave, NvSystem};
use crate::dynamics::{evolve, steady_state, trapezoid, DensityOperator, EvolveOptions};
use crate::model::Spin;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinPreparation {
    Zero,
    PlusMinus,
}

impl SpinPreparation {
    pub fn state(self, system: &NvSystem) -> Result<DensityOperator> {
        let s = system.params.scheme();
        let d = s.dim();
        match self {
            SpinPreparation::Zero => DensityOperator::pure(d, s.g(0, Spin::Zero)),
            SpinPreparation::PlusMinus => {
                DensityOperator::mixture(d, &[(s.g(0, Spin::Plus), 0.5), (s.g(0, Spin::Minus), 0.5)])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    /// s.
    pub times: Vec<f64>,
    /// PL after preparing |0⟩, photons/s.
    pub pl_zero: Vec<f64>,
    /// PL after preparing |±1⟩, photons/s.
    pub pl_plus_minus: Vec<f64>,
    /// Stationary PL.
    pub steady_pl: f64,
    /// ∫ (PL_0 − PL_±1) dt, photons.
    pub contrast_area: f64,
    /// Time after which both traces stay within the threshold of the
    /// stationary PL, s.
    pub stabilization_time: f64,
}

impl Readout {
    pub fn difference(&self) -> Vec<f64> {
        self.pl_zero.iter().zip(&self.pl_plus_minus).map(|(a, b)| a - b).collect()
    }
}

/// First time after which `|y − target| ≤ threshold·target` holds for all later samples.
pub fn settling_time(times: &[f64], y: &[f64], target: f64, threshold: f64) -> Option<f64> {
    let tol = threshold * target.abs();
    let last_bad = y.iter().rposition(|v| (v - target).abs() > tol);
    match last_bad {
        None => Some(times[0]),
        Some(i) if i + 1 < y.len() => Some(times[i + 1]),
        Some(_) => None,
    }
}

pub fn time_domain_readout(
    system: &NvSystem,
    times: &[f64],
    microwave: Microwave,
    threshold: f64,
) -> Result<Readout> {
    if times.len() < 2 {
        return Err(Error::Usage("readout needs at least two time points".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::Usage(format!("stabilisation threshold {threshold} must be positive")));
    }
    let l = system.liouvillian(microwave)?;
    let steady_pl = system.pl(&steady_state(&l)?);
    let weights = system.pl_weights();
    let opts = EvolveOptions::default();
    let run = |prep: SpinPreparation| -> Result<Vec<f64>> {
        let traj = evolve(&l, &prep.state(system)?, times, &opts)?;
        Ok(traj.weighted_populations(&weights))
    };
    let pl_zero = run(SpinPreparation::Zero)?;
    let pl_plus_minus = run(SpinPreparation::PlusMinus)?;
    let diff: Vec<f64> = pl_zero.iter().zip(&pl_plus_minus).map(|(a, b)| a - b).collect();
    let contrast_area = trapezoid(times, &diff);
    let settle = |y: &[f64]| {
        settling_time(times, y, steady_pl, threshold).ok_or_else(|| {
            Error::NotStabilized(format!(
                "PL still outside {:.1}% of its stationary value at {:.3e} s",
                threshold * 100.0,
                times[times.len() - 1]
            ))
        })
    };
    let stabilization_time = settle(&pl_zero)?.max(settle(&pl_plus_minus)?);
    Ok(Readout {
        times: times.to_vec(),
        pl_zero,
        pl_plus_minus,
        steady_pl,
        contrast_area,
        stabilization_time,
    })
}

/// Ratios of a readout to a reference readout.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ReadoutComparison {
    pub steady_enhancement: f64,
    pub area_enhancement: f64,
    /// t_ref / t_sample; above one means the sample settles faster.
    pub stabilization_speedup: f64,
}

pub fn compare_readouts(sample: &Readout, reference: &Readout) -> ReadoutComparison {
    ReadoutComparison {
        steady_enhancement: sample.steady_pl / reference.steady_pl,
        area_enhancement: sample.contrast_area / reference.contrast_area,
        stabilization_speedup: reference.stabilization_time / sample.stabilization_time,
    }
}
