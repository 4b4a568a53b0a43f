//! ODMR figures of merit as a function of pump intensity.

use super::odmr::{enhancement, odmr_figures, odmr_sweep, Enhancement, OdmrFigures};
use super::system::NvSystem;
use crate::{Error, Result};

#[derive(Debug)]
pub struct IntensityPoint {
    /// W/m².
    pub intensity: f64,
    pub sample: Result<OdmrFigures>,
    pub reference: Result<OdmrFigures>,
    /// Off-resonant PL ratio; defined even when a dip is unresolved.
    pub baseline_enhancement: Result<f64>,
}

impl IntensityPoint {
    pub fn enhancement(&self) -> Option<Enhancement> {
        match (&self.sample, &self.reference) {
            (Ok(s), Ok(r)) => Some(enhancement(s, r)),
            _ => None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.sample.is_ok() && self.reference.is_ok()
    }
}

/// Runs a sample and a reference ODMR sweep at each intensity. Failures are
/// kept per point so the rest of the sweep survives.
pub fn intensity_sweep(system: &NvSystem, reference: &NvSystem, intensities: &[f64], grid: &[f64]) -> Result<Vec<IntensityPoint>> {
    if intensities.is_empty() || intensities.iter().any(|i| !(*i > 0.0)) {
        return Err(Error::Usage("intensities must be positive and non-empty".into()));
    }
    Ok(intensities
        .iter()
        .map(|&i| {
            let curves = system
                .with_intensity(i)
                .and_then(|s| odmr_sweep(&s, grid))
                .and_then(|c| Ok((c, odmr_sweep(&reference.with_intensity(i)?, grid)?)));
            match curves {
                Ok((s, r)) => {
                    let b = super::odmr::baseline_ratio(&s, &r, super::odmr::BASELINE_FRACTION);
                    IntensityPoint {
                        intensity: i,
                        sample: odmr_figures(&s),
                        reference: odmr_figures(&r),
                        baseline_enhancement: b,
                    }
                }
                Err(e) => {
                    let msg = e.to_string();
                    IntensityPoint {
                        intensity: i,
                        sample: Err(e),
                        reference: Err(Error::Numerical(msg.clone())),
                        baseline_enhancement: Err(Error::Numerical(msg)),
                    }
                }
            }
        })
        .collect())
}
