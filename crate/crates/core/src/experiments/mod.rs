//! Simulated measurements built on the stationary and transient solvers.

mod odmr;
mod readout;
mod spectra;
mod sweep;
mod system;

pub use odmr::{
    baseline_ratio, dc_sensitivity, enhancement, linear_grid, odmr_figures, odmr_figures_with, odmr_sweep,
    Enhancement, OdmrCurve, OdmrFigures, BASELINE_FRACTION,
};
pub use readout::{compare_readouts, settling_time, time_domain_readout, Readout, ReadoutComparison, SpinPreparation};
pub use spectra::{band_enhancement, per_ev, system_spectrum, tilt_scan};
pub use sweep::{intensity_sweep, IntensityPoint};
pub use system::{Microwave, NvSystem};
