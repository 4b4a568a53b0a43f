//! Level scheme, parameter tables and derived single-centre quantities.

pub mod data;
mod levels;
mod params;

pub use levels::{Level, LevelScheme, Spin};
pub use params::{
    field_amplitude, screening_factor, IscParameters, NvParameters, OpticalDrive,
    OpticalParameters, SpinParameters, VibronicTable, ZeemanFrequencies,
};
