//! Steady-state and transient optically detected magnetic resonance of a
//! nanodiamond NV⁻ centre, optionally coupled to a metal nanoparticle.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the level scheme and the rate/parameter tables,
//! * [`plasmonics`] computes the particle response and its effect on the
//!   Rabi frequencies and emission rates,
//! * [`dynamics`] builds the Lindblad generator and solves it,
//! * [`experiments`] turns solutions into ODMR curves and figures of merit,
//! * [`io`] reads run configurations and writes results.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod plasmonics;

pub use error::{Error, Result};
