//! Lindblad dynamics: Hamiltonian, collapse channels, generator and solvers.

mod channels;
mod density;
mod hamiltonian;
mod linalg;
mod liouvillian;
mod operators;
mod propagate;
mod spectrum;
mod steady;

pub use channels::{build_channels, ChannelKind, CollapseChannel, EmissionRates};
pub use density::DensityOperator;
pub use hamiltonian::{build_hamiltonian, FrameFrequencies, Hamiltonian, RabiTable};
pub use linalg::Lu;
pub use liouvillian::{Liouvillian, Subspace};
pub use operators::{HermitianCoords, SparseOp};
pub use propagate::{evolve, expm, EvolveOptions, Trajectory};
pub use spectrum::{emission_spectrum, Emitter, Spectrum, SpectrumOptions};
pub use steady::{solve_steady_state, steady_state, SteadyState, RESIDUAL_TOLERANCE};

pub use spectrum::trapezoid;

use crate::model::{NvParameters, Spin};

/// Photoluminescence rate Σ_{k,m} Q_{k,m} γ_{k,m} ρ_{e0 m, e0 m} in photons/s.
pub fn pl_rate(rho: &DensityOperator, params: &NvParameters, emission: &EmissionRates, efficiency: &EmissionRates) -> f64 {
    let s = params.scheme();
    let mut total = 0.0;
    for (g, q) in emission.iter().zip(efficiency) {
        for m in Spin::ALL {
            total += q[m.offset()] * g[m.offset()] * rho.population(s.e(0, m));
        }
    }
    total
}
