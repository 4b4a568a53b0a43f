//! Stationary state of the generator.

use super::density::DensityOperator;
use super::liouvillian::Liouvillian;
use crate::{Error, Result};
use super::linalg::Lu;
use ndarray::Array1;

/// Stationary state and solver diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityOperator,
    /// ‖G x‖_∞ / ‖G‖ for the returned state.
    pub relative_residual: f64,
    /// Size of the invariant coordinate block that was solved.
    pub block_size: usize,
}

/// Relative residual above which the solution is rejected.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

pub fn steady_state(l: &Liouvillian) -> Result<DensityOperator> {
    Ok(solve_steady_state(l)?.rho)
}

pub fn solve_steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let classes = l.closed_classes();
    if classes != 1 {
        return Err(Error::DegenerateSteadyState(format!(
            "population graph has {classes} closed classes"
        )));
    }
    let hc = l.coords();
    let d = l.dim();
    let sub = l.population_closure();
    let mut a = l.restricted(&sub);
    let scale = l.norm().max(1.0);

    // Replace one population row by the trace condition.
    let pivot = sub.position(hc.diag(0)).expect("populations are in the closure");
    a.row_mut(pivot).fill(0.0);
    for i in 0..d {
        let p = sub.position(hc.diag(i)).expect("populations are in the closure");
        a[(pivot, p)] = scale;
    }
    let mut b = Array1::zeros(sub.len());
    b[pivot] = scale;
    // row equilibration keeps the slow rates from drowning in rounding
    for (mut row, bi) in a.rows_mut().into_iter().zip(b.iter_mut()) {
        let m = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 {
            row.mapv_inplace(|v| v / m);
            *bi /= m;
        }
    }

    let a_copy = a.clone();
    let lu = Lu::factor(a).map_err(|e| Error::DegenerateSteadyState(format!("singular generator block: {e}")))?;
    let mut x = lu.solve(&b);
    // one step of iterative refinement
    let r = &b - &a_copy.dot(&x);
    x += &lu.solve(&r);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSteadyState("non-finite stationary state".into()));
    }

    let mut full = sub.expand(x.as_slice().unwrap(), hc.len());
    let tr: f64 = (0..d).map(|i| full[hc.diag(i)]).sum();
    if !(tr.abs() > 0.5) {
        return Err(Error::DegenerateSteadyState(format!("stationary trace {tr}")));
    }
    full.iter_mut().for_each(|v| *v /= tr);
    let res = l.apply_real(&full);
    let rel = res.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
    if rel > RESIDUAL_TOLERANCE {
        return Err(Error::Numerical(format!(
            "stationary residual {rel:.3e} exceeds {RESIDUAL_TOLERANCE:.0e} of the generator norm"
        )));
    }
    let min_pop = (0..d).map(|i| full[hc.diag(i)]).fold(f64::INFINITY, f64::min);
    if min_pop < -1e-9 {
        return Err(Error::DegenerateSteadyState(format!(
            "negative stationary population {min_pop:.3e}"
        )));
    }
    Ok(SteadyState {
        rho: DensityOperator::from_coords(hc, &full),
        relative_residual: rel,
        block_size: sub.len(),
    })
}
