//! Time evolution with the exact propagator exp(G Δt).

use super::density::DensityOperator;
use super::liouvillian::{Liouvillian, Subspace};
use crate::{Error, Result};
use super::linalg::Lu;
use ndarray::{Array1, Array2};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        _ => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
    }
}

fn one_norm(a: &Array2<f64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with Padé approximants
/// (Higham 2005).
pub fn expm(a: &Array2<f64>) -> Result<Array2<f64>> {
    expm_inner(a, None)
}

/// As [`expm`] for a matrix whose row `row` vanishes; that row of the
/// result is then exactly the unit row, through every squaring.
pub fn expm_fixing_row(a: &Array2<f64>, row: usize) -> Result<Array2<f64>> {
    if a.row(row).iter().any(|v| *v != 0.0) {
        return Err(Error::Usage(format!("row {row} of the generator is not zero")));
    }
    expm_inner(a, Some(row))
}

fn expm_inner(a: &Array2<f64>, fixed: Option<usize>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Usage("expm needs a square matrix".into()));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Stiffness("generator block has non-finite entries".into()));
    }
    let eye = Array2::<f64>::eye(n);
    let a2 = a.dot(a);

    let (u, v, s) = if let Some(&(m, _)) = THETA.iter().find(|(_, t)| norm <= *t) {
        let b = pade_coefficients(m);
        let mut powers = vec![eye.clone(), a2.clone()];
        while powers.len() < m / 2 + 1 {
            let next = powers.last().unwrap().dot(&a2);
            powers.push(next);
        }
        let mut u = Array2::zeros((n, n));
        let mut v = Array2::zeros((n, n));
        for (k, p) in powers.iter().enumerate().take(m / 2 + 1) {
            u.scaled_add(b[2 * k + 1], p);
            v.scaled_add(b[2 * k], p);
        }
        (a.dot(&u), v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let f = 2f64.powi(-s);
        let a1 = a * f;
        let a2 = &a2 * (f * f);
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        let b = pade_coefficients(13);
        let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
        let mut u = a6.dot(&inner_u);
        u.scaled_add(b[7], &a6);
        u.scaled_add(b[5], &a4);
        u.scaled_add(b[3], &a2);
        u.scaled_add(b[1], &eye);
        let u = a1.dot(&u);
        let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
        let mut v = a6.dot(&inner_v);
        v.scaled_add(b[6], &a6);
        v.scaled_add(b[4], &a4);
        v.scaled_add(b[2], &a2);
        v.scaled_add(b[0], &eye);
        (u, v, s)
    };

    let q = &v - &u;
    let mut r = &v + &u;
    Lu::factor(q)
        .map_err(|e| Error::Stiffness(format!("Padé denominator is singular: {e}")))?
        .solve_in_place(&mut r);
    if let Some(p) = fixed {
        r.row_mut(p).fill(0.0);
        r[(p, p)] = 1.0;
    }
    for _ in 0..s {
        r = r.dot(&r);
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::Stiffness(format!(
            "propagator overflowed (norm {norm:.3e}, {s} squarings)"
        )));
    }
    Ok(r)
}

/// Options for [`evolve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Largest tolerated |tr ρ − 1| along the trajectory.
    pub trace_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            trace_tolerance: 1e-8,
        }
    }
}

/// States sampled on a time grid, stored as reduced real coordinates.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    subspace: Subspace,
    coords: super::operators::HermitianCoords,
    states: Vec<Vec<f64>>,
    /// max_t |tr ρ(t) − 1|.
    pub trace_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> DensityOperator {
        let full = self.subspace.expand(&self.states[i], self.coords.len());
        DensityOperator::from_coords(self.coords, &full)
    }

    /// Population of basis state `level` at every sample.
    pub fn population(&self, level: usize) -> Vec<f64> {
        let p = self.subspace.position(self.coords.diag(level));
        self.states.iter().map(|x| p.map_or(0.0, |p| x[p])).collect()
    }

    /// Σ_i w_i ρ_ii at every sample.
    pub fn weighted_populations(&self, weights: &[(usize, f64)]) -> Vec<f64> {
        let idx: Vec<(Option<usize>, f64)> = weights
            .iter()
            .map(|&(i, w)| (self.subspace.position(self.coords.diag(i)), w))
            .collect();
        self.states
            .iter()
            .map(|x| idx.iter().map(|(p, w)| p.map_or(0.0, |p| w * x[p])).sum())
            .collect()
    }
}

/// Coordinates in which the trace is one component: y_p = Σ_d x_d with
/// every other component unchanged. A trace-free generator then has a zero
/// row p, so propagators conserve the trace exactly.
struct TraceFrame {
    pivot: usize,
    others: Vec<usize>,
}

impl TraceFrame {
    fn new(diag: &[usize]) -> Option<Self> {
        let (&pivot, rest) = diag.split_first()?;
        Some(Self {
            pivot,
            others: rest.to_vec(),
        })
    }

    fn to_frame(&self, x: &mut Array1<f64>) {
        x[self.pivot] += self.others.iter().map(|&d| x[d]).sum::<f64>();
    }

    fn from_frame(&self, y: &mut Array1<f64>) {
        y[self.pivot] -= self.others.iter().map(|&d| y[d]).sum::<f64>();
    }

    /// T A T⁻¹ for a trace-free A.
    fn generator(&self, a: &Array2<f64>) -> Array2<f64> {
        let mut m = a.clone();
        m.row_mut(self.pivot).fill(0.0);
        let pc = m.column(self.pivot).to_owned();
        for &d in &self.others {
            m.column_mut(d).scaled_add(-1.0, &pc);
        }
        m
    }
}

/// Cache of propagators for the distinct steps of a time grid.
struct PropagatorCache<'a> {
    block: &'a Array2<f64>,
    fixed: Option<usize>,
    cache: Vec<(f64, Array2<f64>)>,
}

impl PropagatorCache<'_> {
    fn get(&mut self, dt: f64) -> Result<&Array2<f64>> {
        let pos = self
            .cache
            .iter()
            .position(|(t, _)| (t - dt).abs() <= 1e-9 * dt.abs().max(f64::MIN_POSITIVE));
        let pos = match pos {
            Some(p) => p,
            None => {
                let a = self.block * dt;
                let p = match self.fixed {
                    Some(r) => expm_fixing_row(&a, r)?,
                    None => expm(&a)?,
                };
                self.cache.push((dt, p));
                self.cache.len() - 1
            }
        };
        Ok(&self.cache[pos].1)
    }
}

fn stationary_anchor(l: &Liouvillian, sub: &Subspace, trace: f64) -> Option<Array1<f64>> {
    let ss = super::steady::solve_steady_state(l).ok()?;
    let full = l.coords().to_coords(&ss.rho.matrix);
    if full.iter().enumerate().any(|(i, v)| *v != 0.0 && !sub.contains(i)) {
        return None;
    }
    Some(Array1::from(sub.restrict(full.as_slice().unwrap())) * trace)
}

/// Propagate ρ_0, given at `times[0]`, through the grid.
pub fn evolve(l: &Liouvillian, rho0: &DensityOperator, times: &[f64], options: &EvolveOptions) -> Result<Trajectory> {
    if times.is_empty() {
        return Err(Error::Usage("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Usage("time grid must be finite and non-decreasing".into()));
    }
    if rho0.dim() != l.dim() {
        return Err(Error::Usage(format!(
            "initial state has dimension {}, generator {}",
            rho0.dim(),
            l.dim()
        )));
    }
    let hc = l.coords();
    let x0 = hc.to_coords(&rho0.matrix);
    let sub = l.support_closure(x0.as_slice().unwrap());
    let diag: Vec<usize> = (0..l.dim()).filter_map(|i| sub.position(hc.diag(i))).collect();
    let trace = |x: &Array1<f64>| diag.iter().map(|&p| x[p]).sum::<f64>();
    let frame = TraceFrame::new(&diag);
    let block = match &frame {
        Some(f) => f.generator(&l.restricted(&sub)),
        None => l.restricted(&sub),
    };
    let mut cache = PropagatorCache {
        block: &block,
        fixed: frame.as_ref().map(|f| f.pivot),
        cache: vec![],
    };

    let x_start = Array1::from(sub.restrict(x0.as_slice().unwrap()));
    let tr0 = trace(&x_start);
    // With a unique stationary state inside the block, propagate ρ − tr(ρ)ρ_ss:
    // long steps then only act on a decaying remainder.
    let anchor = stationary_anchor(l, &sub, tr0);
    let mut y = match &anchor {
        Some(a) => &x_start - a,
        None => x_start.clone(),
    };
    if let Some(f) = &frame {
        f.to_frame(&mut y);
    }
    let mut states = Vec::with_capacity(times.len());
    let mut drift: f64 = 0.0;
    states.push(x_start.to_vec());
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if dt > 0.0 {
            let p = cache.get(dt)?;
            y = p.dot(&y);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stiffness(format!("non-finite state at t = {:.3e} s", w[1])));
        }
        let mut x = y.clone();
        if let Some(f) = &frame {
            f.from_frame(&mut x);
        }
        if let Some(a) = &anchor {
            x += a;
        }
        drift = drift.max((trace(&x) - tr0).abs());
        states.push(x.to_vec());
    }
    if drift > options.trace_tolerance {
        return Err(Error::Stiffness(format!(
            "trace drifted by {drift:.3e} (tolerance {:.1e})",
            options.trace_tolerance
        )));
    }
    Ok(Trajectory {
        times: times.to_vec(),
        subspace: sub,
        coords: hc,
        states,
        trace_drift: drift,
    })
}
