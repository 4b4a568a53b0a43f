//! Rotating-frame Hamiltonian of the driven centre.

use super::operators::SparseOp;
use crate::constants::HBAR;
use crate::model::{LevelScheme, NvParameters, Spin};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Optical Rabi frequencies Ω_{e_j m, g_k m} in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct RabiTable {
    n: usize,
    values: Vec<Option<Complex64>>,
}

impl RabiTable {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            values: vec![None; 2 * (n + 1) * 3],
        }
    }

    fn slot(&self, j: usize, k: usize, m: Spin) -> Result<usize> {
        if j > 1 || k > self.n {
            return Err(Error::Usage(format!("no optical pair e{j} <-> g{k}")));
        }
        Ok((j * (self.n + 1) + k) * 3 + m.offset())
    }

    pub fn set(&mut self, j: usize, k: usize, m: Spin, omega: Complex64) -> Result<()> {
        let s = self.slot(j, k, m)?;
        self.values[s] = Some(omega);
        Ok(())
    }

    pub fn get(&self, j: usize, k: usize, m: Spin) -> Option<Complex64> {
        self.slot(j, k, m).ok().and_then(|s| self.values[s])
    }

    pub fn levels(&self) -> usize {
        self.n
    }
}

/// Frequencies defining the rotating frame and the microwave drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameFrequencies {
    /// Optical drive ω_d, rad/s.
    pub optical: f64,
    /// Microwave ω_µ, rad/s.
    pub microwave: f64,
    /// Microwave Rabi frequency Ω_µ, rad/s.
    pub microwave_rabi: f64,
}

/// H in joules, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    pub op: SparseOp,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        self.op.to_dense()
    }
}

/// Assemble H for the given frame and optical couplings.
pub fn build_hamiltonian(params: &NvParameters, frame: &FrameFrequencies, rabi: &RabiTable) -> Result<Hamiltonian> {
    let scheme: LevelScheme = params.scheme();
    let n = scheme.vibronic_levels();
    if rabi.levels() != n {
        return Err(Error::Assembly(format!(
            "Rabi table built for {} levels, scheme has {n}",
            rabi.levels()
        )));
    }
    let z = params.spin.zeeman_frequencies()?;
    let hb = |w: f64| Complex64::new(HBAR * w, 0.0);
    let mut t = Vec::new();

    let spin_block = |t: &mut Vec<(usize, usize, Complex64)>, idx: &dyn Fn(Spin) -> usize, plus: f64, minus: f64, offset: f64| {
        t.push((idx(Spin::Plus), idx(Spin::Plus), hb(plus - frame.microwave + offset)));
        t.push((idx(Spin::Zero), idx(Spin::Zero), hb(offset)));
        t.push((idx(Spin::Minus), idx(Spin::Minus), hb(minus - frame.microwave + offset)));
        for m in [Spin::Plus, Spin::Minus] {
            t.push((idx(Spin::Zero), idx(m), hb(frame.microwave_rabi)));
            t.push((idx(m), idx(Spin::Zero), hb(frame.microwave_rabi)));
        }
    };

    for k in 0..=n {
        let w = params.vibronic.omega(k);
        spin_block(&mut t, &|m| scheme.g(k, m), z.ground_plus, z.ground_minus, w);
    }
    let e0_offset = params.optical.omega_zpl() - frame.optical;
    for j in 0..2 {
        let w = if j == 0 { e0_offset } else { 0.0 };
        spin_block(&mut t, &|m| scheme.e(j, m), z.excited_plus, z.excited_minus, w);
    }

    for j in 0..2 {
        for k in 0..=n {
            for m in Spin::ALL {
                let omega = rabi.get(j, k, m).ok_or_else(|| {
                    Error::Assembly(format!("missing Rabi frequency for e{j},{m} <-> g{k},{m}"))
                })?;
                if !(omega.re.is_finite() && omega.im.is_finite()) {
                    return Err(Error::Assembly(format!("non-finite Rabi frequency for e{j} <-> g{k}")));
                }
                let v = -HBAR * omega;
                t.push((scheme.e(j, m), scheme.g(k, m), v));
                t.push((scheme.g(k, m), scheme.e(j, m), v.conj()));
            }
        }
    }

    let (s1, s0) = params.singlet_omegas();
    t.push((scheme.s1(), scheme.s1(), hb(s1 - frame.optical)));
    t.push((scheme.s0(), scheme.s0(), hb(s0 - frame.optical)));

    let op = SparseOp::from_triplets(scheme.dim(), t);
    if !op.is_hermitian(1e-12) {
        return Err(Error::Assembly("assembled Hamiltonian is not Hermitian".into()));
    }
    Ok(Hamiltonian { op })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Level;

    fn uniform_rabi(n: usize, w: f64) -> RabiTable {
        let mut r = RabiTable::empty(n);
        for j in 0..2 {
            for k in 0..=n {
                for m in Spin::ALL {
                    r.set(j, k, m, Complex64::new(w, 0.0)).unwrap();
                }
            }
        }
        r
    }

    fn frame() -> FrameFrequencies {
        FrameFrequencies {
            optical: crate::constants::ev_to_angular(2.033),
            microwave: 2.0 * std::f64::consts::PI * 2.87e9,
            microwave_rabi: 1e7,
        }
    }

    #[test]
    fn hermitian_and_sized() {
        let p = NvParameters::default();
        let h = build_hamiltonian(&p, &frame(), &uniform_rabi(7, 1e9)).unwrap();
        assert_eq!(h.dim(), 32);
        let d = h.to_dense();
        for r in 0..32 {
            for c in 0..32 {
                assert!((d[(r, c)] - d[(c, r)].conj()).norm() <= 1e-40);
            }
        }
    }

    #[test]
    fn missing_rabi_entry_fails() {
        let p = NvParameters::default();
        let mut r = RabiTable::empty(7);
        r.set(0, 0, Spin::Zero, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(build_hamiltonian(&p, &frame(), &r), Err(Error::Assembly(_))));
    }

    #[test]
    fn level_energies() {
        let p = NvParameters::default();
        let f = frame();
        let h = build_hamiltonian(&p, &f, &uniform_rabi(7, 0.0)).unwrap();
        let s = p.scheme();
        let e00 = s.index(Level::Excited(0), Some(Spin::Zero)).unwrap();
        let expect = HBAR * (p.optical.omega_zpl() - f.optical);
        assert!((h.op.get(e00, e00).re - expect).abs() < 1e-12 * expect.abs());
        let g3 = s.index(Level::Ground(3), Some(Spin::Zero)).unwrap();
        assert!((h.op.get(g3, g3).re - p.vibronic.energy[3]).abs() < 1e-30);
    }
}
