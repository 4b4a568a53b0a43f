//! Basis bookkeeping for the vibronic ⊗ spin product space plus the two
//! singlet levels.
//!
//! Ordering is orbital-major: g_0 … g_n, e_0, e_1, each carrying the spin
//! projections (+1, 0, −1), followed by s_1 and s_0.

use crate::{Error, Result};
use std::fmt;

/// Spin projection m_s of the triplet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Plus,
    Zero,
    Minus,
}

impl Spin {
    pub const ALL: [Spin; 3] = [Spin::Plus, Spin::Zero, Spin::Minus];

    pub fn offset(self) -> usize {
        match self {
            Spin::Plus => 0,
            Spin::Zero => 1,
            Spin::Minus => 2,
        }
    }

    pub fn projection(self) -> i8 {
        match self {
            Spin::Plus => 1,
            Spin::Zero => 0,
            Spin::Minus => -1,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.projection())
    }
}

/// Orbital or singlet level label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    /// Ground-state vibronic level g_k.
    Ground(usize),
    /// Excited vibronic level e_j, j ∈ {0, 1}.
    Excited(usize),
    /// Upper singlet s_1.
    SingletUpper,
    /// Lower singlet s_0.
    SingletLower,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Ground(k) => write!(f, "g{k}"),
            Level::Excited(j) => write!(f, "e{j}"),
            Level::SingletUpper => write!(f, "s1"),
            Level::SingletLower => write!(f, "s0"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelScheme {
    n: usize,
}

impl LevelScheme {
    /// Scheme with `n` excited ground-state vibronic levels (g_1 … g_n).
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain(
                "at least one ground vibronic level above g0 is required".into(),
            ));
        }
        Ok(Self { n })
    }

    pub fn vibronic_levels(&self) -> usize {
        self.n
    }

    /// Number of orbital levels carrying a spin triplet.
    pub fn orbitals(&self) -> usize {
        self.n + 3
    }

    pub fn triplet_dim(&self) -> usize {
        3 * self.orbitals()
    }

    pub fn dim(&self) -> usize {
        self.triplet_dim() + 2
    }

    /// Index of a basis state. Triplet levels need a spin, singlets must not have one.
    pub fn index(&self, level: Level, spin: Option<Spin>) -> Result<usize> {
        match (level, spin) {
            (Level::Ground(k), Some(m)) if k <= self.n => Ok(3 * k + m.offset()),
            (Level::Excited(j), Some(m)) if j <= 1 => Ok(3 * (self.n + 1 + j) + m.offset()),
            (Level::SingletUpper, None) => Ok(self.triplet_dim()),
            (Level::SingletLower, None) => Ok(self.triplet_dim() + 1),
            (Level::Ground(_) | Level::Excited(_), None) => {
                Err(Error::Usage(format!("level {level} needs a spin projection")))
            }
            (Level::SingletUpper | Level::SingletLower, Some(_)) => {
                Err(Error::Usage(format!("singlet level {level} has no spin projection")))
            }
            _ => Err(Error::Usage(format!(
                "level {level} is outside a scheme with n = {}",
                self.n
            ))),
        }
    }

    /// Inverse of [`index`](Self::index).
    pub fn label(&self, index: usize) -> Result<(Level, Option<Spin>)> {
        if index >= self.dim() {
            return Err(Error::Usage(format!(
                "basis index {index} out of range for dimension {}",
                self.dim()
            )));
        }
        if index == self.triplet_dim() {
            return Ok((Level::SingletUpper, None));
        }
        if index == self.triplet_dim() + 1 {
            return Ok((Level::SingletLower, None));
        }
        let orbital = index / 3;
        let spin = Spin::ALL[index % 3];
        let level = if orbital <= self.n {
            Level::Ground(orbital)
        } else {
            Level::Excited(orbital - self.n - 1)
        };
        Ok((level, Some(spin)))
    }

    pub(crate) fn g(&self, k: usize, m: Spin) -> usize {
        debug_assert!(k <= self.n);
        3 * k + m.offset()
    }

    pub(crate) fn e(&self, j: usize, m: Spin) -> usize {
        debug_assert!(j <= 1);
        3 * (self.n + 1 + j) + m.offset()
    }

    pub(crate) fn s1(&self) -> usize {
        self.triplet_dim()
    }

    pub(crate) fn s0(&self) -> usize {
        self.triplet_dim() + 1
    }

    /// Human-readable label such as `g3,-1` or `s0`.
    pub fn name(&self, index: usize) -> String {
        match self.label(index) {
            Ok((level, Some(m))) => format!("{level},{m}"),
            Ok((level, None)) => level.to_string(),
            Err(_) => format!("#{index}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(LevelScheme::new(7).unwrap().dim(), 32);
        assert_eq!(LevelScheme::new(1).unwrap().dim(), 14);
        assert!(LevelScheme::new(0).is_err());
    }

    #[test]
    fn index_examples() {
        let s = LevelScheme::new(7).unwrap();
        assert_eq!(s.index(Level::Ground(0), Some(Spin::Plus)).unwrap(), 0);
        assert_eq!(s.index(Level::SingletLower, None).unwrap(), 31);
        let e1 = s.index(Level::Excited(1), Some(Spin::Minus)).unwrap();
        assert!((24..30).contains(&e1));
        assert!(s.index(Level::Ground(0), None).is_err());
        assert!(s.index(Level::SingletUpper, Some(Spin::Zero)).is_err());
        assert!(s.index(Level::Ground(8), Some(Spin::Zero)).is_err());
        assert!(s.index(Level::Excited(2), Some(Spin::Zero)).is_err());
    }

    #[test]
    fn roundtrip() {
        let s = LevelScheme::new(4).unwrap();
        for i in 0..s.dim() {
            let (level, spin) = s.label(i).unwrap();
            assert_eq!(s.index(level, spin).unwrap(), i);
        }
        assert!(s.label(s.dim()).is_err());
    }
}
