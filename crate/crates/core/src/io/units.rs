//! Quantities written as strings with an explicit unit, e.g. `"4.4 mT"`,
//! `"15 THz"` or `"1/7.7 ms"` (a rate given as the inverse of a lifetime).

use std::fmt;

/// Physical dimension of a configured quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    /// J.
    Energy,
    /// Rate constant in s⁻¹; Hz-family units are read as s⁻¹ without 2π.
    Rate,
    /// Cyclic frequency, Hz.
    Frequency,
    /// Magnetic field, T.
    Field,
    /// m.
    Length,
    /// Electric dipole moment, C·m.
    Dipole,
    /// W/m².
    Intensity,
    /// s.
    Time,
    /// rad.
    Angle,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Energy => "energy",
            Dimension::Rate => "rate",
            Dimension::Frequency => "frequency",
            Dimension::Field => "magnetic field",
            Dimension::Length => "length",
            Dimension::Dipole => "dipole moment",
            Dimension::Intensity => "intensity",
            Dimension::Time => "time",
            Dimension::Angle => "angle",
        };
        f.write_str(s)
    }
}

const EV: f64 = crate::constants::ELEMENTARY_CHARGE;

const UNITS: &[(&str, Dimension, f64)] = &[
    ("eV", Dimension::Energy, EV),
    ("meV", Dimension::Energy, 1e-3 * EV),
    ("J", Dimension::Energy, 1.0),
    ("1/s", Dimension::Rate, 1.0),
    ("s^-1", Dimension::Rate, 1.0),
    ("/s", Dimension::Rate, 1.0),
    ("Hz", Dimension::Frequency, 1.0),
    ("kHz", Dimension::Frequency, 1e3),
    ("MHz", Dimension::Frequency, 1e6),
    ("GHz", Dimension::Frequency, 1e9),
    ("THz", Dimension::Frequency, 1e12),
    ("PHz", Dimension::Frequency, 1e15),
    ("T", Dimension::Field, 1.0),
    ("mT", Dimension::Field, 1e-3),
    ("uT", Dimension::Field, 1e-6),
    ("µT", Dimension::Field, 1e-6),
    ("G", Dimension::Field, 1e-4),
    ("m", Dimension::Length, 1.0),
    ("um", Dimension::Length, 1e-6),
    ("µm", Dimension::Length, 1e-6),
    ("nm", Dimension::Length, 1e-9),
    ("D", Dimension::Dipole, crate::constants::DEBYE),
    ("C m", Dimension::Dipole, 1.0),
    ("C*m", Dimension::Dipole, 1.0),
    ("W/m^2", Dimension::Intensity, 1.0),
    ("W/cm^2", Dimension::Intensity, 1e4),
    ("kW/cm^2", Dimension::Intensity, 1e7),
    ("MW/cm^2", Dimension::Intensity, 1e10),
    ("mW/um^2", Dimension::Intensity, 1e9),
    ("uW/um^2", Dimension::Intensity, 1e6),
    ("mW/µm^2", Dimension::Intensity, 1e9),
    ("µW/µm^2", Dimension::Intensity, 1e6),
    ("mW/µm²", Dimension::Intensity, 1e9),
    ("µW/µm²", Dimension::Intensity, 1e6),
    ("s", Dimension::Time, 1.0),
    ("ms", Dimension::Time, 1e-3),
    ("us", Dimension::Time, 1e-6),
    ("µs", Dimension::Time, 1e-6),
    ("ns", Dimension::Time, 1e-9),
    ("ps", Dimension::Time, 1e-12),
    ("fs", Dimension::Time, 1e-15),
    ("rad", Dimension::Angle, 1.0),
    ("deg", Dimension::Angle, std::f64::consts::PI / 180.0),
];

/// Why a quantity string was rejected.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitError {
    MissingUnit,
    BadNumber(String),
    UnknownUnit(String),
    WrongDimension { unit: String, found: Dimension },
    NotFinite,
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitError::MissingUnit => write!(f, "missing unit"),
            UnitError::BadNumber(s) => write!(f, "cannot read a number from {s:?}"),
            UnitError::UnknownUnit(u) => write!(f, "unknown unit {u:?}"),
            UnitError::WrongDimension { unit, found } => write!(f, "unit {unit:?} is a {found}"),
            UnitError::NotFinite => write!(f, "value is not finite"),
        }
    }
}

/// Longest leading substring that parses as a float, and the rest.
fn split_number(s: &str) -> Option<(f64, &str)> {
    let end = s
        .char_indices()
        .take_while(|(_, c)| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        .map(|(i, c)| i + c.len_utf8())
        .last()?;
    (1..=end)
        .rev()
        .filter(|&i| s.is_char_boundary(i))
        .find_map(|i| s[..i].parse::<f64>().ok().map(|v| (v, &s[i..])))
}

fn lookup(unit: &str) -> Option<(Dimension, f64)> {
    UNITS.iter().find(|(u, _, _)| *u == unit).map(|&(_, d, f)| (d, f))
}

/// Parse `text` as a quantity of dimension `dim`, returning its SI value.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("1/").filter(|r| split_number(r.trim_start()).is_some()) {
        // "1/<time>" is a rate
        let (v, unit) = split_number(rest.trim_start()).expect("checked");
        let unit = unit.trim();
        if unit.is_empty() {
            return Err(UnitError::MissingUnit);
        }
        let (found, f) = lookup(unit).ok_or_else(|| UnitError::UnknownUnit(unit.into()))?;
        if found != Dimension::Time || dim != Dimension::Rate {
            return Err(UnitError::WrongDimension {
                unit: format!("1/{unit}"),
                found: if found == Dimension::Time { Dimension::Rate } else { found },
            });
        }
        let value = 1.0 / (v * f);
        return if value.is_finite() { Ok(value) } else { Err(UnitError::NotFinite) };
    }
    let (v, unit) = split_number(t).ok_or_else(|| UnitError::BadNumber(t.into()))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(UnitError::MissingUnit);
    }
    let (found, f) = lookup(unit).ok_or_else(|| UnitError::UnknownUnit(unit.into()))?;
    let accepted = found == dim || (dim == Dimension::Rate && found == Dimension::Frequency);
    if !accepted {
        return Err(UnitError::WrongDimension {
            unit: unit.into(),
            found,
        });
    }
    let value = v * f;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(UnitError::NotFinite)
    }
}

/// Canonical text for an SI value, used when writing configs back out.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    let (scale, unit) = match dim {
        Dimension::Energy => (1.0, "J"),
        Dimension::Rate => (1.0, "1/s"),
        Dimension::Frequency => (1.0, "Hz"),
        Dimension::Field => (1.0, "T"),
        Dimension::Length => (1.0, "m"),
        Dimension::Dipole => (1.0, "C m"),
        Dimension::Intensity => (1.0, "W/m^2"),
        Dimension::Time => (1.0, "s"),
        Dimension::Angle => (1.0, "rad"),
    };
    format!("{:e} {unit}", value / scale)
}
