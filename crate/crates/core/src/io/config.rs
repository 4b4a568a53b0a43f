//! Run configuration: a TOML file in which every dimensional quantity is a
//! string carrying its unit. Omitted keys take the model defaults, so an
//! empty file describes an isolated centre in vacuum.

use super::units::{format_quantity, parse_quantity, Dimension};
use crate::constants::ELEMENTARY_CHARGE;
use crate::dynamics::SpectrumOptions;
use crate::model::{IscParameters, OpticalParameters, SpinParameters};
use crate::plasmonics::Orientation;
use crate::{Error, Result};
use serde::Deserialize;
use std::ops::Range;
use std::path::{Path, PathBuf};
use toml::{Spanned, Value};

type Quantity = Option<Spanned<Value>>;
type Number = Option<Spanned<f64>>;
type Count = Option<Spanned<i64>>;
type Text = Option<Spanned<String>>;

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    nv: RawNv,
    spin: RawSpin,
    isc: RawIsc,
    drive: RawDrive,
    plasmonics: RawPlasmonics,
    odmr: RawOdmr,
    trace: RawTrace,
    spectrum: RawSpectrum,
    sweep: RawSweep,
    fom: RawFom,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawNv {
    levels: Count,
    vibronic_table: Text,
    zpl_energy: Quantity,
    dipole: Quantity,
    diamond_index: Number,
    dephasing: Quantity,
    excited_vibronic_decay: Quantity,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawSpin {
    d_gs: Quantity,
    d_es: Quantity,
    g_factor: Number,
    b_nv: Quantity,
    b_mw: Quantity,
    relax_ground: Quantity,
    relax_excited: Quantity,
    dephase_ground: Quantity,
    dephase_excited: Quantity,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawIsc {
    to_singlet_pm: Quantity,
    to_singlet_zero: Quantity,
    from_singlet_pm: Quantity,
    from_singlet_zero: Quantity,
    singlet_decay: Quantity,
    singlet_gap: Quantity,
    triplet_singlet_gap: Quantity,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawDrive {
    photon_energy: Quantity,
    intensity: Quantity,
    ground_only: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawPlasmonics {
    material: Text,
    radius: Quantity,
    separation: Quantity,
    background_permittivity: Number,
    orientation: Text,
    theta: Quantity,
    nonlinear_rabi: Option<bool>,
    collection_efficiency: Number,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawOdmr {
    start: Quantity,
    stop: Quantity,
    points: Count,
    baseline_margin: Number,
    reference: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawTrace {
    duration: Quantity,
    points: Count,
    threshold: Number,
    microwave: Quantity,
    reference: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawSpectrum {
    start: Quantity,
    stop: Quantity,
    points: Count,
    far_field: Option<bool>,
    band_centre: Quantity,
    band_half_width: Quantity,
    reference: Option<bool>,
    initial_window: Quantity,
    max_window: Quantity,
    max_step: Quantity,
    decay_threshold: Number,
    padding: Count,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawSweep {
    kind: Text,
    intensities: Option<Spanned<Vec<Spanned<Value>>>>,
    angles: Option<Spanned<Vec<Spanned<Value>>>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawFom {
    curve: Text,
    reference: Text,
}

/// Drive photon energy: fixed, or the plasmon peak of the configured particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriveEnergy {
    /// J.
    Fixed(f64),
    PlasmonPeak,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveConfig {
    pub photon_energy: DriveEnergy,
    /// W/m².
    pub intensity: f64,
    pub ground_only: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlasmonicsConfig {
    /// "silver", "gold" or a path to a permittivity table.
    pub material: Option<String>,
    pub radius: Option<f64>,
    pub separation: Option<f64>,
    pub background_permittivity: f64,
    pub orientation: Orientation,
    pub nonlinear_rabi: bool,
    pub collection_efficiency: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdmrConfig {
    /// Hz.
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub baseline_margin: f64,
    pub reference: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceConfig {
    /// s.
    pub duration: f64,
    pub points: usize,
    pub threshold: f64,
    /// Hz, or None for no microwave.
    pub microwave: Option<f64>,
    pub reference: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumConfig {
    /// J.
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub far_field: bool,
    pub band_centre: f64,
    pub band_half_width: f64,
    pub reference: bool,
    pub options: SpectrumOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Intensity,
    Tilt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub kind: SweepKind,
    /// W/m².
    pub intensities: Vec<f64>,
    /// rad.
    pub angles: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct FomConfig {
    pub curve: Option<PathBuf>,
    pub reference: Option<PathBuf>,
}

/// A fully resolved run configuration in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub levels: usize,
    pub vibronic_table: Option<PathBuf>,
    pub optical: OpticalParameters,
    pub spin: SpinParameters,
    pub isc: IscParameters,
    pub drive: DriveConfig,
    pub plasmonics: PlasmonicsConfig,
    pub odmr: OdmrConfig,
    pub trace: TraceConfig,
    pub spectrum: SpectrumConfig,
    pub sweep: SweepConfig,
    pub fom: FomConfig,
}

pub const DEFAULT_LEVELS: usize = 7;

impl Default for RunConfig {
    fn default() -> Self {
        let ev = ELEMENTARY_CHARGE;
        Self {
            levels: DEFAULT_LEVELS,
            vibronic_table: None,
            optical: OpticalParameters::default(),
            spin: SpinParameters::default(),
            isc: IscParameters::default(),
            drive: DriveConfig {
                photon_energy: DriveEnergy::Fixed(2.033 * ev),
                intensity: 0.5e9,
                ground_only: false,
            },
            plasmonics: PlasmonicsConfig {
                material: None,
                radius: None,
                separation: None,
                background_permittivity: 1.0,
                orientation: Orientation::Radial,
                nonlinear_rabi: false,
                collection_efficiency: None,
            },
            odmr: OdmrConfig {
                start: 2.60e9,
                stop: 3.14e9,
                points: 271,
                baseline_margin: crate::experiments::BASELINE_FRACTION,
                reference: false,
            },
            trace: TraceConfig {
                duration: 10e-6,
                points: 2001,
                threshold: 0.01,
                microwave: None,
                reference: false,
            },
            spectrum: SpectrumConfig {
                start: 1.5 * ev,
                stop: 2.1 * ev,
                points: 601,
                far_field: true,
                band_centre: 1.941 * ev,
                band_half_width: 0.015 * ev,
                reference: false,
                options: SpectrumOptions::default(),
            },
            sweep: SweepConfig {
                kind: SweepKind::Intensity,
                intensities: vec![1e6, 1e7, 1e8, 1e9],
                angles: (0..=8).map(|i| i as f64 * std::f64::consts::FRAC_PI_2 / 8.0).collect(),
            },
            fom: FomConfig::default(),
        }
    }
}

/// Source text plus the name used in messages; turns spans into line numbers.
struct Ctx<'a> {
    src: &'a str,
    origin: &'a str,
    base: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, key: &str, msg: impl std::fmt::Display) -> Error {
        let line = self.src[..span.start.min(self.src.len())].matches('\n').count() + 1;
        let text = self.src.lines().nth(line - 1).unwrap_or("").trim();
        Error::Config(format!("{}:{line}: {key}: {msg} (in `{text}`)", self.origin))
    }

    fn quantity(&self, key: &str, v: &Quantity, dim: Dimension, default: f64) -> Result<f64> {
        match v {
            None => Ok(default),
            Some(s) => self.quantity_value(key, s, dim),
        }
    }

    fn quantity_value(&self, key: &str, s: &Spanned<Value>, dim: Dimension) -> Result<f64> {
        match s.get_ref() {
            Value::String(t) => parse_quantity(t, dim).map_err(|e| self.err(s.span(), key, e)),
            Value::Integer(_) | Value::Float(_) => Err(self.err(
                s.span(),
                key,
                format!("missing unit; write the {dim} as a string such as \"{}\"", example(dim)),
            )),
            _ => Err(self.err(s.span(), key, format!("expected a {dim} string"))),
        }
    }

    fn positive(&self, key: &str, v: &Quantity, dim: Dimension, default: f64) -> Result<f64> {
        let x = self.quantity(key, v, dim, default)?;
        self.check(key, v.as_ref().map(|s| s.span()), x > 0.0, "must be positive")?;
        Ok(x)
    }

    fn non_negative(&self, key: &str, v: &Quantity, dim: Dimension, default: f64) -> Result<f64> {
        let x = self.quantity(key, v, dim, default)?;
        self.check(key, v.as_ref().map(|s| s.span()), x >= 0.0, "must not be negative")?;
        Ok(x)
    }

    fn number(&self, key: &str, v: &Number, default: f64, ok: impl Fn(f64) -> bool, what: &str) -> Result<f64> {
        match v {
            None => Ok(default),
            Some(s) => {
                let x = *s.get_ref();
                self.check(key, Some(s.span()), x.is_finite() && ok(x), what)?;
                Ok(x)
            }
        }
    }

    fn count(&self, key: &str, v: &Count, default: usize, min: usize) -> Result<usize> {
        match v {
            None => Ok(default),
            Some(s) => {
                let x = *s.get_ref();
                self.check(key, Some(s.span()), x >= min as i64, &format!("must be at least {min}"))?;
                Ok(x as usize)
            }
        }
    }

    fn check(&self, key: &str, span: Option<Range<usize>>, ok: bool, what: &str) -> Result<()> {
        if ok {
            return Ok(());
        }
        match span {
            Some(s) => Err(self.err(s, key, what)),
            None => Err(Error::Config(format!("{}: {key}: {what}", self.origin))),
        }
    }

    fn path(&self, v: &Text) -> Option<PathBuf> {
        v.as_ref().map(|s| {
            let p = PathBuf::from(s.get_ref());
            if p.is_absolute() {
                p
            } else {
                self.base.join(p)
            }
        })
    }
}

fn example(dim: Dimension) -> &'static str {
    match dim {
        Dimension::Energy => "1.941 eV",
        Dimension::Rate => "92 MHz",
        Dimension::Frequency => "2.87 GHz",
        Dimension::Field => "4.4 mT",
        Dimension::Length => "10 nm",
        Dimension::Dipole => "5.2 D",
        Dimension::Intensity => "0.1 mW/um^2",
        Dimension::Time => "10 us",
        Dimension::Angle => "90 deg",
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        let base = std::path::absolute(&base).map_err(|e| Error::io(&base, e))?;
        Self::parse(&text, &path.display().to_string(), &base)
    }

    /// Parse config text; relative paths resolve against `base`.
    pub fn parse(text: &str, origin: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {}", e.to_string().trim_end())))?;
        let cx = Ctx { src: text, origin, base };
        let d = RunConfig::default();
        use Dimension::*;

        let levels = cx.count("nv.levels", &raw.nv.levels, d.levels, 1)?;
        let n = &raw.nv;
        let optical = OpticalParameters {
            zpl_energy: cx.positive("nv.zpl_energy", &n.zpl_energy, Energy, d.optical.zpl_energy)?,
            dipole: cx.positive("nv.dipole", &n.dipole, Dipole, d.optical.dipole)?,
            diamond_index: cx.number("nv.diamond_index", &n.diamond_index, d.optical.diamond_index, |x| x >= 1.0, "must be >= 1")?,
            dephasing: cx.non_negative("nv.dephasing", &n.dephasing, Rate, d.optical.dephasing)?,
            excited_vibronic_decay: cx.positive(
                "nv.excited_vibronic_decay",
                &n.excited_vibronic_decay,
                Rate,
                d.optical.excited_vibronic_decay,
            )?,
        };

        let s = &raw.spin;
        let spin = SpinParameters {
            d_gs: cx.positive("spin.d_gs", &s.d_gs, Frequency, d.spin.d_gs)?,
            d_es: cx.positive("spin.d_es", &s.d_es, Frequency, d.spin.d_es)?,
            g_factor: cx.number("spin.g_factor", &s.g_factor, d.spin.g_factor, |x| x > 0.0, "must be positive")?,
            b_nv: cx.quantity("spin.b_nv", &s.b_nv, Field, d.spin.b_nv)?,
            b_mw: cx.non_negative("spin.b_mw", &s.b_mw, Field, d.spin.b_mw)?,
            relax_ground: cx.non_negative("spin.relax_ground", &s.relax_ground, Rate, d.spin.relax_ground)?,
            relax_excited: cx.non_negative("spin.relax_excited", &s.relax_excited, Rate, d.spin.relax_excited)?,
            dephase_ground: cx.non_negative("spin.dephase_ground", &s.dephase_ground, Rate, d.spin.dephase_ground)?,
            dephase_excited: cx.non_negative("spin.dephase_excited", &s.dephase_excited, Rate, d.spin.dephase_excited)?,
        };

        let i = &raw.isc;
        let isc = IscParameters {
            to_singlet_pm: cx.non_negative("isc.to_singlet_pm", &i.to_singlet_pm, Rate, d.isc.to_singlet_pm)?,
            to_singlet_zero: cx.non_negative("isc.to_singlet_zero", &i.to_singlet_zero, Rate, d.isc.to_singlet_zero)?,
            from_singlet_pm: cx.non_negative("isc.from_singlet_pm", &i.from_singlet_pm, Rate, d.isc.from_singlet_pm)?,
            from_singlet_zero: cx.non_negative("isc.from_singlet_zero", &i.from_singlet_zero, Rate, d.isc.from_singlet_zero)?,
            singlet_decay: cx.positive("isc.singlet_decay", &i.singlet_decay, Rate, d.isc.singlet_decay)?,
            singlet_gap: cx.positive("isc.singlet_gap", &i.singlet_gap, Energy, d.isc.singlet_gap)?,
            triplet_singlet_gap: cx.positive(
                "isc.triplet_singlet_gap",
                &i.triplet_singlet_gap,
                Energy,
                d.isc.triplet_singlet_gap,
            )?,
        };

        let r = &raw.drive;
        let photon_energy = match &r.photon_energy {
            Some(s) if s.get_ref().as_str() == Some("plasmon-peak") => DriveEnergy::PlasmonPeak,
            v => {
                let e = cx.positive("drive.photon_energy", v, Energy, 2.033 * ELEMENTARY_CHARGE)?;
                DriveEnergy::Fixed(e)
            }
        };
        let drive = DriveConfig {
            photon_energy,
            intensity: cx.non_negative("drive.intensity", &r.intensity, Intensity, d.drive.intensity)?,
            ground_only: r.ground_only.unwrap_or(false),
        };

        let plasmonics = parse_plasmonics(&cx, &raw.plasmonics, &d.plasmonics)?;
        if drive.photon_energy == DriveEnergy::PlasmonPeak && plasmonics.material.is_none() {
            let span = r.photon_energy.as_ref().map(|s| s.span());
            cx.check("drive.photon_energy", span, false, "\"plasmon-peak\" needs [plasmonics] material")?;
        }

        let o = &raw.odmr;
        let odmr = OdmrConfig {
            start: cx.positive("odmr.start", &o.start, Frequency, d.odmr.start)?,
            stop: cx.positive("odmr.stop", &o.stop, Frequency, d.odmr.stop)?,
            points: cx.count("odmr.points", &o.points, d.odmr.points, 5)?,
            baseline_margin: cx.number(
                "odmr.baseline_margin",
                &o.baseline_margin,
                d.odmr.baseline_margin,
                |x| x > 0.0 && x < 0.5,
                "must lie in (0, 0.5)",
            )?,
            reference: o.reference.unwrap_or(false),
        };
        let stop_span = o.stop.as_ref().or(o.start.as_ref()).map(|s| s.span());
        cx.check("odmr.stop", stop_span, odmr.stop > odmr.start, "must exceed odmr.start")?;

        let t = &raw.trace;
        let microwave = match &t.microwave {
            None => None,
            Some(s) if s.get_ref().as_str() == Some("off") => None,
            Some(s) => Some(cx.quantity_value("trace.microwave", s, Frequency)?),
        };
        let trace = TraceConfig {
            duration: cx.positive("trace.duration", &t.duration, Time, d.trace.duration)?,
            points: cx.count("trace.points", &t.points, d.trace.points, 2)?,
            threshold: cx.number("trace.threshold", &t.threshold, d.trace.threshold, |x| x > 0.0 && x < 1.0, "must lie in (0, 1)")?,
            microwave,
            reference: t.reference.unwrap_or(false),
        };

        let p = &raw.spectrum;
        let dopt = &d.spectrum.options;
        let spectrum = SpectrumConfig {
            start: cx.positive("spectrum.start", &p.start, Energy, d.spectrum.start)?,
            stop: cx.positive("spectrum.stop", &p.stop, Energy, d.spectrum.stop)?,
            points: cx.count("spectrum.points", &p.points, d.spectrum.points, 2)?,
            far_field: p.far_field.unwrap_or(true),
            band_centre: cx.positive("spectrum.band_centre", &p.band_centre, Energy, d.spectrum.band_centre)?,
            band_half_width: cx.positive("spectrum.band_half_width", &p.band_half_width, Energy, d.spectrum.band_half_width)?,
            reference: p.reference.unwrap_or(false),
            options: SpectrumOptions {
                initial_window: cx.positive("spectrum.initial_window", &p.initial_window, Time, dopt.initial_window)?,
                max_window: cx.positive("spectrum.max_window", &p.max_window, Time, dopt.max_window)?,
                max_step: cx.positive("spectrum.max_step", &p.max_step, Time, dopt.max_step)?,
                decay_threshold: cx.number(
                    "spectrum.decay_threshold",
                    &p.decay_threshold,
                    dopt.decay_threshold,
                    |x| x > 0.0 && x < 1.0,
                    "must lie in (0, 1)",
                )?,
                padding: cx.count("spectrum.padding", &p.padding, dopt.padding, 1)?,
            },
        };
        let stop_span = p.stop.as_ref().or(p.start.as_ref()).map(|s| s.span());
        cx.check("spectrum.stop", stop_span, spectrum.stop > spectrum.start, "must exceed spectrum.start")?;

        let w = &raw.sweep;
        let kind = match &w.kind {
            None => SweepKind::Intensity,
            Some(k) => match k.get_ref().as_str() {
                "intensity" => SweepKind::Intensity,
                "tilt" => SweepKind::Tilt,
                other => return Err(cx.err(k.span(), "sweep.kind", format!("expected \"intensity\" or \"tilt\", got {other:?}"))),
            },
        };
        let list = |key: &str, v: &Option<Spanned<Vec<Spanned<Value>>>>, dim, default: &Vec<f64>| -> Result<Vec<f64>> {
            match v {
                None => Ok(default.clone()),
                Some(items) => {
                    if items.get_ref().is_empty() {
                        return Err(cx.err(items.span(), key, "must not be empty"));
                    }
                    items.get_ref().iter().map(|s| cx.quantity_value(key, s, dim)).collect()
                }
            }
        };
        let sweep = SweepConfig {
            kind,
            intensities: list("sweep.intensities", &w.intensities, Intensity, &d.sweep.intensities)?,
            angles: list("sweep.angles", &w.angles, Angle, &d.sweep.angles)?,
        };
        if sweep.intensities.iter().any(|x| !(*x > 0.0)) {
            let span = w.intensities.as_ref().map(|s| s.span());
            cx.check("sweep.intensities", span, false, "every intensity must be positive")?;
        }

        let fom = FomConfig {
            curve: cx.path(&raw.fom.curve),
            reference: cx.path(&raw.fom.reference),
        };

        Ok(Self {
            levels,
            vibronic_table: cx.path(&raw.nv.vibronic_table),
            optical,
            spin,
            isc,
            drive,
            plasmonics,
            odmr,
            trace,
            spectrum,
            sweep,
            fom,
        })
    }

    /// Canonical TOML text: every key present, SI units, absolute paths.
    /// Parsing it gives back an identical configuration.
    pub fn to_toml(&self) -> String {
        use Dimension::*;
        let q = |v: f64, d| Value::String(format_quantity(v, d));
        let mut root = toml::Table::new();
        let mut section = |name: &str, entries: Vec<(&str, Value)>| {
            let t: toml::Table = entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            root.insert(name.to_string(), Value::Table(t));
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| Value::String(p.display().to_string()));
        let mut nv = vec![
            ("levels", Value::Integer(self.levels as i64)),
            ("zpl_energy", q(self.optical.zpl_energy, Energy)),
            ("dipole", q(self.optical.dipole, Dipole)),
            ("diamond_index", Value::Float(self.optical.diamond_index)),
            ("dephasing", q(self.optical.dephasing, Rate)),
            ("excited_vibronic_decay", q(self.optical.excited_vibronic_decay, Rate)),
        ];
        if let Some(p) = path(&self.vibronic_table) {
            nv.push(("vibronic_table", p));
        }
        section("nv", nv);
        let s = &self.spin;
        section(
            "spin",
            vec![
                ("d_gs", q(s.d_gs, Frequency)),
                ("d_es", q(s.d_es, Frequency)),
                ("g_factor", Value::Float(s.g_factor)),
                ("b_nv", q(s.b_nv, Field)),
                ("b_mw", q(s.b_mw, Field)),
                ("relax_ground", q(s.relax_ground, Rate)),
                ("relax_excited", q(s.relax_excited, Rate)),
                ("dephase_ground", q(s.dephase_ground, Rate)),
                ("dephase_excited", q(s.dephase_excited, Rate)),
            ],
        );
        let i = &self.isc;
        section(
            "isc",
            vec![
                ("to_singlet_pm", q(i.to_singlet_pm, Rate)),
                ("to_singlet_zero", q(i.to_singlet_zero, Rate)),
                ("from_singlet_pm", q(i.from_singlet_pm, Rate)),
                ("from_singlet_zero", q(i.from_singlet_zero, Rate)),
                ("singlet_decay", q(i.singlet_decay, Rate)),
                ("singlet_gap", q(i.singlet_gap, Energy)),
                ("triplet_singlet_gap", q(i.triplet_singlet_gap, Energy)),
            ],
        );
        section(
            "drive",
            vec![
                (
                    "photon_energy",
                    match self.drive.photon_energy {
                        DriveEnergy::Fixed(e) => q(e, Energy),
                        DriveEnergy::PlasmonPeak => Value::String("plasmon-peak".into()),
                    },
                ),
                ("intensity", q(self.drive.intensity, Intensity)),
                ("ground_only", Value::Boolean(self.drive.ground_only)),
            ],
        );
        let p = &self.plasmonics;
        let mut pl = vec![
            ("background_permittivity", Value::Float(p.background_permittivity)),
            ("nonlinear_rabi", Value::Boolean(p.nonlinear_rabi)),
        ];
        if let Some(m) = &p.material {
            pl.push(("material", Value::String(m.clone())));
        }
        if let Some(r) = p.radius {
            pl.push(("radius", q(r, Length)));
        }
        if let Some(r) = p.separation {
            pl.push(("separation", q(r, Length)));
        }
        match p.orientation {
            Orientation::Radial => pl.push(("orientation", Value::String("radial".into()))),
            Orientation::Tangential => pl.push(("orientation", Value::String("tangential".into()))),
            Orientation::Tilted(t) => {
                pl.push(("orientation", Value::String("tilted".into())));
                pl.push(("theta", q(t, Angle)));
            }
        }
        if let Some(c) = p.collection_efficiency {
            pl.push(("collection_efficiency", Value::Float(c)));
        }
        section("plasmonics", pl);
        let o = &self.odmr;
        section(
            "odmr",
            vec![
                ("start", q(o.start, Frequency)),
                ("stop", q(o.stop, Frequency)),
                ("points", Value::Integer(o.points as i64)),
                ("baseline_margin", Value::Float(o.baseline_margin)),
                ("reference", Value::Boolean(o.reference)),
            ],
        );
        let t = &self.trace;
        section(
            "trace",
            vec![
                ("duration", q(t.duration, Time)),
                ("points", Value::Integer(t.points as i64)),
                ("threshold", Value::Float(t.threshold)),
                ("microwave", t.microwave.map_or(Value::String("off".into()), |f| q(f, Frequency))),
                ("reference", Value::Boolean(t.reference)),
            ],
        );
        let sp = &self.spectrum;
        section(
            "spectrum",
            vec![
                ("start", q(sp.start, Energy)),
                ("stop", q(sp.stop, Energy)),
                ("points", Value::Integer(sp.points as i64)),
                ("far_field", Value::Boolean(sp.far_field)),
                ("band_centre", q(sp.band_centre, Energy)),
                ("band_half_width", q(sp.band_half_width, Energy)),
                ("reference", Value::Boolean(sp.reference)),
                ("initial_window", q(sp.options.initial_window, Time)),
                ("max_window", q(sp.options.max_window, Time)),
                ("max_step", q(sp.options.max_step, Time)),
                ("decay_threshold", Value::Float(sp.options.decay_threshold)),
                ("padding", Value::Integer(sp.options.padding as i64)),
            ],
        );
        let w = &self.sweep;
        section(
            "sweep",
            vec![
                (
                    "kind",
                    Value::String(match w.kind {
                        SweepKind::Intensity => "intensity".into(),
                        SweepKind::Tilt => "tilt".into(),
                    }),
                ),
                ("intensities", Value::Array(w.intensities.iter().map(|&x| q(x, Intensity)).collect())),
                ("angles", Value::Array(w.angles.iter().map(|&x| q(x, Angle)).collect())),
            ],
        );
        let mut fom = vec![];
        if let Some(p) = path(&self.fom.curve) {
            fom.push(("curve", p));
        }
        if let Some(p) = path(&self.fom.reference) {
            fom.push(("reference", p));
        }
        section("fom", fom);
        toml::to_string(&root).expect("a table of plain values serializes")
    }
}

fn parse_plasmonics(cx: &Ctx, p: &RawPlasmonics, d: &PlasmonicsConfig) -> Result<PlasmonicsConfig> {
    use Dimension::*;
    let material = p.material.as_ref().map(|m| {
        let name = m.get_ref();
        match name.to_ascii_lowercase().as_str() {
            "silver" | "ag" => "silver".to_string(),
            "gold" | "au" => "gold".to_string(),
            _ => cx.path(&p.material).expect("present").display().to_string(),
        }
    });
    let radius = p.radius.as_ref().map(|s| cx.quantity_value("plasmonics.radius", s, Length)).transpose()?;
    let separation = p
        .separation
        .as_ref()
        .map(|s| cx.quantity_value("plasmonics.separation", s, Length))
        .transpose()?;
    let mat_span = p.material.as_ref().map(|s| s.span());
    if material.is_some() {
        cx.check("plasmonics.radius", mat_span.clone(), radius.is_some(), "a particle needs a radius")?;
        cx.check("plasmonics.separation", mat_span, separation.is_some(), "a particle needs a separation")?;
        let span = p.radius.as_ref().map(|s| s.span());
        cx.check("plasmonics.radius", span, radius.unwrap() > 0.0, "must be positive")?;
        let span = p.separation.as_ref().map(|s| s.span());
        cx.check(
            "plasmonics.separation",
            span,
            separation.unwrap() > radius.unwrap(),
            "must exceed the particle radius",
        )?;
    } else if let Some(s) = p.radius.as_ref().or(p.separation.as_ref()) {
        return Err(cx.err(s.span(), "plasmonics", "radius/separation given without a material"));
    }
    let theta = p.theta.as_ref().map(|s| cx.quantity_value("plasmonics.theta", s, Angle)).transpose()?;
    let orientation = match (p.orientation.as_ref(), theta) {
        (None, None) => d.orientation,
        (None, Some(t)) => Orientation::Tilted(t),
        (Some(o), t) => match (o.get_ref().as_str(), t) {
            ("radial", None) => Orientation::Radial,
            ("tangential", None) => Orientation::Tangential,
            ("tilted", Some(t)) => Orientation::Tilted(t),
            ("tilted", None) => return Err(cx.err(o.span(), "plasmonics.orientation", "\"tilted\" needs theta")),
            ("radial" | "tangential", Some(_)) => {
                return Err(cx.err(o.span(), "plasmonics.theta", "theta only applies to orientation = \"tilted\""))
            }
            (other, _) => {
                return Err(cx.err(
                    o.span(),
                    "plasmonics.orientation",
                    format!("expected \"radial\", \"tangential\" or \"tilted\", got {other:?}"),
                ))
            }
        },
    };
    let nonlinear_rabi = p.nonlinear_rabi.unwrap_or(false);
    if nonlinear_rabi && (material.is_none() || matches!(orientation, Orientation::Tilted(_))) {
        return Err(Error::Config(format!(
            "{}: plasmonics.nonlinear_rabi needs a particle with radial or tangential orientation",
            cx.origin
        )));
    }
    Ok(PlasmonicsConfig {
        material,
        radius,
        separation,
        background_permittivity: cx.number(
            "plasmonics.background_permittivity",
            &p.background_permittivity,
            d.background_permittivity,
            |x| x > 0.0,
            "must be positive",
        )?,
        orientation,
        nonlinear_rabi,
        collection_efficiency: match &p.collection_efficiency {
            None => None,
            Some(_) => Some(cx.number(
                "plasmonics.collection_efficiency",
                &p.collection_efficiency,
                1.0,
                |x| (0.0..=1.0).contains(&x),
                "must lie in [0, 1]",
            )?),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, "test.toml", Path::new("/tmp"))
    }

    #[test]
    fn empty_config_is_the_default() {
        assert_eq!(parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn silver_particle_section() {
        let c = parse(
            "[plasmonics]\nmaterial = \"silver\"\nradius = \"10 nm\"\nseparation = \"20 nm\"\n\
             background_permittivity = 5.885\norientation = \"radial\"\n",
        )
        .unwrap();
        assert_eq!(c.plasmonics.material.as_deref(), Some("silver"));
        assert!((c.plasmonics.radius.unwrap() - 10e-9).abs() < 1e-22);
        assert_eq!(c.plasmonics.orientation, Orientation::Radial);
    }

    #[test]
    fn unitless_rate_is_rejected_with_line() {
        let e = parse("[isc]\n\nto_singlet_pm = \"92\"\n").unwrap_err().to_string();
        assert!(e.contains("test.toml:3") && e.contains("missing unit"), "{e}");
        let e = parse("[isc]\nto_singlet_pm = 92\n").unwrap_err().to_string();
        assert!(e.contains("test.toml:2") && e.contains("missing unit"), "{e}");
    }

    #[test]
    fn unknown_keys_and_ranges() {
        let e = parse("[spin]\nbnv = \"4 mT\"\n").unwrap_err().to_string();
        assert!(e.contains("bnv"), "{e}");
        let e = parse("[plasmonics]\nmaterial = \"gold\"\nradius = \"30 nm\"\nseparation = \"20 nm\"\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("test.toml:4"), "{e}");
        assert!(parse("[odmr]\npoints = 3\n").is_err());
        assert!(parse("[drive]\nphoton_energy = \"plasmon-peak\"\n").is_err());
    }

    #[test]
    fn reciprocal_lifetimes() {
        let c = parse("[spin]\nrelax_ground = \"1/7.7 ms\"\n").unwrap();
        assert!((c.spin.relax_ground - 1.0 / 7.7e-3).abs() < 1e-9);
    }

    #[test]
    fn normalized_text_round_trips() {
        let c = parse(
            "[plasmonics]\nmaterial = \"au\"\nradius = \"30 nm\"\nseparation = \"38 nm\"\ntheta = \"45 deg\"\n\
             collection_efficiency = 0.78\n[drive]\nphoton_energy = \"plasmon-peak\"\n",
        )
        .unwrap();
        let once = c.to_toml();
        let again = parse(&once).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml(), once);
    }
}
