//! The experiments behind each CLI subcommand, their output files and the
//! run manifest.

use super::build::{sha256_hex, Model, TableRecord};
use super::config::{RunConfig, SweepKind};
use super::output::{read_columns, Column, OutputRecord, OutputSet};
use crate::constants::{self, angular_to_ev, ELEMENTARY_CHARGE};
use crate::dynamics::{EvolveOptions, RESIDUAL_TOLERANCE};
use crate::experiments::{
    band_enhancement, compare_readouts, dc_sensitivity, enhancement, intensity_sweep, linear_grid, odmr_figures_with,
    odmr_sweep, per_ev, system_spectrum, tilt_scan, time_domain_readout, Microwave, NvSystem, OdmrCurve, OdmrFigures,
    Readout,
};
use crate::plasmonics::Orientation;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Odmr,
    Trace,
    Spectrum,
    Sweep,
    Fom,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Odmr => "odmr",
            Command::Trace => "trace",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Fom => "fom",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Write a matplotlib script next to every CSV.
    pub plot: bool,
    /// Write H, the collapse channels and the generator as CSV.
    pub dump_matrices: bool,
}

pub const MANIFEST: &str = "manifest.json";

/// Everything needed to re-run a command and check its outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// Normalized configuration text.
    pub config: String,
    pub parameters: Value,
    pub constants: Value,
    pub tolerances: Value,
    pub model: Value,
    pub tables: Vec<TableRecord>,
    pub inputs: Vec<OutputRecord>,
    pub outputs: Vec<OutputRecord>,
    pub summary: Value,
}

#[derive(Debug)]
pub struct RunReport {
    pub outputs: Vec<OutputRecord>,
    pub summary: Value,
}

pub fn run(command: Command, config: &RunConfig, out: &Path, options: RunOptions) -> Result<RunReport> {
    let mut files = OutputSet::new(out)?;
    let mut inputs = vec![];
    let model = config.model()?;
    let summary = match command {
        Command::Odmr => run_odmr(config, &model.system, &mut files)?,
        Command::Trace => run_trace(config, &model.system, &mut files)?,
        Command::Spectrum => run_spectrum(config, &model.system, &mut files)?,
        Command::Sweep => run_sweep(config, &model.system, &mut files)?,
        Command::Fom => run_fom(config, &mut files, &mut inputs)?,
    };
    if options.dump_matrices {
        dump_matrices(&model.system, &mut files)?;
    }
    if options.plot {
        write_plot_scripts(&mut files)?;
    }
    let manifest = manifest(command, config, &model, inputs, files.records.clone(), summary.clone());
    let value = serde_json::to_value(&manifest).map_err(|e| Error::Numerical(e.to_string()))?;
    let outputs = files.records.clone();
    files.write_json(MANIFEST, &value)?;
    Ok(RunReport { outputs, summary })
}

fn figures_json(f: &OdmrFigures, g: f64) -> Value {
    let eta = dc_sensitivity(f.fwhm, f.contrast, f.baseline, g);
    json!({
        "baseline": f.baseline,
        "depth": f.depth,
        "contrast": f.contrast,
        "fwhm_hz": f.fwhm,
        "dip_frequency_hz": f.dip_frequency,
        "linewidth_from_fit": f.fitted,
        "sensitivity_t_per_rthz": eta.as_ref().ok(),
        "sensitivity_error": eta.err().map(|e| e.to_string()),
    })
}

fn curve_columns(c: &OdmrCurve) -> Vec<Column<'static>> {
    vec![
        Column::fixed("freq_GHz", "microwave frequency, GHz", c.frequency.iter().map(|f| f * 1e-9), 9),
        Column::numbers("PL", "photoluminescence rate, photons/s (model units)", c.pl.iter().copied()),
    ]
}

fn describe(system: &NvSystem) -> Vec<String> {
    let env = &system.environment;
    let particle = match &env.particle {
        None => "no particle".to_string(),
        Some(p) => format!(
            "{} sphere r = {:e} m at R = {:e} m, {:?}",
            p.material.name, p.radius, p.separation, env.orientation
        ),
    };
    vec![
        format!(
            "drive {} eV at {:e} W/m^2; background permittivity {}",
            angular_to_ev(system.drive.omega()),
            system.drive.intensity,
            env.background_permittivity
        ),
        particle,
    ]
}

fn run_odmr(config: &RunConfig, system: &NvSystem, files: &mut OutputSet) -> Result<Value> {
    let o = &config.odmr;
    let grid = linear_grid(o.start, o.stop, o.points)?;
    let g = config.spin.g_factor;
    let curve = odmr_sweep(system, &grid)?;
    files.write_csv("odmr.csv", "nvps odmr: stationary PL versus microwave frequency", &describe(system), &curve_columns(&curve))?;
    let sample = odmr_figures_with(&curve, o.baseline_margin);
    let mut summary = json!({
        "points": curve.pl.len(),
        "figures": sample.as_ref().map(|f| figures_json(f, g)).unwrap_or_else(|e| json!({"error": e.to_string()})),
    });
    if o.reference {
        let r = system.reference()?;
        let rc = odmr_sweep(&r, &grid)?;
        files.write_csv("odmr_reference.csv", "nvps odmr: reference (no particle, vacuum)", &describe(&r), &curve_columns(&rc))?;
        let rf = odmr_figures_with(&rc, o.baseline_margin);
        summary["reference"] = rf.as_ref().map(|f| figures_json(f, g)).unwrap_or_else(|e| json!({"error": e.to_string()}));
        summary["baseline_enhancement"] = json!(crate::experiments::baseline_ratio(&curve, &rc, o.baseline_margin)?);
        if let (Ok(s), Ok(r)) = (&sample, &rf) {
            summary["enhancement"] = serde_json::to_value(enhancement(s, r)).expect("plain struct");
        }
    }
    files.write_json("odmr_fom.json", &summary)?;
    Ok(summary)
}

fn readout_json(r: &Readout) -> Value {
    json!({
        "steady_pl": r.steady_pl,
        "contrast_area": r.contrast_area,
        "stabilization_time_s": r.stabilization_time,
    })
}

fn write_readout(files: &mut OutputSet, prefix: &str, r: &Readout, notes: &[String]) -> Result<()> {
    let t = || Column::fixed("time_us", "time since the pump was switched on, µs", r.times.iter().map(|t| t * 1e6), 6);
    let pl = "photoluminescence rate, photons/s (model units)";
    files.write_csv(
        &format!("{prefix}_zero.csv"),
        "nvps trace: PL after preparing g_0 with spin 0",
        notes,
        &[t(), Column::numbers("PL", pl, r.pl_zero.iter().copied())],
    )?;
    files.write_csv(
        &format!("{prefix}_pm.csv"),
        "nvps trace: PL after preparing g_0 in an equal mixture of spin +1 and -1",
        notes,
        &[t(), Column::numbers("PL", pl, r.pl_plus_minus.iter().copied())],
    )?;
    files.write_csv(
        &format!("{prefix}_delta.csv"),
        "nvps trace: PL difference between the two preparations",
        notes,
        &[t(), Column::numbers("delta_PL", "PL_0 - PL_pm, photons/s", r.difference())],
    )
}

fn run_trace(config: &RunConfig, system: &NvSystem, files: &mut OutputSet) -> Result<Value> {
    let t = &config.trace;
    let times: Vec<f64> = (0..t.points).map(|i| t.duration * i as f64 / (t.points - 1) as f64).collect();
    let mw = t.microwave.map_or(Microwave::Off, Microwave::At);
    let r = time_domain_readout(system, &times, mw, t.threshold)?;
    write_readout(files, "trace", &r, &describe(system))?;
    let mut summary = json!({ "sample": readout_json(&r) });
    if t.reference {
        let refsys = system.reference()?;
        let rr = time_domain_readout(&refsys, &times, mw, t.threshold)?;
        write_readout(files, "trace_reference", &rr, &describe(&refsys))?;
        summary["reference"] = readout_json(&rr);
        summary["comparison"] = serde_json::to_value(compare_readouts(&r, &rr)).expect("plain struct");
    }
    files.write_json("trace_summary.json", &summary)?;
    Ok(summary)
}

fn run_spectrum(config: &RunConfig, system: &NvSystem, files: &mut OutputSet) -> Result<Value> {
    let s = &config.spectrum;
    let ev = ELEMENTARY_CHARGE;
    let energies: Vec<f64> = (0..s.points)
        .map(|i| (s.start + (s.stop - s.start) * i as f64 / (s.points - 1) as f64) / ev)
        .collect();
    let spectrum = system_spectrum(system, &energies, s.far_field, &s.options)?;
    let mode = if s.far_field { "far field (weighted by Q)" } else { "near field (Q = 1)" };
    let mut columns = vec![
        Column::fixed("energy_eV", "photon energy, eV", energies.iter().copied(), 6),
        Column::numbers("intensity", "spectral density, photons/s per eV (model units)", per_ev(&spectrum)),
    ];
    let mut summary = json!({
        "mode": mode,
        "tau_step_s": spectrum.step,
        "window_s": spectrum.window,
        "integral": spectrum.integral(),
        "correlator_origin": spectrum.correlator_origin,
        "coherent_weight": spectrum.coherent_weight,
    });
    if s.reference {
        let r = system.reference()?;
        let rs = system_spectrum(&r, &energies, s.far_field, &s.options)?;
        columns.push(Column::numbers(
            "reference_intensity",
            "reference spectral density (no particle, vacuum), photons/s per eV",
            per_ev(&rs),
        ));
        summary["band_enhancement"] = json!(band_enhancement(&spectrum, &rs, s.band_centre / ev, s.band_half_width / ev)?);
        summary["band_ev"] = json!([(s.band_centre - s.band_half_width) / ev, (s.band_centre + s.band_half_width) / ev]);
    }
    let mut notes = describe(system);
    notes.push(mode.to_string());
    files.write_csv("spectrum.csv", "nvps spectrum: stationary emission spectrum", &notes, &columns)?;
    files.write_json("spectrum_summary.json", &summary)?;
    Ok(summary)
}

fn run_sweep(config: &RunConfig, system: &NvSystem, files: &mut OutputSet) -> Result<Value> {
    match config.sweep.kind {
        SweepKind::Intensity => {
            let o = &config.odmr;
            let grid = linear_grid(o.start, o.stop, o.points)?;
            let reference = system.reference()?;
            let points = intensity_sweep(system, &reference, &config.sweep.intensities, &grid)?;
            let nan = f64::NAN;
            let pick = |f: &dyn Fn(&crate::experiments::IntensityPoint) -> Option<f64>| -> Vec<f64> {
                points.iter().map(|p| f(p).unwrap_or(nan)).collect()
            };
            let columns = vec![
                Column::numbers("intensity_uW_per_um2", "pump intensity, µW/µm²", points.iter().map(|p| p.intensity * 1e-6)),
                Column::numbers("baseline", "sample off-resonant PL", pick(&|p| p.sample.as_ref().ok().map(|f| f.baseline))),
                Column::numbers("depth", "sample dip depth", pick(&|p| p.sample.as_ref().ok().map(|f| f.depth))),
                Column::numbers("contrast", "sample depth/baseline", pick(&|p| p.sample.as_ref().ok().map(|f| f.contrast))),
                Column::numbers("fwhm_MHz", "sample linewidth, MHz", pick(&|p| p.sample.as_ref().ok().map(|f| f.fwhm * 1e-6))),
                Column::numbers("ref_baseline", "reference off-resonant PL", pick(&|p| p.reference.as_ref().ok().map(|f| f.baseline))),
                Column::numbers("ref_depth", "reference dip depth", pick(&|p| p.reference.as_ref().ok().map(|f| f.depth))),
                Column::numbers("baseline_enhancement", "baseline ratio", pick(&|p| p.baseline_enhancement.as_ref().ok().copied())),
                Column::numbers("depth_enhancement", "depth ratio", pick(&|p| p.enhancement().map(|e| e.depth))),
                Column::numbers("contrast_enhancement", "contrast ratio", pick(&|p| p.enhancement().map(|e| e.contrast))),
                Column::text(
                    "status",
                    "ok, or the first error for this intensity",
                    points
                        .iter()
                        .map(|p| match (&p.sample, &p.reference) {
                            (Ok(_), Ok(_)) => "ok".to_string(),
                            (Err(e), _) | (_, Err(e)) => e.to_string(),
                        })
                        .collect(),
                ),
            ];
            files.write_csv("sweep.csv", "nvps sweep: ODMR figures of merit versus pump intensity", &describe(system), &columns)?;
            let complete = points.iter().filter(|p| p.is_complete()).count();
            Ok(json!({ "kind": "intensity", "points": points.len(), "complete": complete }))
        }
        SweepKind::Tilt => {
            let angles = &config.sweep.angles;
            let pl = tilt_scan(system, angles)?;
            let reference = tilt_scan(&system.reference()?, angles)?;
            files.write_csv(
                "tilt.csv",
                "nvps sweep: stationary far-field PL versus NV tilt angle",
                &describe(system),
                &[
                    Column::numbers("theta_rad", "angle between NV dipole plane and the particle axis, rad", angles.iter().copied()),
                    Column::numbers("PL", "photoluminescence rate, photons/s (model units)", pl.iter().copied()),
                    Column::numbers("reference_PL", "same angle without the particle", reference.iter().copied()),
                ],
            )?;
            Ok(json!({ "kind": "tilt", "points": angles.len() }))
        }
    }
}

fn run_fom(config: &RunConfig, files: &mut OutputSet, inputs: &mut Vec<OutputRecord>) -> Result<Value> {
    let path = config
        .fom
        .curve
        .as_ref()
        .ok_or_else(|| Error::Config("fom needs a curve: set [fom] curve or pass --curve".into()))?;
    let mut load = |p: &PathBuf| -> Result<OdmrCurve> {
        let (f, pl, hash) = read_columns(p, "freq_GHz", "PL")?;
        inputs.push(OutputRecord {
            file: p.display().to_string(),
            sha256: hash,
        });
        Ok(OdmrCurve {
            frequency: f.iter().map(|x| x * 1e9).collect(),
            pl,
        })
    };
    let curve = load(path)?;
    let g = config.spin.g_factor;
    let m = config.odmr.baseline_margin;
    let sample = odmr_figures_with(&curve, m)?;
    let mut summary = json!({ "figures": figures_json(&sample, g) });
    if let Some(rp) = &config.fom.reference {
        let rc = load(rp)?;
        let rf = odmr_figures_with(&rc, m)?;
        summary["reference"] = figures_json(&rf, g);
        summary["enhancement"] = serde_json::to_value(enhancement(&sample, &rf)).expect("plain struct");
    }
    files.write_json("fom.json", &summary)?;
    Ok(summary)
}

fn dump_matrices(system: &NvSystem, files: &mut OutputSet) -> Result<()> {
    let h = system.hamiltonian(Microwave::Off)?;
    let s = system.params.scheme();
    let entries = h.op.entries();
    let note = vec!["microwave off; optical rotating frame at the drive frequency".to_string()];
    files.write_csv(
        "hamiltonian.csv",
        "nvps dump: Hamiltonian nonzeros",
        &note,
        &[
            Column::text("row", "basis label", entries.iter().map(|e| s.name(e.0)).collect()),
            Column::text("col", "basis label", entries.iter().map(|e| s.name(e.1)).collect()),
            Column::numbers("re_J", "real part, J", entries.iter().map(|e| e.2.re)),
            Column::numbers("im_J", "imaginary part, J", entries.iter().map(|e| e.2.im)),
        ],
    )?;
    let ch = &system.channels;
    files.write_csv(
        "channels.csv",
        "nvps dump: collapse channels",
        &[],
        &[
            Column::text("label", "channel", ch.iter().map(|c| c.label.clone()).collect()),
            Column::text("kind", "category", ch.iter().map(|c| format!("{:?}", c.kind)).collect()),
            Column::numbers("rate_per_s", "rate, 1/s", ch.iter().map(|c| c.rate)),
            Column::text(
                "operator",
                "nonzeros as to<-from:value",
                ch.iter()
                    .map(|c| {
                        c.op.entries()
                            .iter()
                            .map(|e| format!("{}<-{}:{}", s.name(e.0), s.name(e.1), e.2.re))
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect(),
            ),
        ],
    )?;
    let l = system.liouvillian(Microwave::Off)?;
    let (mut rows, mut cols, mut vals) = (vec![], vec![], vec![]);
    for j in 0..l.coords().len() {
        for &(i, v) in l.column(j) {
            rows.push(i.to_string());
            cols.push(j.to_string());
            vals.push(v);
        }
    }
    files.write_csv(
        "liouvillian.csv",
        "nvps dump: real generator in Hermitian coordinates (diagonals, then Re/Im pairs)",
        &note,
        &[
            Column::text("row", "coordinate", rows),
            Column::text("col", "coordinate", cols),
            Column::numbers("value_per_s", "entry, 1/s", vals),
        ],
    )
}

fn write_plot_scripts(files: &mut OutputSet) -> Result<()> {
    let csvs: Vec<String> = files
        .records
        .iter()
        .filter(|r| r.file.ends_with(".csv"))
        .map(|r| r.file.clone())
        .filter(|f| !matches!(f.as_str(), "hamiltonian.csv" | "channels.csv" | "liouvillian.csv"))
        .collect();
    for f in csvs {
        let stem = f.trim_end_matches(".csv");
        let script = format!(
            "import csv\nimport matplotlib.pyplot as plt\n\n\
             with open(\"{f}\") as fh:\n    rows = [r for r in csv.reader(l for l in fh if not l.startswith(\"#\"))]\n\
             head, data = rows[0], rows[1:]\n\
             x = [float(r[0]) for r in data]\n\
             for i in range(1, len(head)):\n    try:\n        y = [float(r[i]) for r in data]\n    except ValueError:\n        continue\n    plt.plot(x, y, label=head[i])\n\
             plt.xlabel(head[0])\nplt.legend()\nplt.savefig(\"{stem}.png\", dpi=150)\n"
        );
        files.write(&format!("plot_{stem}.py"), script.as_bytes())?;
    }
    Ok(())
}

fn manifest(
    command: Command,
    config: &RunConfig,
    model: &Model,
    inputs: Vec<OutputRecord>,
    outputs: Vec<OutputRecord>,
    summary: Value,
) -> Manifest {
    let sys = &model.system;
    let env = &sys.environment;
    let orientation = match env.orientation {
        Orientation::Radial => json!("radial"),
        Orientation::Tangential => json!("tangential"),
        Orientation::Tilted(t) => json!({ "tilted_rad": t }),
    };
    let particle = env.particle.as_ref().map(|p| {
        json!({ "material": p.material.name, "radius_m": p.radius, "separation_m": p.separation })
    });
    let parameters = json!({
        "nv": serde_json::to_value(&sys.params).expect("plain struct"),
        "drive": {
            "photon_energy_j": sys.drive.photon_energy,
            "photon_energy_ev": sys.drive.photon_energy / ELEMENTARY_CHARGE,
            "intensity_w_per_m2": sys.drive.intensity,
            "ground_only": sys.ground_only,
        },
        "environment": {
            "background_permittivity": env.background_permittivity,
            "particle": particle,
            "orientation": orientation,
            "nonlinear_rabi": env.nonlinear_rabi,
            "collection_efficiency": env.efficiency_override,
        },
        "emission_rates_per_s": sys.emission,
        "quantum_efficiency": sys.efficiency,
    });
    let constants = json!({
        "hbar_js": constants::HBAR,
        "planck_js": constants::PLANCK,
        "elementary_charge_c": constants::ELEMENTARY_CHARGE,
        "bohr_magneton_j_per_t": constants::BOHR_MAGNETON,
        "epsilon_0_f_per_m": constants::EPSILON_0,
        "speed_of_light_m_per_s": constants::SPEED_OF_LIGHT,
        "debye_cm": constants::DEBYE,
    });
    let o = &config.spectrum.options;
    let tolerances = json!({
        "steady_state_relative_residual": RESIDUAL_TOLERANCE,
        "trace_drift": EvolveOptions::default().trace_tolerance,
        "stabilization_threshold": config.trace.threshold,
        "baseline_margin": config.odmr.baseline_margin,
        "correlator_decay_threshold": o.decay_threshold,
        "correlator_max_window_s": o.max_window,
        "correlator_max_step_s": o.max_step,
        "fft_padding": o.padding,
    });
    let model_json = json!({
        "dim": sys.dim(),
        "channel_count": sys.channels.len(),
        "channels": sys.channels.iter().map(|c| json!({"label": c.label, "rate_per_s": c.rate})).collect::<Vec<_>>(),
    });
    Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        config: config.to_toml(),
        parameters,
        constants,
        tolerances,
        model: model_json,
        tables: model.tables.clone(),
        inputs,
        outputs,
        summary,
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: not a run manifest: {e}", path.display())))
}

/// Outcome of re-running a manifest.
#[derive(Debug, Default)]
pub struct ReplayReport {
    pub checked: usize,
    /// Human-readable description of each difference.
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn is_identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-run the command recorded in a manifest into `out` and compare hashes
/// of the inputs, data tables and outputs.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<ReplayReport> {
    let m = read_manifest(manifest_path)?;
    let origin = format!("{} (embedded config)", manifest_path.display());
    let config = RunConfig::parse(&m.config, &origin, Path::new("/"))?;
    let mut report = ReplayReport::default();
    for input in &m.inputs {
        let now = std::fs::read(&input.file).map(|b| sha256_hex(&b));
        match now {
            Ok(h) if h == input.sha256 => {}
            Ok(_) => report.mismatches.push(format!("input {} changed since the original run", input.file)),
            Err(e) => report.mismatches.push(format!("input {} unreadable: {e}", input.file)),
        }
    }
    let result = run(m.command, &config, out, RunOptions::default())?;
    let new_model = config.model()?;
    for t in &m.tables {
        if !new_model.tables.iter().any(|n| n.role == t.role && n.sha256 == t.sha256) {
            report
                .mismatches
                .push(format!("data table {} ({}) differs from the recorded one", t.role, t.origin));
        }
    }
    for rec in &m.outputs {
        if matches!(rec.file.as_str(), "hamiltonian.csv" | "channels.csv" | "liouvillian.csv") || rec.file.starts_with("plot_") {
            continue;
        }
        report.checked += 1;
        match result.outputs.iter().find(|o| o.file == rec.file) {
            None => report.mismatches.push(format!("{} was not produced", rec.file)),
            Some(o) if o.sha256 != rec.sha256 => report.mismatches.push(format!(
                "{}: hash {} differs from recorded {}",
                rec.file,
                &o.sha256[..12],
                &rec.sha256[..12]
            )),
            Some(_) => {}
        }
    }
    Ok(report)
}
