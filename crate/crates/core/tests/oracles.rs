//! Hand-derived and brute-force reference values for the model pieces.

use num_complex::Complex64;
use nvps::dynamics::{evolve, DensityOperator, EvolveOptions};
use nvps::experiments::{Microwave, NvSystem};
use nvps::io::RunConfig;
use nvps::model::{Level, LevelScheme, NvParameters, OpticalDrive, Spin, SpinParameters};
use nvps::plasmonics::{
    corrected_polarizability, decay_rate_ratio, nonradiative_rate_ratio, quasistatic_polarizability, rabi_factor,
    wavenumber, DipoleAxis, Environment, MaterialTable, Orientation, Particle,
};

const MU_B: f64 = 9.2740100783e-24;
const H: f64 = 6.62607015e-34;
const HBAR: f64 = H / (2.0 * std::f64::consts::PI);
const EV: f64 = 1.602176634e-19;

fn silver_env(orientation: Orientation) -> Environment {
    Environment {
        background_permittivity: 5.885,
        particle: Some(Particle {
            material: MaterialTable::silver().unwrap(),
            radius: 10e-9,
            separation: 20e-9,
        }),
        orientation,
        ..Environment::free_space()
    }
}

fn at(s: &LevelScheme, level: Level, m: Spin) -> usize {
    s.index(level, Some(m)).unwrap()
}

fn rad(ev: f64) -> f64 {
    ev * EV / HBAR
}

#[test]
fn zeeman_splitting_at_4_4_mt() {
    let s = SpinParameters {
        b_nv: 4.4e-3,
        ..SpinParameters::default()
    };
    let z = s.zeeman_frequencies().unwrap();
    let split = (z.ground_plus - z.ground_minus) / (2.0 * std::f64::consts::PI);
    assert!((split - 2.0 * 2.0 * MU_B * 4.4e-3 / H).abs() < 1.0);
    assert!((split - 246.4e6).abs() < 0.1e6, "{split}");
}

#[test]
fn silver_plasmon_peak_sits_at_the_frolich_condition() {
    let ag = MaterialTable::silver().unwrap();
    let (lo, hi) = ag.range_ev();
    // independent scan of |(ε − ε_b)/(ε + 2ε_b)|
    let mut best = (0.0, 0.0);
    let mut ev = lo;
    while ev <= hi {
        let e = ag.permittivity_ev(ev).unwrap();
        let a = ((e - 5.885) / (e + 2.0 * 5.885)).norm();
        if a > best.1 {
            best = (ev, a);
        }
        ev += 5e-4;
    }
    let peak = silver_env(Orientation::Radial).plasmon_peak_ev().unwrap();
    assert!((peak - best.0).abs() < 1e-3, "{peak} vs {}", best.0);
    let eps = ag.permittivity_ev(peak).unwrap();
    assert!((eps.re + 2.0 * 5.885).abs() < 1.0, "Re eps {} at {peak} eV", eps.re);
}

#[test]
fn corrected_polarizability_is_passive() {
    for (mat, r, eps_b) in [
        (MaterialTable::silver().unwrap(), 10e-9, 5.885),
        (MaterialTable::silver().unwrap(), 10e-9, 1.0),
        (MaterialTable::gold().unwrap(), 30e-9, 1.0),
    ] {
        let (lo, hi) = mat.range_ev();
        for i in 0..400 {
            let ev = lo + (hi - lo) * (i as f64 + 0.5) / 400.0;
            let k = wavenumber(rad(ev), f64::sqrt(eps_b));
            let a = corrected_polarizability(
                quasistatic_polarizability(mat.permittivity_ev(ev).unwrap(), eps_b, r).unwrap(),
                k,
            )
            .unwrap();
            let kernel = a.im - (2.0 / 3.0) * k.powi(3) * a.norm_sqr();
            assert!(kernel >= -1e-12 * a.norm(), "{ev} eV: {kernel:e}");
        }
    }
}

#[test]
fn silver_near_field_at_the_plasmon_peak() {
    let env = silver_env(Orientation::Radial);
    let w = rad(env.plasmon_peak_ev().unwrap());
    let alpha = env.polarizability(w).unwrap().unwrap();
    let f = rabi_factor(alpha, 20e-9, DipoleAxis::Radial);
    assert!(f.norm() > 5.0, "|F| = {}", f.norm());
    assert_eq!(env.rabi_scale(w).unwrap(), f);

    let n_b = 5.885f64.sqrt();
    let k = wavenumber(w, n_b);
    let perp = decay_rate_ratio(alpha, k, 20e-9, n_b, DipoleAxis::Radial).unwrap();
    let par = decay_rate_ratio(alpha, k, 20e-9, n_b, DipoleAxis::Tangential).unwrap();
    assert!(perp > par && par > n_b, "{perp} {par} {n_b}");
}

#[test]
fn absorption_never_exceeds_total_decay() {
    for (mat, r) in [(MaterialTable::silver().unwrap(), 10e-9), (MaterialTable::gold().unwrap(), 30e-9)] {
        let (lo, hi) = mat.range_ev();
        for eps_b in [1.0, 5.885] {
            let n_b = f64::sqrt(eps_b);
            for sep in [1.05, 1.5, 2.0, 4.0, 10.0] {
                for i in 0..200 {
                    let ev = lo + (hi - lo) * (i as f64 + 0.5) / 200.0;
                    let w = rad(ev);
                    let k = wavenumber(w, n_b);
                    let a = corrected_polarizability(
                        quasistatic_polarizability(mat.permittivity_ev(ev).unwrap(), eps_b, r).unwrap(),
                        k,
                    )
                    .unwrap();
                    for axis in [DipoleAxis::Radial, DipoleAxis::Tangential] {
                        let t = decay_rate_ratio(a, k, sep * r, n_b, axis).unwrap();
                        let nr = nonradiative_rate_ratio(a, k, sep * r, n_b, axis).unwrap();
                        assert!(nr >= -1e-12 * t && nr <= t * (1.0 + 1e-12), "{ev} eV R/r={sep} {axis:?}: {nr} > {t}");
                    }
                }
            }
        }
    }
}

#[test]
fn efficiency_is_higher_on_the_red_side() {
    for o in [Orientation::Radial, Orientation::Tangential] {
        let env = silver_env(o);
        let q_res = env.emission(rad(2.03)).unwrap().efficiency;
        for ev in [1.62, 1.70, 1.80, 1.90, 1.94] {
            let q = env.emission(rad(ev)).unwrap().efficiency;
            assert!(q > q_res, "{o:?}: Q({ev}) = {q} vs Q(2.03) = {q_res}");
        }
    }
}

#[test]
fn undriven_centre_relaxes_to_the_ground_manifold() {
    let mut p = NvParameters::default();
    p.spin.b_mw = 0.0;
    p.spin.b_nv = 0.0;
    let drive = OpticalDrive {
        intensity: 0.0,
        ..OpticalDrive::default()
    };
    let s = NvSystem::new(p, Environment::free_space(), drive, false).unwrap();
    let h = s.hamiltonian(Microwave::Off).unwrap();
    assert!(h.op.entries().iter().all(|&(r, c, v)| r == c || v == Complex64::new(0.0, 0.0)));
    let rho = s.steady_state(Microwave::Off).unwrap();
    let scheme = s.params.scheme();
    let g0: f64 = Spin::ALL.iter().map(|&m| rho.population(at(&scheme, Level::Ground(0), m))).sum();
    assert!((g0 - 1.0).abs() < 1e-12, "{g0}");
}

#[test]
fn driven_steady_state_is_the_long_time_limit() {
    let s = RunConfig::default().model().unwrap().system;
    let l = s.liouvillian(Microwave::Off).unwrap();
    let ss = s.steady_state(Microwave::Off).unwrap();
    let pl = s.pl(&ss);
    assert!(pl.is_finite() && pl > 0.0);
    let scheme = s.params.scheme();
    let starts = [
        DensityOperator::pure(s.dim(), at(&scheme, Level::Ground(0), Spin::Zero)).unwrap(),
        DensityOperator::mixture(
            s.dim(),
            &[(at(&scheme, Level::Ground(3), Spin::Plus), 1.0), (at(&scheme, Level::Excited(1), Spin::Minus), 2.0)],
        )
        .unwrap(),
    ];
    for rho0 in starts {
        for n in [1usize, 1000] {
            let times: Vec<f64> = (0..=n).map(|i| 1e-3 * i as f64 / n as f64).collect();
            let traj = evolve(&l, &rho0, &times, &EvolveOptions::default()).unwrap();
            let diff = DensityOperator::new(&traj.state(n).matrix - &ss.matrix).unwrap();
            let dist = 0.5 * diff.eigenvalues().unwrap().iter().map(|v| v.abs()).sum::<f64>();
            assert!(dist <= 1e-8, "{n} steps: trace distance {dist:e}");
        }
    }
}
