//! Emission spectra from the quantum regression theorem.
//!
//! For each emitting transition σ the correlator
//! C(τ) = tr[σ† e^{Lτ}(σρ)] is sampled on a uniform τ grid, its constant
//! (coherently scattered) part |tr σρ|² is removed, and
//! S(ω) = 2 Re ∫₀^∞ e^{−i(ω−ω_f)τ} C(τ) dτ is evaluated with an FFT.

use super::density::DensityOperator;
use super::liouvillian::Liouvillian;
use super::operators::SparseOp;
use super::propagate::expm;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// A transition operator and the weight of its emission in the output.
#[derive(Clone, Debug)]
pub struct Emitter {
    pub op: SparseOp,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    /// First τ window tried, s.
    pub initial_window: f64,
    /// Largest τ window allowed before giving up, s.
    pub max_window: f64,
    /// Upper bound on the τ step, s.
    pub max_step: f64,
    /// The correlator must fall below this fraction of its peak.
    pub decay_threshold: f64,
    /// Zero-padding factor of the FFT.
    pub padding: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            initial_window: 1e-12,
            max_window: 1e-9,
            max_step: 5e-15,
            decay_threshold: 1e-6,
            padding: 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Angular frequencies, rad/s.
    pub omega: Vec<f64>,
    /// Spectral density per unit angular frequency.
    pub intensity: Vec<f64>,
    /// τ step and window actually used.
    pub step: f64,
    pub window: f64,
    /// Σ w |tr σρ|², removed from the correlator.
    pub coherent_weight: f64,
    /// Σ w C(0) of the incoherent correlator, equal to ∫S dω/2π.
    pub correlator_origin: f64,
}

impl Spectrum {
    /// ∫ S dω / 2π over the grid (trapezoid rule).
    pub fn integral(&self) -> f64 {
        trapezoid(&self.omega, &self.intensity) / (2.0 * PI)
    }

    /// ∫ S dω / 2π restricted to ω ∈ [lo, hi].
    pub fn band_integral(&self, lo: f64, hi: f64) -> f64 {
        let (mut x, mut y) = (vec![], vec![]);
        for (w, s) in self.omega.iter().zip(&self.intensity) {
            if *w >= lo && *w <= hi {
                x.push(*w);
                y.push(*s);
            }
        }
        trapezoid(&x, &y) / (2.0 * PI)
    }
}

/// Trapezoid-rule integral of samples y(x).
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

fn hermitian_parts(x: &Array2<Complex64>) -> (Array2<Complex64>, Array2<Complex64>) {
    let xd = x.t().mapv(|v| v.conj());
    let h = (x + &xd).mapv(|v| v * 0.5);
    let a = (x - &xd).mapv(|v| v * Complex64::new(0.0, -0.5));
    (h, a)
}

/// Emission spectrum of `emitters` in state `rho` on `omega_grid` (rad/s);
/// `frame` is the rotating-frame frequency of the generator.
pub fn emission_spectrum(
    l: &Liouvillian,
    rho: &DensityOperator,
    emitters: &[Emitter],
    frame: f64,
    omega_grid: &[f64],
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    if omega_grid.len() < 2 || omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("frequency grid must be increasing with at least two points".into()));
    }
    if emitters.is_empty() {
        return Err(Error::Usage("no emitting transitions given".into()));
    }
    let hc = l.coords();

    // Correlator seeds X = σρ split into Hermitian parts.
    let mut seeds = vec![];
    let mut probes = vec![];
    let mut coherent = 0.0;
    let mut origin = 0.0;
    for em in emitters {
        let s = em.op.to_dense();
        let x = s.dot(&rho.matrix);
        let (xh, xa) = hermitian_parts(&x);
        seeds.push(hc.to_coords(&xh));
        seeds.push(hc.to_coords(&xa));
        let sd = s.t().mapv(|v| v.conj());
        let mean = x.diag().sum();
        let mean_dag = sd.dot(&rho.matrix).diag().sum();
        let c_inf = mean * mean_dag;
        coherent += em.weight * c_inf.re;
        origin += em.weight * (sd.dot(&x).diag().sum() - c_inf).re;
        probes.push((em.op.entries().to_vec(), em.weight, c_inf));
    }
    let support: Vec<usize> = seeds
        .iter()
        .flat_map(|x| x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect::<Vec<_>>())
        .collect();
    let sub = l.closure(support);
    let m = sub.len();
    let mut v = Array2::<f64>::zeros((m, seeds.len()));
    for (c, x) in seeds.iter().enumerate() {
        for (k, &i) in sub.indices.iter().enumerate() {
            v[(k, c)] = x[i];
        }
    }

    // τ step from the requested band.
    let lo = omega_grid[0] - frame;
    let hi = omega_grid[omega_grid.len() - 1] - frame;
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let step = (PI / (2.0 * half)).min(options.max_step);
    let prop = expm(&(l.restricted(&sub) * step))?;

    // tr(σ† B) = Σ_{(r,c)} conj(σ_rc) B_rc
    let correlator = |v: &Array2<f64>| -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (e, (entries, w, c_inf)) in probes.iter().enumerate() {
            let xh = v.column(2 * e);
            let xa = v.column(2 * e + 1);
            let mut c = Complex64::new(0.0, 0.0);
            for &(r, col, s) in entries {
                let get = |x: &ndarray::ArrayView1<f64>, r: usize, c: usize| -> Complex64 {
                    let coord = |i: usize| sub.position(i).map_or(0.0, |p| x[p]);
                    use std::cmp::Ordering::*;
                    match r.cmp(&c) {
                        Equal => Complex64::new(coord(hc.diag(r)), 0.0),
                        Less => {
                            let (re, im) = hc.re_im(r, c);
                            Complex64::new(coord(re), coord(im))
                        }
                        Greater => {
                            let (re, im) = hc.re_im(c, r);
                            Complex64::new(coord(re), -coord(im))
                        }
                    }
                };
                let b = get(&xh, r, col) + Complex64::new(0.0, 1.0) * get(&xa, r, col);
                c += s.conj() * b;
            }
            total += *w * (c - c_inf);
        }
        total
    };

    let mut samples = vec![correlator(&v)];
    let peak_of = |s: &[Complex64]| s.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut n_target = ((options.initial_window / step).ceil() as usize).max(16).next_power_of_two();
    loop {
        while samples.len() < n_target {
            v = prop.dot(&v);
            samples.push(correlator(&v));
        }
        let peak = peak_of(&samples);
        let tail = samples[n_target / 2..].iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if tail <= options.decay_threshold * peak || peak == 0.0 {
            break;
        }
        if (2 * n_target) as f64 * step > options.max_window {
            return Err(Error::WindowTooShort(format!(
                "correlator tail {:.2e} of peak after {:.3e} s",
                tail / peak,
                n_target as f64 * step
            )));
        }
        n_target *= 2;
    }
    // FFT of the demodulated, trapezoid-weighted correlator.
    let n = samples.len();
    let len = n * options.padding.max(1);
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); len];
    for (k, c) in samples.iter().enumerate() {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let tau = k as f64 * step;
        buf[k] = *c * w * Complex64::from_polar(1.0, -centre * tau);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let dw = 2.0 * PI / (len as f64 * step);
    // reorder to increasing detuning
    let half_len = len / 2;
    let detuning: Vec<f64> = (0..len)
        .map(|q| {
            let q = (q + half_len) % len;
            let signed = if q >= half_len { q as f64 - len as f64 } else { q as f64 };
            signed * dw
        })
        .collect();
    let values: Vec<f64> = (0..len)
        .map(|q| 2.0 * buf[(q + half_len) % len].re * step)
        .collect();
    let intensity = interpolate(&detuning, &values, omega_grid.iter().map(|w| w - frame - centre));
    Ok(Spectrum {
        omega: omega_grid.to_vec(),
        intensity,
        step,
        window: n as f64 * step,
        coherent_weight: coherent,
        correlator_origin: origin,
    })
}

fn interpolate(x: &[f64], y: &[f64], at: impl Iterator<Item = f64>) -> Vec<f64> {
    at.map(|t| {
        let i = x.partition_point(|&v| v <= t).clamp(1, x.len() - 1);
        let (x0, x1) = (x[i - 1], x[i]);
        let f = ((t - x0) / (x1 - x0)).clamp(0.0, 1.0);
        y[i - 1] * (1.0 - f) + y[i] * f
    })
    .collect()
}
