//! Continuous-wave ODMR sweeps and their figures of merit.

use super::system::{Microwave, NvSystem};
use crate::constants::{BOHR_MAGNETON, PLANCK};
use crate::{Error, Result};
use rayon::prelude::*;

/// PL versus microwave frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct OdmrCurve {
    /// Hz.
    pub frequency: Vec<f64>,
    /// photons/s.
    pub pl: Vec<f64>,
}

/// Evenly spaced frequency grid, inclusive of both ends.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(stop > start) {
        return Err(Error::Usage(format!(
            "grid needs stop > start and at least two points (got {start}..{stop}, {points})"
        )));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points).map(|i| start + step * i as f64).collect())
}

/// Stationary PL at each microwave frequency (Hz). Points are solved in
/// parallel; the result does not depend on the thread count.
pub fn odmr_sweep(system: &NvSystem, frequencies: &[f64]) -> Result<OdmrCurve> {
    if frequencies.is_empty() {
        return Err(Error::Usage("empty frequency grid".into()));
    }
    let pl: Vec<f64> = frequencies
        .par_iter()
        .enumerate()
        .map(|(i, &f)| {
            system
                .steady_state(Microwave::At(f))
                .map(|rho| system.pl(&rho))
                .map_err(|e| Error::AtPoint {
                    index: i,
                    value: format!("{:.6} GHz", f * 1e-9),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    Ok(OdmrCurve {
        frequency: frequencies.to_vec(),
        pl,
    })
}

/// Figures of merit of one ODMR curve.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct OdmrFigures {
    /// Mean PL over the outer grid margins.
    pub baseline: f64,
    /// baseline − min PL.
    pub depth: f64,
    /// depth / baseline.
    pub contrast: f64,
    /// Linewidth of the deeper dip, Hz.
    pub fwhm: f64,
    /// Centre of the deeper dip, Hz.
    pub dip_frequency: f64,
    /// True if the linewidth came from a Lorentzian fit rather than interpolation.
    pub fitted: bool,
}

/// Fraction of the grid at each end used for the baseline.
pub const BASELINE_FRACTION: f64 = 0.1;

pub fn odmr_figures(curve: &OdmrCurve) -> Result<OdmrFigures> {
    odmr_figures_with(curve, BASELINE_FRACTION)
}

pub fn odmr_figures_with(curve: &OdmrCurve, margin: f64) -> Result<OdmrFigures> {
    let n = curve.pl.len();
    if n < 5 || curve.frequency.len() != n {
        return Err(Error::Usage("curve needs at least five matching points".into()));
    }
    if !(margin > 0.0 && margin < 0.5) {
        return Err(Error::Usage(format!("baseline margin {margin} must lie in (0, 0.5)")));
    }
    let edge = ((n as f64 * margin).round() as usize).max(1);
    let outer: Vec<f64> = curve.pl[..edge].iter().chain(&curve.pl[n - edge..]).copied().collect();
    let baseline = outer.iter().sum::<f64>() / outer.len() as f64;
    let (imin, &pmin) = curve
        .pl
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let depth = baseline - pmin;
    if !(baseline > 0.0) || depth <= 1e-9 * baseline.abs() {
        return Err(Error::NoResonance("the curve has no dip below its baseline".into()));
    }
    if imin < edge || imin >= n - edge {
        return Err(Error::NoResonance("the deepest point lies inside the baseline margin".into()));
    }
    let interp = interpolated_fwhm(curve, imin, baseline)
        .ok_or_else(|| Error::NoResonance("dip is not resolved on the grid".into()))?;
    let (fwhm, centre, fitted) = match fit_lorentzian_dip(curve, imin, baseline, depth, interp) {
        Some((w, c)) => (w, c, true),
        None => (interp, curve.frequency[imin], false),
    };
    Ok(OdmrFigures {
        baseline,
        depth,
        contrast: depth / baseline,
        fwhm,
        dip_frequency: centre,
        fitted,
    })
}

/// Full width at half depth by linear interpolation around `imin`.
fn interpolated_fwhm(curve: &OdmrCurve, imin: usize, baseline: f64) -> Option<f64> {
    let (f, y) = (&curve.frequency, &curve.pl);
    let half = baseline - 0.5 * (baseline - y[imin]);
    let cross = |i: usize, j: usize| f[i] + (half - y[i]) * (f[j] - f[i]) / (y[j] - y[i]);
    let mut left = None;
    for i in (0..imin).rev() {
        if y[i] >= half {
            left = Some(cross(i, i + 1));
            break;
        }
    }
    let mut right = None;
    for i in imin + 1..y.len() {
        if y[i] >= half {
            right = Some(cross(i - 1, i));
            break;
        }
    }
    Some(right? - left?)
}

/// Levenberg–Marquardt fit of B − A/(1 + ((f − f0)/(w/2))²) around the dip.
/// Returns (w, f0) or None if the fit does not converge to something sensible.
fn fit_lorentzian_dip(curve: &OdmrCurve, imin: usize, baseline: f64, depth: f64, guess: f64) -> Option<(f64, f64)> {
    let f0 = curve.frequency[imin];
    let pts: Vec<(f64, f64)> = curve
        .frequency
        .iter()
        .zip(&curve.pl)
        .filter(|(f, _)| (*f - f0).abs() <= 1.5 * guess)
        .map(|(f, y)| (*f, *y))
        .collect();
    if pts.len() < 5 {
        return None;
    }
    // scale to O(1) numbers
    let (fs, ys) = (guess, depth);
    let data: Vec<(f64, f64)> = pts.iter().map(|(f, y)| ((f - f0) / fs, (y - baseline) / ys)).collect();
    let model = |p: &[f64; 4], x: f64| -> (f64, [f64; 4]) {
        let u = (x - p[2]) / (0.5 * p[3]);
        let l = 1.0 / (1.0 + u * u);
        let dl_du = -2.0 * u * l * l;
        (
            p[0] - p[1] * l,
            [
                1.0,
                -l,
                -p[1] * dl_du * (-1.0 / (0.5 * p[3])),
                -p[1] * dl_du * (-u / p[3]),
            ],
        )
    };
    let cost = |p: &[f64; 4]| data.iter().map(|&(x, y)| (model(p, x).0 - y).powi(2)).sum::<f64>();
    let mut p = [0.0, 1.0, 0.0, 1.0];
    let mut lambda = 1e-3;
    let mut c = cost(&p);
    for _ in 0..200 {
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for &(x, y) in &data {
            let (m, g) = model(&p, x);
            let r = y - m;
            for a in 0..4 {
                jtr[a] += g[a] * r;
                for b in 0..4 {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj;
            for (k, row) in a.iter_mut().enumerate() {
                row[k] *= 1.0 + lambda;
            }
            let Some(step) = solve4(a, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let ct = cost(&trial);
            if ct.is_finite() && ct < c && trial[3] > 0.0 {
                let rel = (c - ct) / c.max(1e-300);
                p = trial;
                c = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-12 {
                    return accept(p, fs, f0);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            return accept(p, fs, f0);
        }
    }
    accept(p, fs, f0)
}

fn accept(p: [f64; 4], fs: f64, f0: f64) -> Option<(f64, f64)> {
    let w = p[3] * fs;
    let centre = f0 + p[2] * fs;
    (w.is_finite() && w > 0.0 && p[3] < 4.0 && p[3] > 0.25 && p[2].abs() < 1.0).then_some((w, centre))
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for k in col..4 {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// DC magnetic sensitivity η_B = 4hΔν / (3√3 g µ_B C √PL) in T/√Hz.
pub fn dc_sensitivity(fwhm: f64, contrast: f64, pl: f64, g_factor: f64) -> Result<f64> {
    if !(contrast > 0.0) {
        return Err(Error::UndefinedSensitivity(format!("contrast {contrast} is not positive")));
    }
    if !(pl > 0.0) {
        return Err(Error::UndefinedSensitivity(format!("PL rate {pl} is not positive")));
    }
    if !(fwhm > 0.0) {
        return Err(Error::UndefinedSensitivity(format!("linewidth {fwhm} is not positive")));
    }
    Ok(4.0 * PLANCK * fwhm / (3.0 * 3f64.sqrt() * g_factor * BOHR_MAGNETON * contrast * pl.sqrt()))
}

/// Ratios of a curve's figures to those of a reference curve.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Enhancement {
    pub baseline: f64,
    pub depth: f64,
    pub contrast: f64,
}

pub fn enhancement(sample: &OdmrFigures, reference: &OdmrFigures) -> Enhancement {
    Enhancement {
        baseline: sample.baseline / reference.baseline,
        depth: sample.depth / reference.depth,
        contrast: sample.contrast / reference.contrast,
    }
}

/// Baseline ratio only; does not need resolved dips.
pub fn baseline_ratio(sample: &OdmrCurve, reference: &OdmrCurve, margin: f64) -> Result<f64> {
    let b = |c: &OdmrCurve| -> Result<f64> {
        let n = c.pl.len();
        if n < 2 {
            return Err(Error::Usage("curve too short".into()));
        }
        let edge = ((n as f64 * margin).round() as usize).max(1);
        let v: Vec<f64> = c.pl[..edge].iter().chain(&c.pl[n - edge..]).copied().collect();
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    };
    Ok(b(sample)? / b(reference)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz_curve(width: f64, centre: f64) -> OdmrCurve {
        let f = linear_grid(2.6e9, 3.14e9, 271).unwrap();
        let pl = f
            .iter()
            .map(|x| 1e5 * (1.0 - 0.2 / (1.0 + ((x - centre) / (0.5 * width)).powi(2))))
            .collect();
        OdmrCurve { frequency: f, pl }
    }

    #[test]
    fn fit_recovers_lorentzian_width() {
        let c = lorentz_curve(12e6, 2.746e9);
        let fig = odmr_figures(&c).unwrap();
        assert!(fig.fitted);
        assert!((fig.fwhm / 12e6 - 1.0).abs() < 1e-4, "{}", fig.fwhm);
        assert!((fig.dip_frequency - 2.746e9).abs() < 1e3);
        assert!((fig.depth / (0.2e5) - 1.0).abs() < 0.01, "{fig:?}");
    }

    #[test]
    fn flat_curve_has_no_resonance() {
        let f = linear_grid(2.6e9, 3.14e9, 51).unwrap();
        let c = OdmrCurve {
            pl: vec![1.0; f.len()],
            frequency: f,
        };
        assert!(matches!(odmr_figures(&c), Err(Error::NoResonance(_))));
    }

    #[test]
    fn sensitivity_scaling() {
        let a = dc_sensitivity(10e6, 0.1, 1e6, 2.0).unwrap();
        let b = dc_sensitivity(20e6, 0.1, 4e6, 2.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert!(dc_sensitivity(10e6, 0.0, 1e6, 2.0).is_err());
        assert!(dc_sensitivity(10e6, 0.1, 0.0, 2.0).is_err());
    }
}
