//! Lindblad generator in real Hermitian coordinates.
//!
//! For ρ written as a real vector x (see [`HermitianCoords`]) the master
//! equation reads dx/dt = G x with G real. G is kept sparse; dense blocks
//! restricted to an invariant coordinate subset are formed for the solvers.

use super::channels::CollapseChannel;
use super::hamiltonian::Hamiltonian;
use super::operators::{HermitianCoords, SparseOp};
use crate::constants::HBAR;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub struct Liouvillian {
    coords: HermitianCoords,
    /// H/ħ − (i/2) Σ Γ L†L, rad/s.
    heff: SparseOp,
    /// Off-diagonal structure of H, for the population graph.
    couplings: Vec<(usize, usize)>,
    jumps: Vec<(f64, SparseOp)>,
    jumps_by_col: Vec<Vec<usize>>,
    gen: Vec<Vec<(usize, f64)>>,
    norm: f64,
}

/// A set of real coordinates closed under the generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub indices: Vec<usize>,
    map: Vec<Option<usize>>,
}

impl Subspace {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, coord: usize) -> Option<usize> {
        self.map.get(coord).copied().flatten()
    }

    pub fn contains(&self, coord: usize) -> bool {
        self.position(coord).is_some()
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| full[i]).collect()
    }

    pub fn expand(&self, reduced: &[f64], full_len: usize) -> Vec<f64> {
        let mut x = vec![0.0; full_len];
        for (k, &i) in self.indices.iter().enumerate() {
            x[i] = reduced[k];
        }
        x
    }
}

impl Liouvillian {
    pub fn new(h: &Hamiltonian, channels: &[CollapseChannel]) -> Result<Self> {
        let d = h.dim();
        if let Some(c) = channels.iter().find(|c| c.op.dim() != d) {
            return Err(Error::Assembly(format!(
                "channel {} has dimension {}, Hamiltonian {d}",
                c.label,
                c.op.dim()
            )));
        }
        let mut t: Vec<(usize, usize, Complex64)> =
            h.op.entries().iter().map(|&(r, c, v)| (r, c, v / HBAR)).collect();
        let mut jumps = vec![];
        for ch in channels.iter().filter(|c| c.rate > 0.0) {
            let k = ch.op.adjoint().matmul(&ch.op);
            t.extend(k.entries().iter().map(|&(r, c, v)| (r, c, -0.5 * I * ch.rate * v)));
            jumps.push((ch.rate, ch.op.clone()));
        }
        let heff = SparseOp::from_triplets(d, t);
        let mut jumps_by_col = vec![vec![]; d];
        for (x, (_, op)) in jumps.iter().enumerate() {
            for c in 0..d {
                if !op.col(c).is_empty() {
                    jumps_by_col[c].push(x);
                }
            }
        }
        let couplings = h
            .op
            .entries()
            .iter()
            .filter(|(r, c, _)| r != c)
            .map(|&(r, c, _)| (r, c))
            .collect();
        let mut l = Self {
            coords: HermitianCoords::new(d),
            heff,
            couplings,
            jumps,
            jumps_by_col,
            gen: vec![],
            norm: 0.0,
        };
        l.build_real();
        if !l.norm.is_finite() {
            return Err(Error::Assembly("generator has non-finite entries".into()));
        }
        Ok(l)
    }

    pub fn dim(&self) -> usize {
        self.coords.dim
    }

    pub fn coords(&self) -> HermitianCoords {
        self.coords
    }

    /// Induced 1-norm of the real generator.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Non-zero entries of column `j` of the real generator.
    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.gen[j]
    }

    /// L(|a⟩⟨b|) as unsorted triplets.
    fn unit_action(&self, a: usize, b: usize, out: &mut Vec<(usize, usize, Complex64)>) {
        out.clear();
        for &(r, h) in self.heff.col(a) {
            out.push((r, b, -I * h));
        }
        for &(c, h) in self.heff.col(b) {
            out.push((a, c, I * h.conj()));
        }
        for &x in &self.jumps_by_col[a] {
            let (rate, op) = &self.jumps[x];
            let col_b = op.col(b);
            if col_b.is_empty() {
                continue;
            }
            for &(r, l1) in op.col(a) {
                for &(c, l2) in col_b {
                    out.push((r, c, *rate * l1 * l2.conj()));
                }
            }
        }
    }

    fn build_real(&mut self) {
        let d = self.dim();
        let hc = self.coords;
        let n = hc.len();
        let mut gen = vec![vec![]; n];
        let mut scratch = vec![0.0; n];
        let mut touched: Vec<usize> = vec![];
        let mut unit = vec![];

        let flush = |scratch: &mut Vec<f64>, touched: &mut Vec<usize>| -> Vec<(usize, f64)> {
            touched.sort_unstable();
            touched.dedup();
            let col: Vec<(usize, f64)> = touched
                .iter()
                .filter(|&&i| scratch[i] != 0.0)
                .map(|&i| (i, scratch[i]))
                .collect();
            for &i in touched.iter() {
                scratch[i] = 0.0;
            }
            touched.clear();
            col
        };

        for a in 0..d {
            for b in a..d {
                self.unit_action(a, b, &mut unit);
                // factor and phase mapping C to the Hermitian image
                let variants = if a == b {
                    vec![(hc.diag(a), Complex64::new(0.5, 0.0))]
                } else {
                    let (re, im) = hc.re_im(a, b);
                    vec![(re, Complex64::new(1.0, 0.0)), (im, I)]
                };
                for (col, f) in variants {
                    let mut add = |i: usize, v: f64| {
                        scratch[i] += v;
                        touched.push(i);
                    };
                    for &(r, c, v) in &unit {
                        // M = f C + (f C)†
                        let w = f * v;
                        if r == c {
                            add(hc.diag(r), 2.0 * w.re);
                        } else if r < c {
                            hc.accumulate(&mut add, r, c, w);
                        } else {
                            hc.accumulate(&mut add, c, r, w.conj());
                        }
                    }
                    gen[col] = flush(&mut scratch, &mut touched);
                }
            }
        }
        self.norm = gen
            .iter()
            .map(|c| c.iter().map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        self.gen = gen;
    }

    /// Real generator applied to a coordinate vector.
    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for &(i, g) in &self.gen[j] {
                    y[i] += g * xj;
                }
            }
        }
        y
    }

    /// L(X) for an arbitrary d×d matrix.
    pub fn apply(&self, x: &Array2<Complex64>) -> Array2<Complex64> {
        let d = self.dim();
        let mut y = Array2::zeros((d, d));
        let mut unit = vec![];
        for ((a, b), &v) in x.indexed_iter() {
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            self.unit_action(a, b, &mut unit);
            for &(r, c, w) in &unit {
                y[(r, c)] += v * w;
            }
        }
        y
    }

    /// Column-stacked complex superoperator: vec(ρ)[r + c·d] = ρ_rc.
    pub fn superoperator(&self) -> Array2<Complex64> {
        let d = self.dim();
        let mut s = Array2::zeros((d * d, d * d));
        let mut unit = vec![];
        for a in 0..d {
            for b in 0..d {
                self.unit_action(a, b, &mut unit);
                for &(r, c, w) in &unit {
                    s[(r + c * d, a + b * d)] += w;
                }
            }
        }
        s
    }

    /// Smallest coordinate set containing `seeds` and closed under G.
    pub fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> Subspace {
        let n = self.coords.len();
        let mut inside = vec![false; n];
        let mut stack: Vec<usize> = vec![];
        for s in seeds {
            if !inside[s] {
                inside[s] = true;
                stack.push(s);
            }
        }
        while let Some(j) = stack.pop() {
            for &(i, _) in &self.gen[j] {
                if !inside[i] {
                    inside[i] = true;
                    stack.push(i);
                }
            }
        }
        let indices: Vec<usize> = (0..n).filter(|&i| inside[i]).collect();
        let mut map = vec![None; n];
        for (k, &i) in indices.iter().enumerate() {
            map[i] = Some(k);
        }
        Subspace { indices, map }
    }

    /// Subspace reached from the populations.
    pub fn population_closure(&self) -> Subspace {
        self.closure(0..self.dim())
    }

    /// Closure of the support of a coordinate vector.
    pub fn support_closure(&self, x: &[f64]) -> Subspace {
        self.closure(x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i))
    }

    /// Dense block of G on a closed subspace.
    pub fn restricted(&self, sub: &Subspace) -> Array2<f64> {
        let m = sub.len();
        let mut g = Array2::zeros((m, m));
        for (col, &j) in sub.indices.iter().enumerate() {
            for &(i, v) in &self.gen[j] {
                if let Some(row) = sub.position(i) {
                    g[(row, col)] = v;
                }
            }
        }
        g
    }

    /// Number of closed communicating classes of the population graph built
    /// from jump transfers and coherent couplings. More than one implies a
    /// degenerate stationary state.
    pub fn closed_classes(&self) -> usize {
        let d = self.dim();
        let mut adj = vec![vec![false; d]; d];
        for (_, op) in &self.jumps {
            for &(r, c, _) in op.entries() {
                if r != c {
                    adj[c][r] = true;
                }
            }
        }
        for &(r, c) in &self.couplings {
            adj[r][c] = true;
            adj[c][r] = true;
        }
        let mut reach = adj;
        for i in 0..d {
            reach[i][i] = true;
        }
        for k in 0..d {
            for i in 0..d {
                if reach[i][k] {
                    for j in 0..d {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let closed: Vec<usize> = (0..d)
            .filter(|&a| (0..d).all(|b| !reach[a][b] || reach[b][a]))
            .collect();
        let mut classes = 0;
        let mut seen = vec![false; d];
        for &a in &closed {
            if !seen[a] {
                classes += 1;
                for &b in &closed {
                    if reach[a][b] {
                        seen[b] = true;
                    }
                }
            }
        }
        classes
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dynamics::channels::ChannelKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn toy() -> Liouvillian {
        let d = 3;
        let h = Hamiltonian {
            op: SparseOp::from_triplets(
                d,
                [
                    (0, 0, c(0.3 * HBAR, 0.0)),
                    (1, 1, c(-0.2 * HBAR, 0.0)),
                    (0, 1, c(0.5 * HBAR, 0.1 * HBAR)),
                    (1, 0, c(0.5 * HBAR, -0.1 * HBAR)),
                    (1, 2, c(0.0, 0.7 * HBAR)),
                    (2, 1, c(0.0, -0.7 * HBAR)),
                ],
            ),
        };
        let ch = vec![
            CollapseChannel::new("a", ChannelKind::Other, 0.8, SparseOp::transition(d, 0, 1)).unwrap(),
            CollapseChannel::new("b", ChannelKind::Other, 0.3, SparseOp::transition(d, 1, 2)).unwrap(),
            CollapseChannel::new("c", ChannelKind::Other, 0.4, SparseOp::diagonal(d, [(0, 1.0), (2, -1.0)])).unwrap(),
        ];
        Liouvillian::new(&h, &ch).unwrap()
    }

    #[test]
    fn real_generator_matches_complex_action() {
        let l = toy();
        let hc = l.coords();
        let mut x = Array2::zeros((3, 3));
        x[(0, 0)] = c(0.5, 0.0);
        x[(1, 1)] = c(0.3, 0.0);
        x[(2, 2)] = c(0.2, 0.0);
        x[(0, 2)] = c(0.1, -0.05);
        x[(2, 0)] = c(0.1, 0.05);
        x[(1, 2)] = c(-0.02, 0.07);
        x[(2, 1)] = c(-0.02, -0.07);
        let y = l.apply(&x);
        let yr = l.apply_real(hc.to_coords(&x).as_slice().unwrap());
        let expect = hc.to_coords(&y);
        for (a, b) in yr.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn superoperator_is_trace_free() {
        let l = toy();
        let s = l.superoperator();
        for j in 0..9 {
            let t: Complex64 = (0..3).map(|a| s[(a + 3 * a, j)]).sum();
            assert!(t.norm() < 1e-12);
        }
    }
}
