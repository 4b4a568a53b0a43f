//! Dense real LU factorisation with partial pivoting.
//!
//! Right-looking and blocked; the trailing update goes through ndarray's
//! matrix product so large factorisations run at GEMM speed.

use crate::{Error, Result};
use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2};

const BLOCK: usize = 48;

/// P A = L U stored in one matrix (unit diagonal of L implied).
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Array2<f64>,
    /// Row i was swapped with row piv[i] at step i.
    piv: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Usage("LU needs a square matrix".into()));
        }
        let mut piv = vec![0; n];
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !scale.is_finite() {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let tiny = scale * f64::EPSILON * 1e-3;
        let mut k0 = 0;
        while k0 < n {
            let k1 = (k0 + BLOCK).min(n);
            for j in k0..k1 {
                let p = (j..n)
                    .max_by(|&x, &y| a[(x, j)].abs().total_cmp(&a[(y, j)].abs()))
                    .expect("non-empty range");
                piv[j] = p;
                if p != j {
                    for c in 0..n {
                        a.swap((j, c), (p, c));
                    }
                }
                let d = a[(j, j)];
                if d.abs() <= tiny {
                    return Err(Error::Numerical(format!("matrix is singular to working precision at column {j}")));
                }
                let (top, mut rest) = a.view_mut().split_at(ndarray::Axis(0), j + 1);
                let pivot_row = top.slice(s![j, j + 1..k1]);
                for mut row in rest.rows_mut() {
                    let f = row[j] / d;
                    row[j] = f;
                    if f != 0.0 {
                        row.slice_mut(s![j + 1..k1]).scaled_add(-f, &pivot_row);
                    }
                }
            }
            if k1 < n {
                // U12 = L11⁻¹ A12
                for j in k0..k1 {
                    let (top, mut rest) = a.view_mut().split_at(ndarray::Axis(0), j + 1);
                    let src = top.slice(s![j, k1..]);
                    for i in 0..(k1 - j - 1) {
                        let f = rest[(i, j)];
                        if f != 0.0 {
                            rest.slice_mut(s![i, k1..]).scaled_add(-f, &src);
                        }
                    }
                }
                let (a21, u12, mut a22) = a.multi_slice_mut((s![k1.., k0..k1], s![k0..k1, k1..], s![k1.., k1..]));
                general_mat_mul(-1.0, &a21.view(), &u12.view(), 1.0, &mut a22);
            }
            k0 = k1;
        }
        Ok(Self { lu: a, piv })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let mut m = b.clone().insert_axis(ndarray::Axis(1));
        self.solve_in_place(&mut m);
        m.index_axis_move(ndarray::Axis(1), 0)
    }

    /// Solve A X = B for a matrix right-hand side, overwriting B.
    pub fn solve_in_place(&self, b: &mut Array2<f64>) {
        let n = self.dim();
        for (i, &p) in self.piv.iter().enumerate() {
            if p != i {
                for c in 0..b.ncols() {
                    b.swap((i, c), (p, c));
                }
            }
        }
        for i in 1..n {
            let (done, mut rest) = b.view_mut().split_at(ndarray::Axis(0), i);
            let mut row = rest.row_mut(0);
            for j in 0..i {
                let l = self.lu[(i, j)];
                if l != 0.0 {
                    row.scaled_add(-l, &done.row(j));
                }
            }
        }
        for i in (0..n).rev() {
            let (mut head, tail) = b.view_mut().split_at(ndarray::Axis(0), i + 1);
            let mut row = head.row_mut(i);
            for j in 0..tail.nrows() {
                let u = self.lu[(i, i + 1 + j)];
                if u != 0.0 {
                    row.scaled_add(-u, &tail.row(j));
                }
            }
            row.mapv_inplace(|v| v / self.lu[(i, i)]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(n: usize, seed: u64) -> Array2<f64> {
        let mut s = seed;
        Array2::from_shape_fn((n, n), |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn solves_random_systems() {
        for n in [1, 5, 47, 48, 49, 130] {
            let a = pseudo_random(n, n as u64);
            let b = Array1::from_shape_fn(n, |i| i as f64 - 3.0);
            let x = Lu::factor(a.clone()).unwrap().solve(&b);
            let r = &b - &a.dot(&x);
            assert!(r.iter().all(|v| v.abs() < 1e-9), "n = {n}");
        }
    }

    #[test]
    fn matrix_rhs_gives_inverse() {
        let a = pseudo_random(70, 3);
        let mut x = Array2::eye(70);
        Lu::factor(a.clone()).unwrap().solve_in_place(&mut x);
        let e = a.dot(&x) - Array2::<f64>::eye(70);
        assert!(e.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = ndarray::arr2(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(Lu::factor(a).is_err());
    }
}
