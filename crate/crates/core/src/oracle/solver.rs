use crate::elliptic::Tolerance;
use crate::error::{Error, Result};

const SSOR_OMEGA: f64 = 1.5;

/// Symmetric sparse matrix: off-diagonal entries in CSR form with sorted
/// columns, diagonal kept apart.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    /// first entry of each row with `col > row`
    upper_start: Vec<usize>,
}

impl Csr {
    pub(crate) fn new(row_ptr: Vec<usize>, cols: Vec<u32>, vals: Vec<f64>, diag: Vec<f64>) -> Self {
        let upper_start = (0..diag.len())
            .map(|i| {
                let row = &cols[row_ptr[i]..row_ptr[i + 1]];
                row_ptr[i] + row.partition_point(|&c| (c as usize) < i)
            })
            .collect();
        Self {
            row_ptr,
            cols,
            vals,
            diag,
            upper_start,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.diag.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.len() {
            let mut s = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = s;
        }
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// `z = M⁻¹ r` with `M = (D + ωL) D⁻¹ (D + ωU)`.
    fn ssor(&self, r: &[f64], z: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = r[i];
            for k in self.row_ptr[i]..self.upper_start[i] {
                s -= SSOR_OMEGA * self.vals[k] * z[self.cols[k] as usize];
            }
            z[i] = s / self.diag[i];
        }
        for i in 0..n {
            z[i] *= self.diag[i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.upper_start[i]..self.row_ptr[i + 1] {
                s -= SSOR_OMEGA * self.vals[k] * z[self.cols[k] as usize];
            }
            z[i] = s / self.diag[i];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients from a zero start, stopping at
/// `‖b - Ax‖ ≤ rel_tol·‖b‖` (or `abs_tol`). Returns the solution, the
/// reached relative residual and the iteration count.
pub(crate) fn pcg_ssor(a: &Csr, b: &[f64], tol: &Tolerance) -> Result<(Vec<f64>, f64, usize)> {
    let n = a.len();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if n == 0 || b_norm == 0.0 {
        return Ok((x, 0.0, 0));
    }
    let target = (tol.rel_tol * b_norm).max(tol.abs_tol);
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    a.ssor(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=tol.max_iter {
        a.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::DegenerateGeometry(
                "stiffness matrix is not positive definite".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = dot(&r, &r).sqrt();
        if r_norm <= target {
            return Ok((x, r_norm / b_norm, it));
        }
        a.ssor(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::IterationLimit {
        what: "conjugate gradients",
        max_iter: tol.max_iter,
    })
}
