//! Compressed sparse rows and a Jacobi-preconditioned conjugate gradient.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate `(row, col)` entries. Column order within a row is
    /// ascending, so products are reproducible bit for bit.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            *out = self.cols[s..e]
                .iter()
                .zip(&self.vals[s..e])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
                (s..e).find(|&k| self.cols[k] == r).map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive-definite `A` starting from `x = 0`,
/// stopping at `‖b − Ax‖ ≤ rel_tol·‖b‖`.
pub fn pcg(a: &CsrMatrix, b: &[f64], rel_tol: f64) -> Result<(Vec<f64>, CgOutcome)> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((
            x,
            CgOutcome {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_iters = 20 * n + 100;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 1..=max_iters {
        a.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverDiverged {
                residual: dot(&r, &r).sqrt() / bnorm,
                iterations: it,
            });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rel = dot(&r, &r).sqrt() / bnorm;
        if !rel.is_finite() {
            return Err(Error::SolverDiverged {
                residual: rel,
                iterations: it,
            });
        }
        if rel <= rel_tol {
            return Ok((
                x,
                CgOutcome {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        if rel < 0.5 * best {
            best = rel;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 4 * n + 200 {
                return Err(Error::SolverDiverged {
                    residual: rel,
                    iterations: it,
                });
            }
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::SolverDiverged {
        residual: dot(&r, &r).sqrt() / bnorm,
        iterations: max_iters,
    })
}
