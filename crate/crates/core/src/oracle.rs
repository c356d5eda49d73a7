//! Dense-matrix cross-check, built from the basis definition alone.
//!
//! Nothing here touches the analytic formulas in `compop` or `schatten`:
//! the matrix entries are evaluated as `<C f_u, f_w>` and the spectrum comes
//! from one-sided Jacobi rotations.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compop::OperatorSpec;
use crate::error::{Error, Result};
use crate::lpspace::{self, TreeFunction};

pub const DEFAULT_DENSE_CAP: usize = 600;
const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<DenseMatrix> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::LengthMismatch {
                    what: "matrix row",
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: f64) {
        self.entries[r * self.cols + c] = x;
    }

    /// Nonzero `(row, col, value)` triplets in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, &x)| (i / self.cols, i % self.cols, x))
            .collect()
    }

    pub fn write_triplets_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "value"])?;
        for (r, c, x) in self.triplets() {
            w.write_record([r.to_string(), c.to_string(), format!("{x:e}")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// `M[w, u] = <C f_u, f_w>` with `f_u = weight(u)^(-1/2) chi_u`.
pub fn matrix_of(spec: &OperatorSpec, cap: usize) -> Result<DenseMatrix> {
    if !spec.p().is_hilbert() {
        return Err(Error::RequiresHilbert(spec.p().value()));
    }
    let (tree, weight) = (spec.tree(), spec.weight());
    let n = tree.len();
    if n > cap {
        return Err(Error::DenseCapExceeded { size: n, cap });
    }
    let mut m = DenseMatrix::zeros(n, n);
    for w in tree.vertices() {
        // (C f_u)(w) = f_u(map(w)) is nonzero only for u = map(w)
        let Some(u) = spec.map().get(w) else { continue };
        let f_u_at_image = weight.at(u).powf(-0.5);
        let f_w_at_w = weight.at(w).powf(-0.5);
        m.set(w.index(), u.index(), f_u_at_image * f_w_at_w * weight.at(w));
    }
    Ok(m)
}

pub fn frobenius_sq(m: &DenseMatrix) -> f64 {
    m.entries.iter().map(|x| x * x).sum()
}

fn check_finite(m: &DenseMatrix) -> Result<()> {
    match m.entries.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFiniteEntry {
            row: i / m.cols,
            col: i % m.cols,
        }),
        None => Ok(()),
    }
}

/// All singular values, descending, via one-sided Jacobi on the columns.
pub fn svd_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    let (rows, cols) = (m.rows, m.cols);
    let mut columns: Vec<Vec<f64>> = (0..cols).map(|c| (0..rows).map(|r| m.get(r, c)).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        // squared column norms, refreshed every sweep and updated exactly
        // enough under each rotation
        let mut norms: Vec<f64> = columns.iter().map(|c| dot(c, c)).collect();
        let total: f64 = norms.iter().map(|x| x * x).sum();
        let mut off = 0.0;
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let (alpha, beta) = (norms[i], norms[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&columns[i], &columns[j]);
                off += 2.0 * gamma * gamma;
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = columns.split_at_mut(j);
                for (a, b) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
                norms[i] = alpha - t * gamma;
                norms[j] = beta + t * gamma;
                rotated = true;
            }
        }
        if !rotated || off.sqrt() < OFF_DIAGONAL_TOL * total.sqrt() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNotConverged { sweeps: MAX_SWEEPS });
    }
    let mut values: Vec<f64> = columns.iter().map(|c| dot(c, c).sqrt()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Whether `M^T M` is the identity within `tol` entrywise.
pub fn gram_is_identity(m: &DenseMatrix, tol: f64) -> bool {
    let n = m.cols;
    let mut gram = vec![0.0; n * n];
    for r in 0..m.rows {
        let nonzero: Vec<(usize, f64)> = (0..n).map(|c| (c, m.get(r, c))).filter(|&(_, x)| x != 0.0).collect();
        for &(i, x) in &nonzero {
            for &(j, y) in &nonzero {
                gram[i * n + j] += x * y;
            }
        }
    }
    gram.iter().enumerate().all(|(k, &g)| {
        let expect = if k / n == k % n { 1.0 } else { 0.0 };
        (g - expect).abs() <= tol
    })
}

fn compose(spec: &OperatorSpec, f: &TreeFunction) -> TreeFunction {
    let zero = Complex64::new(0.0, 0.0);
    TreeFunction::from_values(
        spec.tree()
            .vertices()
            .map(|v| spec.map().get(v).map_or(zero, |u| f.at(u)))
            .collect(),
    )
}

/// Largest `||C f||_p` over every normalized indicator and `samples` random
/// unit functions. A lower bound for the operator norm that, because the
/// indicators are included, attains it.
pub fn norm_search(spec: &OperatorSpec, samples: usize, seed: u64) -> f64 {
    let (tree, weight, p) = (spec.tree(), spec.weight(), spec.p());
    let mut best = 0.0f64;
    for u in tree.vertices() {
        let f = lpspace::basis_vector(tree, weight, u, p);
        best = best.max(lpspace::norm_p(&compose(spec, &f), weight, p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let values: Vec<Complex64> = (0..tree.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let f = TreeFunction::from_values(values);
        let norm = lpspace::norm_p(&f, weight, p);
        if norm == 0.0 {
            continue;
        }
        let f = f.scale(Complex64::new(1.0 / norm, 0.0));
        best = best.max(lpspace::norm_p(&compose(spec, &f), weight, p));
    }
    best
}
