//! Compressed-sparse-row matrices and a Jacobi-preconditioned BiCGStab
//! solver. The solver contract is a relative residual, not an algorithm:
//! `||b - A x|| <= rtol * ||b||` on success.

use crate::error::{Error, Result};

/// Default relative residual tolerance for linear solves.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Square sparse matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of one row as parallel `(columns, values)` slices.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
    }

    pub fn mul_vec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// Euclidean norm of `b - A x`.
    pub fn residual_norm(&self, b: &[f64], x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut ax = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                ax += v * x[c];
            }
            let d = b[r] - ax;
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Main diagonal (zeros where absent).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if c == r {
                    d[r] = v;
                }
            }
        }
        d
    }

    /// Dense copy, used by the small-grid verification oracles.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Row-wise accumulator for building a [`CsrMatrix`]. Duplicate insertions
/// into the same entry are summed.
#[derive(Debug, Clone)]
pub struct CsrBuilder {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl CsrBuilder {
    pub fn new(n: usize) -> Self {
        CsrBuilder {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n && c < self.n);
        self.rows[r].push((c, v));
    }

    pub fn build(mut self) -> CsrMatrix {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &mut self.rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Outcome of a converged linear solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BiCGStab with Jacobi (diagonal) right preconditioning.
///
/// The recurrence residual is checked against the true residual before
/// accepting convergence; a stalled recurrence restarts from the current
/// iterate. Deterministic for fixed inputs.
#[derive(Debug, Clone)]
pub struct BiCgStab {
    inv_diag: Vec<f64>,
}

impl BiCgStab {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        for r in 0..a.n() {
            let (cols, _) = a.row(r);
            if cols.is_empty() {
                return Err(Error::SingularMatrix { row: r });
            }
        }
        let inv_diag = a
            .diagonal()
            .iter()
            .map(|&d| if d.abs() > f64::MIN_POSITIVE { 1.0 / d } else { 1.0 })
            .collect();
        Ok(BiCgStab { inv_diag })
    }

    /// Solve `A x = b` in place, starting from the initial guess in `x`.
    pub fn solve(
        &self,
        a: &CsrMatrix,
        b: &[f64],
        x: &mut [f64],
        rtol: f64,
        max_iter: usize,
    ) -> Result<SolveStats> {
        let n = a.n();
        assert_eq!(b.len(), n);
        assert_eq!(x.len(), n);

        let bnorm = norm(b);
        if bnorm == 0.0 {
            x.fill(0.0);
            return Ok(SolveStats {
                iterations: 0,
                residual: 0.0,
            });
        }
        let tol = rtol * bnorm;

        let mut r = vec![0.0; n];
        a.mul_vec(x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        if norm(&r) <= tol {
            return Ok(SolveStats {
                iterations: 0,
                residual: norm(&r),
            });
        }

        let mut rhat = r.clone();
        let mut p = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut phat = vec![0.0; n];
        let mut shat = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut t = vec![0.0; n];
        let mut rho_old = 1.0;
        let mut alpha = 1.0;
        let mut omega = 1.0;
        let mut started = false;

        let breakdown = 1e-300;
        let mut iter = 0;
        while iter < max_iter {
            iter += 1;
            let rho = dot(&rhat, &r);
            if rho.abs() < breakdown {
                // lost the shadow direction; restart from the current iterate
                a.mul_vec(x, &mut r);
                for k in 0..n {
                    r[k] = b[k] - r[k];
                }
                rhat.copy_from_slice(&r);
                started = false;
                continue;
            }
            if started {
                let beta = (rho / rho_old) * (alpha / omega);
                for k in 0..n {
                    p[k] = r[k] + beta * (p[k] - omega * v[k]);
                }
            } else {
                p.copy_from_slice(&r);
                started = true;
            }
            for k in 0..n {
                phat[k] = self.inv_diag[k] * p[k];
            }
            a.mul_vec(&phat, &mut v);
            let denom = dot(&rhat, &v);
            if denom.abs() < breakdown {
                rhat.copy_from_slice(&r);
                started = false;
                continue;
            }
            alpha = rho / denom;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if norm(&s) <= tol {
                for k in 0..n {
                    x[k] += alpha * phat[k];
                }
                let res = a.residual_norm(b, x);
                if res <= tol {
                    return Ok(SolveStats {
                        iterations: iter,
                        residual: res,
                    });
                }
                a.mul_vec(x, &mut r);
                for k in 0..n {
                    r[k] = b[k] - r[k];
                }
                rhat.copy_from_slice(&r);
                started = false;
                rho_old = 1.0;
                continue;
            }
            for k in 0..n {
                shat[k] = self.inv_diag[k] * s[k];
            }
            a.mul_vec(&shat, &mut t);
            let tt = dot(&t, &t);
            if tt < breakdown {
                rhat.copy_from_slice(&r);
                started = false;
                continue;
            }
            omega = dot(&t, &s) / tt;
            for k in 0..n {
                x[k] += alpha * phat[k] + omega * shat[k];
                r[k] = s[k] - omega * t[k];
            }
            rho_old = rho;
            if norm(&r) <= tol {
                let res = a.residual_norm(b, x);
                if res <= tol {
                    return Ok(SolveStats {
                        iterations: iter,
                        residual: res,
                    });
                }
                // recurrence drifted; refresh the true residual and go on
                a.mul_vec(x, &mut r);
                for k in 0..n {
                    r[k] = b[k] - r[k];
                }
                rhat.copy_from_slice(&r);
                started = false;
                rho_old = 1.0;
            }
            if omega.abs() < breakdown {
                rhat.copy_from_slice(&r);
                started = false;
            }
        }
        Err(Error::SolveFailed {
            iterations: max_iter,
            residual: a.residual_norm(b, x),
            tolerance: tol,
        })
    }
}

/// Solve `A x = b` from a zero initial guess with the default contract:
/// relative residual `<= 1e-10`, iteration cap `max(1000, 20 n)`.
pub fn solve_linear(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let solver = BiCgStab::new(a)?;
    let mut x = vec![0.0; a.n()];
    let max_iter = (20 * a.n()).max(1000);
    solver.solve(a, b, &mut x, DEFAULT_RTOL, max_iter)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> CsrMatrix {
        let mut b = CsrBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 1.0);
        }
        b.build()
    }

    #[test]
    fn identity_returns_rhs() {
        let a = identity(7);
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 2.5).collect();
        let x = solve_linear(&a, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let mut b = CsrBuilder::new(2);
        b.add(0, 0, 2.0);
        b.add(1, 1, 4.0);
        let a = b.build();
        let x = solve_linear(&a, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_row_is_structurally_singular() {
        let mut b = CsrBuilder::new(3);
        b.add(0, 0, 1.0);
        b.add(2, 2, 1.0);
        let a = b.build();
        match solve_linear(&a, &[1.0, 1.0, 1.0]) {
            Err(Error::SingularMatrix { row }) => assert_eq!(row, 1),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    /// 5-point Laplacian with homogeneous Dirichlet boundary on an m x m
    /// interior grid.
    fn laplacian_2d(m: usize) -> CsrMatrix {
        let n = m * m;
        let h2 = ((m + 1) as f64).powi(2);
        let mut b = CsrBuilder::new(n);
        for j in 0..m {
            for i in 0..m {
                let k = j * m + i;
                b.add(k, k, 4.0 * h2);
                if i > 0 {
                    b.add(k, k - 1, -h2);
                }
                if i + 1 < m {
                    b.add(k, k + 1, -h2);
                }
                if j > 0 {
                    b.add(k, k - m, -h2);
                }
                if j + 1 < m {
                    b.add(k, k + m, -h2);
                }
            }
        }
        b.build()
    }

    #[test]
    fn laplacian_matches_dense_factorization_oracle() {
        let a = laplacian_2d(11);
        let n = a.n();
        let b: Vec<f64> = (0..n).map(|i| ((i * 37 % 17) as f64 - 8.0) / 8.0).collect();
        let x = solve_linear(&a, &b).unwrap();

        // dense LU oracle
        let dense = a.to_dense();
        let rhs = nalgebra::DVector::from_column_slice(&b);
        let oracle = dense.lu().solve(&rhs).expect("dense solve");
        let mut max_diff = 0.0_f64;
        for i in 0..n {
            max_diff = max_diff.max((x[i] - oracle[i]).abs());
        }
        assert!(max_diff < 1e-9, "max diff {max_diff}");
    }

    #[test]
    fn residual_contract_holds() {
        let a = laplacian_2d(9);
        let b: Vec<f64> = (0..a.n()).map(|i| (i as f64).sin()).collect();
        let solver = BiCgStab::new(&a).unwrap();
        let mut x = vec![0.0; a.n()];
        let stats = solver.solve(&a, &b, &mut x, 1e-10, 10_000).unwrap();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(stats.residual <= 1e-10 * bn);
        assert!(a.residual_norm(&b, &x) <= 1e-10 * bn);
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let a = laplacian_2d(9);
        let b = vec![1.0; a.n()];
        let solver = BiCgStab::new(&a).unwrap();
        let mut x = vec![0.0; a.n()];
        match solver.solve(&a, &b, &mut x, 1e-10, 2) {
            Err(Error::SolveFailed {
                iterations,
                residual,
                tolerance,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > tolerance);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn builder_merges_duplicates() {
        let mut b = CsrBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(0, 0, 2.0);
        b.add(0, 1, -1.0);
        b.add(1, 1, 1.0);
        let a = b.build();
        assert_eq!(a.nnz(), 3);
        let y = a.mul_vec_alloc(&[1.0, 1.0]);
        assert_eq!(y, vec![2.0, 1.0]);
    }
}
