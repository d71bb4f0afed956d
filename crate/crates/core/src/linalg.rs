//! Compressed sparse row matrices and Jacobi-preconditioned Krylov solvers.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed in
    /// input order, so a fixed triplet sequence gives bitwise-identical values.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable: ties keep input order
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (r, c, v) = triplets[t];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    /// `self - other`, for matrices sharing a sparsity pattern.
    pub fn sub(&self, other: &CsrMatrix) -> Option<CsrMatrix> {
        if self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return None;
        }
        Some(CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .all(|k| (self.values[k] - self.get(self.col_idx[k], r)).abs() <= tol)
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("zero or non-finite diagonal entry in row {0}")]
    SingularDiagonal(usize),
    #[error("Krylov breakdown after {0} iterations")]
    Breakdown(usize),
    #[error("dimension mismatch: matrix {matrix}, vector {vector}")]
    Dimension { matrix: usize, vector: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 5000,
            restart: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b - Ax‖ / ‖b‖`, recomputed from the final iterate.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inverse_diagonal(a: &CsrMatrix) -> Result<Vec<f64>, LinearSolveError> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d == 0.0 || !d.is_finite() {
                Err(LinearSolveError::SingularDiagonal(i))
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

fn true_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    norm2(&r)
}

/// Restarted GMRES with right Jacobi preconditioning, from `x = 0`.
pub fn gmres(a: &CsrMatrix, b: &[f64], opts: &KrylovOptions) -> Result<KrylovSolution, LinearSolveError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinearSolveError::Dimension {
            matrix: n,
            vector: b.len(),
        });
    }
    let dinv = inverse_diagonal(a)?;
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(KrylovSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let target = opts.rel_tol * bnorm;
    let m = opts.restart.max(1).min(n.max(1));
    let mut total = 0;
    let mut r = b.to_vec();
    let mut beta = bnorm;

    while total < opts.max_iter {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        let mut w = vec![0.0; n];

        for k in 0..m {
            let z: Vec<f64> = basis[k].iter().zip(&dinv).map(|(v, d)| v * d).collect();
            a.mul_vec_into(&z, &mut w);
            // modified Gram–Schmidt
            for (j, vj) in basis.iter().enumerate() {
                let hjk = dot(&w, vj);
                hess[j][k] = hjk;
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= hjk * vi;
                }
            }
            let hnext = norm2(&w);
            hess[k + 1][k] = hnext;
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let denom = (hess[k][k] * hess[k][k] + hess[k + 1][k] * hess[k + 1][k]).sqrt();
            if denom == 0.0 || !denom.is_finite() {
                return Err(LinearSolveError::Breakdown(total));
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            if g[k + 1].abs() <= target || hnext <= 1e-300 || total >= opts.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // back substitution for the k_used × k_used triangular system
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= hess[i][j] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * basis[j][i] * dinv[i];
            }
        }
        let ax = a.mul_vec(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        beta = norm2(&r);
        if beta <= target || beta == 0.0 {
            break;
        }
    }
    let rel = true_residual(a, &x, b) / bnorm;
    Ok(KrylovSolution {
        x,
        iterations: total,
        relative_residual: rel,
        converged: rel <= opts.rel_tol * 10.0,
    })
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive-definite `a`.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    opts: &KrylovOptions,
) -> Result<KrylovSolution, LinearSolveError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinearSolveError::Dimension {
            matrix: n,
            vector: b.len(),
        });
    }
    let dinv = inverse_diagonal(a)?;
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(KrylovSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while it < opts.max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(LinearSolveError::Breakdown(it));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        if norm2(&r) <= opts.rel_tol * bnorm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = true_residual(a, &x, b) / bnorm;
    Ok(KrylovSolution {
        x,
        iterations: it,
        relative_residual: rel,
        converged: rel <= opts.rel_tol * 10.0,
    })
}
