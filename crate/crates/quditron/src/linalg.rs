//! Minimal dense linear algebra: a row-major matrix, an LU solver, and a
//! symmetric eigensolver (Householder tridiagonalization + implicit-shift QL).
//!
//! Sized for this crate's needs: Cayley verification at d ≤ 64 and PCA
//! covariance eigendecomposition at 784×784.

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    /// Takes ownership of a flat row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "buffer does not match shape");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        assert_eq!(a.rows(), a.cols(), "LU requires a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_val = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = i;
                }
            }
            if pivot_val.is_nan() || pivot_val <= f64::MIN_POSITIVE {
                return Err(Error::SingularSolve { pivot_index: k });
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let upd = factor * lu[(k, j)];
                    lu[(i, j)] -= upd;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    /// Solves A·x = b for one right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // forward: L y = P b
        for i in 1..n {
            let dot: f64 = self.lu.row(i)[..i]
                .iter()
                .zip(&x[..i])
                .map(|(l, v)| l * v)
                .sum();
            x[i] -= dot;
        }
        // back: U x = y
        for i in (0..n).rev() {
            let dot: f64 = self.lu.row(i)[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .map(|(u, v)| u * v)
                .sum();
            x[i] = (x[i] - dot) / self.lu[(i, i)];
        }
        x
    }

    /// Solves A·X = B column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n);
        let bt = b.transpose();
        let mut out_t = Matrix::zeros(b.cols(), n);
        for j in 0..b.cols() {
            let col = self.solve_vec(bt.row(j));
            out_t.row_mut(j).copy_from_slice(&col);
        }
        out_t.transpose()
    }
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// eigenvector `j` is column `j` of the returned matrix.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    assert_eq!(a.rows(), a.cols(), "eigen requires a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    let mut z = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e);
    ql_implicit(&mut z, &mut d, &mut e)?;

    // stable sort by descending eigenvalue
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).expect("non-finite eigenvalue"));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = z[(r, old_col)];
        }
    }
    Ok((values, vectors))
}

/// Householder reduction to tridiagonal form, accumulating the orthogonal
/// transform in `z` (tred2 lineage).
fn tridiagonalize(z: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = z.rows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += z[(i, k)].abs();
            }
            if scale == 0.0 {
                e[i] = z[(i, l)];
            } else {
                for k in 0..=l {
                    z[(i, k)] /= scale;
                    h += z[(i, k)] * z[(i, k)];
                }
                let f = z[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[(i, l)] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    z[(j, i)] = z[(i, j)] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += z[(j, k)] * z[(i, k)];
                    }
                    for k in j + 1..=l {
                        g_acc += z[(k, j)] * z[(i, k)];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * z[(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let upd = f * e[k] + g * z[(i, k)];
                        z[(j, k)] -= upd;
                    }
                }
            }
        } else {
            e[i] = z[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[(i, k)] * z[(k, j)];
                }
                for k in 0..i {
                    let upd = g * z[(k, i)];
                    z[(k, j)] -= upd;
                }
            }
        }
        d[i] = z[(i, i)];
        z[(i, i)] = 1.0;
        for j in 0..i {
            z[(j, i)] = 0.0;
            z[(i, j)] = 0.0;
        }
    }
}

/// Implicit-shift QL iteration on the tridiagonal form (tql2 lineage);
/// eigenvectors accumulate into the columns of `z`.
fn ql_implicit(z: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = z.rows();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::ConvergenceFailure {
                    context: "symmetric QL iteration",
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    /// Cyclic Jacobi eigensolver: the independent oracle for `symmetric_eigen`.
    fn jacobi_eigenvalues(a: &Matrix) -> Vec<f64> {
        let n = a.rows();
        let mut m = a.clone();
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals
    }

    #[test]
    fn lu_solves_small_system() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve_vec(&[5.0, 10.0]);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lu_reports_singularity() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(Lu::factor(&a), Err(Error::SingularSolve { .. })));
    }

    #[test]
    fn lu_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 5, 17, 40] {
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = rng.random_range(-1.0..1.0);
                }
                a[(i, i)] += 4.0; // keep well conditioned
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = Lu::factor(&a).unwrap().solve_vec(&b);
            for i in 0..n {
                let ax: f64 = (0..n).map(|j| a[(i, j)] * x[j]).sum();
                assert!((ax - b[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigen_diagonal_matrix() {
        let a = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 7.0],
        ]);
        let (vals, _) = symmetric_eigen(&a).unwrap();
        assert_eq!(vals, vec![7.0, 3.0, -1.0]);
    }

    #[test]
    fn eigen_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 3, 8, 25, 60] {
            let a = random_symmetric(n, &mut rng);
            let (vals, vecs) = symmetric_eigen(&a).unwrap();
            // descending order
            for w in vals.windows(2) {
                assert!(w[0] >= w[1]);
            }
            // A v = λ v
            for j in 0..n {
                for i in 0..n {
                    let av: f64 = (0..n).map(|k| a[(i, k)] * vecs[(k, j)]).sum();
                    assert!(
                        (av - vals[j] * vecs[(i, j)]).abs() < 1e-9,
                        "residual too large at n={n}"
                    );
                }
            }
            // VᵀV = I
            let vtv = vecs.transpose().matmul(&vecs);
            assert!(vtv.max_abs_diff(&Matrix::identity(n)) < 1e-10);
        }
    }

    #[test]
    fn eigen_matches_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for n in [2usize, 4, 9, 16] {
            let a = random_symmetric(n, &mut rng);
            let (vals, _) = symmetric_eigen(&a).unwrap();
            let oracle = jacobi_eigenvalues(&a);
            for (got, want) in vals.iter().zip(&oracle) {
                assert!((got - want).abs() < 1e-9, "n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn eigen_handles_clustered_spectra() {
        // rotate a spectrum with a triple eigenvalue and verify the
        // decomposition still reconstructs and stays orthonormal
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let spectrum: Vec<f64> = (0..n)
            .map(|i| if i < 3 { 2.0 } else { -1.0 + i as f64 * 0.25 })
            .collect();
        // random orthogonal basis from QR-ish Gram-Schmidt of a random matrix
        let mut basis: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        for i in 0..n {
            for j in 0..i {
                let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                let prev = basis[j].clone();
                for (v, p) in basis[i].iter_mut().zip(&prev) {
                    *v -= dot * p;
                }
            }
            let norm: f64 = basis[i].iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut basis[i] {
                *v /= norm;
            }
        }
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for (k, lam) in spectrum.iter().enumerate() {
                    acc += lam * basis[k][i] * basis[k][j];
                }
                a[(i, j)] = acc;
            }
        }
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        let mut want = spectrum.clone();
        want.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (got, expect) in vals.iter().zip(&want) {
            assert!((got - expect).abs() < 1e-9);
        }
        let vtv = vecs.transpose().matmul(&vecs);
        assert!(vtv.max_abs_diff(&Matrix::identity(n)) < 1e-10);
        for j in 0..n {
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[(i, k)] * vecs[(k, j)]).sum();
                assert!((av - vals[j] * vecs[(i, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eigen_handles_rank_one() {
        // outer product u uᵀ has one eigenvalue ‖u‖² and zeros elsewhere
        let u = [1.0, 2.0, 3.0, 4.0];
        let mut a = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] = u[i] * u[j];
            }
        }
        let (vals, _) = symmetric_eigen(&a).unwrap();
        assert!((vals[0] - 30.0).abs() < 1e-10);
        for v in &vals[1..] {
            assert!(v.abs() < 1e-10);
        }
    }
}
