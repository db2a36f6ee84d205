//! Principal component analysis over the sample covariance matrix.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, symmetric_eigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fitted PCA transform: orthonormal component rows over centered inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// k rows, each of length `input_dim`, eigenvalue-descending.
    pub components: Vec<Vec<f64>>,
    pub input_dim: usize,
}

impl PcaModel {
    /// Identity transform in `n` dimensions (no reduction).
    pub fn identity(n: usize) -> Self {
        let components = (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                row
            })
            .collect();
        PcaModel {
            mean: vec![0.0; n],
            components,
            input_dim: n,
        }
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Projects one raw row onto the component basis.
    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input_dim);
        self.components
            .iter()
            .map(|comp| {
                comp.iter()
                    .zip(x)
                    .zip(&self.mean)
                    .map(|((c, v), m)| c * (v - m))
                    .sum()
            })
            .collect()
    }

    /// Maps scores back to the input space (exact only with a full basis).
    pub fn inverse_transform_row(&self, scores: &[f64]) -> Vec<f64> {
        debug_assert_eq!(scores.len(), self.k());
        let mut out = self.mean.clone();
        for (comp, &s) in self.components.iter().zip(scores) {
            for (o, &c) in out.iter_mut().zip(comp) {
                *o += s * c;
            }
        }
        out
    }

    /// Largest deviation of the component Gram matrix from identity.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.k();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let dot: f64 = self.components[i]
                    .iter()
                    .zip(&self.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }
}

/// Fits PCA on an n×D matrix, retaining the top `k` components.
///
/// Returns the model plus all D covariance eigenvalues in descending
/// order. Component signs follow the convention that each row's
/// largest-magnitude entry is positive.
pub fn pca_fit(x: &Matrix, k: usize) -> Result<(PcaModel, Vec<f64>)> {
    let all: Vec<usize> = (0..x.rows()).collect();
    pca_fit_rows(x, &all, k)
}

/// [`pca_fit`] restricted to a row subset; rows outside `rows` are never
/// read, which keeps cross-validation folds leakage-free without copying
/// the training block.
pub fn pca_fit_rows(x: &Matrix, rows: &[usize], k: usize) -> Result<(PcaModel, Vec<f64>)> {
    let n = rows.len();
    let dim = x.cols();
    if k < 1 || k > dim {
        return Err(Error::InvalidConfig {
            reason: format!("PCA components must lie in 1..={dim}, got {k}"),
        });
    }
    if n <= k {
        return Err(Error::InvalidConfig {
            reason: format!("PCA needs more samples ({n}) than components ({k})"),
        });
    }

    let mut mean = vec![0.0; dim];
    for &i in rows {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "PCA input",
                });
            }
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    // Gram matrix of raw rows in fixed-size chunks (deterministic for any
    // thread count), then the one-pass covariance correction.
    const CHUNK: usize = 4096;
    let row_chunks: Vec<&[f64]> = rows.iter().map(|&i| x.row(i)).collect();
    let partials: Vec<Vec<f64>> = row_chunks
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut upper = vec![0.0; dim * (dim + 1) / 2];
            for row in chunk {
                let mut idx = 0;
                for i in 0..dim {
                    let ri = row[i];
                    if ri != 0.0 {
                        for rj in &row[i..] {
                            upper[idx] += ri * rj;
                            idx += 1;
                        }
                    } else {
                        idx += dim - i;
                    }
                }
            }
            upper
        })
        .collect();
    let mut gram_upper = vec![0.0; dim * (dim + 1) / 2];
    for partial in &partials {
        for (g, p) in gram_upper.iter_mut().zip(partial) {
            *g += p;
        }
    }

    let denom = (n - 1) as f64;
    let mut cov = Matrix::zeros(dim, dim);
    let mut idx = 0;
    for i in 0..dim {
        for j in i..dim {
            let v = (gram_upper[idx] - n as f64 * mean[i] * mean[j]) / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
            idx += 1;
        }
    }

    let (eigenvalues, vectors) = symmetric_eigen(&cov)?;
    let lam_max = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let threshold = lam_max * 1e-10;
    let rank = eigenvalues
        .iter()
        .filter(|&&v| v > threshold && v > 0.0)
        .count();
    if rank < k {
        return Err(Error::RankDeficient { rank, requested: k });
    }

    let mut components = Vec::with_capacity(k);
    for col in 0..k {
        let mut row: Vec<f64> = (0..dim).map(|r| vectors[(r, col)]).collect();
        let lead = row
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).expect("finite"))
            .map(|(i, _)| i)
            .expect("non-empty component");
        if row[lead] < 0.0 {
            for v in &mut row {
                *v = -*v;
            }
        }
        components.push(row);
    }

    Ok((
        PcaModel {
            mean,
            components,
            input_dim: dim,
        },
        eigenvalues,
    ))
}

/// Projects every row of `x` through the fitted model.
pub fn pca_transform(model: &PcaModel, x: &Matrix) -> Result<Matrix> {
    let all: Vec<usize> = (0..x.rows()).collect();
    pca_transform_rows(model, x, &all)
}

/// Projects a row subset, producing a dense rows.len()×k score matrix.
pub fn pca_transform_rows(model: &PcaModel, x: &Matrix, rows: &[usize]) -> Result<Matrix> {
    if x.cols() != model.input_dim {
        return Err(Error::DimensionMismatch {
            context: "PCA transform input columns",
            expected: model.input_dim,
            got: x.cols(),
        });
    }
    let k = model.k();
    let mut data = vec![0.0; rows.len() * k];
    data.par_chunks_mut(k).enumerate().for_each(|(i, out)| {
        out.copy_from_slice(&model.transform_row(x.row(rows[i])));
    });
    Ok(Matrix::from_vec(rows.len(), k, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_line() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 2.0]]);
        let (model, eigenvalues) = pca_fit(&x, 1).unwrap();
        assert_eq!(model.mean, vec![1.0, 1.0]);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((model.components[0][0] - inv_sqrt2).abs() < 1e-12);
        assert!((model.components[0][1] - inv_sqrt2).abs() < 1e-12);
        assert!((eigenvalues[0] - 4.0).abs() < 1e-12);
        let scores = pca_transform(&model, &x).unwrap();
        assert!((scores[(0, 0)] + std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((scores[(1, 0)] - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn identical_rows_are_rank_deficient() {
        let x = Matrix::from_rows(&vec![vec![3.0, 1.0, 2.0]; 5]);
        assert!(matches!(
            pca_fit(&x, 1),
            Err(Error::RankDeficient { rank: 0, .. })
        ));
    }

    #[test]
    fn full_basis_reconstructs() {
        let dim = 60;
        let n = 400;
        let mut state = 99u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 10_000) as f64 / 10_000.0
        };
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| next()).collect()).collect();
        let x = Matrix::from_rows(&rows);
        let (model, eigenvalues) = pca_fit(&x, dim).unwrap();
        assert!(model.orthonormality_error() < 1e-8);
        for w in eigenvalues.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        for row in rows.iter().take(20) {
            let back = model.inverse_transform_row(&model.transform_row(row));
            for (a, b) in back.iter().zip(row) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn transform_of_mean_is_zero() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0, 2.0],
            vec![3.0, 4.0, 0.0],
            vec![2.0, 3.0, 5.0],
            vec![0.0, 1.0, 1.0],
        ]);
        let (model, _) = pca_fit(&x, 2).unwrap();
        let z = model.transform_row(&model.mean.clone());
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn component_rows_score_as_identity_pattern() {
        // transforming mean + componentᵢ yields the i-th unit vector
        let mut state = 7u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 10_000) as f64 / 10_000.0 - 0.5
        };
        let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..6).map(|_| next()).collect()).collect();
        let (model, _) = pca_fit(&Matrix::from_rows(&rows), 3).unwrap();
        for i in 0..3 {
            let probe: Vec<f64> = model
                .mean
                .iter()
                .zip(&model.components[i])
                .map(|(m, c)| m + c)
                .collect();
            let z = model.transform_row(&probe);
            for (j, v) in z.iter().enumerate() {
                let want = if j == i { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn transform_rejects_wrong_width() {
        let (model, _) = pca_fit(
            &Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.2]]),
            1,
        )
        .unwrap();
        let bad = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]);
        assert!(matches!(
            pca_transform(&model, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
