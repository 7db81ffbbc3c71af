use super::eigen::{eigen_symmetric, SymmetricEigen};
use super::linalg::{canonicalize_sign, dot, norm, Matrix};
use super::FisherError;

/// Eigenvalues at or below this fraction of the largest count as zero.
pub(crate) const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    /// d x k, orthonormal columns.
    pub basis: Matrix,
    /// Covariance eigenvalues of the retained components, descending.
    pub eigenvalues: Vec<f64>,
}

/// Eigendecomposition of the n x n Gram matrix of centered rows.
pub(crate) struct GramPca {
    mean: Vec<f64>,
    centered: Matrix,
    eig: SymmetricEigen,
}

impl GramPca {
    pub fn new(x: &Matrix) -> Result<Self, FisherError> {
        let (n, d) = (x.rows(), x.cols());
        if n < 2 {
            return Err(FisherError::InvalidArgument("PCA needs at least 2 samples".into()));
        }
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut centered = x.clone();
        for i in 0..n {
            for (c, m) in centered.row_mut(i).iter_mut().zip(&mean) {
                *c -= m;
            }
        }
        let mut gram = centered.gram_rows();
        gram.scale(1.0 / n as f64);
        let eig = eigen_symmetric(&gram)?;
        Ok(GramPca { mean, centered, eig })
    }

    pub fn samples(&self) -> usize {
        self.centered.rows()
    }

    /// Number of eigenvalues above the relative zero threshold.
    pub fn rank(&self) -> usize {
        let top = self.eig.values.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        self.eig.values.iter().take_while(|&&v| v > RANK_TOL * top).count()
    }

    pub fn basis(&self, k: usize) -> Result<PcaBasis, FisherError> {
        let n = self.samples();
        if k < 1 || k > n - 1 {
            return Err(FisherError::InvalidArgument(format!("PCA dimension {k} outside 1..={}", n - 1)));
        }
        let top = self.eig.values[0];
        for i in 0..k {
            let v = self.eig.values[i];
            if top <= 0.0 || v <= RANK_TOL * top {
                return Err(FisherError::Rank { index: i, value: v });
            }
        }
        let d = self.centered.cols();
        let mut basis = Matrix::zeros(d, k);
        let mut done: Vec<Vec<f64>> = Vec::with_capacity(k);
        for i in 0..k {
            let mut v = self.centered.tr_mul_vec(&self.eig.vector(i));
            // One Gram-Schmidt pass against earlier columns absorbs the
            // round-off that small eigenvalues amplify.
            for prev in &done {
                let p = dot(&v, prev);
                v.iter_mut().zip(prev).for_each(|(a, b)| *a -= p * b);
            }
            let nv = norm(&v);
            if nv == 0.0 {
                return Err(FisherError::Rank { index: i, value: self.eig.values[i] });
            }
            v.iter_mut().for_each(|a| *a /= nv);
            canonicalize_sign(&mut v);
            basis.set_column(i, &v);
            done.push(v);
        }
        Ok(PcaBasis { mean: self.mean.clone(), basis, eigenvalues: self.eig.values[..k].to_vec() })
    }
}

/// PCA over sample rows by way of the Gram matrix `X_c X_cᵀ / n`, keeping
/// the top `k` components (`1 <= k <= n - 1`).
pub fn pca_fit(x: &Matrix, k: usize) -> Result<PcaBasis, FisherError> {
    if x.rows() >= 2 && (k < 1 || k > x.rows() - 1) {
        return Err(FisherError::InvalidArgument(format!("PCA dimension {k} outside 1..={}", x.rows() - 1)));
    }
    GramPca::new(x)?.basis(k)
}

impl PcaBasis {
    /// `basisᵀ (x - mean)`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        self.basis.tr_mul_vec(&centered)
    }
}
