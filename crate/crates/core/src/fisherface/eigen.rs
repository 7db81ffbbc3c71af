use super::linalg::{canonicalize_sign, Matrix};
use super::FisherError;

pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues descending, eigenvectors
/// as orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }
}

fn max_off_diagonal(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut m = 0.0f64;
    for p in 0..n {
        for q in p + 1..n {
            m = m.max(a[(p, q)].abs());
        }
    }
    m
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps until every off-diagonal entry is below `1e-12 * ‖A‖_F` or
/// [`MAX_SWEEPS`] is reached. Each eigenvector is sign-canonicalized so its
/// first non-negligible component is positive.
pub fn eigen_symmetric(a: &Matrix) -> Result<SymmetricEigen, FisherError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(FisherError::InvalidArgument(format!("eigen_symmetric needs a square matrix, got {}x{}", n, a.cols())));
    }
    let norm = a.frobenius();
    if !norm.is_finite() {
        return Err(FisherError::InvalidArgument("matrix has non-finite entries".into()));
    }
    let sym_tol = 1e-10 * norm.max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in i + 1..n {
            let d = (a[(i, j)] - a[(j, i)]).abs();
            if d > sym_tol {
                return Err(FisherError::InvalidArgument(format!(
                    "matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {d:e}"
                )));
            }
        }
    }

    let mut m = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let tol = 1e-12 * norm;
    let mut converged = n < 2 || norm == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < tol {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                m[(p, p)] -= t * apq;
                m[(q, q)] += t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    let np = c * akp - s * akq;
                    let nq = s * akp + c * akq;
                    m[(k, p)] = np;
                    m[(p, k)] = np;
                    m[(k, q)] = nq;
                    m[(q, k)] = nq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = max_off_diagonal(&m) < tol;
    }
    if !converged {
        return Err(FisherError::Numerical(format!(
            "Jacobi did not converge in {MAX_SWEEPS} sweeps (largest off-diagonal {:e})",
            max_off_diagonal(&m)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        canonicalize_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(SymmetricEigen { values, vectors })
}
