use super::eigen::eigen_symmetric;
use super::linalg::{canonicalize_sign, norm, solve_lower, solve_lower_transposed, Matrix};
use super::{distinct, FisherError};
use crate::emotion::EmotionLabel;

/// Relative ridge added to the within-class scatter diagonal.
pub const RIDGE: f64 = 1e-9;

/// Linear discriminant directions for samples `y` (n x k).
///
/// Solves `S_b v = λ S_w v` by reducing through the Cholesky factor of the
/// ridged `S_w`, and returns the top `c - 1` directions as unit,
/// sign-canonical columns of a k x (c-1) matrix.
pub fn lda_fit(y: &Matrix, labels: &[EmotionLabel]) -> Result<Matrix, FisherError> {
    let (n, k) = (y.rows(), y.cols());
    if labels.len() != n {
        return Err(FisherError::InvalidArgument(format!("{n} samples but {} labels", labels.len())));
    }
    let classes = distinct(labels);
    let c = classes.len();
    if c < 2 {
        return Err(FisherError::InvalidArgument(format!("LDA needs at least 2 classes, got {c}")));
    }
    if k < c {
        return Err(FisherError::InvalidArgument(format!("LDA input dimension {k} must be at least the class count {c}")));
    }

    let mut global = vec![0.0; k];
    let mut means = vec![vec![0.0; k]; c];
    let mut counts = vec![0usize; c];
    let class_of: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    for (i, &ci) in class_of.iter().enumerate() {
        counts[ci] += 1;
        for (j, v) in y.row(i).iter().enumerate() {
            means[ci][j] += v;
            global[j] += v;
        }
    }
    if let Some(ci) = counts.iter().position(|&n| n < 2) {
        return Err(FisherError::InvalidArgument(format!("class {} has {} sample(s), needs at least 2", classes[ci], counts[ci])));
    }
    for (m, &cnt) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= cnt as f64);
    }
    global.iter_mut().for_each(|v| *v /= n as f64);

    let mut sw = Matrix::zeros(k, k);
    for (i, &ci) in class_of.iter().enumerate() {
        let diff: Vec<f64> = y.row(i).iter().zip(&means[ci]).map(|(a, b)| a - b).collect();
        add_outer(&mut sw, &diff, 1.0);
    }
    let mut sb = Matrix::zeros(k, k);
    for (m, &cnt) in means.iter().zip(&counts) {
        let diff: Vec<f64> = m.iter().zip(&global).map(|(a, b)| a - b).collect();
        add_outer(&mut sb, &diff, cnt as f64);
    }

    let eps = RIDGE * sw.trace() / k as f64;
    for i in 0..k {
        sw[(i, i)] += eps;
    }
    let l = sw
        .cholesky()
        .map_err(|e| FisherError::Numerical(format!("within-class scatter is singular even after ridge: {e}")))?;

    // M = L⁻¹ S_b L⁻ᵀ, built column by column.
    let mut half = Matrix::zeros(k, k);
    for j in 0..k {
        half.set_column(j, &solve_lower(&l, &sb.column(j)));
    }
    let half_t = half.transpose();
    let mut m = Matrix::zeros(k, k);
    for j in 0..k {
        m.set_column(j, &solve_lower(&l, &half_t.column(j)));
    }
    let m = Matrix::from_fn(k, k, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));

    let eig = eigen_symmetric(&m)?;
    let mut w = Matrix::zeros(k, c - 1);
    for i in 0..c - 1 {
        let mut v = solve_lower_transposed(&l, &eig.vector(i));
        let nv = norm(&v);
        if !(nv > 0.0) || !nv.is_finite() {
            return Err(FisherError::Numerical(format!("degenerate discriminant direction {i}")));
        }
        v.iter_mut().for_each(|a| *a /= nv);
        canonicalize_sign(&mut v);
        w.set_column(i, &v);
    }
    Ok(w)
}

fn add_outer(m: &mut Matrix, v: &[f64], weight: f64) {
    for (i, &a) in v.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let wa = weight * a;
        for (o, &b) in m.row_mut(i).iter_mut().zip(v) {
            *o += wa * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Rng;

    #[test]
    fn rejects_degenerate_inputs() {
        let y = Matrix::from_fn(4, 3, |i, j| (i + j) as f64);
        let one = vec![EmotionLabel::Happy; 4];
        assert!(lda_fit(&y, &one).is_err());
        let y2 = Matrix::from_fn(6, 2, |i, j| (i * j) as f64);
        let three = [EmotionLabel::Happy, EmotionLabel::Happy, EmotionLabel::Sad, EmotionLabel::Sad, EmotionLabel::Fear, EmotionLabel::Fear];
        assert!(lda_fit(&y2, &three).is_err());
    }

    #[test]
    fn identical_within_class_samples_are_singular() {
        let y = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]]);
        let labels = [EmotionLabel::Happy, EmotionLabel::Happy, EmotionLabel::Sad, EmotionLabel::Sad];
        assert!(matches!(lda_fit(&y, &labels), Err(FisherError::Numerical(_))));
    }

    #[test]
    fn paired_permutation_gives_same_basis() {
        let mut rng = Rng::new(5);
        let labels: Vec<_> = (0..12).map(|i| EmotionLabel::ALL[i % 3]).collect();
        let y = Matrix::from_fn(12, 5, |i, _| rng.gaussian() + (i % 3) as f64);
        let w = lda_fit(&y, &labels).unwrap();
        let perm: Vec<usize> = (0..12).rev().collect();
        let yp = Matrix::from_fn(12, 5, |i, j| y[(perm[i], j)]);
        let lp: Vec<_> = perm.iter().map(|&i| labels[i]).collect();
        assert!(lda_fit(&yp, &lp).unwrap().max_abs_diff(&w) < 1e-10);
    }
}
