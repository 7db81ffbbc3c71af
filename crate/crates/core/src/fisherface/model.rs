use super::lda::lda_fit;
use super::linalg::{canonicalize_sign, norm, Matrix};
use super::pca::GramPca;
use super::{distinct, vectorize, FisherError, SampleMatrix};
use crate::emotion::EmotionLabel;
use crate::imgproc::GrayImage;

/// A trained Fisherface classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherModel {
    pub face_w: u32,
    pub face_h: u32,
    pub mean: Vec<f64>,
    /// d x (c-1), unit columns; `W_pca * W_lda`.
    pub projection: Matrix,
    /// n x (c-1), row i is `Wᵀ (x_i - mean)`.
    pub projected_train: Matrix,
    pub train_labels: Vec<EmotionLabel>,
    pub class_list: Vec<EmotionLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: EmotionLabel,
    /// Euclidean distance to the nearest training sample in Fisher space.
    pub distance: f64,
    /// Nearest training sample of any other class.
    pub runner_up: Option<(EmotionLabel, f64)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainOptions {
    /// PCA dimension; `None` picks `n - c`, capped by the data rank.
    pub pca_dims: Option<usize>,
}

pub fn train_fisherface(x: &SampleMatrix) -> Result<FisherModel, FisherError> {
    train_fisherface_with(x, &TrainOptions::default())
}

pub fn train_fisherface_with(x: &SampleMatrix, opts: &TrainOptions) -> Result<FisherModel, FisherError> {
    let n = x.len();
    let classes = x.classes();
    let c = classes.len();
    if c < 2 {
        return Err(FisherError::InvalidArgument(format!("training needs at least 2 classes, got {c}")));
    }
    if n < c + 2 {
        return Err(FisherError::InvalidArgument(format!("{n} samples is too few for {c} classes (need at least {})", c + 2)));
    }

    let gram = GramPca::new(&x.rows)?;
    // Linearly dependent samples (duplicates, for instance) shrink the
    // usable within-class rank below n - c.
    let rank = gram.rank();
    let k = match opts.pca_dims {
        Some(k) => k,
        None => (n - c).min(rank.saturating_sub(c - 1)),
    };
    if k < c {
        return Err(FisherError::InvalidArgument(format!(
            "PCA dimension {k} is below the class count {c} (data rank {rank})"
        )));
    }
    let pca = gram.basis(k)?;

    let projected_pca = x.rows_projected(&pca.mean, &pca.basis);
    let lda = lda_fit(&projected_pca, &x.labels)?;

    let mut projection = pca.basis.matmul(&lda);
    for j in 0..projection.cols() {
        let mut col = projection.column(j);
        let nc = norm(&col);
        if !(nc > 0.0) {
            return Err(FisherError::Numerical(format!("Fisher direction {j} vanished")));
        }
        col.iter_mut().for_each(|v| *v /= nc);
        canonicalize_sign(&mut col);
        projection.set_column(j, &col);
    }
    let projected_train = x.rows_projected(&pca.mean, &projection);

    Ok(FisherModel {
        face_w: x.face_w,
        face_h: x.face_h,
        mean: pca.mean,
        projection,
        projected_train,
        train_labels: x.labels.clone(),
        class_list: distinct(&x.labels),
    })
}

impl SampleMatrix {
    fn rows_projected(&self, mean: &[f64], basis: &Matrix) -> Matrix {
        let n = self.rows.rows();
        let mut out = Matrix::zeros(n, basis.cols());
        let mut centered = vec![0.0; mean.len()];
        for i in 0..n {
            for ((c, x), m) in centered.iter_mut().zip(self.rows.row(i)).zip(mean) {
                *c = x - m;
            }
            out.row_mut(i).copy_from_slice(&basis.tr_mul_vec(&centered));
        }
        out
    }
}

impl FisherModel {
    pub fn dims(&self) -> usize {
        self.projection.cols()
    }

    /// Projects a vector already scaled to `[0, 1]`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, FisherError> {
        if x.len() != self.mean.len() {
            return Err(FisherError::InvalidArgument(format!("vector has {} values, model expects {}", x.len(), self.mean.len())));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.projection.tr_mul_vec(&centered))
    }

    pub fn project_face(&self, face: &GrayImage) -> Result<Vec<f64>, FisherError> {
        self.check_face(face)?;
        self.project(&vectorize(face).collect::<Vec<_>>())
    }

    fn check_face(&self, face: &GrayImage) -> Result<(), FisherError> {
        if (face.width(), face.height()) != (self.face_w, self.face_h) {
            return Err(FisherError::Dimension {
                expected_w: self.face_w,
                expected_h: self.face_h,
                got_w: face.width(),
                got_h: face.height(),
            });
        }
        Ok(())
    }

    /// 1-nearest-neighbour over the projected training set for a vector
    /// already scaled to `[0, 1]`. Ties go to the lowest training index.
    pub fn predict_vector(&self, x: &[f64]) -> Result<Prediction, FisherError> {
        let y = self.project(x)?;
        // Per class: (squared distance, first index achieving it).
        let mut best: Vec<Option<(f64, usize)>> = vec![None; self.class_list.len()];
        for (i, label) in self.train_labels.iter().enumerate() {
            let row = self.projected_train.row(i);
            let d2: f64 = row.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            let ci = self.class_list.binary_search(label).expect("train label in class list");
            match best[ci] {
                Some((bd, _)) if bd <= d2 => {}
                _ => best[ci] = Some((d2, i)),
            }
        }
        let mut ranked: Vec<(f64, usize, EmotionLabel)> = best
            .iter()
            .zip(&self.class_list)
            .filter_map(|(b, &l)| b.map(|(d, i)| (d, i, l)))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (d, _, label) = *ranked
            .first()
            .ok_or_else(|| FisherError::InvalidArgument("model has no training samples".into()))?;
        Ok(Prediction {
            label,
            distance: d.sqrt(),
            runner_up: ranked.get(1).map(|&(d, _, l)| (l, d.sqrt())),
        })
    }
}

pub fn predict(model: &FisherModel, face: &GrayImage) -> Result<Prediction, FisherError> {
    model.check_face(face)?;
    model.predict_vector(&vectorize(face).collect::<Vec<_>>())
}
