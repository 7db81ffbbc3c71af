use serde::{Deserialize, Serialize};

use crate::emotion::EmotionLabel;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<EmotionLabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<EmotionLabel>) -> Self {
        let c = classes.len();
        ConfusionMatrix { classes, counts: vec![vec![0; c]; c] }
    }

    fn index(&self, l: EmotionLabel) -> usize {
        self.classes
            .iter()
            .position(|&c| c == l)
            .unwrap_or_else(|| panic!("label {l} not in confusion matrix classes"))
    }

    pub fn record(&mut self, truth: EmotionLabel, predicted: EmotionLabel) {
        let (i, j) = (self.index(truth), self.index(predicted));
        self.counts[i][j] += 1;
    }

    pub fn get(&self, truth: EmotionLabel, predicted: EmotionLabel) -> u64 {
        self.counts[self.index(truth)][self.index(predicted)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// `trace / total`; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let t = self.total();
        if t == 0 {
            0.0
        } else {
            self.correct() as f64 / t as f64
        }
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn column_total(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn recall(&self, i: usize) -> Option<f64> {
        let t = self.row_total(i);
        (t > 0).then(|| self.counts[i][i] as f64 / t as f64)
    }

    pub fn precision(&self, j: usize) -> Option<f64> {
        let t = self.column_total(j);
        (t > 0).then(|| self.counts[j][j] as f64 / t as f64)
    }

    /// Elementwise sum. Both matrices must share the class order.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.classes, other.classes, "confusion matrices over different classes");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// The `k` largest non-zero off-diagonal cells, largest first, ties in
/// row-then-column order.
pub fn top_confusions(cm: &ConfusionMatrix, k: usize) -> Vec<(EmotionLabel, EmotionLabel, u64)> {
    let mut cells = Vec::new();
    for (i, row) in cm.counts.iter().enumerate() {
        for (j, &n) in row.iter().enumerate() {
            if i != j && n > 0 {
                cells.push((i, j, n));
            }
        }
    }
    cells.sort_by(|a, b| b.2.cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    cells.into_iter().take(k).map(|(i, j, n)| (cm.classes[i], cm.classes[j], n)).collect()
}
