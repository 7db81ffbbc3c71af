//! Independent reference implementations shared by the test suites.
#![allow(dead_code)]

use fisherlens::fisherface::Matrix;
use fisherlens::imgproc::GrayImage;
use fisherlens::Rect;
use nalgebra::DMatrix;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

/// Rectangle sum and squared sum by a plain double loop.
pub fn naive_rect_sums(img: &GrayImage, r: Rect) -> (u64, u64) {
    let (mut s, mut q) = (0u64, 0u64);
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            let v = img.get(x, y) as u64;
            s += v;
            q += v * v;
        }
    }
    (s, q)
}

pub fn eig2(a: f64, b: f64, d: f64) -> [f64; 2] {
    let m = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [m + r, m - r]
}

/// Roots of the characteristic cubic of a symmetric integer 3x3 matrix.
/// Repeated roots are found exactly from the integer coefficients; the
/// trigonometric closed form handles the distinct-root case.
pub fn eig3(m: [[i64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // x^3 + b x^2 + c x + d
    let (b, c, d) = (-tr, minors, -det);
    let disc = 18 * b * c * d - 4 * b * b * b * d + b * b * c * c - 4 * c * c * c - 27 * d * d;
    let mut out = if disc == 0 {
        if b * b == 3 * c {
            let r = -b as f64 / 3.0;
            [r, r, r]
        } else {
            let r = (9 * d - b * c) as f64 / (2 * (b * b - 3 * c)) as f64;
            [r, r, -b as f64 - 2.0 * r]
        }
    } else {
        let a = m.map(|r| r.map(|v| v as f64));
        let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let q = tr as f64 / 3.0;
        let p2 = (0..3).map(|i| (a[i][i] - q) * (a[i][i] - q)).sum::<f64>() + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let bm = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
        let detb = bm(0, 0) * (bm(1, 1) * bm(2, 2) - bm(1, 2) * bm(2, 1))
            - bm(0, 1) * (bm(1, 0) * bm(2, 2) - bm(1, 2) * bm(2, 0))
            + bm(0, 2) * (bm(1, 0) * bm(2, 1) - bm(1, 1) * bm(2, 0));
        let phi = (detb / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        let l1 = q + 2.0 * p * phi.cos();
        let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [l1, 3.0 * q - l1 - l3, l3]
    };
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// Top eigenpairs of the d x d covariance, computed directly.
pub fn covariance_oracle(x: &Matrix, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = x.rows();
    let xn = to_na(x);
    let mean = xn.row_mean();
    let mut xc = xn.clone();
    for mut r in xc.row_iter_mut() {
        r -= &mean;
    }
    let cov = xc.transpose() * &xc / n as f64;
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order[..k].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

/// Direct recursive reading of the wildcard rules.
pub fn glob_oracle(p: &[char], s: &[char]) -> bool {
    match p.split_first() {
        None => s.is_empty(),
        Some(('*', rest)) => (0..=s.len()).any(|i| glob_oracle(rest, &s[i..])),
        Some(('?', rest)) => !s.is_empty() && glob_oracle(rest, &s[1..]),
        Some((c, rest)) => s.first() == Some(c) && glob_oracle(rest, &s[1..]),
    }
}

/// Every string over `alphabet` of length at most `max_len`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}"))).collect();
        out.extend(layer.iter().cloned());
    }
    out
}
