//! Householder QR for tall column-major matrices.

/// Upper-triangular factor and the transformed response of `X = QR`.
pub(crate) struct Qr {
    /// `r[i][j]` for `i <= j`; entries below the diagonal are zero.
    pub r: Vec<Vec<f64>>,
    /// `Qᵀ y`, full length `n`.
    pub qty: Vec<f64>,
}

pub(crate) fn householder(columns: &[Vec<f64>], y: &[f64]) -> Qr {
    let p = columns.len();
    let n = y.len();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();

    for k in 0..p {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let v_norm2: f64 = v.iter().map(|x| x * x).sum();
        if v_norm2 == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let s: f64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi * ci).sum();
            let f = 2.0 * s / v_norm2;
            for (ci, vi) in col.iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        };
        for col in a.iter_mut().skip(k) {
            reflect(&mut col[k..n]);
        }
        reflect(&mut qty[k..n]);
    }

    let r = (0..p)
        .map(|i| (0..p).map(|j| if i <= j { a[j][i] } else { 0.0 }).collect())
        .collect();
    Qr { r, qty }
}

/// Solves `R x = b` for upper-triangular `R` restricted to the index set `idx`.
pub(crate) fn back_substitute(r: &[Vec<f64>], b: &[f64], idx: &[usize]) -> Vec<f64> {
    let m = idx.len();
    let mut x = vec![0.0; m];
    for ii in (0..m).rev() {
        let i = idx[ii];
        let mut s = b[ii];
        for jj in ii + 1..m {
            s -= r[i][idx[jj]] * x[jj];
        }
        x[ii] = s / r[i][i];
    }
    x
}

/// Inverse of the upper-triangular `R`.
pub(crate) fn triangular_inverse(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = r.len();
    let all: Vec<usize> = (0..p).collect();
    let mut inv = vec![vec![0.0; p]; p];
    for j in 0..p {
        let e: Vec<f64> = (0..p).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        let col = back_substitute(r, &e, &all);
        for i in 0..p {
            inv[i][j] = col[i];
        }
    }
    inv
}

pub(crate) fn norm1(m: &[Vec<f64>]) -> f64 {
    let p = m.len();
    (0..p)
        .map(|j| (0..p).map(|i| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_the_matrix() {
        let cols = vec![vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0, 5.0], vec![2.0, -1.0, 0.5, 4.0]];
        let y = vec![1.0, 2.0, 3.0, 4.0];
        let qr = householder(&cols, &y);
        // RᵀR = XᵀX
        for i in 0..3 {
            for j in 0..3 {
                let rtr: f64 = (0..3).map(|k| qr.r[k][i] * qr.r[k][j]).sum();
                let xtx: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                assert!((rtr - xtx).abs() < 1e-12, "{i} {j}");
            }
        }
        // ‖Qᵀy‖ = ‖y‖
        let a: f64 = qr.qty.iter().map(|v| v * v).sum();
        let b: f64 = y.iter().map(|v| v * v).sum();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn triangular_inverse_is_inverse() {
        let r = vec![vec![2.0, 1.0, -1.0], vec![0.0, 3.0, 0.5], vec![0.0, 0.0, 4.0]];
        let inv = triangular_inverse(&r);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| r[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
