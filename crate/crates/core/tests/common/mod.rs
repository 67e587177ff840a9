//! Independent reference computations shared by integration tests.

#![allow(dead_code)]

use citefit::inference::DesignMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// ∫ (1 + t²/ν)^(-(ν+1)/2) dt by composite Simpson; the normalizing constant
/// cancels in the ratio so no gamma function is involved.
pub fn t_two_sided_by_quadrature(t: f64, df: f64) -> f64 {
    let f = |x: f64| (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let simpson = |a: f64, b: f64, g: &dyn Fn(f64) -> f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut s = g(a) + g(b);
        for i in 1..n {
            s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let inner = simpson(0.0, t.abs(), &f, 20_000);
    // [0, ∞) via x = u / (1 - u)
    let whole = simpson(
        0.0,
        1.0 - 1e-9,
        &|u: f64| f(u / (1.0 - u)) / ((1.0 - u) * (1.0 - u)),
        200_000,
    );
    1.0 - inner / whole
}

pub struct NormalEquations {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub r_squared: f64,
    pub f_statistic: f64,
}

/// Solves `XᵀX b = Xᵀy` by Cholesky and recomputes the summary statistics
/// from their textbook formulas.
pub fn normal_equations(d: &DesignMatrix) -> NormalEquations {
    let n = d.n_obs();
    let p = d.n_cols();
    let x = DMatrix::from_fn(n, p, |i, j| d.columns()[j][i]);
    let y = DVector::from_column_slice(d.response());
    let xtx = x.transpose() * &x;
    let beta = xtx.clone().cholesky().expect("positive definite").solve(&(x.transpose() * &y));
    let resid = &y - &x * &beta;
    let ssr = resid.dot(&resid);
    let sigma2 = ssr / (n - p) as f64;
    let inv = xtx.try_inverse().expect("invertible");
    let mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    NormalEquations {
        coefficients: beta.iter().copied().collect(),
        standard_errors: (0..p).map(|j| (sigma2 * inv[(j, j)]).sqrt()).collect(),
        r_squared: 1.0 - ssr / sst,
        f_statistic: ((sst - ssr) / (p - 1) as f64) / sigma2,
    }
}

/// 200 rows, intercept plus four Gaussian columns of differing scale.
pub fn random_design(seed: u64) -> DesignMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 200;
    let cols: Vec<Vec<f64>> = (0..4)
        .map(|j| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * (1.0 + j as f64)).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            -0.8 + 0.33 * cols[0][i] + 0.08 * cols[1][i] - 0.5 * cols[2][i] + 1.5 * cols[3][i]
                + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let mut b = DesignMatrix::builder(y).intercept("c");
    for (j, c) in cols.into_iter().enumerate() {
        b = b.column(format!("x{j}"), c);
    }
    b.build().unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
