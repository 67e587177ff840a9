//! Ordinary least squares with inference statistics.
//!
//! Estimates come from a Householder QR factorization of the design; the
//! normal matrix is never formed. Standard errors use the unbiased residual
//! variance, p-values the Student-t distribution with `n - p` degrees of
//! freedom.

pub mod float_serde;
mod qr;
mod student_t;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use student_t::{inc_beta, ln_beta, ln_gamma, significance_stars, t_cdf, t_pvalue};

/// Designs whose normal matrix has a reciprocal condition number below this
/// (after scaling every column to unit length) are rejected.
pub const MIN_RECIPROCAL_CONDITION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
    intercept: bool,
}

#[derive(Debug, Clone)]
pub struct DesignBuilder {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
    intercept: bool,
}

impl DesignBuilder {
    /// Adds a constant column of ones. Must be the first column added.
    pub fn intercept(mut self, name: impl Into<String>) -> Self {
        debug_assert!(self.columns.is_empty(), "intercept must come first");
        let n = self.response.len();
        self.names.insert(0, name.into());
        self.columns.insert(0, vec![1.0; n]);
        self.intercept = true;
        self
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.names.push(name.into());
        self.columns.push(values);
        self
    }

    pub fn build(self) -> Result<DesignMatrix> {
        let n = self.response.len();
        let p = self.columns.len();
        if p == 0 {
            return Err(Error::InvalidDesign("no predictor columns".into()));
        }
        if n <= p {
            return Err(Error::InvalidDesign(format!(
                "{n} observations for {p} columns; need more observations than columns"
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &self.names {
            if !seen.insert(name) {
                return Err(Error::InvalidDesign(format!("duplicate column name {name:?}")));
            }
        }
        for (name, col) in self.names.iter().zip(&self.columns) {
            if col.len() != n {
                return Err(Error::InvalidDesign(format!(
                    "column {name} has {} rows, response has {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDesign(format!("column {name} row {i} is not finite")));
            }
        }
        if let Some(i) = self.response.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDesign(format!("response row {i} is not finite")));
        }
        Ok(DesignMatrix {
            names: self.names,
            columns: self.columns,
            response: self.response,
            intercept: self.intercept,
        })
    }
}

impl DesignMatrix {
    pub fn builder(response: Vec<f64>) -> DesignBuilder {
        DesignBuilder {
            names: Vec::new(),
            columns: Vec::new(),
            response,
            intercept: false,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn n_obs(&self) -> usize {
        self.response.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Same design with rows reordered by `perm`.
    pub fn permuted_rows(&self, perm: &[usize]) -> DesignMatrix {
        DesignMatrix {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| perm.iter().map(|&i| c[i]).collect())
                .collect(),
            response: perm.iter().map(|&i| self.response[i]).collect(),
            intercept: self.intercept,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    #[serde(with = "float_serde::vec")]
    pub standard_errors: Vec<f64>,
    #[serde(with = "float_serde::vec")]
    pub t_values: Vec<f64>,
    #[serde(with = "float_serde::vec")]
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    #[serde(with = "float_serde")]
    pub f_statistic: f64,
    pub df_model: usize,
    pub df_resid: usize,
    pub n_obs: usize,
    /// Residual standard error; absorbs the unidentified noise scale and noise term together.
    pub residual_std: f64,
    pub intercept: bool,
    #[serde(default, skip_serializing)]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing)]
    pub fitted: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient<'a> {
    pub name: &'a str,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

impl FitResult {
    pub fn coef(&self, name: &str) -> Option<Coefficient<'_>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.coef_at(i))
    }

    pub fn coef_at(&self, i: usize) -> Coefficient<'_> {
        Coefficient {
            name: &self.names[i],
            estimate: self.coefficients[i],
            std_error: self.standard_errors[i],
            t_value: self.t_values[i],
            p_value: self.p_values[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Coefficient<'_>> {
        (0..self.names.len()).map(|i| self.coef_at(i))
    }

    pub fn ssr(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }
}

/// Least-squares fit of `design`.
pub fn ols_fit(design: &DesignMatrix) -> Result<FitResult> {
    let n = design.n_obs();
    let p = design.n_cols();
    let cols = design.columns();
    let y = design.response();

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let zero_cols: Vec<String> = norms
        .iter()
        .zip(design.names())
        .filter(|(n, _)| **n == 0.0)
        .map(|(_, name)| name.clone())
        .collect();
    if !zero_cols.is_empty() {
        return Err(Error::RankDeficient { columns: zero_cols });
    }

    let qr::Qr { r, qty } = qr::householder(cols, y);
    check_conditioning(design, &r, &norms)?;

    let all: Vec<usize> = (0..p).collect();
    let beta = qr::back_substitute(&r, &qty[..p], &all);

    let fitted: Vec<f64> = (0..n)
        .map(|i| cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum())
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let sst: f64 = if design.has_intercept() {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean) * (v - mean)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };

    let df_resid = n - p;
    let df_model = p - usize::from(design.has_intercept());
    let sigma2 = ssr / df_resid as f64;

    let r_inv = qr::triangular_inverse(&r);
    let standard_errors: Vec<f64> = (0..p)
        .map(|j| (sigma2 * (j..p).map(|k| r_inv[j][k] * r_inv[j][k]).sum::<f64>()).sqrt())
        .collect();
    let t_values: Vec<f64> = beta.iter().zip(&standard_errors).map(|(b, se)| b / se).collect();
    let p_values: Vec<f64> = t_values.iter().map(|t| t_pvalue(*t, df_resid as f64)).collect();

    let r_squared = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { f64::NAN };
    let adj_r_squared = 1.0
        - (1.0 - r_squared) * (n - usize::from(design.has_intercept())) as f64 / df_resid as f64;
    let f_statistic = if df_model > 0 {
        ((sst - ssr) / df_model as f64) / sigma2
    } else {
        f64::NAN
    };

    Ok(FitResult {
        names: design.names().to_vec(),
        coefficients: beta,
        standard_errors,
        t_values,
        p_values,
        r_squared,
        adj_r_squared,
        f_statistic,
        df_model,
        df_resid,
        n_obs: n,
        residual_std: sigma2.sqrt(),
        intercept: design.has_intercept(),
        residuals,
        fitted,
    })
}

/// Tolerance on a unit-scaled diagonal of R below which a column counts as
/// a linear combination of the columns before it.
const DEPENDENT_DIAGONAL: f64 = 1e-6;

fn check_conditioning(design: &DesignMatrix, r: &[Vec<f64>], norms: &[f64]) -> Result<()> {
    let p = r.len();
    // QR of X·D⁻¹ is Q·(R·D⁻¹): scale the columns of R.
    let scaled: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| r[i][j] / norms[j]).collect())
        .collect();
    let diag: Vec<f64> = (0..p).map(|j| scaled[j][j].abs()).collect();

    let mut dependent: Vec<usize> = (0..p).filter(|&j| diag[j] < DEPENDENT_DIAGONAL).collect();
    if dependent.is_empty() {
        let inv = qr::triangular_inverse(&scaled);
        let rcond = 1.0 / (qr::norm1(&scaled) * qr::norm1(&inv));
        // cond(XᵀX) = cond(R)²
        if rcond * rcond >= MIN_RECIPROCAL_CONDITION && rcond.is_finite() {
            return Ok(());
        }
        let worst = (0..p)
            .min_by(|&a, &b| diag[a].total_cmp(&diag[b]))
            .expect("at least one column");
        dependent.push(worst);
    }

    let mut offending = BTreeSet::new();
    for &j in &dependent {
        offending.insert(j);
        let earlier: Vec<usize> = (0..j).filter(|i| !dependent.contains(i)).collect();
        if earlier.is_empty() {
            continue;
        }
        let rhs: Vec<f64> = earlier.iter().map(|&i| scaled[i][j]).collect();
        let c = qr::back_substitute(&scaled, &rhs, &earlier);
        let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (&i, ci) in earlier.iter().zip(&c) {
            if max > 0.0 && ci.abs() > 1e-8 * max {
                offending.insert(i);
            }
        }
    }
    Err(Error::RankDeficient {
        columns: offending.into_iter().map(|i| design.names()[i].clone()).collect(),
    })
}
