//! Least-squares and t-distribution results checked against independent routes:
//! a normal-equations solve through nalgebra, and direct quadrature of the
//! t density.

mod common;

use citefit::inference::{ols_fit, t_cdf, t_pvalue};
use common::{normal_equations, random_design, rel, t_two_sided_by_quadrature};

#[test]
fn qr_matches_normal_equations() {
    for seed in 0..10 {
        let d = random_design(seed);
        let oracle = normal_equations(&d);
        let fit = ols_fit(&d).unwrap();
        for j in 0..d.n_cols() {
            assert!(rel(fit.coefficients[j], oracle.coefficients[j]) < 1e-8);
            assert!(rel(fit.standard_errors[j], oracle.standard_errors[j]) < 1e-8);
        }
        assert!(rel(fit.r_squared, oracle.r_squared) < 1e-8);
        assert!(rel(fit.f_statistic, oracle.f_statistic) < 1e-8);
    }
}

#[test]
fn p_value_matches_quadrature() {
    let oracle = t_two_sided_by_quadrature(2.0, 60.0);
    assert!((oracle - 0.0499).abs() < 0.001, "oracle {oracle}");
    let p = t_pvalue(2.0, 60.0);
    assert!((p - oracle).abs() < 1e-6, "{p} vs {oracle}");
    assert!((p - 0.0499).abs() < 0.001);

    for &(t, df) in &[(0.7, 3.0), (1.5, 10.0), (3.1, 25.0)] {
        let oracle = t_two_sided_by_quadrature(t, df);
        assert!((t_pvalue(t, df) - oracle).abs() < 1e-6, "t={t} df={df}");
    }
}

#[test]
fn very_small_p_values_keep_precision() {
    let p = t_pvalue(12.0, 600.0);
    assert!(p > 0.0 && p < 1e-28, "{p}");
}

#[test]
fn monotone_in_abs_t_and_gaussian_limit() {
    let mut last = 1.0 + 1e-12;
    for i in 0..200 {
        let t = i as f64 * 0.05;
        let p = t_pvalue(t, 7.0);
        assert!(p <= last, "not monotone at t={t}");
        assert_eq!(p, t_pvalue(-t, 7.0));
        last = p;
    }
    for &t in &[0.5, 1.0, 1.96, 2.0, 3.0] {
        let gauss = libm::erfc(t / std::f64::consts::SQRT_2);
        assert!((t_pvalue(t, 1e6) - gauss).abs() < 1e-6, "t={t}");
    }
    assert!((t_cdf(1.0, 1e6) - (1.0 - 0.5 * libm::erfc(1.0 / std::f64::consts::SQRT_2))).abs() < 1e-6);
}
