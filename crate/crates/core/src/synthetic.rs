//! Observations drawn from the log-linear fitness models with planted
//! coefficients, for recovery experiments.
//!
//! Generated values are meant to be fitted with a zero shift: every φ, τ and
//! k is strictly positive and the planted relation holds on their raw logs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::metrics::{PaperFitnessVars, ScholarFitnessVars};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedPaperModel {
    pub alpha_prime: f64,
    pub gamma_a: f64,
    pub gamma_v: f64,
    pub gamma_r: f64,
    pub beta: f64,
    pub noise_sd: f64,
}

impl Default for PlantedPaperModel {
    fn default() -> Self {
        PlantedPaperModel {
            alpha_prime: -0.8,
            gamma_a: 0.33,
            gamma_v: 0.08,
            gamma_r: 0.04,
            beta: 0.57,
            noise_sd: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedScholarModel {
    pub alpha_prime: f64,
    pub gamma_a: f64,
    pub gamma_v: f64,
    pub gamma_r: f64,
    pub beta: f64,
    pub kappa: f64,
    pub noise_sd: f64,
}

impl Default for PlantedScholarModel {
    fn default() -> Self {
        PlantedScholarModel {
            alpha_prime: -0.735,
            gamma_a: 0.217,
            gamma_v: 0.0453,
            gamma_r: 0.0159,
            beta: 0.395,
            kappa: 0.786,
            noise_sd: 1.0,
        }
    }
}

/// Census year assigned to synthetic papers; only used to derive a year from τ.
const CENSUS_YEAR: i32 = 2004;

fn log_normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("valid normal").sample(rng).exp()
}

pub fn synthetic_paper_vars(model: &PlantedPaperModel, n: usize, seed: u64) -> Vec<PaperFitnessVars> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let tau = f64::from(rng.random_range(1..=31));
            let phi_a = log_normal(&mut rng, 1.5, 1.5);
            let phi_v = log_normal(&mut rng, 1.0, 0.6);
            let phi_r = log_normal(&mut rng, 2.0, 1.5);
            let noise: f64 = rng.sample(StandardNormal);
            let ln_k = model.alpha_prime
                + model.gamma_a * phi_a.ln()
                + model.gamma_v * phi_v.ln()
                + model.gamma_r * phi_r.ln()
                + model.beta * tau.ln()
                + model.noise_sd * noise;
            PaperFitnessVars {
                paper_id: format!("syn{i:06}"),
                year: CENSUS_YEAR - tau as i32 + 1,
                tau,
                phi_a,
                phi_v,
                phi_r,
                k: ln_k.exp(),
                authors: 1,
            }
        })
        .collect()
}

pub fn synthetic_scholar_vars(model: &PlantedScholarModel, n: usize, seed: u64) -> Vec<ScholarFitnessVars> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let rho = rng.random_range(1..=12usize);
            let tau_bar = log_normal(&mut rng, 2.0, 0.6).max(1.0);
            let phi_a_bar = log_normal(&mut rng, 1.5, 1.2);
            let phi_v_bar = log_normal(&mut rng, 1.0, 0.6);
            let phi_r_bar = log_normal(&mut rng, 2.0, 1.2);
            let noise: f64 = rng.sample(StandardNormal);
            let ln_k = model.alpha_prime
                + model.gamma_a * phi_a_bar.ln()
                + model.gamma_v * phi_v_bar.ln()
                + model.gamma_r * phi_r_bar.ln()
                + model.beta * tau_bar.ln()
                + model.kappa * (rho as f64).ln()
                + model.noise_sd * noise;
            ScholarFitnessVars {
                scholar_id: format!("s{i:06}"),
                k_s: ln_k.exp(),
                rho,
                tau_bar,
                phi_a_bar,
                phi_v_bar,
                phi_r_bar,
                mean_year: f64::from(CENSUS_YEAR) - tau_bar + 1.0,
            }
        })
        .collect()
}
