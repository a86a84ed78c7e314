//! Two-component normal-mixture likelihood for jump-diffusion returns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optim::{nelder_mead, Minimum, NelderMeadConfig};
use super::LogReturnSeries;
use crate::error::{Error, Result};
use crate::model::{JumpDiffusionParams, JumpSizeDistribution};
use crate::stats::{mean, median, sample_std, sorted};

pub const MIN_MLE_OBS: usize = 30;
pub const MIN_DIFFUSION_SCALE: f64 = 1e-8;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    /// Real-world drift; a nuisance parameter for pricing.
    pub mu_hat: f64,
    pub sigma_hat: f64,
    /// Jump log-size mean (α).
    pub mu_v_hat: f64,
    /// Jump log-size standard deviation (β).
    pub sigma_v_hat: f64,
    pub lambda_hat: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub n_obs: usize,
}

impl MleEstimate {
    /// Risk-neutral model at rate `r` with log-normal jumps.
    pub fn risk_neutral_params(&self, r: f64) -> Result<JumpDiffusionParams> {
        JumpDiffusionParams::risk_neutral(r, self.sigma_hat, self.lambda_hat, self.jump_law())
    }

    pub fn jump_law(&self) -> JumpSizeDistribution {
        JumpSizeDistribution::LogNormal {
            alpha: self.mu_v_hat,
            beta: self.sigma_v_hat,
        }
    }
}

fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * var.ln() - 0.5 * (x - mean).powi(2) / var
}

/// Mixture log-likelihood with per-step jump probability `p`.
///
/// `f₁ = N(m₁, s₁²)` and `f₂ = N(m₁ + μ_V, s₁² + s_V²)`.
pub fn mixture_log_likelihood(r: &[f64], p: f64, m1: f64, s1: f64, mu_v: f64, s_v: f64) -> f64 {
    let v1 = s1 * s1;
    let v2 = v1 + s_v * s_v;
    let (w1, w2) = ((1.0 - p).ln(), p.ln());
    r.iter()
        .map(|&x| {
            let a = w1 + ln_normal_pdf(x, m1, v1);
            if p == 0.0 {
                return a;
            }
            let b = w2 + ln_normal_pdf(x, m1 + mu_v, v2);
            let hi = a.max(b);
            hi + ((a - hi).exp() + (b - hi).exp()).ln()
        })
        .sum()
}

/// Log-likelihood of the model parameters on `returns`, in the form
/// `fit_mle` maximizes.
pub fn log_likelihood_at(
    returns: &LogReturnSeries,
    mu: f64,
    sigma: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
) -> f64 {
    let dt = returns.dt();
    let m1 = (mu - 0.5 * sigma * sigma) * dt;
    mixture_log_likelihood(returns.returns(), lambda * dt, m1, sigma * dt.sqrt(), alpha, beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleConfig {
    pub optimizer: NelderMeadConfig,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            optimizer: NelderMeadConfig {
                ftol: 1e-9,
                xtol: 1e-7,
                ..Default::default()
            },
        }
    }
}

pub fn fit_mle(returns: &LogReturnSeries, lambda_fixed: f64) -> Result<MleEstimate> {
    fit_mle_with(returns, lambda_fixed, &MleConfig::default())
}

/// Maximizes the mixture likelihood over `(μ, σ, μ_V, σ_V)` with `λ` held
/// fixed. The optimizer works on standardized returns with log-scales.
pub fn fit_mle_with(
    returns: &LogReturnSeries,
    lambda_fixed: f64,
    config: &MleConfig,
) -> Result<MleEstimate> {
    let r = returns.returns();
    let n = r.len();
    if n < MIN_MLE_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_MLE_OBS,
            got: n,
        });
    }
    let dt = returns.dt();
    let p = lambda_fixed * dt;
    if !(lambda_fixed >= 0.0 && p < 1.0 && lambda_fixed.is_finite()) {
        return Err(Error::param(
            "lambda_fixed",
            format!("need λ ≥ 0 and λ·dt < 1, got λ·dt = {p}"),
        ));
    }
    let sd = sample_std(r);
    if !(sd >= MIN_DIFFUSION_SCALE) {
        return Err(Error::DegenerateVariance(sd));
    }

    let center = median(r);
    let mad = 1.4826 * median(&r.iter().map(|x| (x - center).abs()).collect::<Vec<_>>());
    let scale = if mad > 0.0 { mad } else { sd };
    let z: Vec<f64> = r.iter().map(|x| (x - center) / scale).collect();

    let starts = starting_points(&z, p > 0.0);
    let objective = |theta: &[f64]| -> f64 {
        let (m1, s1) = (theta[0], theta[1].exp());
        if p == 0.0 {
            return -mixture_log_likelihood(&z, 0.0, m1, s1, 0.0, 0.0);
        }
        -mixture_log_likelihood(&z, p, m1, s1, theta[2], theta[3].exp())
    };
    let runs: Vec<Minimum> = starts
        .par_iter()
        .map(|x0| nelder_mead(objective, x0, &config.optimizer))
        .collect();
    // lowest objective, ties to the earliest start
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.f.total_cmp(&b.f).then(i.cmp(j)))
        .map(|(_, m)| m)
        .expect("at least one start");

    let ln_jacobian = n as f64 * scale.ln();
    let log_likelihood = -best.f - ln_jacobian;
    let s1 = best.x[1].exp() * scale;
    let m1 = center + best.x[0] * scale;
    let (mu_v, s_v) = if p > 0.0 {
        (best.x[2] * scale, best.x[3].exp() * scale)
    } else {
        (0.0, 0.0)
    };

    if !best.converged {
        return Err(Error::NotConverged {
            best_log_likelihood: log_likelihood,
            best_point: vec![m1, s1, mu_v, s_v],
        });
    }
    if s1 < MIN_DIFFUSION_SCALE {
        return Err(Error::DegenerateVariance(s1));
    }
    let sigma_hat = s1 / dt.sqrt();
    Ok(MleEstimate {
        mu_hat: m1 / dt + 0.5 * sigma_hat * sigma_hat,
        sigma_hat,
        mu_v_hat: mu_v,
        sigma_v_hat: s_v,
        lambda_hat: lambda_fixed,
        log_likelihood,
        converged: true,
        n_obs: n,
    })
}

/// Five deterministic starts in standardized units `(m₁, ln s₁, μ_V, ln s_V)`.
fn starting_points(z: &[f64], with_jumps: bool) -> Vec<Vec<f64>> {
    let sd = sample_std(z);
    if !with_jumps {
        return vec![
            vec![0.0, 0.0],
            vec![mean(z), sd.ln()],
            vec![0.0, (0.5 * sd).ln()],
            vec![0.5, 1.0],
            vec![-0.5, -1.0],
        ];
    }
    let tail: Vec<f64> = z.iter().copied().filter(|x| x.abs() > 4.0).collect();
    let (tail_mean, tail_sd) = if tail.len() >= 2 {
        (mean(&tail), sample_std(&tail).max(0.5))
    } else {
        (0.0, sd.max(1.0))
    };
    let s = sorted(z);
    let extreme = s[s.len() - 1].abs().max(s[0].abs()).max(1.0);
    vec![
        vec![0.0, 0.0, tail_mean, tail_sd.ln()],
        vec![0.0, 0.0, 0.0, (3.0 * sd.max(1.0)).ln()],
        vec![mean(z), sd.ln(), 0.0, sd.ln()],
        vec![0.0, (0.8f64).ln(), 0.5 * extreme, 1.0f64.ln()],
        vec![0.0, (0.8f64).ln(), -0.5 * extreme, 1.0f64.ln()],
    ]
}
