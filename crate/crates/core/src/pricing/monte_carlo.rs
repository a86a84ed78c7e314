use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PricingMethod, PricingResult, Z_95};
use crate::error::{Error, Result};
use crate::model::{build_time_grid, JumpDiffusionParams, OptionSpec};
use crate::payoff::{payoff_from_mean, power_mean_of_logs};
use crate::rng::RngSpec;
use crate::simulation::Stepper;

/// Replications per work unit. Fixed so that the reduction order, and hence
/// every bit of the result, is independent of the thread count.
pub const CHUNK_SIZE: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    /// Number of replications `z`.
    pub paths: u64,
    pub seed: u64,
    /// Simulation sub-steps per grid interval.
    #[serde(default = "one")]
    pub substeps: usize,
}

fn one() -> usize {
    1
}

impl McConfig {
    pub fn new(paths: u64, seed: u64) -> Self {
        Self {
            paths,
            seed,
            substeps: 1,
        }
    }

    pub fn with_substeps(self, substeps: usize) -> Self {
        Self { substeps, ..self }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Welford { n, mean, m2 }
    }

    fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }
}

/// Monte Carlo price `e^{−rT}·mean(Φ)` over `cfg.paths` replications.
/// Replication `j` (1-based) draws from stream `j` of `cfg.seed`.
pub fn mc_price(x0: f64, params: &JumpDiffusionParams, spec: &OptionSpec, cfg: &McConfig) -> Result<PricingResult> {
    let r = params.rate()?;
    if cfg.paths < 2 {
        return Err(Error::param("z", "at least 2 replications are needed for a variance estimate"));
    }
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::param("x0", format!("must be > 0, got {x0}")));
    }
    let grid = build_time_grid(spec)?.with_substeps(cfg.substeps)?;
    let stepper = Stepper::new(params, &grid)?;
    let warmup = grid.warmup_steps();
    let total = grid.total_steps();
    let base = RngSpec::new(cfg.seed, 0);
    let ln_x0 = x0.ln();
    let geometric = spec.gamma.is_geometric();
    let window_len = (total - warmup) as f64;

    let n_chunks = cfg.paths.div_ceil(CHUNK_SIZE);
    let stats = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let first = c * CHUNK_SIZE + 1;
            let last = ((c + 1) * CHUNK_SIZE).min(cfg.paths);
            let mut acc = Welford::default();
            let mut window = Vec::with_capacity(spec.m);
            for j in first..=last {
                let mut gen = base.with_stream(j).generator();
                let mut level = ln_x0;
                for _ in 0..warmup {
                    level += stepper.step(&mut gen).0;
                }
                let mean = if geometric {
                    // running log sum; avoids buffering the window
                    let mut sum = 0.0;
                    for _ in warmup..total {
                        level += stepper.step(&mut gen).0;
                        sum += level;
                    }
                    (sum / window_len).exp()
                } else {
                    window.clear();
                    for _ in warmup..total {
                        level += stepper.step(&mut gen).0;
                        window.push(level);
                    }
                    power_mean_of_logs(&window, spec.gamma)
                };
                acc.push(payoff_from_mean(mean, spec));
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Welford::default(), Welford::merge);

    let discount = (-r * spec.expiry).exp();
    let pi0 = discount * stats.mean;
    let std_error = discount * (stats.sample_variance() / stats.n as f64).sqrt();
    Ok(PricingResult {
        method: PricingMethod::MonteCarlo,
        pi0,
        std_error,
        ci95_low: pi0 - Z_95 * std_error,
        ci95_high: pi0 + Z_95 * std_error,
        z: stats.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpSizeDistribution, MeanExponent};

    fn no_jumps() -> JumpSizeDistribution {
        JumpSizeDistribution::LogNormal { alpha: 0.0, beta: 0.0 }
    }

    fn spec(start: f64, expiry: f64, m: usize, strike: f64) -> OptionSpec {
        OptionSpec {
            theta: 1,
            strike,
            ctr_buyer: 1.0,
            ctr_market: 1.0,
            start,
            expiry,
            m,
            gamma: MeanExponent::GEOMETRIC,
        }
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.3).collect();
        let mut whole = Welford::default();
        xs.iter().for_each(|&x| whole.push(x));
        let merged = xs
            .chunks(77)
            .map(|c| {
                let mut w = Welford::default();
                c.iter().for_each(|&x| w.push(x));
                w
            })
            .fold(Welford::default(), Welford::merge);
        assert!((whole.mean - merged.mean).abs() < 1e-12);
        assert!((whole.sample_variance() - merged.sample_variance()).abs() < 1e-9);
    }

    #[test]
    fn deterministic_path_geometric_mean() {
        let (x0, r) = (100.0, 0.1);
        let params = JumpDiffusionParams::risk_neutral(r, 0.0, 0.0, no_jumps()).unwrap();
        // K → 0⁺ keeps the payoff equal to the geometric mean
        let s = spec(0.25, 1.0, 30, 1e-300);
        let res = mc_price(x0, &params, &s, &McConfig::new(100, 1)).unwrap();
        // discrete window: mean grid time = S + (T−S)(m+1)/(2m)
        let mean_t = 0.25 + 0.75 * 31.0 / 60.0;
        let want = x0 * (-r * 1.0 + r * mean_t).exp();
        assert!((res.pi0 - want).abs() < 1e-10 * want, "{} vs {want}", res.pi0);
        assert_eq!(res.std_error, 0.0);
        assert_eq!(res.ci95_low, res.pi0);

        // the continuous-window value is the m → ∞ limit
        let fine = mc_price(x0, &params, &spec(0.25, 1.0, 20_000, 1e-300), &McConfig::new(2, 1)).unwrap();
        let limit = x0 * (-r * 0.75 / 2.0).exp();
        assert!((fine.pi0 - limit).abs() < 1e-4 * limit);
    }

    #[test]
    fn deep_out_of_the_money_is_worthless() {
        let params = JumpDiffusionParams::risk_neutral(0.1, 0.0, 0.0, no_jumps()).unwrap();
        let s = spec(0.0, 1.0, 10, 2.0 * 100.0 * 0.1f64.exp());
        let res = mc_price(100.0, &params, &s, &McConfig::new(50, 1)).unwrap();
        assert_eq!(res.pi0, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rn = JumpDiffusionParams::risk_neutral(0.1, 0.2, 0.0, no_jumps()).unwrap();
        let rw = JumpDiffusionParams::real_world(0.1, 0.2, 0.0, no_jumps()).unwrap();
        let s = spec(0.0, 1.0, 10, 100.0);
        assert!(mc_price(100.0, &rn, &s, &McConfig::new(1, 1)).unwrap_err().to_string().contains("2 replications"));
        assert_eq!(mc_price(100.0, &rw, &s, &McConfig::new(10, 1)), Err(Error::RealWorldMeasure));
    }

    #[test]
    fn linear_in_theta() {
        let jumps = JumpSizeDistribution::LogNormal { alpha: -0.05, beta: 0.1 };
        let params = JumpDiffusionParams::risk_neutral(0.05, 0.3, 3.0, jumps).unwrap();
        let mut s = spec(0.1, 0.5, 20, 95.0);
        let cfg = McConfig::new(5000, 9);
        let one = mc_price(100.0, &params, &s, &cfg).unwrap();
        s.theta = 7;
        let seven = mc_price(100.0, &params, &s, &cfg).unwrap();
        assert!((seven.pi0 - 7.0 * one.pi0).abs() < 1e-12 * seven.pi0);
        assert!((seven.std_error - 7.0 * one.std_error).abs() < 1e-12 * seven.std_error);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let jumps = JumpSizeDistribution::LogLaplacian { rho: 0.0, eta: 0.1 };
        let params = JumpDiffusionParams::risk_neutral(0.05, 0.3, 3.0, jumps).unwrap();
        let s = spec(0.1, 0.5, 20, 95.0);
        let cfg = McConfig::new(3 * CHUNK_SIZE + 17, 4);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_price(100.0, &params, &s, &cfg).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.pi0.to_bits(), b.pi0.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn std_error_scales_with_inverse_root_z() {
        let params = JumpDiffusionParams::risk_neutral(0.1, 0.2, 0.0, no_jumps()).unwrap();
        let s = spec(0.0, 1.0, 12, 100.0);
        let small = mc_price(100.0, &params, &s, &McConfig::new(20_000, 2)).unwrap();
        let big = mc_price(100.0, &params, &s, &McConfig::new(80_000, 3)).unwrap();
        let ratio = small.std_error / big.std_error;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }
}
