//! Discrete-grid simulation of the jump-diffusion
//! `ln X_i = ln X_{i−1} + a_i + ξ_i v_i`, with `a_i` Gaussian, `ξ_i` a
//! Bernoulli(λΔt) jump indicator and `v_i` a draw from the jump law.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{JumpDiffusionParams, JumpSizeDistribution, PriceSeries, TimeGrid};
use crate::rng::RngSpec;

/// Above this per-step jump probability the Bernoulli approximation of the
/// Poisson count is refused outright.
pub const MAX_JUMP_PROBABILITY: f64 = 1.0;

/// Log prices at grid times `t_1..t_{m̃+m}` (the initial price is kept apart).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub x0: f64,
    pub log_prices: Vec<f64>,
    /// Number of jumps that arrived during each grid interval.
    pub jumps: Vec<u32>,
    pub grid: TimeGrid,
}

impl SimulatedPath {
    pub fn prices(&self) -> Vec<f64> {
        self.log_prices.iter().map(|l| l.exp()).collect()
    }

    pub fn terminal_price(&self) -> f64 {
        self.log_prices.last().map_or(self.x0, |l| l.exp())
    }

    /// Log prices of the averaging window, steps `m̃+1..=m̃+m`.
    pub fn window_log_prices(&self) -> &[f64] {
        &self.log_prices[self.grid.warmup_steps()..]
    }

    pub fn jump_count(&self) -> u32 {
        self.jumps.iter().sum()
    }
}

/// Draws a log jump size.
pub fn sample_jump<R: Rng + ?Sized>(dist: &JumpSizeDistribution, rng: &mut R) -> f64 {
    match *dist {
        JumpSizeDistribution::LogNormal { alpha, beta } => {
            let z: f64 = StandardNormal.sample(rng);
            alpha + beta * z
        }
        JumpSizeDistribution::LogAde { eta1, eta2, p1, .. } => {
            let up = rng.random::<f64>() < p1;
            let e: f64 = Exp1.sample(rng);
            if up {
                e / eta1
            } else {
                -e / eta2
            }
        }
        JumpSizeDistribution::LogLaplacian { rho, eta } => {
            let up = rng.random::<f64>() < 0.5;
            let e: f64 = Exp1.sample(rng);
            if up {
                rho + eta * e
            } else {
                rho - eta * e
            }
        }
    }
}

/// Per-step increment generator shared by path simulation and pricing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stepper {
    drift: f64,
    vol: f64,
    jump_prob: f64,
    jumps: JumpSizeDistribution,
    substeps: usize,
}

impl Stepper {
    pub(crate) fn new(params: &JumpDiffusionParams, grid: &TimeGrid) -> Result<Self> {
        let h = grid.sub_dt();
        let jump_prob = params.lambda() * h;
        if jump_prob >= MAX_JUMP_PROBABILITY {
            return Err(Error::JumpProbabilityTooLarge(jump_prob));
        }
        Ok(Self {
            drift: params.log_drift() * h,
            vol: params.sigma() * h.sqrt(),
            jump_prob,
            jumps: *params.jumps(),
            substeps: grid.substeps(),
        })
    }

    /// Log increment over one grid interval and the number of jumps in it.
    #[inline]
    pub(crate) fn step<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u32) {
        let mut inc = 0.0;
        let mut n = 0;
        for _ in 0..self.substeps {
            let z: f64 = StandardNormal.sample(rng);
            inc += self.drift + self.vol * z;
            if self.jump_prob > 0.0 && rng.random::<f64>() < self.jump_prob {
                inc += sample_jump(&self.jumps, rng);
                n += 1;
            }
        }
        (inc, n)
    }
}

fn walk(x0: f64, params: &JumpDiffusionParams, grid: &TimeGrid, rng: RngSpec) -> Result<SimulatedPath> {
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::param("x0", format!("must be > 0, got {x0}")));
    }
    let stepper = Stepper::new(params, grid)?;
    let mut gen = rng.generator();
    let n = grid.total_steps();
    let mut log_prices = Vec::with_capacity(n);
    let mut jumps = Vec::with_capacity(n);
    let mut level = x0.ln();
    for _ in 0..n {
        let (inc, k) = stepper.step(&mut gen);
        level += inc;
        log_prices.push(level);
        jumps.push(k);
    }
    Ok(SimulatedPath {
        x0,
        log_prices,
        jumps,
        grid: *grid,
    })
}

/// Simulates one risk-neutral path on `grid`.
pub fn simulate_path(
    x0: f64,
    params: &JumpDiffusionParams,
    grid: &TimeGrid,
    rng: RngSpec,
) -> Result<SimulatedPath> {
    params.rate()?;
    walk(x0, params, grid, rng)
}

/// Simulates `n_paths` risk-neutral paths; path `j` (1-based) uses stream `j`.
pub fn simulate_paths(
    x0: f64,
    params: &JumpDiffusionParams,
    grid: &TimeGrid,
    n_paths: usize,
    base_rng: RngSpec,
) -> Result<Vec<SimulatedPath>> {
    if n_paths == 0 {
        return Err(Error::param("n_paths", "must be >= 1"));
    }
    params.rate()?;
    (1..=n_paths as u64)
        .into_par_iter()
        .map(|j| walk(x0, params, grid, base_rng.with_stream(j)))
        .collect()
}

/// A synthetic price history of `n` observations spaced `dt` apart, under
/// either measure. Also returns the indices of returns that contain a jump.
pub fn simulate_history(
    x0: f64,
    params: &JumpDiffusionParams,
    dt: f64,
    n: usize,
    rng: RngSpec,
) -> Result<(PriceSeries, Vec<usize>)> {
    if n < 2 {
        return Err(Error::param("n", "need at least 2 observations"));
    }
    let grid = TimeGrid::uniform(dt, 0, n - 1)?;
    let path = walk(x0, params, &grid, rng)?;
    let mut prices = Vec::with_capacity(n);
    prices.push(x0);
    prices.extend(path.prices());
    let jump_returns = path
        .jumps
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, _)| i)
        .collect();
    Ok((PriceSeries::from_prices(prices, dt)?, jump_returns))
}

/// Writes paths as `replication,step,time,price` rows, including step 0.
pub fn write_paths_csv<W: Write>(paths: &[SimulatedPath], mut out: W) -> io::Result<()> {
    writeln!(out, "replication,step,time,price")?;
    for (j, path) in paths.iter().enumerate() {
        writeln!(out, "{},0,0,{}", j + 1, path.x0)?;
        for (i, l) in path.log_prices.iter().enumerate() {
            writeln!(out, "{},{},{},{}", j + 1, i + 1, path.grid.time(i + 1), l.exp())?;
        }
    }
    Ok(())
}
