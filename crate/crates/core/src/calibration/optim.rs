//! Derivative-free minimization (Nelder–Mead simplex).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub max_evals: usize,
    /// Spread of objective values across the simplex.
    pub ftol: f64,
    /// Largest vertex distance from the best vertex (max-norm).
    pub xtol: f64,
    /// Initial step along each coordinate.
    pub step: f64,
    /// Restarts from the best vertex after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            max_evals: 20_000,
            ftol: 1e-10,
            xtol: 1e-8,
            step: 0.5,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

fn simplex_converged(xs: &[Vec<f64>], fs: &[f64], cfg: &NelderMeadConfig) -> bool {
    let spread = fs[fs.len() - 1] - fs[0];
    let diameter = xs[1..]
        .iter()
        .flat_map(|v| v.iter().zip(&xs[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    spread <= cfg.ftol && diameter <= cfg.xtol
}

fn run(f: &impl Fn(&[f64]) -> f64, x0: &[f64], cfg: &NelderMeadConfig, budget: usize) -> Minimum {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut xs: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += cfg.step;
        xs.push(v);
    }
    let mut fs: Vec<f64> = xs.iter().map(|x| eval(x)).collect();
    let mut evals = n + 1;
    let mut converged = false;

    while evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        xs = order.iter().map(|&i| xs[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();
        if simplex_converged(&xs, &fs, cfg) {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| xs[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&xs[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr);
        evals += 1;
        if fr < fs[0] {
            let xe = along(2.0);
            let fe = eval(&xe);
            evals += 1;
            if fe < fr {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
            continue;
        }
        if fr < fs[n - 1] {
            xs[n] = xr;
            fs[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < fs[n] {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < fs[n].min(fr) {
            xs[n] = xc;
            fs[n] = fc;
            continue;
        }
        for i in 1..=n {
            xs[i] = xs[i]
                .iter()
                .zip(&xs[0])
                .map(|(v, b)| b + 0.5 * (v - b))
                .collect();
            fs[i] = eval(&xs[i]);
        }
        evals += n;
    }
    let best = (0..=n).min_by(|&a, &b| fs[a].total_cmp(&fs[b])).unwrap();
    Minimum {
        x: xs[best].clone(),
        f: fs[best],
        evals,
        converged,
    }
}

/// Minimizes `f` from `x0`. A converged run is restarted from its best
/// vertex to guard against simplex collapse.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], cfg: &NelderMeadConfig) -> Minimum {
    let mut best = run(&f, x0, cfg, cfg.max_evals);
    let mut evals = best.evals;
    for _ in 0..cfg.restarts {
        if !best.converged || evals >= cfg.max_evals {
            break;
        }
        let again = run(&f, &best.x, cfg, cfg.max_evals - evals);
        evals += again.evals;
        let stalled = best.f - again.f <= cfg.ftol;
        if again.f <= best.f {
            best = again;
        }
        if stalled {
            break;
        }
    }
    best.evals = evals;
    best
}
