use serde::{Deserialize, Serialize};

use super::{McConfig, PricingInputs, DEFAULT_K_MAX};
use crate::error::Result;
use crate::model::JumpSizeDistribution;

/// How prices are computed while bumping inputs. Monte Carlo reuses the same
/// seed for every bump (common random numbers).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pricer {
    ClosedForm { k_max: usize },
    MonteCarlo(McConfig),
}

impl Pricer {
    /// Closed form when the contract admits one, Monte Carlo otherwise.
    pub fn auto(inputs: &PricingInputs, mc: McConfig) -> Self {
        let lognormal = matches!(inputs.params.jumps(), JumpSizeDistribution::LogNormal { .. });
        if lognormal && inputs.spec.gamma.is_geometric() {
            Pricer::ClosedForm { k_max: DEFAULT_K_MAX }
        } else {
            Pricer::MonteCarlo(mc)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityParameter {
    X0,
    Strike,
    Rate,
    Expiry,
    Sigma,
    Theta,
    CtrMarket,
    CtrBuyer,
}

impl SensitivityParameter {
    pub const ALL: [SensitivityParameter; 8] = [
        SensitivityParameter::X0,
        SensitivityParameter::Strike,
        SensitivityParameter::Rate,
        SensitivityParameter::Expiry,
        SensitivityParameter::Sigma,
        SensitivityParameter::Theta,
        SensitivityParameter::CtrMarket,
        SensitivityParameter::CtrBuyer,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub parameter: SensitivityParameter,
    pub base_value: f64,
    pub down_value: f64,
    pub up_value: f64,
    pub price_down: f64,
    pub price_up: f64,
    /// Finite-difference slope `∂π₀/∂parameter`.
    pub derivative: f64,
    pub direction: Direction,
}

fn read(inputs: &PricingInputs, p: SensitivityParameter) -> f64 {
    let r = inputs.params.rate().unwrap_or(0.0);
    match p {
        SensitivityParameter::X0 => inputs.x0,
        SensitivityParameter::Strike => inputs.spec.strike,
        SensitivityParameter::Rate => r,
        SensitivityParameter::Expiry => inputs.spec.expiry,
        SensitivityParameter::Sigma => inputs.params.sigma(),
        SensitivityParameter::Theta => inputs.spec.theta as f64,
        SensitivityParameter::CtrMarket => inputs.spec.ctr_market,
        SensitivityParameter::CtrBuyer => inputs.spec.ctr_buyer,
    }
}

fn write(inputs: &PricingInputs, p: SensitivityParameter, v: f64) -> Result<PricingInputs> {
    let mut out = *inputs;
    match p {
        SensitivityParameter::X0 => out.x0 = v,
        SensitivityParameter::Strike => out.spec.strike = v,
        SensitivityParameter::Rate => out.params = inputs.params.with_rate(v)?,
        SensitivityParameter::Expiry => out.spec.expiry = v,
        SensitivityParameter::Sigma => out.params = inputs.params.with_sigma(v)?,
        SensitivityParameter::Theta => out.spec.theta = v.round() as u64,
        SensitivityParameter::CtrMarket => out.spec.ctr_market = v,
        SensitivityParameter::CtrBuyer => out.spec.ctr_buyer = v,
    }
    Ok(out)
}

/// `(down, up)` bump points, one-sided where the domain boundary is close.
fn bump_points(inputs: &PricingInputs, p: SensitivityParameter, v: f64) -> (f64, f64) {
    match p {
        SensitivityParameter::Theta => (v, v + 1.0),
        SensitivityParameter::Rate | SensitivityParameter::Sigma => {
            let h = (0.01 * v.abs()).max(1e-3);
            let down = if p == SensitivityParameter::Sigma && v - h < 0.0 { v } else { v - h };
            (down, v + h)
        }
        SensitivityParameter::CtrMarket | SensitivityParameter::CtrBuyer => {
            let h = 0.01 * v;
            if v + h > 1.0 {
                (v - h, v)
            } else {
                (v - h, v + h)
            }
        }
        SensitivityParameter::Expiry => {
            let h = 0.01 * v;
            if v - h < inputs.spec.start {
                (v, v + h)
            } else {
                (v - h, v + h)
            }
        }
        SensitivityParameter::X0 | SensitivityParameter::Strike => (0.99 * v, 1.01 * v),
    }
}

/// Bumps each input up and down and reports the direction of the price move.
pub fn price_sensitivities(inputs: &PricingInputs, pricer: &Pricer) -> Result<Vec<Sensitivity>> {
    let base = pricer.price(inputs)?.pi0;
    SensitivityParameter::ALL
        .iter()
        .map(|&p| {
            let v = read(inputs, p);
            let (down, up) = bump_points(inputs, p, v);
            let price_at = |x: f64| -> Result<f64> {
                if x == v {
                    Ok(base)
                } else {
                    pricer.price(&write(inputs, p, x)?).map(|r| r.pi0)
                }
            };
            let price_down = price_at(down)?;
            let price_up = price_at(up)?;
            let diff = price_up - price_down;
            let direction = if diff.abs() <= 1e-12 * base.abs().max(f64::MIN_POSITIVE) {
                Direction::Flat
            } else if diff > 0.0 {
                Direction::Increasing
            } else {
                Direction::Decreasing
            };
            Ok(Sensitivity {
                parameter: p,
                base_value: v,
                down_value: down,
                up_value: up,
                price_down,
                price_up,
                derivative: diff / (up - down),
                direction,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpDiffusionParams, MeanExponent, OptionSpec};

    fn inputs(gamma: MeanExponent, jumps: JumpSizeDistribution) -> PricingInputs {
        PricingInputs {
            x0: 100.0,
            params: JumpDiffusionParams::risk_neutral(0.05, 0.3, 2.0, jumps).unwrap(),
            spec: OptionSpec {
                theta: 1,
                strike: 100.0,
                ctr_buyer: 0.5,
                ctr_market: 0.5,
                start: 0.25,
                expiry: 1.0,
                m: 30,
                gamma,
            },
        }
    }

    fn check_contract(rows: &[Sensitivity]) {
        use Direction::*;
        use SensitivityParameter as P;
        for row in rows {
            let want = match row.parameter {
                P::X0 | P::Sigma | P::Theta | P::CtrMarket => Some(Increasing),
                P::Strike | P::CtrBuyer => Some(Decreasing),
                P::Rate | P::Expiry => None,
            };
            if let Some(w) = want {
                assert_eq!(row.direction, w, "{:?}", row.parameter);
            }
        }
    }

    #[test]
    fn closed_form_directions() {
        let inp = inputs(MeanExponent::GEOMETRIC, JumpSizeDistribution::LogNormal { alpha: -0.05, beta: 0.1 });
        let pricer = Pricer::auto(&inp, McConfig::new(1000, 1));
        assert!(matches!(pricer, Pricer::ClosedForm { .. }));
        let rows = price_sensitivities(&inp, &pricer).unwrap();
        check_contract(&rows);
        let theta = rows.iter().find(|r| r.parameter == SensitivityParameter::Theta).unwrap();
        assert!((theta.price_up - 2.0 * theta.price_down).abs() < 1e-12 * theta.price_up);
    }

    #[test]
    fn monte_carlo_directions_with_common_numbers() {
        let inp = inputs(MeanExponent::ARITHMETIC, JumpSizeDistribution::LogLaplacian { rho: 0.0, eta: 0.1 });
        let pricer = Pricer::auto(&inp, McConfig::new(20_000, 5));
        assert!(matches!(pricer, Pricer::MonteCarlo(_)));
        check_contract(&price_sensitivities(&inp, &pricer).unwrap());
    }
}
