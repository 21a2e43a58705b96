//! Nash bargaining between a welfare-maximizing designer and
//! profit-maximizing validators over the fee-mechanism family.
//!
//! The chosen mechanism maximizes
//!
//! ```text
//! E[social benefit]^(1-beta) * E[validator profit]^beta
//! ```
//!
//! over the candidate families and their scalar parameters, where `beta`
//! is validator bargaining power. Surpluses are measured against a
//! disagreement point and clipped at zero before exponentiation; `beta = 0`
//! and `beta = 1` reduce to the single clipped factor.
//!
//! Validator profit conventions: under a quantity instrument the block
//! space clears by auction at the marginal willingness to pay, so profit
//! is `q * B1(q) - C(q)`; under a price instrument the base-fee revenue is
//! burned and validators keep only tips, so profit is `tip * q - C(q)`.

use serde::{Deserialize, Serialize};

use crate::demand::IsoelasticDemand;
use crate::error::{Error, Result};
use crate::marginal::CostCurve;
use crate::rng::{substream, Purpose};
use crate::shocks::ShockModel;
use crate::weitzman::{
    grid_refine_max, welfare_price_floor, welfare_quantity_cap, MechanismFamily,
    QuadraticEnvironment, WelfareOutcome,
};

/// Number of grid points scanned per family before golden-section
/// refinement.
pub const FAMILY_GRID_POINTS: usize = 512;

/// Nash product of clipped surpluses.
///
/// Returns `(max(SB - b0, 0))^(1-beta) * (max(VP - p0, 0))^beta`, with the
/// degenerate weights `beta = 0` / `beta = 1` evaluating only their own
/// clipped factor.
pub fn nash_objective(outcome: &WelfareOutcome, beta: f64, disagreement: (f64, f64)) -> f64 {
    nash_objective_parts(
        outcome.social_benefit,
        outcome.validator_profit,
        beta,
        disagreement,
    )
}

pub(crate) fn nash_objective_parts(
    social_benefit: f64,
    validator_profit: f64,
    beta: f64,
    disagreement: (f64, f64),
) -> f64 {
    let sb = (social_benefit - disagreement.0).max(0.0);
    let vp = (validator_profit - disagreement.1).max(0.0);
    if beta == 0.0 {
        sb
    } else if beta == 1.0 {
        vp
    } else if sb == 0.0 || vp == 0.0 {
        0.0
    } else {
        sb.powf(1.0 - beta) * vp.powf(beta)
    }
}

/// Expected surpluses of a mechanism family at a parameter value.
///
/// Implementations provide `(E[social benefit], E[validator profit])`, the
/// full welfare decomposition, and the parameter bracket to search.
pub trait SurplusEval: Sync {
    fn expectations(&self, family: MechanismFamily, param: f64) -> (f64, f64);
    fn outcome(&self, family: MechanismFamily, param: f64) -> WelfareOutcome;
    fn bracket(&self, family: MechanismFamily) -> (f64, f64);
}

/// Exact quadratic-environment surpluses.
pub struct ClosedFormQuadEval<'a> {
    env: &'a QuadraticEnvironment,
    tip_per_gas: f64,
}

impl<'a> ClosedFormQuadEval<'a> {
    pub fn new(env: &'a QuadraticEnvironment, tip_per_gas: f64) -> Self {
        Self { env, tip_per_gas }
    }
}

impl SurplusEval for ClosedFormQuadEval<'_> {
    fn expectations(&self, family: MechanismFamily, param: f64) -> (f64, f64) {
        let o = self.outcome(family, param);
        (o.social_benefit, o.validator_profit)
    }

    fn outcome(&self, family: MechanismFamily, param: f64) -> WelfareOutcome {
        match family {
            MechanismFamily::QuantityCap => {
                welfare_quantity_cap(self.env, param, self.tip_per_gas)
            }
            MechanismFamily::PriceFloor | MechanismFamily::FixedPrice => {
                welfare_price_floor(self.env, param, self.tip_per_gas)
            }
        }
    }

    fn bracket(&self, family: MechanismFamily) -> (f64, f64) {
        crate::weitzman::family_bracket(self.env, family)
    }
}

/// Monte Carlo quadratic-environment surpluses over per-family draw sets.
pub struct McQuadEval<'a> {
    env: &'a QuadraticEnvironment,
    tip_per_gas: f64,
    draws: Vec<(MechanismFamily, Vec<(f64, f64)>)>,
}

impl<'a> McQuadEval<'a> {
    /// Sample `n` shock pairs per candidate family. Family `f` always
    /// draws from substream `(BargainMc, stream_index * 4 + position(f))`,
    /// so each family keeps its own stream regardless of the candidate
    /// list.
    pub fn new(
        env: &'a QuadraticEnvironment,
        tip_per_gas: f64,
        candidates: &[MechanismFamily],
        seed: u64,
        stream_index: u64,
        n: usize,
    ) -> Self {
        let draws = candidates
            .iter()
            .map(|&f| {
                let mut rng = substream(seed, Purpose::BargainMc, stream_index * 4 + family_position(f));
                let set: Vec<(f64, f64)> = (0..n).map(|_| env.shocks().sample(&mut rng)).collect();
                (f, set)
            })
            .collect();
        Self {
            env,
            tip_per_gas,
            draws,
        }
    }

    fn family_draws(&self, family: MechanismFamily) -> &[(f64, f64)] {
        self.draws
            .iter()
            .find(|(f, _)| *f == family)
            .map(|(_, d)| d.as_slice())
            .expect("family was not configured as a candidate")
    }
}

fn family_position(f: MechanismFamily) -> u64 {
    match f {
        MechanismFamily::QuantityCap => 0,
        MechanismFamily::PriceFloor => 1,
        MechanismFamily::FixedPrice => 2,
    }
}

impl SurplusEval for McQuadEval<'_> {
    fn expectations(&self, family: MechanismFamily, param: f64) -> (f64, f64) {
        let o = self.outcome(family, param);
        (o.social_benefit, o.validator_profit)
    }

    fn outcome(&self, family: MechanismFamily, param: f64) -> WelfareOutcome {
        use crate::weitzman::kernel;
        let draws = self.family_draws(family);
        let mut welfare = crate::rng::Moments::default();
        let mut profit = 0.0;
        let mut dwl = 0.0;
        let mut burned = 0.0;
        let mut tips = 0.0;
        for &shock in draws {
            let d = match family {
                MechanismFamily::QuantityCap => {
                    kernel::eval_cap(self.env, param, shock, self.tip_per_gas)
                }
                MechanismFamily::PriceFloor | MechanismFamily::FixedPrice => {
                    kernel::eval_floor(self.env, param, shock, self.tip_per_gas)
                }
            };
            welfare.push(d.welfare);
            profit += d.profit;
            dwl += d.dwl;
            burned += d.burned;
            tips += d.tips;
        }
        let inv_n = 1.0 / draws.len() as f64;
        WelfareOutcome {
            social_benefit: welfare.mean(),
            validator_profit: profit * inv_n,
            deadweight_loss: dwl * inv_n,
            burned: burned * inv_n,
            tips: tips * inv_n,
            std_error: welfare.std_error(),
        }
    }

    fn bracket(&self, family: MechanismFamily) -> (f64, f64) {
        crate::weitzman::family_bracket(self.env, family)
    }
}

/// Isoelastic market for bargaining outside the quadratic approximation.
///
/// Demand shocks shift the demand scale multiplicatively
/// (`psi = psi0 * exp(beta)`); cost shocks shift the marginal-cost level.
/// Social benefit is measured relative to operating at `q_ref`, so the
/// zero disagreement point means "no gain over the reference throughput".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoelasticMarket {
    pub demand: IsoelasticDemand<f64>,
    pub cost: CostCurve<f64>,
    pub shocks: ShockModel,
    pub q_ref: f64,
}

impl IsoelasticMarket {
    pub fn new(
        demand: IsoelasticDemand<f64>,
        cost: CostCurve<f64>,
        shocks: ShockModel,
        q_ref: f64,
    ) -> Result<Self> {
        if !(q_ref > 0.0) || !q_ref.is_finite() {
            return Err(Error::Construction(format!(
                "q_ref must be positive and finite, got {q_ref}"
            )));
        }
        Ok(Self {
            demand,
            cost,
            shocks,
            q_ref,
        })
    }

    /// Ex-post efficient quantity for one draw, by bisection on the gap
    /// between marginal benefit and marginal cost.
    fn efficient_quantity(&self, shifted: &IsoelasticDemand<f64>, eta: f64) -> Result<f64> {
        let gap = |q: f64| shifted.inverse_demand(q).unwrap() - self.cost.marginal_at(q, eta);
        let mut lo = self.q_ref * 1e-9;
        if gap(lo) <= 0.0 {
            return Ok(lo);
        }
        let mut hi = self.q_ref;
        let mut expansions = 0;
        while gap(hi) > 0.0 {
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::Domain(
                    "marginal benefit never crosses marginal cost".into(),
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Monte Carlo isoelastic surpluses.
pub struct IsoelasticMcEval<'a> {
    market: &'a IsoelasticMarket,
    tip_per_gas: f64,
    draws: Vec<(MechanismFamily, Vec<(f64, f64)>)>,
}

impl<'a> IsoelasticMcEval<'a> {
    pub fn new(
        market: &'a IsoelasticMarket,
        tip_per_gas: f64,
        candidates: &[MechanismFamily],
        seed: u64,
        stream_index: u64,
        n: usize,
    ) -> Self {
        let draws = candidates
            .iter()
            .map(|&f| {
                let mut rng = substream(seed, Purpose::BargainMc, stream_index * 4 + family_position(f));
                let set: Vec<(f64, f64)> = (0..n)
                    .map(|_| market.shocks.sample(&mut rng))
                    .collect();
                (f, set)
            })
            .collect();
        Self {
            market,
            tip_per_gas,
            draws,
        }
    }

    fn family_draws(&self, family: MechanismFamily) -> &[(f64, f64)] {
        self.draws
            .iter()
            .find(|(f, _)| *f == family)
            .map(|(_, d)| d.as_slice())
            .expect("family was not configured as a candidate")
    }

    fn draw_quantities(&self, family: MechanismFamily, param: f64, shock: (f64, f64)) -> (IsoelasticDemand<f64>, f64) {
        let (beta, _) = shock;
        let shifted = self
            .market
            .demand
            .with_shifter(self.market.demand.psi() * beta.exp())
            .expect("positive shifter");
        let q = match family {
            MechanismFamily::QuantityCap => param,
            MechanismFamily::PriceFloor | MechanismFamily::FixedPrice => {
                shifted.quantity_at(param).expect("positive price")
            }
        };
        (shifted, q)
    }
}

impl SurplusEval for IsoelasticMcEval<'_> {
    fn expectations(&self, family: MechanismFamily, param: f64) -> (f64, f64) {
        let m = self.market;
        let mut sb = 0.0;
        let mut vp = 0.0;
        let draws = self.family_draws(family);
        for &shock in draws {
            let (_, eta) = shock;
            let (shifted, q) = self.draw_quantities(family, param, shock);
            let benefit = shifted.consumer_benefit(q, m.q_ref).unwrap();
            let cost_rel = m.cost.marginal().with_shock(eta).integral_between(m.q_ref, q);
            sb += benefit - cost_rel;
            vp += match family {
                MechanismFamily::QuantityCap => {
                    q * shifted.inverse_demand(q).unwrap() - m.cost.total_cost(q, eta)
                }
                _ => self.tip_per_gas * q - m.cost.total_cost(q, eta),
            };
        }
        let inv_n = 1.0 / draws.len() as f64;
        (sb * inv_n, vp * inv_n)
    }

    fn outcome(&self, family: MechanismFamily, param: f64) -> WelfareOutcome {
        let m = self.market;
        let draws = self.family_draws(family);
        let mut welfare = crate::rng::Moments::default();
        let mut profit = 0.0;
        let mut dwl = 0.0;
        let mut burned = 0.0;
        let mut tips = 0.0;
        for &shock in draws {
            let (_, eta) = shock;
            let (shifted, q) = self.draw_quantities(family, param, shock);
            let benefit = shifted.consumer_benefit(q, m.q_ref).unwrap();
            let cost_rel = m.cost.marginal().with_shock(eta).integral_between(m.q_ref, q);
            welfare.push(benefit - cost_rel);
            match family {
                MechanismFamily::QuantityCap => {
                    profit += q * shifted.inverse_demand(q).unwrap() - m.cost.total_cost(q, eta);
                }
                _ => {
                    profit += self.tip_per_gas * q - m.cost.total_cost(q, eta);
                    burned += param * q;
                    tips += self.tip_per_gas * q;
                }
            }
            if let Ok(q_star) = m.efficient_quantity(&shifted, eta) {
                let gain = shifted.consumer_benefit(q_star, m.q_ref).unwrap()
                    - m.cost.marginal().with_shock(eta).integral_between(m.q_ref, q_star);
                dwl += (gain - (benefit - cost_rel)).max(0.0);
            }
        }
        let inv_n = 1.0 / draws.len() as f64;
        WelfareOutcome {
            social_benefit: welfare.mean(),
            validator_profit: profit * inv_n,
            deadweight_loss: dwl * inv_n,
            burned: burned * inv_n,
            tips: tips * inv_n,
            std_error: welfare.std_error(),
        }
    }

    fn bracket(&self, family: MechanismFamily) -> (f64, f64) {
        let m = self.market;
        match family {
            MechanismFamily::QuantityCap => (m.q_ref * 1e-6, 4.0 * m.q_ref),
            MechanismFamily::PriceFloor | MechanismFamily::FixedPrice => {
                let p_ref = m.demand.inverse_demand(m.q_ref).unwrap();
                (p_ref * 1e-3, p_ref * 10.0)
            }
        }
    }
}

/// Environment over which the bargaining runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BargainEnv {
    Quadratic { env: QuadraticEnvironment },
    Isoelastic { market: IsoelasticMarket },
}

/// A bargaining instance: environment, validator bargaining power,
/// candidate families, tip level, and disagreement point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BargainingProblem {
    pub env: BargainEnv,
    pub beta: f64,
    pub candidates: Vec<MechanismFamily>,
    pub tip_per_gas: f64,
    pub disagreement: (f64, f64),
}

impl BargainingProblem {
    pub fn new(
        env: BargainEnv,
        beta: f64,
        candidates: Vec<MechanismFamily>,
        tip_per_gas: f64,
        disagreement: (f64, f64),
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Construction(format!(
                "bargaining power beta must lie in [0, 1], got {beta}"
            )));
        }
        if candidates.is_empty() {
            return Err(Error::Construction("candidate set must be non-empty".into()));
        }
        if !(tip_per_gas >= 0.0) {
            return Err(Error::Construction(format!(
                "tip_per_gas must be nonnegative, got {tip_per_gas}"
            )));
        }
        Ok(Self {
            env,
            beta,
            candidates,
            tip_per_gas,
            disagreement,
        })
    }
}

/// How to evaluate expected surpluses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub seed: u64,
    /// `None` uses the exact closed form (quadratic environments only);
    /// `Some(n)` estimates surpluses from `n` Monte Carlo draws per family.
    pub draws: Option<usize>,
    /// Offsets the per-family substreams so independent replications of
    /// the same problem stay independent.
    pub stream_index: u64,
}

impl SolveOptions {
    pub fn closed_form() -> Self {
        Self {
            seed: 0,
            draws: None,
            stream_index: 0,
        }
    }

    pub fn monte_carlo(seed: u64, draws: usize) -> Self {
        Self {
            seed,
            draws: Some(draws),
            stream_index: 0,
        }
    }

    pub fn with_stream(mut self, stream_index: u64) -> Self {
        self.stream_index = stream_index;
        self
    }
}

/// Per-family maximum of the Nash objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMax {
    pub family: MechanismFamily,
    pub parameter: f64,
    pub objective: f64,
    pub social_benefit: f64,
    pub validator_profit: f64,
}

/// Solution of a bargaining problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BargainingSolution {
    pub family: MechanismFamily,
    pub parameter: f64,
    pub objective_value: f64,
    pub welfare: WelfareOutcome,
    /// Second-best family and its objective shortfall, when more than one
    /// candidate was considered.
    pub runner_up: Option<(MechanismFamily, f64)>,
    pub per_family: Vec<FamilyMax>,
}

/// Maximize the Nash objective over families and parameters using a
/// caller-supplied surplus evaluator.
///
/// Each family is scanned on a 512-point grid over its bracket and
/// refined by golden-section search around the best grid point. Exact
/// objective ties resolve in the order quantity cap, price floor, fixed
/// price.
pub fn solve_bargaining_with(
    eval: &dyn SurplusEval,
    beta: f64,
    candidates: &[MechanismFamily],
    disagreement: (f64, f64),
) -> Result<BargainingSolution> {
    if candidates.is_empty() {
        return Err(Error::Construction("candidate set must be non-empty".into()));
    }
    let mut families: Vec<MechanismFamily> = candidates.to_vec();
    families.sort();
    families.dedup();

    let mut per_family = Vec::with_capacity(families.len());
    for &family in &families {
        let (lo, hi) = eval.bracket(family);
        let objective = |param: f64| {
            let (sb, vp) = eval.expectations(family, param);
            nash_objective_parts(sb, vp, beta, disagreement)
        };
        let (param, value) = grid_refine_max(objective, lo, hi, FAMILY_GRID_POINTS);
        let (sb, vp) = eval.expectations(family, param);
        per_family.push(FamilyMax {
            family,
            parameter: param,
            objective: value,
            social_benefit: sb,
            validator_profit: vp,
        });
    }

    let mut best: Option<FamilyMax> = None;
    for fm in &per_family {
        if best.map_or(true, |b| fm.objective > b.objective) {
            best = Some(*fm);
        }
    }
    let best = best.expect("non-empty candidate set");
    if !(best.objective > 0.0) {
        return Err(Error::Infeasible(
            per_family.iter().map(|f| (f.family, f.objective)).collect(),
        ));
    }
    let runner_up = per_family
        .iter()
        .filter(|f| f.family != best.family)
        .max_by(|a, b| a.objective.total_cmp(&b.objective))
        .map(|f| (f.family, best.objective - f.objective));

    Ok(BargainingSolution {
        family: best.family,
        parameter: best.parameter,
        objective_value: best.objective,
        welfare: eval.outcome(best.family, best.parameter),
        runner_up,
        per_family,
    })
}

/// Solve a bargaining problem with the evaluator implied by its
/// environment and options.
pub fn solve_bargaining(
    problem: &BargainingProblem,
    opts: &SolveOptions,
) -> Result<BargainingSolution> {
    if !(0.0..=1.0).contains(&problem.beta) {
        return Err(Error::Construction(format!(
            "bargaining power beta must lie in [0, 1], got {}",
            problem.beta
        )));
    }
    match (&problem.env, opts.draws) {
        (BargainEnv::Quadratic { env }, None) => {
            let eval = ClosedFormQuadEval::new(env, problem.tip_per_gas);
            solve_bargaining_with(&eval, problem.beta, &problem.candidates, problem.disagreement)
        }
        (BargainEnv::Quadratic { env }, Some(n)) => {
            let eval = McQuadEval::new(
                env,
                problem.tip_per_gas,
                &problem.candidates,
                opts.seed,
                opts.stream_index,
                n,
            );
            solve_bargaining_with(&eval, problem.beta, &problem.candidates, problem.disagreement)
        }
        (BargainEnv::Isoelastic { market }, Some(n)) => {
            let eval = IsoelasticMcEval::new(
                market,
                problem.tip_per_gas,
                &problem.candidates,
                opts.seed,
                opts.stream_index,
                n,
            );
            solve_bargaining_with(&eval, problem.beta, &problem.candidates, problem.disagreement)
        }
        (BargainEnv::Isoelastic { .. }, None) => Err(Error::Construction(
            "isoelastic bargaining has no closed form; set a Monte Carlo draw count".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginal::LinearMarginalCurve;

    fn quad_env(b_slope: f64, c_slope: f64, vd: f64) -> QuadraticEnvironment {
        QuadraticEnvironment::from_coefficients(
            10.0,
            b_slope,
            10.0,
            c_slope,
            10.0,
            ShockModel::gaussian(vd, 0.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn nash_objective_trivial_cases() {
        let o = WelfareOutcome {
            social_benefit: 4.0,
            validator_profit: 1.0,
            deadweight_loss: 0.0,
            burned: 0.0,
            tips: 0.0,
            std_error: 0.0,
        };
        assert_eq!(nash_objective(&o, 0.0, (0.0, 0.0)), 4.0);
        assert_eq!(nash_objective(&o, 1.0, (0.0, 0.0)), 1.0);
        assert_eq!(nash_objective(&o, 0.5, (0.0, 0.0)), 2.0);
    }

    #[test]
    fn negative_surplus_clips_to_zero() {
        let o = WelfareOutcome {
            social_benefit: 4.0,
            validator_profit: -1.0,
            deadweight_loss: 0.0,
            burned: 0.0,
            tips: 0.0,
            std_error: 0.0,
        };
        assert_eq!(nash_objective(&o, 0.5, (0.0, 0.0)), 0.0);
        // beta = 0 looks only at the social factor
        assert_eq!(nash_objective(&o, 0.0, (0.0, 0.0)), 4.0);
        // disagreement shifts the clip point
        assert_eq!(nash_objective(&o, 0.0, (5.0, 0.0)), 0.0);
    }

    #[test]
    fn welfare_maximization_limit_matches_optimal_instrument() {
        // delta > 0 here, so beta = 0 must pick the price floor at the
        // certainty-equivalent price
        let env = quad_env(-2.0, 1.0, 1.0);
        let problem = BargainingProblem::new(
            BargainEnv::Quadratic { env },
            0.0,
            vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor],
            0.0,
            (0.0, 0.0),
        )
        .unwrap();
        let sol = solve_bargaining(&problem, &SolveOptions::closed_form()).unwrap();
        assert_eq!(sol.family, MechanismFamily::PriceFloor);
        let (p_star, _) =
            crate::weitzman::optimal_instrument(&env, MechanismFamily::PriceFloor, 0.0);
        assert!(
            (sol.parameter - p_star).abs() / p_star.abs() < 1e-6,
            "parameter {} vs {p_star}",
            sol.parameter
        );
    }

    #[test]
    fn pure_profit_limit_with_zero_tips_selects_quantity_cap() {
        let env = quad_env(-2.0, 1.0, 1.0);
        let problem = BargainingProblem::new(
            BargainEnv::Quadratic { env },
            1.0,
            vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor],
            0.0,
            (0.0, 0.0),
        )
        .unwrap();
        let sol = solve_bargaining(&problem, &SolveOptions::closed_form()).unwrap();
        assert_eq!(sol.family, MechanismFamily::QuantityCap);
        assert!(sol.welfare.validator_profit > 0.0);
    }

    #[test]
    fn reported_objective_is_attained_on_reevaluation() {
        let env = quad_env(-1.0, 2.0, 1.0);
        let problem = BargainingProblem::new(
            BargainEnv::Quadratic { env },
            0.3,
            vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor],
            0.5,
            (0.0, 0.0),
        )
        .unwrap();
        let sol = solve_bargaining(&problem, &SolveOptions::closed_form()).unwrap();
        let eval = ClosedFormQuadEval::new(&env, 0.5);
        let (sb, vp) = eval.expectations(sol.family, sol.parameter);
        let re = nash_objective_parts(sb, vp, 0.3, (0.0, 0.0));
        assert!(
            (re - sol.objective_value).abs() <= 1e-9 * sol.objective_value.abs(),
            "reported {} vs re-evaluated {re}",
            sol.objective_value
        );
    }

    struct Scaled<'a> {
        inner: &'a dyn SurplusEval,
        factor: f64,
    }

    impl SurplusEval for Scaled<'_> {
        fn expectations(&self, family: MechanismFamily, param: f64) -> (f64, f64) {
            let (sb, vp) = self.inner.expectations(family, param);
            (self.factor * sb, self.factor * vp)
        }
        fn outcome(&self, family: MechanismFamily, param: f64) -> WelfareOutcome {
            self.inner.outcome(family, param)
        }
        fn bracket(&self, family: MechanismFamily) -> (f64, f64) {
            self.inner.bracket(family)
        }
    }

    #[test]
    fn scaling_both_surpluses_preserves_family_and_parameter() {
        let env = quad_env(-2.0, 1.0, 1.0);
        let eval = ClosedFormQuadEval::new(&env, 0.25);
        let candidates = [MechanismFamily::QuantityCap, MechanismFamily::PriceFloor];
        let base = solve_bargaining_with(&eval, 0.4, &candidates, (0.0, 0.0)).unwrap();
        let scaled_eval = Scaled {
            inner: &eval,
            factor: 37.5,
        };
        let scaled = solve_bargaining_with(&scaled_eval, 0.4, &candidates, (0.0, 0.0)).unwrap();
        assert_eq!(base.family, scaled.family);
        // same argmax up to the optimizer's refinement tolerance
        assert!(
            (base.parameter - scaled.parameter).abs() <= 1e-6 * base.parameter.abs(),
            "base {} vs scaled {}",
            base.parameter,
            scaled.parameter
        );
        assert!((scaled.objective_value - 37.5 * base.objective_value).abs() < 1e-6);
    }

    #[test]
    fn infeasible_when_no_candidate_has_positive_surplus() {
        // costs dwarf benefits everywhere and tips are zero, so both
        // surpluses clip to zero for every parameter
        let env = QuadraticEnvironment::from_coefficients(
            1.0,
            -1.0,
            100.0,
            1.0,
            1.0,
            ShockModel::gaussian(0.01, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let problem = BargainingProblem::new(
            BargainEnv::Quadratic { env },
            0.5,
            vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor],
            0.0,
            (0.0, 0.0),
        )
        .unwrap();
        match solve_bargaining(&problem, &SolveOptions::closed_form()) {
            Err(Error::Infeasible(maxima)) => {
                assert_eq!(maxima.len(), 2);
                assert!(maxima.iter().all(|(_, v)| *v <= 0.0));
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn problem_validation() {
        let env = quad_env(-1.0, 1.0, 1.0);
        assert!(BargainingProblem::new(
            BargainEnv::Quadratic { env },
            1.5,
            vec![MechanismFamily::QuantityCap],
            0.0,
            (0.0, 0.0)
        )
        .is_err());
        assert!(BargainingProblem::new(
            BargainEnv::Quadratic { env },
            0.5,
            vec![],
            0.0,
            (0.0, 0.0)
        )
        .is_err());
    }

    #[test]
    fn isoelastic_zero_tip_profit_limit_prefers_quantity_cap() {
        let market = IsoelasticMarket::new(
            IsoelasticDemand::new(1000.0, 2.0).unwrap(),
            CostCurve::new(LinearMarginalCurve::cost(1.0, 0.05, 10.0).unwrap()).unwrap(),
            ShockModel::gaussian(0.04, 0.0, 0.0).unwrap(),
            10.0,
        )
        .unwrap();
        let problem = BargainingProblem::new(
            BargainEnv::Isoelastic { market },
            1.0,
            vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor],
            0.0,
            (0.0, 0.0),
        )
        .unwrap();
        let sol = solve_bargaining(&problem, &SolveOptions::monte_carlo(5, 2000)).unwrap();
        assert_eq!(sol.family, MechanismFamily::QuantityCap);
    }

    #[test]
    fn isoelastic_requires_monte_carlo() {
        let market = IsoelasticMarket::new(
            IsoelasticDemand::new(1000.0, 2.0).unwrap(),
            CostCurve::new(LinearMarginalCurve::cost(1.0, 0.05, 10.0).unwrap()).unwrap(),
            ShockModel::gaussian(0.04, 0.0, 0.0).unwrap(),
            10.0,
        )
        .unwrap();
        let problem = BargainingProblem::new(
            BargainEnv::Isoelastic { market },
            0.5,
            vec![MechanismFamily::QuantityCap],
            0.0,
            (0.0, 0.0),
        )
        .unwrap();
        assert!(solve_bargaining(&problem, &SolveOptions::closed_form()).is_err());
    }
}
