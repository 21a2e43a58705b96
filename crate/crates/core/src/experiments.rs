//! Single-factor sweeps over the five drivers of the price-vs-quantity
//! choice, with directional verdicts.
//!
//! Each sweep rebuilds the shipped baseline with exactly one factor
//! changed per grid value, evaluates that factor's decision statistic
//! with common random numbers across rows, and tests whether the
//! statistic moves monotonically in the direction that favors the
//! expected mechanism:
//!
//! | factor                  | statistic                     | favored   |
//! |-------------------------|-------------------------------|-----------|
//! | demand variance         | price advantage `delta`       | price     |
//! | demand/cost covariance  | price advantage `delta`       | quantity  |
//! | token volatility        | USD price advantage `delta`   | quantity  |
//! | demand elasticity       | blocks to re-target a step    | price     |
//! | bargaining power        | frequency of the quantity pick| quantity  |
//!
//! Verdicts are monotonicity tests with 3-sigma significance gating:
//! pairwise comparisons must not significantly oppose the expected
//! direction, and the Kendall tau of the oriented statistic must be
//! nonnegative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bargaining::{
    solve_bargaining, BargainEnv, BargainingProblem, FamilyMax, SolveOptions,
};
use crate::demand::ETHEREUM_ELASTICITY;
use crate::eip1559::{next_base_fee, Eip1559Params};
use crate::error::{Error, Result};
use crate::rng::{substream, Moments, Purpose};
use crate::shocks::ShockModel;
use crate::token::TokenPriceModel;
use crate::weitzman::{
    comparative_advantage_mc, optimal_instrument, MechanismFamily, QuadraticEnvironment,
};
use rand_distr::{Distribution, StandardNormal};

/// The five swept factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    DemandVariance,
    DemandCostCovariance,
    TokenVolatility,
    Elasticity,
    BargainingPower,
}

/// Direction of the oriented monotonicity test along an ascending grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    NonDecreasing,
    NonIncreasing,
}

impl Factor {
    pub fn all() -> [Factor; 5] {
        [
            Factor::DemandVariance,
            Factor::DemandCostCovariance,
            Factor::TokenVolatility,
            Factor::Elasticity,
            Factor::BargainingPower,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Factor::DemandVariance => "demand_variance",
            Factor::DemandCostCovariance => "demand_cost_covariance",
            Factor::TokenVolatility => "token_volatility",
            Factor::Elasticity => "elasticity",
            Factor::BargainingPower => "bargaining_power",
        }
    }

    pub fn from_label(label: &str) -> Result<Factor> {
        Factor::all()
            .into_iter()
            .find(|f| f.label() == label)
            .ok_or_else(|| Error::Domain(format!("unknown factor '{label}'")))
    }

    /// Mechanism family favored by a high value of this factor.
    pub fn favored_family(&self) -> MechanismFamily {
        match self {
            Factor::DemandVariance | Factor::Elasticity => MechanismFamily::PriceFloor,
            _ => MechanismFamily::QuantityCap,
        }
    }

    /// Illustrative setting where the factor is high.
    pub fn example(&self) -> &'static str {
        match self {
            Factor::DemandVariance => "diverse use cases",
            Factor::DemandCostCovariance => "proof-of-work cost coupling",
            Factor::TokenVolatility => "fees denominated in a volatile token",
            Factor::Elasticity => "fast blocks and confirmations",
            Factor::BargainingPower => "concentrated validator set",
        }
    }

    fn direction(&self) -> Direction {
        match self {
            // higher demand variance must not erode the price advantage
            Factor::DemandVariance => Direction::NonDecreasing,
            // everything else favors quantity (or faster response) as the
            // factor grows, so the oriented statistic must not increase
            Factor::DemandCostCovariance
            | Factor::TokenVolatility
            | Factor::Elasticity
            | Factor::BargainingPower => Direction::NonIncreasing,
        }
    }

    /// Shipped default grid (strictly increasing, at least 3 points).
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            Factor::DemandVariance => vec![0.25, 0.5, 1.0, 2.0, 4.0],
            Factor::DemandCostCovariance => vec![0.0, 0.2, 0.4, 0.6, 0.8],
            Factor::TokenVolatility => vec![0.0, 0.02, 0.05, 0.1, 0.2],
            // kept inside the contraction regime d * epsilon < 1 where the
            // step response is monotone in the elasticity
            Factor::Elasticity => vec![1.0, 2.0, 4.0, 8.0],
            Factor::BargainingPower => vec![0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95],
        }
    }
}

/// Full model configuration a sweep perturbs one factor at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub quadratic: QuadraticEnvironment,
    pub eip1559: Eip1559Params<f64>,
    pub token: TokenPriceModel,
    pub elasticity: f64,
    pub tip_per_gas: f64,
    pub bargaining_beta: f64,
    /// Relative demand step used by the elasticity response test.
    pub step_factor: f64,
}

impl Baseline {
    /// The shipped baseline: symmetric unit curvature (the comparative
    /// advantage starts exactly at its knife edge), unit demand variance,
    /// mainnet fee parameters, and the fast-chain elasticity preset.
    pub fn shipped() -> Self {
        Self {
            quadratic: QuadraticEnvironment::from_coefficients(
                10.0,
                -1.0,
                10.0,
                1.0,
                10.0,
                ShockModel::gaussian(1.0, 1.0, 0.0).unwrap(),
            )
            .unwrap(),
            eip1559: Eip1559Params::ethereum(2.0).unwrap(),
            token: TokenPriceModel::new(2000.0, 0.0, 0.0).unwrap(),
            elasticity: ETHEREUM_ELASTICITY,
            tip_per_gas: 0.1,
            bargaining_beta: 0.5,
            step_factor: 1.2,
        }
    }

    /// Row baseline for one factor. The bargaining-power sweep runs on a
    /// variant where the designer's welfare ranking and the validators'
    /// profit ranking disagree (quantity control is welfare-preferred,
    /// large tips make the price mechanism more profitable), so bargaining
    /// power actually moves the equilibrium.
    fn for_factor(&self, factor: Factor) -> Baseline {
        let mut base = self.clone();
        if factor == Factor::BargainingPower {
            base.quadratic = QuadraticEnvironment::from_coefficients(
                10.0,
                -0.5,
                10.0,
                1.5,
                self.quadratic.q_ref(),
                *self.quadratic.shocks(),
            )
            .unwrap();
            base.tip_per_gas = 12.0;
        }
        base
    }
}

impl Default for Baseline {
    fn default() -> Self {
        Self::shipped()
    }
}

/// Resolved configuration of one sweep row; serializable so tests can
/// audit that rows differ from the baseline only in the swept factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowConfig {
    pub quadratic: QuadraticEnvironment,
    pub eip1559: Eip1559Params<f64>,
    pub token_initial_usd: f64,
    pub token_log_vol: f64,
    pub elasticity: f64,
    pub tip_per_gas: f64,
    pub bargaining_beta: f64,
    pub step_factor: f64,
}

/// Build the configuration of a row: the factor baseline with exactly the
/// swept field replaced by `value`.
pub fn row_configuration(baseline: &Baseline, factor: Factor, value: f64) -> Result<RowConfig> {
    let base = baseline.for_factor(factor);
    let shocks = *base.quadratic.shocks();
    let mut cfg = RowConfig {
        quadratic: base.quadratic,
        eip1559: base.eip1559,
        token_initial_usd: base.token.initial_usd(),
        token_log_vol: base.token.log_vol(),
        elasticity: base.elasticity,
        tip_per_gas: base.tip_per_gas,
        bargaining_beta: base.bargaining_beta,
        step_factor: base.step_factor,
    };
    match factor {
        Factor::DemandVariance => {
            cfg.quadratic = cfg.quadratic.with_shocks(ShockModel::gaussian(
                value,
                shocks.var_cost(),
                shocks.cov(),
            )?);
        }
        Factor::DemandCostCovariance => {
            cfg.quadratic = cfg.quadratic.with_shocks(ShockModel::gaussian(
                shocks.var_demand(),
                shocks.var_cost(),
                value,
            )?);
        }
        Factor::TokenVolatility => {
            if !(value >= 0.0) {
                return Err(Error::Construction(format!(
                    "token volatility must be nonnegative, got {value}"
                )));
            }
            cfg.token_log_vol = value;
        }
        Factor::Elasticity => {
            if !(value > 0.0) {
                return Err(Error::Construction(format!(
                    "elasticity must be positive, got {value}"
                )));
            }
            cfg.elasticity = value;
        }
        Factor::BargainingPower => {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Construction(format!(
                    "bargaining power must lie in [0, 1], got {value}"
                )));
            }
            cfg.bargaining_beta = value;
        }
    }
    Ok(cfg)
}

/// Specification of one factor sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub factor: Factor,
    pub grid: Vec<f64>,
    pub baseline: Baseline,
    pub replications: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(
        factor: Factor,
        grid: Vec<f64>,
        baseline: Baseline,
        replications: usize,
        seed: u64,
    ) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::Construction(format!(
                "sweep grid needs at least 3 values, got {}",
                grid.len()
            )));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Construction(
                "sweep grid values must be strictly increasing".into(),
            ));
        }
        if replications < 2 {
            return Err(Error::Construction(
                "sweep needs at least 2 replications".into(),
            ));
        }
        // every grid point must produce a valid configuration
        for &v in &grid {
            row_configuration(&baseline, factor, v)?;
        }
        Ok(Self {
            factor,
            grid,
            baseline,
            replications,
            seed,
        })
    }

    /// Sweep over the shipped default grid for `factor`.
    pub fn shipped(factor: Factor, replications: usize, seed: u64) -> Result<Self> {
        Self::new(
            factor,
            factor.default_grid(),
            Baseline::shipped(),
            replications,
            seed,
        )
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// The factor's decision statistic (see module docs).
    pub statistic: f64,
    pub std_error: f64,
    /// Price-advantage estimate, where the statistic is delta-based.
    pub delta: Option<f64>,
    pub delta_std_error: Option<f64>,
    /// Bargaining pick at this row's configuration, where meaningful.
    pub chosen: Option<MechanismFamily>,
    pub objectives: Option<Vec<FamilyMax>>,
    pub failed: bool,
    pub error: Option<String>,
}

/// Sweep verdict against the expected direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    MatchesTable1,
    Opposes,
    Inconclusive,
}

/// Monotonicity statistic backing a verdict.
///
/// The tau is significance-gated: a pair whose difference is not
/// 3-sigma-distinguishable from zero counts as a tie, so sampling noise
/// around a flat truth cannot manufacture a direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityStat {
    /// `(significant concordant - significant discordant) / pairs` of the
    /// direction-oriented statistic.
    pub kendall_tau: f64,
    pub significant_concordant: usize,
    pub significant_discordant: usize,
    pub pairs: usize,
}

/// Result of one factor sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub factor: Factor,
    pub rows: Vec<SweepRow>,
    pub verdict: Verdict,
    pub stat: MonotonicityStat,
}

fn failed_row(value: f64, err: &Error) -> SweepRow {
    SweepRow {
        value,
        statistic: f64::NAN,
        std_error: f64::NAN,
        delta: None,
        delta_std_error: None,
        chosen: None,
        objectives: None,
        failed: true,
        error: Some(err.to_string()),
    }
}

/// Run a sweep: evaluate every grid point (concurrently, with common
/// random numbers across rows) and compute the directional verdict.
/// Solver failures mark their row as failed without aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> SweepResult {
    let rows: Vec<SweepRow> = spec
        .grid
        .par_iter()
        .map(|&value| match run_row(spec, value) {
            Ok(row) => row,
            Err(e) => failed_row(value, &e),
        })
        .collect();
    let (verdict, stat) = verdict_for(&rows, spec.factor.direction());
    SweepResult {
        factor: spec.factor,
        rows,
        verdict,
        stat,
    }
}

fn run_row(spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let cfg = row_configuration(&spec.baseline, spec.factor, value)?;
    match spec.factor {
        Factor::DemandVariance | Factor::DemandCostCovariance => {
            let (delta, se) = comparative_advantage_mc(&cfg.quadratic, spec.seed, spec.replications)?;
            let (chosen, objectives) = bargain_pick(&cfg)?;
            Ok(SweepRow {
                value,
                statistic: delta,
                std_error: se,
                delta: Some(delta),
                delta_std_error: Some(se),
                chosen,
                objectives,
                failed: false,
                error: None,
            })
        }
        Factor::TokenVolatility => {
            let (delta, se) = usd_delta_mc(
                &cfg.quadratic,
                cfg.token_initial_usd,
                cfg.token_log_vol,
                spec.seed,
                spec.replications,
            )?;
            Ok(SweepRow {
                value,
                statistic: delta,
                std_error: se,
                delta: Some(delta),
                delta_std_error: Some(se),
                chosen: None,
                objectives: None,
                failed: false,
                error: None,
            })
        }
        Factor::Elasticity => {
            let blocks = blocks_to_band(cfg.elasticity, &cfg.eip1559, cfg.step_factor)?;
            Ok(SweepRow {
                value,
                statistic: blocks as f64,
                std_error: 0.0,
                delta: None,
                delta_std_error: None,
                chosen: None,
                objectives: None,
                failed: false,
                error: None,
            })
        }
        Factor::BargainingPower => {
            let (freq, se, majority) = quantity_pick_frequency(&cfg, spec.seed, spec.replications)?;
            Ok(SweepRow {
                value,
                statistic: freq,
                std_error: se,
                delta: None,
                delta_std_error: None,
                chosen: Some(majority),
                objectives: None,
                failed: false,
                error: None,
            })
        }
    }
}

/// Closed-form bargaining pick at the row configuration (informational).
fn bargain_pick(cfg: &RowConfig) -> Result<(Option<MechanismFamily>, Option<Vec<FamilyMax>>)> {
    let problem = BargainingProblem::new(
        BargainEnv::Quadratic { env: cfg.quadratic },
        cfg.bargaining_beta,
        vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor],
        cfg.tip_per_gas,
        (0.0, 0.0),
    )?;
    match solve_bargaining(&problem, &SolveOptions::closed_form()) {
        Ok(sol) => Ok((Some(sol.family), Some(sol.per_family))),
        Err(Error::Infeasible(_)) => Ok((None, None)),
        Err(e) => Err(e),
    }
}

const MC_CHUNK: usize = 8192;

/// USD-denominated price advantage when the committed floor is held in
/// native token while welfare is measured in USD.
///
/// The committed quantity is token-agnostic; the committed token price
/// turns into the random USD price `p_tok * tau` with the mean-preserving
/// multiplier `tau = initial * exp(v z - v^2/2)`. Higher volatility adds
/// pure noise to the effective floor and erodes the price instrument.
fn usd_delta_mc(
    env: &QuadraticEnvironment,
    token_initial_usd: f64,
    log_vol: f64,
    seed: u64,
    n: usize,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain("usd delta needs at least 2 draws".into()));
    }
    let (q_star, _) = optimal_instrument(env, MechanismFamily::QuantityCap, 0.0);
    let (p_usd, _) = optimal_instrument(env, MechanismFamily::PriceFloor, 0.0);
    let p_tok = p_usd / token_initial_usd;

    let s = env.curvature_gap();
    let b = -env.b_slope();
    let a = env.b_prime() - env.c_prime();
    let u_floor = -env.q_ref();
    let u_cap = (q_star - env.q_ref()).max(u_floor);
    let b_prime = env.b_prime();
    let drift = -0.5 * log_vol * log_vol;

    let dwl = |u: f64, u_star: f64| -> f64 {
        let clamped = u_star.max(u_floor);
        let x = u - u_star;
        let c = clamped - u_star;
        0.5 * s * (x * x - c * c).abs()
    };

    let chunks = n.div_ceil(MC_CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, Purpose::SweepRow, c as u64);
            let count = MC_CHUNK.min(n - c * MC_CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                let (beta, eta) = env.shocks().sample(&mut rng);
                let z: f64 = StandardNormal.sample(&mut rng);
                let tau = token_initial_usd * (drift + log_vol * z).exp();
                let u_star = (a + beta - eta) / s;
                let u_adj = ((b_prime + beta - p_tok * tau) / b).max(u_floor);
                m.push(dwl(u_cap, u_star) - dwl(u_adj, u_star));
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for p in &partials {
        total.merge(p);
    }
    Ok((total.mean(), total.std_error()))
}

/// Blocks until the block size returns within 5% of the target after the
/// demand shifter steps by `step_factor`, starting from the stationary
/// base fee. Deterministic.
fn blocks_to_band(elasticity: f64, params: &Eip1559Params<f64>, step_factor: f64) -> Result<u64> {
    if !(step_factor > 0.0) {
        return Err(Error::Domain(format!(
            "step factor must be positive, got {step_factor}"
        )));
    }
    let demand = crate::demand::IsoelasticDemand::new(
        step_factor * params.q_target * params.p_init.powf(elasticity),
        elasticity,
    )?;
    let band = 0.05 * params.q_target;
    let mut fee = params.p_init;
    for k in 0..10_000u64 {
        let size = crate::eip1559::realized_block_size(fee, &demand, params.q_max)?;
        if (size - params.q_target).abs() <= band {
            return Ok(k);
        }
        fee = next_base_fee(fee, size, params)?;
    }
    Err(Error::Domain(format!(
        "block size did not re-enter the 5% band within 10000 blocks (elasticity {elasticity})"
    )))
}

const FREQUENCY_BATCHES: usize = 32;

/// Frequency of the quantity-control pick across independent bargaining
/// replications (batches), with a binomial standard error. Batch `k`
/// solves on its own substreams but reuses them across grid rows, so row
/// differences reflect the bargaining power alone.
fn quantity_pick_frequency(
    cfg: &RowConfig,
    seed: u64,
    replications: usize,
) -> Result<(f64, f64, MechanismFamily)> {
    let draws = (replications / FREQUENCY_BATCHES).max(64);
    let picks: Vec<Result<MechanismFamily>> = (0..FREQUENCY_BATCHES)
        .into_par_iter()
        .map(|k| {
            let problem = BargainingProblem::new(
                BargainEnv::Quadratic { env: cfg.quadratic },
                cfg.bargaining_beta,
                vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor],
                cfg.tip_per_gas,
                (0.0, 0.0),
            )?;
            let opts = SolveOptions::monte_carlo(seed, draws).with_stream(k as u64);
            Ok(solve_bargaining(&problem, &opts)?.family)
        })
        .collect();
    let mut q_count = 0usize;
    for pick in picks {
        if pick? == MechanismFamily::QuantityCap {
            q_count += 1;
        }
    }
    let f = q_count as f64 / FREQUENCY_BATCHES as f64;
    let se = (f * (1.0 - f) / FREQUENCY_BATCHES as f64).sqrt();
    let majority = if f >= 0.5 {
        MechanismFamily::QuantityCap
    } else {
        MechanismFamily::PriceFloor
    };
    Ok((f, se, majority))
}

/// Oriented monotonicity verdict over the successful rows.
fn verdict_for(rows: &[SweepRow], direction: Direction) -> (Verdict, MonotonicityStat) {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| !r.failed).collect();
    let orient = |x: f64| match direction {
        Direction::NonDecreasing => x,
        Direction::NonIncreasing => -x,
    };
    let mut sig_con = 0usize;
    let mut sig_dis = 0usize;
    let mut pairs = 0usize;
    for i in 0..ok.len() {
        for j in (i + 1)..ok.len() {
            pairs += 1;
            let diff = orient(ok[j].statistic) - orient(ok[i].statistic);
            // conservative: treats rows as independent even though common
            // random numbers make them positively correlated
            let se = (ok[i].std_error.powi(2) + ok[j].std_error.powi(2)).sqrt();
            if diff > 3.0 * se {
                sig_con += 1;
            } else if -diff > 3.0 * se {
                sig_dis += 1;
            }
        }
    }
    let tau = if pairs == 0 {
        0.0
    } else {
        (sig_con as i64 - sig_dis as i64) as f64 / pairs as f64
    };
    let stat = MonotonicityStat {
        kendall_tau: tau,
        significant_concordant: sig_con,
        significant_discordant: sig_dis,
        pairs,
    };
    let verdict = if rows.iter().any(|r| r.failed) && ok.len() < 2 {
        Verdict::Inconclusive
    } else if tau >= 0.0 && sig_dis == 0 {
        Verdict::MatchesTable1
    } else if tau < 0.0 && sig_dis > 0 && sig_con == 0 {
        Verdict::Opposes
    } else {
        Verdict::Inconclusive
    };
    (verdict, stat)
}

/// CSV rendering of a sweep, one row per grid point.
pub fn sweep_to_csv(result: &SweepResult) -> String {
    use crate::eip1559::format_sig12;
    let mut out = String::new();
    out.push_str("value,statistic,std_error,delta,delta_std_error,chosen_family,failed\n");
    for r in &result.rows {
        let opt = |v: Option<f64>| v.map(format_sig12).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_sig12(r.value),
            format_sig12(r.statistic),
            format_sig12(r.std_error),
            opt(r.delta),
            opt(r.delta_std_error),
            r.chosen.map(|f| f.label()).unwrap_or(""),
            r.failed,
        ));
    }
    out
}

/// Overall status of the five-factor report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Pass,
    Warn,
    Fail,
}

/// One line of the five-factor report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReportRow {
    pub factor: Factor,
    pub example: &'static str,
    pub expected: MechanismFamily,
    pub verdict: Verdict,
    pub stat: MonotonicityStat,
}

/// The assembled five-factor verdict table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Report {
    pub rows: Vec<FactorReportRow>,
    pub status: ReportStatus,
}

/// Assemble the five-factor report. Every factor must appear exactly once.
pub fn table1_report(results: &[SweepResult]) -> Result<Table1Report> {
    let mut rows = Vec::with_capacity(5);
    for factor in Factor::all() {
        let found: Vec<&SweepResult> = results.iter().filter(|r| r.factor == factor).collect();
        match found.as_slice() {
            [result] => rows.push(FactorReportRow {
                factor,
                example: factor.example(),
                expected: factor.favored_family(),
                verdict: result.verdict,
                stat: result.stat,
            }),
            [] => {
                return Err(Error::Domain(format!(
                    "missing sweep result for factor '{}'",
                    factor.label()
                )))
            }
            _ => {
                return Err(Error::Domain(format!(
                    "duplicate sweep results for factor '{}'",
                    factor.label()
                )))
            }
        }
    }
    let status = if rows.iter().any(|r| r.verdict == Verdict::Opposes) {
        ReportStatus::Fail
    } else if rows.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        ReportStatus::Warn
    } else {
        ReportStatus::Pass
    };
    Ok(Table1Report { rows, status })
}

impl Table1Report {
    /// Plain-text rendering of the verdict table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:<38} {:<10} {:<16} {:>6}\n",
            "FACTOR", "EXAMPLE", "EXPECTED", "VERDICT", "TAU"
        ));
        for r in &self.rows {
            let expected = match r.expected {
                MechanismFamily::QuantityCap => "Q",
                MechanismFamily::PriceFloor => "P",
                MechanismFamily::FixedPrice => "0",
            };
            let verdict = match r.verdict {
                Verdict::MatchesTable1 => "matches",
                Verdict::Opposes => "OPPOSES",
                Verdict::Inconclusive => "inconclusive",
            };
            out.push_str(&format!(
                "{:<24} {:<38} {:<10} {:<16} {:>6.2}\n",
                r.factor.label(),
                r.example,
                expected,
                verdict,
                r.stat.kendall_tau
            ));
        }
        let status = match self.status {
            ReportStatus::Pass => "PASS",
            ReportStatus::Warn => "WARN",
            ReportStatus::Fail => "FAIL",
        };
        out.push_str(&format!("status: {status}\n"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_must_be_strictly_increasing_with_three_points() {
        let base = Baseline::shipped();
        assert!(SweepSpec::new(Factor::DemandVariance, vec![1.0, 1.0, 1.0], base.clone(), 10, 0)
            .is_err());
        assert!(SweepSpec::new(Factor::DemandVariance, vec![1.0, 2.0], base.clone(), 10, 0).is_err());
        assert!(SweepSpec::new(Factor::DemandVariance, vec![1.0, 2.0, 1.5], base.clone(), 10, 0)
            .is_err());
        assert!(SweepSpec::new(Factor::DemandVariance, vec![0.5, 1.0, 2.0], base, 10, 0).is_ok());
    }

    #[test]
    fn covariance_grid_must_stay_positive_semidefinite() {
        // baseline has var_demand = var_cost = 1, so |cov| > 1 must fail
        let base = Baseline::shipped();
        assert!(SweepSpec::new(
            Factor::DemandCostCovariance,
            vec![0.0, 0.5, 1.5],
            base,
            10,
            0
        )
        .is_err());
    }

    #[test]
    fn elasticity_step_response_is_faster_for_higher_elasticity() {
        let params = Eip1559Params::ethereum(2.0).unwrap();
        let blocks: Vec<u64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&e| blocks_to_band(e, &params, 1.2).unwrap())
            .collect();
        assert!(
            blocks.windows(2).all(|w| w[1] <= w[0]),
            "not monotone: {blocks:?}"
        );
        assert!(blocks[0] > blocks[3]);
    }

    #[test]
    fn row_configuration_changes_only_the_factor() {
        let base = Baseline::shipped();
        let reference = row_configuration(&base, Factor::TokenVolatility, base.token.log_vol())
            .unwrap();
        let perturbed = row_configuration(&base, Factor::TokenVolatility, 0.3).unwrap();
        assert_eq!(reference.quadratic, perturbed.quadratic);
        assert_eq!(reference.elasticity, perturbed.elasticity);
        assert_eq!(reference.bargaining_beta, perturbed.bargaining_beta);
        assert_ne!(reference.token_log_vol, perturbed.token_log_vol);
    }

    #[test]
    fn demand_variance_sweep_matches_expected_direction() {
        let spec = SweepSpec::shipped(Factor::DemandVariance, 20_000, 7).unwrap();
        let result = run_sweep(&spec);
        assert_eq!(result.verdict, Verdict::MatchesTable1, "{:?}", result.stat);
        // the symmetric baseline sits at the indifference point: no row may
        // show a 3-sigma price advantage in either direction
        assert_eq!(result.stat.significant_concordant, 0, "{:?}", result.stat);
        assert_eq!(result.stat.significant_discordant, 0, "{:?}", result.stat);
        for row in &result.rows {
            assert!(
                row.statistic.abs() <= 3.0 * row.std_error,
                "value {}: delta {} se {}",
                row.value,
                row.statistic,
                row.std_error
            );
        }
    }

    #[test]
    fn covariance_sweep_opposes_the_price_instrument() {
        let spec = SweepSpec::shipped(Factor::DemandCostCovariance, 20_000, 7).unwrap();
        let result = run_sweep(&spec);
        assert_eq!(result.verdict, Verdict::MatchesTable1, "{:?}", result.stat);
        // delta should fall roughly like -cov
        let first = result.rows.first().unwrap().statistic;
        let last = result.rows.last().unwrap().statistic;
        assert!(last < first - 0.5, "first {first}, last {last}");
    }

    #[test]
    fn token_volatility_sweep_erodes_the_price_instrument() {
        let spec = SweepSpec::shipped(Factor::TokenVolatility, 20_000, 7).unwrap();
        let result = run_sweep(&spec);
        assert_eq!(result.verdict, Verdict::MatchesTable1, "{:?}", result.stat);
        assert!(result.rows.last().unwrap().statistic < -0.5);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let spec = SweepSpec::shipped(Factor::DemandCostCovariance, 8_000, 123).unwrap();
        let a = run_sweep(&spec);
        let b = run_sweep(&spec);
        assert_eq!(a, b);
    }

    #[test]
    fn report_requires_all_five_factors() {
        let spec = SweepSpec::shipped(Factor::Elasticity, 1_000, 1).unwrap();
        let result = run_sweep(&spec);
        assert!(matches!(
            table1_report(&[result]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn report_status_reflects_verdicts() {
        let make = |factor: Factor, verdict: Verdict| SweepResult {
            factor,
            rows: vec![],
            verdict,
            stat: MonotonicityStat {
                kendall_tau: 0.0,
                significant_concordant: 0,
                significant_discordant: 0,
                pairs: 0,
            },
        };
        let all_pass: Vec<SweepResult> = Factor::all()
            .into_iter()
            .map(|f| make(f, Verdict::MatchesTable1))
            .collect();
        assert_eq!(table1_report(&all_pass).unwrap().status, ReportStatus::Pass);

        let mut one_warn = all_pass.clone();
        one_warn[2].verdict = Verdict::Inconclusive;
        assert_eq!(table1_report(&one_warn).unwrap().status, ReportStatus::Warn);

        let mut one_fail = all_pass.clone();
        one_fail[4].verdict = Verdict::Opposes;
        let report = table1_report(&one_fail).unwrap();
        assert_eq!(report.status, ReportStatus::Fail);
        assert!(report.render_text().contains("OPPOSES"));
    }

    #[test]
    fn verdict_handles_flat_zero_rows() {
        let rows: Vec<SweepRow> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&v| SweepRow {
                value: v,
                statistic: 0.0,
                std_error: 0.0,
                delta: None,
                delta_std_error: None,
                chosen: None,
                objectives: None,
                failed: false,
                error: None,
            })
            .collect();
        let (verdict, stat) = verdict_for(&rows, Direction::NonDecreasing);
        assert_eq!(verdict, Verdict::MatchesTable1);
        assert_eq!(stat.kendall_tau, 0.0);
    }

    #[test]
    fn verdict_detects_significant_opposition() {
        let rows: Vec<SweepRow> = [(1.0, 0.0), (2.0, -1.0), (3.0, -2.0)]
            .iter()
            .map(|&(v, s)| SweepRow {
                value: v,
                statistic: s,
                std_error: 0.01,
                delta: None,
                delta_std_error: None,
                chosen: None,
                objectives: None,
                failed: false,
                error: None,
            })
            .collect();
        let (verdict, _) = verdict_for(&rows, Direction::NonDecreasing);
        assert_eq!(verdict, Verdict::Opposes);
        let (verdict, _) = verdict_for(&rows, Direction::NonIncreasing);
        assert_eq!(verdict, Verdict::MatchesTable1);
    }

    #[test]
    fn sweep_csv_has_one_row_per_grid_point() {
        let spec = SweepSpec::shipped(Factor::Elasticity, 100, 1).unwrap();
        let result = run_sweep(&spec);
        let csv = sweep_to_csv(&result);
        assert_eq!(csv.lines().count(), 1 + spec.grid.len());
        assert!(csv.starts_with("value,statistic,std_error,"));
    }
}
