//! Strict JSON run configuration.
//!
//! Unknown keys are rejected everywhere, and the `schema_version` must
//! match the binary's supported version. All randomness derives from the
//! single `seed` (the `--seed` flag overrides it); there is no wall-clock
//! entropy anywhere.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use blockfee_core::bargaining::{BargainEnv, BargainingProblem, IsoelasticMarket};
use blockfee_core::demand::IsoelasticDemand;
use blockfee_core::eip1559::{DemandProcess, Eip1559Params};
use blockfee_core::experiments::Baseline;
use blockfee_core::marginal::{CostCurve, LinearMarginalCurve};
use blockfee_core::shocks::ShockModel;
use blockfee_core::token::TokenPriceModel;
use blockfee_core::weitzman::{MechanismFamily, QuadraticEnvironment};

use crate::CliError;

/// Schema version this binary understands.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Default Monte Carlo draw count for sections that do not set one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<ModelsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weitzman: Option<WeitzmanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eip1559: Option<Eip1559Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bargain: Option<BargainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<QuadraticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shocks: Option<ShocksConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<TokenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<DemandConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticConfig {
    pub b_prime: f64,
    pub b_slope: f64,
    pub c_prime: f64,
    pub c_slope: f64,
    pub q_ref: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ShocksConfig {
    pub kind: ShockKindConfig,
    pub var_demand: f64,
    pub var_cost: f64,
    #[serde(default)]
    pub cov: f64,
    #[serde(default = "default_half")]
    pub two_point_prob: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockKindConfig {
    Gaussian,
    TwoPoint,
}

fn default_half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenConfig {
    pub initial_usd: f64,
    #[serde(default)]
    pub log_vol: f64,
    #[serde(default)]
    pub drift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandConfig {
    pub psi: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeitzmanSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(default)]
    pub tip_per_gas: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Eip1559Section {
    #[serde(default = "default_q_target")]
    pub q_target: f64,
    /// Defaults to twice the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    #[serde(default = "default_adjustment")]
    pub d: f64,
    pub p_init: f64,
    #[serde(default)]
    pub p_min: f64,
    pub blocks: usize,
    #[serde(default)]
    pub tip_per_gas: f64,
    #[serde(default)]
    pub demand_shock_std: f64,
    #[serde(default)]
    pub demand_rho: f64,
}

fn default_q_target() -> f64 {
    blockfee_core::eip1559::DEFAULT_Q_TARGET
}

fn default_adjustment() -> f64 {
    blockfee_core::eip1559::DEFAULT_ADJUSTMENT_RATE
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BargainSection {
    pub beta: f64,
    #[serde(default = "default_candidates")]
    pub candidates: Vec<MechanismFamily>,
    #[serde(default)]
    pub tip_per_gas: f64,
    #[serde(default)]
    pub disagreement: (f64, f64),
    /// Monte Carlo draw count; omit for the exact quadratic closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    /// Bargain over an isoelastic market instead of the quadratic
    /// environment (requires `draws`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isoelastic: Option<IsoelasticConfig>,
}

fn default_candidates() -> Vec<MechanismFamily> {
    vec![MechanismFamily::QuantityCap, MechanismFamily::PriceFloor]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoelasticConfig {
    pub psi: f64,
    pub epsilon: f64,
    pub cost_intercept: f64,
    pub cost_slope: f64,
    pub q_ref: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
}

impl RunConfig {
    /// Parse and validate a config document. Parse failures carry the
    /// line/column the parser stopped at.
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!(
                "config parse error at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version '{}'; this binary supports '{SCHEMA_VERSION}'",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    fn models(&self) -> Result<&ModelsConfig, CliError> {
        self.models
            .as_ref()
            .ok_or_else(|| CliError::Config("config needs a 'models' section".into()))
    }

    /// The quadratic welfare environment (requires `models.quadratic` and
    /// `models.shocks`).
    pub fn quadratic_env(&self) -> Result<QuadraticEnvironment, CliError> {
        let models = self.models()?;
        let q = models.quadratic.as_ref().ok_or_else(|| {
            CliError::Config("config needs 'models.quadratic' for this command".into())
        })?;
        let shocks = self.shock_model()?;
        QuadraticEnvironment::from_coefficients(
            q.b_prime, q.b_slope, q.c_prime, q.c_slope, q.q_ref, shocks,
        )
        .map_err(CliError::from_config_phase)
    }

    pub fn shock_model(&self) -> Result<ShockModel, CliError> {
        let models = self.models()?;
        let s = models.shocks.as_ref().ok_or_else(|| {
            CliError::Config("config needs 'models.shocks' for this command".into())
        })?;
        let model = match s.kind {
            ShockKindConfig::Gaussian => ShockModel::gaussian(s.var_demand, s.var_cost, s.cov),
            ShockKindConfig::TwoPoint => {
                ShockModel::two_point_with_prob(s.var_demand, s.var_cost, s.cov, s.two_point_prob)
            }
        };
        model.map_err(CliError::from_config_phase)
    }

    pub fn token_model(&self) -> Result<TokenPriceModel, CliError> {
        match self.models.as_ref().and_then(|m| m.token.as_ref()) {
            Some(t) => TokenPriceModel::new(t.initial_usd, t.log_vol, t.drift)
                .map_err(CliError::from_config_phase),
            None => Ok(TokenPriceModel::constant(2000.0).unwrap()),
        }
    }

    pub fn demand_curve(&self) -> Result<IsoelasticDemand<f64>, CliError> {
        let models = self.models()?;
        let d = models.demand.as_ref().ok_or_else(|| {
            CliError::Config("config needs 'models.demand' for this command".into())
        })?;
        IsoelasticDemand::new(d.psi, d.epsilon).map_err(CliError::from_config_phase)
    }

    pub fn fee_params(&self) -> Result<(Eip1559Params<f64>, &Eip1559Section), CliError> {
        let sect = self.eip1559.as_ref().ok_or_else(|| {
            CliError::Config("config needs an 'eip1559' section for this command".into())
        })?;
        if sect.blocks < 1 {
            return Err(CliError::Config(
                "eip1559.blocks must be at least 1".into(),
            ));
        }
        let params = Eip1559Params::new(
            sect.q_target,
            sect.q_max.unwrap_or(2.0 * sect.q_target),
            sect.d,
            sect.p_init,
            sect.p_min,
        )
        .map_err(CliError::from_config_phase)?;
        Ok((params, sect))
    }

    pub fn demand_process(&self, sect: &Eip1559Section) -> Result<DemandProcess, CliError> {
        DemandProcess::new(self.demand_curve()?, sect.demand_shock_std, sect.demand_rho)
            .map_err(CliError::from_config_phase)
    }

    pub fn bargaining_problem(&self) -> Result<(BargainingProblem, Option<usize>), CliError> {
        let sect = self.bargain.as_ref().ok_or_else(|| {
            CliError::Config("config needs a 'bargain' section for this command".into())
        })?;
        let env = match &sect.isoelastic {
            Some(iso) => {
                if sect.draws.is_none() {
                    return Err(CliError::Config(
                        "bargain.isoelastic requires bargain.draws".into(),
                    ));
                }
                let market = IsoelasticMarket::new(
                    IsoelasticDemand::new(iso.psi, iso.epsilon)
                        .map_err(CliError::from_config_phase)?,
                    CostCurve::new(
                        LinearMarginalCurve::cost(iso.cost_intercept, iso.cost_slope, iso.q_ref)
                            .map_err(CliError::from_config_phase)?,
                    )
                    .map_err(CliError::from_config_phase)?,
                    self.shock_model()?,
                    iso.q_ref,
                )
                .map_err(CliError::from_config_phase)?;
                BargainEnv::Isoelastic { market }
            }
            None => BargainEnv::Quadratic {
                env: self.quadratic_env()?,
            },
        };
        let problem = BargainingProblem::new(
            env,
            sect.beta,
            sect.candidates.clone(),
            sect.tip_per_gas,
            sect.disagreement,
        )
        .map_err(CliError::from_config_phase)?;
        Ok((problem, sect.draws))
    }

    /// Sweep baseline assembled from the configured models, falling back
    /// to the shipped baseline for absent sections.
    pub fn sweep_baseline(&self) -> Result<Baseline, CliError> {
        let mut base = Baseline::shipped();
        if let Some(models) = &self.models {
            if models.quadratic.is_some() {
                base.quadratic = self.quadratic_env()?;
            }
            if models.token.is_some() {
                base.token = self.token_model()?;
            }
            if let Some(d) = &models.demand {
                base.elasticity = d.epsilon;
            }
        }
        if self.eip1559.is_some() {
            let (params, _) = self.fee_params()?;
            base.eip1559 = params;
        }
        if let Some(b) = &self.bargain {
            base.bargaining_beta = b.beta;
            base.tip_per_gas = b.tip_per_gas;
        }
        Ok(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = RunConfig::from_json(r#"{"schema_version": "1", "seed": 42}"#).unwrap();
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err =
            RunConfig::from_json(r#"{"schema_version": "1", "seed": 1, "bogus": true}"#)
                .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn schema_version_must_match() {
        let err = RunConfig::from_json(r#"{"schema_version": "0", "seed": 1}"#).unwrap_err();
        assert!(err.to_string().contains("schema_version"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_and_column() {
        let err = RunConfig::from_json("{\n  \"schema_version\": \"1\",\n  seed: 1\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn missing_sections_are_reported() {
        let cfg = RunConfig::from_json(r#"{"schema_version": "1", "seed": 1}"#).unwrap();
        assert!(cfg.quadratic_env().is_err());
        assert!(cfg.fee_params().is_err());
        assert!(cfg.bargaining_problem().is_err());
    }
}
