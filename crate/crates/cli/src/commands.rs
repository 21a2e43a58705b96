//! Subcommand implementations. Config interpretation errors are exit
//! code 2; numeric/solver failures while running are exit code 3.

use serde::Serialize;

use blockfee_core::bargaining::{solve_bargaining, SolveOptions};
use blockfee_core::eip1559::{simulate_trajectory, trajectory_stats, trajectory_to_csv};
use blockfee_core::experiments::{run_sweep, sweep_to_csv, table1_report, Factor, SweepSpec};
use blockfee_core::weitzman::{
    comparative_advantage_closed_form, comparative_advantage_mc, first_best_welfare,
    optimal_instrument, MechanismFamily, WelfareOutcome,
};

use crate::config::RunConfig;
use crate::output::OutputWriter;
use crate::CliError;

#[derive(Serialize)]
struct Instrument {
    parameter: f64,
    welfare: WelfareOutcome,
}

#[derive(Serialize)]
struct WeitzmanResult {
    optimal_quantity_cap: Instrument,
    optimal_price_floor: Instrument,
    optimal_fixed_price: Instrument,
    first_best_welfare: f64,
    delta_mc: f64,
    delta_mc_std_error: f64,
    delta_closed_form: f64,
    draws: usize,
}

/// Optimal instruments, their welfare, and the comparative advantage of
/// price control (Monte Carlo and closed form) on the configured
/// quadratic environment.
pub fn cmd_weitzman(cfg: &RunConfig, seed: u64, out: &mut OutputWriter) -> Result<(), CliError> {
    let env = cfg.quadratic_env()?;
    let sect = cfg.weitzman.clone().unwrap_or_default();
    let draws = sect.draws.or(cfg.replications).unwrap_or(100_000);
    if draws < 2 {
        return Err(CliError::Config("weitzman draws must be at least 2".into()));
    }
    let tip = sect.tip_per_gas;

    let (q_star, cap) = optimal_instrument(&env, MechanismFamily::QuantityCap, tip);
    let (p_star, floor) = optimal_instrument(&env, MechanismFamily::PriceFloor, tip);
    let (p_fixed, fixed) = optimal_instrument(&env, MechanismFamily::FixedPrice, tip);
    let (delta_mc, delta_mc_std_error) = comparative_advantage_mc(&env, seed, draws)?;

    out.write_json(
        "weitzman.json",
        &WeitzmanResult {
            optimal_quantity_cap: Instrument {
                parameter: q_star,
                welfare: cap,
            },
            optimal_price_floor: Instrument {
                parameter: p_star,
                welfare: floor,
            },
            optimal_fixed_price: Instrument {
                parameter: p_fixed,
                welfare: fixed,
            },
            first_best_welfare: first_best_welfare(&env),
            delta_mc,
            delta_mc_std_error,
            delta_closed_form: comparative_advantage_closed_form(&env),
            draws,
        },
    )
}

/// Simulate the dynamic base-fee mechanism and export the trajectory CSV
/// plus summary statistics.
pub fn cmd_eip1559(cfg: &RunConfig, seed: u64, out: &mut OutputWriter) -> Result<(), CliError> {
    let (params, sect) = cfg.fee_params()?;
    let process = cfg.demand_process(sect)?;
    let token = cfg.token_model()?;
    let traj = simulate_trajectory(&params, &process, &token, sect.tip_per_gas, sect.blocks, seed)?;
    let stats = trajectory_stats(&traj)?;
    out.write_raw("trajectory.csv", &trajectory_to_csv(&traj))?;
    out.write_json("eip1559_stats.json", &stats)
}

/// Solve the configured bargaining problem and export the solution.
pub fn cmd_bargain(cfg: &RunConfig, seed: u64, out: &mut OutputWriter) -> Result<(), CliError> {
    let (problem, draws) = cfg.bargaining_problem()?;
    let opts = SolveOptions {
        seed,
        draws,
        stream_index: 0,
    };
    let solution = solve_bargaining(&problem, &opts)?;
    out.write_json("bargain.json", &solution)
}

/// Run one factor sweep, or all five with a combined report when
/// `all_factors` is set. Per-row solver failures are flagged in the rows
/// and downgrade the verdict; they do not fail the command.
pub fn cmd_sweep(
    cfg: &RunConfig,
    seed: u64,
    out: &mut OutputWriter,
    all_factors: bool,
) -> Result<(), CliError> {
    let sect = cfg.sweep.clone().unwrap_or_default();
    let replications = sect.replications.or(cfg.replications).unwrap_or(100_000);
    let baseline = cfg.sweep_baseline()?;

    let factors: Vec<(Factor, Vec<f64>)> = if all_factors {
        Factor::all()
            .into_iter()
            .map(|f| (f, f.default_grid()))
            .collect()
    } else {
        let label = sect.factor.as_deref().ok_or_else(|| {
            CliError::Config("sweep.factor is required (or pass --all-factors)".into())
        })?;
        let factor = Factor::from_label(label).map_err(CliError::from_config_phase)?;
        let grid = sect.grid.clone().unwrap_or_else(|| factor.default_grid());
        vec![(factor, grid)]
    };

    let mut results = Vec::with_capacity(factors.len());
    for (factor, grid) in factors {
        let spec = SweepSpec::new(factor, grid, baseline.clone(), replications, seed)
            .map_err(CliError::from_config_phase)?;
        let result = run_sweep(&spec);
        out.write_raw(
            &format!("sweep_{}_{}.csv", factor.label(), seed),
            &sweep_to_csv(&result),
        )?;
        out.write_json(&format!("sweep_{}_{}.json", factor.label(), seed), &result)?;
        results.push(result);
    }

    if all_factors {
        let report = table1_report(&results)?;
        out.write_json("table1_report.json", &report)?;
        print!("{}", report.render_text());
    }
    Ok(())
}
