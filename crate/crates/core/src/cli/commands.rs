use crate::asymptotics::{big_f, q_function, AsymptoticSolution};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::montecarlo::{sweep, AggregateResult, Experiment, ExperimentConfig, SweepParameter};
use crate::power::{optimize_alpha, AllocationObjective};

use super::output::{Cell, Table};

pub const PREDICT_SCHEMA: &str = "bro-mimo/predict/v1";
pub const SIMULATE_SCHEMA: &str = "bro-mimo/simulate/v1";
pub const SWEEP_SCHEMA: &str = "bro-mimo/sweep/v1";
pub const POWER_SCHEMA: &str = "bro-mimo/power-opt/v1";

const POINT_COLUMNS: [&str; 5] = ["rho_db", "r", "alpha", "beta", "m"];
const THEORY_COLUMNS: [&str; 4] = ["mu_star", "gamma_star", "mse_theory", "ber_theory"];
const DECODER_COLUMNS: [&str; 7] =
    ["decoder", "mean_mse", "std_err_mse", "mean_ber", "std_err_ber", "n_trials", "n_nonconverged"];

fn point_cells(system: &SystemConfig) -> Vec<Cell> {
    vec![system.rho_db().into(), system.r.into(), system.alpha.into(), system.beta.into(), system.m().into()]
}

fn theory_cells(t: &AsymptoticSolution) -> Vec<Cell> {
    vec![t.mu_star.into(), t.gamma_star.into(), t.mse.into(), t.ber.into()]
}

fn columns(parts: &[&[&'static str]]) -> Vec<&'static str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Asymptotic MSE and BER of the box-relaxation detector.
pub fn predict(config: &ExperimentConfig) -> Result<Table> {
    let theory = Experiment::prepare(config)?.theory()?;
    let mut table = Table::new(PREDICT_SCHEMA, &columns(&[&POINT_COLUMNS, &THEORY_COLUMNS]));
    let mut row = point_cells(&config.system);
    row.extend(theory_cells(&theory));
    table.push(row);
    Ok(table)
}

fn simulate_columns(prefix: &[&'static str]) -> Vec<&'static str> {
    columns(&[prefix, &POINT_COLUMNS, &DECODER_COLUMNS, &THEORY_COLUMNS])
}

fn push_aggregate(
    table: &mut Table,
    prefix: &[Cell],
    suffix: &[Cell],
    system: &SystemConfig,
    result: &AggregateResult,
) {
    for d in &result.decoders {
        let mut row = prefix.to_vec();
        row.extend(point_cells(system));
        row.extend([
            d.decoder.name().into(),
            d.mean_mse.into(),
            d.std_err_mse.into(),
            d.mean_ber.into(),
            d.std_err_ber.into(),
            d.n_trials.into(),
            d.n_nonconverged.into(),
        ]);
        row.extend(theory_cells(&result.theory));
        row.extend_from_slice(suffix);
        table.push(row);
    }
}

/// Monte Carlo averages per decoder next to the asymptotic prediction.
pub fn simulate(config: &ExperimentConfig) -> Result<Table> {
    let exp = Experiment::prepare(config)?;
    let indices: Vec<u64> = (0..config.trials as u64).collect();
    let result = exp.run_trials(&indices)?;
    let mut table = Table::new(SIMULATE_SCHEMA, &simulate_columns(&[]));
    push_aggregate(&mut table, &[], &[], &config.system, &result);
    Ok(table)
}

/// One row per swept value and decoder. Failed points keep their rows with
/// `NA` metrics and the error text.
pub fn sweep_table(
    config: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<(Table, Vec<Error>)> {
    let points = sweep(config, parameter, values)?;
    let mut cols = simulate_columns(&["parameter", "value"]);
    cols.push("error");
    let mut table = Table::new(SWEEP_SCHEMA, &cols);
    let mut failures = Vec::new();
    for point in &points {
        let mut system = config.system.clone();
        parameter.apply(&mut system, point.value);
        let prefix = [parameter.name().into(), point.value.into()];
        match &point.result {
            Ok(result) => push_aggregate(&mut table, &prefix, &["".into()], &system, result),
            Err(e) => {
                failures.push(e.clone());
                for d in &config.decoders {
                    let mut row = prefix.to_vec();
                    row.extend(point_cells(&system));
                    row.push(d.name().into());
                    row.extend(std::iter::repeat_n(Cell::Missing, DECODER_COLUMNS.len() - 1 + THEORY_COLUMNS.len()));
                    row.push(e.to_string().replace(":\n  - ", ": ").replace("\n  - ", "; ").as_str().into());
                    table.push(row);
                }
            }
        }
    }
    Ok((table, failures))
}

/// Predicted MSE/BER over the data power fraction, followed by one
/// `optimum` row.
pub fn power_opt(config: &ExperimentConfig, objective: AllocationObjective, grid: usize) -> Result<Table> {
    let curve = optimize_alpha(&config.system, objective, grid)?;
    if !curve.unimodal_mse || !curve.unimodal_ber {
        eprintln!("warning: the allocation curve is not unimodal on the grid; the refined optimum may be local");
    }
    let mut table =
        Table::new(POWER_SCHEMA, &["kind", "alpha", "mu_star", "mse", "ber", "alpha_star_mse", "alpha_star_ber"]);
    for k in 0..curve.alphas.len() {
        table.push(vec![
            "curve".into(),
            curve.alphas[k].into(),
            curve.mu_values[k].into(),
            curve.mse_values[k].into(),
            curve.ber_values[k].into(),
            Cell::Missing,
            Cell::Missing,
        ]);
    }
    let mu = match objective {
        AllocationObjective::Mse => curve.mu_at_star_mse,
        AllocationObjective::Ber => curve.mu_at_star,
    };
    table.push(vec![
        "optimum".into(),
        curve.alpha_star().into(),
        mu.into(),
        big_f(mu).into(),
        q_function(mu / 2.0).into(),
        curve.alpha_star_mse.into(),
        curve.alpha_star_ber.into(),
    ]);
    Ok(table)
}
