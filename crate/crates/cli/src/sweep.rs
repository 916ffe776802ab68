//! Parameter sweeps: independent seeded runs over a value grid, executed in
//! parallel (or serially; the outputs are identical either way), plus the
//! aggregated mean-Pearson grid.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::backend::{detect_transition, run_backend, RunOutput};
use crate::error::{CliError, Result};
use crate::output::{fmt_float, render_csv, write_atomic, VERSION};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    XiBar,
    OmegaTau,
    GSqTau,
}

impl SweepParameter {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "xi_bar" => Ok(SweepParameter::XiBar),
            "omega_tau" => Ok(SweepParameter::OmegaTau),
            "g_sq_tau" => Ok(SweepParameter::GSqTau),
            other => Err(CliError::Validation(format!(
                "unsupported sweep parameter `{other}` (use xi_bar, omega_tau, g_sq_tau)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::XiBar => "xi_bar",
            SweepParameter::OmegaTau => "omega_tau",
            SweepParameter::GSqTau => "g_sq_tau",
        }
    }

    fn apply(&self, scenario: &mut Scenario, value: f64) -> Result<()> {
        match self {
            SweepParameter::XiBar => {
                let noise = scenario.noise.as_mut().ok_or_else(|| {
                    CliError::Validation(
                        "sweeping xi_bar requires a [noise] section".into(),
                    )
                })?;
                noise.xi_bar = value;
            }
            SweepParameter::OmegaTau => scenario.physics.omega_tau = value,
            SweepParameter::GSqTau => scenario.physics.g_sq_tau = value,
        }
        Ok(())
    }
}

/// One run descriptor of the sweep grid.
#[derive(Debug, Clone)]
pub struct RunDescriptor {
    pub value_index: usize,
    pub run_index: u64,
    pub value: f64,
    pub seed: u64,
}

/// Expand the sweep into per-run descriptors with derived seeds
/// (seed = derive_seed(master, value_index, run_index); all distinct).
pub fn run_descriptors(scenario: &Scenario) -> Result<Vec<RunDescriptor>> {
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Validation("missing [sweep] section".into()))?;
    SweepParameter::parse(&sweep.parameter)?;
    let mut out = Vec::new();
    for (value_index, &value) in sweep.values.iter().enumerate() {
        for run_index in 0..sweep.runs_per_value {
            // TOML integers are i64, so fold the derived seed into the
            // non-negative range before it lands in a provenance header.
            let seed = qsync_core::rng::derive_seed(scenario.seed, value_index as u64, run_index)
                & (i64::MAX as u64);
            out.push(RunDescriptor { value_index, run_index, value, seed });
        }
    }
    Ok(out)
}

fn scenario_for(scenario: &Scenario, param: SweepParameter, desc: &RunDescriptor) -> Result<Scenario> {
    let mut run = scenario.clone();
    param.apply(&mut run, desc.value)?;
    run.seed = desc.seed;
    run.sweep = None;
    run.output = Some(format!(
        "{}_{}{}_run{}",
        scenario.output_stem(),
        param.name(),
        desc.value,
        desc.run_index
    ));
    run.validate()?;
    Ok(run)
}

pub struct SweepResult {
    pub grid_csv: PathBuf,
    pub per_value_transition: Vec<(f64, Option<u64>)>,
    pub runs: usize,
}

/// Execute the sweep, write one CSV per run plus the density-grid CSV
/// (`<stem>.grid.csv`: parameter value × n → mean Pearson over runs), and a
/// sweep summary JSON.
pub fn run_sweep(
    scenario: &Scenario,
    out_dir: &Path,
    serial: bool,
    wall_clock: impl Fn() -> f64,
) -> Result<SweepResult> {
    scenario.validate()?;
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Validation("missing [sweep] section".into()))?;
    let param = SweepParameter::parse(&sweep.parameter)?;
    let descriptors = run_descriptors(scenario)?;
    std::fs::create_dir_all(out_dir)?;

    let execute = |desc: &RunDescriptor| -> Result<(usize, u64, Scenario, RunOutput)> {
        let run_scenario = scenario_for(scenario, param, desc)?;
        let output = run_backend(&run_scenario)?;
        Ok((desc.value_index, desc.run_index, run_scenario, output))
    };
    let mut results: Vec<(usize, u64, Scenario, RunOutput)> = if serial {
        descriptors.iter().map(execute).collect::<Result<_>>()?
    } else {
        descriptors
            .par_iter()
            .map(execute)
            .collect::<std::result::Result<_, _>>()?
    };
    results.sort_by_key(|(vi, ri, _, _)| (*vi, *ri));

    for (_, _, run_scenario, output) in &results {
        let csv = render_csv(run_scenario, &output.series)?;
        let path = out_dir.join(format!("{}.csv", run_scenario.output_stem()));
        write_atomic(&path, csv.as_bytes())?;
    }

    // Mean Pearson per (value, n): the order parameters are averaged over
    // the noise realizations first (⟨σˣ⟩ is linear in the state, so this is
    // the Pearson of the noise-averaged evolution), then windowed.
    let mut grid = String::new();
    grid.push_str(&format!("# qsync {VERSION} sweep grid\n"));
    grid.push_str(&format!("{},n,mean_pearson\n", param.name()));
    let mut per_value_transition = Vec::new();
    for (value_index, &value) in sweep.values.iter().enumerate() {
        let group: Vec<&RunOutput> = results
            .iter()
            .filter(|(vi, _, _, _)| *vi == value_index)
            .map(|(_, _, _, out)| out)
            .collect();
        let len = group.iter().map(|o| o.series.len()).min().unwrap_or(0);
        let count = group.len() as f64;
        let mut mean_sx1 = vec![0.0f64; len];
        let mut mean_sx2 = vec![0.0f64; len];
        for out in &group {
            let sx1 = out.series.column("sx1").expect("schema");
            let sx2 = out.series.column("sx2").expect("schema");
            for k in 0..len {
                mean_sx1[k] += sx1[k] / count;
                mean_sx2[k] += sx2[k] / count;
            }
        }
        let ns: Vec<u64> = group[0].series.records()[..len].iter().map(|r| r.n).collect();
        let pearson = qsync_core::metrics::pearson_series(
            &mean_sx1,
            &mean_sx2,
            scenario.metrics.window,
        );
        let means: Vec<f64> =
            (0..len).map(|k| pearson.get(k).copied().flatten().unwrap_or(f64::NAN)).collect();
        for k in 0..len {
            grid.push_str(&format!("{},{},{}\n", value, ns[k], fmt_float(means[k])));
        }
        per_value_transition.push((
            value,
            detect_transition(&ns, &means, scenario.metrics.threshold),
        ));
    }
    let grid_path = out_dir.join(format!("{}.grid.csv", scenario.output_stem()));
    write_atomic(&grid_path, grid.as_bytes())?;

    let summary = serde_json::json!({
        "name": scenario.name,
        "backend": scenario.backend.name(),
        "parameter": param.name(),
        "values": sweep.values,
        "runs_per_value": sweep.runs_per_value,
        "transitions": per_value_transition
            .iter()
            .map(|(v, t)| serde_json::json!({"value": v, "transition_n": t}))
            .collect::<Vec<_>>(),
        "wall_time_s": wall_clock(),
        "version": VERSION,
    });
    write_atomic(
        &out_dir.join(format!("{}.sweep.json", scenario.output_stem())),
        format!("{summary:#}\n").as_bytes(),
    )?;

    Ok(SweepResult { grid_csv: grid_path, per_value_transition, runs: results.len() })
}
