//! Scenario execution: dispatch to a dynamics backend and assemble the
//! fixed-schema observable table
//! (n, t, sx1, sy1, sz1, sx2, sy2, sz2, pearson, concurrence, mutual_info,
//! purity, phase).

use qsync_core::circuit::{
    build_run_program, measurement_probabilities, sample_counts_seeded, simulate_density,
    system_density_physics, z_expectation_from_counts, Counts, SystemPrep,
};
use qsync_core::collision::{CollisionEngine, InitialState};
use qsync_core::lindblad::{
    effective_model, evolve_states, reduce_initial_state, reduced_model, uniform_grid,
};
use qsync_core::metrics::{concurrence, mutual_information, pearson_series};
use qsync_core::qops::{expectation, kron, DensityMatrix, Operator, PureState};
use qsync_core::series::{ObservableSeries, Record};
use qsync_core::sse::{run_trajectory, SseConfig};

use crate::error::{CliError, Result};
use crate::scenario::{Backend, InitialStateSpec, Scenario};

/// Value-column labels in CSV order (plus n, t, phase around them).
pub const VALUE_COLUMNS: [&str; 10] = [
    "sx1",
    "sy1",
    "sz1",
    "sx2",
    "sy2",
    "sz2",
    "pearson",
    "concurrence",
    "mutual_info",
    "purity",
];

pub struct RunOutput {
    pub series: ObservableSeries,
    pub final_pearson: Option<f64>,
    pub transition_n: Option<u64>,
    /// Extra files to place next to the CSV: (suffix, content).
    pub artifacts: Vec<(String, String)>,
}

struct Row {
    n: u64,
    t: f64,
    values: [f64; 6],
    concurrence: f64,
    mutual_info: f64,
    purity: f64,
    phase: String,
}

struct Collector {
    observables: Vec<(String, Operator)>,
    rows: Vec<Row>,
}

impl Collector {
    fn new() -> Self {
        Self { observables: qsync_core::collision::standard_observables(), rows: Vec::new() }
    }

    fn push_density(&mut self, n: u64, t: f64, rho: &DensityMatrix, phase: &str) -> Result<()> {
        let mut values = [0.0; 6];
        for (k, (_, op)) in self.observables.iter().enumerate() {
            values[k] = expectation(rho, op)?.re;
        }
        self.rows.push(Row {
            n,
            t,
            values,
            concurrence: concurrence(rho)?,
            mutual_info: mutual_information(rho)?,
            purity: rho.purity(),
            phase: phase.to_string(),
        });
        Ok(())
    }

    fn push_pure(&mut self, n: u64, t: f64, psi: &PureState, phase: &str) -> Result<()> {
        self.push_density(n, t, &psi.density(), phase)
    }

    /// Override the measured σˣ entries of the last row (shot estimates).
    fn override_sx(&mut self, sx1: f64, sx2: f64) {
        if let Some(row) = self.rows.last_mut() {
            row.values[0] = sx1;
            row.values[3] = sx2;
        }
    }

    fn into_series(self, window: usize) -> Result<ObservableSeries> {
        let sx1: Vec<f64> = self.rows.iter().map(|r| r.values[0]).collect();
        let sx2: Vec<f64> = self.rows.iter().map(|r| r.values[3]).collect();
        let pearson = pearson_series(&sx1, &sx2, window);

        let labels: Vec<String> = VALUE_COLUMNS.iter().map(|s| s.to_string()).collect();
        let mut series = ObservableSeries::new(labels);
        for (idx, row) in self.rows.iter().enumerate() {
            let p = pearson.get(idx).copied().flatten().unwrap_or(f64::NAN);
            let values = vec![
                row.values[0],
                row.values[1],
                row.values[2],
                row.values[3],
                row.values[4],
                row.values[5],
                p,
                row.concurrence,
                row.mutual_info,
                row.purity,
            ];
            series
                .push(Record { n: row.n, t: row.t, values, phase: row.phase.clone() })
                .map_err(CliError::from)?;
        }
        Ok(series)
    }
}

/// Smallest n whose Pearson window is ≤ −threshold after some earlier
/// window reached ≥ +threshold; NaN entries (undefined windows) are skipped.
pub fn detect_transition(ns: &[u64], pearson: &[f64], threshold: f64) -> Option<u64> {
    let mut armed = false;
    for (k, &p) in pearson.iter().enumerate() {
        if p.is_nan() {
            continue;
        }
        if !armed && p >= threshold {
            armed = true;
        } else if armed && p <= -threshold {
            return Some(ns[k]);
        }
    }
    None
}

/// Execute the scenario's backend and assemble the output table.
pub fn run_backend(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let collector = match scenario.backend {
        Backend::Qcm => run_qcm(scenario)?,
        Backend::Lindblad => run_lindblad(scenario, false)?,
        Backend::LindbladReduced => run_lindblad(scenario, true)?,
        Backend::QutritEmission => run_qutrit_emission(scenario)?,
        Backend::Sse => run_sse(scenario)?,
        Backend::CircuitIdeal => return finish(scenario, run_circuit(scenario, false)?),
        Backend::CircuitNoisy => return finish(scenario, run_circuit(scenario, true)?),
    };
    finish(scenario, (collector, Vec::new()))
}

fn finish(
    scenario: &Scenario,
    (collector, artifacts): (Collector, Vec<(String, String)>),
) -> Result<RunOutput> {
    let series = collector.into_series(scenario.metrics.window)?;
    let ns: Vec<u64> = series.records().iter().map(|r| r.n).collect();
    let pearson = series.column("pearson").expect("pearson column");
    let final_pearson = pearson.iter().rev().find(|p| !p.is_nan()).copied();
    let transition_n = detect_transition(&ns, &pearson, scenario.metrics.threshold);
    Ok(RunOutput { series, final_pearson, transition_n, artifacts })
}

fn run_qcm(scenario: &Scenario) -> Result<Collector> {
    let cfg = scenario.collision_config()?;
    let mut engine = CollisionEngine::new(cfg.clone())?;
    let mut collector = Collector::new();
    collector.push_density(0, 0.0, engine.state(), &engine.current_segment().label)?;
    for k in 1..=cfg.n_collisions {
        engine.step()?;
        collector.push_density(
            k,
            k as f64 * cfg.tau,
            engine.state(),
            &engine.current_segment().label,
        )?;
    }
    Ok(collector)
}

fn run_lindblad(scenario: &Scenario, reduced: bool) -> Result<Collector> {
    if scenario.noise.is_some() {
        return Err(CliError::Validation(
            "the master-equation backends do not support [noise]; use qcm or sse".into(),
        ));
    }
    let cfg = scenario.collision_config()?;
    let segments = scenario.pure_segments()?;
    let omega = cfg.omega();
    let gamma = cfg.gamma();
    let tau = cfg.tau;

    let mut state = cfg.initial_state.density();
    if reduced {
        state = reduce_initial_state(&state)?;
    }
    let mut collector = Collector::new();
    for (idx, (start_n, theta, phi, label)) in segments.iter().enumerate() {
        let end_n = segments
            .get(idx + 1)
            .map(|next| next.0)
            .unwrap_or(cfg.n_collisions);
        if end_n <= *start_n {
            continue;
        }
        let steps = (end_n - start_n) as usize;
        let model = if reduced {
            reduced_model(*theta, *phi, omega, gamma)
        } else {
            effective_model(*theta, *phi, omega, gamma)
        };
        let grid = uniform_grid(tau, steps);
        let states = evolve_states(&model, &state, &grid)?;
        for (k, rho) in states.iter().enumerate() {
            if k == 0 && idx > 0 {
                continue; // segment boundary already recorded
            }
            let n = start_n + k as u64;
            collector.push_density(n, n as f64 * tau, rho, label)?;
        }
        state = states.last().expect("nonempty grid").clone();
    }
    Ok(collector)
}

fn run_qutrit_emission(scenario: &Scenario) -> Result<Collector> {
    let cfg = scenario.collision_config()?;
    let segments = scenario.pure_segments()?;
    let (_, theta, phi, label) = segments[0].clone();
    let em = scenario.emission.as_ref().expect("validated");

    let model = qsync_core::lindblad::qutrit_emission_model(em.gamma, cfg.g(), cfg.omega())?;
    let ancilla = qsync_core::collision::AncillaSpec::Pure { theta, phi }
        .pure_state()
        .expect("pure segment");
    let joint = DensityMatrix::new(kron(
        cfg.initial_state.density().operator(),
        ancilla.density().operator(),
    ))?;
    let grid = uniform_grid(cfg.tau, cfg.n_collisions as usize);
    let states = evolve_states(&model, &joint, &grid)?;
    let mut collector = Collector::new();
    for (k, rho) in states.iter().enumerate() {
        let sys = qsync_core::qops::partial_trace(rho, &[4, 3], &[0])?;
        collector.push_density(k as u64, grid[k], &sys, &label)?;
    }
    Ok(collector)
}

fn run_sse(scenario: &Scenario) -> Result<Collector> {
    let cfg = scenario.collision_config()?;
    let sse = scenario.sse.as_ref().expect("validated");
    let segments = scenario.pure_segments()?;
    let record_every = (cfg.tau / sse.dt).round() as u64;
    let omega = cfg.omega();
    let gamma = cfg.gamma();

    let mut psi = match &cfg.initial_state {
        InitialState::Pure(psi) => psi.clone(),
        InitialState::Mixed(_) => {
            return Err(CliError::Validation("sse requires a pure initial state".into()))
        }
    };
    let mut collector = Collector::new();
    for (idx, (start_n, theta, phi, label)) in segments.iter().enumerate() {
        let end_n = segments
            .get(idx + 1)
            .map(|next| next.0)
            .unwrap_or(cfg.n_collisions);
        if end_n <= *start_n {
            continue;
        }
        let collisions = end_n - start_n;
        let mut sse_cfg = SseConfig::new(
            effective_model(*theta, *phi, omega, gamma),
            sse.dt,
            collisions * record_every,
            scenario.seed,
        )
        .map_err(CliError::from)?;
        sse_cfg.record_every = record_every;
        sse_cfg.t_offset = *start_n as f64 * cfg.tau;
        sse_cfg.stream_salt = idx as u64;
        sse_cfg.noise = cfg.noise.clone().map(|spec| (spec, cfg.tau));

        let traj = run_trajectory(&sse_cfg, &psi, 0)?;
        for (k, state) in traj.states.iter().enumerate() {
            if k == 0 && idx > 0 {
                continue;
            }
            let n = start_n + k as u64;
            collector.push_pure(n, n as f64 * cfg.tau, state, label)?;
        }
        psi = traj.states.last().expect("nonempty trajectory").clone();
    }
    Ok(collector)
}

/// Map a scenario initial state onto the circuit preparation stage.
pub fn circuit_system_prep(spec: &InitialStateSpec) -> Result<SystemPrep> {
    match spec {
        InitialStateSpec::Preset(name) => match name.as_str() {
            "near-in-phase" => Ok(SystemPrep::NearInPhase),
            "down-down" => Ok(SystemPrep::DownDown),
            other => Err(CliError::Validation(format!(
                "circuit backends support initial_state presets `near-in-phase` and \
                 `down-down` (or explicit product-state amplitudes), got `{other}`"
            ))),
        },
        InitialStateSpec::Amplitudes(_) => {
            let psi = spec.build()?;
            product_prep(&psi)
        }
    }
}

/// Factor a two-qubit pure state into single-qubit Bloch angles; errors for
/// entangled states, which the circuit preparation stage cannot make with
/// local gates.
fn product_prep(psi: &PureState) -> Result<SystemPrep> {
    let a = psi.amplitudes();
    // Reshape into M[q1, q2] over (↑, ↓) and test rank one.
    let det = a[0] * a[3] - a[1] * a[2];
    if det.norm() > 1e-10 {
        return Err(CliError::Validation(
            "circuit backends need a product initial state (local preparation only)".into(),
        ));
    }
    // Dominant row gives qubit 2; project rows onto it for qubit 1.
    let rows = [[a[0], a[1]], [a[2], a[3]]];
    let norms = [
        rows[0][0].norm_sqr() + rows[0][1].norm_sqr(),
        rows[1][0].norm_sqr() + rows[1][1].norm_sqr(),
    ];
    let lead = if norms[0] >= norms[1] { 0 } else { 1 };
    let scale = norms[lead].sqrt();
    let q2 = [rows[lead][0] / scale, rows[lead][1] / scale];
    let q1 = [
        rows[0][0] * q2[0].conj() + rows[0][1] * q2[1].conj(),
        rows[1][0] * q2[0].conj() + rows[1][1] * q2[1].conj(),
    ];
    // Physics amplitudes (↑, ↓) to circuit Bloch angles over (|0⟩=↓, |1⟩=↑).
    let bloch = |up: qsync_core::qops::C64, down: qsync_core::qops::C64| {
        let theta = 2.0 * up.norm().atan2(down.norm());
        let phi = up.arg() - down.arg();
        (theta, phi)
    };
    Ok(SystemPrep::Product { s0: bloch(q1[0], q1[1]), s1: bloch(q2[0], q2[1]) })
}

fn run_circuit(scenario: &Scenario, noisy: bool) -> Result<(Collector, Vec<(String, String)>)> {
    if scenario.noise.is_some() {
        return Err(CliError::Validation(
            "circuit backends model noise via [circuit], not [noise]".into(),
        ));
    }
    let cfg = scenario.collision_config()?;
    let circuit = scenario.circuit.clone().unwrap_or_default();
    let refresh = circuit.refresh_strategy()?;
    let prep = circuit_system_prep(&scenario.physics.initial_state)?;
    let noise_spec = circuit.noise_spec();
    let shots = circuit.shots;
    let repeats = circuit.repeats.max(1);

    let mut collector = Collector::new();
    let mut counts_log: Vec<(u64, Counts)> = Vec::new();

    for n in 0..=cfg.n_collisions {
        // Destructive measurement: every collision count restarts from the
        // initial state.
        let prog = build_run_program(&cfg, n, &prep, refresh, false)?;
        let rho_full =
            simulate_density(&prog, if noisy { Some(&noise_spec) } else { None })?;
        let rho_sys = system_density_physics(&rho_full, prog.n_qubits)?;
        let label = cfg.schedule.active(n.saturating_sub(1)).label.clone();
        collector.push_density(n, n as f64 * cfg.tau, &rho_sys, &label)?;

        if noisy {
            let shots = shots.expect("validated");
            let measured = build_run_program(&cfg, n, &prep, refresh, true)?;
            // The noisy final state is deterministic; only the shot
            // sampling is stochastic, so simulate once and sample per
            // repeat.
            let probs = measurement_probabilities(&measured, Some(&noise_spec))?;
            let mut sx1_acc = 0.0;
            let mut sx2_acc = 0.0;
            for repeat in 0..repeats {
                let seed = qsync_core::rng::derive_seed(scenario.seed, n, repeat);
                let counts = sample_counts_seeded(&probs, shots, seed);
                sx1_acc += z_expectation_from_counts(&counts, 0);
                sx2_acc += z_expectation_from_counts(&counts, 1);
                if repeat == 0 {
                    counts_log.push((n, counts));
                }
            }
            collector.override_sx(sx1_acc / repeats as f64, sx2_acc / repeats as f64);
        }
    }

    let mut artifacts = Vec::new();
    if circuit.export_program {
        let prog = build_run_program(&cfg, cfg.n_collisions, &prep, refresh, true)?;
        artifacts.push(("program.txt".to_string(), crate::progfmt::format_program(&prog)));
    }
    if noisy {
        artifacts.push(("counts.json".to_string(), crate::progfmt::counts_log_json(&counts_log)));
    }
    Ok((collector, artifacts))
}

/// Run the same scenario under two backends and report the worst
/// per-observable deviation over the shared records.
pub struct Comparison {
    pub a: RunOutput,
    pub b: RunOutput,
    pub max_deviation: Vec<(String, f64)>,
}

pub fn compare_backends(scenario: &Scenario, a: Backend, b: Backend) -> Result<Comparison> {
    let mut scenario_a = scenario.clone();
    scenario_a.backend = a;
    scenario_a.validate()?;
    let mut scenario_b = scenario.clone();
    scenario_b.backend = b;
    scenario_b.validate()?;

    let out_a = run_backend(&scenario_a)?;
    let out_b = run_backend(&scenario_b)?;

    let shared = out_a.series.len().min(out_b.series.len());
    let mut max_deviation = Vec::new();
    for label in VALUE_COLUMNS {
        let col_a = out_a.series.column(label).expect("fixed schema");
        let col_b = out_b.series.column(label).expect("fixed schema");
        let mut worst = 0.0f64;
        for k in 0..shared {
            let (x, y) = (col_a[k], col_b[k]);
            if x.is_nan() || y.is_nan() {
                continue;
            }
            worst = worst.max((x - y).abs());
        }
        max_deviation.push((label.to_string(), worst));
    }
    Ok(Comparison { a: out_a, b: out_b, max_deviation })
}
