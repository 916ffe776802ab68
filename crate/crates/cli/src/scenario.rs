//! Scenario files: a strict TOML schema with flat per-module sections.
//! Unknown keys are rejected; defaults are filled in and echoed back into
//! the output provenance header.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use qsync_core::collision::{
    AncillaSpec, CollisionConfig, InitialState, NoiseAxes, NoiseSpec, QuenchSchedule, Segment,
};
use qsync_core::qops::{C64, PureState};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Qcm,
    Lindblad,
    LindbladReduced,
    QutritEmission,
    Sse,
    CircuitIdeal,
    CircuitNoisy,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Qcm => "qcm",
            Backend::Lindblad => "lindblad",
            Backend::LindbladReduced => "lindblad-reduced",
            Backend::QutritEmission => "qutrit-emission",
            Backend::Sse => "sse",
            Backend::CircuitIdeal => "circuit-ideal",
            Backend::CircuitNoisy => "circuit-noisy",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "qcm" => Ok(Backend::Qcm),
            "lindblad" => Ok(Backend::Lindblad),
            "lindblad-reduced" => Ok(Backend::LindbladReduced),
            "qutrit-emission" => Ok(Backend::QutritEmission),
            "sse" => Ok(Backend::Sse),
            "circuit-ideal" => Ok(Backend::CircuitIdeal),
            "circuit-noisy" => Ok(Backend::CircuitNoisy),
            other => Err(CliError::Validation(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub omega_tau: f64,
    pub g_sq_tau: f64,
    pub tau: f64,
    pub n_collisions: u64,
    pub initial_state: InitialStateSpec,
}

/// Either a named preset or explicit complex amplitudes `[[re, im]; 4]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateSpec {
    Preset(String),
    Amplitudes(Vec<[f64; 2]>),
}

impl InitialStateSpec {
    pub fn build(&self) -> Result<PureState> {
        match self {
            InitialStateSpec::Preset(name) => match name.as_str() {
                "fig2" => Ok(qsync_core::collision::reference_initial_state()),
                "near-in-phase" => Ok(qsync_core::collision::near_in_phase_initial_state()),
                "down-down" => Ok(qsync_core::qops::down_down()),
                "up-up" => Ok(qsync_core::qops::up_up()),
                "symmetric" => Ok(qsync_core::qops::symmetric_state()),
                "antisymmetric" => Ok(qsync_core::qops::antisymmetric_state()),
                other => Err(CliError::Validation(format!(
                    "unknown initial_state preset `{other}`"
                ))),
            },
            InitialStateSpec::Amplitudes(amps) => {
                if amps.len() != 4 {
                    return Err(CliError::Validation(
                        "initial_state amplitudes must have 4 entries".into(),
                    ));
                }
                let v: Vec<C64> = amps.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                PureState::new(v).map_err(|e| CliError::Validation(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start_n: u64,
    /// Named preset "I" | "II" | "III"; alternative to explicit angles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
    /// θ in radians (with `phi`), alternative to `phase`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SegmentSpec {
    pub fn build(&self) -> Result<Segment> {
        let (ancilla, default_label) = match (&self.phase, self.theta, self.phi) {
            (Some(name), None, None) => match name.as_str() {
                "I" => (AncillaSpec::phase_i(), "I"),
                "II" => (AncillaSpec::phase_ii(), "II"),
                "III" => (AncillaSpec::phase_iii(), "III"),
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown phase preset `{other}` (use I, II, III)"
                    )))
                }
            },
            (None, Some(theta), phi) => {
                (AncillaSpec::Pure { theta, phi: phi.unwrap_or(0.0) }, "custom")
            }
            (Some(_), _, _) => {
                return Err(CliError::Validation(
                    "segment: give either `phase` or `theta`/`phi`, not both".into(),
                ))
            }
            (None, None, _) => {
                return Err(CliError::Validation(
                    "segment: missing `phase` or `theta`".into(),
                ))
            }
        };
        Ok(Segment {
            start_n: self.start_n,
            ancilla,
            label: self.label.clone().unwrap_or_else(|| default_label.to_string()),
        })
    }
}

fn default_window() -> usize {
    140
}

fn default_threshold() -> f64 {
    0.9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    /// Pearson window Δn (inclusive window [n, n+Δn]).
    #[serde(default = "default_window")]
    pub window: usize,
    /// detect_transition threshold.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self { window: default_window(), threshold: default_threshold() }
    }
}

fn default_axes() -> Vec<String> {
    vec!["x".to_string(), "y".to_string()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub xi_bar: f64,
    #[serde(default = "default_axes")]
    pub axes: Vec<String>,
    /// When set, the stochastic field also enters the interaction unitary.
    #[serde(default)]
    pub in_interaction: bool,
}

impl NoiseSection {
    pub fn build(&self, seed: u64) -> Result<NoiseSpec> {
        let mut axes = NoiseAxes { x: false, y: false };
        for axis in &self.axes {
            match axis.as_str() {
                "x" => axes.x = true,
                "y" => axes.y = true,
                other => {
                    return Err(CliError::Validation(format!(
                        "noise axis must be x or y, got `{other}`"
                    )))
                }
            }
        }
        let mut spec = NoiseSpec::new(self.xi_bar, seed)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        spec.axes = axes;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SseSection {
    pub dt: f64,
}

fn default_repeats() -> u64 {
    1
}

fn default_refresh() -> String {
    "reset".to_string()
}

fn default_depol_1q() -> f64 {
    1e-3
}

fn default_depol_2q() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default = "default_repeats")]
    pub repeats: u64,
    #[serde(default = "default_refresh")]
    pub refresh: String,
    #[serde(default = "default_depol_1q")]
    pub depolarizing_1q: f64,
    #[serde(default = "default_depol_2q")]
    pub depolarizing_2q: f64,
    #[serde(default)]
    pub amp_damping: f64,
    #[serde(default)]
    pub dephasing: f64,
    /// Export the assembled gate program next to the CSV.
    #[serde(default)]
    pub export_program: bool,
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self {
            shots: None,
            repeats: default_repeats(),
            refresh: default_refresh(),
            depolarizing_1q: default_depol_1q(),
            depolarizing_2q: default_depol_2q(),
            amp_damping: 0.0,
            dephasing: 0.0,
            export_program: false,
        }
    }
}

impl CircuitSection {
    pub fn refresh_strategy(&self) -> Result<qsync_core::circuit::RefreshStrategy> {
        match self.refresh.as_str() {
            "reset" => Ok(qsync_core::circuit::RefreshStrategy::Reset),
            "swap-train" => Ok(qsync_core::circuit::RefreshStrategy::SwapTrain { pairs: 1 }),
            other => Err(CliError::Validation(format!(
                "circuit.refresh must be `reset` or `swap-train`, got `{other}`"
            ))),
        }
    }

    pub fn noise_spec(&self) -> qsync_core::circuit::NoiseChannelSpec {
        qsync_core::circuit::NoiseChannelSpec {
            depol_1q: self.depolarizing_1q,
            depol_2q: self.depolarizing_2q,
            amp_damping: self.amp_damping,
            dephasing: self.dephasing,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionSection {
    /// Ancilla spontaneous-emission rate γ for the qutrit-emission backend.
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
    pub runs_per_value: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub backend: Backend,
    pub seed: u64,
    /// Output file stem; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Emit a companion gnuplot script next to the CSV.
    #[serde(default)]
    pub plot_script: bool,
    pub physics: PhysicsSection,
    pub segments: Vec<SegmentSpec>,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sse: Option<SseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission: Option<EmissionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl Scenario {
    pub fn output_stem(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.name)
    }

    /// Backend-specific required sections; errors name the missing field.
    pub fn validate(&self) -> Result<()> {
        if self.physics.tau <= 0.0 {
            return Err(CliError::Validation("physics.tau must be > 0".into()));
        }
        if self.physics.n_collisions == 0 {
            return Err(CliError::Validation("physics.n_collisions must be >= 1".into()));
        }
        if self.segments.is_empty() {
            return Err(CliError::Validation("at least one [[segments]] entry required".into()));
        }
        self.schedule()?;
        self.physics.initial_state.build()?;
        if self.metrics.window < 2 {
            return Err(CliError::Validation("metrics.window must be >= 2".into()));
        }
        match self.backend {
            Backend::Sse => {
                let sse = self
                    .sse
                    .as_ref()
                    .ok_or_else(|| CliError::Validation("missing sse.dt".into()))?;
                if sse.dt <= 0.0 {
                    return Err(CliError::Validation("sse.dt must be > 0".into()));
                }
                let ratio = self.physics.tau / sse.dt;
                if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
                    return Err(CliError::Validation(
                        "physics.tau must be an integer multiple of sse.dt".into(),
                    ));
                }
            }
            Backend::CircuitNoisy => {
                let circuit = self.circuit.clone().unwrap_or_default();
                if circuit.shots.is_none() {
                    return Err(CliError::Validation("missing circuit.shots".into()));
                }
                circuit.refresh_strategy()?;
                circuit
                    .noise_spec()
                    .validate()
                    .map_err(|e| CliError::Validation(e.to_string()))?;
            }
            Backend::CircuitIdeal => {
                self.circuit.clone().unwrap_or_default().refresh_strategy()?;
            }
            Backend::QutritEmission => {
                let em = self
                    .emission
                    .as_ref()
                    .ok_or_else(|| CliError::Validation("missing emission.gamma".into()))?;
                if em.gamma <= 0.0 {
                    return Err(CliError::Validation("emission.gamma must be > 0".into()));
                }
                if self.segments.len() != 1 {
                    return Err(CliError::Validation(
                        "qutrit-emission supports a single schedule segment".into(),
                    ));
                }
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() || sweep.runs_per_value == 0 {
                return Err(CliError::Validation(
                    "sweep needs nonempty values and runs_per_value >= 1".into(),
                ));
            }
            crate::sweep::SweepParameter::parse(&sweep.parameter)?;
        }
        if let Some(noise) = &self.noise {
            noise.build(self.seed)?;
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<QuenchSchedule> {
        let segments: Result<Vec<Segment>> = self.segments.iter().map(|s| s.build()).collect();
        QuenchSchedule::new(segments?).map_err(|e| CliError::Validation(e.to_string()))
    }

    /// The core collision configuration this scenario describes.
    pub fn collision_config(&self) -> Result<CollisionConfig> {
        let noise = match &self.noise {
            Some(section) => Some(section.build(self.seed)?),
            None => None,
        };
        let cfg = CollisionConfig {
            omega_tau: self.physics.omega_tau,
            g_sq_tau: self.physics.g_sq_tau,
            tau: self.physics.tau,
            n_collisions: self.physics.n_collisions,
            initial_state: InitialState::Pure(self.physics.initial_state.build()?),
            schedule: self.schedule()?,
            noise,
            noise_in_interaction: self.noise.as_ref().map_or(false, |n| n.in_interaction),
        };
        cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(cfg)
    }

    /// Pure (θ, φ) parameters per segment, for the master-equation and SSE
    /// backends.
    pub fn pure_segments(&self) -> Result<Vec<(u64, f64, f64, String)>> {
        self.segments
            .iter()
            .map(|s| {
                let seg = s.build()?;
                match seg.ancilla {
                    AncillaSpec::Pure { theta, phi } => {
                        Ok((seg.start_n, theta, phi, seg.label))
                    }
                    AncillaSpec::Explicit(_) => Err(CliError::Validation(
                        "this backend requires pure (theta, phi) segments".into(),
                    )),
                }
            })
            .collect()
    }
}

/// Parse and fully validate a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let scenario: Scenario =
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("parse error: {e}")))?;
    scenario.validate()?;
    Ok(scenario)
}

/// Convenience used by tests and docs: the named phase angles.
pub fn phase_angles(phase: &str) -> Option<(f64, f64)> {
    match phase {
        "I" => Some((FRAC_PI_4, PI)),
        "II" => Some((0.0, 0.0)),
        "III" => Some((FRAC_PI_4, 0.0)),
        _ => None,
    }
}
