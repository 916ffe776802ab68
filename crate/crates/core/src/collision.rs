//! Exact stroboscopic collision-model engine.
//!
//! One collision evolves the joint qubit⊗qubit⊗qutrit state with
//! `U = U_I·U_S` (free evolution first, then interaction) and traces out the
//! ancilla. Quench schedules swap the prepared ancilla state between
//! collisions; optional stochastic noise enters the free-evolution segment
//! as `U_S = exp(−i(H_S + H_noise(n))τ)`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::qops::{
    expectation, free_hamiltonian, kron, matexp, sminus, sx, sy, DensityMatrix,
    Operator, PureState, C64,
};
use crate::series::{ObservableSeries, Record};
use crate::{math, rng};

/// Prepared ancilla state: either the pure parameterization
/// cosθ|g⟩ + sinθ·e^{iφ}|e⟩ or an explicit 3×3 density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum AncillaSpec {
    Pure { theta: f64, phi: f64 },
    Explicit(DensityMatrix),
}

impl AncillaSpec {
    /// Phase I preset: θ = π/4, φ = π (effective jump (σ⁻₁ − σ⁻₂)/√2).
    pub fn phase_i() -> Self {
        AncillaSpec::Pure { theta: core::f64::consts::FRAC_PI_4, phi: core::f64::consts::PI }
    }

    /// Phase II preset: θ = 0 (ancilla |g⟩, effective jump σ⁻₁).
    pub fn phase_ii() -> Self {
        AncillaSpec::Pure { theta: 0.0, phi: 0.0 }
    }

    /// Phase III preset: θ = π/4, φ = 0 (effective jump (σ⁻₁ + σ⁻₂)/√2).
    pub fn phase_iii() -> Self {
        AncillaSpec::Pure { theta: core::f64::consts::FRAC_PI_4, phi: 0.0 }
    }

    /// The pure-state vector, when in pure form.
    pub fn pure_state(&self) -> Option<PureState> {
        match self {
            AncillaSpec::Pure { theta, phi } => {
                let c = math::cos(*theta);
                let s = math::sin(*theta);
                Some(
                    PureState::new(vec![
                        C64::new(c, 0.0),
                        C64::new(s * math::cos(*phi), s * math::sin(*phi)),
                        C64::new(0.0, 0.0),
                    ])
                    .expect("unit norm by construction"),
                )
            }
            AncillaSpec::Explicit(_) => None,
        }
    }

    /// η_E as a 3×3 density matrix.
    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            AncillaSpec::Pure { .. } => Ok(self.pure_state().unwrap().density()),
            AncillaSpec::Explicit(rho) => {
                if rho.dim() != 3 {
                    return Err(Error::DimensionMismatch {
                        expected: 3,
                        got: rho.dim(),
                        context: "AncillaSpec::Explicit",
                    });
                }
                Ok(rho.clone())
            }
        }
    }
}

/// One quench segment: the ancilla used from collision index `start_n`
/// (0-based) until the next segment begins.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_n: u64,
    pub ancilla: AncillaSpec,
    pub label: String,
}

/// Ordered quench schedule. The paper's "quench after n = k" corresponds to
/// a segment with `start_n = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSchedule {
    segments: Vec<Segment>,
}

impl QuenchSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Invalid("schedule needs at least one segment".into()));
        }
        if segments[0].start_n != 0 {
            return Err(Error::Invalid("first schedule segment must start at 0".into()));
        }
        for w in segments.windows(2) {
            if w[1].start_n <= w[0].start_n {
                return Err(Error::Invalid("schedule start_n must strictly increase".into()));
            }
        }
        Ok(Self { segments })
    }

    /// Single-segment schedule.
    pub fn constant(ancilla: AncillaSpec, label: &str) -> Self {
        Self { segments: vec![Segment { start_n: 0, ancilla, label: label.to_string() }] }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segment governing the collision with 0-based index `n`.
    pub fn active(&self, n: u64) -> &Segment {
        let mut current = &self.segments[0];
        for seg in &self.segments {
            if seg.start_n <= n {
                current = seg;
            } else {
                break;
            }
        }
        current
    }
}

/// Which noise axes are driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseAxes {
    pub x: bool,
    pub y: bool,
}

impl Default for NoiseAxes {
    fn default() -> Self {
        Self { x: true, y: true }
    }
}

/// Per-collision stochastic field H_noise = Σ_j ξ^α_j(n)·σ^α_j with each
/// ξ drawn uniformly from [−ξ̄, ξ̄].
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub xi_bar: f64,
    pub seed: u64,
    pub axes: NoiseAxes,
}

impl NoiseSpec {
    pub fn new(xi_bar: f64, seed: u64) -> Result<Self> {
        if !(xi_bar >= 0.0) {
            return Err(Error::Invalid("xi_bar must be >= 0".into()));
        }
        Ok(Self { xi_bar, seed, axes: NoiseAxes::default() })
    }
}

/// The four draws for one collision: (ξ^x_1, ξ^y_1, ξ^x_2, ξ^y_2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub xi: [f64; 4],
}

const NOISE_STREAM: u64 = 0x6e6f6973;

/// Draw the noise amplitudes for collision `n`; deterministic in
/// (spec.seed, n).
pub fn sample_noise(spec: &NoiseSpec, n: u64) -> NoiseSample {
    let mut rng = rng::stream(spec.seed, n, NOISE_STREAM);
    let mut xi = [0.0f64; 4];
    for (k, slot) in xi.iter_mut().enumerate() {
        let u: f64 = rng.gen();
        let value = (2.0 * u - 1.0) * spec.xi_bar;
        let is_x = k % 2 == 0;
        *slot = if (is_x && spec.axes.x) || (!is_x && spec.axes.y) { value } else { 0.0 };
    }
    NoiseSample { xi }
}

/// H_noise = Σ_j ξ^α_j·σ^α_j for one drawn sample.
pub(crate) fn noise_hamiltonian_of(sample: &NoiseSample) -> Operator {
    noise_hamiltonian(sample)
}

fn noise_hamiltonian(sample: &NoiseSample) -> Operator {
    let mut h = sx(1).scale(C64::new(sample.xi[0], 0.0));
    h = &h + &sy(1).scale(C64::new(sample.xi[1], 0.0));
    h = &h + &sx(2).scale(C64::new(sample.xi[2], 0.0));
    h = &h + &sy(2).scale(C64::new(sample.xi[3], 0.0));
    h
}

/// H_I = g(σ⁻₁⊗|r⟩⟨g| + σ⁻₂⊗|r⟩⟨e| + H.c.) on qubit₁⊗qubit₂⊗qutrit.
pub fn build_interaction_hamiltonian(g: f64) -> Operator {
    let r_g = Operator::ketbra(3, 2, 0);
    let r_e = Operator::ketbra(3, 2, 1);
    let half = &kron(&sminus(1), &r_g) + &kron(&sminus(2), &r_e);
    (&half + &half.dagger()).scale(C64::new(g, 0.0))
}

/// The initial system state of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl InitialState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            InitialState::Pure(psi) => psi.density(),
            InitialState::Mixed(rho) => rho.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialState::Pure(psi) => psi.dim(),
            InitialState::Mixed(rho) => rho.dim(),
        }
    }
}

/// Full description of a collision-model run.
///
/// `omega_tau` and `g_sq_tau` are the dimensionless products ωτ and g²τ;
/// `tau` fixes the collision duration, so g = √(g²τ/τ) and the effective
/// continuous decay rate is γ = g²τ.
#[derive(Debug, Clone)]
pub struct CollisionConfig {
    pub omega_tau: f64,
    pub g_sq_tau: f64,
    pub tau: f64,
    pub n_collisions: u64,
    pub initial_state: InitialState,
    pub schedule: QuenchSchedule,
    pub noise: Option<NoiseSpec>,
    /// When set, the stochastic field also enters the interaction segment:
    /// U_I = exp(−i(H_I + H_noise⊗I₃)τ). Off by default.
    pub noise_in_interaction: bool,
}

impl CollisionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::Invalid("tau must be > 0".into()));
        }
        if self.n_collisions < 1 {
            return Err(Error::Invalid("n_collisions must be >= 1".into()));
        }
        if self.initial_state.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: self.initial_state.dim(),
                context: "CollisionConfig::initial_state",
            });
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        self.omega_tau / self.tau
    }

    pub fn g(&self) -> f64 {
        math::sqrt(self.g_sq_tau / self.tau)
    }

    /// Effective Lindblad rate γ = g²τ.
    pub fn gamma(&self) -> f64 {
        self.g_sq_tau
    }

    /// U_S = exp(−iH_Sτ) on the two-qubit space, without noise.
    pub fn free_unitary(&self) -> Operator {
        let h_s = free_hamiltonian(self.omega());
        matexp(&h_s, C64::new(0.0, -self.tau))
    }
}

/// Stepping engine; owns the current state and caches the collision
/// unitaries between quench boundaries.
pub struct CollisionEngine {
    cfg: CollisionConfig,
    rho: DensityMatrix,
    n: u64,
    h_s: Operator,
    u_int: Operator,
    /// kron(U_S, I₃), valid only while no noise is active.
    u_joint_free: Option<Operator>,
}

impl CollisionEngine {
    pub fn new(cfg: CollisionConfig) -> Result<Self> {
        cfg.validate()?;
        let h_s = free_hamiltonian(cfg.omega());
        let u_int = matexp(&build_interaction_hamiltonian(cfg.g()), C64::new(0.0, -cfg.tau));
        let u_joint_free = if cfg.noise.is_none() {
            let u_s = matexp(&h_s, C64::new(0.0, -cfg.tau));
            Some(kron(&u_s, &Operator::identity(3)))
        } else {
            None
        };
        let rho = cfg.initial_state.density();
        Ok(Self { cfg, rho, n: 0, h_s, u_int, u_joint_free })
    }

    pub fn config(&self) -> &CollisionConfig {
        &self.cfg
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    /// Number of collisions applied so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn current_segment(&self) -> &Segment {
        // Record k carries the label of the collision that produced it;
        // the initial record carries the first segment's label.
        let idx = self.n.saturating_sub(1);
        self.cfg.schedule.active(idx)
    }

    /// Apply one collision.
    pub fn step(&mut self) -> Result<()> {
        let seg = self.cfg.schedule.active(self.n).clone();
        let eta = seg.ancilla.density()?;
        let noise_sample = self.cfg.noise.as_ref().map(|spec| sample_noise(spec, self.n));

        let u_joint = match (&noise_sample, &self.u_joint_free) {
            (None, Some(cached)) => {
                let full = self.u_int.matmul(cached);
                full
            }
            (Some(sample), _) => {
                let h_noise = noise_hamiltonian(sample);
                let h_free = &self.h_s + &h_noise;
                let u_s = matexp(&h_free, C64::new(0.0, -self.cfg.tau));
                let u_s_joint = kron(&u_s, &Operator::identity(3));
                let u_int = if self.cfg.noise_in_interaction {
                    let h_int = &build_interaction_hamiltonian(self.cfg.g())
                        + &kron(&h_noise, &Operator::identity(3));
                    matexp(&h_int, C64::new(0.0, -self.cfg.tau))
                } else {
                    self.u_int.clone()
                };
                u_int.matmul(&u_s_joint)
            }
            (None, None) => unreachable!("cache exists exactly when noise is off"),
        };

        let joint = kron(self.rho.operator(), eta.operator());
        let evolved = u_joint.matmul(&joint).matmul(&u_joint.dagger());
        let reduced = crate::qops::partial_trace_op(&evolved, &[4, 3], &[0])?;
        self.rho = DensityMatrix::from_op_unchecked(reduced);
        self.n += 1;
        Ok(())
    }
}

/// One collision applied to an explicit state. `noise_draw` must be present
/// exactly when `cfg.noise` is set.
pub fn collision_step(
    rho: &DensityMatrix,
    ancilla: &AncillaSpec,
    cfg: &CollisionConfig,
    noise_draw: Option<&NoiseSample>,
) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
            context: "collision_step",
        });
    }
    if cfg.noise.is_some() != noise_draw.is_some() {
        return Err(Error::Invalid(
            "noise_draw must be present exactly when cfg.noise is set".into(),
        ));
    }
    let eta = ancilla.density()?;
    let h_s = free_hamiltonian(cfg.omega());
    let h_free = match noise_draw {
        Some(sample) => &h_s + &noise_hamiltonian(sample),
        None => h_s,
    };
    let u_s = matexp(&h_free, C64::new(0.0, -cfg.tau));
    let u_int = if cfg.noise_in_interaction && noise_draw.is_some() {
        let h_int = &build_interaction_hamiltonian(cfg.g())
            + &kron(&noise_hamiltonian(noise_draw.unwrap()), &Operator::identity(3));
        matexp(&h_int, C64::new(0.0, -cfg.tau))
    } else {
        matexp(&build_interaction_hamiltonian(cfg.g()), C64::new(0.0, -cfg.tau))
    };
    let u = u_int.matmul(&kron(&u_s, &Operator::identity(3)));
    let joint = kron(rho.operator(), eta.operator());
    let evolved = u.matmul(&joint).matmul(&u.dagger());
    let reduced = crate::qops::partial_trace_op(&evolved, &[4, 3], &[0])?;
    Ok(DensityMatrix::from_op_unchecked(reduced))
}

/// Run the full schedule, recording the requested expectation values per
/// collision (including the initial state, so the series has
/// `n_collisions + 1` records).
pub fn run_sequence(
    cfg: &CollisionConfig,
    observables: &[(String, Operator)],
) -> Result<ObservableSeries> {
    let mut engine = CollisionEngine::new(cfg.clone())?;
    let labels: Vec<String> = observables.iter().map(|(l, _)| l.clone()).collect();
    let mut series = ObservableSeries::new(labels);

    let record = |engine: &CollisionEngine, series: &mut ObservableSeries| -> Result<()> {
        let mut values = Vec::with_capacity(observables.len());
        for (_, op) in observables {
            values.push(expectation(engine.state(), op)?.re);
        }
        series.push(Record {
            n: engine.n(),
            t: engine.n() as f64 * cfg.tau,
            values,
            phase: engine.current_segment().label.clone(),
        })
    };

    record(&engine, &mut series)?;
    for _ in 0..cfg.n_collisions {
        engine.step()?;
        record(&engine, &mut series)?;
    }
    Ok(series)
}

/// The six single-qubit Pauli expectations in the fixed CSV order.
pub fn standard_observables() -> Vec<(String, Operator)> {
    vec![
        ("sx1".to_string(), sx(1)),
        ("sy1".to_string(), sy(1)),
        ("sz1".to_string(), sz_obs(1)),
        ("sx2".to_string(), sx(2)),
        ("sy2".to_string(), sy(2)),
        ("sz2".to_string(), sz_obs(2)),
    ]
}

fn sz_obs(j: usize) -> Operator {
    crate::qops::sz(j)
}

/// The Fig. 2 initial state of the reference runs (renormalized on ingest).
pub fn reference_initial_state() -> PureState {
    PureState::new(vec![
        C64::new(0.8579, 0.2631),
        C64::new(0.2774, 0.3013),
        C64::new(0.0222, -0.1480),
        C64::new(0.0428, -0.0532),
    ])
    .expect("nonzero norm")
}

/// (|↑↑⟩ + |↓↑⟩)/√2, the noise-study initial state.
pub fn near_in_phase_initial_state() -> PureState {
    PureState::new(vec![
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
    ])
    .expect("unit norm")
}
