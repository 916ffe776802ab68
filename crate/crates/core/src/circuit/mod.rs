//! Gate-level realization of the collision model.
//!
//! Register layout: qubits (s₀, s₁, a₀, a₁) = indices (0, 1, 2, 3), qubit 0
//! being the leftmost (most significant) tensor factor. Circuit
//! convention: |0⟩ is the ground state |↓⟩, so the physics basis
//! (|↑↑⟩,|↑↓⟩,|↓↑⟩,|↓↓⟩) maps to circuit indices (3, 2, 1, 0) on the system
//! pair.
//!
//! The qutrit ancilla is encoded on (a₀, a₁) as |g⟩↦|00⟩, |e⟩↦|01⟩,
//! |r⟩↦|10⟩; |11⟩ stays unreachable under noiseless dynamics.
//!
//! One collision is `U_S` (two z-rotations) followed by the second-order
//! Suzuki–Trotter interaction `U_I ≈ U_I¹(τ/2)·U_I²(τ)·U_I¹(τ/2)`, each
//! factor expanded into commuting Pauli-string rotations built from U3 and
//! CNOT gates. `global_phase` keeps the dense program unitary equal to the
//! exact product, not merely equal up to phase.

mod sim;

pub use sim::{
    measurement_probabilities, sample_counts, sample_counts_seeded, simulate_density,
    simulate_noisy, simulate_statevector, z_expectation_from_counts, Counts,
    NoiseChannelSpec, SimOutput,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::collision::{AncillaSpec, CollisionConfig};
use crate::error::{Error, Result};
use crate::math;
use crate::qops::{kron, matexp, DensityMatrix, Operator, C64};

pub const S0: usize = 0;
pub const S1: usize = 1;
pub const A0: usize = 2;
pub const A1: usize = 3;

/// Gate kinds; `Reset` and `Measure` are the only non-unitary ones.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    U3 { theta: f64, phi: f64, lambda: f64 },
    H,
    X,
    Cnot,
    Swap,
    Reset,
    Measure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Whether a noise channel is applied after this gate in noisy
    /// simulation.
    pub noisy: bool,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Reset | GateKind::Measure)
    }

    /// Dense matrix of a unitary kind (2×2 or 4×4).
    pub fn matrix(&self) -> Option<Operator> {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self {
            GateKind::U3 { theta, phi, lambda } => {
                let (ct, st) = (math::cos(theta / 2.0), math::sin(theta / 2.0));
                let e_phi = C64::new(math::cos(*phi), math::sin(*phi));
                let e_lam = C64::new(math::cos(*lambda), math::sin(*lambda));
                Some(
                    Operator::from_slice(
                        2,
                        &[
                            C64::new(ct, 0.0),
                            -e_lam * st,
                            e_phi * st,
                            e_phi * e_lam * ct,
                        ],
                    )
                    .unwrap(),
                )
            }
            GateKind::H => {
                let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
                Some(Operator::from_slice(2, &[h, h, h, -h]).unwrap())
            }
            GateKind::X => Some(Operator::from_slice(2, &[z, one, one, z]).unwrap()),
            GateKind::Cnot => Some(
                Operator::from_slice(
                    4,
                    &[
                        one, z, z, z, //
                        z, one, z, z, //
                        z, z, z, one, //
                        z, z, one, z,
                    ],
                )
                .unwrap(),
            ),
            GateKind::Swap => Some(
                Operator::from_slice(
                    4,
                    &[
                        one, z, z, z, //
                        z, z, one, z, //
                        z, one, z, z, //
                        z, z, z, one,
                    ],
                )
                .unwrap(),
            ),
            GateKind::Reset | GateKind::Measure => None,
        }
    }
}

/// An ordered gate program on `n_qubits` with a tracked global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProgram {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub global_phase: f64,
}

impl CircuitProgram {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), global_phase: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let mut measured = vec![false; self.n_qubits];
        for gate in &self.gates {
            if gate.targets.len() != gate.kind.arity() {
                return Err(Error::Invalid("gate target count mismatch".into()));
            }
            for &q in &gate.targets {
                if q >= self.n_qubits {
                    return Err(Error::Invalid("gate target out of range".into()));
                }
                if measured[q] {
                    return Err(Error::Invalid(
                        "a measured qubit cannot be used again".into(),
                    ));
                }
            }
            if gate.targets.len() == 2 && gate.targets[0] == gate.targets[1] {
                return Err(Error::Invalid("two-qubit gate needs distinct targets".into()));
            }
            if gate.kind == GateKind::Measure {
                measured[gate.targets[0]] = true;
            }
        }
        Ok(())
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        self.gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .map(|g| g.targets[0])
            .collect()
    }

    fn push(&mut self, kind: GateKind, targets: Vec<usize>) {
        let noisy = kind.is_unitary();
        self.gates.push(Gate { kind, targets, noisy });
    }

    pub fn u3(&mut self, q: usize, theta: f64, phi: f64, lambda: f64) {
        self.push(GateKind::U3 { theta, phi, lambda }, vec![q]);
    }

    pub fn h(&mut self, q: usize) {
        self.push(GateKind::H, vec![q]);
    }

    pub fn x(&mut self, q: usize) {
        self.push(GateKind::X, vec![q]);
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        self.push(GateKind::Cnot, vec![control, target]);
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.push(GateKind::Swap, vec![a, b]);
    }

    pub fn reset(&mut self, q: usize) {
        self.push(GateKind::Reset, vec![q]);
    }

    pub fn measure(&mut self, q: usize) {
        self.push(GateKind::Measure, vec![q]);
    }

    /// exp(−i·angle·Z/2) realized as U3(0,0,angle) plus a global-phase
    /// correction, so the dense matrix is exactly the rotation.
    pub fn rz(&mut self, q: usize, angle: f64) {
        if angle == 0.0 {
            return;
        }
        self.u3(q, 0.0, 0.0, angle);
        self.global_phase -= angle / 2.0;
    }

    /// Phase gate diag(1, e^{iλ}).
    pub fn p(&mut self, q: usize, lambda: f64) {
        self.u3(q, 0.0, 0.0, lambda);
    }

    /// exp(−i·alpha·P) for a Pauli string P given as (qubit, axis) pairs.
    pub fn rot_pauli(&mut self, string: &[(usize, Axis)], alpha: f64) {
        if alpha == 0.0 || string.is_empty() {
            return;
        }
        // Basis changes B† mapping each axis onto Z.
        for &(q, axis) in string {
            match axis {
                Axis::X => self.h(q),
                Axis::Y => {
                    self.p(q, -core::f64::consts::FRAC_PI_2); // S†
                    self.h(q);
                }
                Axis::Z => {}
            }
        }
        let qubits: Vec<usize> = string.iter().map(|&(q, _)| q).collect();
        for w in qubits.windows(2) {
            self.cnot(w[0], w[1]);
        }
        self.rz(*qubits.last().unwrap(), 2.0 * alpha);
        for w in qubits.windows(2).rev() {
            self.cnot(w[0], w[1]);
        }
        for &(q, axis) in string.iter().rev() {
            match axis {
                Axis::X => self.h(q),
                Axis::Y => {
                    self.h(q);
                    self.p(q, core::f64::consts::FRAC_PI_2); // S
                }
                Axis::Z => {}
            }
        }
    }

    /// Dense 2ⁿ unitary of a program containing only unitary gates,
    /// including the tracked global phase.
    pub fn dense_unitary(&self) -> Result<Operator> {
        self.validate()?;
        let dim = 1usize << self.n_qubits;
        let mut u = Operator::identity(dim);
        for gate in &self.gates {
            let m = gate.kind.matrix().ok_or(Error::Invalid(
                "dense_unitary requires a fully unitary program".into(),
            ))?;
            let embedded = embed_gate(self.n_qubits, &gate.targets, &m);
            u = embedded.matmul(&u);
        }
        let phase = C64::new(math::cos(self.global_phase), math::sin(self.global_phase));
        Ok(u.scale(phase))
    }
}

/// Pauli axis label for rotation strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Embed a 1- or 2-qubit gate matrix into the full register.
pub(crate) fn embed_gate(n_qubits: usize, targets: &[usize], m: &Operator) -> Operator {
    let dim = 1usize << n_qubits;
    let bit = |index: usize, q: usize| (index >> (n_qubits - 1 - q)) & 1;
    match targets {
        [q] => Operator::from_fn(dim, |i, j| {
            if (i ^ j) & !(1 << (n_qubits - 1 - q)) != 0 {
                C64::new(0.0, 0.0)
            } else {
                m.at(bit(i, *q), bit(j, *q))
            }
        }),
        [a, b] => {
            let mask = (1 << (n_qubits - 1 - a)) | (1 << (n_qubits - 1 - b));
            Operator::from_fn(dim, |i, j| {
                if (i ^ j) & !mask != 0 {
                    C64::new(0.0, 0.0)
                } else {
                    let ri = (bit(i, *a) << 1) | bit(i, *b);
                    let ci = (bit(j, *a) << 1) | bit(j, *b);
                    m.at(ri, ci)
                }
            })
        }
        _ => unreachable!("gates act on one or two qubits"),
    }
}

// ---------------------------------------------------------------------------
// Ancilla encoding.
// ---------------------------------------------------------------------------

/// Bijection between the qutrit basis and two-qubit basis states of
/// (a₀, a₁).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AncillaEncoding;

impl AncillaEncoding {
    /// Two-qubit index (a₀a₁ bits) of a qutrit basis state (g, e, r) =
    /// (0, 1, 2).
    pub fn encode(&self, qutrit: usize) -> Option<usize> {
        match qutrit {
            0 => Some(0b00),
            1 => Some(0b01),
            2 => Some(0b10),
            _ => None,
        }
    }

    /// Inverse of [`Self::encode`]; `0b11` is outside the image.
    pub fn decode(&self, two_qubit: usize) -> Option<usize> {
        match two_qubit {
            0b00 => Some(0),
            0b01 => Some(1),
            0b10 => Some(2),
            _ => None,
        }
    }
}

pub fn encode_ancilla() -> AncillaEncoding {
    AncillaEncoding
}

// ---------------------------------------------------------------------------
// Collision-circuit construction.
// ---------------------------------------------------------------------------

/// Free evolution: exp(−iωτ·σᶻ_phys) per system qubit. With |0⟩ = |↓⟩ the
/// physical σᶻ is −Z, so each factor is Rz(−2ωτ).
fn emit_free_evolution(prog: &mut CircuitProgram, omega_tau: f64) {
    prog.rz(S0, -2.0 * omega_tau);
    prog.rz(S1, -2.0 * omega_tau);
}

/// Pauli strings of H_I^(1) = g(XXI + XXZ + YYI + YYZ)/4 on (s₀, a₀, a₁)
/// in the circuit convention; each carries weight g/4.
fn h1_strings() -> [(Vec<(usize, Axis)>, f64); 4] {
    [
        (vec![(S0, Axis::X), (A0, Axis::X)], 1.0),
        (vec![(S0, Axis::X), (A0, Axis::X), (A1, Axis::Z)], 1.0),
        (vec![(S0, Axis::Y), (A0, Axis::Y)], 1.0),
        (vec![(S0, Axis::Y), (A0, Axis::Y), (A1, Axis::Z)], 1.0),
    ]
}

/// Pauli strings of H_I^(2) = g(XXX + XYY − YXY + YYX)/4 on (s₁, a₀, a₁).
fn h2_strings() -> [(Vec<(usize, Axis)>, f64); 4] {
    [
        (vec![(S1, Axis::X), (A0, Axis::X), (A1, Axis::X)], 1.0),
        (vec![(S1, Axis::X), (A0, Axis::Y), (A1, Axis::Y)], 1.0),
        (vec![(S1, Axis::Y), (A0, Axis::X), (A1, Axis::Y)], -1.0),
        (vec![(S1, Axis::Y), (A0, Axis::Y), (A1, Axis::X)], 1.0),
    ]
}

/// exp(−i·t·H_I^(k)) as commuting Pauli rotations; `gt` is g·t.
fn emit_interaction_factor(prog: &mut CircuitProgram, strings: &[(Vec<(usize, Axis)>, f64)], gt: f64) {
    for (string, weight) in strings {
        prog.rot_pauli(string, weight * gt / 4.0);
    }
}

/// The Strang-split interaction U_I¹(τ/2)·U_I²(τ)·U_I¹(τ/2); `g_tau` = g·τ.
fn emit_interaction(prog: &mut CircuitProgram, g_tau: f64) {
    emit_interaction_factor(prog, &h1_strings(), g_tau / 2.0);
    emit_interaction_factor(prog, &h2_strings(), g_tau);
    emit_interaction_factor(prog, &h1_strings(), g_tau / 2.0);
}

/// Ancilla preparation starting from |00⟩: one U3 on a₁ produces
/// cosθ|g⟩ + sinθe^{iφ}|e⟩ through the encoding.
fn emit_ancilla_prep(prog: &mut CircuitProgram, theta: f64, phi: f64) {
    if theta != 0.0 {
        prog.u3(A1, 2.0 * theta, phi, 0.0);
    }
}

/// Only the unitary portion of one collision (free evolution + Trotterized
/// interaction); used to compare against the dense Strang product.
pub fn collision_unitary_program(omega_tau: f64, g_tau: f64) -> CircuitProgram {
    let mut prog = CircuitProgram::new(4);
    emit_free_evolution(&mut prog, omega_tau);
    if g_tau != 0.0 {
        emit_interaction(&mut prog, g_tau);
    }
    prog
}

/// One full collision segment for collision index `n` of the given run:
/// ancilla preparation, free evolution, Trotterized interaction, ancilla
/// reset. With g = 0 the segment reduces to the two z-rotations.
pub fn build_collision_circuit(cfg: &CollisionConfig, n: u64) -> Result<CircuitProgram> {
    cfg.validate()?;
    let seg = cfg.schedule.active(n);
    let (theta, phi) = match &seg.ancilla {
        AncillaSpec::Pure { theta, phi } => (*theta, *phi),
        AncillaSpec::Explicit(_) => {
            return Err(Error::Invalid(
                "circuit backend requires pure (theta, phi) ancillas".into(),
            ))
        }
    };
    let g_tau = cfg.g() * cfg.tau;
    let mut prog = CircuitProgram::new(4);
    if g_tau == 0.0 {
        emit_free_evolution(&mut prog, cfg.omega_tau);
        return Ok(prog);
    }
    emit_ancilla_prep(&mut prog, theta, phi);
    emit_free_evolution(&mut prog, cfg.omega_tau);
    emit_interaction(&mut prog, g_tau);
    prog.reset(A0);
    prog.reset(A1);
    Ok(prog)
}

/// System preparation on (s₀, s₁) from |00⟩.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemPrep {
    /// Leave |↓↓⟩.
    DownDown,
    /// (|↑↑⟩ + |↓↑⟩)/√2 via H on s₀ and X on s₁.
    NearInPhase,
    /// Arbitrary product state: per-qubit (θ, φ) with
    /// |ψ⟩ = cos(θ/2)|↓⟩ + e^{iφ}sin(θ/2)|↑⟩.
    Product { s0: (f64, f64), s1: (f64, f64) },
}

fn emit_system_prep(prog: &mut CircuitProgram, prep: &SystemPrep) {
    match prep {
        SystemPrep::DownDown => {}
        SystemPrep::NearInPhase => {
            prog.h(S0);
            prog.x(S1);
        }
        SystemPrep::Product { s0, s1 } => {
            if s0.0 != 0.0 {
                prog.u3(S0, s0.0, s0.1, 0.0);
            }
            if s1.0 != 0.0 {
                prog.u3(S1, s1.0, s1.1, 0.0);
            }
        }
    }
}

/// Ancilla refresh realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefreshStrategy {
    /// Incoherent reset of (a₀, a₁) in place; 4-qubit register.
    Reset,
    /// Exchange (a₀, a₁) with pre-allocated train pairs via SWAPs; parked
    /// pairs are reset off the interaction path so they are fresh when the
    /// train cycles. `pairs = 1` reproduces the six-qubit layout.
    SwapTrain { pairs: usize },
}

impl RefreshStrategy {
    pub fn n_qubits(&self) -> Result<usize> {
        match self {
            RefreshStrategy::Reset => Ok(4),
            RefreshStrategy::SwapTrain { pairs } => {
                if *pairs == 0 {
                    Err(Error::Invalid("insufficient qubits for swap-train".into()))
                } else {
                    Ok(4 + 2 * pairs)
                }
            }
        }
    }
}

/// Rewrite the reset-style refreshes of a program into the requested
/// strategy. Consecutive RESET pairs on (a₀, a₁) are the refresh markers
/// produced by [`build_collision_circuit`].
pub fn apply_refresh_strategy(
    prog: &CircuitProgram,
    strategy: RefreshStrategy,
) -> Result<CircuitProgram> {
    let n_qubits = strategy.n_qubits()?;
    match strategy {
        RefreshStrategy::Reset => Ok(prog.clone()),
        RefreshStrategy::SwapTrain { pairs } => {
            let _ = n_qubits;
            let mut out = CircuitProgram::new(prog.n_qubits + 2 * pairs);
            out.global_phase = prog.global_phase;
            let mut refresh_idx = 0usize;
            let mut gates = prog.gates.iter().peekable();
            while let Some(gate) = gates.next() {
                let is_refresh = gate.kind == GateKind::Reset
                    && gate.targets == [A0]
                    && matches!(
                        gates.peek(),
                        Some(next) if next.kind == GateKind::Reset && next.targets == [A1]
                    );
                if is_refresh {
                    gates.next(); // consume the paired reset
                    let t0 = 4 + 2 * (refresh_idx % pairs);
                    let t1 = t0 + 1;
                    out.swap(A0, t0);
                    out.swap(A1, t1);
                    out.reset(t0);
                    out.reset(t1);
                    refresh_idx += 1;
                } else {
                    out.gates.push(gate.clone());
                }
            }
            Ok(out)
        }
    }
}

/// Assemble a complete program: system preparation, `n_collisions` collision
/// segments under the run's quench schedule, and (optionally) the σˣ
/// measurement stage (H basis change + terminal measurement).
pub fn build_run_program(
    cfg: &CollisionConfig,
    n_collisions: u64,
    prep: &SystemPrep,
    strategy: RefreshStrategy,
    measure_x: bool,
) -> Result<CircuitProgram> {
    let mut prog = CircuitProgram::new(4);
    emit_system_prep(&mut prog, prep);
    for n in 0..n_collisions {
        let segment = build_collision_circuit(cfg, n)?;
        prog.global_phase += segment.global_phase;
        prog.gates.extend(segment.gates);
    }
    let mut prog = apply_refresh_strategy(&prog, strategy)?;
    if measure_x {
        prog.h(S0);
        prog.h(S1);
        prog.measure(S0);
        prog.measure(S1);
    }
    prog.validate()?;
    Ok(prog)
}

// ---------------------------------------------------------------------------
// Dense references for validation.
// ---------------------------------------------------------------------------

/// Encoded H_I^(1) = g(σ⁻_{s0}⊗|r⟩⟨g| + H.c.) on the 4-qubit register.
pub fn encoded_h1(g: f64) -> Operator {
    let lower = Operator::ketbra(2, 0, 1); // |↓⟩⟨↑| = |0⟩⟨1|
    let r_g = Operator::ketbra(4, 0b10, 0b00);
    let id2 = Operator::identity(2);
    let half = kron(&kron(&lower, &id2), &r_g).scale(C64::new(g, 0.0));
    &half + &half.dagger()
}

/// Encoded H_I^(2) = g(σ⁻_{s1}⊗|r⟩⟨e| + H.c.) on the 4-qubit register.
pub fn encoded_h2(g: f64) -> Operator {
    let lower = Operator::ketbra(2, 0, 1);
    let r_e = Operator::ketbra(4, 0b10, 0b01);
    let id2 = Operator::identity(2);
    let half = kron(&kron(&id2, &lower), &r_e).scale(C64::new(g, 0.0));
    &half + &half.dagger()
}

/// Encoded free Hamiltonian ωτ·(σᶻ_phys on s₀ + s₁); σᶻ_phys = −Z.
pub fn encoded_free_hamiltonian(omega_tau: f64) -> Operator {
    let z_phys = Operator::from_slice(
        2,
        &[C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    )
    .unwrap();
    let id2 = Operator::identity(2);
    let id4 = Operator::identity(4);
    let on_s0 = kron(&kron(&z_phys, &id2), &id4);
    let on_s1 = kron(&kron(&id2, &z_phys), &id4);
    (&on_s0 + &on_s1).scale(C64::new(omega_tau, 0.0))
}

/// Exact dense collision unitary (Strang product of exact exponentials):
/// U_I¹(τ/2)·U_I²(τ)·U_I¹(τ/2)·U_S(τ) with dimensionless angles.
pub fn exact_strang_unitary(omega_tau: f64, g_tau: f64) -> Operator {
    let minus_i = C64::new(0.0, -1.0);
    let u_s = matexp(&encoded_free_hamiltonian(omega_tau), minus_i);
    let u1_half = matexp(&encoded_h1(g_tau / 2.0), minus_i);
    let u2 = matexp(&encoded_h2(g_tau), minus_i);
    u1_half.matmul(&u2).matmul(&u1_half).matmul(&u_s)
}

/// Exact exp(−i(H_I¹+H_I²)) for the dimensionless angle g·τ; the Trotter
/// target without splitting error.
pub fn exact_interaction_unitary(g_tau: f64) -> Operator {
    let h = &encoded_h1(g_tau) + &encoded_h2(g_tau);
    matexp(&h, C64::new(0.0, -1.0))
}

/// Trotterized interaction as a dense unitary.
pub fn trotter_interaction_unitary(g_tau: f64) -> Operator {
    let mut prog = CircuitProgram::new(4);
    emit_interaction(&mut prog, g_tau);
    prog.dense_unitary().expect("unitary program")
}

/// Reduce a full-register circuit density matrix to the physical two-qubit
/// state in the physics basis order (|↑↑⟩,|↑↓⟩,|↓↑⟩,|↓↓⟩).
pub fn system_density_physics(rho_full: &Operator, n_qubits: usize) -> Result<DensityMatrix> {
    let dims = vec![2usize; n_qubits];
    let sys = crate::qops::partial_trace_op(rho_full, &dims, &[S0, S1])?;
    // Circuit index b (s0 s1 bits, |0⟩=↓) ↔ physics index 3−b.
    let op = Operator::from_fn(4, |i, j| sys.at(3 - i, 3 - j));
    Ok(DensityMatrix::from_op_unchecked(op))
}
