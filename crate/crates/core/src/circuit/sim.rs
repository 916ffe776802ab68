//! Statevector and density-matrix simulation with finite-shot sampling.
//!
//! Statevector mode realizes RESET as a projective Z measurement (sampled
//! through the seeded RNG) followed by a conditional X. Density mode applies
//! the corresponding deterministic channel, and applies the configured Kraus
//! channels after every noise-tagged gate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::{CircuitProgram, Gate, GateKind};
use crate::error::{Error, Result};
use crate::math;
use crate::qops::{kron, Operator, C64};
use crate::rng;

const CIRCUIT_STREAM: u64 = 0x6369_7263;

/// Measurement outcome histogram keyed by bitstring (measured qubits in
/// program order).
pub type Counts = BTreeMap<String, u64>;

/// Result of a statevector simulation.
#[derive(Debug, Clone)]
pub enum SimOutput {
    /// Full amplitudes (including the program's global phase).
    State(Vec<C64>),
    Counts(Counts),
}

struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    fn new(n: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Self { n, amps }
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn apply_1q(&mut self, q: usize, m: &Operator) {
        let mask = self.mask(q);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = m.at(0, 0) * a + m.at(0, 1) * b;
                self.amps[j] = m.at(1, 0) * a + m.at(1, 1) * b;
            }
        }
    }

    fn apply_cnot(&mut self, c: usize, t: usize) {
        let (cm, tm) = (self.mask(c), self.mask(t));
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (am, bm) = (self.mask(a), self.mask(b));
        for i in 0..self.amps.len() {
            if i & am != 0 && i & bm == 0 {
                self.amps.swap(i, i ^ am ^ bm);
            }
        }
    }

    fn prob_one(&self, q: usize) -> f64 {
        let mask = self.mask(q);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// Projective Z measurement then conditional X.
    fn reset(&mut self, q: usize, rng: &mut ChaCha12Rng) -> Result<()> {
        let mask = self.mask(q);
        let p1 = self.prob_one(q);
        let u: f64 = rng.gen();
        let outcome_one = u < p1;
        let keep_prob = if outcome_one { p1 } else { 1.0 - p1 };
        if keep_prob < 1e-300 {
            return Err(Error::Numerical("reset hit a zero-probability branch"));
        }
        let scale = 1.0 / math::sqrt(keep_prob);
        for i in 0..self.amps.len() {
            let one = i & mask != 0;
            if one != outcome_one {
                self.amps[i] = C64::new(0.0, 0.0);
            } else {
                self.amps[i] *= scale;
            }
        }
        if outcome_one {
            // Conditional X moves the collapsed |1⟩ back to |0⟩.
            for i in 0..self.amps.len() {
                if i & mask == 0 {
                    self.amps.swap(i, i | mask);
                }
            }
        }
        Ok(())
    }
}

fn run_statevector_once(
    prog: &CircuitProgram,
    rng: &mut ChaCha12Rng,
) -> Result<(StateVector, Vec<usize>)> {
    let mut sv = StateVector::new(prog.n_qubits);
    let mut measured = Vec::new();
    for gate in &prog.gates {
        match &gate.kind {
            GateKind::Cnot => sv.apply_cnot(gate.targets[0], gate.targets[1]),
            GateKind::Swap => sv.apply_swap(gate.targets[0], gate.targets[1]),
            GateKind::Reset => sv.reset(gate.targets[0], rng)?,
            GateKind::Measure => measured.push(gate.targets[0]),
            kind => sv.apply_1q(gate.targets[0], &kind.matrix().expect("unitary kind")),
        }
    }
    Ok((sv, measured))
}

/// Run a program on the statevector simulator.
///
/// Without `shots` the exact final state is returned (resets collapse along
/// the seeded trajectory). With `shots`, a program containing resets is
/// re-run per shot — every shot is an independent trajectory, exactly as on
/// hardware — while a reset-free program is evolved once and sampled
/// multinomially.
pub fn simulate_statevector(
    prog: &CircuitProgram,
    shots: Option<u64>,
    seed: u64,
) -> Result<SimOutput> {
    prog.validate()?;
    let mut rng = rng::stream(seed, 0, CIRCUIT_STREAM);
    match shots {
        None => {
            let (sv, _) = run_statevector_once(prog, &mut rng)?;
            let phase = C64::new(math::cos(prog.global_phase), math::sin(prog.global_phase));
            Ok(SimOutput::State(sv.amps.iter().map(|z| z * phase).collect()))
        }
        Some(shots) => {
            if prog.measured_qubits().is_empty() {
                return Err(Error::Invalid("shots requested but nothing measured".into()));
            }
            let has_resets = prog.gates.iter().any(|g| g.kind == GateKind::Reset);
            if !has_resets {
                let (sv, measured) = run_statevector_once(prog, &mut rng)?;
                let probs =
                    marginal_probs(prog.n_qubits, &measured, |i| sv.amps[i].norm_sqr());
                return Ok(SimOutput::Counts(sample_counts(&probs, shots, &mut rng)));
            }
            let mut counts = Counts::new();
            for _ in 0..shots {
                let (sv, measured) = run_statevector_once(prog, &mut rng)?;
                let probs =
                    marginal_probs(prog.n_qubits, &measured, |i| sv.amps[i].norm_sqr());
                let single = sample_counts(&probs, 1, &mut rng);
                for (key, c) in single {
                    *counts.entry(key).or_insert(0) += c;
                }
            }
            Ok(SimOutput::Counts(counts))
        }
    }
}

/// Per-gate noise model applied after every tagged gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannelSpec {
    /// Depolarizing probability after one-qubit gates.
    pub depol_1q: f64,
    /// Depolarizing probability after two-qubit gates.
    pub depol_2q: f64,
    /// Amplitude-damping probability per gate, per target qubit.
    pub amp_damping: f64,
    /// Dephasing probability per gate, per target qubit.
    pub dephasing: f64,
}

impl Default for NoiseChannelSpec {
    fn default() -> Self {
        Self { depol_1q: 1e-3, depol_2q: 1e-2, amp_damping: 0.0, dephasing: 0.0 }
    }
}

impl NoiseChannelSpec {
    pub fn noiseless() -> Self {
        Self { depol_1q: 0.0, depol_2q: 0.0, amp_damping: 0.0, dephasing: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.depol_1q, self.depol_2q, self.amp_damping, self.dephasing] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invalid("noise probabilities must lie in [0, 1]".into()));
            }
        }
        // Kraus completeness Σ K†K = I within 1e-12 for every active set.
        for set in [
            kraus_depolarizing_1q(self.depol_1q),
            kraus_depolarizing_2q(self.depol_2q),
            kraus_amplitude_damping(self.amp_damping),
            kraus_dephasing(self.dephasing),
        ] {
            let dim = set[0].dim();
            let mut acc = Operator::zeros(dim);
            for k in &set {
                acc = &acc + &k.dagger().matmul(k);
            }
            if acc.max_abs_diff(&Operator::identity(dim)) > 1e-12 {
                return Err(Error::Invalid("noise channel is not trace preserving".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn kraus_depolarizing_1q(p: f64) -> Vec<Operator> {
    let paulis = [crate::qops::pauli_x(), crate::qops::pauli_y(), crate::qops::pauli_z()];
    let mut out = vec![Operator::identity(2).scale(C64::new(math::sqrt(1.0 - p), 0.0))];
    for m in paulis {
        out.push(m.scale(C64::new(math::sqrt(p / 3.0), 0.0)));
    }
    out
}

pub(crate) fn kraus_depolarizing_2q(p: f64) -> Vec<Operator> {
    let singles = [
        Operator::identity(2),
        crate::qops::pauli_x(),
        crate::qops::pauli_y(),
        crate::qops::pauli_z(),
    ];
    let mut out = Vec::with_capacity(16);
    for (i, a) in singles.iter().enumerate() {
        for (j, b) in singles.iter().enumerate() {
            let weight = if i == 0 && j == 0 { 1.0 - p } else { p / 15.0 };
            out.push(kron(a, b).scale(C64::new(math::sqrt(weight), 0.0)));
        }
    }
    out
}

pub(crate) fn kraus_amplitude_damping(gamma: f64) -> Vec<Operator> {
    let z = C64::new(0.0, 0.0);
    vec![
        Operator::from_slice(
            2,
            &[C64::new(1.0, 0.0), z, z, C64::new(math::sqrt(1.0 - gamma), 0.0)],
        )
        .unwrap(),
        Operator::from_slice(2, &[z, C64::new(math::sqrt(gamma), 0.0), z, z]).unwrap(),
    ]
}

pub(crate) fn kraus_dephasing(p: f64) -> Vec<Operator> {
    vec![
        Operator::identity(2).scale(C64::new(math::sqrt(1.0 - p), 0.0)),
        crate::qops::pauli_z().scale(C64::new(math::sqrt(p), 0.0)),
    ]
}

struct DensitySim {
    n: usize,
    rho: Operator,
}

impl DensitySim {
    fn new(n: usize) -> Self {
        let dim = 1usize << n;
        let mut rho = Operator::zeros(dim);
        rho.set(0, 0, C64::new(1.0, 0.0));
        Self { n, rho }
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    /// ρ ← (U_q ρ U_q†) for a single-qubit unitary, via paired row/column
    /// mixing.
    fn conjugate_1q(&mut self, q: usize, m: &Operator) {
        let dim = self.rho.dim();
        let mask = self.mask(q);
        let (m00, m01, m10, m11) = (m.at(0, 0), m.at(0, 1), m.at(1, 0), m.at(1, 1));
        for i in 0..dim {
            if i & mask == 0 {
                let j = i | mask;
                for c in 0..dim {
                    let a = self.rho.at(i, c);
                    let b = self.rho.at(j, c);
                    self.rho.set(i, c, m00 * a + m01 * b);
                    self.rho.set(j, c, m10 * a + m11 * b);
                }
            }
        }
        let (c00, c01, c10, c11) = (m00.conj(), m01.conj(), m10.conj(), m11.conj());
        for j in 0..dim {
            if j & mask == 0 {
                let k = j | mask;
                for r in 0..dim {
                    let a = self.rho.at(r, j);
                    let b = self.rho.at(r, k);
                    self.rho.set(r, j, a * c00 + b * c01);
                    self.rho.set(r, k, a * c10 + b * c11);
                }
            }
        }
    }

    /// Conjugation by a basis permutation given as an involutive index map.
    fn conjugate_permutation(&mut self, pairs: &[(usize, usize)]) {
        for &(a, b) in pairs {
            for c in 0..self.rho.dim() {
                let x = self.rho.at(a, c);
                let y = self.rho.at(b, c);
                self.rho.set(a, c, y);
                self.rho.set(b, c, x);
            }
        }
        for &(a, b) in pairs {
            for r in 0..self.rho.dim() {
                let x = self.rho.at(r, a);
                let y = self.rho.at(r, b);
                self.rho.set(r, a, y);
                self.rho.set(r, b, x);
            }
        }
    }

    fn apply_unitary(&mut self, gate: &Gate) {
        match &gate.kind {
            GateKind::Cnot => {
                let (cm, tm) = (self.mask(gate.targets[0]), self.mask(gate.targets[1]));
                let pairs: Vec<(usize, usize)> = (0..self.rho.dim())
                    .filter(|i| i & cm != 0 && i & tm == 0)
                    .map(|i| (i, i | tm))
                    .collect();
                self.conjugate_permutation(&pairs);
            }
            GateKind::Swap => {
                let (am, bm) = (self.mask(gate.targets[0]), self.mask(gate.targets[1]));
                let pairs: Vec<(usize, usize)> = (0..self.rho.dim())
                    .filter(|i| i & am != 0 && i & bm == 0)
                    .map(|i| (i, i ^ am ^ bm))
                    .collect();
                self.conjugate_permutation(&pairs);
            }
            kind => {
                let m = kind.matrix().expect("unitary kind");
                self.conjugate_1q(gate.targets[0], &m);
            }
        }
    }

    /// ρ ← Σ_k K_k ρ K_k† for 2×2 Kraus operators on one qubit.
    fn apply_1q_kraus(&mut self, q: usize, kraus: &[Operator]) {
        let dim = self.rho.dim();
        let mask = self.mask(q);
        let mut acc = Operator::zeros(dim);
        for m in kraus {
            let mut term = self.rho.clone();
            let (m00, m01, m10, m11) = (m.at(0, 0), m.at(0, 1), m.at(1, 0), m.at(1, 1));
            for i in 0..dim {
                if i & mask == 0 {
                    let j = i | mask;
                    for c in 0..dim {
                        let a = term.at(i, c);
                        let b = term.at(j, c);
                        term.set(i, c, m00 * a + m01 * b);
                        term.set(j, c, m10 * a + m11 * b);
                    }
                }
            }
            let (c00, c01, c10, c11) = (m00.conj(), m01.conj(), m10.conj(), m11.conj());
            for j in 0..dim {
                if j & mask == 0 {
                    let k = j | mask;
                    for r in 0..dim {
                        let a = term.at(r, j);
                        let b = term.at(r, k);
                        term.set(r, j, a * c00 + b * c01);
                        term.set(r, k, a * c10 + b * c11);
                    }
                }
            }
            acc = &acc + &term;
        }
        self.rho = acc;
    }

    /// Uniform depolarizing on `targets` using the identity
    /// (1/4^k)·Σ_P PρP = (I/2^k) ⊗ tr_targets(ρ):
    /// ρ ← (1−w)ρ + w·(I/2^k ⊗ tr_targets ρ) with w = 4^k p / (4^k − 1).
    fn depolarize(&mut self, targets: &[usize], p: f64) {
        let dim = self.rho.dim();
        let k = targets.len() as u32;
        let four_k = (1usize << (2 * k)) as f64;
        let w = four_k * p / (four_k - 1.0);
        let masks: Vec<usize> = targets.iter().map(|&q| self.mask(q)).collect();
        let full_mask: usize = masks.iter().sum();
        let norm = 1.0 / (1usize << k) as f64;

        let mut mixed = Operator::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                if (i & full_mask) != (j & full_mask) {
                    continue;
                }
                // Sum over the traced target bits.
                let mut acc = C64::new(0.0, 0.0);
                for pattern in 0..(1usize << k) {
                    let mut offset = 0usize;
                    for (bit, m) in masks.iter().enumerate() {
                        if pattern >> bit & 1 == 1 {
                            offset |= m;
                        }
                    }
                    let base_i = (i & !full_mask) | offset;
                    let base_j = (j & !full_mask) | offset;
                    acc += self.rho.at(base_i, base_j);
                }
                mixed.set(i, j, acc * C64::new(norm, 0.0));
            }
        }
        self.rho = &self.rho.scale(C64::new(1.0 - w, 0.0)) + &mixed.scale(C64::new(w, 0.0));
    }

    fn apply_reset(&mut self, q: usize) {
        // Measure-and-flip channel: K0 = |0⟩⟨0|, K1 = |0⟩⟨1|.
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let k0 = Operator::from_slice(2, &[one, z, z, z]).unwrap();
        let k1 = Operator::from_slice(2, &[z, one, z, z]).unwrap();
        self.apply_1q_kraus(q, &[k0, k1]);
    }

    fn apply_noise(&mut self, gate: &Gate, noise: &NoiseChannelSpec) {
        match gate.targets.len() {
            1 => {
                if noise.depol_1q > 0.0 {
                    self.depolarize(&gate.targets, noise.depol_1q);
                }
            }
            2 => {
                if noise.depol_2q > 0.0 {
                    self.depolarize(&gate.targets, noise.depol_2q);
                }
            }
            _ => {}
        }
        for &q in &gate.targets {
            if noise.amp_damping > 0.0 {
                self.apply_1q_kraus(q, &kraus_amplitude_damping(noise.amp_damping));
            }
            if noise.dephasing > 0.0 {
                self.apply_1q_kraus(q, &kraus_dephasing(noise.dephasing));
            }
        }
    }
}

/// Propagate the program as a density matrix, applying `noise` after every
/// tagged gate when given. Measure gates leave the state untouched.
pub fn simulate_density(
    prog: &CircuitProgram,
    noise: Option<&NoiseChannelSpec>,
) -> Result<Operator> {
    prog.validate()?;
    if let Some(n) = noise {
        n.validate()?;
    }
    let mut sim = DensitySim::new(prog.n_qubits);
    for gate in &prog.gates {
        match &gate.kind {
            GateKind::Reset => sim.apply_reset(gate.targets[0]),
            GateKind::Measure => {}
            _ => sim.apply_unitary(gate),
        }
        if let (Some(spec), true) = (noise, gate.noisy) {
            sim.apply_noise(gate, spec);
        }
    }
    Ok(sim.rho)
}

/// Final measurement distribution of a (possibly noisy) density-matrix
/// run, marginalized over the measured qubits in measurement order.
pub fn measurement_probabilities(
    prog: &CircuitProgram,
    noise: Option<&NoiseChannelSpec>,
) -> Result<Vec<f64>> {
    let measured = prog.measured_qubits();
    if measured.is_empty() {
        return Err(Error::Invalid("program measures no qubits".into()));
    }
    let rho = simulate_density(prog, noise)?;
    Ok(marginal_probs(prog.n_qubits, &measured, |i| rho.at(i, i).re.max(0.0)))
}

/// Noisy density-matrix run sampled into counts.
pub fn simulate_noisy(
    prog: &CircuitProgram,
    noise: &NoiseChannelSpec,
    shots: u64,
    seed: u64,
) -> Result<Counts> {
    if shots < 1 {
        return Err(Error::Invalid("shots must be >= 1".into()));
    }
    let probs = measurement_probabilities(prog, Some(noise))?;
    Ok(sample_counts_seeded(&probs, shots, seed))
}

/// Marginal probabilities over the measured qubits (in measurement order).
fn marginal_probs(
    n_qubits: usize,
    measured: &[usize],
    prob_of: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let patterns = 1usize << measured.len();
    let mut probs = vec![0.0f64; patterns];
    for i in 0..(1usize << n_qubits) {
        let mut pattern = 0usize;
        for (k, &q) in measured.iter().enumerate() {
            let bit = (i >> (n_qubits - 1 - q)) & 1;
            pattern |= bit << (measured.len() - 1 - k);
        }
        probs[pattern] += prob_of(i);
    }
    probs
}

/// Like [`sample_counts`] with the same stream derivation
/// [`simulate_noisy`] uses, so external samplers reproduce its counts.
pub fn sample_counts_seeded(probs: &[f64], shots: u64, seed: u64) -> Counts {
    let mut rng = rng::stream(seed, 1, CIRCUIT_STREAM);
    sample_counts(probs, shots, &mut rng)
}

/// Multinomial sampling of `shots` outcomes from a probability vector;
/// outcome index k maps to its bitstring key.
pub fn sample_counts(probs: &[f64], shots: u64, rng: &mut ChaCha12Rng) -> Counts {
    let total: f64 = probs.iter().sum();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p / total;
        cumulative.push(acc);
    }
    let bits = probs.len().trailing_zeros() as usize;
    let mut counts = Counts::new();
    for _ in 0..shots {
        let u: f64 = rng.gen();
        let idx = cumulative.partition_point(|&c| c < u).min(probs.len() - 1);
        let key = bitstring(idx, bits);
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

pub(crate) fn bitstring(index: usize, bits: usize) -> String {
    let mut s = String::with_capacity(bits);
    for k in (0..bits).rev() {
        s.push(if (index >> k) & 1 == 1 { '1' } else { '0' });
    }
    s
}

/// ⟨Z⟩ of one measured bit estimated from counts: P(0) − P(1).
pub fn z_expectation_from_counts(counts: &Counts, bit_index: usize) -> f64 {
    let mut zero = 0u64;
    let mut one = 0u64;
    for (key, count) in counts {
        match key.as_bytes()[bit_index] {
            b'0' => zero += count,
            _ => one += count,
        }
    }
    let total = (zero + one) as f64;
    (zero as f64 - one as f64) / total
}
