//! Continuous-time master-equation backends and dark-state analysis.
//!
//! Piecewise-constant generators are propagated exactly by exponentiating
//! the vectorized Liouvillian once per distinct grid spacing (column-stacking
//! convention, so the superoperator for a d-dimensional system is d²×d²).
//! A fixed-step RK4 integrator covers time-dependent Hamiltonians.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::qops::{
    expectation, free_hamiltonian, herm_eig, kron, matexp, right_kernel, sminus, stack_columns,
    sz, DensityMatrix, Operator, PureState, Tolerances, C64,
};
use crate::series::{ObservableSeries, Record};

/// H plus a set of jump operators with nonnegative rates.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: Operator,
    jumps: Vec<(f64, Operator)>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, jumps: Vec<(f64, Operator)>) -> Result<Self> {
        for (rate, op) in &jumps {
            if *rate < 0.0 {
                return Err(Error::Invalid("jump rates must be >= 0".into()));
            }
            if op.dim() != hamiltonian.dim() {
                return Err(Error::DimensionMismatch {
                    expected: hamiltonian.dim(),
                    got: op.dim(),
                    context: "LindbladModel jump",
                });
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[(f64, Operator)] {
        &self.jumps
    }
}

/// Effective two-body jump cosθ·σ⁻₁ + sinθ·e^{iφ}·σ⁻₂.
pub fn effective_jump(theta: f64, phi: f64) -> Operator {
    let c = C64::new(math::cos(theta), 0.0);
    let s = C64::new(math::sin(theta) * math::cos(phi), math::sin(theta) * math::sin(phi));
    &sminus(1).scale(c) + &sminus(2).scale(s)
}

/// The effective master-equation model: H = ω(σᶻ₁+σᶻ₂), dissipator
/// γ·D[cosθσ⁻₁ + sinθe^{iφ}σ⁻₂].
pub fn effective_model(theta: f64, phi: f64, omega: f64, gamma: f64) -> LindbladModel {
    LindbladModel::new(free_hamiltonian(omega), vec![(gamma, effective_jump(theta, phi))])
        .expect("well-formed by construction")
}

/// D_ρ[o] = oρo† − ½(o†oρ + ρo†o).
pub fn dissipator_apply(rho: &DensityMatrix, o: &Operator) -> Result<Operator> {
    if rho.dim() != o.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: o.dim(),
            context: "dissipator_apply",
        });
    }
    Ok(dissipator_op(rho.operator(), o))
}

fn dissipator_op(rho: &Operator, o: &Operator) -> Operator {
    let od = o.dagger();
    let odo = od.matmul(o);
    let gain = o.matmul(rho).matmul(&od);
    let loss = &odo.matmul(rho) + &rho.matmul(&odo);
    &gain - &loss.scale(C64::new(0.5, 0.0))
}

/// Reduced (excited-state-eliminated) model: the jump operators are
/// restricted to the {|↓↑⟩, |↑↓⟩, |↓↓⟩} subspace and the |↑↑⟩ self-energy is
/// set to zero.
pub fn reduced_model(theta: f64, phi: f64, omega: f64, gamma: f64) -> LindbladModel {
    let c = C64::new(math::cos(theta) / 2.0, 0.0);
    let s_mag = math::sin(theta) / 2.0;
    let s = C64::new(s_mag * math::cos(phi), s_mag * math::sin(phi));
    let term1 = (&sminus(1) - &sminus(1).matmul(&sz(2))).scale(c);
    let term2 = (&sminus(2) - &sz(1).matmul(&sminus(2))).scale(s);
    let jump = &term1 + &term2;

    let mut h = free_hamiltonian(omega);
    h.set(0, 0, C64::new(0.0, 0.0));
    LindbladModel::new(h, vec![(gamma, jump)]).expect("well-formed by construction")
}

/// Project an initial state into the reduced subspace: zero the first row
/// and column and merge the |↑↑⟩ population into |↓↓⟩.
pub fn reduce_initial_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
            context: "reduce_initial_state",
        });
    }
    let mut op = rho.operator().clone();
    let excited = op.at(0, 0);
    for k in 0..4 {
        op.set(0, k, C64::new(0.0, 0.0));
        op.set(k, 0, C64::new(0.0, 0.0));
    }
    let merged = op.at(3, 3) + excited;
    op.set(3, 3, merged);
    DensityMatrix::new(op)
}

/// The 12-dimensional alternative framework: H = H_S + H_I with the ancilla
/// subject to strong spontaneous emission through |g⟩⟨r| + |e⟩⟨r|.
pub fn qutrit_emission_model(gamma: f64, g: f64, omega: f64) -> Result<LindbladModel> {
    if !(gamma > 0.0) {
        return Err(Error::Invalid("emission rate gamma must be > 0".into()));
    }
    let h = &kron(&free_hamiltonian(omega), &Operator::identity(3))
        + &crate::collision::build_interaction_hamiltonian(g);
    let jump = kron(
        &Operator::identity(4),
        &(&Operator::ketbra(3, 0, 2) + &Operator::ketbra(3, 1, 2)),
    );
    LindbladModel::new(h, vec![(gamma, jump)])
}

/// Effective jump from adiabatic elimination of |r⟩:
/// o_eff = √γ·(|g⟩⟨r|+|e⟩⟨r|)·H_NH⁻¹·H₊ with H_NH = −iγ|r⟩⟨r|.
pub fn qutrit_effective_jump(gamma: f64, g: f64) -> Operator {
    let h_plus = (&kron(&sminus(1), &Operator::ketbra(3, 2, 0))
        + &kron(&sminus(2), &Operator::ketbra(3, 2, 1)))
        .scale(C64::new(g, 0.0));
    // H_NH⁻¹ acts as (i/γ)|r⟩⟨r| on the decaying level.
    let h_nh_inv = kron(&Operator::identity(4), &Operator::ketbra(3, 2, 2))
        .scale(C64::new(0.0, 1.0 / gamma));
    let collapse = kron(
        &Operator::identity(4),
        &(&Operator::ketbra(3, 0, 2) + &Operator::ketbra(3, 1, 2)),
    )
    .scale(C64::new(math::sqrt(gamma), 0.0));
    collapse.matmul(&h_nh_inv).matmul(&h_plus)
}

/// Orthonormal dark states (annihilated by every jump, eigenstates of H)
/// with their energies, sorted by energy.
#[derive(Debug, Clone)]
pub struct DarkStateSet {
    states: Vec<PureState>,
    energies: Vec<f64>,
}

impl DarkStateSet {
    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Diagnostic for the steady-state oscillation amplitude: the dark
    /// overlaps (c₁₁, c₂₂) of an initial state and their ratio. The
    /// oscillation of a pure steady state peaks at c₁₁/c₂₂ = 2; this is
    /// informational, nothing enforces it.
    pub fn oscillation_diagnostic(&self, rho0: &DensityMatrix) -> Option<(f64, f64, f64)> {
        if self.len() < 2 {
            return None;
        }
        let block = self.dark_block(rho0);
        let c11 = block.at(0, 0).re;
        let c22 = block.at(1, 1).re;
        Some((c11, c22, c11 / c22))
    }

    /// ⟨D_j|ρ|D_k⟩ block of a state over this dark basis.
    pub fn dark_block(&self, rho: &DensityMatrix) -> Operator {
        let m = self.len();
        Operator::from_fn(m, |j, k| {
            let mut acc = C64::new(0.0, 0.0);
            for (a, row) in self.states[j].amplitudes().iter().enumerate() {
                for (b, col) in self.states[k].amplitudes().iter().enumerate() {
                    acc += row.conj() * rho.operator().at(a, b) * col;
                }
            }
            acc
        })
    }
}

/// Numerical dark-state catalog: for each eigenspace of H, the kernel of all
/// jump operators restricted to that eigenspace (singular-value threshold
/// 1e-10).
pub fn dark_states(model: &LindbladModel) -> Result<DarkStateSet> {
    let n = model.dim();
    let (eigs, vectors) = herm_eig(model.hamiltonian())?;
    let scale = eigs.iter().fold(1.0f64, |m, &e| m.max(math::abs(e)));

    // Cluster (sorted) eigenvalues into degenerate groups.
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (idx, &e) in eigs.iter().enumerate() {
        match clusters.last_mut() {
            Some((e0, members)) if math::abs(e - *e0) <= 1e-8 * scale => members.push(idx),
            _ => clusters.push((e, vec![idx])),
        }
    }

    let active_jumps: Vec<Operator> = model
        .jumps
        .iter()
        .filter(|(rate, _)| *rate > 0.0)
        .map(|(_, o)| o.clone())
        .collect();

    let mut found: Vec<(f64, PureState)> = Vec::new();
    for (energy, members) in &clusters {
        // Complementary projector I − Σ_члены |v⟩⟨v|.
        let mut proj = Operator::identity(n);
        for &col in members {
            for i in 0..n {
                for j in 0..n {
                    let sub = vectors.at(i, col) * vectors.at(j, col).conj();
                    let cur = proj.at(i, j);
                    proj.set(i, j, cur - sub);
                }
            }
        }
        let mut stacked: Vec<Operator> = active_jumps.clone();
        stacked.push(proj);
        let kernel = right_kernel(stack_columns(&stacked), 1e-10);
        for mut vec_k in kernel {
            crate::qops::canonicalize_phase(&mut vec_k);
            let psi = PureState::new(vec_k)?;
            // Refine the energy with a Rayleigh quotient.
            let e = psi.expectation(model.hamiltonian()).re;
            debug_assert!(math::abs(e - energy) < 1e-7 * scale);
            found.push((e, psi));
        }
    }
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Enforce the contract before handing the set out.
    for (e, psi) in &found {
        for o in &active_jumps {
            let image = o.mul_vec(psi.amplitudes());
            let norm = math::sqrt(image.iter().map(|z| z.norm_sqr()).sum());
            if norm > 1e-10 {
                return Err(Error::Numerical("dark-state kernel residual exceeds 1e-10"));
            }
        }
        let hv = model.hamiltonian().mul_vec(psi.amplitudes());
        let res: f64 = hv
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| (a - b * C64::new(*e, 0.0)).norm_sqr())
            .sum();
        if math::sqrt(res) > 1e-10 * scale.max(1.0) {
            return Err(Error::Numerical("dark-state energy residual exceeds 1e-10"));
        }
    }

    let energies = found.iter().map(|(e, _)| *e).collect();
    let states = found.into_iter().map(|(_, s)| s).collect();
    Ok(DarkStateSet { states, energies })
}

/// Vectorized generator (column-stacking): for ρ ↦ vec(ρ),
/// L = −i(I⊗H − Hᵀ⊗I) + Σ γ[ō⊗o − ½ I⊗(o†o) − ½ (o†o)ᵀ⊗I].
pub fn liouvillian(model: &LindbladModel) -> Operator {
    let n = model.dim();
    let id = Operator::identity(n);
    let h = &model.hamiltonian;
    let mut l = (&kron(&id, h) - &kron(&h.transpose(), &id)).scale(C64::new(0.0, -1.0));
    for (rate, o) in &model.jumps {
        let od_o = o.dagger().matmul(o);
        let gain = kron(&o.conj(), o);
        let loss = &kron(&id, &od_o) + &kron(&od_o.transpose(), &id);
        let term = &gain - &loss.scale(C64::new(0.5, 0.0));
        l = &l + &term.scale(C64::new(*rate, 0.0));
    }
    l
}

fn vectorize(op: &Operator) -> Vec<C64> {
    let n = op.dim();
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            v[j * n + i] = op.at(i, j);
        }
    }
    v
}

fn unvectorize(v: &[C64], n: usize) -> Operator {
    Operator::from_fn(n, |i, j| v[j * n + i])
}

fn propagation_tolerances() -> Tolerances {
    Tolerances { hermiticity: 1e-7, trace: 1e-7, positivity: 1e-7, norm: 1e-12 }
}

/// Exact piecewise propagation over a time grid; the visitor sees every grid
/// point including t_grid[0].
pub fn propagate(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    mut visit: impl FnMut(usize, f64, &DensityMatrix) -> Result<()>,
) -> Result<()> {
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: rho0.dim(),
            context: "propagate rho0",
        });
    }
    validate_grid(t_grid)?;
    let n = model.dim();
    let l = liouvillian(model);
    let mut propagators: BTreeMap<u64, Operator> = BTreeMap::new();
    let tol = propagation_tolerances();

    let mut state = vectorize(rho0.operator());
    visit(0, t_grid[0], rho0)?;
    for k in 1..t_grid.len() {
        let dt = t_grid[k] - t_grid[k - 1];
        let prop = propagators
            .entry(dt.to_bits())
            .or_insert_with(|| matexp(&l, C64::new(dt, 0.0)));
        state = prop.mul_vec(&state);
        let op = unvectorize(&state, n);
        let rho = DensityMatrix::with_tolerances(op, &tol).map_err(|e| match e {
            Error::NotPositive { min_eigenvalue } => Error::NotPositive { min_eigenvalue },
            other => other,
        })?;
        visit(k, t_grid[k], &rho)?;
    }
    Ok(())
}

/// Propagate and record labeled expectation values at every grid point.
pub fn evolve_me(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    observables: &[(String, Operator)],
    phase_label: &str,
) -> Result<ObservableSeries> {
    let labels: Vec<String> = observables.iter().map(|(l, _)| l.clone()).collect();
    let mut series = ObservableSeries::new(labels);
    propagate(model, rho0, t_grid, |k, t, rho| {
        let mut values = Vec::with_capacity(observables.len());
        for (_, op) in observables {
            values.push(expectation(rho, op)?.re);
        }
        series.push(Record { n: k as u64, t, values, phase: phase_label.to_string() })
    })?;
    Ok(series)
}

/// Collect the propagated states themselves (small dimensions / short grids).
pub fn evolve_states(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(t_grid.len());
    propagate(model, rho0, t_grid, |_, _, rho| {
        out.push(rho.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Fixed-step RK4 fallback for a time-dependent Hamiltonian with static
/// jumps. `dt_max` bounds the internal step; grid intervals are subdivided
/// evenly.
pub fn propagate_rk4(
    hamiltonian: impl Fn(f64) -> Operator,
    jumps: &[(f64, Operator)],
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt_max: f64,
    mut visit: impl FnMut(usize, f64, &DensityMatrix) -> Result<()>,
) -> Result<()> {
    validate_grid(t_grid)?;
    if !(dt_max > 0.0) {
        return Err(Error::Invalid("dt_max must be > 0".into()));
    }
    let tol = propagation_tolerances();
    let rhs = |t: f64, rho: &Operator| -> Operator {
        let h = hamiltonian(t);
        let comm = &h.matmul(rho) - &rho.matmul(&h);
        let mut out = comm.scale(C64::new(0.0, -1.0));
        for (rate, o) in jumps {
            out = &out + &dissipator_op(rho, o).scale(C64::new(*rate, 0.0));
        }
        out
    };

    let mut rho = rho0.operator().clone();
    visit(0, t_grid[0], rho0)?;
    for k in 1..t_grid.len() {
        let span = t_grid[k] - t_grid[k - 1];
        let steps = math::ceil(span / dt_max) as usize;
        let dt = span / steps as f64;
        let mut t = t_grid[k - 1];
        for _ in 0..steps {
            let k1 = rhs(t, &rho);
            let k2 = rhs(t + dt / 2.0, &(&rho + &k1.scale(C64::new(dt / 2.0, 0.0))));
            let k3 = rhs(t + dt / 2.0, &(&rho + &k2.scale(C64::new(dt / 2.0, 0.0))));
            let k4 = rhs(t + dt, &(&rho + &k3.scale(C64::new(dt, 0.0))));
            let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(C64::new(2.0, 0.0));
            rho = &rho + &incr.scale(C64::new(dt / 6.0, 0.0));
            t += dt;
        }
        let state = DensityMatrix::with_tolerances(rho.clone(), &tol)?;
        visit(k, t_grid[k], &state)?;
    }
    Ok(())
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Invalid("time grid is empty".into()));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::Invalid("time grid must start at 0".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Invalid("time grid must strictly increase".into()));
        }
    }
    Ok(())
}

/// Uniform grid 0, dt, …, n·dt.
pub fn uniform_grid(dt: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| k as f64 * dt).collect()
}
