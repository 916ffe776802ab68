//! Dense complex linear algebra for Hilbert-space dimensions up to the
//! vectorized superoperators (16² = 256 worst case handled, typical ≤ 144).
//!
//! Conventions fixed here and used by every backend:
//! - two-qubit basis order (|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩) with σᶻ|↑⟩ = +|↑⟩ and
//!   σ⁻|↑⟩ = |↓⟩;
//! - qutrit basis order (|g⟩, |e⟩, |r⟩);
//! - ħ = 1.

mod eig;
mod expm;

pub use eig::{canonicalize_phase, herm_eig, matsqrt_psd};
pub(crate) use eig::{psd_sqrt_op, right_kernel, stack_columns};
pub use expm::matexp;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::math;

pub type C64 = num_complex::Complex<f64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerances for state-invariant checks. The defaults are the
/// contract; loosen or tighten only for stress tests.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-10, trace: 1e-10, positivity: 1e-10, norm: 1e-12 }
    }
}

/// Dense complex square matrix in row-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    /// Build from a row-major slice; length must be `dim²`.
    pub fn from_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
                context: "Operator::from_slice",
            });
        }
        Ok(Self { dim, data: entries.to_vec() })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// |i⟩⟨j| in a `dim`-dimensional space.
    pub fn ketbra(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[i * dim + j] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.at(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.at(j, i))
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.at(k, k)).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "mul_vec dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let mut acc = ZERO;
            let row = &self.data[i * n..(i + 1) * n];
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column absolute sum).
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0;
        for j in 0..self.dim {
            let mut s = 0.0;
            for i in 0..self.dim {
                s += self.at(i, j).norm();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn norm_fro(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entrywise |A − A†|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.at(i, j) - self.at(j, i).conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// (A + A†)/2.
    pub fn hermitize(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self.at(i, j) + self.at(j, i).conj()) * 0.5)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim);
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim);
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

/// Kronecker product; `(A⊗B)(C⊗D) = AC⊗BD`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (da, db) = (a.dim(), b.dim());
    let n = da * db;
    let mut out = Operator::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a.at(i, j);
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.set(i * db + k, j * db + l, aij * b.at(k, l));
                }
            }
        }
    }
    out
}

/// Kronecker product of three factors.
pub fn kron3(a: &Operator, b: &Operator, c: &Operator) -> Operator {
    kron(&kron(a, b), c)
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Construct and renormalize; errors on (near-)zero norm.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = math::sqrt(amplitudes.iter().map(|z| z.norm_sqr()).sum());
        if norm < 1e-14 {
            return Err(Error::ZeroNorm);
        }
        let amplitudes = amplitudes.iter().map(|z| z / norm).collect();
        Ok(Self { amplitudes })
    }

    /// Basis vector |k⟩.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        Self { amplitudes: v }
    }

    /// Wrap amplitudes without normalization; used where a norm ≠ 1 is
    /// meaningful (SSE with renormalization off).
    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.amplitudes.iter().map(|z| z.norm_sqr()).sum())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.dim(),
                context: "PureState::apply",
            });
        }
        Self::new(op.mul_vec(&self.amplitudes))
    }

    /// ⟨ψ|O|ψ⟩.
    pub fn expectation(&self, obs: &Operator) -> C64 {
        let ov = obs.mul_vec(&self.amplitudes);
        self.amplitudes.iter().zip(&ov).map(|(a, b)| a.conj() * b).sum()
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let n = self.dim();
        let op = Operator::from_fn(n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix { op }
    }

    /// Tensor product |self⟩⊗|other⟩.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut v = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                v.push(a * b);
            }
        }
        Self { amplitudes: v }
    }
}

/// Density matrix with enforced Hermiticity, unit trace and positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: Operator, tol: &Tolerances) -> Result<Self> {
        let herm = op.hermiticity_deviation();
        if herm > tol.hermiticity {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = op.trace();
        if math::abs(tr.re - 1.0) > tol.trace || math::abs(tr.im) > tol.trace {
            return Err(Error::BadTrace { trace: tr.re });
        }
        let (eigs, _) = herm_eig(&op.hermitize())?;
        let min = eigs.last().copied().unwrap_or(0.0);
        if min < -tol.positivity {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { op })
    }

    /// Wrap without invariant checks; for internal steps whose output is
    /// CPTP by construction.
    pub(crate) fn from_op_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.density()
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: Operator::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn trace(&self) -> C64 {
        self.op.trace()
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        self.op.matmul(&self.op).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (eigs, _) = herm_eig(&self.op.hermitize()).expect("hermitized input");
        eigs.last().copied().unwrap_or(0.0)
    }
}

/// tr(ρ·O); real within 1e-10 for Hermitian O.
pub fn expectation(rho: &DensityMatrix, obs: &Operator) -> Result<C64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: obs.dim(),
            context: "expectation",
        });
    }
    let n = rho.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += rho.op.at(i, k) * obs.at(k, i);
        }
    }
    Ok(acc)
}

/// Partial trace over the subsystems *not* listed in `keep`.
///
/// `dims` are the subsystem dimensions in tensor order; their product must
/// equal `rho.dim()`. Kept subsystems stay in their original relative order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let op = partial_trace_op(rho.operator(), dims, keep)?;
    Ok(DensityMatrix::from_op_unchecked(op))
}

pub(crate) fn partial_trace_op(rho: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: total,
            context: "partial_trace dims",
        });
    }
    if keep.is_empty() {
        return Err(Error::Invalid("partial_trace: keep set must be nonempty".into()));
    }
    let mut seen = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || seen[k] {
            return Err(Error::Invalid("partial_trace: bad keep index".into()));
        }
        seen[k] = true;
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep_sorted.contains(p)).collect();

    // Row-major strides over the full space.
    let mut strides = vec![1usize; dims.len()];
    for p in (0..dims.len().saturating_sub(1)).rev() {
        strides[p] = strides[p + 1] * dims[p + 1];
    }
    let dim_keep: usize = keep_sorted.iter().map(|&p| dims[p]).product();
    let dim_tr: usize = traced.iter().map(|&p| dims[p]).product();

    // Base offset of each kept / traced multi-index in the full space.
    let offsets = |positions: &[usize], count: usize| -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        for mut lin in 0..count {
            let mut off = 0;
            for &p in positions.iter().rev() {
                off += (lin % dims[p]) * strides[p];
                lin /= dims[p];
            }
            out.push(off);
        }
        out
    };
    let keep_off = offsets(&keep_sorted, dim_keep);
    let tr_off = offsets(&traced, dim_tr);

    let mut out = Operator::zeros(dim_keep);
    for (ik, &ro) in keep_off.iter().enumerate() {
        for (jk, &co) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &tr_off {
                acc += rho.at(ro + t, co + t);
            }
            out.set(ik, jk, acc);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fixed operators and states in the conventions above.
// ---------------------------------------------------------------------------

pub fn pauli_x() -> Operator {
    Operator::from_slice(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> Operator {
    Operator::from_slice(2, &[ZERO, -I, I, ZERO]).unwrap()
}

pub fn pauli_z() -> Operator {
    Operator::from_slice(2, &[ONE, ZERO, ZERO, -ONE]).unwrap()
}

/// σ⁻ = |↓⟩⟨↑|.
pub fn sigma_minus() -> Operator {
    Operator::ketbra(2, 1, 0)
}

/// σ⁺ = |↑⟩⟨↓|.
pub fn sigma_plus() -> Operator {
    Operator::ketbra(2, 0, 1)
}

/// Single-qubit operator embedded on qubit `j ∈ {1, 2}` of the two-qubit
/// space.
pub fn on_qubit(op: &Operator, j: usize) -> Operator {
    let id = Operator::identity(2);
    match j {
        1 => kron(op, &id),
        2 => kron(&id, op),
        _ => panic!("qubit index must be 1 or 2"),
    }
}

pub fn sx(j: usize) -> Operator {
    on_qubit(&pauli_x(), j)
}

pub fn sy(j: usize) -> Operator {
    on_qubit(&pauli_y(), j)
}

pub fn sz(j: usize) -> Operator {
    on_qubit(&pauli_z(), j)
}

pub fn sminus(j: usize) -> Operator {
    on_qubit(&sigma_minus(), j)
}

/// H_S = ω(σᶻ₁ + σᶻ₂).
pub fn free_hamiltonian(omega: f64) -> Operator {
    (&sz(1) + &sz(2)).scale(C64::new(omega, 0.0))
}

pub fn up_up() -> PureState {
    PureState::basis(4, 0)
}

pub fn up_down() -> PureState {
    PureState::basis(4, 1)
}

pub fn down_up() -> PureState {
    PureState::basis(4, 2)
}

pub fn down_down() -> PureState {
    PureState::basis(4, 3)
}

/// (|↓↑⟩ + |↑↓⟩)/√2.
pub fn symmetric_state() -> PureState {
    PureState::new(vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

/// (|↓↑⟩ − |↑↓⟩)/√2.
pub fn antisymmetric_state() -> PureState {
    PureState::new(vec![ZERO, -ONE, ONE, ZERO]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identities() {
        let id2 = Operator::identity(2);
        assert_eq!(kron(&id2, &id2), Operator::identity(4));

        let zi = kron(&pauli_z(), &id2);
        let expected = Operator::from_fn(4, |i, j| {
            if i != j {
                ZERO
            } else {
                c([1.0, 1.0, -1.0, -1.0][i], 0.0)
            }
        });
        assert!(zi.max_abs_diff(&expected) == 0.0);
    }

    #[test]
    fn kron_bit_flip_both_qubits() {
        let xx = kron(&pauli_x(), &pauli_x());
        let flipped = down_down().apply(&xx).unwrap();
        assert!((flipped.inner(&up_up()).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let bell = PureState::new(vec![ONE, ZERO, ZERO, ONE]).unwrap();
        let rho1 = partial_trace(&bell.density(), &[2, 2], &[0]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(rho1.operator().max_abs_diff(mixed.operator()) < 1e-15);
    }

    #[test]
    fn partial_trace_product_state() {
        let a = PureState::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let b = PureState::new(vec![c(1.0, 0.5), c(-0.3, 0.2)]).unwrap();
        let joint = a.tensor(&b).density();
        let ra = partial_trace(&joint, &[2, 2], &[0]).unwrap();
        assert!(ra.operator().max_abs_diff(a.density().operator()) < 1e-15);
        let rb = partial_trace(&joint, &[2, 2], &[1]).unwrap();
        assert!(rb.operator().max_abs_diff(b.density().operator()) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_loop_oracle() {
        // Trace a 3-dim ancilla off a random 12-dim PSD matrix and compare
        // against an explicit block-sum loop.
        let mut rng = crate::rng::SplitMix64::new(7);
        let raw = Operator::from_fn(12, |_, _| c(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
        let psd = raw.matmul(&raw.dagger());
        let tr = psd.trace().re;
        let rho =
            DensityMatrix::new(psd.hermitize().scale(c(1.0 / tr, 0.0))).expect("valid state");

        let got = partial_trace(&rho, &[4, 3], &[0]).unwrap();

        let mut oracle = Operator::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += rho.operator().at(i * 3 + k, j * 3 + k);
                }
                oracle.set(i, j, acc);
            }
        }
        assert!(got.operator().max_abs_diff(&oracle) < 1e-14);
        // Trace preserved and invariants hold on the output.
        assert!((got.trace().re - 1.0).abs() < 1e-12);
        assert!(DensityMatrix::new(got.operator().clone()).is_ok());
    }

    #[test]
    fn partial_trace_keeping_everything_is_identity() {
        let rho = symmetric_state().density();
        let out = partial_trace(&rho, &[2, 2], &[0, 1]).unwrap();
        assert!(out.operator().max_abs_diff(rho.operator()) == 0.0);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let up = up_up().density();
        let v = expectation(&up, &sz(1)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);

        let mixed = DensityMatrix::maximally_mixed(4);
        assert!(expectation(&mixed, &sx(1)).unwrap().norm() < 1e-15);

        let bell = PureState::new(vec![ONE, ZERO, ZERO, ONE]).unwrap().density();
        let xx = kron(&pauli_x(), &pauli_x());
        let v = expectation(&bell, &xx).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_dim_mismatch() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(expectation(&rho, &pauli_x()).is_err());
    }

    #[test]
    fn dagger_involution_exact() {
        let mut rng = crate::rng::SplitMix64::new(3);
        let a = Operator::from_fn(5, |_, _| c(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
        assert!(a.dagger().dagger() == a);
    }

    #[test]
    fn density_matrix_invariants_enforced() {
        // Non-Hermitian rejected.
        let mut m = Operator::identity(2).scale(c(0.5, 0.0));
        m.set(0, 1, c(0.3, 0.0));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian { .. })));

        // Bad trace rejected.
        let m = Operator::identity(2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::BadTrace { .. })));

        // Negative eigenvalue rejected.
        let m = Operator::from_slice(2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]).unwrap();
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn pure_state_normalizes() {
        let s = PureState::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!(PureState::new(vec![ZERO, ZERO]).is_err());
    }
}
