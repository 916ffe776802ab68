//! Hermitian eigendecomposition and PSD square root via cyclic complex
//! Jacobi rotations, plus a one-sided Jacobi SVD used for numerical kernels.
//!
//! Jacobi is chosen over LAPACK-style reductions because the dimensions here
//! never exceed a few hundred and it computes tiny singular values with
//! absolute (not squared) accuracy, which the dark-state kernel threshold
//! relies on.

use alloc::vec;
use alloc::vec::Vec;

use super::{DensityMatrix, Operator, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::math;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors as columns. Errors if the input deviates from Hermiticity by
/// more than 1e-8.
pub fn herm_eig(a: &Operator) -> Result<(Vec<f64>, Operator)> {
    let dev = a.hermiticity_deviation();
    if dev > 1e-8 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = a.dim();
    let mut m = a.hermitize();
    let mut v = Operator::identity(n);
    let scale = m.norm_fro().max(1e-300);

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let d = m.at(p, q);
                let dn = d.norm();
                if dn > off {
                    off = dn;
                }
                if dn <= 1e-18 * scale {
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(m.at(p, p).re, m.at(q, q).re, d);
                apply_similarity(&mut m, p, q, c, s, phase);
                apply_column_rotation(&mut v, p, q, c, s, phase);
            }
        }
        if off <= 1e-16 * scale {
            break;
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|k| (m.at(k, k).re, k)).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = Operator::zeros(n);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_col, v.at(i, old_col));
        }
    }
    Ok((eigenvalues, vectors))
}

/// Rotation parameters diagonalizing the Hermitian 2×2 [[a, d], [d̄, b]].
fn jacobi_rotation(a: f64, b: f64, d: C64) -> (f64, f64, C64) {
    let dn = d.norm();
    let phase = d / C64::new(dn, 0.0);
    let tau = (b - a) / (2.0 * dn);
    let t = if tau >= 0.0 {
        1.0 / (tau + math::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / math::sqrt(1.0 + t * t);
    (c, t * c, phase)
}

/// M ← J† M J with the rotation acting on rows/columns (p, q).
fn apply_similarity(m: &mut Operator, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    apply_column_rotation(m, p, q, c, s, phase);
    // Row update with J†.
    let n = m.dim();
    let cs = C64::new(c, 0.0);
    let ss = C64::new(s, 0.0);
    for i in 0..n {
        let rp = m.at(p, i);
        let rq = m.at(q, i);
        m.set(p, i, cs * rp - ss * phase * rq);
        m.set(q, i, ss * rp + cs * phase * rq);
    }
}

/// M ← M J (columns p, q mixed).
fn apply_column_rotation(m: &mut Operator, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let n = m.dim();
    let cs = C64::new(c, 0.0);
    let ss = C64::new(s, 0.0);
    let ph = phase.conj();
    for i in 0..n {
        let cp = m.at(i, p);
        let cq = m.at(i, q);
        m.set(i, p, cs * cp - ss * ph * cq);
        m.set(i, q, ss * cp + cs * ph * cq);
    }
}

/// Principal square root of a positive semidefinite density matrix.
///
/// Errors if an eigenvalue falls below −1e-8; eigenvalues in (−1e-8, 0) are
/// clamped to zero.
pub fn matsqrt_psd(a: &DensityMatrix) -> Result<Operator> {
    psd_sqrt_op(a.operator(), 1e-8)
}

pub(crate) fn psd_sqrt_op(op: &Operator, neg_tol: f64) -> Result<Operator> {
    let (eigs, v) = herm_eig(op)?;
    if let Some(&min) = eigs.last() {
        if min < -neg_tol {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    let n = op.dim();
    let mut out = Operator::zeros(n);
    for k in 0..n {
        let lambda = eigs[k].max(0.0);
        let root = math::sqrt(lambda);
        if root == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let add = v.at(i, k) * v.at(j, k).conj() * root;
                let cur = out.at(i, j);
                out.set(i, j, cur + add);
            }
        }
    }
    Ok(out)
}

/// Columns of several operators stacked vertically: column `j` of the result
/// is the concatenation of column `j` of each input.
pub(crate) fn stack_columns(ops: &[Operator]) -> Vec<Vec<C64>> {
    let n = ops[0].dim();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut col = Vec::new();
        for op in ops {
            debug_assert_eq!(op.dim(), n);
            for i in 0..n {
                col.push(op.at(i, j));
            }
        }
        cols.push(col);
    }
    cols
}

/// Orthonormal basis of the (right) null space of the matrix whose columns
/// are given, by one-sided Jacobi orthogonalization.
///
/// A column counts as null when its singular value is at most
/// `threshold · max(1, σ_max)`.
pub(crate) fn right_kernel(mut cols: Vec<Vec<C64>>, threshold: f64) -> Vec<Vec<C64>> {
    let n = cols.len();
    if n == 0 {
        return Vec::new();
    }
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut col = vec![ZERO; n];
            col[j] = ONE;
            col
        })
        .collect();

    for _sweep in 0..64 {
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let a: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let b: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if a < 1e-300 || b < 1e-300 {
                    continue;
                }
                let d: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let rel = d.norm() / math::sqrt(a * b);
                if rel > worst {
                    worst = rel;
                }
                if rel <= 1e-15 {
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(a, b, d);
                rotate_pair(&mut cols, p, q, c, s, phase);
                rotate_pair(&mut v, p, q, c, s, phase);
            }
        }
        if worst <= 1e-15 {
            break;
        }
    }

    let sigmas: Vec<f64> = cols
        .iter()
        .map(|col| math::sqrt(col.iter().map(|z| z.norm_sqr()).sum()))
        .collect();
    let sigma_max = sigmas.iter().fold(0.0f64, |m, &s| m.max(s));
    let cut = threshold * sigma_max.max(1.0);
    let mut kernel = Vec::new();
    for (j, &s) in sigmas.iter().enumerate() {
        if s <= cut {
            kernel.push(v[j].clone());
        }
    }
    kernel
}

fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let cs = C64::new(c, 0.0);
    let ss = C64::new(s, 0.0);
    let ph = phase.conj();
    let len = cols[p].len();
    for i in 0..len {
        let cp = cols[p][i];
        let cq = cols[q][i];
        cols[p][i] = cs * cp - ss * ph * cq;
        cols[q][i] = ss * cp + cs * ph * cq;
    }
}

/// Multiply by a global phase making the largest-magnitude component real
/// and positive. Handy for comparing states defined up to phase.
pub fn canonicalize_phase(v: &mut [C64]) {
    let mut best = 0.0;
    let mut idx = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            idx = i;
        }
    }
    if best == 0.0 {
        return;
    }
    let phase = v[idx] / C64::new(best, 0.0);
    let correction = phase.conj();
    for z in v.iter_mut() {
        *z *= correction;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{pauli_x, DensityMatrix, PureState};
    use crate::rng::SplitMix64;

    #[test]
    fn pauli_x_spectrum() {
        let (eigs, v) = herm_eig(&pauli_x()).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-14);
        assert!((eigs[1] + 1.0).abs() < 1e-14);
        // Columns orthonormal.
        let g = v.dagger().matmul(&v);
        assert!(g.max_abs_diff(&Operator::identity(2)) < 1e-14);
    }

    #[test]
    fn identity_spectrum() {
        let (eigs, _) = herm_eig(&Operator::identity(4)).unwrap();
        assert!(eigs.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = SplitMix64::new(42);
        for dim in [4usize, 9, 16] {
            let raw = Operator::from_fn(dim, |_, _| {
                C64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5)
            });
            let h = raw.hermitize();
            let (eigs, v) = herm_eig(&h).unwrap();
            // Sorted descending.
            for w in eigs.windows(2) {
                assert!(w[0] >= w[1]);
            }
            // A v_k = λ_k v_k and VΛV† = A.
            let mut lam = Operator::zeros(dim);
            for k in 0..dim {
                lam.set(k, k, C64::new(eigs[k], 0.0));
            }
            let rebuilt = v.matmul(&lam).matmul(&v.dagger());
            assert!(rebuilt.max_abs_diff(&h) < 1e-8, "dim {dim}");
            let g = v.dagger().matmul(&v);
            assert!(g.max_abs_diff(&Operator::identity(dim)) < 1e-8);
        }
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = Operator::ketbra(2, 0, 1);
        assert!(herm_eig(&m).is_err());
    }

    #[test]
    fn sqrt_of_quarter_identity() {
        let rho = DensityMatrix::maximally_mixed(4);
        let s = matsqrt_psd(&rho).unwrap();
        let expected = Operator::identity(4).scale(C64::new(0.5, 0.0));
        assert!(s.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn sqrt_of_projector_is_projector() {
        let rho = crate::qops::down_down().density();
        let s = matsqrt_psd(&rho).unwrap();
        assert!(s.max_abs_diff(rho.operator()) < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = SplitMix64::new(11);
        let raw = Operator::from_fn(4, |_, _| C64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
        let psd = raw.matmul(&raw.dagger());
        let tr = psd.trace().re;
        let rho = DensityMatrix::new(psd.hermitize().scale(C64::new(1.0 / tr, 0.0))).unwrap();
        let s = matsqrt_psd(&rho).unwrap();
        assert!(s.matmul(&s).max_abs_diff(rho.operator()) < 1e-8);
    }

    #[test]
    fn kernel_of_lowering_operator() {
        // σ⁻ annihilates |↓⟩ only.
        let cols = stack_columns(&[crate::qops::sigma_minus()]);
        let kernel = right_kernel(cols, 1e-10);
        assert_eq!(kernel.len(), 1);
        // Kernel vector ∝ |↓⟩ = e₁.
        assert!(kernel[0][0].norm() < 1e-12);
        assert!((kernel[0][1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_dimension_counts_rank_deficiency() {
        // Projector |0⟩⟨0| on dim 3 has a two-dimensional kernel.
        let p = Operator::ketbra(3, 0, 0);
        let kernel = right_kernel(stack_columns(&[p]), 1e-10);
        assert_eq!(kernel.len(), 2);
        for k in &kernel {
            assert!(k[0].norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_phase_makes_leading_entry_real() {
        let mut v = [C64::new(0.0, 0.8), C64::new(0.3, 0.0)];
        canonicalize_phase(&mut v);
        assert!((v[0].re - 0.8).abs() < 1e-15);
        assert!(v[0].im.abs() < 1e-15);
        let psi = PureState::new(v.to_vec()).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }
}
