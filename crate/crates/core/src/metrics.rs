//! Synchronization and correlation diagnostics.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::qops::{herm_eig, kron, partial_trace, pauli_y, DensityMatrix};

/// Windowed Pearson correlation of two series over the inclusive window
/// [n, n+window].
///
/// `Ok(None)` flags an undefined value (zero variance in either window) —
/// a constant order parameter, never silently reported as 0.
pub fn pearson(alpha: &[f64], beta: &[f64], n: usize, window: usize) -> Result<Option<f64>> {
    if window < 2 {
        return Err(Error::Invalid("pearson window must be >= 2".into()));
    }
    let end = n + window;
    if alpha.len() <= end || beta.len() <= end {
        return Err(Error::Invalid("series do not cover the requested window".into()));
    }
    let a = &alpha[n..=end];
    let b = &beta[n..=end];
    let len = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / len;
    let mean_b = b.iter().sum::<f64>() / len;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a <= 0.0 || var_b <= 0.0 {
        return Ok(None);
    }
    let r = cov / math::sqrt(var_a * var_b);
    // Guard rounding just past ±1.
    Ok(Some(r.clamp(-1.0, 1.0)))
}

/// Pearson value for every window start that fits; entry `i` corresponds to
/// the window [i, i+window].
pub fn pearson_series(alpha: &[f64], beta: &[f64], window: usize) -> Vec<Option<f64>> {
    let usable = alpha.len().min(beta.len());
    if usable <= window {
        return Vec::new();
    }
    (0..usable - window)
        .map(|n| pearson(alpha, beta, n, window).unwrap_or(None))
        .collect()
}

/// Wootters concurrence of a two-qubit state.
///
/// Eigenvalues of ρρ̃ are taken through the Hermitian form √ρ·ρ̃·√ρ (same
/// spectrum, numerically stable) and clamped at −1e-12 before square roots.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
            context: "concurrence",
        });
    }
    let yy = kron(&pauli_y(), &pauli_y());
    let flipped = yy.matmul(&rho.operator().conj()).matmul(&yy);
    let root = crate::qops::psd_sqrt_op(rho.operator(), 1e-8)?;
    let m = root.matmul(&flipped).matmul(&root);
    let (eigs, _) = herm_eig(&m.hermitize())?;
    let mut roots: Vec<f64> = eigs
        .iter()
        .map(|&l| {
            if l < -1e-12 {
                0.0
            } else {
                math::sqrt(l.max(0.0))
            }
        })
        .collect();
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(0.0))
}

/// Von Neumann entropy, natural logarithm; 0·ln 0 ≡ 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (eigs, _) = herm_eig(&rho.operator().hermitize())?;
    let mut s = 0.0;
    for &l in &eigs {
        if l > 0.0 {
            s -= l * math::ln(l);
        }
    }
    Ok(s)
}

/// I(ρ) = S(ρ₁) + S(ρ₂) − S(ρ) for a two-qubit state.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
            context: "mutual_information",
        });
    }
    let r1 = partial_trace(rho, &[2, 2], &[0])?;
    let r2 = partial_trace(rho, &[2, 2], &[1])?;
    Ok(von_neumann_entropy(&r1)? + von_neumann_entropy(&r2)? - von_neumann_entropy(rho)?)
}

/// Uhlmann fidelity F = (tr√(√ρ₁ ρ₂ √ρ₁))².
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            got: rho2.dim(),
            context: "fidelity",
        });
    }
    let root = crate::qops::psd_sqrt_op(rho1.operator(), 1e-8)?;
    let inner = root.matmul(rho2.operator()).matmul(&root);
    let (eigs, _) = herm_eig(&inner.hermitize())?;
    let tr_root: f64 = eigs.iter().map(|&l| math::sqrt(l.max(0.0))).sum();
    Ok((tr_root * tr_root).clamp(0.0, 1.0 + 1e-9).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{
        down_down, down_up, expectation, symmetric_state, up_down, up_up, DensityMatrix, Operator,
        PureState, C64, ONE, ZERO,
    };
    use crate::rng::SplitMix64;
    use alloc::vec;

    fn bell_phi_plus() -> PureState {
        PureState::new(vec![ONE, ZERO, ZERO, ONE]).unwrap()
    }

    fn random_density(rng: &mut SplitMix64, dim: usize) -> DensityMatrix {
        let raw =
            Operator::from_fn(dim, |_, _| C64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
        let psd = raw.matmul(&raw.dagger());
        let tr = psd.trace().re;
        DensityMatrix::new(psd.hermitize().scale(C64::new(1.0 / tr, 0.0))).unwrap()
    }

    #[test]
    fn pearson_perfect_correlation() {
        let a: Vec<f64> = (0..200).map(|k| libm::sin(0.1 * k as f64)).collect();
        let r = pearson(&a, &a, 10, 140).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-12);

        let b: Vec<f64> = a.iter().map(|x| -x + 3.5).collect();
        let r = pearson(&a, &b, 10, 140).unwrap().unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_direct_formula_oracle() {
        let mut rng = SplitMix64::new(5);
        let a: Vec<f64> = (0..200).map(|_| rng.next_f64()).collect();
        let b: Vec<f64> = (0..200).map(|_| rng.next_f64()).collect();
        let n = 13;
        let dn = 140;
        let got = pearson(&a, &b, n, dn).unwrap().unwrap();

        // Direct re-evaluation: covariance over stddevs.
        let aw = &a[n..=n + dn];
        let bw = &b[n..=n + dn];
        let m = aw.len() as f64;
        let ma = aw.iter().sum::<f64>() / m;
        let mb = bw.iter().sum::<f64>() / m;
        let cov: f64 = aw.iter().zip(bw).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let sa: f64 = aw.iter().map(|x| (x - ma) * (x - ma)).sum::<f64>();
        let sb: f64 = bw.iter().map(|y| (y - mb) * (y - mb)).sum::<f64>();
        let oracle = cov / libm::sqrt(sa * sb);
        assert!((got - oracle).abs() < 1e-12);
        assert!((-1.0..=1.0).contains(&got));
    }

    #[test]
    fn pearson_zero_variance_is_flagged() {
        let a = vec![1.0; 200];
        let b: Vec<f64> = (0..200).map(|k| k as f64).collect();
        assert_eq!(pearson(&a, &b, 0, 140).unwrap(), None);
    }

    #[test]
    fn pearson_window_bounds() {
        let a = vec![0.0; 10];
        assert!(pearson(&a, &a, 0, 1).is_err());
        assert!(pearson(&a, &a, 5, 140).is_err());
    }

    #[test]
    fn pearson_series_layout() {
        let a: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let s = pearson_series(&a, &a, 4);
        assert_eq!(s.len(), 16);
        assert!(s.iter().all(|v| (v.unwrap() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn concurrence_bell_and_product() {
        assert!((concurrence(&bell_phi_plus().density()).unwrap() - 1.0).abs() < 1e-10);
        assert!(concurrence(&up_down().density()).unwrap() < 1e-10);
    }

    #[test]
    fn concurrence_symmetric_dark_state_closed_form() {
        // ρ₂₂ = ρ₃₃ = ρ₂₃ = 1/2:
        // √λ₁ = |√(ρ₂₂ρ₃₃) + √(ρ₂₃ρ₃₂)| = 1, √λ₂ = 0 ⇒ C = 1.
        let rho = symmetric_state().density();
        assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&bell_phi_plus().density()).unwrap() < 1e-10);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap() - libm::log(2.0)).abs() < 1e-12);

        // Spectral oracle on a random state.
        let mut rng = SplitMix64::new(21);
        let rho = random_density(&mut rng, 4);
        let (eigs, _) = herm_eig(&rho.operator().hermitize()).unwrap();
        let oracle: f64 =
            eigs.iter().filter(|&&l| l > 0.0).map(|&l| -l * libm::log(l)).sum();
        assert!((von_neumann_entropy(&rho).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn mutual_information_examples() {
        let a = PureState::new(vec![C64::new(0.8, 0.0), C64::new(0.0, 0.6)]).unwrap();
        let b = PureState::new(vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)]).unwrap();
        let product = a.tensor(&b).density();
        assert!(mutual_information(&product).unwrap().abs() < 1e-10);

        let bell = bell_phi_plus().density();
        assert!((mutual_information(&bell).unwrap() - 2.0 * libm::log(2.0)).abs() < 1e-10);

        // Classically correlated mixture.
        let mix = &up_up().density().operator().scale(C64::new(0.5, 0.0))
            + &down_down().density().operator().scale(C64::new(0.5, 0.0));
        let mix = DensityMatrix::new(mix).unwrap();
        assert!((mutual_information(&mix).unwrap() - libm::log(2.0)).abs() < 1e-10);

        // Bounds.
        let mut rng = SplitMix64::new(33);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 4);
            let mi = mutual_information(&rho).unwrap();
            assert!(mi >= -1e-10 && mi <= 2.0 * libm::log(2.0) + 1e-10);
        }
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = SplitMix64::new(44);
        let rho = random_density(&mut rng, 4);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);

        assert!(fidelity(&up_up().density(), &down_up().density()).unwrap() < 1e-12);

        // Pure states: overlap squared.
        let psi = PureState::new(vec![ONE, ONE, ZERO, ZERO]).unwrap();
        let chi = PureState::new(vec![ONE, ZERO, ONE, ZERO]).unwrap();
        let f = fidelity(&psi.density(), &chi.density()).unwrap();
        let overlap = psi.inner(&chi).norm_sqr();
        assert!((f - overlap).abs() < 1e-10);

        // Symmetry.
        let sigma = random_density(&mut rng, 4);
        let f1 = fidelity(&rho, &sigma).unwrap();
        let f2 = fidelity(&sigma, &rho).unwrap();
        assert!((f1 - f2).abs() < 1e-9);
    }

    #[test]
    fn mixed_state_diagnostics_are_consistent() {
        let mut rng = SplitMix64::new(3);
        let rho = random_density(&mut rng, 4);
        let c = concurrence(&rho).unwrap();
        assert!((0.0..=1.0).contains(&c));
        let _ = expectation(&rho, &crate::qops::sx(1)).unwrap();
    }
}
