use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SqueezedThermalSpec, PHYSICALITY_TOL, SYMMETRY_TOL};
use crate::{Error, Result};

/// A Gaussian state of n modes: mean vector and covariance matrix over the
/// quadratures (q₁..qₙ, p₁..pₙ).
///
/// Covariances accepted by [`GaussianState::from_parts`] must be symmetric to
/// 1e-12 and physical: every symplectic eigenvalue at least 1/2 − 1e-9.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Wire format: nested rows for the covariance so serialized states are
/// readable and diffable.
#[derive(Serialize, Deserialize)]
struct StateRepr {
    n_modes: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl From<GaussianState> for StateRepr {
    fn from(state: GaussianState) -> Self {
        let n = state.n_modes;
        let cov = (0..2 * n)
            .map(|i| (0..2 * n).map(|j| state.cov[(i, j)]).collect())
            .collect();
        StateRepr {
            n_modes: n,
            mean: state.mean.iter().copied().collect(),
            cov,
        }
    }
}

impl TryFrom<StateRepr> for GaussianState {
    type Error = Error;

    fn try_from(repr: StateRepr) -> Result<Self> {
        let dim = 2 * repr.n_modes;
        if repr.mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: repr.mean.len(),
            });
        }
        if repr.cov.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: repr.cov.len(),
            });
        }
        for row in &repr.cov {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        let mean = DVector::from_vec(repr.mean);
        let cov = DMatrix::from_fn(dim, dim, |i, j| repr.cov[i][j]);
        GaussianState::from_parts(mean, cov)
    }
}

impl GaussianState {
    /// The n-mode vacuum: zero mean, covariance I/2.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::EmptyState);
        }
        Ok(Self {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        })
    }

    /// A single-mode squeezed thermal state: zero mean, covariance
    /// diag(κ, ε).
    pub fn squeezed_thermal(spec: SqueezedThermalSpec) -> Self {
        let mut cov = DMatrix::zeros(2, 2);
        cov[(0, 0)] = spec.kappa();
        cov[(1, 1)] = spec.epsilon();
        Self {
            n_modes: 1,
            mean: DVector::zeros(2),
            cov,
        }
    }

    /// Builds a state from explicit mean and covariance, validating symmetry
    /// and physicality.
    pub fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() % 2 != 0 {
            return Err(Error::EmptyState);
        }
        let dim = mean.len();
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cov.nrows().max(cov.ncols()),
            });
        }
        let mut defect = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                defect = defect.max((cov[(i, j)] - cov[(j, i)]).abs());
            }
        }
        if defect > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { defect });
        }
        let symmetrized = (&cov + cov.transpose()) * 0.5;
        let nu = symplectic_eigenvalues_of(&symmetrized)?;
        let min_nu = nu.iter().copied().fold(f64::INFINITY, f64::min);
        if min_nu < 0.5 - PHYSICALITY_TOL {
            return Err(Error::NotPhysical {
                min_eigenvalue: min_nu,
            });
        }
        Ok(Self {
            n_modes: dim / 2,
            mean,
            cov: symmetrized,
        })
    }

    /// Internal constructor that skips the physicality test. Conditioning and
    /// averaging produce covariances that are physical by construction; the
    /// noise-budget probe is deliberately sub-vacuum.
    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        debug_assert_eq!(mean.len(), cov.nrows());
        debug_assert_eq!(mean.len(), cov.ncols());
        Self {
            n_modes: mean.len() / 2,
            mean,
            cov,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Index of q̂ for `mode` in the flat quadrature ordering.
    pub fn q_index(&self, mode: usize) -> usize {
        mode
    }

    /// Index of p̂ for `mode` in the flat quadrature ordering.
    pub fn p_index(&self, mode: usize) -> usize {
        self.n_modes + mode
    }

    pub(crate) fn expect_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::ModeOutOfRange {
                mode,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }

    /// Tensor product: modes of `other` are appended after the modes of
    /// `self`, preserving the (q.., p..) ordering of the joint state.
    pub fn tensor(&self, other: &Self) -> Self {
        let n = self.n_modes;
        let m = other.n_modes;
        let joint = n + m;
        // Flat index in the joint ordering for quadrature index `k` of
        // either factor.
        let embed_a = |k: usize| if k < n { k } else { joint + (k - n) };
        let embed_b = |k: usize| if k < m { n + k } else { joint + n + (k - m) };

        let mut mean = DVector::zeros(2 * joint);
        let mut cov = DMatrix::zeros(2 * joint, 2 * joint);
        for k in 0..2 * n {
            mean[embed_a(k)] = self.mean[k];
            for l in 0..2 * n {
                cov[(embed_a(k), embed_a(l))] = self.cov[(k, l)];
            }
        }
        for k in 0..2 * m {
            mean[embed_b(k)] = other.mean[k];
            for l in 0..2 * m {
                cov[(embed_b(k), embed_b(l))] = other.cov[(k, l)];
            }
        }
        Self {
            n_modes: joint,
            mean,
            cov,
        }
    }

    /// Drops one mode (both its quadratures), renumbering the survivors in
    /// order. Callers are responsible for having conditioned or traced out
    /// the mode first.
    pub(crate) fn remove_mode(&self, mode: usize) -> Self {
        let n = self.n_modes;
        debug_assert!(mode < n && n > 1);
        let kept: Vec<usize> = (0..n)
            .filter(|&k| k != mode)
            .flat_map(|k| [k, n + k])
            .collect();
        // `kept` lists (q, p) per surviving mode; regroup into (q.., p..).
        let survivors = n - 1;
        let mut order = Vec::with_capacity(2 * survivors);
        for i in 0..survivors {
            order.push(kept[2 * i]);
        }
        for i in 0..survivors {
            order.push(kept[2 * i + 1]);
        }
        let mean = DVector::from_fn(2 * survivors, |i, _| self.mean[order[i]]);
        let cov = DMatrix::from_fn(2 * survivors, 2 * survivors, |i, j| {
            self.cov[(order[i], order[j])]
        });
        Self {
            n_modes: survivors,
            mean,
            cov,
        }
    }

    /// Reorders modes so the mode at `from` sits at logical position `to`,
    /// with the others shifting to close the gap.
    pub(crate) fn move_mode(&self, from: usize, to: usize) -> Self {
        let n = self.n_modes;
        debug_assert!(from < n && to < n);
        let mut modes: Vec<usize> = (0..n).filter(|&k| k != from).collect();
        modes.insert(to, from);
        let mut order = Vec::with_capacity(2 * n);
        for &m in &modes {
            order.push(m);
        }
        for &m in &modes {
            order.push(n + m);
        }
        let mean = DVector::from_fn(2 * n, |i, _| self.mean[order[i]]);
        let cov = DMatrix::from_fn(2 * n, 2 * n, |i, j| self.cov[(order[i], order[j])]);
        Self {
            n_modes: n,
            mean,
            cov,
        }
    }

    /// Symplectic (Williamson) eigenvalues, ascending, one per mode.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues_of(&self.cov)
    }

    /// Variance of q̂ on `mode`.
    pub fn q_variance(&self, mode: usize) -> f64 {
        self.cov[(mode, mode)]
    }

    /// Variance of p̂ on `mode`.
    pub fn p_variance(&self, mode: usize) -> f64 {
        let i = self.n_modes + mode;
        self.cov[(i, i)]
    }
}

/// Symplectic eigenvalues of a covariance matrix, ascending, one per mode.
///
/// For positive definite Σ = LLᵀ the eigenvalues of iΩΣ match those of the
/// antisymmetric LᵀΩL, whose singular values are the symplectic eigenvalues
/// doubled up. Semidefinite input falls back to the moduli of the complex
/// eigenvalues of ΩΣ.
pub fn symplectic_eigenvalues_of(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = cov.nrows();
    if dim == 0 || dim % 2 != 0 || cov.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim.max(2),
            got: cov.ncols(),
        });
    }
    let n = dim / 2;
    let omega = super::symplectic_form(n);
    let doubled: Vec<f64> = match nalgebra::Cholesky::new(cov.clone()) {
        Some(chol) => {
            let l = chol.l();
            let core = l.transpose() * &omega * &l;
            core.singular_values().iter().copied().collect()
        }
        None => (&omega * cov)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect(),
    };
    let mut sorted = doubled;
    sorted.sort_by(|a, b| a.total_cmp(b));
    // Each symplectic eigenvalue appears twice; average the pairs to shave
    // float noise.
    Ok((0..n).map(|k| 0.5 * (sorted[2 * k] + sorted[2 * k + 1])).collect())
}

/// A reproducible random physical state: a random symplectic circuit applied
/// to a product of mildly thermal squeezed modes, plus a random displacement.
///
/// Useful as generic test input; every output passes [`GaussianState::from_parts`]
/// validation by construction.
pub fn random_physical_state<R: Rng + ?Sized>(rng: &mut R, n_modes: usize) -> Result<GaussianState> {
    use super::SymplecticTransform;

    if n_modes == 0 {
        return Err(Error::EmptyState);
    }
    // Base: uncorrelated modes with symplectic eigenvalues in [0.5, 1.5].
    let mut cov = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for mode in 0..n_modes {
        let nu = rng.random_range(0.5..1.5);
        let s: f64 = rng.random_range(0.7..1.6);
        cov[(mode, mode)] = nu * s * s;
        cov[(n_modes + mode, n_modes + mode)] = nu / (s * s);
    }
    // Mix with a short random circuit of shears, Fouriers and CZ gates.
    let mut circuit = SymplecticTransform::identity(n_modes);
    for _ in 0..(2 * n_modes).max(3) {
        let pick = rng.random_range(0..3u8);
        let step = match pick {
            0 => {
                let mode = rng.random_range(0..n_modes);
                SymplecticTransform::shear(n_modes, mode, rng.random_range(-1.0..1.0))?
            }
            1 => {
                let mode = rng.random_range(0..n_modes);
                SymplecticTransform::fourier(n_modes, mode)?
            }
            _ if n_modes > 1 => {
                let i = rng.random_range(0..n_modes);
                let mut j = rng.random_range(0..n_modes - 1);
                if j >= i {
                    j += 1;
                }
                SymplecticTransform::cz(n_modes, i, j, rng.random_range(-1.0..1.0))?
            }
            _ => SymplecticTransform::shear(n_modes, 0, rng.random_range(-1.0..1.0))?,
        };
        circuit = step.compose(&circuit)?;
    }
    let s = circuit.matrix();
    let mixed = s * cov * s.transpose();
    let mean = DVector::from_fn(2 * n_modes, |_, _| rng.random_range(-2.0..2.0));
    GaussianState::from_parts(mean, mixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn vacuum_has_unit_purity() {
        let vac = GaussianState::vacuum(3).unwrap();
        for nu in vac.symplectic_eigenvalues().unwrap() {
            assert!((nu - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn squeezed_thermal_variances_follow_the_parameters() {
        let spec = SqueezedThermalSpec::new(1.78, 1.0).unwrap();
        let state = GaussianState::squeezed_thermal(spec);
        let s2 = 1.78f64 * 1.78;
        assert!((state.q_variance(0) - 0.5 * (s2 + 1.0)).abs() < 1e-15);
        assert!((state.p_variance(0) - 0.5 / s2).abs() < 1e-15);

        // One symplectic eigenvalue, √(κε); impure because δ > 0.
        let nu = state.symplectic_eigenvalues().unwrap();
        let expected = (spec.kappa() * spec.epsilon()).sqrt();
        assert!((nu[0] - expected).abs() < 1e-12);
        assert!(nu[0] > 0.5 + 1e-3);
        assert!(!spec.is_pure());
        assert!(SqueezedThermalSpec::new(1.78, 0.0).unwrap().is_pure());
    }

    #[test]
    fn spec_rejects_unphysical_parameters() {
        assert!(matches!(
            SqueezedThermalSpec::new(0.9, 0.0),
            Err(Error::InvalidSqueezingFactor(_))
        ));
        assert!(matches!(
            SqueezedThermalSpec::new(2.0, -0.1),
            Err(Error::InvalidAntiSqueezing(_))
        ));
    }

    #[test]
    fn from_parts_rejects_asymmetric_and_subvacuum_covariances() {
        let mean = DVector::zeros(2);
        let mut lopsided = DMatrix::identity(2, 2) * 0.5;
        lopsided[(0, 1)] = 1e-6;
        assert!(matches!(
            GaussianState::from_parts(mean.clone(), lopsided),
            Err(Error::NotSymmetric { .. })
        ));

        let squashed = DMatrix::identity(2, 2) * 0.4;
        assert!(matches!(
            GaussianState::from_parts(mean, squashed),
            Err(Error::NotPhysical { .. })
        ));
    }

    #[test]
    fn tensor_keeps_block_structure_in_joint_ordering() {
        let a = GaussianState::squeezed_thermal(SqueezedThermalSpec::new(2.0, 0.5).unwrap());
        let b = GaussianState::vacuum(1).unwrap();
        let ab = a.tensor(&b);
        assert_eq!(ab.n_modes(), 2);
        // Joint ordering (q₁, q₂, p₁, p₂): a sits at indices 0 and 2.
        assert!((ab.cov()[(0, 0)] - a.q_variance(0)).abs() < 1e-15);
        assert!((ab.cov()[(2, 2)] - a.p_variance(0)).abs() < 1e-15);
        assert!((ab.cov()[(1, 1)] - 0.5).abs() < 1e-15);
        assert!((ab.cov()[(3, 3)] - 0.5).abs() < 1e-15);
        assert!(ab.cov()[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn remove_mode_renumbers_survivors() {
        let a = GaussianState::squeezed_thermal(SqueezedThermalSpec::new(2.0, 0.0).unwrap());
        let b = GaussianState::vacuum(1).unwrap();
        let c = GaussianState::squeezed_thermal(SqueezedThermalSpec::new(3.0, 1.0).unwrap());
        let abc = a.tensor(&b).tensor(&c);
        let ac = abc.remove_mode(1);
        assert_eq!(ac.n_modes(), 2);
        assert!((ac.q_variance(0) - a.q_variance(0)).abs() < 1e-15);
        assert!((ac.q_variance(1) - c.q_variance(0)).abs() < 1e-15);
        assert!((ac.p_variance(1) - c.p_variance(0)).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trips_and_uses_nested_rows() {
        let state = GaussianState::squeezed_thermal(SqueezedThermalSpec::new(1.5, 0.3).unwrap());
        let json = serde_json::to_string(&state).unwrap();
        assert!(json.contains("\"n_modes\":1"));
        assert!(json.contains("\"cov\":[["));
        let back: GaussianState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn serde_rejects_tampered_covariances() {
        let state = GaussianState::vacuum(1).unwrap();
        let json = serde_json::to_string(&state).unwrap();
        let hacked = json.replace("0.5", "0.1");
        assert!(serde_json::from_str::<GaussianState>(&hacked).is_err());
    }

    #[test]
    fn random_states_are_physical_and_reproducible() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..20 {
            let state = random_physical_state(&mut rng, 3).unwrap();
            let nu = state.symplectic_eigenvalues().unwrap();
            assert!(nu.iter().all(|v| *v >= 0.5 - 1e-9));
        }
        let mut rng_a = ChaCha12Rng::seed_from_u64(13);
        let mut rng_b = ChaCha12Rng::seed_from_u64(13);
        let sa = random_physical_state(&mut rng_a, 2).unwrap();
        let sb = random_physical_state(&mut rng_b, 2).unwrap();
        assert_eq!(sa, sb);
    }
}
