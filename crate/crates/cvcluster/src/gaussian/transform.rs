use nalgebra::{DMatrix, DVector};

use super::{GaussianState, SYMPLECTIC_TOL};
use crate::{Error, Result};

/// The canonical symplectic form Ω = [[0, I], [−I, 0]] for `n_modes` modes in
/// (q.., p..) ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(k, n_modes + k)] = 1.0;
        omega[(n_modes + k, k)] = -1.0;
    }
    omega
}

/// An affine symplectic map x ↦ Sx + c on the quadratures of `n_modes`
/// modes. Under it a Gaussian state transforms as μ ↦ Sμ + c, Σ ↦ SΣSᵀ.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    matrix: DMatrix<f64>,
    shift: DVector<f64>,
}

impl SymplecticTransform {
    pub fn identity(n_modes: usize) -> Self {
        Self {
            n_modes,
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            shift: DVector::zeros(2 * n_modes),
        }
    }

    /// Validates and wraps an explicit matrix and shift. The matrix must
    /// satisfy SᵀΩS = Ω to 1e-12.
    pub fn from_parts(matrix: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || dim % 2 != 0 || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim.max(2),
                got: matrix.ncols(),
            });
        }
        if shift.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: shift.len(),
            });
        }
        let n_modes = dim / 2;
        let omega = symplectic_form(n_modes);
        let residual = matrix.transpose() * &omega * &matrix - &omega;
        let defect = residual.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if defect > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic { defect });
        }
        Ok(Self {
            n_modes,
            matrix,
            shift,
        })
    }

    /// The entangling gate CZ[g] = exp(i g q̂ᵢ q̂ⱼ): pᵢ += g qⱼ and
    /// pⱼ += g qᵢ, positions untouched.
    pub fn cz(n_modes: usize, i: usize, j: usize, g: f64) -> Result<Self> {
        check_mode(n_modes, i)?;
        check_mode(n_modes, j)?;
        if i == j {
            return Err(Error::DuplicateMode(i));
        }
        let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
        matrix[(n_modes + i, j)] = g;
        matrix[(n_modes + j, i)] = g;
        Ok(Self {
            n_modes,
            matrix,
            shift: DVector::zeros(2 * n_modes),
        })
    }

    /// The shear P(m) = exp(i m q̂²/2) on one mode: p += m q.
    pub fn shear(n_modes: usize, mode: usize, m: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
        matrix[(n_modes + mode, mode)] = m;
        Ok(Self {
            n_modes,
            matrix,
            shift: DVector::zeros(2 * n_modes),
        })
    }

    /// The Fourier gate on one mode: q ↦ −p, p ↦ q.
    pub fn fourier(n_modes: usize, mode: usize) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
        matrix[(mode, mode)] = 0.0;
        matrix[(mode, n_modes + mode)] = -1.0;
        matrix[(n_modes + mode, mode)] = 1.0;
        matrix[(n_modes + mode, n_modes + mode)] = 0.0;
        Ok(Self {
            n_modes,
            matrix,
            shift: DVector::zeros(2 * n_modes),
        })
    }

    /// The position displacement X(t) = exp(−i t p̂): q += t.
    pub fn displace_q(n_modes: usize, mode: usize, t: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut shift = DVector::zeros(2 * n_modes);
        shift[mode] = t;
        Ok(Self {
            n_modes,
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            shift,
        })
    }

    /// The momentum displacement Z(t) = exp(i t q̂): p += t.
    pub fn displace_p(n_modes: usize, mode: usize, t: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut shift = DVector::zeros(2 * n_modes);
        shift[n_modes + mode] = t;
        Ok(Self {
            n_modes,
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            shift,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n_modes,
                got: 2 * other.n_modes,
            });
        }
        Ok(Self {
            n_modes: self.n_modes,
            matrix: &self.matrix * &other.matrix,
            shift: &self.matrix * &other.shift + &self.shift,
        })
    }

    /// Exact inverse via the symplectic identity S⁻¹ = −Ω Sᵀ Ω.
    pub fn inverse(&self) -> Self {
        let omega = symplectic_form(self.n_modes);
        let inv = -(&omega * self.matrix.transpose() * &omega);
        let shift = -(&inv * &self.shift);
        Self {
            n_modes: self.n_modes,
            matrix: inv,
            shift,
        }
    }

    /// Applies the map to a state: μ ↦ Sμ + c, Σ ↦ SΣSᵀ.
    pub fn apply_to(&self, state: &GaussianState) -> Result<GaussianState> {
        if state.n_modes() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n_modes,
                got: 2 * state.n_modes(),
            });
        }
        let mean = &self.matrix * state.mean() + &self.shift;
        let cov = &self.matrix * state.cov() * self.matrix.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(GaussianState::from_parts_unchecked(mean, cov))
    }
}

fn check_mode(n_modes: usize, mode: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::ModeOutOfRange { mode, n_modes });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_gates_are_symplectic() {
        for gate in [
            SymplecticTransform::cz(3, 0, 2, 0.7).unwrap(),
            SymplecticTransform::shear(3, 1, -1.3).unwrap(),
            SymplecticTransform::fourier(3, 2).unwrap(),
            SymplecticTransform::displace_q(3, 0, 2.0).unwrap(),
            SymplecticTransform::displace_p(3, 1, -0.4).unwrap(),
        ] {
            let omega = symplectic_form(3);
            let residual = gate.matrix().transpose() * &omega * gate.matrix() - &omega;
            let defect = residual.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(defect < 1e-14, "defect {defect}");
        }
    }

    #[test]
    fn from_parts_rejects_non_symplectic_matrices() {
        let matrix = DMatrix::identity(2, 2) * 2.0;
        let err = SymplecticTransform::from_parts(matrix, DVector::zeros(2));
        assert!(matches!(err, Err(Error::NotSymplectic { .. })));
    }

    #[test]
    fn fourier_squares_to_parity_and_fourth_power_to_identity() {
        let f = SymplecticTransform::fourier(1, 0).unwrap();
        let f2 = f.compose(&f).unwrap();
        assert!((f2.matrix()[(0, 0)] + 1.0).abs() < 1e-15);
        assert!((f2.matrix()[(1, 1)] + 1.0).abs() < 1e-15);
        let f4 = f2.compose(&f2).unwrap();
        let eye = DMatrix::identity(2, 2);
        assert!((f4.matrix() - eye).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn inverse_undoes_composition_exactly() {
        let a = SymplecticTransform::cz(2, 0, 1, 1.0).unwrap();
        let b = SymplecticTransform::shear(2, 0, 0.5).unwrap();
        let c = SymplecticTransform::fourier(2, 1).unwrap();
        let d = SymplecticTransform::displace_p(2, 0, 1.7).unwrap();
        let chain = d.compose(&c).unwrap().compose(&b).unwrap().compose(&a).unwrap();
        let round = chain.inverse().compose(&chain).unwrap();
        let eye = DMatrix::identity(4, 4);
        assert!((round.matrix() - eye).iter().all(|v| v.abs() < 1e-12));
        assert!(round.shift().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn shear_then_measurement_order_matches_momentum_update() {
        // P(m) adds m·q to p and leaves q alone.
        let m = 0.75;
        let shear = SymplecticTransform::shear(1, 0, m).unwrap();
        let state = GaussianState::vacuum(1).unwrap();
        let sheared = shear.apply_to(&state).unwrap();
        assert!((sheared.q_variance(0) - 0.5).abs() < 1e-15);
        assert!((sheared.p_variance(0) - 0.5 * (1.0 + m * m)).abs() < 1e-15);
        assert!((sheared.cov()[(0, 1)] - 0.5 * m).abs() < 1e-15);
    }

    #[test]
    fn displacements_shift_means_only() {
        let state = GaussianState::vacuum(2).unwrap();
        let moved = SymplecticTransform::displace_q(2, 1, 3.0)
            .unwrap()
            .compose(&SymplecticTransform::displace_p(2, 0, -2.0).unwrap())
            .unwrap()
            .apply_to(&state)
            .unwrap();
        assert_eq!(moved.mean()[1], 3.0);
        assert_eq!(moved.mean()[2], -2.0);
        assert_eq!(moved.cov(), state.cov());
    }
}
