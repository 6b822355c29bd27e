use std::f64::consts::TAU;

use nalgebra::{DVector, Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{GaussianState, MeasurementOutcome, OutcomeBasis};
use crate::Result;

/// Which quadrature of a mode a homodyne detector reads out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    Q,
    P,
}

/// Result of conditioning on a measurement: the post-measurement state of
/// the surviving modes plus the recorded outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditioningOutcome {
    pub state: GaussianState,
    pub outcome: MeasurementOutcome,
}

/// Marginal variances this far below anything physical are treated as exactly
/// singular and conditioned with the pseudo-inverse (no update).
const SINGULAR_FLOOR: f64 = 1e-12;

/// Mean and variance of the Gaussian marginal of one quadrature.
pub fn quadrature_marginal(
    state: &GaussianState,
    mode: usize,
    quadrature: Quadrature,
) -> Result<(f64, f64)> {
    state.expect_mode(mode)?;
    let idx = flat_index(state, mode, quadrature);
    Ok((state.mean()[idx], state.cov()[(idx, idx)]))
}

/// Draws a homodyne outcome from the exact marginal distribution.
pub fn sample_quadrature<R: Rng + ?Sized>(
    state: &GaussianState,
    mode: usize,
    quadrature: Quadrature,
    rng: &mut R,
) -> Result<f64> {
    let (mean, var) = quadrature_marginal(state, mode, quadrature)?;
    let z: f64 = rng.sample(StandardNormal);
    Ok(mean + var.max(0.0).sqrt() * z)
}

/// Projects one quadrature of `mode` onto the value `outcome` and discards
/// the measured mode.
///
/// The survivors get the standard Gaussian conditional update
/// μ' = μᵣ + Σᵣₐ(v − μₐ)/Σₐₐ, Σ' = Σᵣᵣ − ΣᵣₐΣₐᵣ/Σₐₐ; a singular marginal
/// falls back to the pseudo-inverse, which leaves the state untouched. The
/// returned density is the marginal probability density of the outcome.
pub fn condition_on_quadrature(
    state: &GaussianState,
    mode: usize,
    quadrature: Quadrature,
    outcome: f64,
) -> Result<ConditioningOutcome> {
    state.expect_mode(mode)?;
    let idx = flat_index(state, mode, quadrature);
    let dim = 2 * state.n_modes();
    let var = state.cov()[(idx, idx)];
    let inv = if var > SINGULAR_FLOOR { 1.0 / var } else { 0.0 };

    let shift = (outcome - state.mean()[idx]) * inv;
    let mut mean = state.mean().clone();
    let mut cov = state.cov().clone();
    let column: DVector<f64> = state.cov().column(idx).into();
    for i in 0..dim {
        mean[i] += column[i] * shift;
        for j in 0..dim {
            cov[(i, j)] -= column[i] * column[j] * inv;
        }
    }
    let density = normal_density(outcome, state.mean()[idx], var.max(SINGULAR_FLOOR));

    let conditioned = GaussianState::from_parts_unchecked(mean, cov);
    Ok(ConditioningOutcome {
        state: conditioned.remove_mode(mode),
        outcome: MeasurementOutcome {
            mode,
            basis: OutcomeBasis::Quadrature(quadrature),
            values: vec![outcome],
            density,
        },
    })
}

/// Heterodyne detection of `mode` at the phase-space point (qv, pv): both
/// quadratures are read out simultaneously at the cost of one extra unit of
/// vacuum noise on each.
///
/// Implemented by adding I/2 to the measured mode's covariance block and
/// conditioning on both coordinates. The returned density is the Husimi
/// function of the pre-measurement state at the outcome point.
pub fn condition_heterodyne(
    state: &GaussianState,
    mode: usize,
    qv: f64,
    pv: f64,
) -> Result<ConditioningOutcome> {
    state.expect_mode(mode)?;
    let qi = state.q_index(mode);
    let pi = state.p_index(mode);
    let dim = 2 * state.n_modes();

    let mut smeared = state.cov().clone();
    smeared[(qi, qi)] += 0.5;
    smeared[(pi, pi)] += 0.5;

    let block = Matrix2::new(
        smeared[(qi, qi)],
        smeared[(qi, pi)],
        smeared[(pi, qi)],
        smeared[(pi, pi)],
    );
    // Always invertible: the block dominates I/2.
    let block_inv = block.try_inverse().expect("heterodyne block is positive definite");
    let residual = Vector2::new(qv - state.mean()[qi], pv - state.mean()[pi]);
    let gain = block_inv * residual;

    let mut mean = state.mean().clone();
    let mut cov = smeared.clone();
    let col_q: DVector<f64> = smeared.column(qi).into();
    let col_p: DVector<f64> = smeared.column(pi).into();
    for i in 0..dim {
        mean[i] += col_q[i] * gain[0] + col_p[i] * gain[1];
        let wq = col_q[i] * block_inv[(0, 0)] + col_p[i] * block_inv[(1, 0)];
        let wp = col_q[i] * block_inv[(0, 1)] + col_p[i] * block_inv[(1, 1)];
        for j in 0..dim {
            cov[(i, j)] -= wq * col_q[j] + wp * col_p[j];
        }
    }

    let det = block[(0, 0)] * block[(1, 1)] - block[(0, 1)] * block[(1, 0)];
    let density = (-0.5 * residual.dot(&gain)).exp() / (TAU * det.sqrt());

    let conditioned = GaussianState::from_parts_unchecked(mean, cov);
    Ok(ConditioningOutcome {
        state: conditioned.remove_mode(mode),
        outcome: MeasurementOutcome {
            mode,
            basis: OutcomeBasis::Heterodyne,
            values: vec![qv, pv],
            density,
        },
    })
}

fn flat_index(state: &GaussianState, mode: usize, quadrature: Quadrature) -> usize {
    match quadrature {
        Quadrature::Q => state.q_index(mode),
        Quadrature::P => state.p_index(mode),
    }
}

fn normal_density(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / var).exp() / (TAU * var).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SymplecticTransform;

    fn cz_pair() -> GaussianState {
        let vac = GaussianState::vacuum(2).unwrap();
        SymplecticTransform::cz(2, 0, 1, 1.0)
            .unwrap()
            .apply_to(&vac)
            .unwrap()
    }

    #[test]
    fn cz_on_vacua_has_frozen_covariance() {
        let state = cz_pair();
        let expected = [
            [0.5, 0.0, 0.0, 0.5],
            [0.0, 0.5, 0.5, 0.0],
            [0.0, 0.5, 1.0, 0.0],
            [0.5, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (state.cov()[(i, j)] - expected[i][j]).abs() < 1e-14,
                    "cov[{i}][{j}] = {}",
                    state.cov()[(i, j)]
                );
            }
        }
    }

    #[test]
    fn p_measurement_on_cz_pair_matches_hand_values() {
        let state = cz_pair();
        let t = 0.8;
        let out = condition_on_quadrature(&state, 0, Quadrature::P, t).unwrap();

        assert_eq!(out.state.n_modes(), 1);
        assert!((out.state.mean()[0] - t / 2.0).abs() < 1e-14);
        assert!(out.state.mean()[1].abs() < 1e-14);
        assert!((out.state.cov()[(0, 0)] - 0.25).abs() < 1e-14);
        assert!((out.state.cov()[(1, 1)] - 1.0).abs() < 1e-14);
        assert!(out.state.cov()[(0, 1)].abs() < 1e-14);

        let expected_density = (-0.5 * t * t).exp() / TAU.sqrt();
        assert!((out.outcome.density - expected_density).abs() < 1e-14);
    }

    #[test]
    fn marginal_and_sampling_agree_on_moments() {
        use rand::SeedableRng;
        let state = cz_pair();
        let (mean, var) = quadrature_marginal(&state, 0, Quadrature::P).unwrap();
        assert!((mean - 0.0).abs() < 1e-15);
        assert!((var - 1.0).abs() < 1e-15);

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 20_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| sample_quadrature(&state, 0, Quadrature::P, &mut rng).unwrap())
            .collect();
        let m: f64 = samples.iter().sum::<f64>() / n as f64;
        let v: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
        assert!(m.abs() < 0.03, "sample mean {m}");
        assert!((v - 1.0).abs() < 0.05, "sample variance {v}");
    }

    #[test]
    fn heterodyne_on_vacuum_returns_husimi_density() {
        let vac = GaussianState::vacuum(2).unwrap();
        let (qv, pv) = (0.3, -0.4);
        let out = condition_heterodyne(&vac, 0, qv, pv).unwrap();
        let expected = (-0.5 * (qv * qv + pv * pv)).exp() / TAU;
        assert!((out.outcome.density - expected).abs() < 1e-14);
        // The unmeasured mode was uncorrelated: still vacuum.
        assert!((out.state.cov()[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((out.state.cov()[(1, 1)] - 0.5).abs() < 1e-14);
        assert!(out.state.mean().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn conditioning_reduces_entropy_never_below_physical() {
        let state = cz_pair();
        let out = condition_on_quadrature(&state, 1, Quadrature::Q, 1.3).unwrap();
        let nu = out.state.symplectic_eigenvalues().unwrap();
        assert!(nu[0] >= 0.5 - 1e-12, "nu = {}", nu[0]);
    }
}
